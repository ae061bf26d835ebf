//! Predicted versus measured cooling of the silicon phantom.
//!
//! cargo run --example phantom_comparison [out.svg]

use coolsim::harness::{comparison_csv, comparison_svg, default_phantom_report, skin_prediction};
use coolsim::io::write_atomic;
use coolsim::Precision;

fn main() -> coolsim::Result<()> {
    for precision in [Precision::Published, Precision::Exact] {
        println!("# {precision:?}");
        print!("{}", comparison_csv(&default_phantom_report(precision)));
    }
    println!("skin, 3 m/s for 3 s: {:.2} K", skin_prediction(3.0, 3.0)?);

    if let Some(path) = std::env::args().nth(1) {
        let svg = comparison_svg(&default_phantom_report(Precision::Published));
        write_atomic(path.as_ref(), &svg)?;
    }
    Ok(())
}
