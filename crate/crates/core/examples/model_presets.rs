//! Cooling coefficient and predicted drops for both built-in bodies.
//!
//! cargo run --example model_presets

use coolsim::thermo::{kelvin_to_celsius, Precision, Preset};

fn main() -> coolsim::Result<()> {
    for preset in [Preset::Silicon, Preset::Skin] {
        let setup = preset.setup();
        let k = setup.coefficient();
        println!(
            "{}: k = {:.6e} (published {:.3}), body {:.2} C, air {:.2} C",
            preset.name(),
            k.value(),
            k.rounded(3).value(),
            kelvin_to_celsius(setup.body.temperature),
            kelvin_to_celsius(setup.air.temperature),
        );
        println!("  u[m/s]  t[s]  dT exact  dT published");
        for u in [1.0, 2.0, 3.0] {
            for t in [1.0, 3.0] {
                println!(
                    "  {u:>6.1} {t:>5.1} {:>9.4} {:>12.4}",
                    setup.drop(u, t, Precision::Exact)?,
                    setup.drop(u, t, Precision::Published)?
                );
            }
        }
    }

    // Warmer skin, same jet.
    let warm = Preset::Skin.setup().with_body_temperature(308.15);
    println!(
        "skin at 35 C, 3 m/s for 3 s: {:.4} K",
        warm.drop(3.0, 3.0, Precision::Exact)?
    );
    Ok(())
}
