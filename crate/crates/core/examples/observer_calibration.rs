//! Tune observer noise to a target JND and check it over many sessions.
//!
//! cargo run --release --example observer_calibration [target] [sessions]

use coolsim::device::ValveCalibration;
use coolsim::psychophys::{calibrate_observer, monte_carlo_jnd, ResponseMap, ScheduleConfig};

fn main() -> coolsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let target: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.2818);
    let sessions: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);

    let observer = calibrate_observer(target, ResponseMap::default(), 2.0)?;
    println!(
        "noise_sd {:.4}, asymptotic JND {:.4} m/s",
        observer.noise_sd,
        observer.asymptotic_jnd(2.0).unwrap_or(f64::NAN)
    );

    let summary = monte_carlo_jnd(
        &ScheduleConfig::default(),
        &observer,
        &ValveCalibration::default(),
        sessions,
        0,
    )?;
    println!(
        "{} sessions: mean JND {:.4} m/s, SD {:.4}, {} degenerate",
        summary.sessions, summary.mean_jnd, summary.sd_jnd, summary.degenerate
    );
    Ok(())
}
