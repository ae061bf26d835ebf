//! One simulated constant-stimuli session and its psychometric fit.
//!
//! cargo run --example constant_stimuli_session [seed]

use coolsim::device::ValveCalibration;
use coolsim::psychophys::fit::level_counts;
use coolsim::psychophys::{
    build_schedule, fit_psychometric, run_session, ObserverModel, ResponseMap, ScheduleConfig,
};

fn main() -> coolsim::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let cfg = ScheduleConfig {
        rng_seed: seed,
        ..Default::default()
    };
    let schedule = build_schedule(&cfg, &ValveCalibration::default())?;
    println!(
        "{} trials, {} breaks, {:.0} s of stimulation",
        schedule.len(),
        schedule.breaks(),
        schedule.len() as f64 * schedule.trial_duration()
    );

    let observer = ObserverModel::new(0.8, ResponseMap::default())?;
    let records = run_session(&schedule, &observer, seed)?;
    for level in level_counts(&records) {
        println!(
            "  {:.1} m/s: {}/{} judged colder",
            level.v, level.k, level.n
        );
    }
    match fit_psychometric(&records) {
        Ok(fit) => println!(
            "mu {:.3} m/s, sigma {:.3}, JND {:.3} m/s",
            fit.mu, fit.sigma, fit.jnd
        ),
        Err(e) => println!("no fit: {e}"),
    }
    Ok(())
}
