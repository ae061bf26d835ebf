//! Temperature at a sensor in front of the outlet for several flow velocities.
//!
//! cargo run --example sensor_transient > transient.csv

use coolsim::harness::{simulate_sensor_transient, transient_csv, SensorTransientScenario};

fn main() -> coolsim::Result<()> {
    let scenario = SensorTransientScenario::default();
    let series = simulate_sensor_transient(&scenario)?;
    for s in &series {
        eprintln!(
            "{:>4} m/s: {:.2} K after {} s",
            s.velocity,
            s.final_temperature(),
            scenario.duration
        );
    }
    print!("{}", transient_csv(&series));
    Ok(())
}
