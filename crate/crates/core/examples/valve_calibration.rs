//! Duty ratio to outlet velocity and back, plus the vortex-tube cold outlet.
//!
//! cargo run --example valve_calibration [calibration.json]

use coolsim::device::{
    cold_air_temperature, duty_to_velocity, velocity_to_duty, ValveCalibration, ValveCommand,
    VortexTubeSpec,
};

fn main() -> coolsim::Result<()> {
    let cal = match std::env::args().nth(1) {
        Some(path) => ValveCalibration::load(path.as_ref())?,
        None => ValveCalibration::default(),
    };
    println!(
        "breakpoints {:?}, max {} m/s",
        cal.breakpoints(),
        cal.max_velocity()
    );

    for duty in [0.5, 0.65, 0.75, 0.9, 1.0] {
        let v = duty_to_velocity(&ValveCommand::new(duty)?, &cal)?;
        println!("duty {duty:.2} -> {v:.3} m/s");
    }
    for v in [0.5, 2.0, 3.5] {
        println!("{v} m/s needs duty {:.4}", velocity_to_duty(v, &cal)?);
    }
    if let Err(e) = velocity_to_duty(5.0, &cal) {
        println!("5 m/s: {e}");
    }

    for pressure in [0.6e6, 0.7e6, 0.8e6] {
        let spec = VortexTubeSpec {
            supply_pressure: pressure,
            ..Default::default()
        };
        println!(
            "vortex tube at {:.1} MPa: cold outlet {:.2} K",
            pressure / 1e6,
            cold_air_temperature(&spec)?
        );
    }
    Ok(())
}
