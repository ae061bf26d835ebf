//! Deterministic reproductions of the sensor-transient and phantom-cooling
//! experiments, with the measured phantom drops embedded as reference data.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::ValveCalibration;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::thermo::{CoolingSetup, Precision, Preset};

/// Velocities of the sensor transient runs, m/s.
pub const SENSOR_VELOCITIES: [f64; 8] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5];

/// Sensor placed in front of the outlet, reading a mix of jet and room air.
///
/// The dynamics are a first-order relaxation
/// `dT/dt = -lambda(u) * (T - T_mix(u))` with `lambda(u) = mixing_gain * u`
/// and `T_mix(u) = T_room - (T_room - T_cold) * u / (u + blend_velocity)`.
/// This is a phenomenological stand-in; the sensor's own time constant is
/// folded into `mixing_gain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorTransientScenario {
    pub velocities: Vec<f64>,
    /// s
    pub duration: f64,
    /// Explicit Euler step, s.
    pub time_step: f64,
    /// Spacing of emitted samples, s.
    pub sample_interval: f64,
    pub room_temperature: f64,
    pub cold_temperature: f64,
    /// m
    pub standoff: f64,
    /// 1/m; relaxation rate per unit velocity.
    pub mixing_gain: f64,
    /// m/s; velocity at which the mix sits halfway between room and jet.
    pub blend_velocity: f64,
}

impl Default for SensorTransientScenario {
    fn default() -> Self {
        Self {
            velocities: SENSOR_VELOCITIES.to_vec(),
            duration: 3.0,
            time_step: 1e-3,
            sample_interval: 1e-2,
            room_temperature: 295.15,
            cold_temperature: 257.15,
            standoff: 5e-3,
            mixing_gain: 2.0,
            blend_velocity: 1.5,
        }
    }
}

impl SensorTransientScenario {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("duration", self.duration)?;
        ensure_positive("time_step", self.time_step)?;
        ensure_positive("sample_interval", self.sample_interval)?;
        ensure_positive("room_temperature", self.room_temperature)?;
        ensure_positive("cold_temperature", self.cold_temperature)?;
        ensure_non_negative("standoff", self.standoff)?;
        ensure_positive("mixing_gain", self.mixing_gain)?;
        ensure_positive("blend_velocity", self.blend_velocity)?;
        if self.time_step >= self.duration {
            return Err(Error::InvalidScenario(format!(
                "time_step {} must be shorter than duration {}",
                self.time_step, self.duration
            )));
        }
        if self.sample_interval < self.time_step {
            return Err(Error::InvalidScenario(
                "sample_interval shorter than time_step".into(),
            ));
        }
        for &u in &self.velocities {
            ensure_non_negative("velocity", u)?;
            let step = self.relaxation_rate(u) * self.time_step;
            if step >= 1.0 {
                return Err(Error::InvalidScenario(format!(
                    "unstable step at u={u}: lambda*dt = {step} >= 1"
                )));
            }
        }
        Ok(())
    }

    /// lambda(u), 1/s.
    pub fn relaxation_rate(&self, u: f64) -> f64 {
        self.mixing_gain * u
    }

    /// Temperature the sensor relaxes toward at velocity `u`.
    pub fn mixed_temperature(&self, u: f64) -> f64 {
        let fraction = u / (u + self.blend_velocity);
        self.room_temperature - (self.room_temperature - self.cold_temperature) * fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransientSeries {
    pub velocity: f64,
    /// (t, temperature K)
    pub samples: Vec<(f64, f64)>,
}

impl TransientSeries {
    pub fn final_temperature(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.1)
    }
}

fn integrate(scn: &SensorTransientScenario, u: f64) -> TransientSeries {
    let steps = (scn.duration / scn.time_step).round() as usize;
    let every = ((scn.sample_interval / scn.time_step).round() as usize).max(1);
    let rate = scn.relaxation_rate(u) * scn.time_step;
    let target = scn.mixed_temperature(u);

    let mut temperature = scn.room_temperature;
    let mut samples = Vec::with_capacity(steps / every + 2);
    samples.push((0.0, temperature));
    for i in 1..=steps {
        temperature -= rate * (temperature - target);
        if i % every == 0 || i == steps {
            samples.push((i as f64 * scn.time_step, temperature));
        }
    }
    TransientSeries {
        velocity: u,
        samples,
    }
}

/// One series per scenario velocity, in scenario order.
pub fn simulate_sensor_transient(scn: &SensorTransientScenario) -> Result<Vec<TransientSeries>> {
    scn.validate()?;
    Ok(scn
        .velocities
        .par_iter()
        .map(|&u| integrate(scn, u))
        .collect())
}

/// A measured drop of the phantom sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeasurement {
    pub velocity: f64,
    pub duration: f64,
    pub measured_drop: f64,
}

/// Silicon sheet starting at 21.30 C (294.45 K), 3 s exposures, spatial
/// average read from the thermograph.
///
/// 1.0 m/s: 294.45 -> 294.04 K; 2.0 m/s: -> 293.66 K; 3.0 m/s: -> 293.30 K.
pub const SILICON_REFERENCES: [ReferenceMeasurement; 3] = [
    ReferenceMeasurement {
        velocity: 1.0,
        duration: 3.0,
        measured_drop: 0.41,
    },
    ReferenceMeasurement {
        velocity: 2.0,
        duration: 3.0,
        measured_drop: 0.79,
    },
    ReferenceMeasurement {
        velocity: 3.0,
        duration: 3.0,
        measured_drop: 1.15,
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub velocity: f64,
    pub theoretical: f64,
    pub measured: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub body: String,
    pub duration: f64,
    pub precision: Precision,
    pub rows: Vec<ComparisonRow>,
}

const JOIN_TOLERANCE: f64 = 1e-9;

/// Model drops at each velocity joined against reference measurements.
///
/// Velocities without a reference row keep `measured = None`.
pub fn run_phantom_experiment(
    setup: &CoolingSetup,
    velocities: &[f64],
    duration: f64,
    precision: Precision,
    references: &[ReferenceMeasurement],
    calibration: &ValveCalibration,
) -> Result<ComparisonReport> {
    setup.validate()?;
    ensure_positive("duration", duration)?;
    let max = calibration.max_velocity();
    let formula = setup.formula(precision);
    let rows = velocities
        .iter()
        .map(|&u| {
            if !(u >= 0.0 && u <= max) {
                return Err(Error::VelocityOutOfRange { target: u, max });
            }
            let theoretical = formula.drop(u, duration)?;
            let measured = references
                .iter()
                .find(|r| {
                    (r.velocity - u).abs() < JOIN_TOLERANCE
                        && (r.duration - duration).abs() < JOIN_TOLERANCE
                })
                .map(|r| r.measured_drop);
            Ok(ComparisonRow {
                velocity: u,
                theoretical,
                measured,
                abs_error: measured.map(|m| (theoretical - m).abs()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = if setup == &Preset::Silicon.setup() {
        "silicon".to_string()
    } else if setup == &Preset::Skin.setup() {
        "skin".to_string()
    } else {
        "custom".to_string()
    };
    Ok(ComparisonReport {
        body,
        duration,
        precision,
        rows,
    })
}

/// The silicon comparison at 1, 2 and 3 m/s over 3 s.
pub fn default_phantom_report(precision: Precision) -> ComparisonReport {
    let velocities: Vec<f64> = SILICON_REFERENCES.iter().map(|r| r.velocity).collect();
    run_phantom_experiment(
        &Preset::Silicon.setup(),
        &velocities,
        3.0,
        precision,
        &SILICON_REFERENCES,
        &ValveCalibration::default(),
    )
    .expect("reference velocities are in range")
}

/// Predicted skin drop, K, using the published coefficient rounding.
pub fn skin_prediction(velocity: f64, duration: f64) -> Result<f64> {
    Preset::Skin
        .setup()
        .drop(velocity, duration, Precision::Published)
}

/// `1.0` for one-decimal values, full shortest form otherwise.
pub(crate) fn fmt_velocity(v: f64) -> String {
    if (v * 10.0).fract() == 0.0 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

pub fn transient_csv(series: &[TransientSeries]) -> String {
    let mut out = String::from("velocity,t,temperature_K\n");
    for s in series {
        let v = fmt_velocity(s.velocity);
        for &(t, temp) in &s.samples {
            let _ = writeln!(out, "{v},{t:.3},{temp:.6}");
        }
    }
    out
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("velocity,theoretical_K,measured_K,abs_error_K\n");
    for row in &report.rows {
        // measured values are echoed as recorded
        let measured = row.measured.map(|m| m.to_string()).unwrap_or_default();
        let error = row.abs_error.map(|e| format!("{e:.3}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:.3},{measured},{error}",
            fmt_velocity(row.velocity),
            row.theoretical,
        );
    }
    out
}

/// Line chart of theoretical drops with measured points overlaid.
pub fn comparison_svg(report: &ComparisonReport) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 48.0;
    let x_max = report
        .rows
        .iter()
        .map(|r| r.velocity)
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let y_max = report
        .rows
        .iter()
        .flat_map(|r| [Some(r.theoretical), r.measured])
        .flatten()
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.1;
    let px = |v: f64| PAD + v / x_max * (W - 2.0 * PAD);
    let py = |d: f64| H - PAD - d / y_max * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD},{y0} H{x1} M{PAD},{y0} V{PAD}" stroke="black" fill="none"/>"#,
        y0 = H - PAD,
        x1 = W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">velocity (m/s)</text>"#,
        x = W / 2.0,
        y = H - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{y}" font-size="12" transform="rotate(-90 14 {y})" text-anchor="middle">temperature drop (K)</text>"#,
        y = H / 2.0
    );
    let points: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", px(r.velocity), py(r.theoretical)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#,
        points.join(" ")
    );
    for r in &report.rows {
        if let Some(m) = r.measured {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
                px(r.velocity),
                py(m)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
