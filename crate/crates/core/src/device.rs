//! Generation chain: compressor -> vortex tube -> PWM solenoid valve -> nozzle.
//!
//! The vortex tube is a calibrated affine map around one measured operating
//! point, not a thermodynamic model. The valve maps PWM duty ratio to outlet
//! velocity through a piecewise-linear calibration table.

use std::path::Path;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

pub const DEFAULT_PWM_FREQUENCY: f64 = 300.0;

const DEFAULT_CALIBRATION: &str = include_str!("../data/valve_calibration.json");

/// Supply conditions of the vortex tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexTubeSpec {
    /// Fraction of supplied air leaving the cold outlet, in (0, 1).
    pub cold_fraction: f64,
    /// Pa
    pub supply_pressure: f64,
    /// K
    pub supply_temperature: f64,
    /// Measured cold-outlet temperature; overrides the affine map when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cold_outlet_temperature: Option<f64>,
}

impl Default for VortexTubeSpec {
    fn default() -> Self {
        Self {
            cold_fraction: 0.5,
            supply_pressure: 0.7e6,
            supply_temperature: 295.15,
            cold_outlet_temperature: None,
        }
    }
}

/// Affine cold-outlet model anchored at a reference operating point.
///
/// ```text
/// T_cold = T_ref + temperature_slope * (T_supply - T_supply_ref)
///                - pressure_slope * (p - p_ref)
///                + fraction_slope * (f - f_ref)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VortexTubeModel {
    pub reference_supply_temperature: f64,
    pub reference_pressure: f64,
    pub reference_cold_fraction: f64,
    pub reference_cold_temperature: f64,
    /// K per K of supply temperature.
    pub temperature_slope: f64,
    /// K per Pa.
    pub pressure_slope: f64,
    /// K per unit cold fraction.
    pub fraction_slope: f64,
    pub pressure_band: (f64, f64),
}

impl Default for VortexTubeModel {
    fn default() -> Self {
        // 22 C supply at 0.6-0.8 MPa, 50% cold fraction -> -16 C.
        Self {
            reference_supply_temperature: 295.15,
            reference_pressure: 0.7e6,
            reference_cold_fraction: 0.5,
            reference_cold_temperature: 257.15,
            temperature_slope: 1.0,
            pressure_slope: 25.0e-6,
            fraction_slope: 30.0,
            pressure_band: (0.6e6, 0.8e6),
        }
    }
}

impl VortexTubeModel {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(
            "reference_supply_temperature",
            self.reference_supply_temperature,
        )?;
        ensure_positive(
            "reference_cold_temperature",
            self.reference_cold_temperature,
        )?;
        for (name, slope) in [
            ("temperature_slope", self.temperature_slope),
            ("pressure_slope", self.pressure_slope),
            ("fraction_slope", self.fraction_slope),
        ] {
            if !(slope.is_finite() && slope >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: slope,
                    reason: "slopes must be finite and >= 0",
                });
            }
        }
        let (lo, hi) = self.pressure_band;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
            return Err(Error::InvalidScenario(format!(
                "pressure band [{lo}, {hi}] is not an ordered positive interval"
            )));
        }
        Ok(())
    }

    /// Temperature of the generated cold air, K.
    pub fn cold_air_temperature(&self, spec: &VortexTubeSpec) -> Result<f64> {
        if !(spec.cold_fraction > 0.0 && spec.cold_fraction < 1.0) {
            return Err(Error::InvalidParameter {
                name: "cold_fraction",
                value: spec.cold_fraction,
                reason: "must lie in (0, 1)",
            });
        }
        ensure_positive("supply_temperature", spec.supply_temperature)?;
        let (lo, hi) = self.pressure_band;
        if !(spec.supply_pressure >= lo && spec.supply_pressure <= hi) {
            return Err(Error::PressureOutOfBand {
                pressure: spec.supply_pressure,
                low: lo,
                high: hi,
            });
        }
        let cold = match spec.cold_outlet_temperature {
            Some(measured) => measured,
            None => {
                self.reference_cold_temperature
                    + self.temperature_slope
                        * (spec.supply_temperature - self.reference_supply_temperature)
                    - self.pressure_slope * (spec.supply_pressure - self.reference_pressure)
                    + self.fraction_slope * (spec.cold_fraction - self.reference_cold_fraction)
            }
        };
        ensure_positive("cold_outlet_temperature", cold)?;
        if cold >= spec.supply_temperature {
            return Err(Error::InvalidScenario(format!(
                "cold outlet {cold} K is not below supply {} K",
                spec.supply_temperature
            )));
        }
        Ok(cold)
    }
}

/// Convenience wrapper using the default affine model.
pub fn cold_air_temperature(spec: &VortexTubeSpec) -> Result<f64> {
    VortexTubeModel::default().cold_air_temperature(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValveCommand {
    pub duty_ratio: f64,
    /// Hz. Carried for logging; the static mapping ignores it.
    pub pwm_frequency: f64,
}

impl ValveCommand {
    pub fn new(duty_ratio: f64) -> Result<Self> {
        let cmd = Self {
            duty_ratio,
            pwm_frequency: DEFAULT_PWM_FREQUENCY,
        };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.duty_ratio) {
            return Err(Error::InvalidParameter {
                name: "duty_ratio",
                value: self.duty_ratio,
                reason: "must lie in [0, 1]",
            });
        }
        ensure_positive("pwm_frequency", self.pwm_frequency)
    }
}

/// Duty ratio -> outlet velocity breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCalibration", into = "RawCalibration")]
pub struct ValveCalibration {
    breakpoints: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawCalibration {
    breakpoints: Vec<[f64; 2]>,
}

impl TryFrom<RawCalibration> for ValveCalibration {
    type Error = Error;

    fn try_from(raw: RawCalibration) -> Result<Self> {
        ValveCalibration::new(raw.breakpoints.into_iter().map(|[d, v]| (d, v)).collect())
    }
}

impl From<ValveCalibration> for RawCalibration {
    fn from(cal: ValveCalibration) -> Self {
        RawCalibration {
            breakpoints: cal.breakpoints.iter().map(|&(d, v)| [d, v]).collect(),
        }
    }
}

impl Default for ValveCalibration {
    fn default() -> Self {
        Self::from_json(DEFAULT_CALIBRATION).expect("bundled calibration is valid")
    }
}

impl ValveCalibration {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidCalibration(msg));
        let Some(&(first_duty, first_velocity)) = breakpoints.first() else {
            return bad("no breakpoints".into());
        };
        if first_velocity != 0.0 {
            return bad(format!("first velocity must be 0, got {first_velocity}"));
        }
        for &(d, v) in &breakpoints {
            if !(0.0..=1.0).contains(&d) || !v.is_finite() || v < 0.0 {
                return bad(format!("breakpoint ({d}, {v}) out of range"));
            }
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad(format!("duty ratios not strictly increasing at {}", w[1].0));
            }
            if w[1].1 < w[0].1 {
                return bad(format!("velocities decrease at duty {}", w[1].0));
            }
        }
        debug!(
            "valve calibration: {} breakpoints from duty {first_duty}",
            breakpoints.len()
        );
        Ok(Self { breakpoints })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn max_velocity(&self) -> f64 {
        self.breakpoints.last().map_or(0.0, |b| b.1)
    }

    /// Duty ratio at which the valve starts passing air.
    pub fn opening_duty(&self) -> f64 {
        self.breakpoints[0].0
    }

    fn velocity_at(&self, duty: f64) -> f64 {
        let bps = &self.breakpoints;
        if duty <= bps[0].0 {
            return 0.0;
        }
        for w in bps.windows(2) {
            let ((d0, v0), (d1, v1)) = (w[0], w[1]);
            if duty <= d1 {
                return v0 + (duty - d0) / (d1 - d0) * (v1 - v0);
            }
        }
        self.max_velocity()
    }

    fn duty_for(&self, target: f64) -> Result<f64> {
        let max = self.max_velocity();
        if target.is_nan() || target < 0.0 || target > max {
            return Err(Error::VelocityOutOfRange { target, max });
        }
        let bps = &self.breakpoints;
        if target <= bps[0].1 {
            return Ok(bps[0].0);
        }
        for w in bps.windows(2) {
            let ((d0, v0), (d1, v1)) = (w[0], w[1]);
            if v1 >= target {
                // v0 < target here, so the segment is strictly increasing.
                return Ok(d0 + (target - v0) / (v1 - v0) * (d1 - d0));
            }
        }
        unreachable!("target within calibrated range")
    }
}

/// Outlet velocity produced by a duty command, m/s.
pub fn duty_to_velocity(cmd: &ValveCommand, cal: &ValveCalibration) -> Result<f64> {
    cmd.validate()?;
    if cmd.pwm_frequency != DEFAULT_PWM_FREQUENCY {
        debug!(
            "pwm frequency {} Hz (static map ignores it)",
            cmd.pwm_frequency
        );
    }
    Ok(cal.velocity_at(cmd.duty_ratio))
}

/// Smallest duty ratio that reaches `target` m/s.
pub fn velocity_to_duty(target: f64, cal: &ValveCalibration) -> Result<f64> {
    cal.duty_for(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_segment() -> ValveCalibration {
        ValveCalibration::new(vec![(0.6, 0.0), (0.7, 1.0), (0.8, 1.0), (1.0, 4.0)]).unwrap()
    }

    #[test]
    fn default_calibration_spans_range() {
        let cal = ValveCalibration::default();
        assert_eq!(cal.breakpoints(), &[(0.65, 0.0), (1.0, 3.7)]);
        assert_eq!(cal.max_velocity(), 3.7);
    }

    #[test]
    fn reference_operating_point() {
        let t = cold_air_temperature(&VortexTubeSpec::default()).unwrap();
        assert!((t - 257.15).abs() < 1e-9);
    }

    #[test]
    fn supply_shift_passes_through() {
        let base = VortexTubeSpec::default();
        let warmer = VortexTubeSpec {
            supply_temperature: base.supply_temperature + 5.0,
            ..base
        };
        let d = cold_air_temperature(&warmer).unwrap() - cold_air_temperature(&base).unwrap();
        assert!((d - 5.0).abs() < 1e-9);
    }

    #[test]
    fn higher_pressure_is_colder() {
        let at = |p| {
            cold_air_temperature(&VortexTubeSpec {
                supply_pressure: p,
                ..Default::default()
            })
            .unwrap()
        };
        assert!(at(0.8e6) <= at(0.6e6));
        assert!(at(0.8e6) < at(0.7e6));
    }

    #[test]
    fn larger_cold_fraction_is_warmer() {
        let at = |f| {
            cold_air_temperature(&VortexTubeSpec {
                cold_fraction: f,
                ..Default::default()
            })
            .unwrap()
        };
        assert!(at(0.7) > at(0.5));
    }

    #[test]
    fn vortex_rejects_bad_specs() {
        let bad_p = VortexTubeSpec {
            supply_pressure: 0.5e6,
            ..Default::default()
        };
        assert!(matches!(
            cold_air_temperature(&bad_p),
            Err(Error::PressureOutOfBand { .. })
        ));
        let bad_f = VortexTubeSpec {
            cold_fraction: 1.0,
            ..Default::default()
        };
        assert!(cold_air_temperature(&bad_f).is_err());
        let measured_hot = VortexTubeSpec {
            cold_outlet_temperature: Some(300.0),
            ..Default::default()
        };
        assert!(cold_air_temperature(&measured_hot).is_err());
        let measured = VortexTubeSpec {
            cold_outlet_temperature: Some(253.15),
            ..Default::default()
        };
        assert_eq!(cold_air_temperature(&measured).unwrap(), 253.15);
    }

    #[test]
    fn duty_mapping_cases() {
        let cal = three_segment();
        let v = |d| duty_to_velocity(&ValveCommand::new(d).unwrap(), &cal).unwrap();
        assert_eq!(v(0.0), 0.0);
        assert_eq!(v(0.6), 0.0);
        assert_eq!(v(0.7), 1.0);
        assert_eq!(v(1.0), 4.0);
        // midway between (0.8, 1.0) and (1.0, 4.0)
        assert!((v(0.9) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn last_breakpoint_below_full_duty() {
        let cal = ValveCalibration::new(vec![(0.5, 0.0), (0.9, 3.0)]).unwrap();
        let v = duty_to_velocity(&ValveCommand::new(1.0).unwrap(), &cal).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn inverse_boundaries() {
        let cal = three_segment();
        assert_eq!(velocity_to_duty(0.0, &cal).unwrap(), 0.6);
        assert_eq!(velocity_to_duty(4.0, &cal).unwrap(), 1.0);
        // flat segment: smallest duty reaching 1.0 m/s
        assert_eq!(velocity_to_duty(1.0, &cal).unwrap(), 0.7);
        assert!(matches!(
            velocity_to_duty(4.1, &cal),
            Err(Error::VelocityOutOfRange { .. })
        ));
    }

    #[test]
    fn invalid_calibrations() {
        assert!(ValveCalibration::new(vec![]).is_err());
        assert!(ValveCalibration::new(vec![(0.5, 0.1)]).is_err());
        assert!(ValveCalibration::new(vec![(0.5, 0.0), (0.5, 1.0)]).is_err());
        assert!(ValveCalibration::new(vec![(0.5, 0.0), (0.7, 2.0), (0.9, 1.0)]).is_err());
        assert!(ValveCalibration::from_json(r#"{"breakpoints": []}"#).is_err());
    }

    #[test]
    fn invalid_commands() {
        assert!(ValveCommand::new(1.2).is_err());
        let cmd = ValveCommand {
            duty_ratio: 0.5,
            pwm_frequency: 0.0,
        };
        assert!(cmd.validate().is_err());
    }

    #[test]
    fn round_trip_random_targets() {
        use rand::{Rng, SeedableRng};
        let cal = ValveCalibration::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let target = rng.random_range(0.0..=cal.max_velocity());
            let duty = velocity_to_duty(target, &cal).unwrap();
            let back = duty_to_velocity(&ValveCommand::new(duty).unwrap(), &cal).unwrap();
            assert!((back - target).abs() < 1e-9);
        }
    }

    fn arb_calibration() -> impl Strategy<Value = ValveCalibration> {
        (
            0.0f64..0.5,
            prop::collection::vec((0.01f64..0.2, 0.0f64..2.0), 1..6),
        )
            .prop_map(|(start, steps)| {
                let mut bps = vec![(start, 0.0)];
                let (mut d, mut v) = (start, 0.0);
                for (dd, dv) in steps {
                    d = (d + dd).min(1.0);
                    if d <= bps.last().unwrap().0 {
                        break;
                    }
                    v += dv;
                    bps.push((d, v));
                }
                ValveCalibration::new(bps).unwrap()
            })
    }

    proptest! {
        #[test]
        fn velocity_monotone_in_duty(cal in arb_calibration(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let vl = duty_to_velocity(&ValveCommand::new(lo).unwrap(), &cal).unwrap();
            let vh = duty_to_velocity(&ValveCommand::new(hi).unwrap(), &cal).unwrap();
            prop_assert!(vl <= vh);
        }

        #[test]
        fn inverse_round_trip(cal in arb_calibration(), frac in 0.0f64..=1.0) {
            let target = frac * cal.max_velocity();
            let duty = velocity_to_duty(target, &cal).unwrap();
            let back = duty_to_velocity(&ValveCommand::new(duty).unwrap(), &cal).unwrap();
            prop_assert!((back - target).abs() < 1e-9);
        }

        #[test]
        fn cold_temperature_monotone(p1 in 0.6e6f64..0.8e6, p2 in 0.6e6f64..0.8e6,
                                     s1 in 280.0f64..310.0, s2 in 280.0f64..310.0) {
            let model = VortexTubeModel::default();
            let t = |p, s| model.cold_air_temperature(&VortexTubeSpec {
                supply_pressure: p, supply_temperature: s, ..Default::default()
            }).unwrap();
            if p1 <= p2 { prop_assert!(t(p2, s1) <= t(p1, s1)); }
            if s1 <= s2 { prop_assert!(t(p1, s1) <= t(p1, s2)); }
        }
    }
}
