//! Simulated two-interval observer standing in for human participants.
//!
//! Each interval produces an internal coldness `f(v) + N(0, noise_sd)`; the
//! observer reports the comparison as colder when its draw is larger. The
//! resulting psychometric function is `Phi((f(v) - f(s)) / (sqrt2 * noise_sd))`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::normal::QUARTILE_Z;
use super::schedule::{stream_rng, ScheduledTrial, StimulusSchedule, OBSERVER_STREAM};
use super::TrialRecord;
use crate::error::{ensure_positive, Error, Result};
use crate::thermo::{DropFormula, Precision, Preset};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Velocity -> internal coldness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseMap {
    /// Predicted skin temperature drop (K) after `duration` seconds.
    SkinDrop {
        duration: f64,
        precision: Precision,
    },
    Linear {
        slope: f64,
        intercept: f64,
    },
}

impl Default for ResponseMap {
    fn default() -> Self {
        ResponseMap::SkinDrop {
            duration: 2.0,
            precision: Precision::Exact,
        }
    }
}

impl ResponseMap {
    fn formula(precision: Precision) -> DropFormula {
        Preset::Skin.setup().formula(precision)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResponseMap::SkinDrop { duration, .. } => {
                ensure_positive("response duration", duration)
            }
            ResponseMap::Linear { slope, intercept } => {
                ensure_positive("response slope", slope)?;
                if intercept.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "response intercept",
                        value: intercept,
                        reason: "must be finite",
                    })
                }
            }
        }
    }

    pub fn response(&self, v: f64) -> f64 {
        match *self {
            ResponseMap::SkinDrop {
                duration,
                precision,
            } => {
                let f = Self::formula(precision);
                let ut = v * duration;
                f.gain * ut / (f.k * ut + 1.0)
            }
            ResponseMap::Linear { slope, intercept } => intercept + slope * v,
        }
    }

    pub fn slope(&self, v: f64) -> f64 {
        match *self {
            ResponseMap::SkinDrop {
                duration,
                precision,
            } => Self::formula(precision).velocity_slope(v, duration),
            ResponseMap::Linear { slope, .. } => slope,
        }
    }

    /// Velocity with the given internal response, if within the map's range.
    pub fn inverse(&self, r: f64) -> Option<f64> {
        match *self {
            ResponseMap::SkinDrop {
                duration,
                precision,
            } => Self::formula(precision).velocity_for_drop(r, duration),
            ResponseMap::Linear { slope, intercept } => Some((r - intercept) / slope),
        }
    }
}

/// How an observer's noise level was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub target_jnd: f64,
    pub standard: f64,
    pub slope_at_standard: f64,
    /// `target * slope / (QUARTILE_Z * sqrt2)`, the small-noise estimate.
    pub linearized_noise_sd: f64,
    /// JND of the exact psychometric function at the chosen noise.
    pub asymptotic_jnd: f64,
    pub relative_error: f64,
    pub bisection_iterations: usize,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverModel {
    /// Internal-response units (K for the skin map).
    pub noise_sd: f64,
    #[serde(default)]
    pub response_map: ResponseMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRecord>,
}

impl ObserverModel {
    pub fn new(noise_sd: f64, response_map: ResponseMap) -> Result<Self> {
        let model = Self {
            noise_sd,
            response_map,
            calibration: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("noise_sd", self.noise_sd)?;
        self.response_map.validate()
    }

    /// P(comparison judged colder) without sampling noise.
    pub fn probability_colder(&self, comparison: f64, standard: f64) -> f64 {
        let d = self.response_map.response(comparison) - self.response_map.response(standard);
        super::normal::cdf(d / (SQRT_2 * self.noise_sd))
    }

    /// Quartile half-difference of the exact psychometric function around
    /// `standard`, or `None` if a quartile point leaves the map's range.
    pub fn asymptotic_jnd(&self, standard: f64) -> Option<f64> {
        let centre = self.response_map.response(standard);
        let offset = QUARTILE_Z * SQRT_2 * self.noise_sd;
        let upper = self.response_map.inverse(centre + offset)?;
        let lower = self.response_map.inverse(centre - offset)?;
        Some((upper - lower) / 2.0)
    }
}

/// One trial with the given noise stream.
pub fn simulate_trial<R: Rng + ?Sized>(
    observer: &ObserverModel,
    trial: &ScheduledTrial,
    rng: &mut R,
) -> TrialRecord {
    let noise = Normal::new(0.0, observer.noise_sd).expect("noise_sd validated > 0");
    let map = &observer.response_map;
    let (first, second) = if trial.comparison_first {
        (trial.comparison, trial.standard)
    } else {
        (trial.standard, trial.comparison)
    };
    let r_first = map.response(first) + noise.sample(rng);
    let r_second = map.response(second) + noise.sample(rng);
    let (r_comparison, r_standard) = if trial.comparison_first {
        (r_first, r_second)
    } else {
        (r_second, r_first)
    };
    TrialRecord {
        trial: trial.index,
        comparison: trial.comparison,
        standard: trial.standard,
        comparison_first: trial.comparison_first,
        response_comparison_colder: r_comparison > r_standard,
    }
}

/// Runs every scheduled trial with the observer noise stream for `seed`.
pub fn run_session(
    schedule: &StimulusSchedule,
    observer: &ObserverModel,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    observer.validate()?;
    let mut rng = stream_rng(seed, OBSERVER_STREAM);
    Ok(schedule
        .trials
        .iter()
        .map(|t| simulate_trial(observer, t, &mut rng))
        .collect())
}

const MAX_BISECTION: usize = 200;

/// Chooses `noise_sd` so the observer's asymptotic JND at `standard` matches
/// `target_jnd`.
pub fn calibrate_observer(
    target_jnd: f64,
    response_map: ResponseMap,
    standard: f64,
) -> Result<ObserverModel> {
    ensure_positive("target_jnd", target_jnd)?;
    response_map.validate()?;
    let slope = response_map.slope(standard);
    ensure_positive("response slope at standard", slope)?;
    let linearized = target_jnd * slope / (QUARTILE_Z * SQRT_2);

    let jnd_at = |sd: f64| {
        ObserverModel {
            noise_sd: sd,
            response_map,
            calibration: None,
        }
        .asymptotic_jnd(standard)
    };

    // Largest noise whose quartile points stay inside the map's range.
    let mut hi = linearized.max(1e-6);
    while jnd_at(hi).is_some_and(|j| j < target_jnd) {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    if jnd_at(hi).is_none() {
        let (mut ok, mut bad) = (0.0, hi);
        for _ in 0..MAX_BISECTION {
            let mid = 0.5 * (ok + bad);
            if jnd_at(mid).is_some() {
                ok = mid;
            } else {
                bad = mid;
            }
        }
        hi = ok;
        match jnd_at(hi) {
            Some(j) if j >= target_jnd => {}
            best => {
                return Err(Error::Unreachable(format!(
                    "largest reachable JND is {:.4} m/s (< {target_jnd})",
                    best.unwrap_or(0.0)
                )))
            }
        }
    }

    let mut lo = 0.0;
    let mut iterations = 0;
    while iterations < MAX_BISECTION && hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        match jnd_at(mid) {
            Some(j) if j < target_jnd => lo = mid,
            _ => hi = mid,
        }
        iterations += 1;
    }
    let noise_sd = 0.5 * (lo + hi);
    let achieved = jnd_at(noise_sd)
        .ok_or_else(|| Error::Unreachable("bisection left the response map's range".into()))?;
    let relative_error = (achieved - target_jnd).abs() / target_jnd;
    if relative_error > 0.01 {
        return Err(Error::Unreachable(format!(
            "achieved JND {achieved} misses target {target_jnd} by {relative_error:.3}"
        )));
    }
    Ok(ObserverModel {
        noise_sd,
        response_map,
        calibration: Some(CalibrationRecord {
            target_jnd,
            standard,
            slope_at_standard: slope,
            linearized_noise_sd: linearized,
            asymptotic_jnd: achieved,
            relative_error,
            bisection_iterations: iterations,
            method: "bisection on noise_sd; JND = (f^-1(f(s) + z*sqrt2*sd) - f^-1(f(s) - z*sqrt2*sd)) / 2, z = Phi^-1(0.75)".into(),
        }),
    })
}
