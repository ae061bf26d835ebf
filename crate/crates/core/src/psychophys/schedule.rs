use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::ValveCalibration;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Stream used for trial order and presentation order.
pub(crate) const SCHEDULE_STREAM: u64 = 0;
/// Stream used for observer noise.
pub(crate) const OBSERVER_STREAM: u64 = 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Constant-stimuli session parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    /// m/s
    pub standard: f64,
    /// m/s
    pub comparisons: Vec<f64>,
    pub trials_per_comparison: usize,
    /// s
    pub stimulus_duration: f64,
    /// Valve-off interval between the two stimuli, s.
    pub gap_duration: f64,
    /// Break after this many trials; 0 disables breaks.
    pub break_every: usize,
    pub rng_seed: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            standard: 2.0,
            comparisons: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5],
            trials_per_comparison: 10,
            stimulus_duration: 2.0,
            gap_duration: 1.0,
            break_every: 10,
            rng_seed: 0,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self, calibration: &ValveCalibration) -> Result<()> {
        if self.comparisons.is_empty() {
            return Err(Error::InvalidScenario("empty comparison list".into()));
        }
        if self.trials_per_comparison == 0 {
            return Err(Error::InvalidScenario(
                "trials_per_comparison must be > 0".into(),
            ));
        }
        ensure_positive("stimulus_duration", self.stimulus_duration)?;
        ensure_positive("gap_duration", self.gap_duration)?;
        let max = calibration.max_velocity();
        for &v in self
            .comparisons
            .iter()
            .chain(std::iter::once(&self.standard))
        {
            ensure_non_negative("stimulus velocity", v)?;
            if v > max {
                return Err(Error::VelocityOutOfRange { target: v, max });
            }
        }
        Ok(())
    }
}

/// One pairing before the observer responds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTrial {
    pub index: usize,
    pub comparison: f64,
    pub standard: f64,
    pub comparison_first: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusSchedule {
    pub config: ScheduleConfig,
    pub trials: Vec<ScheduledTrial>,
}

/// Start times within a session, excluding response and break time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialTiming {
    pub index: usize,
    pub first_onset: f64,
    pub second_onset: f64,
    pub break_after: bool,
}

impl StimulusSchedule {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn trial_duration(&self) -> f64 {
        2.0 * self.config.stimulus_duration + self.config.gap_duration
    }

    pub fn timeline(&self) -> Vec<TrialTiming> {
        let per_trial = self.trial_duration();
        let every = self.config.break_every;
        let last = self.trials.len().saturating_sub(1);
        self.trials
            .iter()
            .map(|t| {
                let first_onset = t.index as f64 * per_trial;
                TrialTiming {
                    index: t.index,
                    first_onset,
                    second_onset: first_onset
                        + self.config.stimulus_duration
                        + self.config.gap_duration,
                    break_after: every > 0 && (t.index + 1) % every == 0 && t.index != last,
                }
            })
            .collect()
    }

    pub fn breaks(&self) -> usize {
        self.timeline().iter().filter(|t| t.break_after).count()
    }
}

/// Randomized trial order, deterministic in `rng_seed`.
pub fn build_schedule(
    config: &ScheduleConfig,
    calibration: &ValveCalibration,
) -> Result<StimulusSchedule> {
    config.validate(calibration)?;
    let mut rng = stream_rng(config.rng_seed, SCHEDULE_STREAM);
    let mut levels: Vec<f64> = config
        .comparisons
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, config.trials_per_comparison))
        .collect();
    levels.shuffle(&mut rng);
    let trials = levels
        .into_iter()
        .enumerate()
        .map(|(index, comparison)| ScheduledTrial {
            index,
            comparison,
            standard: config.standard,
            comparison_first: rng.random_bool(0.5),
        })
        .collect();
    Ok(StimulusSchedule {
        config: config.clone(),
        trials,
    })
}
