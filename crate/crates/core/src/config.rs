//! Scenario configuration files shared by every command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::device::{ValveCalibration, VortexTubeModel, VortexTubeSpec};
use crate::error::{Error, Result};
use crate::harness::SensorTransientScenario;
use crate::psychophys::{ObserverModel, ScheduleConfig};
use crate::thermo::{AirState, BodyPatch, CoolingSetup, NozzleGeometry, Precision, Preset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Model,
    Exp1,
    Exp2,
    PsyRun,
    PsyFit,
    Calibrate,
}

/// Any subset of fields may be present; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Option<Mode>,
    pub preset: Option<Preset>,
    pub body: Option<BodyPatch>,
    pub air: Option<AirState>,
    pub nozzle: Option<NozzleGeometry>,
    pub precision: Option<Precision>,
    pub vortex: Option<VortexTubeSpec>,
    pub vortex_model: Option<VortexTubeModel>,
    pub calibration: Option<ValveCalibration>,
    pub calibration_file: Option<PathBuf>,
    pub velocities: Option<Vec<f64>>,
    pub duration: Option<f64>,
    pub sensor: Option<SensorTransientScenario>,
    pub schedule: Option<ScheduleConfig>,
    pub observer: Option<ObserverModel>,
    pub target_jnd: Option<f64>,
    pub sessions: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&crate::io::read_to_string(path)?)
    }

    /// Structural checks that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        if let Some(b) = &self.body {
            b.validate()?;
        }
        if let Some(a) = &self.air {
            a.validate()?;
        }
        if let Some(n) = &self.nozzle {
            n.validate()?;
        }
        if let Some(m) = &self.vortex_model {
            m.validate()?;
        }
        if let Some(o) = &self.observer {
            o.validate()?;
        }
        if self.calibration.is_some() && self.calibration_file.is_some() {
            return Err(Error::InvalidScenario(
                "give either `calibration` or `calibration_file`, not both".into(),
            ));
        }
        Ok(())
    }

    /// Checks that fields a command cannot run without are present.
    pub fn require_for(&self, mode: Mode) -> Result<()> {
        let missing = |field: &str| {
            Err(Error::InvalidScenario(format!(
                "mode `{}` requires `{field}`",
                serde_json::to_string(&mode)
                    .unwrap_or_default()
                    .trim_matches('"')
            )))
        };
        match mode {
            Mode::PsyFit if self.trials.is_none() => missing("trials"),
            Mode::Calibrate if self.target_jnd.is_none() => missing("target_jnd"),
            _ => Ok(()),
        }
    }

    pub fn valve_calibration(&self) -> Result<ValveCalibration> {
        match (&self.calibration, &self.calibration_file) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(path)) => ValveCalibration::load(path),
            (None, None) => Ok(ValveCalibration::default()),
        }
    }

    /// Cold-air temperature implied by the vortex tube spec, if one is given.
    pub fn vortex_cold_temperature(&self) -> Result<Option<f64>> {
        self.vortex
            .as_ref()
            .map(|spec| {
                self.vortex_model
                    .unwrap_or_default()
                    .cold_air_temperature(spec)
            })
            .transpose()
    }

    /// Preset with any explicit body/air/nozzle/vortex overrides applied.
    pub fn cooling_setup(&self, default: Preset) -> Result<CoolingSetup> {
        let mut setup = self.preset.unwrap_or(default).setup();
        if let Some(body) = self.body {
            setup.body = body;
        }
        if let Some(air) = self.air {
            setup.air = air;
        }
        if let Some(nozzle) = self.nozzle {
            setup.nozzle = nozzle;
        }
        if let Some(cold) = self.vortex_cold_temperature()? {
            setup.air.temperature = cold;
        }
        setup.validate()?;
        Ok(setup)
    }
}
