//! Lumped cooling model relating cold-air flow velocity to the temperature
//! drop of a thin body patch (skin or a silicon phantom).
//!
//! A jet of cold air at `T_a` leaves an outlet of area `A` at velocity `u`.
//! Over a duration `t` it delivers `rho_a * u * A * t` kilograms of air, which
//! warms up to the common final temperature `T_f` of the patch. Equating the
//! heat gained by the air with the heat lost by the patch gives
//!
//! ```text
//! T_s - T_f = k * u * t * (T_f - T_a),   k = C_a rho_a A / (C_s rho_s A_s h_s)
//! ```
//!
//! which closes to `T_f = (T_s + k u T_a t) / (k u t + 1)`.
//!
//! All quantities are SI (J, kg, m, s, K). When `T_a > T_s` the drop is
//! negative, i.e. the patch warms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

pub const CELSIUS_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(celsius: f64) -> f64 {
    celsius + CELSIUS_OFFSET
}

pub fn kelvin_to_celsius(kelvin: f64) -> f64 {
    kelvin - CELSIUS_OFFSET
}

/// Thermophysical state of the cold air jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirState {
    /// J/(kg K)
    pub specific_heat: f64,
    /// kg/m^3
    pub density: f64,
    /// K
    pub temperature: f64,
}

impl AirState {
    pub fn new(specific_heat: f64, density: f64, temperature: f64) -> Result<Self> {
        let air = Self {
            specific_heat,
            density,
            temperature,
        };
        air.validate()?;
        Ok(air)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("air specific_heat", self.specific_heat)?;
        ensure_positive("air density", self.density)?;
        ensure_positive("air temperature", self.temperature)
    }
}

/// The cooled slab: a patch of skin or a phantom sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPatch {
    /// J/(kg K)
    pub specific_heat: f64,
    /// kg/m^3
    pub density: f64,
    /// m^2
    pub area: f64,
    /// m
    pub thickness: f64,
    /// Initial temperature, K.
    pub temperature: f64,
}

impl BodyPatch {
    pub fn new(
        specific_heat: f64,
        density: f64,
        area: f64,
        thickness: f64,
        temperature: f64,
    ) -> Result<Self> {
        let body = Self {
            specific_heat,
            density,
            area,
            thickness,
            temperature,
        };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("body specific_heat", self.specific_heat)?;
        ensure_positive("body density", self.density)?;
        ensure_positive("body area", self.area)?;
        ensure_positive("body thickness", self.thickness)?;
        ensure_positive("body temperature", self.temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NozzleGeometry {
    /// Outlet cross-section, m^2.
    pub outlet_area: f64,
    /// Distance from outlet to the body, m.
    pub standoff: f64,
}

impl NozzleGeometry {
    pub fn new(outlet_area: f64, standoff: f64) -> Result<Self> {
        let geom = Self {
            outlet_area,
            standoff,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("outlet_area", self.outlet_area)?;
        ensure_non_negative("standoff", self.standoff)
    }
}

/// Coupling coefficient `k` between air flow and patch cooling, in 1/m.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoolingCoefficient(f64);

impl CoolingCoefficient {
    pub fn new(k: f64) -> Result<Self> {
        ensure_positive("cooling coefficient", k)?;
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Rounded to a fixed number of decimal places.
    pub fn rounded(self, decimals: u32) -> Self {
        Self(round_decimals(self.0, decimals))
    }
}

impl fmt::Display for CoolingCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} 1/m", self.0)
    }
}

pub(crate) fn round_decimals(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

/// Volumetric flow rate `u * A`, m^3/s.
pub fn flow_rate(u: f64, geom: &NozzleGeometry) -> Result<f64> {
    ensure_non_negative("flow velocity", u)?;
    Ok(u * geom.outlet_area)
}

/// Mass of cold air delivered over `t` seconds, kg.
pub fn air_mass(u: f64, geom: &NozzleGeometry, air: &AirState, t: f64) -> Result<f64> {
    ensure_non_negative("duration", t)?;
    Ok(air.density * flow_rate(u, geom)? * t)
}

/// Heat carried away by the air as it warms from `T_a` to `final_temperature`, J.
pub fn heat_absorbed(
    u: f64,
    geom: &NozzleGeometry,
    air: &AirState,
    t: f64,
    final_temperature: f64,
) -> Result<f64> {
    Ok(air.specific_heat * air_mass(u, geom, air, t)? * (final_temperature - air.temperature))
}

/// `rho_s * A_s * h_s`, kg.
pub fn body_mass(body: &BodyPatch) -> f64 {
    body.density * body.area * body.thickness
}

/// The specific heats only need to share a unit; they cancel.
pub fn cooling_coefficient(
    air: &AirState,
    geom: &NozzleGeometry,
    body: &BodyPatch,
) -> CoolingCoefficient {
    let k =
        air.specific_heat * air.density * geom.outlet_area / (body.specific_heat * body_mass(body));
    CoolingCoefficient(k)
}

fn check_exposure(u: f64, t: f64) -> Result<()> {
    ensure_non_negative("flow velocity", u)?;
    ensure_non_negative("duration", t)
}

/// Common final temperature of air and patch after `t` seconds of exposure.
pub fn equilibrium_temperature(
    k: CoolingCoefficient,
    u: f64,
    t: f64,
    body_temperature: f64,
    air_temperature: f64,
) -> Result<f64> {
    check_exposure(u, t)?;
    let kut = k.0 * u * t;
    Ok((body_temperature + kut * air_temperature) / (kut + 1.0))
}

/// `T_s - T_f`, positive when the patch cools.
pub fn temperature_drop(
    k: CoolingCoefficient,
    u: f64,
    t: f64,
    body_temperature: f64,
    air_temperature: f64,
) -> Result<f64> {
    check_exposure(u, t)?;
    let kut = k.0 * u * t;
    Ok(kut * (body_temperature - air_temperature) / (kut + 1.0))
}

/// How coefficients are evaluated when computing a drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Full double precision throughout.
    #[default]
    Exact,
    /// Coefficients rounded to the precision of the reference tables, which
    /// reproduces the published predictions digit for digit.
    Published,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "full" => Ok(Precision::Exact),
            "published" => Ok(Precision::Published),
            _ => Err(Error::InvalidScenario(format!(
                "unknown precision `{s}` (expected `exact` or `published`)"
            ))),
        }
    }
}

/// Decimal places kept when the model is evaluated with rounded coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedRounding {
    pub k_decimals: u32,
    /// Rounding of the lumped numerator `k * (T_s - T_a)`, if it is rounded
    /// as a single number.
    pub gain_decimals: Option<u32>,
}

impl Default for PublishedRounding {
    fn default() -> Self {
        Self {
            k_decimals: 3,
            gain_decimals: None,
        }
    }
}

/// The drop as a function of exposure, `gain * u * t / (k * u * t + 1)`,
/// with `gain = k * (T_s - T_a)` in K/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropFormula {
    pub gain: f64,
    pub k: f64,
    pub body_temperature: f64,
}

impl DropFormula {
    pub fn drop(&self, u: f64, t: f64) -> Result<f64> {
        check_exposure(u, t)?;
        let ut = u * t;
        Ok(self.gain * ut / (self.k * ut + 1.0))
    }

    pub fn final_temperature(&self, u: f64, t: f64) -> Result<f64> {
        Ok(self.body_temperature - self.drop(u, t)?)
    }

    /// d(drop)/du at fixed `t`.
    pub fn velocity_slope(&self, u: f64, t: f64) -> f64 {
        let denom = self.k * u * t + 1.0;
        self.gain * t / (denom * denom)
    }

    /// Velocity producing the given drop at duration `t`, if one exists.
    pub fn velocity_for_drop(&self, drop: f64, t: f64) -> Option<f64> {
        // drop * (k u t + 1) = gain u t  =>  u = drop / (t (gain - k drop))
        let denom = t * (self.gain - self.k * drop);
        if drop < 0.0 || t <= 0.0 || denom <= 0.0 {
            return None;
        }
        Some(drop / denom)
    }
}

/// A complete air/nozzle/body parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingSetup {
    pub air: AirState,
    pub nozzle: NozzleGeometry,
    pub body: BodyPatch,
    #[serde(default)]
    pub rounding: PublishedRounding,
}

impl CoolingSetup {
    pub fn validate(&self) -> Result<()> {
        self.air.validate()?;
        self.nozzle.validate()?;
        self.body.validate()
    }

    pub fn coefficient(&self) -> CoolingCoefficient {
        cooling_coefficient(&self.air, &self.nozzle, &self.body)
    }

    pub fn formula(&self, precision: Precision) -> DropFormula {
        let exact = self.coefficient().value();
        let span = self.body.temperature - self.air.temperature;
        let (k, gain) = match precision {
            Precision::Exact => (exact, exact * span),
            Precision::Published => {
                let k = round_decimals(exact, self.rounding.k_decimals);
                let gain = match self.rounding.gain_decimals {
                    Some(d) => round_decimals(k * span, d),
                    None => k * span,
                };
                (k, gain)
            }
        };
        DropFormula {
            gain,
            k,
            body_temperature: self.body.temperature,
        }
    }

    pub fn drop(&self, u: f64, t: f64, precision: Precision) -> Result<f64> {
        self.formula(precision).drop(u, t)
    }

    pub fn with_body_temperature(mut self, temperature: f64) -> Self {
        self.body.temperature = temperature;
        self
    }

    pub fn with_air_temperature(mut self, temperature: f64) -> Self {
        self.air.temperature = temperature;
        self
    }
}

/// Built-in body parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 40 x 40 x 2 mm silicon phantom sheet at 21.30 C.
    Silicon,
    /// 40 x 40 mm patch of skin, 0.2 mm deep (cold receptors sit at
    /// 0.15-0.17 mm), at 33 C.
    Skin,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Silicon => "silicon",
            Preset::Skin => "skin",
        }
    }

    pub fn setup(self) -> CoolingSetup {
        // Air at -16 C: 1.005 kJ/(kg K), 1.37 kg/m^3. Outlet area 19.64 mm^2.
        let air = AirState {
            specific_heat: 1.005e3,
            density: 1.37,
            temperature: 257.15,
        };
        let nozzle = NozzleGeometry {
            outlet_area: 19.64e-6,
            standoff: 5e-3,
        };
        match self {
            Preset::Silicon => CoolingSetup {
                air,
                nozzle,
                body: BodyPatch {
                    specific_heat: 1.6e3,
                    density: 970.0,
                    area: 1600e-6,
                    thickness: 2e-3,
                    temperature: 294.45,
                },
                rounding: PublishedRounding {
                    k_decimals: 3,
                    gain_decimals: None,
                },
            },
            Preset::Skin => CoolingSetup {
                air,
                nozzle,
                body: BodyPatch {
                    specific_heat: 10.514e3,
                    density: 1200.0,
                    area: 1600e-6,
                    thickness: 0.2e-3,
                    temperature: 306.15,
                },
                rounding: PublishedRounding {
                    k_decimals: 3,
                    gain_decimals: Some(2),
                },
            },
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "silicon" => Ok(Preset::Silicon),
            "skin" => Ok(Preset::Skin),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters for a named preset.
pub fn preset(name: &str) -> Result<CoolingSetup> {
    Ok(name.parse::<Preset>()?.setup())
}
