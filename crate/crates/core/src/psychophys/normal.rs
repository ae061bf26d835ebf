//! Standard normal helpers with stable lower tails.

use statrs::function::erf::erfc;

/// Phi^-1(0.75).
pub const QUARTILE_Z: f64 = 0.674_489_750_196_081_7;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
// Below this, erfc is near underflow; use the asymptotic series.
const TAIL: f64 = -35.0;

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub fn pdf(z: f64) -> f64 {
    ln_pdf(z).exp()
}

// Phi(z) ~ phi(z)/(-z) * series(z) for z -> -inf.
fn tail_series(z: f64) -> f64 {
    let w = 1.0 / (z * z);
    1.0 - w * (1.0 - w * (3.0 - w * (15.0 - w * 105.0)))
}

pub fn ln_cdf(z: f64) -> f64 {
    if z < TAIL {
        ln_pdf(z) - (-z).ln() + tail_series(z).ln()
    } else {
        cdf(z).ln()
    }
}

/// Inverse Mills ratio phi(z) / Phi(z).
pub fn mills(z: f64) -> f64 {
    if z < TAIL {
        -z / tail_series(z)
    } else {
        pdf(z) / cdf(z)
    }
}
