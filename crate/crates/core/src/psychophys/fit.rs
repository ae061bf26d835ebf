//! Maximum-likelihood cumulative-Gaussian fit of constant-stimuli data.
//!
//! Model: `P(colder | v) = Phi((v - mu) / sigma)`, no lapse term. The
//! per-trial Bernoulli log-likelihood is maximized by a coarse grid over
//! `mu` in the stimulus range and `sigma` in `[SIGMA_MIN, SIGMA_MAX]`, then a
//! projected Newton refinement inside the same sigma box.

use serde::{Deserialize, Serialize};

use super::normal::{self, QUARTILE_Z};
use super::TrialRecord;
use crate::error::{Error, Result};

pub const SIGMA_MIN: f64 = 0.05;
pub const SIGMA_MAX: f64 = 5.0;
/// Projected-gradient tolerance on the mean per-trial log-likelihood.
pub const GRADIENT_TOLERANCE: f64 = 1e-8;

const MU_GRID: usize = 61;
const SIGMA_GRID: usize = 60;
const MAX_ITERATIONS: usize = 500;

/// Trials and "comparison colder" responses at one comparison velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub v: f64,
    pub n: u64,
    pub k: u64,
}

impl LevelCount {
    pub fn proportion(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsychometricFit {
    /// Point of subjective equality, m/s.
    pub mu: f64,
    /// m/s
    pub sigma: f64,
    /// m/s
    pub jnd: f64,
    pub log_likelihood: f64,
    pub levels: Vec<LevelCount>,
    #[serde(skip)]
    pub iterations: usize,
    #[serde(skip)]
    pub sigma_at_bound: bool,
}

impl PsychometricFit {
    pub fn probability(&self, v: f64) -> f64 {
        normal::cdf((v - self.mu) / self.sigma)
    }

    /// JSON with exactly `mu, sigma, jnd, log_likelihood, levels`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

/// Groups records by comparison velocity, ascending.
pub fn level_counts(records: &[TrialRecord]) -> Vec<LevelCount> {
    let mut sorted: Vec<(f64, bool)> = records
        .iter()
        .map(|r| (r.comparison, r.response_comparison_colder))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels: Vec<LevelCount> = Vec::new();
    for (v, colder) in sorted {
        match levels.last_mut() {
            Some(last) if last.v == v => {
                last.n += 1;
                last.k += colder as u64;
            }
            _ => levels.push(LevelCount {
                v,
                n: 1,
                k: colder as u64,
            }),
        }
    }
    levels
}

struct Objective<'a> {
    levels: &'a [LevelCount],
    total: f64,
}

struct Local {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

impl Objective<'_> {
    /// Mean per-trial log-likelihood.
    fn value(&self, mu: f64, sigma: f64) -> f64 {
        self.levels
            .iter()
            .map(|l| {
                let z = (l.v - mu) / sigma;
                l.k as f64 * normal::ln_cdf(z) + (l.n - l.k) as f64 * normal::ln_cdf(-z)
            })
            .sum::<f64>()
            / self.total
    }

    fn local(&self, mu: f64, sigma: f64) -> Local {
        let mut grad = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        for l in self.levels {
            let z = (l.v - mu) / sigma;
            let (k, m) = (l.k as f64, (l.n - l.k) as f64);
            let (lp, lm) = (normal::mills(z), normal::mills(-z));
            // d/dz and d2/dz2 of k ln Phi(z) + m ln Phi(-z)
            let gz = k * lp - m * lm;
            let hzz = -k * lp * (z + lp) - m * lm * (-z + lm);
            let (zm, zs) = (-1.0 / sigma, -z / sigma);
            let (zms, zss) = (1.0 / (sigma * sigma), 2.0 * z / (sigma * sigma));
            grad[0] += gz * zm;
            grad[1] += gz * zs;
            hess[0][0] += hzz * zm * zm;
            hess[0][1] += hzz * zm * zs + gz * zms;
            hess[1][1] += hzz * zs * zs + gz * zss;
        }
        hess[1][0] = hess[0][1];
        let n = self.total;
        Local {
            value: self.value(mu, sigma),
            grad: [grad[0] / n, grad[1] / n],
            hess: [
                [hess[0][0] / n, hess[0][1] / n],
                [hess[1][0] / n, hess[1][1] / n],
            ],
        }
    }
}

fn clamp_sigma(s: f64) -> f64 {
    s.clamp(SIGMA_MIN, SIGMA_MAX)
}

/// Whether sigma is pinned at a bound with the gradient pointing outward.
fn sigma_pinned(sigma: f64, g_sigma: f64) -> bool {
    (sigma <= SIGMA_MIN && g_sigma < 0.0) || (sigma >= SIGMA_MAX && g_sigma > 0.0)
}

/// Ascent direction: Newton where the Hessian is negative definite,
/// otherwise a scaled gradient step.
fn direction(local: &Local, pinned: bool) -> [f64; 2] {
    let [g0, g1] = local.grad;
    let [[h00, h01], [_, h11]] = local.hess;
    if pinned {
        let d0 = if h00 < 0.0 { -g0 / h00 } else { g0 };
        return [d0, 0.0];
    }
    let det = h00 * h11 - h01 * h01;
    if h00 < 0.0 && det > 0.0 {
        [(-h11 * g0 + h01 * g1) / det, (h01 * g0 - h00 * g1) / det]
    } else {
        [g0, g1]
    }
}

/// Maximum-likelihood fit of the cumulative Gaussian.
pub fn fit_psychometric(records: &[TrialRecord]) -> Result<PsychometricFit> {
    fit_levels(&level_counts(records))
}

/// As [`fit_psychometric`] for pre-aggregated counts.
pub fn fit_levels(levels: &[LevelCount]) -> Result<PsychometricFit> {
    let mut levels: Vec<LevelCount> = levels.iter().copied().filter(|l| l.n > 0).collect();
    levels.sort_by(|a, b| a.v.total_cmp(&b.v));
    if let Some(bad) = levels.iter().find(|l| l.k > l.n || !l.v.is_finite()) {
        return Err(Error::DegenerateData(format!(
            "invalid level v={} n={} k={}",
            bad.v, bad.n, bad.k
        )));
    }
    if levels.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "need at least 2 distinct comparison levels, got {}",
            levels.len()
        )));
    }
    let total: u64 = levels.iter().map(|l| l.n).sum();
    let colder: u64 = levels.iter().map(|l| l.k).sum();
    if colder == 0 || colder == total {
        return Err(Error::DegenerateData(format!(
            "all {total} responses are `{}`; the likelihood has no maximum",
            colder == total
        )));
    }

    let objective = Objective {
        levels: &levels,
        total: total as f64,
    };

    let (v_lo, v_hi) = (levels[0].v, levels[levels.len() - 1].v);
    let (mut mu, mut sigma) = (v_lo, SIGMA_MIN);
    let mut best = f64::NEG_INFINITY;
    let log_span = (SIGMA_MAX / SIGMA_MIN).ln();
    for i in 0..MU_GRID {
        let m = v_lo + (v_hi - v_lo) * i as f64 / (MU_GRID - 1) as f64;
        for j in 0..SIGMA_GRID {
            let s = SIGMA_MIN * (log_span * j as f64 / (SIGMA_GRID - 1) as f64).exp();
            let value = objective.value(m, s);
            if value > best {
                best = value;
                mu = m;
                sigma = s;
            }
        }
    }
    sigma = clamp_sigma(sigma);

    let mut iterations = 0;
    loop {
        let local = objective.local(mu, sigma);
        let pinned = sigma_pinned(sigma, local.grad[1]);
        let projected = if pinned {
            local.grad[0].abs()
        } else {
            local.grad[0].hypot(local.grad[1])
        };
        if projected < GRADIENT_TOLERANCE {
            return Ok(finish(mu, sigma, &objective, iterations));
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergence(format!(
                "projected gradient {projected:e} after {iterations} iterations"
            )));
        }
        iterations += 1;

        let d = direction(&local, pinned);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand_mu = mu + step * d[0];
            let cand_sigma = clamp_sigma(sigma + step * d[1]);
            let value = objective.value(cand_mu, cand_sigma);
            if value >= local.value && (cand_mu != mu || cand_sigma != sigma) {
                mu = cand_mu;
                sigma = cand_sigma;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // At the floating-point optimum the line search cannot improve;
            // accept when the gradient is already at round-off level.
            if projected < 1e3 * GRADIENT_TOLERANCE {
                return Ok(finish(mu, sigma, &objective, iterations));
            }
            return Err(Error::NonConvergence(format!(
                "line search stalled with projected gradient {projected:e}"
            )));
        }
    }
}

fn finish(mu: f64, sigma: f64, objective: &Objective<'_>, iterations: usize) -> PsychometricFit {
    let log_likelihood = objective.value(mu, sigma) * objective.total;
    let mut fit = PsychometricFit {
        mu,
        sigma,
        jnd: 0.0,
        log_likelihood,
        levels: objective.levels.to_vec(),
        iterations,
        sigma_at_bound: sigma <= SIGMA_MIN || sigma >= SIGMA_MAX,
    };
    fit.jnd = jnd(&fit);
    fit
}

/// Velocity where the fitted curve reaches `p`, by bisection.
pub fn inverse_at(fit: &PsychometricFit, p: f64) -> f64 {
    let (mut lo, mut hi) = (fit.mu - 40.0 * fit.sigma, fit.mu + 40.0 * fit.sigma);
    while hi - lo > 1e-12 * (1.0 + fit.mu.abs().max(fit.sigma)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fit.probability(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Half the distance between the 25% and 75% points of the fitted curve.
pub fn jnd(fit: &PsychometricFit) -> f64 {
    let value = 0.5 * (inverse_at(fit, 0.75) - inverse_at(fit, 0.25));
    debug_assert!((value - QUARTILE_Z * fit.sigma).abs() < 1e-9 * (1.0 + fit.sigma));
    value
}
