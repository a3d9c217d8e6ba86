//! Gamma score priors: density, tail, sampling, and the constrained fit.
//!
//! A batter's score against an opponent is modelled as Gamma(α, β) in the
//! shape–scale parameterisation, so the mean is αβ and the variance αβ².
//! The fit fixes the mean at the batting average and picks β from a uniform
//! candidate grid subject to P(X > highest score) ≤ `tail_cap`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special;

/// Floor applied to a zero batting average.
pub const MIN_AVERAGE: f64 = 0.1;
pub const DEFAULT_TAIL_CAP: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PriorError {
    #[error("invalid gamma parameters alpha={alpha}, beta={beta}")]
    InvalidParams { alpha: f64, beta: f64 },
    #[error("density argument must be finite and non-negative, got {0}")]
    Domain(f64),
    #[error("invalid beta grid: {0}")]
    InvalidGrid(String),
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
}

/// Shape `alpha` and scale `beta` (runs) of a gamma score prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaParams {
    alpha: f64,
    beta: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, PriorError> {
        if alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0 {
            Ok(Self { alpha, beta })
        } else {
            Err(PriorError::InvalidParams { alpha, beta })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha * self.beta
    }

    pub fn variance(&self) -> f64 {
        self.alpha * self.beta * self.beta
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Inverse CDF. Monotone in `u`, and in `alpha` at fixed `beta`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.beta * special::gamma_p_inverse(self.alpha, u)
    }
}

impl<'de> Deserialize<'de> for GammaParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            beta: f64,
        }
        let raw = Raw::deserialize(d)?;
        GammaParams::new(raw.alpha, raw.beta).map_err(serde::de::Error::custom)
    }
}

fn check_x(x: f64) -> Result<(), PriorError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(PriorError::Domain(x))
    }
}

/// Shape–scale gamma density at `x`.
pub fn gamma_pdf(x: f64, p: &GammaParams) -> Result<f64, PriorError> {
    check_x(x)?;
    Ok(special::unit_gamma_density(p.alpha, x / p.beta) / p.beta)
}

/// P(X > x).
pub fn gamma_tail(x: f64, p: &GammaParams) -> Result<f64, PriorError> {
    if x.is_nan() || x < 0.0 {
        return Err(PriorError::Domain(x));
    }
    Ok(special::gamma_q(p.alpha, x / p.beta))
}

/// One Gamma(α, β) variate.
pub fn gamma_sample<R: Rng + ?Sized>(p: &GammaParams, rng: &mut R) -> f64 {
    use rand_distr::Distribution;
    let dist = rand_distr::Gamma::new(p.alpha, p.beta).expect("validated parameters");
    dist.sample(rng)
}

/// Uniform grid of candidate scales, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self { lo: 0.01, hi: 5000.0, count: 50_000 }
    }
}

impl BetaGrid {
    pub fn validate(&self) -> Result<(), PriorError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo > 0.0 && self.lo < self.hi) {
            return Err(PriorError::InvalidGrid(format!("need 0 < lo < hi, got lo={} hi={}", self.lo, self.hi)));
        }
        if self.count < 2 {
            return Err(PriorError::InvalidGrid(format!("need count >= 2, got {}", self.count)));
        }
        Ok(())
    }

    /// Candidate `k`, 0-indexed.
    pub fn candidate(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            return self.hi;
        }
        self.lo + k as f64 * (self.hi - self.lo) / (self.count - 1) as f64
    }
}

/// Which end of the feasible run of candidates to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    #[default]
    MaxFeasible,
    MinFeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitInput {
    pub average: f64,
    pub highest: u32,
    pub tail_cap: f64,
}

impl FitInput {
    pub fn new(average: f64, highest: u32) -> Self {
        Self { average, highest, tail_cap: DEFAULT_TAIL_CAP }
    }

    pub fn with_tail_cap(mut self, tail_cap: f64) -> Self {
        self.tail_cap = tail_cap;
        self
    }

    fn validate(&self) -> Result<(), PriorError> {
        if !(self.average.is_finite() && self.average >= 0.0) {
            return Err(PriorError::InvalidInput(format!("average must be >= 0, got {}", self.average)));
        }
        if f64::from(self.highest) < self.average {
            return Err(PriorError::InvalidInput(format!(
                "highest {} is below average {}",
                self.highest, self.average
            )));
        }
        if !(self.tail_cap > 0.0 && self.tail_cap < 1.0) {
            return Err(PriorError::InvalidInput(format!("tail cap must lie in (0, 1), got {}", self.tail_cap)));
        }
        Ok(())
    }
}

/// Grid, cap and rule used by the simulation layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    pub grid: BetaGrid,
    pub tail_cap: f64,
    pub beta_rule: BetaRule,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { grid: BetaGrid::default(), tail_cap: DEFAULT_TAIL_CAP, beta_rule: BetaRule::MaxFeasible }
    }
}

impl FitSettings {
    pub fn fit(&self, average: f64, highest: u32) -> Result<Fit, PriorError> {
        fit_gamma_with(&FitInput::new(average, highest).with_tail_cap(self.tail_cap), &self.grid, self.beta_rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FitFlags {
    /// The average was zero and was raised to [`MIN_AVERAGE`].
    pub clamped_average: bool,
    /// Even the smallest candidate breaks the tail cap.
    pub unsatisfiable: bool,
}

impl FitFlags {
    /// `;`-joined flag names, empty when clean.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.clamped_average {
            parts.push("clamped-average");
        }
        if self.unsatisfiable {
            parts.push("constraint-unsatisfiable");
        }
        parts.join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub params: GammaParams,
    /// Index of the chosen candidate in the grid.
    pub beta_index: usize,
    pub flags: FitFlags,
}

/// Fit with the default (largest feasible β) rule.
pub fn fit_gamma(input: &FitInput, grid: &BetaGrid) -> Result<Fit, PriorError> {
    fit_gamma_with(input, grid, BetaRule::MaxFeasible)
}

/// Fit the prior: mean pinned to the (clamped) average, β from the grid.
///
/// The tail `t(β) = P(X > highest)` at fixed mean rises with β, peaks, then
/// falls back towards zero as α = mean/β → 0 collapses the mass onto zero.
/// The feasible candidates therefore form a leading run plus, usually, a
/// degenerate trailing run of tiny shapes. Only the leading run is
/// considered: `MaxFeasible` returns its last candidate (the successor
/// breaks the cap), `MinFeasible` its first. When the first candidate
/// already breaks the cap the smallest β is returned and flagged.
pub fn fit_gamma_with(input: &FitInput, grid: &BetaGrid, rule: BetaRule) -> Result<Fit, PriorError> {
    input.validate()?;
    grid.validate()?;
    let clamped_average = input.average <= 0.0;
    let mean = if clamped_average { MIN_AVERAGE } else { input.average };
    let highest = f64::from(input.highest);
    let tail = |k: usize| {
        let beta = grid.candidate(k);
        special::gamma_q(mean / beta, highest / beta)
    };
    let feasible = |k: usize| tail(k) <= input.tail_cap;

    let (beta_index, unsatisfiable) = if !feasible(0) {
        (0, true)
    } else {
        match rule {
            BetaRule::MinFeasible => (0, false),
            BetaRule::MaxFeasible => (leading_run_end(grid.count, &tail, input.tail_cap), false),
        }
    };
    let beta = grid.candidate(beta_index);
    let params = GammaParams::new(mean / beta, beta)?;
    Ok(Fit { params, beta_index, flags: FitFlags { clamped_average, unsatisfiable } })
}

/// Last index of the leading run of `tail(k) <= cap`, given `tail(0) <= cap`.
fn leading_run_end(count: usize, tail: &impl Fn(usize) -> f64, cap: f64) -> usize {
    // first k whose successor is lower: the peak of the unimodal tail curve
    let (mut lo, mut hi) = (0, count - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if tail(mid + 1) < tail(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let peak = lo;
    if tail(peak) <= cap {
        return count - 1;
    }
    // tail is non-decreasing on [0, peak]; find the first infeasible index
    let (mut lo, mut hi) = (0, peak);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) <= cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
