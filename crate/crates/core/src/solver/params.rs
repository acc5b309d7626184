use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack when checking `σ/ε² ≤ 𝔑`, so schedules built as
/// `σ = 𝔑 ε²` are not rejected over the last bit.
const CONSTRAINT_SLACK: f64 = 1e-12;

/// Gauge couplings `(α, β_c)` with the derived `ε = 1/(α + β_c)` and
/// `σ = (β_c - α)/(α + β_c)`, plus the weak-coupling bound `𝔑`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub alpha: f64,
    pub beta_c: f64,
    pub eps: f64,
    pub sigma: f64,
    pub n_frak: f64,
}

impl CouplingParams {
    /// From the gauge couplings; enforces the weak-coupling constraint.
    pub fn from_couplings(alpha: f64, beta_c: f64, n_frak: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta_c > 0.0 && alpha.is_finite() && beta_c.is_finite()) {
            return Err(Error::Constraint(format!(
                "couplings must be positive, got alpha = {alpha}, beta_c = {beta_c}"
            )));
        }
        let sum = alpha + beta_c;
        let p = Self {
            alpha,
            beta_c,
            eps: 1.0 / sum,
            sigma: (beta_c - alpha) / sum,
            n_frak,
        };
        p.check_weak_coupling()?;
        Ok(p)
    }

    /// From `(ε, σ)`; enforces the weak-coupling constraint.
    pub fn from_eps_sigma(eps: f64, sigma: f64, n_frak: f64) -> Result<Self> {
        let p = Self::unchecked(eps, sigma, n_frak)?;
        p.check_weak_coupling()?;
        Ok(p)
    }

    /// `σ = 0` (`α = β_c`): the decoupled limit, where the second equation
    /// is solved by `u₂ ≡ 0`. Outside the weak-coupling regime proper.
    pub fn decoupled(eps: f64) -> Result<Self> {
        Self::unchecked(eps, 0.0, 0.0)
    }

    /// `(ε, σ)` with only `ε > 0` and `0 <= σ < 1` checked.
    pub fn unchecked(eps: f64, sigma: f64, n_frak: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Constraint(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(0.0..1.0).contains(&sigma) {
            return Err(Error::Constraint(format!(
                "sigma must lie in [0, 1), got {sigma}"
            )));
        }
        Ok(Self {
            alpha: (1.0 - sigma) / (2.0 * eps),
            beta_c: (1.0 + sigma) / (2.0 * eps),
            eps,
            sigma,
            n_frak,
        })
    }

    /// `σ/ε² = (β_c - α)(β_c + α)`.
    pub fn coupling_ratio(&self) -> f64 {
        self.sigma / (self.eps * self.eps)
    }

    /// `0 < σ/ε² ≤ 𝔑`, `σ ∈ (0, 1)`, `α, β_c > 0`.
    pub fn check_weak_coupling(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta_c > 0.0) {
            return Err(Error::Constraint("couplings must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::Constraint(format!(
                "sigma must lie in (0, 1), got {}",
                self.sigma
            )));
        }
        let ratio = self.coupling_ratio();
        if !(ratio > 0.0 && ratio <= self.n_frak * (1.0 + CONSTRAINT_SLACK)) {
            return Err(Error::Constraint(format!(
                "sigma/eps^2 = {ratio} must lie in (0, {}]",
                self.n_frak
            )));
        }
        Ok(())
    }
}

/// How `σ` follows `ε` in a generated schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaRule {
    /// `σ = factor · 𝔑 ε²`.
    Quadratic { factor: f64 },
    /// `σ` fixed.
    Constant { sigma: f64 },
}

/// Geometric schedule from `eps_start` down to `eps_end` (inclusive).
pub fn geometric_schedule(
    eps_start: f64,
    eps_end: f64,
    steps: usize,
    rule: SigmaRule,
    n_frak: f64,
) -> Result<Vec<CouplingParams>> {
    if steps < 1 || !(eps_start >= eps_end && eps_end > 0.0) {
        return Err(Error::Constraint(format!(
            "need eps_start >= eps_end > 0 and steps >= 1, got {eps_start}, {eps_end}, {steps}"
        )));
    }
    let ratio = if steps == 1 {
        1.0
    } else {
        (eps_end / eps_start).powf(1.0 / (steps - 1) as f64)
    };
    (0..steps)
        .map(|k| {
            let eps = if k + 1 == steps {
                eps_end
            } else {
                eps_start * ratio.powi(k as i32)
            };
            let sigma = match rule {
                SigmaRule::Quadratic { factor } => factor * n_frak * eps * eps,
                SigmaRule::Constant { sigma } => sigma,
            };
            CouplingParams::from_eps_sigma(eps, sigma, n_frak)
        })
        .collect()
}

/// Explicit `ε` list with `σ` from `rule`.
pub fn schedule_from_eps(eps: &[f64], rule: SigmaRule, n_frak: f64) -> Result<Vec<CouplingParams>> {
    eps.iter()
        .map(|&e| {
            let sigma = match rule {
                SigmaRule::Quadratic { factor } => factor * n_frak * e * e,
                SigmaRule::Constant { sigma } => sigma,
            };
            CouplingParams::from_eps_sigma(e, sigma, n_frak)
        })
        .collect()
}
