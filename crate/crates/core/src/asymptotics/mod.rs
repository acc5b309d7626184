//! Asymptotic diagnostics along an ε-sweep: mass integrals, the two
//! classifications, blow-up sites, local masses, Pohozaev balances and
//! gradient bounds.

mod blowup;
mod pohozaev;
mod report;

pub use blowup::{
    detect_blowup_points, local_mass, BlowupSite, DEFAULT_BLOWUP_MARGIN, MAX_LOCAL_RADIUS,
    MERGE_DISTANCE,
};
pub use pohozaev::{
    gauss_legendre, pohozaev_residual, PohozaevOptions, PohozaevRecord, MAX_POHOZAEV_RADIUS,
};
pub use report::{diagnose, DiagnosticsOptions, DiagnosticsReport, SiteRecord, QUANTIZATION_SLACK};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolutionPair;
use crate::torus::gradient;

/// Minimum number of steps for a trend classification.
pub const MIN_CLASSIFY_STEPS: usize = 4;
/// Minimum number of steps for [`gradient_bounds`].
pub const MIN_GRADIENT_STEPS: usize = 3;
/// Accepted window for the fitted exponent of `‖u₂‖∞` against `ε`.
pub const S1_SLOPE_WINDOW: (f64, f64) = (1.8, 2.2);
/// Largest allowed max/min spread of `‖u₂‖∞/ε²` for (s1).
pub const S1_RATIO_SPREAD: f64 = 2.0;
/// Required total drop of `sup(u₂ - 2 ln ε)` for (s2).
pub const S2_DROP: f64 = 2.0;
/// Far-field bound on `|u₁|` for (f1).
pub const F1_FAR_FIELD: f64 = 0.05;
/// Default radius of the vortex balls excluded from the (f1) test.
pub const DEFAULT_VORTEX_RADIUS: f64 = 0.1;
/// Required growth of `sup w₁` for (f3).
pub const F3_GROWTH: f64 = 2.0;
/// (f2): `sup w₁` over the last three steps stays within `±F2_SUP_BAND`.
pub const F2_SUP_BAND: f64 = 0.5;
/// (f2): RMS change of `w₁ - u₀` between the last two steps.
pub const F2_CAUCHY: f64 = 0.02;
/// Growth factor across a sweep that flags a gradient bound.
pub const GRADIENT_GROWTH_FLAG: f64 = 3.0;

/// `(I₁, I₂) = ((1/ε²)∫e^{u₁}(1-e^{u₁}), (1/ε²)∫e^{u₂}(1-e^{u₂}))`.
pub fn mass_integrals(sol: &SolutionPair) -> (f64, f64) {
    let k = 1.0 / (sol.params.eps * sol.params.eps);
    let da = sol.grid().cell_area();
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for ((v, u0), u2) in sol
        .v1
        .values()
        .iter()
        .zip(sol.u0.values())
        .zip(sol.u2.values())
    {
        let a = (v + u0).exp();
        let b = u2.exp();
        i1 += a * (1.0 - a);
        i2 += b * (1.0 - b);
    }
    (k * i1 * da, k * i2 * da)
}

/// Per-step summary of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub eps: f64,
    pub sigma: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    /// `(σ/ε²)∫(e^{u₁}+e^{u₂})(1-e^{u₂})`, the nonnegative cross term by which
    /// the integrated first equation lets `I₁` exceed `8π𝔐`.
    pub i1_cross: f64,
    pub sup_u1: f64,
    pub sup_u2: f64,
    /// `‖u₂‖∞`.
    pub norm_u2: f64,
    /// `sup(u₁ - 2 ln ε)`.
    pub sup_w1: f64,
    /// `sup(u₂ - 2 ln ε)`.
    pub sup_w2: f64,
    /// `ε ‖∇v₁‖∞`.
    pub grad_v1_scaled: f64,
    pub grad_u2: f64,
    pub residual_inf: f64,
    pub spurious: bool,
}

fn grad_sup(f: &crate::torus::ScalarField) -> f64 {
    let (gx, gy) = gradient(f);
    gx.values()
        .iter()
        .zip(gy.values())
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max)
}

fn cross_term(sol: &SolutionPair) -> f64 {
    let k = sol.params.sigma / (sol.params.eps * sol.params.eps);
    let sum: f64 = sol
        .v1
        .values()
        .iter()
        .zip(sol.u0.values())
        .zip(sol.u2.values())
        .map(|((v, u0), u2)| {
            let b = u2.exp();
            ((v + u0).exp() + b) * (1.0 - b)
        })
        .sum();
    k * sum * sol.grid().cell_area()
}

pub fn step_record(sol: &SolutionPair) -> StepRecord {
    let eps = sol.params.eps;
    let (i1, i2) = mass_integrals(sol);
    let u1 = sol.u1();
    let lift = 2.0 * eps.ln();
    StepRecord {
        eps,
        sigma: sol.params.sigma,
        i1,
        i2,
        i1_cross: cross_term(sol),
        sup_u1: u1.max(),
        sup_u2: sol.u2.max(),
        norm_u2: sol.u2.max_abs(),
        sup_w1: u1.max() - lift,
        sup_w2: sol.u2.max() - lift,
        grad_v1_scaled: eps * grad_sup(&sol.v1),
        grad_u2: grad_sup(&sol.u2),
        residual_inf: sol.residual_inf,
        spurious: sol.spurious,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstClass {
    F1,
    F2,
    F3,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondClass {
    S1,
    S2,
    Undetermined,
}

impl std::fmt::Display for FirstClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FirstClass::F1 => "f1",
            FirstClass::F2 => "f2",
            FirstClass::F3 => "f3",
            FirstClass::Undetermined => "undetermined",
        })
    }
}

impl std::fmt::Display for SecondClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SecondClass::S1 => "s1",
            SecondClass::S2 => "s2",
            SecondClass::Undetermined => "undetermined",
        })
    }
}

/// Evidence behind a [`SecondClass`] label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondClassification {
    pub class: SecondClass,
    /// Least-squares slope of `ln ‖u₂‖∞` against `ln ε`.
    pub slope: Option<f64>,
    /// Fitted `c₀` in `‖u₂‖∞ ≈ c₀ ε²` (largest observed ratio).
    pub c0: Option<f64>,
    /// max/min of `‖u₂‖∞/ε²`.
    pub ratio_spread: Option<f64>,
    /// `sup w₂` at the first step minus at the last.
    pub sup_w2_drop: f64,
}

/// Evidence behind a [`FirstClass`] label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstClassification {
    pub class: FirstClass,
    /// `max |u₁|` outside the vortex balls, per step.
    pub far_field: Vec<f64>,
    pub sup_w1_growth: f64,
    /// Sites found at the last step.
    pub sites: usize,
    /// RMS change of `w₁ - u₀` between the last two steps.
    pub cauchy: f64,
}

fn check_run(run: &[SolutionPair], needed: usize) -> Result<bool> {
    if run.len() < needed {
        return Err(Error::TooFewSteps {
            needed,
            got: run.len(),
        });
    }
    for w in run.windows(2) {
        if w[1].params.eps > w[0].params.eps {
            return Err(Error::InvalidArgument(
                "run must be ordered by decreasing eps".into(),
            ));
        }
    }
    let first = run[0].params.eps;
    let last = run[run.len() - 1].params.eps;
    // a run with no change in eps has no limit to classify
    Ok(last < first)
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// (s1) if `ln ‖u₂‖∞` against `ln ε` has slope in [`S1_SLOPE_WINDOW`] and
/// `‖u₂‖∞/ε²` stays within a factor [`S1_RATIO_SPREAD`]; otherwise (s2) if
/// `sup(u₂ - 2 ln ε)` decreases monotonically by at least [`S2_DROP`].
pub fn classify_second(run: &[SolutionPair]) -> Result<SecondClassification> {
    let varies = check_run(run, MIN_CLASSIFY_STEPS)?;
    let records: Vec<StepRecord> = run.iter().map(step_record).collect();
    classify_second_records(&records, varies)
}

pub(crate) fn classify_second_records(
    records: &[StepRecord],
    varies: bool,
) -> Result<SecondClassification> {
    let sup_w2: Vec<f64> = records.iter().map(|r| r.sup_w2).collect();
    let drop = sup_w2[0] - sup_w2[sup_w2.len() - 1];
    let mut out = SecondClassification {
        class: SecondClass::Undetermined,
        slope: None,
        c0: None,
        ratio_spread: None,
        sup_w2_drop: drop,
    };
    if !varies {
        return Ok(out);
    }
    if records.iter().all(|r| r.norm_u2 > 0.0) {
        let x: Vec<f64> = records.iter().map(|r| r.eps.ln()).collect();
        let y: Vec<f64> = records.iter().map(|r| r.norm_u2.ln()).collect();
        out.slope = least_squares_slope(&x, &y);
        let ratios: Vec<f64> = records
            .iter()
            .map(|r| r.norm_u2 / (r.eps * r.eps))
            .collect();
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        out.c0 = Some(hi);
        out.ratio_spread = Some(hi / lo);
    }
    let s1 = matches!(
        (out.slope, out.ratio_spread),
        (Some(s), Some(r)) if s >= S1_SLOPE_WINDOW.0 && s <= S1_SLOPE_WINDOW.1 && r <= S1_RATIO_SPREAD
    );
    let monotone = sup_w2.windows(2).all(|w| w[1] < w[0]);
    out.class = if s1 {
        SecondClass::S1
    } else if monotone && drop >= S2_DROP {
        SecondClass::S2
    } else {
        SecondClass::Undetermined
    };
    Ok(out)
}

/// `max |u₁|` over nodes farther than `radius` from every vortex.
pub fn far_field_sup(sol: &SolutionPair, radius: f64) -> f64 {
    let grid = *sol.grid();
    let u1 = sol.u1();
    let mut m = 0.0f64;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let x = grid.node(i, j);
            if sol
                .vortices
                .points()
                .iter()
                .all(|p| grid.distance(x, *p) > radius)
            {
                m = m.max(u1.at(i, j).abs());
            }
        }
    }
    m
}

/// (f1) if the far field `|u₁|` (outside balls of `vortex_radius`) ends below
/// [`F1_FAR_FIELD`] without growing; (f3) if `sup w₁` grows by
/// [`F3_GROWTH`] and the last step has blow-up sites; (f2) if `sup w₁`
/// settles and `w₁ - u₀` stops changing.
pub fn classify_first(run: &[SolutionPair], vortex_radius: f64) -> Result<FirstClassification> {
    let varies = check_run(run, MIN_CLASSIFY_STEPS)?;
    let far_field: Vec<f64> = run
        .iter()
        .map(|s| far_field_sup(s, vortex_radius))
        .collect();
    let sup_w1: Vec<f64> = run.iter().map(|s| step_record(s).sup_w1).collect();
    let n = run.len();
    let growth = sup_w1[n - 1] - sup_w1[0];
    let last = &run[n - 1];
    let sites = detect_blowup_points(last, DEFAULT_BLOWUP_MARGIN).len();
    let prev = &run[n - 2];
    // w₁ - u₀ = v₁ - 2 ln ε
    let cauchy = {
        let a = last.v1.shift(-2.0 * last.params.eps.ln());
        let b = prev.v1.shift(-2.0 * prev.params.eps.ln());
        let d = a.sub(&b)?;
        (d.values().iter().map(|x| x * x).sum::<f64>() / d.values().len() as f64).sqrt()
    };
    let mut out = FirstClassification {
        class: FirstClass::Undetermined,
        far_field: far_field.clone(),
        sup_w1_growth: growth,
        sites,
        cauchy,
    };
    if !varies {
        return Ok(out);
    }
    let tail = &sup_w1[n - 3..];
    let mid = 0.5
        * (tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            + tail.iter().cloned().fold(f64::INFINITY, f64::min));
    let settled = tail.iter().all(|s| (s - mid).abs() <= F2_SUP_BAND);
    out.class = if far_field[n - 1] < F1_FAR_FIELD && far_field[n - 1] <= far_field[0] {
        FirstClass::F1
    } else if growth >= F3_GROWTH && sites > 0 {
        FirstClass::F3
    } else if settled && cauchy < F2_CAUCHY {
        FirstClass::F2
    } else {
        FirstClass::Undetermined
    };
    Ok(out)
}

/// Sweep maxima of `ε‖∇v₁‖∞` and `‖∇u₂‖∞`, with a flag when either grows by
/// more than [`GRADIENT_GROWTH_FLAG`] across the sweep. Growth is the
/// largest ratio of a value to any value at a larger `ε`; spread is max/min.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBounds {
    pub grad_v1_scaled: Vec<f64>,
    pub grad_u2: Vec<f64>,
    pub max_grad_v1_scaled: f64,
    pub max_grad_u2: f64,
    pub spread_v1: f64,
    pub spread_u2: f64,
    pub growth_v1: f64,
    pub growth_u2: f64,
    pub flagged: bool,
}

pub fn gradient_bounds(run: &[SolutionPair]) -> Result<GradientBounds> {
    if run.len() < MIN_GRADIENT_STEPS {
        return Err(Error::TooFewSteps {
            needed: MIN_GRADIENT_STEPS,
            got: run.len(),
        });
    }
    let records: Vec<StepRecord> = run.iter().map(step_record).collect();
    Ok(gradient_bounds_records(&records))
}

pub(crate) fn gradient_bounds_records(records: &[StepRecord]) -> GradientBounds {
    let g1: Vec<f64> = records.iter().map(|r| r.grad_v1_scaled).collect();
    let g2: Vec<f64> = records.iter().map(|r| r.grad_u2).collect();
    let spread = |v: &[f64]| {
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        (hi, if lo > 0.0 { hi / lo } else { f64::INFINITY })
    };
    let growth = |v: &[f64]| {
        let mut best = 1.0f64;
        let mut lo = f64::INFINITY;
        for x in v {
            if lo > 0.0 && lo.is_finite() {
                best = best.max(x / lo);
            } else if lo == 0.0 && *x > 0.0 {
                best = f64::INFINITY;
            }
            lo = lo.min(*x);
        }
        best
    };
    let (m1, s1) = spread(&g1);
    let (m2, s2) = spread(&g2);
    let (r1, r2) = (growth(&g1), growth(&g2));
    GradientBounds {
        max_grad_v1_scaled: m1,
        max_grad_u2: m2,
        spread_v1: s1,
        spread_u2: s2,
        growth_v1: r1,
        growth_u2: r2,
        flagged: r1 > GRADIENT_GROWTH_FLAG || r2 > GRADIENT_GROWTH_FLAG,
        grad_v1_scaled: g1,
        grad_u2: g2,
    }
}
