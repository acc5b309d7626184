use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::newton::{newton_solve, BranchTag, NewtonOptions, NewtonRecord, SolutionPair};
use super::system::{nonlinear_terms, FieldPair, GudnasonSystem};
use super::CouplingParams;
use crate::error::{Error, Result};
use crate::radial;
use crate::torus::{background_u0, solve_shifted, Point, ScalarField, TorusGrid, VortexSet};

/// Initial guess at the first (largest) `ε` of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seed {
    /// `u₁ = u₂ = level` (a small negative constant) away from the vortices.
    Topological {
        level: f64,
    },
    Concentrating(ConcentratingSeed),
}

impl Seed {
    pub fn branch(&self) -> BranchTag {
        match self {
            Seed::Topological { .. } => BranchTag::Topological,
            Seed::Concentrating(_) => BranchTag::Concentrating,
        }
    }
}

impl Default for Seed {
    fn default() -> Self {
        Seed::Topological { level: -0.1 }
    }
}

/// A radial bubble `2 ln ε + w(|x - q|/ε; s)` with `s` chosen so the flux of
/// `w` is `4(1 + margin)`, frozen beyond `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConcentratingSeed {
    /// Bubble centre; defaults to the point antipodal to the first vortex.
    pub site: Option<Point>,
    pub margin: f64,
    pub cutoff: f64,
    /// `u₂ = 2 ln ε + u2_offset`.
    pub u2_offset: f64,
}

impl Default for ConcentratingSeed {
    fn default() -> Self {
        Self {
            site: None,
            margin: 0.05,
            cutoff: 0.25,
            u2_offset: -1.0,
        }
    }
}

impl ConcentratingSeed {
    pub fn resolve_site(&self, grid: &TorusGrid, vortices: &VortexSet) -> Point {
        self.site.map(|p| grid.wrap(p)).unwrap_or_else(|| {
            let p = vortices.points()[0];
            grid.wrap(Point::new(p.x + 0.5 * grid.lx(), p.y + 0.5 * grid.ly()))
        })
    }
}

/// Builds the initial state for `seed` at couplings `params`.
pub fn seed_state(system: &GudnasonSystem, seed: &Seed) -> Result<FieldPair> {
    let grid = *system.grid();
    match seed {
        Seed::Topological { level } => {
            // u₁ = u₀ - S u₀ + level, S = κ(κ - Δ)⁻¹ with κ = 1/ε²: a screened
            // vortex core of width ε on top of the constant level
            let kappa = 1.0 / (system.params().eps * system.params().eps);
            let smooth = solve_shifted(&system.u0().scale(-kappa), kappa)?;
            Ok(FieldPair {
                v1: smooth.map(|s| level - s),
                u2: ScalarField::constant(grid, *level),
            })
        }
        Seed::Concentrating(cs) => {
            if !(cs.margin > 0.0) || !(cs.cutoff > 0.0) {
                return Err(Error::InvalidArgument(
                    "concentrating seed needs positive margin and cutoff".into(),
                ));
            }
            let eps = system.params().eps;
            let q = cs.resolve_site(&grid, system.vortices());
            let s = radial::invert_beta(4.0 * (1.0 + cs.margin))?;
            let profile = radial::shoot(0, s, radial::default_r_max(s), radial::DEFAULT_TOL)?;
            let u0q = crate::torus::interp::sample(system.u0(), q);
            let lift = 2.0 * eps.ln();
            // u₁ = u₀ + v₁ equals the bubble exactly at q
            let v1 = ScalarField::from_fn(grid, |x| {
                let r = grid.distance(x, q).min(cs.cutoff);
                lift + profile.value_at(r / eps) - u0q
            });
            Ok(FieldPair {
                v1,
                u2: ScalarField::constant(grid, lift + cs.u2_offset),
            })
        }
    }
}

/// A schedule step that failed to converge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFailure {
    pub step: usize,
    pub params: CouplingParams,
    pub message: String,
    pub trace: Vec<NewtonRecord>,
}

/// Solutions along a schedule, stopping at the first failure.
#[derive(Debug, Clone)]
pub struct ContinuationRun {
    pub branch: BranchTag,
    pub solutions: Vec<SolutionPair>,
    pub failure: Option<StepFailure>,
}

impl ContinuationRun {
    pub fn eps(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.params.eps).collect()
    }
}

fn validate_schedule(schedule: &[CouplingParams]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty schedule".into()));
    }
    for p in schedule {
        p.check_weak_coupling()?;
    }
    for w in schedule.windows(2) {
        if w[1].eps > w[0].eps {
            return Err(Error::InvalidArgument(format!(
                "schedule must be non-increasing in eps ({} then {})",
                w[0].eps, w[1].eps
            )));
        }
    }
    Ok(())
}

/// Warm start for the next step. On the concentrating branch the shift keeps
/// `u₁ - 2 ln ε` fixed.
fn warm_start(prev: &SolutionPair, next: &CouplingParams) -> FieldPair {
    match prev.branch {
        BranchTag::Concentrating => {
            let shift = 2.0 * (next.eps / prev.params.eps).ln();
            FieldPair {
                v1: prev.v1.shift(shift),
                u2: prev.u2.clone(),
            }
        }
        _ => prev.state(),
    }
}

/// Runs the schedule, recording a failed step instead of returning an error.
/// Errors only for an invalid schedule or seed.
pub fn continuation_traced(
    grid: &TorusGrid,
    vortices: &VortexSet,
    schedule: &[CouplingParams],
    seed: &Seed,
    opts: &NewtonOptions,
) -> Result<ContinuationRun> {
    validate_schedule(schedule)?;
    let u0 = background_u0(grid, vortices);
    let mut system = GudnasonSystem::with_u0(schedule[0], vortices.clone(), u0);
    let branch = seed.branch();
    let mut run = ContinuationRun {
        branch,
        solutions: Vec::new(),
        failure: None,
    };
    for (step, params) in schedule.iter().enumerate() {
        system.set_params(*params);
        let initial = match run.solutions.last() {
            Some(prev) => warm_start(prev, params),
            None => seed_state(&system, seed)?,
        };
        match newton_solve(&system, initial, branch, opts) {
            Ok(sol) => {
                log::info!(
                    "step {step}: eps = {:.4e}, residual = {:.3e}, iters = {}",
                    params.eps,
                    sol.residual_inf,
                    sol.iterations
                );
                run.solutions.push(sol);
            }
            Err(f) => {
                log::warn!("step {step}: eps = {:.4e} failed: {}", params.eps, f.error);
                run.failure = Some(StepFailure {
                    step,
                    params: *params,
                    message: f.error.to_string(),
                    trace: f.trace,
                });
                break;
            }
        }
    }
    Ok(run)
}

/// As [`continuation_traced`], but a failure of the very first solve is an
/// error since no solution is available.
pub fn continuation(
    grid: &TorusGrid,
    vortices: &VortexSet,
    schedule: &[CouplingParams],
    seed: &Seed,
    opts: &NewtonOptions,
) -> Result<ContinuationRun> {
    let run = continuation_traced(grid, vortices, schedule, seed, opts)?;
    if run.solutions.is_empty() {
        let f = run.failure.expect("a run without solutions has a failure");
        let last = f.trace.last().map(|r| r.residual_inf).unwrap_or(f64::NAN);
        return Err(Error::NonConvergence {
            iters: f.trace.len(),
            residual: last,
        });
    }
    Ok(run)
}

/// Defects of the two integrated equations, absolute and relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub d1: f64,
    pub d2: f64,
    /// `8π𝔐`.
    pub scale1: f64,
    /// Sum of the absolute integrals of the terms in the second line.
    pub scale2: f64,
}

impl IntegralCheck {
    pub fn rel1(&self) -> f64 {
        self.d1 / self.scale1
    }
    pub fn rel2(&self) -> f64 {
        if self.scale2 > 0.0 {
            self.d2 / self.scale2
        } else {
            self.d2
        }
    }
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.rel1() <= rel_tol && self.rel2() <= rel_tol
    }
}

/// Integrates both equations over the torus: the Laplacians drop out, leaving
///
/// ```text
/// ∫(1/ε²){e^{u₁}(1-e^{u₁}) + σ² e^{u₂}(1-e^{u₁})} - ∫(σ/ε²)(e^{u₁}+e^{u₂})(1-e^{u₂}) = 8π𝔐
/// ∫(1/ε²){e^{u₂}(1-e^{u₂}) + σ² e^{u₁}(1-e^{u₂})} = ∫(σ/ε²)(e^{u₁}+e^{u₂})(1-e^{u₁})
/// ```
pub fn integral_identity_check(sol: &SolutionPair) -> Result<IntegralCheck> {
    let grid = *sol.grid();
    let (eps, sigma) = (sol.params.eps, sol.params.sigma);
    let mut lhs1 = 0.0;
    let mut lhs2 = 0.0;
    let mut abs2 = 0.0;
    let k = 1.0 / (eps * eps);
    for ((v, u0), u2) in sol
        .v1
        .values()
        .iter()
        .zip(sol.u0.values())
        .zip(sol.u2.values())
    {
        let a = (v + u0).exp();
        let b = u2.exp();
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Overflow("exponential in integral check".into()));
        }
        let (n1, n2) = nonlinear_terms(a, b, eps, sigma);
        lhs1 -= n1;
        lhs2 -= n2;
        abs2 += k
            * ((b * (1.0 - b)).abs()
                + (sigma * sigma * a * (1.0 - b)).abs()
                + (sigma * (a + b) * (1.0 - a)).abs());
    }
    let da = grid.cell_area();
    let scale1 = 8.0 * PI * sol.vortices.total() as f64;
    Ok(IntegralCheck {
        d1: (lhs1 * da - scale1).abs(),
        d2: (lhs2 * da).abs(),
        scale1,
        scale2: abs2 * da,
    })
}
