use serde::{Deserialize, Serialize};

use super::gmres::{gmres, GmresOptions};
use super::system::{FieldPair, GudnasonSystem};
use super::CouplingParams;
use crate::error::{Error, Result};
use crate::torus::{laplacian, solve_shifted, ScalarField, TorusGrid, VortexSet};

/// Absolute ∞-norm target for the residual.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    /// Converged when `max(‖r₁‖∞, ‖r₂‖∞) ≤ tol`.
    pub tol: f64,
    /// Also accept residuals within `noise_factor` times the measured
    /// rounding noise of the spectral Laplacian (0 disables).
    pub noise_factor: f64,
    pub max_iters: usize,
    /// Smallest line-search step before giving up.
    pub min_step: f64,
    /// Upper clamp of the inexact-Newton forcing term.
    pub eta_max: f64,
    pub gmres_restart: usize,
    pub gmres_max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            noise_factor: 4.0,
            max_iters: 40,
            min_step: 1.0 / 1024.0,
            eta_max: 0.1,
            gmres_restart: 40,
            gmres_max_iters: 600,
        }
    }
}

/// One Newton iteration as recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    pub iter: usize,
    pub residual_inf: f64,
    pub residual_l2: f64,
    pub step: f64,
    pub gmres_iters: usize,
    pub gmres_rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    Topological,
    Concentrating,
    Unspecified,
}

impl std::fmt::Display for BranchTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchTag::Topological => "topological",
            BranchTag::Concentrating => "concentrating",
            BranchTag::Unspecified => "unspecified",
        })
    }
}

/// A converged solution of the reduced system.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub params: CouplingParams,
    pub vortices: VortexSet,
    pub v1: ScalarField,
    pub u2: ScalarField,
    pub u0: ScalarField,
    pub residual_inf: f64,
    pub iterations: usize,
    pub branch: BranchTag,
    /// Set when the converged fields fail `u₁ < 0` or `u₂ < 0` (see
    /// [`Negativity`]).
    pub spurious: bool,
    pub trace: Vec<NewtonRecord>,
}

impl SolutionPair {
    pub fn grid(&self) -> &TorusGrid {
        self.v1.grid()
    }

    /// `u₁ = v₁ + u₀` (equal to `-∞` at the vortices; finite on the grid).
    pub fn u1(&self) -> ScalarField {
        self.v1.add(&self.u0).expect("same grid")
    }

    pub fn state(&self) -> FieldPair {
        FieldPair {
            v1: self.v1.clone(),
            u2: self.u2.clone(),
        }
    }

    pub fn negativity(&self) -> Negativity {
        negativity(&self.v1, &self.u0, &self.u2)
    }
}

/// Newton failure with the iterations recorded so far.
#[derive(Debug)]
pub struct NewtonFailure {
    pub error: Error,
    pub trace: Vec<NewtonRecord>,
    pub last: FieldPair,
}

impl From<NewtonFailure> for Error {
    fn from(f: NewtonFailure) -> Self {
        f.error
    }
}

fn residual_vector(system: &GudnasonSystem, state: &FieldPair) -> Result<Vec<f64>> {
    let (r1, r2) = system.residual(state)?;
    let mut v = r1.into_values();
    v.extend_from_slice(r2.values());
    Ok(v)
}

/// Rounding noise of the spectral Laplacian at `state`: the defect of
/// `Δ` commuting with a one-cell translation, which is exact on the grid.
pub fn laplacian_noise(state: &FieldPair) -> f64 {
    [&state.v1, &state.u2]
        .iter()
        .map(|f| {
            let a = laplacian(&f.roll(1, 1));
            let b = laplacian(f).roll(1, 1);
            a.sub(&b).expect("same grid").max_abs()
        })
        .fold(0.0, f64::max)
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm_l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn offset(state: &FieldPair, delta: &[f64], lambda: f64) -> FieldPair {
    let n = state.v1.values().len();
    let shift = |f: &ScalarField, d: &[f64]| {
        let vals = f
            .values()
            .iter()
            .zip(d)
            .map(|(a, b)| a + lambda * b)
            .collect();
        ScalarField::from_raw(*f.grid(), vals)
    };
    FieldPair {
        v1: shift(&state.v1, &delta[..n]),
        u2: shift(&state.u2, &delta[n..]),
    }
}

/// Inexact Newton–Krylov solve from `initial`. The failure carries the trace.
pub fn newton_solve_traced(
    system: &GudnasonSystem,
    initial: FieldPair,
    opts: &NewtonOptions,
) -> std::result::Result<(FieldPair, f64, Vec<NewtonRecord>), NewtonFailure> {
    let grid = *system.grid();
    let n = grid.len();
    let kappa = 1.0 / (system.params().eps * system.params().eps);
    let mut state = initial;
    let mut trace = Vec::new();

    let fail = |error: Error, trace: Vec<NewtonRecord>, last: FieldPair| NewtonFailure {
        error,
        trace,
        last,
    };

    let mut f = match residual_vector(system, &state) {
        Ok(f) => f,
        Err(e) => return Err(fail(e, trace, state)),
    };
    let f0_l2 = norm_l2(&f);
    let mut f_l2 = f0_l2;
    let mut f_inf = norm_inf(&f);

    for iter in 0..=opts.max_iters {
        let converged = f_inf <= opts.tol
            || (opts.noise_factor > 0.0
                && f_inf <= 100.0 * opts.tol
                && f_inf <= opts.noise_factor * laplacian_noise(&state));
        if converged {
            trace.push(NewtonRecord {
                iter,
                residual_inf: f_inf,
                residual_l2: f_l2,
                step: 0.0,
                gmres_iters: 0,
                gmres_rel: 0.0,
            });
            return Ok((state, f_inf, trace));
        }
        if iter == opts.max_iters {
            break;
        }
        let coeffs = match system.jacobian_coefficients(&state) {
            Ok(c) => c,
            Err(e) => return Err(fail(e, trace, state)),
        };
        let eta = (f_l2 / (1.0 + f0_l2)).clamp(1e-12, opts.eta_max);
        let gopts = GmresOptions {
            restart: opts.gmres_restart,
            max_iters: opts.gmres_max_iters,
            rel_tol: eta,
        };
        let precondition = |y: &[f64], z: &mut [f64]| {
            for c in 0..2 {
                let field = ScalarField::from_raw(grid, y[c * n..(c + 1) * n].to_vec());
                let sol = solve_shifted(&field, kappa).expect("kappa is positive");
                z[c * n..(c + 1) * n].copy_from_slice(sol.values());
            }
        };
        let [a11, a12, a21, a22] = &coeffs;
        let apply = |y: &[f64], z: &mut [f64], out: &mut [f64]| {
            precondition(y, z);
            // (Δ - a) z = y + (κ - a) z, since (Δ - κ) z = y
            for k in 0..n {
                let (z1, z2) = (z[k], z[n + k]);
                out[k] = y[k] + kappa * z1 - a11[k] * z1 - a12[k] * z2;
                out[n + k] = y[n + k] + kappa * z2 - a21[k] * z1 - a22[k] * z2;
            }
        };
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let mut delta = vec![0.0; 2 * n];
        let gres = gmres(&rhs, &mut delta, gopts, apply, precondition);

        // Armijo backtracking on ‖F‖₂
        let mut lambda = 1.0;
        let accepted = loop {
            let trial = offset(&state, &delta, lambda);
            if let Ok(ft) = residual_vector(system, &trial) {
                let l2 = norm_l2(&ft);
                if l2.is_finite() && l2 <= (1.0 - 1e-4 * lambda) * f_l2 {
                    break Some((trial, ft, l2));
                }
            }
            lambda *= 0.5;
            if lambda < opts.min_step {
                break None;
            }
        };
        trace.push(NewtonRecord {
            iter,
            residual_inf: f_inf,
            residual_l2: f_l2,
            step: if accepted.is_some() { lambda } else { 0.0 },
            gmres_iters: gres.iters,
            gmres_rel: gres.rel_residual,
        });
        match accepted {
            Some((trial, ft, l2)) => {
                state = trial;
                f_inf = norm_inf(&ft);
                f = ft;
                f_l2 = l2;
            }
            None => {
                log::debug!("line search stalled at iteration {iter}, residual {f_inf:.3e}");
                return Err(fail(
                    Error::NonConvergence {
                        iters: iter + 1,
                        residual: f_inf,
                    },
                    trace,
                    state,
                ));
            }
        }
    }
    Err(fail(
        Error::NonConvergence {
            iters: opts.max_iters,
            residual: f_inf,
        },
        trace,
        state,
    ))
}

/// Rounding allowance, in ulps of `|v₁| + |u₀|`, for the sign of `u₁`.
pub const NEGATIVITY_ULPS: f64 = 8.0;

/// Pointwise sign check of `u₁ = v₁ + u₀` and `u₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    pub u1_max: f64,
    pub u2_max: f64,
    /// Largest `u₁ - floor` over the grid, where `floor` is the rounding
    /// allowance of the sum `v₁ + u₀` at each node.
    pub u1_excess: f64,
}

impl Negativity {
    pub fn holds(&self) -> bool {
        self.u1_excess < 0.0 && self.u2_max < 0.0
    }
}

pub fn negativity(v1: &ScalarField, u0: &ScalarField, u2: &ScalarField) -> Negativity {
    let mut u1_max = f64::NEG_INFINITY;
    let mut u1_excess = f64::NEG_INFINITY;
    for (a, b) in v1.values().iter().zip(u0.values()) {
        let u1 = a + b;
        let floor = NEGATIVITY_ULPS * f64::EPSILON * (a.abs() + b.abs());
        u1_max = u1_max.max(u1);
        u1_excess = u1_excess.max(u1 - floor);
    }
    Negativity {
        u1_max,
        u2_max: u2.max(),
        u1_excess,
    }
}

/// Solves the reduced system from `initial` and runs the negativity check.
pub fn newton_solve(
    system: &GudnasonSystem,
    initial: FieldPair,
    branch: BranchTag,
    opts: &NewtonOptions,
) -> std::result::Result<SolutionPair, NewtonFailure> {
    let (state, residual_inf, trace) = newton_solve_traced(system, initial, opts)?;
    let spurious = !negativity(&state.v1, system.u0(), &state.u2).holds();
    Ok(SolutionPair {
        params: *system.params(),
        vortices: system.vortices().clone(),
        v1: state.v1,
        u2: state.u2,
        u0: system.u0().clone(),
        residual_inf,
        iterations: trace.len() - 1,
        branch,
        spurious,
        trace,
    })
}
