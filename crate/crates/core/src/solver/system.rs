//! The reduced system in the smooth variables `(v₁, u₂)`, `u₁ = v₁ + u₀`:
//!
//! ```text
//! Δv₁ = (1/ε²){e^{u₁}(e^{u₁}-1) + σ² e^{u₂}(e^{u₁}-1) - σ(e^{u₁}+e^{u₂})(e^{u₂}-1)} + 8π𝔐/|T|
//! Δu₂ = (1/ε²){e^{u₂}(e^{u₂}-1) + σ² e^{u₁}(e^{u₂}-1) - σ(e^{u₁}+e^{u₂})(e^{u₁}-1)}
//! ```

use std::f64::consts::PI;

use super::CouplingParams;
use crate::error::{Error, Result};
use crate::torus::{background_u0, laplacian, ScalarField, TorusGrid, VortexSet};

/// Exponent above which `e^u` is treated as an overflow.
const EXP_LIMIT: f64 = 300.0;

/// The pair of unknowns `(v₁, u₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub v1: ScalarField,
    pub u2: ScalarField,
}

/// Pointwise nonlinearities `N₁, N₂` such that `Δv₁ = N₁ + 8π𝔐/|T|`, `Δu₂ = N₂`.
pub(crate) fn nonlinear_terms(a: f64, b: f64, eps: f64, sigma: f64) -> (f64, f64) {
    let k = 1.0 / (eps * eps);
    let s2 = sigma * sigma;
    let n1 = k * (a * (a - 1.0) + s2 * b * (a - 1.0) - sigma * (a + b) * (b - 1.0));
    let n2 = k * (b * (b - 1.0) + s2 * a * (b - 1.0) - sigma * (a + b) * (a - 1.0));
    (n1, n2)
}

/// Partial derivatives `[∂N₁/∂u₁, ∂N₁/∂u₂, ∂N₂/∂u₁, ∂N₂/∂u₂]`.
pub(crate) fn nonlinear_jacobian(a: f64, b: f64, eps: f64, sigma: f64) -> [f64; 4] {
    let k = 1.0 / (eps * eps);
    let s2 = sigma * sigma;
    [
        k * (a * (2.0 * a - 1.0) + s2 * a * b - sigma * a * (b - 1.0)),
        k * (s2 * b * (a - 1.0) - sigma * b * (2.0 * b - 1.0) - sigma * a * b),
        k * (s2 * a * (b - 1.0) - sigma * a * (2.0 * a - 1.0) - sigma * a * b),
        k * (b * (2.0 * b - 1.0) + s2 * a * b - sigma * b * (a - 1.0)),
    ]
}

/// Grid, couplings, vortices and the cached background `u₀`.
#[derive(Debug, Clone)]
pub struct GudnasonSystem {
    grid: TorusGrid,
    params: CouplingParams,
    vortices: VortexSet,
    u0: ScalarField,
}

impl GudnasonSystem {
    pub fn new(grid: TorusGrid, params: CouplingParams, vortices: VortexSet) -> Self {
        let u0 = background_u0(&grid, &vortices);
        Self {
            grid,
            params,
            vortices,
            u0,
        }
    }

    /// Reuses a precomputed `u₀` (must belong to the same grid and vortices).
    pub fn with_u0(params: CouplingParams, vortices: VortexSet, u0: ScalarField) -> Self {
        Self {
            grid: *u0.grid(),
            params,
            vortices,
            u0,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn params(&self) -> &CouplingParams {
        &self.params
    }
    pub fn vortices(&self) -> &VortexSet {
        &self.vortices
    }
    pub fn u0(&self) -> &ScalarField {
        &self.u0
    }

    pub fn set_params(&mut self, params: CouplingParams) {
        self.params = params;
    }

    /// `8π𝔐/|T|`, the smoothed vortex source.
    pub fn source_constant(&self) -> f64 {
        8.0 * PI * self.vortices.total() as f64 / self.grid.area()
    }

    /// `e^{u₁}` and `e^{u₂}` at every node.
    pub(crate) fn exponentials(&self, state: &FieldPair) -> Result<(Vec<f64>, Vec<f64>)> {
        state.v1.ensure_same_grid(&self.u0)?;
        state.u2.ensure_same_grid(&self.u0)?;
        let mut ea = Vec::with_capacity(self.grid.len());
        let mut eb = Vec::with_capacity(self.grid.len());
        for ((v, u0), u2) in state
            .v1
            .values()
            .iter()
            .zip(self.u0.values())
            .zip(state.u2.values())
        {
            let u1 = v + u0;
            if !(u1 < EXP_LIMIT && *u2 < EXP_LIMIT) || u1.is_nan() || u2.is_nan() {
                return Err(Error::Overflow(format!(
                    "exponent out of range (u1 = {u1}, u2 = {u2})"
                )));
            }
            ea.push(u1.exp());
            eb.push(u2.exp());
        }
        Ok((ea, eb))
    }

    /// `(r₁, r₂) = (Δv₁ - N₁ - 8π𝔐/|T|, Δu₂ - N₂)`.
    pub fn residual(&self, state: &FieldPair) -> Result<(ScalarField, ScalarField)> {
        let (ea, eb) = self.exponentials(state)?;
        let lap1 = laplacian(&state.v1);
        let lap2 = laplacian(&state.u2);
        let c = self.source_constant();
        let (eps, sigma) = (self.params.eps, self.params.sigma);
        let mut r1 = lap1.into_values();
        let mut r2 = lap2.into_values();
        for k in 0..r1.len() {
            let (n1, n2) = nonlinear_terms(ea[k], eb[k], eps, sigma);
            r1[k] -= n1 + c;
            r2[k] -= n2;
        }
        Ok((
            ScalarField::from_raw(self.grid, r1),
            ScalarField::from_raw(self.grid, r2),
        ))
    }

    /// Jacobian coefficient fields of the nonlinear part at `state`.
    pub(crate) fn jacobian_coefficients(&self, state: &FieldPair) -> Result<[Vec<f64>; 4]> {
        let (ea, eb) = self.exponentials(state)?;
        let n = ea.len();
        let mut out = [
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        ];
        for k in 0..n {
            let j = nonlinear_jacobian(ea[k], eb[k], self.params.eps, self.params.sigma);
            for (o, v) in out.iter_mut().zip(j) {
                o.push(v);
            }
        }
        Ok(out)
    }
}

/// Residual of the reduced system for a single state.
pub fn residual(
    v1: &ScalarField,
    u2: &ScalarField,
    params: &CouplingParams,
    vortices: &VortexSet,
) -> Result<(ScalarField, ScalarField)> {
    v1.ensure_same_grid(u2)?;
    let system = GudnasonSystem::new(*v1.grid(), *params, vortices.clone());
    system.residual(&FieldPair {
        v1: v1.clone(),
        u2: u2.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_matches_finite_differences() {
        let (eps, sigma) = (0.3, 0.07);
        for &(u1, u2) in &[(-0.2, -0.01), (-3.0, -0.5), (-0.01, -2.0)] {
            let j = nonlinear_jacobian(f64::exp(u1), f64::exp(u2), eps, sigma);
            let h = 1e-6;
            let f = |a: f64, b: f64| nonlinear_terms(a.exp(), b.exp(), eps, sigma);
            let d1 = (f(u1 + h, u2).0 - f(u1 - h, u2).0) / (2.0 * h);
            let d2 = (f(u1, u2 + h).0 - f(u1, u2 - h).0) / (2.0 * h);
            let d3 = (f(u1 + h, u2).1 - f(u1 - h, u2).1) / (2.0 * h);
            let d4 = (f(u1, u2 + h).1 - f(u1, u2 - h).1) / (2.0 * h);
            for (a, b) in j.iter().zip([d1, d2, d3, d4]) {
                assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_state_nonlinearity_vanishes() {
        let (n1, n2) = nonlinear_terms(1.0, 1.0, 0.1, 0.0);
        assert_eq!((n1, n2), (0.0, 0.0));
    }
}
