use std::f64::consts::PI;

use super::{
    interp, solve_poisson_filtered, solve_poisson_meanzero, Point, ScalarField, TorusGrid,
    VortexSet,
};
use crate::error::{Error, Result};

/// Point mass of total weight `weight` on the node nearest to `p`.
fn nodal_delta(grid: &TorusGrid, p: Point, weight: f64, values: &mut [f64]) {
    let (i, j) = grid.nearest_node(p);
    values[grid.index(i, j)] += weight / grid.cell_area();
}

/// Mean-zero Green's function with `-ΔG = δ_y - 1/|T|`, the delta carried
/// by the node nearest to `y`.
pub fn green_function(grid: &TorusGrid, y: Point) -> ScalarField {
    let mut values = vec![0.0; grid.len()];
    nodal_delta(grid, y, -1.0, &mut values);
    solve_poisson_meanzero(&ScalarField::from_raw(*grid, values))
}

/// Regular part `γ(x, y) = G(x, y) + ln|x - y| / 2π` for `x ≠ y`.
///
/// `G` is the discrete Green's function, evaluated off-node by periodic
/// bicubic interpolation.
pub fn regular_part(grid: &TorusGrid, y: Point, x: Point) -> Result<f64> {
    let r = grid.distance(x, y);
    if r < 1e-12 * grid.dx().min(grid.dy()) {
        return Err(Error::InvalidArgument(
            "x coincides with y; use regular_part_at for the diagonal value".into(),
        ));
    }
    let g = green_function(grid, y);
    Ok(interp::sample(&g, x) + r.ln() / (2.0 * PI))
}

/// Diagonal value `γ(y, y)`, extrapolated from `γ` at offsets of two and
/// four cells along the x-axis.
///
/// The lattice error of the discrete Green's function at `k` cells from the
/// source decays like `k^-2`, which fixes the extrapolation weights.
pub fn regular_part_at(grid: &TorusGrid, y: Point) -> f64 {
    let g = green_function(grid, y);
    let (i, j) = grid.nearest_node(y);
    let h = grid.dx();
    let at = |k: usize| {
        let v = g.at((i + k) % grid.nx(), j);
        v + (k as f64 * h).ln() / (2.0 * PI)
    };
    (4.0 * at(4) - at(2)) / 3.0
}

/// `u₀ = -8π Σ m_i G(·, p_i)`, mean zero, with
/// `Δu₀ = 8π Σ m_i δ_{p_i} - 8π𝔐/|T|` on the grid.
///
/// The nodal deltas are low-pass filtered before the solve
/// ([`solve_poisson_filtered`]). An unfiltered nodal delta rings through the
/// whole torus under the spectral Laplacian and leaves `u₁` slightly positive
/// far from the vortices.
pub fn background_u0(grid: &TorusGrid, vortices: &VortexSet) -> ScalarField {
    let mut values = vec![0.0; grid.len()];
    for (p, m) in vortices.iter() {
        nodal_delta(grid, p, 8.0 * PI * m as f64, &mut values);
    }
    solve_poisson_filtered(&ScalarField::from_raw(*grid, values))
}
