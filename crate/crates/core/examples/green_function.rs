//! Torus Green's function, its regular part, and the vortex background `u₀`.

use std::f64::consts::PI;

use vortexlab::torus::{
    background_u0, green_function, laplacian, regular_part, regular_part_at, Point, TorusGrid,
    VortexSet,
};

fn main() -> vortexlab::Result<()> {
    let y = Point::new(0.5, 0.5);
    for n in [64, 128, 256] {
        let grid = TorusGrid::unit(n)?;
        let g = green_function(&grid, y);
        let h = grid.dx();
        println!(
            "n = {n:>3}: mean G = {:+.1e}, gamma(y, y) = {:.6}, gamma at 8h = {:.6}",
            g.mean(),
            regular_part_at(&grid, y),
            regular_part(&grid, y, Point::new(0.5 + 8.0 * h, 0.5))?
        );
    }
    // the square torus value of γ(y, y) from the lattice sum
    println!(
        "reference: -ln(2π |η(i)|²)/2π = {:.6}",
        square_torus_gamma()
    );

    let grid = TorusGrid::unit(128)?;
    let vortices = VortexSet::new(
        vec![Point::new(0.25, 0.25), Point::new(0.7, 0.6)],
        vec![1, 2],
    )?;
    let u0 = background_u0(&grid, &vortices);
    let flux = laplacian(&u0).integral();
    println!(
        "u0: mean {:+.1e}, integral of its Laplacian {:+.1e}, 8π𝔐 = {:.4}",
        u0.mean(),
        flux,
        8.0 * PI * vortices.total() as f64
    );
    Ok(())
}

/// `γ(y, y) = -ln(2π|η(i)|²)/(2π)` on the unit square torus, `η` the Dedekind eta.
fn square_torus_gamma() -> f64 {
    let q = (-2.0 * PI).exp();
    let mut log_eta = -PI / 12.0;
    for k in 1..50 {
        log_eta += (1.0 - q.powi(k)).ln();
    }
    -(2.0 * PI).ln() / (2.0 * PI) - 2.0 * log_eta / (2.0 * PI)
}
