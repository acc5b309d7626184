//! Pohozaev balance on a disc `B_r(c)` for the pair `(φ, u₂)` with
//! `φ = u₁ - 2 ln ε - 4m ln|x - c|`, obtained by testing
//!
//! ```text
//! Δφ + σΔu₂ + k e^{u₁}(1-e^{u₁}) - kσ e^{u₁}(1-e^{u₂}) = 0
//! σΔφ + Δu₂ + k e^{u₂}(1-e^{u₂}) - kσ e^{u₂}(1-e^{u₁}) = 0,   k = (1-σ²)/ε²
//! ```
//!
//! against `x·∇φ` and `x·∇u₂`. With `F = e^{u₁}(1-½e^{u₁}) + e^{u₂}(1-½e^{u₂})
//! - c₀ - σ(e^{u₁}+e^{u₂}-e^{u₁+u₂}-c₁)` the balance reads
//!
//! ```text
//! ∮ [(x·∇φ)²/|x| - |x||∇φ|²/2 + (x·∇u₂)²/|x| - |x||∇u₂|²/2]
//!   + σ∮ [2(x·∇φ)(x·∇u₂)/|x| - |x|∇φ·∇u₂] + k∮ |x| F
//!   = ∫ 2kF + 4mk e^{u₁}(1-e^{u₁}) - 4mσk e^{u₁}(1-e^{u₂})
//! ```
//!
//! for any constants `c₀, c₁`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SecondClass;
use crate::error::{Error, Result};
use crate::solver::SolutionPair;
use crate::torus::{gradient, interp::sample, Point, ScalarField};

/// Upper limit on the disc radius.
pub const MAX_POHOZAEV_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PohozaevOptions {
    /// Gauss–Legendre nodes in the radius.
    pub radial_nodes: usize,
    /// Trapezoid nodes in the angle.
    pub angular_nodes: usize,
}

impl Default for PohozaevOptions {
    fn default() -> Self {
        Self {
            radial_nodes: 48,
            angular_nodes: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevRecord {
    pub center: Point,
    pub radius: f64,
    /// Multiplicity of the vortex at the centre (0 if none).
    pub m: u32,
    pub c0: f64,
    pub c1: f64,
    pub boundary_gradient: f64,
    pub boundary_cross: f64,
    pub boundary_potential: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `max(|lhs|, |rhs|)`.
    pub scale: f64,
}

impl PohozaevRecord {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Fields {
    a: ScalarField,
    b: ScalarField,
    phi_x: ScalarField,
    phi_y: ScalarField,
    u2_x: ScalarField,
    u2_y: ScalarField,
}

/// Evaluates both sides of the balance on `B_r(center)`. When `center` is a
/// vortex its multiplicity enters through `φ`. The constants follow the
/// second-component behaviour: `c₀ = 1/2, c₁ = 1` for (s1), else `0`.
pub fn pohozaev_residual(
    sol: &SolutionPair,
    center: Point,
    radius: f64,
    second: SecondClass,
    opts: &PohozaevOptions,
) -> Result<PohozaevRecord> {
    let grid = *sol.grid();
    if !(radius > 0.0 && radius < MAX_POHOZAEV_RADIUS) {
        return Err(Error::InvalidArgument(format!(
            "Pohozaev radius must lie in (0, {MAX_POHOZAEV_RADIUS}), got {radius}"
        )));
    }
    let (m, center) = match sol.vortices.multiplicity_at(&grid, center) {
        Some(m) => {
            let (i, j) = grid.nearest_node(center);
            (m, grid.node(i, j))
        }
        None => (0, center),
    };
    let margin = 2.0 * grid.dx().max(grid.dy());
    for p in sol.vortices.points() {
        let d = grid.distance(*p, center);
        if d > margin && d < radius + margin {
            return Err(Error::InvalidArgument(format!(
                "disc of radius {radius} clips the vortex at ({}, {})",
                p.x, p.y
            )));
        }
    }
    let (c0, c1) = match second {
        SecondClass::S1 => (0.5, 1.0),
        _ => (0.0, 0.0),
    };
    let (eps, sigma) = (sol.params.eps, sol.params.sigma);
    let k = (1.0 - sigma * sigma) / (eps * eps);

    let (v1x, v1y) = gradient(&sol.v1);
    let (u0x, u0y) = gradient(&sol.u0);
    let (u2x, u2y) = gradient(&sol.u2);
    let f = Fields {
        a: sol.u1().map(f64::exp),
        b: sol.u2.map(f64::exp),
        phi_x: v1x.add(&u0x)?,
        phi_y: v1y.add(&u0y)?,
        u2_x: u2x,
        u2_y: u2y,
    };
    let potential = |a: f64, b: f64| {
        a * (1.0 - 0.5 * a) + b * (1.0 - 0.5 * b) - c0 - sigma * (a + b - a * b - c1)
    };
    let at = |dx: f64, dy: f64| grid.wrap(Point::new(center.x + dx, center.y + dy));

    let nt = opts.angular_nodes.max(8);
    let dtheta = 2.0 * PI / nt as f64;
    let (mut bg, mut bc, mut bp) = (0.0, 0.0, 0.0);
    for t in 0..nt {
        let th = t as f64 * dtheta;
        let (dx, dy) = (radius * th.cos(), radius * th.sin());
        let x = at(dx, dy);
        let r2 = radius * radius;
        let px = sample(&f.phi_x, x) - 4.0 * m as f64 * dx / r2;
        let py = sample(&f.phi_y, x) - 4.0 * m as f64 * dy / r2;
        let qx = sample(&f.u2_x, x);
        let qy = sample(&f.u2_y, x);
        let xp = dx * px + dy * py;
        let xq = dx * qx + dy * qy;
        bg += xp * xp / radius - 0.5 * radius * (px * px + py * py) + xq * xq / radius
            - 0.5 * radius * (qx * qx + qy * qy);
        bc += sigma * (2.0 * xp * xq / radius - radius * (px * qx + py * qy));
        bp += k * radius * potential(sample(&f.a, x), sample(&f.b, x));
    }
    // dσ = r dθ
    let ds = radius * dtheta;
    let (bg, bc, bp) = (bg * ds, bc * ds, bp * ds);

    let (gx, gw) = gauss_legendre(opts.radial_nodes.max(2));
    let mut bulk = 0.0;
    for (xi, wi) in gx.iter().zip(&gw) {
        let rho = 0.5 * radius * (xi + 1.0);
        let mut ring = 0.0;
        for t in 0..nt {
            let th = t as f64 * dtheta;
            let x = at(rho * th.cos(), rho * th.sin());
            let a = sample(&f.a, x);
            let b = sample(&f.b, x);
            ring += 2.0 * k * potential(a, b) + 4.0 * m as f64 * k * a * (1.0 - a)
                - 4.0 * m as f64 * sigma * k * a * (1.0 - b);
        }
        bulk += wi * 0.5 * radius * rho * ring * dtheta;
    }
    let lhs = bg + bc + bp;
    Ok(PohozaevRecord {
        center,
        radius,
        m,
        c0,
        c1,
        boundary_gradient: bg,
        boundary_cross: bc,
        boundary_potential: bp,
        lhs,
        rhs: bulk,
        residual: (lhs - bulk).abs(),
        scale: lhs.abs().max(bulk.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        // exact up to degree 11
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_order_has_centre_node() {
        let (x, w) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-15);
        assert!((w[2] - 128.0 / 225.0).abs() < 1e-14);
    }
}
