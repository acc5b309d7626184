//! Off-node evaluation of periodic fields.

use super::{Point, ScalarField};

fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Periodic bicubic Lagrange interpolation (fourth order in the spacing).
pub fn sample(f: &ScalarField, p: Point) -> f64 {
    let g = f.grid();
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let sx = p.x / g.dx();
    let sy = p.y / g.dy();
    let (fx, fy) = (sx.floor(), sy.floor());
    let (wx, wy) = (cubic_weights(sx - fx), cubic_weights(sy - fy));
    let (i0, j0) = (fx as isize, fy as isize);
    let vals = f.values();
    let mut acc = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let j = (j0 - 1 + b as isize).rem_euclid(ny);
        let row = (j * nx) as usize;
        let mut line = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            let i = (i0 - 1 + a as isize).rem_euclid(nx) as usize;
            line += wxa * vals[row + i];
        }
        acc += wyb * line;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn exact_on_nodes() {
        let g = TorusGrid::unit(16).unwrap();
        let f = ScalarField::from_fn(g, |p| (2.0 * PI * p.x).sin() + p.y);
        assert!((sample(&f, g.node(3, 9)) - f.at(3, 9)).abs() < 1e-14);
        // wrapped coordinates land on the same node
        assert!(
            (sample(&f, Point::new(1.0 + g.node(3, 9).x, g.node(3, 9).y)) - f.at(3, 9)).abs()
                < 1e-12
        );
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let g = TorusGrid::unit(n).unwrap();
            let f = ScalarField::from_fn(g, |p| (2.0 * PI * p.x).sin() * (2.0 * PI * p.y).cos());
            (0..50)
                .map(|k| {
                    let q = Point::new(0.0173 * k as f64 + 0.011, 0.6181 - 0.0097 * k as f64);
                    (sample(&f, q) - (2.0 * PI * q.x).sin() * (2.0 * PI * q.y).cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 13.0, "ratio {ratio}");
    }
}
