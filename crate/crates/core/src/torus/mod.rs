//! Doubly periodic grids and the real fields that live on them.
//!
//! Values are stored row-major: node `(i, j)` with `x = i * Lx / Nx`,
//! `y = j * Ly / Ny` sits at `values[j * Nx + i]`. Every reduction
//! (integral, mean, norms) runs in index order so results are bit-stable.

mod ball;
mod green;
pub mod interp;
pub mod io;
mod spectral;

pub use ball::{ball_integral, ball_integral_with, DEFAULT_SUBSAMPLES};
pub use green::{background_u0, green_function, regular_part, regular_part_at};
pub use spectral::{
    gradient, laplacian, solve_poisson_filtered, solve_poisson_meanzero, solve_screened,
    solve_shifted, ScreenedSolve,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the torus (or of the plane, for displacements).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Discretized rectangle `[0, Lx) x [0, Ly)` with periodic identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
}

impl TorusGrid {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "periods must be positive and finite, got ({lx}, {ly})"
            )));
        }
        for n in [nx, ny] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "point counts must be even and at least 8, got ({nx}, {ny})"
                )));
            }
        }
        Ok(Self { lx, ly, nx, ny })
    }

    /// Unit square torus, `|T| = 1`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(1.0, 1.0, n, n)
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    /// Cell area `h`.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
    /// Torus measure `|T|`.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(i as f64 * self.dx(), j as f64 * self.dy())
    }

    /// Node nearest to `p` after wrapping into the fundamental cell.
    pub fn nearest_node(&self, p: Point) -> (usize, usize) {
        let i = (p.x / self.dx()).round().rem_euclid(self.nx as f64) as usize % self.nx;
        let j = (p.y / self.dy()).round().rem_euclid(self.ny as f64) as usize % self.ny;
        (i, j)
    }

    pub fn wrap(&self, p: Point) -> Point {
        Point::new(p.x.rem_euclid(self.lx), p.y.rem_euclid(self.ly))
    }

    /// Minimum-image displacement `a - b`.
    pub fn displacement(&self, a: Point, b: Point) -> Point {
        Point::new(min_image(a.x - b.x, self.lx), min_image(a.y - b.y, self.ly))
    }

    /// Periodic (minimum-image) distance.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let d = self.displacement(a, b);
        d.x.hypot(d.y)
    }

    fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

pub(crate) fn min_image(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

/// Real-valued field sampled on the nodes of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at index {k}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Constructor for values already known to be finite.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(Point) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `sum(values) * h`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Continuous L2 norm `(int f^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best % self.grid.nx, best / self.grid.nx)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// Field translated by a whole number of cells: `out(i, j) = self(i - di, j - dj)`.
    pub fn roll(&self, di: isize, dj: isize) -> Self {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let mut out = vec![0.0; self.values.len()];
        for j in 0..ny {
            let sj = (j - dj).rem_euclid(ny);
            for i in 0..nx {
                let si = (i - di).rem_euclid(nx);
                out[(j * nx + i) as usize] = self.values[(sj * nx + si) as usize];
            }
        }
        Self::from_raw(self.grid, out)
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)
    }
}

/// Vortex points with positive integer multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    points: Vec<Point>,
    multiplicities: Vec<u32>,
}

impl VortexSet {
    pub fn new(points: Vec<Point>, multiplicities: Vec<u32>) -> Result<Self> {
        if points.is_empty() || points.len() != multiplicities.len() {
            return Err(Error::InvalidArgument(
                "need at least one vortex and one multiplicity per point".into(),
            ));
        }
        if multiplicities.iter().any(|&m| m == 0) {
            return Err(Error::InvalidArgument("multiplicities must be >= 1".into()));
        }
        for (a, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidArgument("vortex position not finite".into()));
            }
            for q in &points[a + 1..] {
                if p == q {
                    return Err(Error::InvalidArgument(format!(
                        "vortex points must be distinct, ({}, {}) repeated",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(Self {
            points,
            multiplicities,
        })
    }

    pub fn single(p: Point, m: u32) -> Result<Self> {
        Self::new(vec![p], vec![m])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, u32)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.multiplicities.iter().copied())
    }

    /// Total multiplicity.
    pub fn total(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    /// Vortex whose nearest grid node coincides with that of `q`, if any.
    pub fn multiplicity_at(&self, grid: &TorusGrid, q: Point) -> Option<u32> {
        let nq = grid.nearest_node(q);
        self.iter()
            .find(|(p, _)| grid.nearest_node(*p) == nq)
            .map(|(_, m)| m)
    }
}
