//! Trigonometric (FFT) differential operators on the torus.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{ScalarField, TorusGrid};
use crate::error::{Error, Result};

struct Plans {
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

fn plans(nx: usize, ny: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry((nx, ny))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                row_fwd: planner.plan_fft_forward(nx),
                row_inv: planner.plan_fft_inverse(nx),
                col_fwd: planner.plan_fft_forward(ny),
                col_inv: planner.plan_fft_inverse(ny),
            })
        })
        .clone()
}

fn process_rows(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, dst)| {
        for (r, d) in dst.iter_mut().enumerate() {
            *d = src[r * cols + c];
        }
    });
    out
}

/// Unnormalized forward 2-D DFT of row-major real data.
fn forward(grid: &TorusGrid, values: &[f64]) -> Vec<Complex64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let p = plans(nx, ny);
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    process_rows(&mut data, nx, &p.row_fwd);
    let mut t = transpose(&data, ny, nx);
    process_rows(&mut t, ny, &p.col_fwd);
    // spectrum stored column-major: t[i * ny + j] holds mode (i, j)
    t
}

/// Inverse of [`forward`], returning the real part scaled by `1/(Nx Ny)`.
fn inverse(grid: &TorusGrid, mut spec: Vec<Complex64>) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let p = plans(nx, ny);
    process_rows(&mut spec, ny, &p.col_inv);
    let mut data = transpose(&spec, nx, ny);
    process_rows(&mut data, nx, &p.row_inv);
    let norm = 1.0 / (nx * ny) as f64;
    data.iter().map(|c| c.re * norm).collect()
}

/// Angular wavenumbers along one axis; `signed` zeroes the Nyquist entry.
fn wavenumbers(n: usize, period: f64, signed: bool) -> Vec<f64> {
    let base = 2.0 * PI / period;
    (0..n)
        .map(|i| {
            if i < n / 2 {
                base * i as f64
            } else if i == n / 2 {
                if signed {
                    0.0
                } else {
                    base * (n / 2) as f64
                }
            } else {
                base * (i as f64 - n as f64)
            }
        })
        .collect()
}

/// Multiplies every Fourier mode by a real symbol `s(kx, ky)`.
fn apply_symbol(f: &ScalarField, symbol: impl Fn(f64, f64) -> f64 + Sync) -> ScalarField {
    let grid = *f.grid();
    let kx = wavenumbers(grid.nx(), grid.lx(), false);
    let ky = wavenumbers(grid.ny(), grid.ly(), false);
    let mut spec = forward(&grid, f.values());
    let ny = grid.ny();
    spec.par_chunks_mut(ny).enumerate().for_each(|(i, col)| {
        for (j, c) in col.iter_mut().enumerate() {
            *c *= symbol(kx[i], ky[j]);
        }
    });
    ScalarField::from_raw(grid, inverse(&grid, spec))
}

/// Spectral Laplacian.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    // the mean is annihilated anyway; removing it first lowers FFT roundoff
    let centred = f.shift(-f.mean());
    apply_symbol(&centred, |kx, ky| -(kx * kx + ky * ky))
}

/// Spectral gradient `(d/dx, d/dy)`; Nyquist modes are dropped.
pub fn gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let grid = *f.grid();
    let kx = wavenumbers(grid.nx(), grid.lx(), true);
    let ky = wavenumbers(grid.ny(), grid.ly(), true);
    let spec = forward(&grid, f.values());
    let ny = grid.ny();
    let mut sx = spec.clone();
    let mut sy = spec;
    let i_unit = Complex64::new(0.0, 1.0);
    sx.par_chunks_mut(ny).enumerate().for_each(|(i, col)| {
        for c in col.iter_mut() {
            *c *= i_unit * kx[i];
        }
    });
    sy.par_chunks_mut(ny).for_each(|col| {
        for (j, c) in col.iter_mut().enumerate() {
            *c *= i_unit * ky[j];
        }
    });
    (
        ScalarField::from_raw(grid, inverse(&grid, sx)),
        ScalarField::from_raw(grid, inverse(&grid, sy)),
    )
}

/// Solves `Δu = f - mean(f)` with `mean(u) = 0`.
pub fn solve_poisson_meanzero(f: &ScalarField) -> ScalarField {
    apply_symbol(f, |kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

/// Exponential low-pass filter `exp(-36 (|k|/k_N)^8)`, `k_N = π/max(dx, dy)`.
/// Unity on the resolved band and below `1e-15` at the Nyquist frequency.
pub(crate) fn exponential_filter(grid: &TorusGrid) -> impl Fn(f64, f64) -> f64 + Sync {
    let kn = PI / grid.dx().max(grid.dy());
    move |kx: f64, ky: f64| {
        let eta2 = (kx * kx + ky * ky) / (kn * kn);
        (-36.0 * eta2.powi(4)).exp()
    }
}

/// As [`solve_poisson_meanzero`] with the source passed through
/// [`exponential_filter`] first.
pub fn solve_poisson_filtered(f: &ScalarField) -> ScalarField {
    let filter = exponential_filter(f.grid());
    apply_symbol(f, |kx, ky| {
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            0.0
        } else {
            -filter(kx, ky) / k2
        }
    })
}

/// Solves `Δu - kappa u = f` for `kappa > 0`.
pub fn solve_shifted(f: &ScalarField, kappa: f64) -> Result<ScalarField> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "shift must be positive and finite, got {kappa}"
        )));
    }
    Ok(apply_symbol(f, move |kx, ky| {
        -1.0 / (kx * kx + ky * ky + kappa)
    }))
}

/// Solution of the screened equation together with the two uniform-bound ratios.
#[derive(Debug, Clone)]
pub struct ScreenedSolve {
    pub solution: ScalarField,
    /// `‖S‖_∞ / (ε ‖g‖_2)`.
    pub ratio_l2: f64,
    /// `‖S‖_∞ / (ε² ‖g‖_∞)`.
    pub ratio_inf: f64,
}

/// Inverts `L(S) = ΔS - S/ε²`.
pub fn solve_screened(g: &ScalarField, eps: f64) -> Result<ScreenedSolve> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let solution = solve_shifted(g, 1.0 / (eps * eps))?;
    let s_inf = solution.max_abs();
    let (g_l2, g_inf) = (g.l2_norm(), g.max_abs());
    let ratio = |den: f64| if den > 0.0 { s_inf / den } else { 0.0 };
    Ok(ScreenedSolve {
        ratio_l2: ratio(eps * g_l2),
        ratio_inf: ratio(eps * eps * g_inf),
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Point;

    fn grid() -> TorusGrid {
        TorusGrid::new(2.0, 1.0, 32, 16).unwrap()
    }

    #[test]
    fn forward_inverse_round_trip() {
        let g = grid();
        let f = ScalarField::from_fn(g, |p| (p.x * 3.0).sin() * p.y + p.x);
        let back = inverse(&g, forward(&g, f.values()));
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let f = ScalarField::constant(grid(), 3.5);
        assert!(laplacian(&f).max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = grid();
        let k = 2.0 * PI / g.lx();
        let f = ScalarField::from_fn(g, |p: Point| (k * p.x).cos());
        let lap = laplacian(&f);
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a + k * k * b).abs() < 1e-11);
        }
    }

    #[test]
    fn nyquist_cosine_is_exact() {
        let g = grid();
        let k = PI * g.nx() as f64 / g.lx();
        let f = ScalarField::from_fn(g, |p| (k * p.x).cos());
        let lap = laplacian(&f);
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a + k * k * b).abs() < 1e-9 * k * k);
        }
    }

    #[test]
    fn gradient_of_trig_poly() {
        let g = grid();
        let (kx, ky) = (2.0 * PI / g.lx(), 4.0 * PI / g.ly());
        let f = ScalarField::from_fn(g, |p| (kx * p.x).sin() * (ky * p.y).cos());
        let (fx, fy) = gradient(&f);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let p = g.node(i, j);
                let ex = kx * (kx * p.x).cos() * (ky * p.y).cos();
                let ey = -ky * (kx * p.x).sin() * (ky * p.y).sin();
                assert!((fx.at(i, j) - ex).abs() < 1e-11);
                assert!((fy.at(i, j) - ey).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn shifted_requires_positive_shift() {
        let f = ScalarField::zeros(grid());
        assert!(solve_shifted(&f, 0.0).is_err());
        assert!(solve_screened(&f, -1.0).is_err());
        assert!(solve_screened(&f, 0.0).is_err());
    }
}
