//! Restarted GMRES with right preconditioning.

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iters: usize,
    /// Stop when `‖b - A x‖ ≤ rel_tol ‖b‖`.
    pub rel_tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iters: 400,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresResult {
    pub iters: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A M⁻¹ y = b`, returning `x = M⁻¹ y` in `x` (initial guess zero).
///
/// `apply(y, z, out)` must set `z = M⁻¹ y` and `out = A z`.
pub fn gmres(
    b: &[f64],
    x: &mut [f64],
    opts: GmresOptions,
    mut apply: impl FnMut(&[f64], &mut [f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
) -> GmresResult {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return GmresResult {
            iters: 0,
            rel_residual: 0.0,
            converged: true,
        };
    }
    let m = opts.restart.max(1);
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut total = 0;
    let mut rel;
    // accumulated solution in the preconditioned variable
    let mut y_acc = vec![0.0; n];

    loop {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.rel_tol || total >= opts.max_iters {
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            apply(&basis[k], &mut z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][k] = hij;
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= hij * b);
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= opts.rel_tol || total >= opts.max_iters || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution for the Krylov coefficients
        let mut c = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * c[j];
            }
            c[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (ci, v) in c.iter().zip(&basis) {
            y_acc.iter_mut().zip(v).for_each(|(a, b)| *a += ci * b);
        }
        // true residual b - A M⁻¹ y
        apply(&y_acc, &mut z, &mut w);
        r.iter_mut()
            .zip(b)
            .zip(&w)
            .for_each(|((ri, bi), wi)| *ri = bi - wi);
        if total >= opts.max_iters {
            rel = norm(&r) / bnorm;
            break;
        }
    }
    precondition(&y_acc, x);
    GmresResult {
        iters: total,
        rel_residual: rel,
        converged: rel <= opts.rel_tol,
    }
}
