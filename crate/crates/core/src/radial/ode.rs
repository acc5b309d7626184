//! Dormand–Prince 5(4) with step-size control.

use std::ops::ControlFlow;

/// One accepted step: `(t0, y0, f0) -> (t1, y1, f1)`.
pub struct Step<'a, const N: usize> {
    pub t0: f64,
    pub y0: &'a [f64; N],
    pub f0: &'a [f64; N],
    pub t1: f64,
    pub y1: &'a [f64; N],
    pub f1: &'a [f64; N],
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Finished,
    Stopped,
    StepUnderflow,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights equal the last row of A (FSAL)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, handing each accepted step
/// to `observer`, which may stop the integration early.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerances,
    h_init: f64,
    mut observer: impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> (f64, [f64; N], Outcome) {
    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y);
    let mut h = h_init.min(t_end - t0);
    let h_min = 1e-14 * (1.0 + t_end.abs().max(t0.abs()));
    let mut k = [[0.0; N]; 7];
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        k[0] = k0;
        let mut stage = [0.0; N];
        for s in 1..7 {
            for n in 0..N {
                let mut acc = 0.0;
                for (r, a) in A[s][..s].iter().enumerate() {
                    acc += a * k[r][n];
                }
                stage[n] = y[n] + h * acc;
            }
            k[s] = f(t + C[s] * h, &stage);
        }
        // stage now holds the fifth-order solution
        let mut err = 0.0f64;
        for n in 0..N {
            let mut e = 0.0;
            for (r, w) in E.iter().enumerate() {
                e += w * k[r][n];
            }
            let sc = tol.atol + tol.rtol * y[n].abs().max(stage[n].abs());
            err = err.max((h * e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            if h < h_min {
                return (t, y, Outcome::StepUnderflow);
            }
            continue;
        }
        if err <= 1.0 {
            let t1 = t + h;
            let step = Step {
                t0: t,
                y0: &y,
                f0: &k0,
                t1,
                y1: &stage,
                f1: &k[6],
            };
            let flow = observer(&step);
            t = t1;
            y = stage;
            k0 = k[6];
            if flow.is_break() {
                return (t, y, Outcome::Stopped);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min {
            return (t, y, Outcome::StepUnderflow);
        }
    }
    (t, y, Outcome::Finished)
}

/// Cubic Hermite interpolation of component `n` inside an accepted step.
pub fn hermite<const N: usize>(step: &Step<N>, n: usize, t: f64) -> f64 {
    let h = step.t1 - step.t0;
    let s = (t - step.t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * step.y0[n] + h10 * h * step.f0[n] + h01 * step.y1[n] + h11 * h * step.f1[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        };
        let (t, y, out) = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            3.0,
            tol,
            0.1,
            |_| ControlFlow::Continue(()),
        );
        assert_eq!(out, Outcome::Finished);
        assert_eq!(t, 3.0);
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        };
        let mut worst = 0.0f64;
        integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            6.0,
            tol,
            0.01,
            |st| {
                let tm = 0.5 * (st.t0 + st.t1);
                worst = worst.max((hermite(st, 0, tm) - tm.sin()).abs());
                ControlFlow::Continue(())
            },
        );
        assert!(worst < 1e-5, "{worst}");
    }
}
