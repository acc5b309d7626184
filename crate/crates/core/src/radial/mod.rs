//! Radial solutions of the limiting vortex equation
//! `Δw + e^w (1 - e^w) = 4π m δ₀` on the plane and their flux.
//!
//! A shot from the origin fixes `w = 2m ln r + v` with `v(0) = v₀`,
//! `v'(0) = 0` and integrates in the logarithmic radius `t = ln r`, where the
//! equation reads
//! `w_tt = -e^{2t} e^w (1 - e^w)`. Along with `w` and `r w'` the integrator
//! carries the running integrals of `e^w(1 - e^w)`, `e^w` and `e^{2w}`
//! against `r dr`, so the flux is read off directly instead of being
//! post-processed from samples.
//!
//! The shooting value `s` is the peak of `w`. For `m = 0` the profile is
//! radially decreasing, so `s = w(0) = v₀`. For `m >= 1`, `w → -∞` at the
//! origin and origin values `v₀` above a threshold overshoot `w = 0` and blow
//! up; [`shoot`] then locates `v₀` by bisection so that `max w = s`, which
//! puts every `s < 0` on a log-divergent profile.

pub mod ode;

use std::f64::consts::PI;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use ode::{hermite, integrate, Outcome, Tolerances};

/// Default relative tolerance of the shooting integrator.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Radius below which the series expansion at the origin is used.
pub const ORIGIN_RADIUS: f64 = 1e-4;
/// Smallest accepted outer radius.
pub const MIN_R_MAX: f64 = 50.0;
/// Stored samples per unit of `ln r`.
const SAMPLES_PER_LOG_UNIT: f64 = 64.0;
/// Minimum window population for the far-field regression.
const MIN_REGRESSION_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// `w -> 0` at infinity.
    DecaysToZero,
    /// `w = -β ln r + O(1)` at infinity.
    LogDivergent,
    /// Neither behavior is established by `r_max`.
    Unresolved,
}

/// A shot solution `w(r; s)` sampled on a logarithmic radius grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub m: u32,
    /// Peak value of `w` (equal to `v0` when `m = 0`).
    pub s: f64,
    /// Origin value `v(0)` of the regular part `v = w - 2m ln r`.
    pub v0: f64,
    pub r_max: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    /// `∫₀^∞ e^w (1 - e^w) r dr`, i.e. `(1/2π) ∫_{R²} e^w (1 - e^w)`, tail included.
    pub beta: f64,
    /// Tail contribution beyond `r_max` included in `beta`.
    pub tail: f64,
    /// `∫_{R²} e^w dx`, tail included.
    pub integral_ew: f64,
    /// `∫_{R²} e^{2w} dx`, tail included.
    pub integral_e2w: f64,
    pub boundary_class: BoundaryClass,
    pub tail_converged: bool,
}

impl RadialProfile {
    /// Far-field decay rate `b` in `w = -b ln r + O(1)`: the flux minus `2m`.
    pub fn decay_rate(&self) -> f64 {
        self.beta - 2.0 * self.m as f64
    }

    /// Total mass `∫ e^w (1 - e^w) dx = 2π β`.
    pub fn mass(&self) -> f64 {
        2.0 * PI * self.beta
    }

    /// `w(r)`, interpolated linearly in `ln r`; the origin series below the
    /// first sample and the logarithmic tail beyond the last one.
    pub fn value_at(&self, r: f64) -> f64 {
        let m = self.m as f64;
        let r0 = self.r[0];
        if r <= r0 {
            if r <= 0.0 {
                return if self.m == 0 {
                    self.v0
                } else {
                    f64::NEG_INFINITY
                };
            }
            return 2.0 * m * r.ln()
                + self.v0
                + origin_coefficient(self.m, self.v0) * r.powf(2.0 * m + 2.0);
        }
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            let rate = match self.boundary_class {
                BoundaryClass::LogDivergent => self.decay_rate(),
                _ => 0.0,
            };
            return self.w[last] - rate * (r / self.r[last]).ln();
        }
        let x = (r / r0).ln() * SAMPLES_PER_LOG_UNIT;
        let k = (x.floor() as usize).min(last - 1);
        let (ta, tb) = ((self.r[k] / r0).ln(), (self.r[k + 1] / r0).ln());
        let frac = ((r / r0).ln() - ta) / (tb - ta);
        self.w[k] * (1.0 - frac) + self.w[k + 1] * frac
    }
}

/// Leading coefficient `c` of `v(r) ≈ s + c r^{2m+2}` near the origin.
fn origin_coefficient(m: u32, s: f64) -> f64 {
    let k = 2.0 * m as f64 + 2.0;
    let es = s.exp();
    let damping = if m == 0 { 1.0 - es } else { 1.0 };
    -es * damping / (k * k)
}

fn check_common(r_max: f64, tol: f64) -> Result<()> {
    if !(r_max >= MIN_R_MAX && r_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "r_max must be at least {MIN_R_MAX}, got {r_max}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// Shoots the profile whose peak value is `s` (`s = w(0)` when `m = 0`).
pub fn shoot(m: u32, s: f64, r_max: f64, tol: f64) -> Result<RadialProfile> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shooting value must be finite, got {s}"
        )));
    }
    if m == 0 {
        if s > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "s must be <= 0 for m = 0, got {s}"
            )));
        }
        return shoot_from_origin(0, s, r_max, tol);
    }
    if s >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "peak value must be < 0 for m = {m}, got {s}"
        )));
    }
    check_common(r_max, tol)?;
    // peak(v0) is increasing; overshooting shots count as "too high"
    let peak = |v0: f64| -> Result<Option<f64>> {
        match shoot_from_origin(m, v0, r_max, tol) {
            Ok(p) => Ok(Some(peak_value(&p))),
            Err(Error::NonPhysical(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut lo = 2.0 * s - 2.0;
    let mut width = 1.0;
    while !peak(lo)?.is_some_and(|p| p < s) {
        lo -= width;
        width *= 2.0;
        if lo < -800.0 {
            return Err(Error::InvalidArgument(format!("no profile with peak {s}")));
        }
    }
    let mut hi = lo + 1.0;
    while peak(hi)?.is_some_and(|p| p < s) {
        lo = hi;
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match peak(mid)? {
            Some(p) if (p - s).abs() < 1e-10 => break,
            Some(p) if p < s => lo = mid,
            _ => hi = mid,
        }
        if hi - lo < 1e-14 * lo.abs().max(1.0) {
            break;
        }
    }
    let mut best = shoot_from_origin(m, 0.5 * (lo + hi), r_max, tol);
    if best.is_err() {
        best = shoot_from_origin(m, lo, r_max, tol);
    }
    let mut profile = best?;
    profile.s = s;
    Ok(profile)
}

/// Peak of the sampled profile, refined by a parabola through the three
/// samples around the discrete maximum.
fn peak_value(p: &RadialProfile) -> f64 {
    let (k, &wk) =
        p.w.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty profile");
    if k == 0 || k + 1 >= p.w.len() {
        return wk;
    }
    let (a, b, c) = (p.w[k - 1], wk, p.w[k + 1]);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return b;
    }
    b - 0.125 * (c - a) * (c - a) / curv
}

/// Raw shot with `v(0) = v0` for multiplicity `m`, no peak adjustment.
pub fn shoot_from_origin(m: u32, v0: f64, r_max: f64, tol: f64) -> Result<RadialProfile> {
    if !v0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "origin value must be finite, got {v0}"
        )));
    }
    if m == 0 && v0 > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "v0 must be <= 0 for m = 0, got {v0}"
        )));
    }
    check_common(r_max, tol)?;
    let s = v0;
    let mf = m as f64;
    let k = 2.0 * mf + 2.0;
    let r0 = ORIGIN_RADIUS;
    let c = origin_coefficient(m, s);
    let t0 = r0.ln();
    let t_end = r_max.ln();
    let es = s.exp();
    // state: [w, r w', ∫e^w(1-e^w) r dr, ∫e^w r dr, ∫e^{2w} r dr]
    let y0 = [
        2.0 * mf * t0 + s + c * r0.powf(k),
        2.0 * mf + k * c * r0.powf(k),
        -k * c * r0.powf(k),
        es * r0.powf(2.0 * mf + 2.0) / (2.0 * mf + 2.0),
        es * es * r0.powf(4.0 * mf + 2.0) / (4.0 * mf + 2.0),
    ];
    let rhs = |t: f64, y: &[f64; 5]| {
        let ew = y[0].exp();
        let weight = (2.0 * t).exp() * ew;
        let force = weight * (1.0 - ew);
        [y[1], -force, force, weight, weight * ew]
    };

    let dt_out = 1.0 / SAMPLES_PER_LOG_UNIT;
    let n_out = ((t_end - t0) / dt_out).floor() as usize + 1;
    let mut r = Vec::with_capacity(n_out + 1);
    let mut w = Vec::with_capacity(n_out + 1);
    r.push(r0);
    w.push(y0[0]);
    let mut next = 1usize;
    let mut runaway = None;
    let tols = Tolerances {
        rtol: tol,
        atol: tol * 1e-2,
    };
    let (t_last, y_end, outcome) = integrate(rhs, t0, y0, t_end, tols, 1e-3, |step| {
        while next < n_out && t0 + next as f64 * dt_out <= step.t1 {
            let t = t0 + next as f64 * dt_out;
            r.push(t.exp());
            w.push(hermite(step, 0, t));
            next += 1;
        }
        if step.y1[0] > 0.0 && step.y1[1] > 0.0 {
            runaway = Some(step.t1.exp());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    });
    if let Some(at) = runaway {
        return Err(Error::NonPhysical(format!(
            "w crosses above 0 while increasing at r = {at:.4} (m = {m}, s = {s}); e^w overflows"
        )));
    }
    if outcome == Outcome::StepUnderflow {
        return Err(Error::Overflow(format!(
            "step size underflow at r = {:.4e} (m = {m}, s = {s})",
            t_last.exp()
        )));
    }
    if *r.last().expect("origin sample") < r_max * (1.0 - 1e-12) {
        r.push(r_max);
        w.push(y_end[0]);
    }

    let [w_end, p_end, flux, j1, j2] = y_end;
    let boundary_class = if w_end.abs() < 1e-8 && p_end.abs() < 1e-8 {
        BoundaryClass::DecaysToZero
    } else if p_end < 0.0 {
        BoundaryClass::LogDivergent
    } else {
        BoundaryClass::Unresolved
    };

    let (mut tail, mut tail1, mut tail2) = (0.0, 0.0, 0.0);
    let mut tail_converged = boundary_class == BoundaryClass::DecaysToZero;
    if boundary_class == BoundaryClass::LogDivergent {
        // beyond r_max: w ≈ w_end - b ln(r / r_max); two fixed-point passes in b
        let b0 = -p_end;
        if b0 > 2.0 {
            let (e1, r2) = (w_end.exp(), r_max * r_max);
            let mut b = b0;
            for _ in 0..2 {
                tail1 = e1 * r2 / (b - 2.0);
                tail2 = e1 * e1 * r2 / (2.0 * b - 2.0);
                tail = tail1 - tail2;
                b = b0 + tail;
            }
            tail_converged = tail <= 1e-3 * flux.abs().max(1.0);
        }
    }

    Ok(RadialProfile {
        m,
        s,
        v0,
        r_max,
        r,
        w,
        beta: flux + tail,
        tail,
        integral_ew: 2.0 * PI * (j1 + tail1),
        integral_e2w: 2.0 * PI * (j2 + tail2),
        boundary_class,
        tail_converged,
    })
}

/// Outer radius used by [`beta_of_s`]: large enough that the bubble of
/// width `e^{-s/2}` has fully entered its logarithmic tail.
pub fn default_r_max(s: f64) -> f64 {
    (1e3 * (-0.5 * s).exp()).max(MIN_R_MAX)
}

/// Flux `β(s)` of the `m = 0` profile.
pub fn beta_of_s(s: f64) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta_of_s requires s < 0, got {s}"
        )));
    }
    Ok(shoot(0, s, default_r_max(s), DEFAULT_TOL)?.beta)
}

/// Accuracy of [`invert_beta`] in the flux.
pub const INVERT_TOL: f64 = 1e-10;

/// Solves `β(s) = target` for `s < 0` by bisection; requires `target > 4`.
pub fn invert_beta(target: f64) -> Result<f64> {
    if !(target > 4.0 && target.is_finite()) {
        return Err(Error::FluxOutOfRange(target));
    }
    let mut hi = -1.0;
    while beta_of_s(hi)? <= target {
        hi *= 0.5;
        if hi > -1e-12 {
            return Err(Error::FluxOutOfRange(target));
        }
    }
    let mut lo = hi * 2.0;
    while beta_of_s(lo)? >= target {
        lo *= 2.0;
        if lo < -400.0 {
            return Err(Error::FluxOutOfRange(target));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let b = beta_of_s(mid)?;
        if (b - target).abs() < INVERT_TOL || (hi - lo) < 1e-13 {
            return Ok(mid);
        }
        if b < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Left and right sides of the quadratic flux identities for a
/// log-divergent profile, with `b` the far-field decay rate:
/// `∫e^{2w} = π(b² - 4b - 4m² - 8m)`, `∫e^w = π(b² - 2b - 4m² - 4m)`,
/// and the mass bound `∫ e^w(1 - e^w) > 8π(1 + m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxIdentityReport {
    pub m: u32,
    pub s: f64,
    pub decay_rate: f64,
    pub e2w_lhs: f64,
    pub e2w_rhs: f64,
    pub ew_lhs: f64,
    pub ew_rhs: f64,
    pub mass: f64,
    pub mass_bound: f64,
}

impl FluxIdentityReport {
    pub fn e2w_rel_error(&self) -> f64 {
        rel(self.e2w_lhs, self.e2w_rhs)
    }
    pub fn ew_rel_error(&self) -> f64 {
        rel(self.ew_lhs, self.ew_rhs)
    }
    pub fn mass_bound_holds(&self) -> bool {
        self.mass > self.mass_bound
    }
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.e2w_rel_error() <= rel_tol && self.ew_rel_error() <= rel_tol && self.mass_bound_holds()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn lemma21_identities(profile: &RadialProfile) -> Result<FluxIdentityReport> {
    if profile.boundary_class != BoundaryClass::LogDivergent {
        return Err(Error::NotApplicable(format!(
            "profile (m = {}, s = {}) is {:?}, identities need a log-divergent profile",
            profile.m, profile.s, profile.boundary_class
        )));
    }
    let b = profile.decay_rate();
    let m = profile.m as f64;
    Ok(FluxIdentityReport {
        m: profile.m,
        s: profile.s,
        decay_rate: b,
        e2w_lhs: profile.integral_e2w,
        e2w_rhs: PI * (b * b - 4.0 * b - 4.0 * m * m - 8.0 * m),
        ew_lhs: profile.integral_ew,
        ew_rhs: PI * (b * b - 2.0 * b - 4.0 * m * m - 4.0 * m),
        mass: profile.mass(),
        mass_bound: 8.0 * PI * (1.0 + m),
    })
}

/// Least-squares slope of `w` against `-ln r` on `[r_max/4, r_max/2]`.
pub fn far_field_slope(profile: &RadialProfile) -> Result<f64> {
    far_field_slope_window(profile, 0.25, 0.5)
}

/// [`far_field_slope`] on the window `[lo * r_max, hi * r_max]`.
pub fn far_field_slope_window(profile: &RadialProfile, lo: f64, hi: f64) -> Result<f64> {
    if profile.boundary_class == BoundaryClass::DecaysToZero {
        return Err(Error::Regression(
            "profile has no logarithmic growth (zero-variance response)".into(),
        ));
    }
    let (a, b) = (lo * profile.r_max, hi * profile.r_max);
    let pts: Vec<(f64, f64)> = profile
        .r
        .iter()
        .zip(&profile.w)
        .filter(|(r, _)| **r >= a && **r <= b)
        .map(|(r, w)| (-r.ln(), *w))
        .collect();
    if pts.len() < MIN_REGRESSION_SAMPLES {
        return Err(Error::Regression(format!(
            "window holds {} samples, need {MIN_REGRESSION_SAMPLES}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Regression(
            "zero variance in regression window".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shot_is_trivial() {
        let p = shoot(0, 0.0, 60.0, DEFAULT_TOL).unwrap();
        assert_eq!(p.beta, 0.0);
        assert!(p.w.iter().all(|&w| w == 0.0));
        assert_eq!(p.boundary_class, BoundaryClass::DecaysToZero);
        assert!(matches!(far_field_slope(&p), Err(Error::Regression(_))));
        assert!(matches!(
            lemma21_identities(&p),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn preconditions() {
        assert!(shoot(0, 0.5, 60.0, 1e-8).is_err());
        assert!(shoot(0, -1.0, 10.0, 1e-8).is_err());
        assert!(shoot(0, -1.0, 60.0, 0.0).is_err());
        assert!(beta_of_s(0.0).is_err());
        assert!(matches!(invert_beta(4.0), Err(Error::FluxOutOfRange(_))));
    }

    #[test]
    fn small_window_rejected() {
        let p = shoot(0, -1.0, 60.0, 1e-8).unwrap();
        assert!(matches!(
            far_field_slope_window(&p, 0.49, 0.5),
            Err(Error::Regression(_))
        ));
    }

    #[test]
    fn m0_profile_is_decreasing() {
        let p = shoot(0, -2.0, 200.0, 1e-10).unwrap();
        assert!(p.w.windows(2).all(|w| w[1] < w[0]));
        assert!(p.w.iter().all(|&w| w <= p.s));
    }

    #[test]
    fn value_at_matches_samples() {
        let p = shoot(0, -1.0, 100.0, 1e-10).unwrap();
        let k = 300;
        assert!((p.value_at(p.r[k]) - p.w[k]).abs() < 1e-12);
        assert!((p.value_at(0.0) - p.s).abs() < 1e-15);
    }
}
