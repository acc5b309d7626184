use std::f64::consts::PI;

use proptest::prelude::*;
use vortexlab::radial::{
    beta_of_s, default_r_max, far_field_slope, far_field_slope_window, invert_beta,
    lemma21_identities, shoot, BoundaryClass, DEFAULT_TOL,
};
use vortexlab::Error;

/// `β(-1)` and `β(-4)` for `m = 0` from [`rk4_beta`] (Richardson on steps
/// `2e-3`, `1e-3` in `ln r`, integrated to `r = 2000`).
const BETA_MINUS_ONE: f64 = 4.318688192228;
const BETA_MINUS_FOUR: f64 = 4.012345081760;

/// Fixed-step RK4 in `t = ln r` for `w'' = -e^{2t} e^w (1 - e^w)` (`m = 0`),
/// started from the series `w ≈ s + c r²` at `r = 1e-4`. The flux is `-w'(t)`
/// at the end plus the closed-form tail of `e^w - e^{2w}` beyond it.
fn rk4_beta(s: f64, h: f64, r_end: f64) -> f64 {
    let r0: f64 = 1e-4;
    let c = -s.exp() * (1.0 - s.exp()) / 4.0;
    let (mut t, mut w, mut p) = (r0.ln(), s + c * r0 * r0, 2.0 * c * r0 * r0);
    let f = |t: f64, w: f64| -(2.0 * t).exp() * w.exp() * (1.0 - w.exp());
    let steps = ((r_end.ln() - t) / h).round() as usize;
    for _ in 0..steps {
        let (k1w, k1p) = (p, f(t, w));
        let (k2w, k2p) = (p + 0.5 * h * k1p, f(t + 0.5 * h, w + 0.5 * h * k1w));
        let (k3w, k3p) = (p + 0.5 * h * k2p, f(t + 0.5 * h, w + 0.5 * h * k2w));
        let (k4w, k4p) = (p + h * k3p, f(t + h, w + h * k3w));
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        t += h;
    }
    let r = t.exp();
    let mut b = -p;
    for _ in 0..3 {
        b = -p + w.exp() * r * r / (b - 2.0) - (2.0 * w).exp() * r * r / (2.0 * b - 2.0);
    }
    b
}

fn richardson(s: f64) -> f64 {
    let (a, b) = (rk4_beta(s, 2e-3, 2000.0), rk4_beta(s, 1e-3, 2000.0));
    b + (b - a) / 15.0
}

#[test]
fn oracle_reproduces_frozen_constants() {
    assert!((richardson(-1.0) - BETA_MINUS_ONE).abs() < 1e-11);
    assert!((richardson(-4.0) - BETA_MINUS_FOUR).abs() < 1e-11);
}

#[test]
fn beta_matches_rk4_oracle() {
    for (s, frozen) in [(-1.0, BETA_MINUS_ONE), (-4.0, BETA_MINUS_FOUR)] {
        let b = beta_of_s(s).unwrap();
        assert!(
            (b - frozen).abs() < 1e-7 * frozen,
            "s = {s}: {b} vs {frozen}"
        );
    }
}

#[test]
fn zero_shot_is_trivial() {
    let p = shoot(0, 0.0, 100.0, DEFAULT_TOL).unwrap();
    assert_eq!(p.beta, 0.0);
    assert!(p.w.iter().all(|w| *w == 0.0));
    assert!(matches!(far_field_slope(&p), Err(Error::Regression(_))));
    assert!(lemma21_identities(&p).is_err());
}

#[test]
fn positive_shot_rejected_for_m0() {
    assert!(shoot(0, 0.5, 100.0, DEFAULT_TOL).is_err());
    assert!(shoot(0, -1.0, 10.0, DEFAULT_TOL).is_err());
}

#[test]
fn deep_shot_approaches_four() {
    let b = beta_of_s(-20.0).unwrap();
    assert!(b > 4.0 && b < 4.6, "{b}");
}

#[test]
fn beta_blows_up_near_zero() {
    // halve s until the flux passes 16
    let mut s: f64 = -0.8;
    let mut b = beta_of_s(s).unwrap();
    while b <= 16.0 && s < -1e-12 {
        s *= 0.5;
        b = beta_of_s(s).unwrap();
    }
    assert!(b > 16.0, "s = {s}: {b}");
    assert!(beta_of_s(-0.05).unwrap() > 4.0);
}

#[test]
fn invert_round_trip_and_range() {
    let b = beta_of_s(-1.0).unwrap();
    assert!((invert_beta(b).unwrap() + 1.0).abs() < 1e-6);
    let s17 = invert_beta(17.0).unwrap();
    assert!(s17 < 0.0 && (beta_of_s(s17).unwrap() - 17.0).abs() < 1e-6);
    let a = invert_beta(4.05).unwrap();
    let c = invert_beta(4.01).unwrap();
    assert!(c < a && a < 0.0);
    assert!(matches!(invert_beta(4.0), Err(Error::FluxOutOfRange(_))));
    assert!(invert_beta(3.0).is_err());
}

#[test]
fn slope_agrees_with_flux_and_is_window_stable() {
    for s in [-8.0, -4.0, -2.0, -1.0, -0.5, -0.25] {
        let p = shoot(0, s, default_r_max(s), DEFAULT_TOL).unwrap();
        let slope = far_field_slope(&p).unwrap();
        assert!(
            (slope - p.beta).abs() < 1e-2 * p.beta,
            "s = {s}: {slope} vs {}",
            p.beta
        );
        let other = far_field_slope_window(&p, 1.0 / 3.0, 0.5).unwrap();
        assert!((other - slope).abs() < 1e-2 * slope);
    }
}

#[test]
fn identities_for_m0_and_m1() {
    for m in [0u32, 1] {
        for s in [-4.0, -2.0, -1.0] {
            let p = shoot(m, s, default_r_max(s), DEFAULT_TOL).unwrap();
            assert_eq!(p.boundary_class, BoundaryClass::LogDivergent);
            let id = lemma21_identities(&p).unwrap();
            assert!(id.holds(1e-4), "m = {m}, s = {s}: {id:?}");
            assert!(2.0 * PI * p.beta > 8.0 * PI * (1.0 + m as f64));
        }
    }
}

#[test]
fn r_max_converged() {
    for s in [-4.0, -1.0] {
        let r = default_r_max(s);
        let a = shoot(0, s, r, DEFAULT_TOL).unwrap().beta;
        let b = shoot(0, s, 2.0 * r, DEFAULT_TOL).unwrap().beta;
        assert!((a - b).abs() < 1e-6, "s = {s}: {a} vs {b}");
    }
}

#[test]
fn m0_profiles_decrease() {
    for s in [-8.0, -1.0, -0.25] {
        let p = shoot(0, s, default_r_max(s), DEFAULT_TOL).unwrap();
        assert!(p.w.windows(2).all(|w| w[1] < w[0]), "s = {s}");
        assert!(p.w.iter().all(|w| *w <= s));
    }
}

#[test]
fn shooting_is_deterministic() {
    let a = shoot(1, -2.0, 200.0, DEFAULT_TOL).unwrap();
    let b = shoot(1, -2.0, 200.0, DEFAULT_TOL).unwrap();
    assert_eq!(a, b);
    let bits =
        |p: &vortexlab::radial::RadialProfile| p.w.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn beta_strictly_increasing(a in -9.0..-0.2f64, gap in 0.05..2.0f64) {
        let b = (a + gap).min(-0.1);
        prop_assume!(b > a);
        let (ba, bb) = (beta_of_s(a).unwrap(), beta_of_s(b).unwrap());
        prop_assert!(ba > 4.0);
        prop_assert!(bb > ba, "beta({a}) = {ba}, beta({b}) = {bb}");
    }

    #[test]
    fn minimal_mass_bound(m in 0u32..3, s in -6.0..-0.3f64) {
        let p = shoot(m, s, default_r_max(s), DEFAULT_TOL).unwrap();
        if p.boundary_class == BoundaryClass::LogDivergent {
            let id = lemma21_identities(&p).unwrap();
            prop_assert!(id.mass_bound_holds(), "{id:?}");
            prop_assert!(2.0 * PI * p.beta > 8.0 * PI * (1.0 + m as f64));
        }
    }
}
