//! Uniform bounds for the screened operator `ΔS - S/ε²` on random data.
//!
//! The data are random trigonometric polynomials with wave numbers below 4,
//! held fixed while `ε` shrinks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexlab::torus::{solve_screened, ScalarField, TorusGrid};

fn main() -> vortexlab::Result<()> {
    let grid = TorusGrid::unit(256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let samples: Vec<ScalarField> = (0..20)
        .map(|_| {
            let modes: Vec<(f64, f64, f64, f64)> = (0..12)
                .map(|_| {
                    (
                        rng.gen_range(0..4) as f64,
                        rng.gen_range(0..4) as f64,
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(0.0..6.3),
                    )
                })
                .collect();
            ScalarField::from_fn(grid, |p| {
                modes
                    .iter()
                    .map(|(kx, ky, a, ph)| a * (TAU * (kx * p.x + ky * p.y) + ph).sin())
                    .sum()
            })
        })
        .collect();

    println!(
        "{:>7} {:>14} {:>14}",
        "eps", "max inf-ratio", "max L2-ratio"
    );
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let mut worst = (0.0f64, 0.0f64);
        for g in &samples {
            let s = solve_screened(g, eps)?;
            worst = (worst.0.max(s.ratio_inf), worst.1.max(s.ratio_l2));
        }
        println!("{eps:>7} {:>14.6} {:>14.6}", worst.0, worst.1);
    }
    Ok(())
}
