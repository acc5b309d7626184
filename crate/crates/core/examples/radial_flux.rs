//! Flux table of radial profiles of `Δw + e^w(1 - e^w) = 4πm δ₀`.
//!
//! ```text
//! cargo run --release --example radial_flux
//! ```

use vortexlab::radial::{
    beta_of_s, default_r_max, far_field_slope, invert_beta, lemma21_identities, shoot, DEFAULT_TOL,
};

fn main() -> vortexlab::Result<()> {
    println!(
        "{:>3} {:>7} {:>12} {:>12} {:>10} {:>10}",
        "m", "s", "beta", "slope", "e2w err", "ew err"
    );
    for m in [0u32, 1] {
        for s in [-8.0, -4.0, -2.0, -1.0, -0.5] {
            let p = shoot(m, s, default_r_max(s), DEFAULT_TOL)?;
            let id = lemma21_identities(&p)?;
            let slope = far_field_slope(&p)?;
            println!(
                "{m:>3} {s:>7.2} {:>12.8} {:>12.8} {:>10.2e} {:>10.2e}",
                p.beta,
                slope,
                id.e2w_rel_error(),
                id.ew_rel_error()
            );
        }
    }

    let beta = beta_of_s(-20.0)?;
    println!("\nbeta(-20) = {beta:.6}  (limit 4 as s -> -inf)");
    let s = invert_beta(17.0)?;
    println!("invert_beta(17) = {s:.6}, beta back = {:.8}", beta_of_s(s)?);
    Ok(())
}
