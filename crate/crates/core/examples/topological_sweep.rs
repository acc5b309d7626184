//! Topological branch: continuation from `ε = 0.2` to `0.05` with `σ = 𝔑ε²`,
//! one vortex of multiplicity one, followed by the full diagnostics.
//!
//! The sweep runs on a 3 x 3 torus; on the unit torus a single vortex admits
//! no solution once `ε` is above roughly 0.1.

use vortexlab::asymptotics::{diagnose, DiagnosticsOptions};
use vortexlab::solver::{continuation, schedule_from_eps, NewtonOptions, Seed, SigmaRule};
use vortexlab::torus::{Point, TorusGrid, VortexSet};

fn main() -> vortexlab::Result<()> {
    let grid = TorusGrid::new(3.0, 3.0, 256, 256)?;
    let vortices = VortexSet::single(Point::new(0.75, 0.75), 1)?;
    let schedule = schedule_from_eps(
        &[0.2, 0.15, 0.1, 0.07, 0.05],
        SigmaRule::Quadratic { factor: 1.0 },
        1.0,
    )?;
    let run = continuation(
        &grid,
        &vortices,
        &schedule,
        &Seed::Topological { level: -0.1 },
        &NewtonOptions::default(),
    )?;

    let opts = DiagnosticsOptions {
        vortex_radius: 0.4,
        ..Default::default()
    };
    let report = diagnose(&run.solutions, &opts)?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>11} {:>10} {:>10} {:>9}",
        "eps", "I1", "8π+cross", "I2", "|u2|inf", "eps|Dv1|", "|Du2|", "residual"
    );
    for s in &report.steps {
        println!(
            "{:>6.3} {:>10.5} {:>10.5} {:>10.5} {:>11.4e} {:>10.5} {:>10.5} {:>9.1e}",
            s.eps,
            s.i1,
            8.0 * std::f64::consts::PI + s.i1_cross,
            s.i2,
            s.norm_u2,
            s.grad_v1_scaled,
            s.grad_u2,
            s.residual_inf
        );
    }
    println!(
        "first = {:?}, second = {:?}, slope = {:?}",
        report.first_class,
        report.second_class,
        report.second.and_then(|s| s.slope)
    );
    for p in &report.pohozaev {
        println!(
            "balance at ({:.3}, {:.3}), r = {}: relative residual {:.2e}",
            p.center.x,
            p.center.y,
            p.radius,
            p.relative()
        );
    }
    for v in report.violations(1e-6) {
        println!("violation: {v}");
    }
    Ok(())
}
