//! Concentrating branch on the unit torus: a transplanted radial bubble is
//! continued to smaller `ε` and the peak of `w₁ = u₁ - 2 ln ε` is tracked.

use std::f64::consts::PI;

use vortexlab::asymptotics::{detect_blowup_points, local_mass, step_record};
use vortexlab::solver::{
    continuation_traced, schedule_from_eps, ConcentratingSeed, NewtonOptions, Seed, SigmaRule,
};
use vortexlab::torus::{Point, TorusGrid, VortexSet};

fn main() -> vortexlab::Result<()> {
    let grid = TorusGrid::unit(256)?;
    let vortices = VortexSet::single(Point::new(0.25, 0.25), 1)?;
    let schedule = schedule_from_eps(
        &[0.05, 0.04, 0.03],
        SigmaRule::Quadratic { factor: 1.0 },
        1.0,
    )?;
    let seed = Seed::Concentrating(ConcentratingSeed::default());
    let run = continuation_traced(
        &grid,
        &vortices,
        &schedule,
        &seed,
        &NewtonOptions::default(),
    )?;

    for sol in &run.solutions {
        let rec = step_record(sol);
        let (i, j) = sol.u1().argmax();
        let peak = grid.node(i, j);
        println!(
            "eps = {:.3}: residual {:.1e}, sup w1 = {:.3} at ({:.3}, {:.3})",
            rec.eps, rec.residual_inf, rec.sup_w1, peak.x, peak.y
        );
        for d in [0.05, 0.1, 0.2] {
            println!(
                "    local mass within {d}: {:.3}",
                local_mass(sol, peak, d)?
            );
        }
        let sites = detect_blowup_points(sol, 4.0);
        println!("    sites above median + 4: {}", sites.len());
    }
    match &run.failure {
        Some(f) => println!(
            "stopped at eps = {}: {} ({} Newton steps)",
            f.params.eps,
            f.message,
            f.trace.len()
        ),
        None => println!(
            "all steps converged; quantization threshold 8π = {:.3}",
            8.0 * PI
        ),
    }
    Ok(())
}
