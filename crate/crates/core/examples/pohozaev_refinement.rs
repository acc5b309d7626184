//! Grid refinement of the Pohozaev balance on a disc around the vortex.
//!
//! The same configuration is solved on 128², 256² and 512² grids and the
//! relative defect of the balance is printed with the observed order.

use vortexlab::asymptotics::{pohozaev_residual, PohozaevOptions, SecondClass};
use vortexlab::solver::{
    continuation, schedule_from_eps, ConcentratingSeed, NewtonOptions, Seed, SigmaRule,
};
use vortexlab::torus::{Point, TorusGrid, VortexSet};

fn main() -> vortexlab::Result<()> {
    let vortex = Point::new(0.25, 0.25);
    let vortices = VortexSet::single(vortex, 1)?;
    let schedule = schedule_from_eps(&[0.05], SigmaRule::Quadratic { factor: 1.0 }, 1.0)?;
    let seed = Seed::Concentrating(ConcentratingSeed::default());
    let mut previous: Option<f64> = None;
    for n in [128, 256, 512] {
        let grid = TorusGrid::unit(n)?;
        let run = continuation(
            &grid,
            &vortices,
            &schedule,
            &seed,
            &NewtonOptions::default(),
        )?;
        let sol = &run.solutions[0];
        let rec = pohozaev_residual(
            sol,
            vortex,
            0.2,
            SecondClass::Undetermined,
            &PohozaevOptions::default(),
        )?;
        let order = previous.map(|p| (p / rec.relative()).log2());
        println!(
            "n = {n:>3}: lhs = {:+.8e}, rhs = {:+.8e}, relative {:.3e}, order {}",
            rec.lhs,
            rec.rhs,
            rec.relative(),
            order.map_or("-".into(), |o| format!("{o:.2}"))
        );
        previous = Some(rec.relative());
    }
    Ok(())
}
