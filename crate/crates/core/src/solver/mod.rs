//! Newton–Krylov solver and ε-continuation for the coupled vortex system.

mod continuation;
pub mod gmres;
mod newton;
mod params;
mod system;

pub use continuation::{
    continuation, continuation_traced, integral_identity_check, seed_state, ConcentratingSeed,
    ContinuationRun, IntegralCheck, Seed, StepFailure,
};
pub use newton::{
    laplacian_noise, negativity, newton_solve, newton_solve_traced, BranchTag, Negativity,
    NewtonFailure, NewtonOptions, NewtonRecord, SolutionPair, DEFAULT_TOL, NEGATIVITY_ULPS,
};
pub use params::{geometric_schedule, schedule_from_eps, CouplingParams, SigmaRule};
pub use system::{residual, FieldPair, GudnasonSystem};
