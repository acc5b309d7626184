pub mod asymptotics;
pub mod error;
pub mod lab;
pub mod radial;
pub mod solver;
pub mod torus;

pub use error::{Error, Result};
