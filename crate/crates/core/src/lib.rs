//! Ground states of the Kirchhoff-type equation
//!
//! ```text
//! −(a + b‖∇u‖²) Δu + V(x) u = f(u)   in ℝ³
//! ```
//!
//! computed as minimizers of the energy over the Pohozaev manifold, with a
//! scalar-field shooting oracle for constant potentials.

pub mod audit;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod interp;
pub mod problem;
pub mod projection;
pub mod scans;
pub mod shooting;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use functionals::{
    energy, energy_lambda, energy_lambda_limit, energy_limit, fibering_derivative, fibering_value,
    iip_gap, pohozaev, pohozaev_lambda, pohozaev_lambda_limit, pohozaev_limit, Fibering,
    FiberingScan, Functional, FunctionalValue,
};
pub use grid::{
    grad_norm_sq, hardy_lower_bound, l2_norm_sq, rescale, GridScheme, RadialFunction, RadialGrid,
};
pub use problem::{Nonlinearity, Potential, ProblemSpec};
