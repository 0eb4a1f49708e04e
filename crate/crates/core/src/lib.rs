//! Retarded and advanced solutions of the scalar wave equation and of
//! Maxwell's equations in Lorenz gauge, with numerical checks of their
//! boundary conditions at infinity.
//!
//! Conventions: Gaussian units, `c = 1`, metric `diag(+1, −1, −1, −1)`, and a
//! comma denotes a partial derivative on a covariant index.

pub mod asymptotics;
pub mod error;
pub mod minkowski;
pub mod quadrature;
pub mod runner;
pub mod scenario;
pub mod solver;
pub mod sources;
pub mod stress;

pub use error::{Error, Result};
pub use minkowski::{CovTensor, Covector, Event, NullDirection, Orientation, Vec3, Vector};
