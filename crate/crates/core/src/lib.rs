//! Casimir-Polder potentials and environment-assisted transition rates of
//! atoms and molecules inside a circular cylindrical vacuum cavity cut into
//! bulk metal, together with the analytic and numerical machinery for
//! finding cavity radii that resonantly enhance them.

pub mod constants;
pub mod error;
pub mod green;
pub mod material;
pub mod mirror;
pub mod numerics;
pub mod observables;
pub mod particle;
pub mod resonance;
pub mod specfun;

pub use error::{Error, Result};
