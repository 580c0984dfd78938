//! Numerical library for the O'Hara knot energies E^(alpha), alpha in (2,3):
//! energy evaluation, the principal-value first variation, the Q/R
//! decomposition of the Euler-Lagrange operator, fractional Sobolev
//! machinery on R/Z, and a preconditioned gradient flow of
//! E^(alpha) + lambda * length.

pub(crate) mod cells;
pub mod curve;
pub mod decomposition;
pub mod energy;
pub mod error;
pub mod flow;
pub mod io;
pub mod quad;
pub mod sobolev;
pub mod spectral;
pub mod variation;

pub use error::{Error, Result};
