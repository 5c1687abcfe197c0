//! Smallest-eigenvalue and gap-probability distributions of real Wishart
//! (chiral GOE) matrices with even rectangularity.

pub mod cli;
pub mod error;
pub mod finite_n;
pub mod hard_edge;
pub mod quad;
pub mod scaled;
pub mod montecarlo;
pub mod pfaffian;
pub mod skewpoly;
pub mod specfun;

pub use error::{Error, Result};
pub use scaled::ScaledValue;
