//! Special functions needed by the finite-N and hard-edge formulas.
//!
//! Everything here is a pure function of its arguments. Quantities that can
//! leave the `f64` range (Tricomi U at large order, monic Laguerre values,
//! modified Bessel I at large argument) are returned as [`ScaledValue`].
//!
//! [`ScaledValue`]: crate::scaled::ScaledValue

mod bessel;
mod gamma;
mod laguerre;
mod tricomi;

pub use bessel::{
    bessel_i, bessel_i_over_power, bessel_j, bessel_j_signed, bessel_k_half, integral_bessel_j,
};
pub use gamma::{gamma, ln_gamma};
pub use laguerre::{laguerre_monic, LaguerreTable};
pub use tricomi::{tricomi_u, tricomi_u_deriv, TricomiArgs};
