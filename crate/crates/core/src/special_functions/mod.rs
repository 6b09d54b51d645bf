//! Gamma-family special functions and endpoint-singular quadrature.

mod gamma;
mod quadrature;

pub use gamma::{
    gamma, ln_gamma, lower_incomplete_gamma, upper_incomplete_gamma, upper_incomplete_gamma_scaled,
};
pub use quadrature::{integrate_singular, integrate_to_infinity, QuadratureSpec};
