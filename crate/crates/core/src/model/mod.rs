//! GTSC parameters, Laplace exponents, Lévy tails and regime classification.

mod params;
mod regime;

pub(crate) use params::gamma_neg_rho;
pub use params::GtscParams;
pub use regime::{
    beta_constants, boundary_alpha, classify, cramer_root, m_star, Regime, RegimeReport,
    DEFAULT_BOUNDARY_TOL,
};
