//! Shared numerical kernels.

mod optimize;
mod quadrature;
mod stats;

pub use optimize::{bisect, central_diff, golden_max, simpson, try_bisect};
pub use quadrature::{gauss_hermite, gauss_legendre, QuadratureRule, RuleKind, MAX_NODES};
pub use stats::{chi2_p_value, chi2_statistic, ks_p_value, ks_statistic, normal_cdf, Histogram};
