//! Deterministic infinite-width limits: GP kernel, NTK and the moments of
//! the limiting Jacobian spectrum.

mod gaussian;
mod moments;
mod nc;

pub use gaussian::{
    bivariate_gaussian_moment, gp_kernel_layers, gp_kernel_recursive, gp_kernel_via_trees, mixed_moments,
    ntk_limit, pair_expectation, Cov2, TREE_PAIR_CAP,
};
pub use moments::{fc_moments, fc_moments_float, fuss_catalan, mu_table, Field, MomentTable, MuTable};
pub use nc::{catalan, is_non_crossing, kreweras_dual, nc_enumerate, NcPartition};
