//! Reference simulation of the rough limit, roughness estimation and
//! marginal comparison against the discrete model.

mod hurst;
mod marginals;
mod volterra;

pub use hurst::{hurst_by_moment, hurst_estimate, MIN_HURST_PATHS};
pub use marginals::{
    compare_marginals, grid_index, kolmogorov_survival, ks_statistic, MarginalReport, MarginalRow, MarginalSamples,
    MIN_COMPARE_PATHS,
};
pub use volterra::{
    limit_mean, map_oracle, noise_structure, volterra_euler, CorrelationConvention, DiffusionConvention,
    OracleOptions, VolterraGrid,
};
