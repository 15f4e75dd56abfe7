//! Monte Carlo engine for long-memory (quasi-)score-driven volatility models.
//!
//! Long-memory score-driven recursions with power-law lag weights
//! `φ_i ~ K i^{-1-α}`, rescaled in the nearly unstable regime `a_n ↑ 1`,
//! approximate a rough Ornstein–Uhlenbeck log-volatility with Hurst index
//! `H = α − 1/2`. This crate simulates those recursions, prices
//! path-dependent options on the resulting asset paths, and ships the
//! numerical diagnostics used to check the approximation:
//!
//! - [`ml_kernel`]: lag weights, renewal weights, Mittag-Leffler kernel and
//!   the convergence of the renewal density to it.
//! - [`score_models`]: GED score and asymmetric quasi-score innovations.
//! - [`pathgen`]: the discrete volatility/price recursion with a naive and a
//!   blocked-FFT convolution backend.
//! - [`rough_ref`]: Volterra–Euler discretization of the limiting rough SDE,
//!   Hurst estimation and marginal comparison.
//! - [`pricer`]: European, Asian, Lookback and Barrier Monte Carlo prices.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod ml_kernel;
pub mod pathgen;
pub mod pricer;
pub mod rng;
pub mod rough_ref;
pub mod score_models;
pub mod special;

pub use error::{Error, Result};
