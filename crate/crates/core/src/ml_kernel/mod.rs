//! Power-law lag kernel, its renewal weights and the Mittag-Leffler limit.

mod convergence;
mod density;
mod mittag_leffler;
mod weights;

pub use convergence::{kernel_convergence_error, ConvergenceError, KernelGrid};
pub use density::{ml_cdf, ml_density};
pub use mittag_leffler::mittag_leffler;
pub use weights::{phi_weights, psi_weights, KernelWeights, PsiWeights};
