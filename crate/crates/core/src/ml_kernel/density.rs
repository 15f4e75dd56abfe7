use crate::error::{Error, Result};
use crate::ml_kernel::mittag_leffler;

fn check_shape(alpha: f64, kappa: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("α must lie in (0, 1], got {alpha}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    Ok(())
}

/// Mittag-Leffler density `f(x) = κ x^{α−1} E_{α,α}(−κ x^α)` on `x > 0`.
///
/// The density has an integrable singularity at the origin,
/// `f(x) x^{1−α} → κ / Γ(α)`.
pub fn ml_density(alpha: f64, kappa: f64, x: f64) -> Result<f64> {
    check_shape(alpha, kappa)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("density is defined on x > 0, got {x}")));
    }
    let xa = x.powf(alpha);
    Ok(kappa * xa / x * mittag_leffler(alpha, alpha, -kappa * xa)?)
}

/// Distribution function `∫₀ˣ f = 1 − E_{α,1}(−κ x^α)`.
pub fn ml_cdf(alpha: f64, kappa: f64, x: f64) -> Result<f64> {
    check_shape(alpha, kappa)?;
    if x.is_nan() {
        return Err(Error::Domain("distribution function at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - mittag_leffler(alpha, 1.0, -kappa * x.powf(alpha))?)
}
