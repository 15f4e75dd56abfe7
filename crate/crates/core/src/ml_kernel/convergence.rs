use crate::error::{Error, Result};
use crate::ml_kernel::{ml_cdf, mittag_leffler, phi_weights, psi_weights};
use crate::special::{integrate, CompensatedSum};

/// Evaluation grid for the distribution-function comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelGrid {
    /// Number of uniformly spaced points `j / points`, `j = 1..=points`.
    pub points: usize,
}

impl KernelGrid {
    /// `per_cell` points inside every lattice cell of width `1/n`.
    pub fn per_cell(n: usize, per_cell: usize) -> Self {
        Self { points: n * per_cell }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceError {
    pub n: usize,
    /// `max |F_n − F|` over the grid, `F = 1 − E_{α,1}(−κ x^α)`.
    pub sup_cdf_error: f64,
    /// `∫₀¹ (ρ_n − f)²` (squared, not square-rooted).
    pub l2_error: f64,
}

/// Distance between the rescaled renewal weights and the limiting
/// Mittag-Leffler law on `(0, 1]`.
///
/// With `a = 1 − κ n^{−α}`, the discrete law is
/// `F_n(x) = Σ_{i ≤ ⌊nx⌋} (1−a) ψ_i / a` with piecewise constant density
/// `ρ_n(x) = n (1−a) ψ_{⌊nx⌋} / a` (zero on the first cell).
pub fn kernel_convergence_error(alpha: f64, kappa: f64, n: usize, grid: KernelGrid) -> Result<ConvergenceError> {
    if n < 10 {
        return Err(Error::parameter("n", format!("need n ≥ 10, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::parameter("kappa", format!("must be positive, got {kappa}")));
    }
    if grid.points == 0 {
        return Err(Error::parameter("grid", "needs at least one point"));
    }
    let shrink = kappa * (n as f64).powf(-alpha);
    if shrink >= 1.0 {
        return Err(Error::parameter("kappa", format!("κ n^{{−α}} = {shrink} leaves no stable a_n")));
    }
    let a = 1.0 - shrink;
    let weights = phi_weights(alpha, n)?;
    let psi = psi_weights(&weights, a, n)?;
    let scale = (1.0 - a) / a;

    // cumulative[i] = F_n(i/n)
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = CompensatedSum::new();
    cumulative.push(0.0);
    for &p in psi.as_slice() {
        acc.add(scale * p);
        cumulative.push(acc.value());
    }

    let mut sup = 0.0f64;
    for j in 1..=grid.points {
        let x = j as f64 / grid.points as f64;
        let cell = j * n / grid.points;
        let err = (cumulative[cell] - ml_cdf(alpha, kappa, x)?).abs();
        sup = sup.max(err);
    }

    let h = 1.0 / n as f64;
    let limit_cdf = (0..=n)
        .map(|i| ml_cdf(alpha, kappa, i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let density_sq = |x: f64| {
        let xa = x.powf(alpha);
        let f = kappa * xa / x * mittag_leffler(alpha, alpha, -kappa * xa).unwrap_or(f64::NAN);
        f * f
    };
    let mut l2 = CompensatedSum::new();
    // First cell: ρ_n = 0 and f² ~ x^{2α−2}; x = h u^q with q = 1/(2α−1)
    // turns ∫₀ʰ f² into a smooth integral over u ∈ [0, 1].
    let q = 1.0 / (2.0 * alpha - 1.0);
    let first = integrate(
        |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let x = h * u.powf(q);
            let ml = mittag_leffler(alpha, alpha, -kappa * x.powf(alpha)).unwrap_or(f64::NAN);
            q * h.powf(2.0 * alpha - 1.0) * kappa * kappa * ml * ml
        },
        0.0,
        1.0,
        1e-18,
        1e-12,
    );
    l2.add(first);
    for i in 1..n {
        let rho = n as f64 * scale * psi.lag(i);
        let mass = limit_cdf[i + 1] - limit_cdf[i];
        let f_sq = integrate(density_sq, i as f64 * h, (i + 1) as f64 * h, 1e-18, 1e-12);
        l2.add(rho * rho * h - 2.0 * rho * mass + f_sq);
    }
    let l2_error = l2.value();
    if !(l2_error.is_finite() && sup.is_finite()) {
        return Err(Error::Numerical("non-finite kernel convergence error".into()));
    }
    Ok(ConvergenceError {
        n,
        sup_cdf_error: sup,
        l2_error: l2_error.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_n() {
        assert!(kernel_convergence_error(0.62, 0.1, 5, KernelGrid { points: 10 }).is_err());
    }

    #[test]
    fn errors_are_small_and_finite() {
        let e = kernel_convergence_error(0.62, 0.1, 100, KernelGrid::per_cell(100, 8)).unwrap();
        assert!(e.sup_cdf_error > 0.0 && e.sup_cdf_error < 0.01, "{e:?}");
        assert!(e.l2_error > 0.0 && e.l2_error < 0.05, "{e:?}");
    }
}
