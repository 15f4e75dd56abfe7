use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ml_kernel::phi_weights;
use crate::pathgen::convolution::FftKernel;

/// Parameters of the continuous-time limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    /// Mean-reversion speed κ.
    pub kappa: f64,
    /// Long-run log-volatility level θ.
    pub theta: f64,
    /// Noise scale μ.
    pub mu: f64,
    pub rho: f64,
    pub zeta: f64,
    /// Baseline multiplier, `Λ_0 = θ ξ`.
    pub xi: f64,
    pub x0: f64,
    pub lambda0: f64,
}

impl ModelParams {
    /// The reference configuration: `X_0 = ln 100`, `Λ_0 = ln √0.0392`,
    /// `θ = ln √0.3156`, `ρ = −0.681`, `κ = 0.1`, `α = 0.62`, with
    /// `ζ = |ρ|` and `μ` chosen so that `√(ρ²+ζ²) μ = 0.331`.
    pub fn reference() -> Self {
        let rho = -0.681;
        Self::from_levels(0.62, 0.1, 0.3156f64.sqrt().ln(), 0.0392f64.sqrt().ln(), rho, rho.abs(), 0.331, 100f64.ln())
            .expect("reference parameters are admissible")
    }

    /// Builds parameters from levels, taking `ξ = Λ_0/θ` and
    /// `μ = vol_of_vol / √(ρ²+ζ²)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_levels(
        alpha: f64,
        kappa: f64,
        theta: f64,
        lambda0: f64,
        rho: f64,
        zeta: f64,
        vol_of_vol: f64,
        x0: f64,
    ) -> Result<Self> {
        if theta == 0.0 {
            return Err(Error::parameter("theta", "must be non-zero so that ξ = Λ₀/θ is defined"));
        }
        let norm = rho.hypot(zeta);
        if !(norm > 0.0) {
            return Err(Error::parameter("zeta", "ρ² + ζ² must be positive to split the noise product"));
        }
        let p = Self {
            alpha,
            kappa,
            theta,
            mu: vol_of_vol / norm,
            rho,
            zeta,
            xi: lambda0 / theta,
            x0,
            lambda0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("mu", self.mu),
            ("rho", self.rho),
            ("zeta", self.zeta),
            ("xi", self.xi),
            ("x0", self.x0),
            ("lambda0", self.lambda0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::parameter(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::parameter("alpha", format!("must lie in (1/2, 1), got {}", self.alpha)));
        }
        if self.kappa <= 0.0 {
            return Err(Error::parameter("kappa", format!("must be positive, got {}", self.kappa)));
        }
        if self.theta == 0.0 {
            return Err(Error::parameter("theta", "must be non-zero"));
        }
        if self.mu <= 0.0 {
            return Err(Error::parameter("mu", format!("must be positive, got {}", self.mu)));
        }
        if self.zeta < 0.0 {
            return Err(Error::parameter("zeta", format!("must be non-negative, got {}", self.zeta)));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Per-resolution quantities of the discrete recursion.
#[derive(Clone)]
pub struct DiscreteParams {
    pub n: usize,
    pub horizon: f64,
    /// `nT`, the number of simulated steps.
    pub steps: usize,
    pub a_n: f64,
    pub omega_n: f64,
    /// `c_n = (1−a_n) θ / ω_n = (1−a_n) μ √n`, so that `Λ = c_n λ`.
    pub c_n: f64,
    pub xi: f64,
    pub x0: f64,
    phi_n: Arc<[f64]>,
    baseline: Arc<[f64]>,
    fft: Arc<OnceLock<FftKernel>>,
}

impl std::fmt::Debug for DiscreteParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteParams")
            .field("n", &self.n)
            .field("horizon", &self.horizon)
            .field("steps", &self.steps)
            .field("a_n", &self.a_n)
            .field("omega_n", &self.omega_n)
            .field("c_n", &self.c_n)
            .field("xi", &self.xi)
            .finish_non_exhaustive()
    }
}

impl DiscreteParams {
    /// Scaled lag weights `a_n φ_i`, lag `i` at index `i − 1`.
    pub fn phi_n(&self) -> &[f64] {
        &self.phi_n
    }

    /// `ω_t^{(n)}` at index `t` for `t = 1..=steps`; index 0 is unused.
    pub fn baseline(&self) -> &[f64] {
        &self.baseline
    }

    pub(crate) fn fft_kernel(&self) -> &FftKernel {
        self.fft.get_or_init(|| FftKernel::new(&self.phi_n))
    }
}

/// Discretizes the model at `n` steps per unit time over `[0, horizon]`.
pub fn discretize(params: &ModelParams, n: usize, horizon: f64) -> Result<DiscreteParams> {
    params.validate()?;
    if n < 2 {
        return Err(Error::parameter("n", format!("need n ≥ 2, got {n}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::parameter("horizon", format!("must be positive, got {horizon}")));
    }
    let steps_real = n as f64 * horizon;
    let steps = steps_real.round();
    if (steps_real - steps).abs() > 1e-9 * steps_real.max(1.0) || steps < 1.0 {
        return Err(Error::parameter("horizon", format!("n·T = {steps_real} must be a positive integer")));
    }
    let steps = steps as usize;
    let shrink = params.kappa * (n as f64).powf(-params.alpha);
    if shrink >= 1.0 {
        return Err(Error::parameter(
            "kappa",
            format!("κ n^(−α) = {shrink} ≥ 1 puts a_n outside (0, 1)"),
        ));
    }
    let a_n = 1.0 - shrink;
    let sqrt_n = (n as f64).sqrt();
    let omega_n = params.theta / (params.mu * sqrt_n);
    let c_n = shrink * params.mu * sqrt_n;

    let weights = phi_weights(params.alpha, steps)?;
    let phi_n: Arc<[f64]> = weights.scaled(a_n).into();

    let xi = params.xi;
    let mut baseline = vec![0.0; steps + 1];
    for (t, b) in baseline.iter_mut().enumerate().skip(1) {
        // Σ_{s=1}^{t−1} a_n φ_s in closed form
        let partial = a_n * weights.partial_sum(t - 1);
        *b = omega_n + xi * omega_n * ((1.0 - partial) / shrink - partial);
    }

    Ok(DiscreteParams {
        n,
        horizon,
        steps,
        a_n,
        omega_n,
        c_n,
        xi,
        x0: params.x0,
        phi_n,
        baseline: baseline.into(),
        fft: Arc::new(OnceLock::new()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let p = ModelParams::reference();
        // ln(0.0392)/ln(0.3156) and 1 − 0.1·500^(−0.62), 30-digit references
        assert!((p.xi - 2.808_580_225_804_948).abs() < 1e-13, "{}", p.xi);
        assert!((p.theta * p.xi - p.lambda0).abs() < 1e-15);
        assert!((p.mu * p.rho.hypot(p.zeta) - 0.331).abs() < 1e-15);
        let dp = discretize(&p, 500, 1.0).unwrap();
        assert!((dp.a_n - 0.997_878_521_683_091_3).abs() < 1e-15, "{}", dp.a_n);
        assert_eq!(dp.steps, 500);
        assert!(dp.c_n > 0.0);
    }

    #[test]
    fn baseline_first_value_and_vanishing_xi() {
        let p = ModelParams::reference();
        let dp = discretize(&p, 200, 2.0).unwrap();
        let want = dp.omega_n * (1.0 + dp.xi / (1.0 - dp.a_n));
        assert!((dp.baseline()[1] - want).abs() < 1e-12 * want.abs());
        let flat = ModelParams { xi: 0.0, ..p };
        let dp = discretize(&flat, 200, 2.0).unwrap();
        assert!(dp.baseline()[1..].iter().all(|&b| b == dp.omega_n));
    }

    #[test]
    fn rejects_unstable_or_degenerate_inputs() {
        let p = ModelParams::reference();
        let strong = ModelParams { kappa: 20.0, ..p };
        assert!(matches!(discretize(&strong, 100, 1.0), Err(Error::Parameter { name: "kappa", .. })));
        let flat = ModelParams { theta: 0.0, ..p };
        assert!(discretize(&flat, 100, 1.0).is_err());
        assert!(ModelParams::from_levels(0.62, 0.1, 0.0, -1.0, 0.1, 0.1, 0.3, 0.0).is_err());
        assert!(discretize(&p, 100, 1.005).is_err());
        assert!(discretize(&p, 1, 1.0).is_err());
    }
}
