//! Innovation laws and the score terms that drive the volatility recursion.

use std::f64::consts::FRAC_2_PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `E|ε| = √(2/π)` for a standard normal ε.
pub const MEAN_ABS_NORMAL: f64 = 0.797_884_560_802_865_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScoreVariant {
    /// GED(ν) innovations with their exact score.
    Ged { nu: f64 },
    /// Standard normal innovations fed through the asymmetric quasi-score
    /// `ρε + ζ(|ε| − √(2/π))`.
    Qsd { rho: f64, zeta: f64 },
}

#[derive(Debug, Clone)]
pub struct ScoreModel {
    variant: ScoreVariant,
    score_variance: f64,
    gamma: Option<Gamma<f64>>,
}

impl ScoreModel {
    pub fn ged(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::parameter("nu", format!("must be positive, got {nu}")));
        }
        let gamma = Gamma::new(1.0 / nu, 1.0).map_err(|e| Error::parameter("nu", e.to_string()))?;
        Ok(Self {
            variant: ScoreVariant::Ged { nu },
            score_variance: nu,
            gamma: Some(gamma),
        })
    }

    /// `ρ = ζ = 0` is allowed and gives a noise-free recursion.
    pub fn qsd(rho: f64, zeta: f64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::parameter("rho", format!("must be finite, got {rho}")));
        }
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::parameter("zeta", format!("must be non-negative, got {zeta}")));
        }
        Ok(Self {
            variant: ScoreVariant::Qsd { rho, zeta },
            score_variance: rho * rho + zeta * zeta * (1.0 - FRAC_2_PI),
            gamma: None,
        })
    }

    pub fn from_variant(variant: ScoreVariant) -> Result<Self> {
        match variant {
            ScoreVariant::Ged { nu } => Self::ged(nu),
            ScoreVariant::Qsd { rho, zeta } => Self::qsd(rho, zeta),
        }
    }

    pub fn variant(&self) -> ScoreVariant {
        self.variant
    }

    /// Second moment of the score term under the innovation law.
    pub fn score_variance(&self) -> f64 {
        self.score_variance
    }

    /// Score term `g(ε)` entering the recursion.
    #[inline]
    pub fn innovation(&self, eps: f64) -> f64 {
        match self.variant {
            ScoreVariant::Ged { nu } => ged_score(eps, nu),
            ScoreVariant::Qsd { rho, zeta } => qsd_innovation(eps, rho, zeta),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match (self.variant, &self.gamma) {
            (ScoreVariant::Ged { nu }, Some(gamma)) => {
                let g: f64 = gamma.sample(rng);
                let magnitude = (2.0 * g).powf(1.0 / nu);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            _ => StandardNormal.sample(rng),
        }
    }
}

/// GED score `(ν/2)|ε|^ν − 1`.
#[inline]
pub fn ged_score(eps: f64, nu: f64) -> f64 {
    0.5 * nu * eps.abs().powf(nu) - 1.0
}

/// Quasi-score innovation `ρε + ζ(|ε| − √(2/π))`.
#[inline]
pub fn qsd_innovation(eps: f64, rho: f64, zeta: f64) -> f64 {
    rho * eps + zeta * (eps.abs() - MEAN_ABS_NORMAL)
}

pub fn sample_innovation<R: Rng + ?Sized>(model: &ScoreModel, rng: &mut R) -> f64 {
    model.sample(rng)
}

/// `E|X|^p` for `X ~ GED(ν)`: `2^{p/ν} Γ((p+1)/ν) / Γ(1/ν)`.
pub fn ged_abs_moment(nu: f64, p: f64) -> f64 {
    use crate::special::ln_gamma;
    ((p / nu) * 2f64.ln() + ln_gamma((p + 1.0) / nu) - ln_gamma(1.0 / nu)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;
    use std::f64::consts::PI;

    fn draws(model: &ScoreModel, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = path_stream(seed, 0);
        (0..n).map(|_| model.sample(&mut rng)).collect()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn constant_matches_closed_form() {
        assert!((MEAN_ABS_NORMAL - (2.0 / PI).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn score_examples() {
        assert_eq!(ged_score(1.0, 2.0), 0.0);
        assert_eq!(ged_score(0.0, 1.3), -1.0);
        assert!((qsd_innovation(0.0, -0.681, 0.5) + 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(qsd_innovation(1.7, 0.0, 0.0), 0.0);
    }

    #[test]
    fn score_variances() {
        assert_eq!(ScoreModel::ged(1.5).unwrap().score_variance(), 1.5);
        let q = ScoreModel::qsd(-0.681, 0.681).unwrap();
        let want = 0.681f64.powi(2) * (2.0 - 2.0 / PI);
        assert!((q.score_variance() - want).abs() < 1e-15);
        assert!(ScoreModel::ged(0.0).is_err());
        assert!(ScoreModel::qsd(0.1, -1.0).is_err());
    }

    #[test]
    fn ged_score_is_centered_with_variance_nu() {
        let nu = 1.5;
        let model = ScoreModel::ged(nu).unwrap();
        let n = 1_000_000;
        let s: Vec<f64> = draws(&model, n, 11).into_iter().map(|e| ged_score(e, nu)).collect();
        let m = mean(&s);
        assert!(m.abs() < 5.0 * (nu / n as f64).sqrt(), "mean {m}");
        let second = s.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((second / nu - 1.0).abs() < 0.02, "second moment {second}");
    }

    #[test]
    fn ged_two_is_standard_normal_in_variance() {
        let v = draws(&ScoreModel::ged(2.0).unwrap(), 1_000_000, 5);
        let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn ged_even_moments_and_symmetry() {
        for nu in [1.0, 1.5, 3.0] {
            let v = draws(&ScoreModel::ged(nu).unwrap(), 1_000_000, 9);
            for p in [2, 4] {
                let m = v.iter().map(|x| x.powi(p)).sum::<f64>() / v.len() as f64;
                let want = ged_abs_moment(nu, p as f64);
                assert!((m / want - 1.0).abs() < 0.03, "ν={nu} p={p}: {m} vs {want}");
            }
            let m2 = ged_abs_moment(nu, 2.0);
            let skew = v.iter().map(|x| x.powi(3)).sum::<f64>() / v.len() as f64 / m2.powf(1.5);
            assert!(skew.abs() < 0.02, "ν={nu} skewness {skew}");
        }
    }

    #[test]
    fn qsd_innovation_covariance_with_eps_is_rho() {
        let (rho, zeta) = (-0.681, 0.5);
        let model = ScoreModel::qsd(rho, zeta).unwrap();
        let eps = draws(&model, 1_000_000, 3);
        let g: Vec<f64> = eps.iter().map(|&e| model.innovation(e)).collect();
        let mg = mean(&g);
        assert!(mg.abs() < 5.0 * (model.score_variance() / g.len() as f64).sqrt());
        let cov = eps.iter().zip(&g).map(|(e, x)| e * x).sum::<f64>() / g.len() as f64;
        assert!((cov - rho).abs() < 0.005, "{cov}");
    }
}
