use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathgen::{ModelParams, CHUNK_SIZE};
use crate::rng::{domain_seed, path_stream};
use crate::score_models::{ScoreModel, ScoreVariant};
use crate::special::gamma;

/// Seed domain of the reference ensemble, kept apart from the main paths.
const ORACLE_DOMAIN: u64 = 0x6f72_6163_6c65;

/// Uniform grid with exact cell integrals of the kernel `(t−s)^{α−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraGrid {
    pub steps: usize,
    pub dt: f64,
    pub alpha: f64,
    /// `w_i = ((iΔ)^α − ((i−1)Δ)^α)/α` at index `i − 1`.
    cells: Vec<f64>,
}

impl VolterraGrid {
    pub fn new(alpha: f64, steps: usize, horizon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::parameter("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if steps < 100 {
            return Err(Error::parameter("steps", format!("need at least 100 steps, got {steps}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::parameter("horizon", format!("must be positive, got {horizon}")));
        }
        let dt = horizon / steps as f64;
        let scale = dt.powf(alpha) / alpha;
        let cells = (1..=steps)
            .map(|i| {
                // i^α − (i−1)^α = i^α (1 − (1 − 1/i)^α), stable for large i
                let x = i as f64;
                -scale * x.powf(alpha) * (alpha * (-1.0 / x).ln_1p()).exp_m1()
            })
            .collect();
        Ok(Self { steps, dt, alpha, cells })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> f64 {
        self.cells[i - 1]
    }
}

/// Coefficient in front of the stochastic integral, `γ κ μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionConvention {
    /// `γ² = Var g(ε)`, i.e. `ρ² + ζ²(1 − 2/π)` for the quasi-score.
    #[default]
    Analytic,
    /// `γ = √(ρ² + ζ²)`, the nominal coefficient.
    Stated,
}

/// Correlation between the price and volatility Brownian motions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationConvention {
    /// `Cov(B, W) = ρ t`.
    #[default]
    Rho,
    /// `ρ / γ`, the correlation of `ε` with the normalized score.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct OracleOptions {
    pub diffusion: DiffusionConvention,
    pub correlation: CorrelationConvention,
}

/// Diffusion factor `γ` and price/volatility correlation under `options`.
pub fn noise_structure(model: &ScoreModel, options: OracleOptions) -> (f64, f64) {
    let gamma = match (options.diffusion, model.variant()) {
        (DiffusionConvention::Analytic, _) => model.score_variance().sqrt(),
        (DiffusionConvention::Stated, ScoreVariant::Qsd { rho, zeta }) => rho.hypot(zeta),
        (DiffusionConvention::Stated, ScoreVariant::Ged { nu }) => nu.sqrt(),
    };
    let rho = match model.variant() {
        ScoreVariant::Qsd { rho, .. } => rho,
        // The GED score is uncorrelated with ε.
        ScoreVariant::Ged { .. } => 0.0,
    };
    let corr = match options.correlation {
        CorrelationConvention::Rho => rho,
        CorrelationConvention::Normalized if gamma > 0.0 => rho / gamma,
        CorrelationConvention::Normalized => 0.0,
    };
    (gamma, corr.clamp(-1.0, 1.0))
}

/// Left-point Volterra–Euler discretization of
///
/// ```text
/// Λ_t = θξ + (1/Γ(α)) ∫₀ᵗ (t−s)^{α−1} [κ(θ − Λ_s) ds + γκμ dW_s],
/// X_t = X_0 − ½ ∫₀ᵗ e^{2Λ_s} ds + ∫₀ᵗ e^{Λ_s} dB_s.
/// ```
///
/// Returns `(Λ̂, X̂)` on the grid `t_k = kΔ`, `k = 0..=steps`.
pub fn volterra_euler<R: Rng + ?Sized>(
    params: &ModelParams,
    model: &ScoreModel,
    grid: &VolterraGrid,
    options: OracleOptions,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let (gamma_factor, corr) = noise_structure(model, options);
    let diffusion = gamma_factor * params.kappa * params.mu;
    let ortho = (1.0 - corr * corr).sqrt();
    let inv_gamma = 1.0 / gamma(grid.alpha);
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let n = grid.steps;
    let start = params.theta * params.xi;

    let mut log_vol = vec![0.0; n + 1];
    let mut log_price = vec![0.0; n + 1];
    // u_j = κ(θ − Λ_j) + γκμ ΔW_j / Δ, the integrand on cell j
    let mut u = vec![0.0; n];
    log_vol[0] = start;
    log_price[0] = params.x0;
    for k in 0..n {
        let dw = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        let dz = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        u[k] = params.kappa * (params.theta - log_vol[k]) + diffusion * dw / dt;
        let vol = log_vol[k].exp();
        log_price[k + 1] = log_price[k] - 0.5 * vol * vol * dt + vol * (corr * dw + ortho * dz);
        let conv: f64 = grid.cells[..=k].iter().zip(u[..=k].iter().rev()).map(|(w, x)| w * x).sum();
        log_vol[k + 1] = start + inv_gamma * conv;
    }
    (log_vol, log_price)
}

/// Applies `f` to the log-volatility of `m` reference paths, in path order.
/// Streams come from a seed domain separate from the discrete model's.
pub fn map_oracle<T, F>(
    params: &ModelParams,
    model: &ScoreModel,
    grid: &VolterraGrid,
    options: OracleOptions,
    m: usize,
    master_seed: u64,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    let seed = domain_seed(master_seed, ORACLE_DOMAIN);
    let chunks = m.div_ceil(CHUNK_SIZE);
    let nested: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK_SIZE;
            let hi = (lo + CHUNK_SIZE).min(m);
            (lo..hi)
                .map(|i| {
                    let mut rng = path_stream(seed, i as u64);
                    let (log_vol, _) = volterra_euler(params, model, grid, options, &mut rng);
                    f(&log_vol)
                })
                .collect()
        })
        .collect();
    nested.into_iter().flatten().collect()
}

/// `E[Λ_t]` of the limit; the mean solves a linear fractional relaxation,
/// `θ + θ(ξ − 1) E_{α,1}(−κ t^α)`.
pub fn limit_mean(params: &ModelParams, t: f64) -> Result<f64> {
    let e = crate::ml_kernel::mittag_leffler(params.alpha, 1.0, -params.kappa * t.powf(params.alpha))?;
    Ok(params.theta + params.theta * (params.xi - 1.0) * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;

    fn quiet() -> ScoreModel {
        ScoreModel::qsd(0.0, 0.0).unwrap()
    }

    #[test]
    fn cells_telescope() {
        for (alpha, steps, horizon) in [(0.62, 2000, 1.0), (0.55, 100, 5.0), (0.9, 12345, 0.3)] {
            let g = VolterraGrid::new(alpha, steps, horizon).unwrap();
            let sum: f64 = g.cells().iter().sum();
            let want = (steps as f64 * g.dt).powf(alpha) / alpha;
            assert!((sum - want).abs() < 1e-12, "{sum} vs {want}");
            assert!(g.cells().windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        }
    }

    #[test]
    fn starts_at_initial_level() {
        let p = ModelParams::reference();
        let g = VolterraGrid::new(p.alpha, 100, 1.0).unwrap();
        let model = ScoreModel::qsd(p.rho, p.zeta).unwrap();
        let (lv, lp) = volterra_euler(&p, &model, &g, OracleOptions::default(), &mut path_stream(1, 0));
        assert!((lv[0] - p.lambda0).abs() < 1e-15);
        assert_eq!(lp[0], p.x0);
    }

    #[test]
    fn noise_free_relaxation_converges_to_exact_mean() {
        let p = ModelParams::reference();
        let at_one = |steps| {
            let g = VolterraGrid::new(p.alpha, steps, 1.0).unwrap();
            let (lv, _) = volterra_euler(&p, &quiet(), &g, OracleOptions::default(), &mut path_stream(0, 0));
            lv[steps]
        };
        let (coarse, fine) = (at_one(1000), at_one(2000));
        let exact = limit_mean(&p, 1.0).unwrap();
        assert!(((coarse - fine) / fine).abs() < 0.01);
        assert!((fine - exact).abs() < (coarse - exact).abs());
        assert!(((fine - exact) / exact).abs() < 0.005, "{fine} vs {exact}");
    }

    #[test]
    fn unit_order_is_ornstein_uhlenbeck_euler() {
        let p = ModelParams { alpha: 1.0, xi: 1.0, ..ModelParams::reference() };
        let model = ScoreModel::qsd(p.rho, p.zeta).unwrap();
        let g = VolterraGrid::new(1.0, 500, 1.0).unwrap();
        let (lv, _) = volterra_euler(&p, &model, &g, OracleOptions::default(), &mut path_stream(4, 2));
        let (gf, _) = noise_structure(&model, OracleOptions::default());
        let mut rng = path_stream(4, 2);
        let mut x = p.theta;
        for k in 0..500 {
            let dw = g.dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let _dz: f64 = rng.sample(StandardNormal);
            x += p.kappa * (p.theta - x) * g.dt + gf * p.kappa * p.mu * dw;
            assert!((lv[k + 1] - x).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn conventions() {
        let model = ScoreModel::qsd(-0.6, 0.8).unwrap();
        let (g, r) = noise_structure(&model, OracleOptions::default());
        assert!((g * g - model.score_variance()).abs() < 1e-15);
        assert_eq!(r, -0.6);
        let stated = OracleOptions { diffusion: DiffusionConvention::Stated, correlation: CorrelationConvention::Normalized };
        let (g, r) = noise_structure(&model, stated);
        assert!((g - 1.0).abs() < 1e-15);
        assert!((r + 0.6).abs() < 1e-15);
    }
}
