//! Discrete long-memory (quasi-)score-driven volatility and log-price paths.
//!
//! For `t = 1..=nT`, with `λ_0 = 0`,
//!
//! ```text
//! λ_t = ω_t + Σ_{i=1}^{t} a_n φ_i [λ_{t−i} + g(ε_{t−i})],   Λ_t = c_n λ_t,
//! X_t = X_{t−1} − e^{2Λ_t}/(2n) + e^{Λ_t} ε_t / √n
//! ```
//!
//! where `g` is the score term of the chosen [`ScoreModel`]. The GED
//! variant has no drift correction in `X`.

mod convolution;
mod params;

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{path_stream, PathRng};
use crate::score_models::{ScoreModel, ScoreVariant};

use convolution::{recurse, FftKernel, Workspace};
pub use params::{discretize, DiscreteParams, ModelParams};

/// Paths whose `|Λ_t|` exceeds this are flagged invalid.
pub const LOG_VOL_LIMIT: f64 = 50.0;

/// Paths simulated per parallel task; fixed so results never depend on
/// the worker count.
pub const CHUNK_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Naive,
    #[default]
    Fft,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::Fft => "fft",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Backend::Naive),
            "fft" => Ok(Backend::Fft),
            other => Err(Error::parameter("backend", format!("expected `fft` or `naive`, got `{other}`"))),
        }
    }
}

/// One trajectory on the grid `t = 0..=nT`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathBundle {
    pub lambda: Vec<f64>,
    /// `Λ_t = c_n λ_t`.
    pub log_vol: Vec<f64>,
    pub log_price: Vec<f64>,
    /// `ε_0..ε_{nT}`; `ε_t` enters the return at `t` and the score feeding `t+1`.
    pub innovations: Vec<f64>,
    pub stream: u64,
    /// False when `|Λ_t| > LOG_VOL_LIMIT` or a value is not finite.
    pub valid: bool,
}

impl PathBundle {
    fn with_steps(steps: usize) -> Self {
        Self {
            lambda: vec![0.0; steps + 1],
            log_vol: vec![0.0; steps + 1],
            log_price: vec![0.0; steps + 1],
            innovations: vec![0.0; steps + 1],
            stream: 0,
            valid: true,
        }
    }
}

/// Reusable single-path simulator; holds the scratch buffers.
pub struct PathSimulator<'a> {
    dp: &'a DiscreteParams,
    model: &'a ScoreModel,
    kernel: Option<&'a FftKernel>,
    ws: Workspace,
}

impl<'a> PathSimulator<'a> {
    pub fn new(dp: &'a DiscreteParams, model: &'a ScoreModel, backend: Backend) -> Self {
        let kernel = match backend {
            Backend::Naive => None,
            Backend::Fft => Some(dp.fft_kernel()),
        };
        Self {
            dp,
            model,
            kernel,
            ws: Workspace::new(dp.steps, kernel),
        }
    }

    pub fn simulate(&mut self, rng: &mut PathRng) -> PathBundle {
        let mut out = PathBundle::with_steps(self.dp.steps);
        self.simulate_into(rng, &mut out);
        out
    }

    /// Overwrites `out`, reusing its allocations.
    pub fn simulate_into(&mut self, rng: &mut PathRng, out: &mut PathBundle) {
        let steps = self.dp.steps;
        for v in [&mut out.lambda, &mut out.log_vol, &mut out.log_price, &mut out.innovations] {
            v.resize(steps + 1, 0.0);
        }
        let model = self.model;
        let eps = &mut out.innovations;
        recurse(
            self.dp.phi_n(),
            self.dp.baseline(),
            self.kernel,
            &mut self.ws,
            &mut out.lambda,
            |t, lambda_t| {
                let e = model.sample(rng);
                eps[t] = e;
                lambda_t + model.innovation(e)
            },
        );
        // ε_{nT} only drives the final return.
        out.innovations[steps] = model.sample(rng);
        out.valid = price_path(self.dp, model, out);
    }
}

/// Fills `log_vol` and `log_price`; returns path validity.
fn price_path(dp: &DiscreteParams, model: &ScoreModel, out: &mut PathBundle) -> bool {
    let drift = matches!(model.variant(), ScoreVariant::Qsd { .. });
    let inv_sqrt_n = 1.0 / (dp.n as f64).sqrt();
    let half_dt = 0.5 / dp.n as f64;
    let mut valid = true;
    out.log_vol[0] = 0.0;
    out.log_price[0] = dp.x0;
    let mut x = dp.x0;
    for t in 1..out.lambda.len() {
        let big = dp.c_n * out.lambda[t];
        out.log_vol[t] = big;
        if !(big.abs() <= LOG_VOL_LIMIT) {
            valid = false;
        }
        let vol = big.exp();
        if drift {
            x -= half_dt * vol * vol;
        }
        x += vol * out.innovations[t] * inv_sqrt_n;
        out.log_price[t] = x;
    }
    valid && x.is_finite()
}

/// Simulates path `stream` of the ensemble seeded by `master_seed`.
pub fn simulate_path(
    dp: &DiscreteParams,
    model: &ScoreModel,
    master_seed: u64,
    stream: u64,
    backend: Backend,
) -> PathBundle {
    let mut sim = PathSimulator::new(dp, model, backend);
    let mut rng = path_stream(master_seed, stream);
    let mut path = sim.simulate(&mut rng);
    path.stream = stream;
    path
}

/// Applies `f` to each of `m` paths in parallel and returns the results in
/// path order. Path `i` always uses stream `i`, and paths are grouped into
/// fixed chunks, so the output is independent of the worker count.
pub fn map_ensemble<T, F>(
    dp: &DiscreteParams,
    model: &ScoreModel,
    m: usize,
    master_seed: u64,
    backend: Backend,
    f: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&PathBundle) -> T + Sync,
{
    if backend == Backend::Fft {
        dp.fft_kernel();
    }
    let chunks = m.div_ceil(CHUNK_SIZE);
    let nested: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut sim = PathSimulator::new(dp, model, backend);
            let mut path = PathBundle::with_steps(dp.steps);
            let lo = c * CHUNK_SIZE;
            let hi = (lo + CHUNK_SIZE).min(m);
            (lo..hi)
                .map(|i| {
                    let mut rng = path_stream(master_seed, i as u64);
                    sim.simulate_into(&mut rng, &mut path);
                    path.stream = i as u64;
                    f(&path)
                })
                .collect()
        })
        .collect();
    nested.into_iter().flatten().collect()
}

/// Runs `f` on a dedicated pool of `threads` workers; `None` or `0` keeps
/// rayon's default size.
pub fn with_workers<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Materializes all `m` paths (memory `O(m·nT)`).
pub fn simulate_ensemble(
    dp: &DiscreteParams,
    model: &ScoreModel,
    m: usize,
    master_seed: u64,
    backend: Backend,
) -> Result<Vec<PathBundle>> {
    if m == 0 {
        return Err(Error::parameter("paths", "need at least one path"));
    }
    Ok(map_ensemble(dp, model, m, master_seed, backend, PathBundle::clone))
}

/// Runs the `λ` recursion on given score terms `g_0..g_{nT−1}`.
pub fn run_recursion(dp: &DiscreteParams, scores: &[f64], backend: Backend) -> Result<Vec<f64>> {
    if scores.len() != dp.steps {
        return Err(Error::parameter(
            "scores",
            format!("expected {} score terms, got {}", dp.steps, scores.len()),
        ));
    }
    let kernel = match backend {
        Backend::Naive => None,
        Backend::Fft => Some(dp.fft_kernel()),
    };
    let mut ws = Workspace::new(dp.steps, kernel);
    let mut lambda = vec![0.0; dp.steps + 1];
    recurse(dp.phi_n(), dp.baseline(), kernel, &mut ws, &mut lambda, |t, l| l + scores[t]);
    Ok(lambda)
}

/// Mean single-thread wall time per path in seconds over `paths` paths.
pub fn time_per_path(dp: &DiscreteParams, model: &ScoreModel, backend: Backend, paths: usize, seed: u64) -> f64 {
    let mut sim = PathSimulator::new(dp, model, backend);
    let mut out = PathBundle::with_steps(dp.steps);
    // One warm-up path so plan construction and page faults are excluded.
    sim.simulate_into(&mut path_stream(seed, u64::MAX), &mut out);
    let start = Instant::now();
    for i in 0..paths {
        sim.simulate_into(&mut path_stream(seed, i as u64), &mut out);
    }
    start.elapsed().as_secs_f64() / paths.max(1) as f64
}

/// Debug dump with columns `t, lambda, Lambda, X`.
pub fn write_path_csv<W: Write>(path: &PathBundle, n: usize, mut w: W) -> io::Result<()> {
    writeln!(w, "t,lambda,Lambda,X")?;
    for i in 0..path.lambda.len() {
        writeln!(
            w,
            "{},{:e},{:e},{:e}",
            i as f64 / n as f64,
            path.lambda[i],
            path.log_vol[i],
            path.log_price[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml_kernel::{phi_weights, psi_weights};

    fn reference(n: usize, horizon: f64) -> (DiscreteParams, ScoreModel) {
        let p = ModelParams::reference();
        (discretize(&p, n, horizon).unwrap(), ScoreModel::qsd(p.rho, p.zeta).unwrap())
    }

    #[test]
    fn noise_free_flat_baseline_matches_renewal_form() {
        // λ_t = ω_n (1 + Σ_{i=1}^{t−1} ψ_i) when all scores vanish and ξ = 0
        let p = ModelParams { xi: 0.0, ..ModelParams::reference() };
        let dp = discretize(&p, 256, 2.0).unwrap();
        let lambda = run_recursion(&dp, &vec![0.0; dp.steps], Backend::Naive).unwrap();
        let w = phi_weights(p.alpha, dp.steps).unwrap();
        let psi = psi_weights(&w, dp.a_n, dp.steps).unwrap();
        let mut cum = 0.0;
        for t in 1..=dp.steps {
            let want = dp.omega_n * (1.0 + cum);
            assert!((lambda[t] - want).abs() < 1e-10, "t = {t}");
            cum += psi.lag(t);
        }
    }

    #[test]
    fn noise_free_baseline_matches_moving_average() {
        // λ_t = Σ_{s=1}^{t} ω_s (δ_0 + ψ)_{t−s}
        let (dp, _) = reference(128, 4.0);
        let lambda = run_recursion(&dp, &vec![0.0; dp.steps], Backend::Fft).unwrap();
        let w = phi_weights(0.62, dp.steps).unwrap();
        let psi = psi_weights(&w, dp.a_n, dp.steps).unwrap();
        let omega = dp.baseline();
        for t in 1..=dp.steps {
            let mut want = omega[t];
            for s in 1..t {
                want += omega[s] * psi.lag(t - s);
            }
            assert!((lambda[t] - want).abs() < 1e-10 * want.abs().max(1.0), "t = {t}");
        }
    }

    #[test]
    fn backends_agree_on_simulated_paths() {
        let (dp, model) = reference(500, 2.0);
        let a = simulate_path(&dp, &model, 3, 17, Backend::Naive);
        let b = simulate_path(&dp, &model, 3, 17, Backend::Fft);
        assert_eq!(a.innovations, b.innovations);
        let diff = a.lambda.iter().zip(&b.lambda).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
        assert!(a.valid && b.valid);
    }

    #[test]
    fn bundle_layout() {
        let (dp, model) = reference(100, 1.0);
        let path = simulate_path(&dp, &model, 1, 0, Backend::Fft);
        assert_eq!(path.log_price.len(), 101);
        assert_eq!(path.log_price[0], dp.x0);
        assert_eq!(path.lambda[0], 0.0);
        for t in 0..=100 {
            assert_eq!(path.log_vol[t], dp.c_n * path.lambda[t]);
        }
    }

    #[test]
    fn ensemble_of_one_is_the_single_path() {
        let (dp, model) = reference(100, 1.0);
        let ens = simulate_ensemble(&dp, &model, 1, 99, Backend::Fft).unwrap();
        assert_eq!(ens[0], simulate_path(&dp, &model, 99, 0, Backend::Fft));
    }

    #[test]
    fn ensemble_independent_of_thread_count() {
        let (dp, model) = reference(200, 1.0);
        let run = |threads| {
            with_workers(Some(threads), || {
                map_ensemble(&dp, &model, 700, 5, Backend::Fft, |p| *p.log_price.last().unwrap())
            })
            .unwrap()
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(7));
    }

    #[test]
    fn extreme_volatility_is_flagged() {
        let p = ModelParams { mu: 2000.0, ..ModelParams::reference() };
        let dp = discretize(&p, 100, 1.0).unwrap();
        let model = ScoreModel::qsd(-5.0, 5.0).unwrap();
        let flagged = (0..20).any(|i| !simulate_path(&dp, &model, 1, i, Backend::Fft).valid);
        assert!(flagged);
    }

    #[test]
    fn ged_variant_has_no_drift() {
        let p = ModelParams::reference();
        let dp = discretize(&p, 100, 1.0).unwrap();
        let model = ScoreModel::ged(2.0).unwrap();
        let path = simulate_path(&dp, &model, 2, 0, Backend::Naive);
        let mut x = dp.x0;
        for t in 1..=dp.steps {
            x += path.log_vol[t].exp() * path.innovations[t] / 10.0;
            assert!((path.log_price[t] - x).abs() < 1e-12);
        }
    }
}
