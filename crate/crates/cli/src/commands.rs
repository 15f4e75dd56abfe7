//! Subcommand bodies. Each returns an [`Artifact`]; the caller adds the
//! header and writes it.

use std::io::Write;

use serde_json::json;

use roughvol::ml_kernel::{kernel_convergence_error, KernelGrid};
use roughvol::pathgen::{map_ensemble, time_per_path, Backend, PathBundle};
use roughvol::pricer::{price_table, table_specs};
use roughvol::rough_ref::{
    compare_marginals, grid_index, hurst_by_moment, map_oracle, MarginalSamples, VolterraGrid, MIN_COMPARE_PATHS,
    MIN_HURST_PATHS,
};
use roughvol::Error;

use crate::config::{PathSource, RunConfig};
use crate::output::Artifact;
use crate::Failure;

pub const DEFAULT_PRICE_PATHS: usize = 100_000;
pub const DEFAULT_SIMULATE_PATHS: usize = 1;
pub const DEFAULT_COMPARE_PATHS: usize = 20_000;
pub const DEFAULT_HURST_PATHS: usize = 100;

fn paths_or(config: &RunConfig, default: usize) -> usize {
    config.execution.paths.unwrap_or(default)
}

pub fn price(config: &RunConfig) -> Result<Artifact, Failure> {
    let p = &config.pricing;
    let specs = table_specs(&p.strikes, p.barrier_up, p.barrier_down, p.discount_rate);
    let dp = config.discrete_params()?;
    let model = config.score_model()?;
    let table = price_table(
        &specs,
        &dp,
        &model,
        paths_or(config, DEFAULT_PRICE_PATHS),
        config.execution.seed,
        config.discretization.backend,
    )?;
    for w in table.warnings() {
        eprintln!("warning: {w}");
    }
    if table.dominance_violations > 0 {
        return Err(Failure::Numerical(format!(
            "{} pathwise dominance violations",
            table.dominance_violations
        )));
    }
    let json = serde_json::to_value(&table).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Artifact::from_csv(|w| table.write_csv(w), json)?)
}

pub fn simulate(config: &RunConfig) -> Result<Artifact, Failure> {
    let dp = config.discrete_params()?;
    let model = config.score_model()?;
    let m = paths_or(config, DEFAULT_SIMULATE_PATHS);
    let paths: Vec<PathBundle> = map_ensemble(
        &dp,
        &model,
        m,
        config.execution.seed,
        config.discretization.backend,
        PathBundle::clone,
    );
    let json = json!(paths
        .iter()
        .map(|p| json!({
            "stream": p.stream,
            "valid": p.valid,
            "lambda": p.lambda,
            "Lambda": p.log_vol,
            "X": p.log_price,
        }))
        .collect::<Vec<_>>());
    let n = dp.n as f64;
    Ok(Artifact::from_csv(
        |w| {
            writeln!(w, "path,t,lambda,Lambda,X")?;
            for p in &paths {
                for i in 0..p.lambda.len() {
                    writeln!(
                        w,
                        "{},{},{:e},{:e},{:e}",
                        p.stream,
                        i as f64 / n,
                        p.lambda[i],
                        p.log_vol[i],
                        p.log_price[i]
                    )?;
                }
            }
            Ok(())
        },
        json,
    )?)
}

pub fn verify_kernel(config: &RunConfig) -> Result<Artifact, Failure> {
    let (alpha, kappa) = (config.model.alpha, config.model.kappa);
    let rows = config
        .kernel
        .ladder
        .iter()
        .map(|&n| kernel_convergence_error(alpha, kappa, n, KernelGrid::per_cell(n, config.kernel.points_per_cell)))
        .collect::<roughvol::Result<Vec<_>>>()?;
    let json = json!(rows
        .iter()
        .map(|r| json!({"n": r.n, "sup_cdf_error": r.sup_cdf_error, "l2_error": r.l2_error}))
        .collect::<Vec<_>>());
    Ok(Artifact::from_csv(
        |w| {
            writeln!(w, "n,sup_cdf_error,l2_error")?;
            for r in &rows {
                writeln!(w, "{},{:.10e},{:.10e}", r.n, r.sup_cdf_error, r.l2_error)?;
            }
            Ok(())
        },
        json,
    )?)
}

pub fn compare_limit(config: &RunConfig) -> Result<Artifact, Failure> {
    let m = paths_or(config, DEFAULT_COMPARE_PATHS);
    if m < MIN_COMPARE_PATHS {
        return Err(Failure::Config(format!(
            "execution.paths: compare-limit needs at least {MIN_COMPARE_PATHS} paths, got {m}"
        )));
    }
    let dp = config.discrete_params()?;
    let model = config.score_model()?;
    let params = config.model_params();
    let horizon = config.discretization.horizon;
    let oracle_steps = config.compare.oracle_steps.unwrap_or(dp.steps);
    let grid = VolterraGrid::new(params.alpha, oracle_steps, horizon)?;
    let times = &config.compare.times;
    let seed = config.execution.seed;

    let per_unit = dp.n as f64;
    let rows = map_ensemble(&dp, &model, m, seed, config.discretization.backend, |p| {
        times.iter().map(|&t| p.log_vol[grid_index(t, per_unit)]).collect()
    });
    let discrete = MarginalSamples::from_rows(times, rows);
    let per_unit = oracle_steps as f64 / horizon;
    let rows = map_oracle(&params, &model, &grid, config.compare.oracle_options(), m, seed, |x| {
        times.iter().map(|&t| x[grid_index(t, per_unit)]).collect()
    });
    let oracle = MarginalSamples::from_rows(times, rows);
    let report = compare_marginals(&discrete, &oracle)?;
    let json = serde_json::to_value(&report).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Artifact::from_csv(|w| report.write_csv(w), json)?)
}

pub fn hurst(config: &RunConfig) -> Result<Artifact, Failure> {
    let m = paths_or(config, DEFAULT_HURST_PATHS);
    if m < MIN_HURST_PATHS {
        return Err(Failure::Config(format!(
            "execution.paths: hurst needs at least {MIN_HURST_PATHS} paths, got {m}"
        )));
    }
    let lags = config.hurst_lags();
    let steps = config.steps();
    if lags.iter().any(|&l| l >= steps) {
        return Err(Failure::Config(format!("hurst.lags: every lag must be below nT = {steps}")));
    }
    let seed = config.execution.seed;
    let params = config.model_params();
    let model = config.score_model()?;
    let mut paths: Vec<Vec<f64>> = match config.hurst.source {
        PathSource::Pathgen => {
            let dp = config.discrete_params()?;
            map_ensemble(&dp, &model, m, seed, config.discretization.backend, |p| p.log_vol.clone())
        }
        PathSource::Oracle => {
            let grid = VolterraGrid::new(params.alpha, steps, config.discretization.horizon)?;
            map_oracle(&params, &model, &grid, config.compare.oracle_options(), m, seed, <[f64]>::to_vec)
        }
    };
    if config.hurst.demean {
        demean(&mut paths);
    }
    let per_q = hurst_by_moment(&paths, &config.hurst.q, lags)?;
    let h = per_q.iter().sum::<f64>() / per_q.len() as f64;
    let target = params.alpha - 0.5;
    let json = json!({
        "hurst": h,
        "target": target,
        "paths": m,
        "lags": lags,
        "by_moment": config.hurst.q.iter().zip(&per_q).map(|(q, v)| json!({"q": q, "hurst": v})).collect::<Vec<_>>(),
    });
    Ok(Artifact::from_csv(
        |w| {
            writeln!(w, "q,hurst,target")?;
            for (q, v) in config.hurst.q.iter().zip(&per_q) {
                writeln!(w, "{q},{v:.6},{target:.6}")?;
            }
            writeln!(w, "mean,{h:.6},{target:.6}")
        },
        json,
    )?)
}

/// Removes the cross-sectional mean at every time; the deterministic
/// drift of the mean otherwise dominates the increments at long lags.
fn demean(paths: &mut [Vec<f64>]) {
    let len = paths.iter().map(Vec::len).min().unwrap_or(0);
    let m = paths.len() as f64;
    for t in 0..len {
        let mean = paths.iter().map(|p| p[t]).sum::<f64>() / m;
        for p in paths.iter_mut() {
            p[t] -= mean;
        }
    }
}

/// Timed paths per bench cell when not configured.
fn bench_paths(backend: Backend, steps: usize) -> usize {
    let budget = match backend {
        Backend::Fft => 1_000_000 / steps,
        Backend::Naive => 50_000_000 / (steps * steps),
    };
    budget.clamp(5, 1000)
}

pub fn bench(config: &RunConfig) -> Result<Artifact, Failure> {
    let model = config.score_model()?;
    let grid = &config.bench.steps;
    let mut rows = Vec::new();
    for backend in [Backend::Fft, Backend::Naive] {
        let mut row = Vec::with_capacity(grid.len());
        for &n in grid {
            let dp = config.discrete_params_at(n)?;
            let paths = config.bench.paths.unwrap_or_else(|| bench_paths(backend, dp.steps));
            row.push(time_per_path(&dp, &model, backend, paths, config.execution.seed));
        }
        rows.push((backend, row));
    }
    let json = json!(rows
        .iter()
        .map(|(b, r)| json!({"backend": b.name(), "n": grid, "seconds_per_path": r}))
        .collect::<Vec<_>>());
    Ok(Artifact::from_csv(
        |w| {
            let cols: Vec<String> = grid.iter().map(|n| format!("n_{n}")).collect();
            writeln!(w, "backend,{}", cols.join(","))?;
            for (b, r) in &rows {
                let cells: Vec<String> = r.iter().map(|s| format!("{s:.6e}")).collect();
                writeln!(w, "{},{}", b.name(), cells.join(","))?;
            }
            Ok(())
        },
        json,
    )?)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(m) => Failure::Numerical(m),
            Error::Estimation(m) => Failure::Numerical(format!("estimation failed: {m}")),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demean_centres_each_time() {
        let mut p = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
        demean(&mut p);
        assert_eq!(p, vec![vec![-1.0, -2.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn bench_budget_is_bounded() {
        assert_eq!(bench_paths(Backend::Naive, 5000), 5);
        assert_eq!(bench_paths(Backend::Fft, 100), 1000);
    }
}
