//! Monte Carlo prices of European, Asian, Lookback and Barrier options.
//!
//! All specs priced together share one path ensemble, so pathwise
//! orderings between payoffs carry over exactly to the estimates.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathgen::{map_ensemble, Backend, DiscreteParams, PathBundle};
use crate::score_models::ScoreModel;

/// Invalid-path share above which an estimate carries a warning.
pub const INVALID_WARN_SHARE: f64 = 0.001;
/// Invalid-path share above which pricing fails.
pub const INVALID_ERROR_SHARE: f64 = 0.01;
pub const MIN_PRICE_PATHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionFamily {
    European,
    Asian,
    Lookback,
    /// Up-and-in call, down-and-out put.
    Barrier,
}

impl OptionFamily {
    pub const ALL: [OptionFamily; 4] = [
        OptionFamily::European,
        OptionFamily::Asian,
        OptionFamily::Lookback,
        OptionFamily::Barrier,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptionFamily::European => "european",
            OptionFamily::Asian => "asian",
            OptionFamily::Lookback => "lookback",
            OptionFamily::Barrier => "barrier",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionSide {
    Call,
    Put,
}

impl OptionSide {
    pub fn name(self) -> &'static str {
        match self {
            OptionSide::Call => "call",
            OptionSide::Put => "put",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub family: OptionFamily,
    pub side: OptionSide,
    pub strike: f64,
    /// Knock-in level of the barrier call.
    pub barrier_up: f64,
    /// Knock-out level of the barrier put.
    pub barrier_down: f64,
    /// Continuously compounded rate used for discounting.
    pub discount_rate: f64,
}

impl OptionSpec {
    pub fn new(family: OptionFamily, side: OptionSide, strike: f64) -> Self {
        Self {
            family,
            side,
            strike,
            barrier_up: 110.0,
            barrier_down: 90.0,
            discount_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::parameter("strike", format!("must be positive, got {}", self.strike)));
        }
        if self.family == OptionFamily::Barrier {
            let level = match self.side {
                OptionSide::Call => ("barrier_up", self.barrier_up),
                OptionSide::Put => ("barrier_down", self.barrier_down),
            };
            if !(level.1 > 0.0 && level.1.is_finite()) {
                return Err(Error::parameter(level.0, format!("must be positive, got {}", level.1)));
            }
        }
        if !self.discount_rate.is_finite() {
            return Err(Error::parameter("discount_rate", "must be finite"));
        }
        Ok(())
    }
}

/// The 5 × 8 grid: every strike against every family and side.
pub fn table_specs(strikes: &[f64], barrier_up: f64, barrier_down: f64, discount_rate: f64) -> Vec<OptionSpec> {
    let mut out = Vec::with_capacity(strikes.len() * 8);
    for &strike in strikes {
        for family in OptionFamily::ALL {
            for side in [OptionSide::Call, OptionSide::Put] {
                out.push(OptionSpec {
                    barrier_up,
                    barrier_down,
                    discount_rate,
                    ..OptionSpec::new(family, side, strike)
                });
            }
        }
    }
    out
}

/// The path statistics every payoff depends on, with `S = e^X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub terminal: f64,
    /// Mean of `S_{t_1}..S_{t_{nT}}` (excludes `t_0`).
    pub average: f64,
    /// Extremes over `S_{t_0}..S_{t_{nT}}`.
    pub max: f64,
    pub min: f64,
}

impl PathSummary {
    /// `None` for paths flagged invalid.
    pub fn from_path(path: &PathBundle) -> Option<Self> {
        if !path.valid {
            return None;
        }
        Some(Self::from_log_prices(&path.log_price))
    }

    pub fn from_log_prices(x: &[f64]) -> Self {
        let s0 = x[0].exp();
        let (mut sum, mut max, mut min) = (0.0, s0, s0);
        for &xi in &x[1..] {
            let s = xi.exp();
            sum += s;
            max = max.max(s);
            min = min.min(s);
        }
        Self {
            terminal: x[x.len() - 1].exp(),
            average: sum / (x.len() - 1) as f64,
            max,
            min,
        }
    }
}

/// Undiscounted payoff.
pub fn payoff(spec: &OptionSpec, s: &PathSummary) -> f64 {
    let k = spec.strike;
    let call = |v: f64| (v - k).max(0.0);
    let put = |v: f64| (k - v).max(0.0);
    match (spec.family, spec.side) {
        (OptionFamily::European, OptionSide::Call) => call(s.terminal),
        (OptionFamily::European, OptionSide::Put) => put(s.terminal),
        (OptionFamily::Asian, OptionSide::Call) => call(s.average),
        (OptionFamily::Asian, OptionSide::Put) => put(s.average),
        (OptionFamily::Lookback, OptionSide::Call) => call(s.max),
        (OptionFamily::Lookback, OptionSide::Put) => put(s.min),
        (OptionFamily::Barrier, OptionSide::Call) => {
            if s.max >= spec.barrier_up {
                call(s.terminal)
            } else {
                0.0
            }
        }
        (OptionFamily::Barrier, OptionSide::Put) => {
            if s.min > spec.barrier_down {
                put(s.terminal)
            } else {
                0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub spec: OptionSpec,
    pub value: f64,
    pub stderr: f64,
    /// Valid paths entering the estimate.
    pub paths: usize,
    pub invalid_paths: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Mean and `√(Σ(V−V̄)² / ((M−1)M))`, summed in the given order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / ((m - 1.0) * m)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceTable {
    pub estimates: Vec<PriceEstimate>,
    pub paths: usize,
    pub invalid_paths: usize,
    pub seed: u64,
    /// Per-path breaches of Lookback call ≥ European call ≥ Barrier call at
    /// equal strike; zero unless something is broken.
    pub dominance_violations: usize,
}

/// Simulates `m` paths and reduces each to a [`PathSummary`].
pub fn simulate_summaries(
    dp: &DiscreteParams,
    model: &ScoreModel,
    m: usize,
    seed: u64,
    backend: Backend,
) -> Vec<Option<PathSummary>> {
    map_ensemble(dp, model, m, seed, backend, PathSummary::from_path)
}

pub fn price_table(
    specs: &[OptionSpec],
    dp: &DiscreteParams,
    model: &ScoreModel,
    m: usize,
    seed: u64,
    backend: Backend,
) -> Result<PriceTable> {
    if specs.is_empty() {
        return Err(Error::parameter("specs", "need at least one option"));
    }
    for s in specs {
        s.validate()?;
    }
    if m < MIN_PRICE_PATHS {
        return Err(Error::parameter("paths", format!("need at least {MIN_PRICE_PATHS} paths, got {m}")));
    }
    let summaries = simulate_summaries(dp, model, m, seed, backend);
    price_summaries(specs, &summaries, dp.horizon, seed)
}

pub fn price(
    spec: &OptionSpec,
    dp: &DiscreteParams,
    model: &ScoreModel,
    m: usize,
    seed: u64,
    backend: Backend,
) -> Result<PriceEstimate> {
    let mut table = price_table(std::slice::from_ref(spec), dp, model, m, seed, backend)?;
    Ok(table.estimates.remove(0))
}

/// Prices `specs` on precomputed summaries (`None` marks an invalid path).
pub fn price_summaries(
    specs: &[OptionSpec],
    summaries: &[Option<PathSummary>],
    horizon: f64,
    seed: u64,
) -> Result<PriceTable> {
    let valid: Vec<PathSummary> = summaries.iter().flatten().copied().collect();
    let invalid = summaries.len() - valid.len();
    let share = invalid as f64 / summaries.len().max(1) as f64;
    if share > INVALID_ERROR_SHARE || valid.len() < 2 {
        return Err(Error::Numerical(format!(
            "{invalid} of {} paths exceeded the log-volatility limit",
            summaries.len()
        )));
    }
    let warning = (share > INVALID_WARN_SHARE).then(|| {
        format!("{invalid} of {} paths exceeded the log-volatility limit and were dropped", summaries.len())
    });

    let mut estimates = Vec::with_capacity(specs.len());
    let mut values = vec![0.0; valid.len()];
    for spec in specs {
        for (v, s) in values.iter_mut().zip(&valid) {
            *v = payoff(spec, s);
        }
        let (mean, se) = mean_and_stderr(&values);
        let discount = (-spec.discount_rate * horizon).exp();
        estimates.push(PriceEstimate {
            spec: *spec,
            value: discount * mean,
            stderr: discount * se,
            paths: valid.len(),
            invalid_paths: invalid,
            seed,
            warning: warning.clone(),
        });
    }
    Ok(PriceTable {
        dominance_violations: dominance_violations(specs, &valid),
        estimates,
        paths: valid.len(),
        invalid_paths: invalid,
        seed,
    })
}

fn dominance_violations(specs: &[OptionSpec], paths: &[PathSummary]) -> usize {
    let find = |family, strike| {
        specs
            .iter()
            .find(|s| s.family == family && s.side == OptionSide::Call && s.strike == strike)
    };
    let mut count = 0;
    for euro in specs.iter().filter(|s| s.family == OptionFamily::European && s.side == OptionSide::Call) {
        let look = find(OptionFamily::Lookback, euro.strike);
        let barrier = find(OptionFamily::Barrier, euro.strike);
        for p in paths {
            let e = payoff(euro, p);
            if look.is_some_and(|l| payoff(l, p) < e) {
                count += 1;
            }
            if barrier.is_some_and(|b| payoff(b, p) > e) {
                count += 1;
            }
        }
    }
    count
}

impl PriceTable {
    pub fn get(&self, family: OptionFamily, side: OptionSide, strike: f64) -> Option<&PriceEstimate> {
        self.estimates
            .iter()
            .find(|e| e.spec.family == family && e.spec.side == side && e.spec.strike == strike)
    }

    pub fn strikes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in &self.estimates {
            if !out.contains(&e.spec.strike) {
                out.push(e.spec.strike);
            }
        }
        out
    }

    pub fn warnings(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.estimates.iter().filter_map(|e| e.warning.as_deref()).collect();
        out.dedup();
        out
    }

    /// One row per strike; value and standard error columns per family
    /// and side, blank where a combination was not priced.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["strike".to_string()];
        for family in OptionFamily::ALL {
            for side in [OptionSide::Call, OptionSide::Put] {
                header.push(format!("{}_{}", family.name(), side.name()));
                header.push(format!("{}_{}_se", family.name(), side.name()));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for strike in self.strikes() {
            let mut row = vec![format!("{strike}")];
            for family in OptionFamily::ALL {
                for side in [OptionSide::Call, OptionSide::Put] {
                    match self.get(family, side, strike) {
                        Some(e) => {
                            row.push(format!("{:.6}", e.value));
                            row.push(format!("{:.6}", e.stderr));
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
