//! Run configuration: a single JSON document, dotted-path overrides and
//! load-time validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use roughvol::pathgen::{discretize, Backend, DiscreteParams, ModelParams};
use roughvol::rough_ref::{CorrelationConvention, DiffusionConvention, OracleOptions};
use roughvol::score_models::ScoreModel;
use roughvol::Error;

/// A configuration problem, located in the source document where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    /// `file:line` or the overriding flag, when known.
    pub location: Option<String>,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            location: None,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    #[default]
    Qsd,
    Ged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PathSource {
    #[default]
    Pathgen,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub kappa: f64,
    pub theta: f64,
    pub lambda0: f64,
    pub rho: f64,
    /// Defaults to `|rho|`.
    pub zeta: Option<f64>,
    /// The product `√(ρ²+ζ²) μ`; only used when `mu` is not given.
    pub vol_of_vol: f64,
    pub mu: Option<f64>,
    /// Defaults to `lambda0 / theta`.
    pub xi: Option<f64>,
    pub x0: f64,
    pub score: ScoreKind,
    /// GED shape, used when `score` is `ged`.
    pub nu: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            alpha: 0.62,
            kappa: 0.1,
            theta: 0.3156f64.sqrt().ln(),
            lambda0: 0.0392f64.sqrt().ln(),
            rho: -0.681,
            zeta: None,
            vol_of_vol: 0.331,
            mu: None,
            xi: None,
            x0: 100f64.ln(),
            score: ScoreKind::Qsd,
            nu: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n: usize,
    pub horizon: f64,
    pub backend: Backend,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            n: 500,
            horizon: 1.0,
            backend: Backend::Fft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionConfig {
    /// Ensemble size; each command has its own default.
    pub paths: Option<usize>,
    pub seed: u64,
    /// Worker count. Not part of the emitted config since results do not
    /// depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        Self {
            paths: None,
            seed: 20240101,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PricingConfig {
    pub strikes: Vec<f64>,
    pub barrier_up: f64,
    pub barrier_down: f64,
    pub discount_rate: f64,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self {
            strikes: vec![80.0, 90.0, 100.0, 110.0, 120.0],
            barrier_up: 110.0,
            barrier_down: 90.0,
            discount_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub ladder: Vec<usize>,
    pub points_per_cell: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            ladder: vec![100, 400, 1600],
            points_per_cell: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Reference grid size; defaults to the discrete model's `nT`.
    pub oracle_steps: Option<usize>,
    pub times: Vec<f64>,
    pub diffusion: DiffusionConvention,
    pub correlation: CorrelationConvention,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            oracle_steps: None,
            times: vec![0.25, 0.5, 1.0],
            diffusion: DiffusionConvention::Analytic,
            correlation: CorrelationConvention::Rho,
        }
    }
}

impl CompareConfig {
    pub fn oracle_options(&self) -> OracleOptions {
        OracleOptions {
            diffusion: self.diffusion,
            correlation: self.correlation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HurstConfig {
    pub source: PathSource,
    pub q: Vec<f64>,
    /// Lags in grid steps; defaults to five dyadic lags ending at the
    /// largest power of two not above `2nT/3`.
    pub lags: Option<Vec<usize>>,
    /// Subtract the ensemble mean at each time before taking increments.
    pub demean: bool,
}

impl Default for HurstConfig {
    fn default() -> Self {
        Self {
            source: PathSource::Pathgen,
            q: vec![0.5, 1.0, 2.0],
            lags: None,
            demean: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub steps: Vec<usize>,
    /// Timed paths per cell; by default scaled down with the cost.
    pub paths: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            steps: vec![100, 250, 500, 1000, 2500, 5000],
            paths: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing)]
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub discretization: DiscretizationConfig,
    pub execution: ExecutionConfig,
    pub pricing: PricingConfig,
    pub kernel: KernelConfig,
    pub compare: CompareConfig,
    pub hurst: HurstConfig,
    pub bench: BenchConfig,
    pub output: OutputConfig,
}

/// Where the document came from, for error locations.
struct Source<'a> {
    name: String,
    text: Option<&'a str>,
    overrides: &'a [(String, Value)],
}

impl Source<'_> {
    /// Locates a dotted key: the command line wins over the file.
    fn locate(&self, key: &str) -> Option<String> {
        if self.overrides.iter().any(|(k, _)| k == key) {
            return Some(format!("command line ({key})"));
        }
        let text = self.text?;
        let leaf = key.rsplit('.').next().unwrap_or(key);
        let needle = format!("\"{leaf}\"");
        text.lines().enumerate().find_map(|(i, line)| {
            let pos = line.find(&needle)?;
            line[pos + needle.len()..]
                .trim_start()
                .starts_with(':')
                .then(|| format!("{}:{}", self.name, i + 1))
        })
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            message: format!("{key}: {}", message.into()),
            location: self.locate(key),
        }
    }
}

/// Parses `key=value`; the value is JSON, or a bare string otherwise.
pub fn parse_override(arg: &str) -> Result<(String, Value), ConfigError> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| ConfigError::new(format!("override `{arg}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::new(format!("override `{arg}` has an empty key segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn apply_override(doc: &mut Value, key: &str, value: Value) -> Result<(), ConfigError> {
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| ConfigError::new(format!("--set {key}: `{part}` is not inside an object")))?;
        if parts.peek().is_none() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl RunConfig {
    /// Reads the optional config file, applies `overrides` in order and
    /// validates the result.
    pub fn load(file: Option<&Path>, overrides: &[(String, Value)]) -> Result<Self, ConfigError> {
        let text = match file {
            Some(p) => Some(
                std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", p.display())))?,
            ),
            None => None,
        };
        let name = file.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
        Self::from_parts(&name, text.as_deref(), overrides)
    }

    pub fn from_parts(name: &str, text: Option<&str>, overrides: &[(String, Value)]) -> Result<Self, ConfigError> {
        let source = Source {
            name: name.to_string(),
            text,
            overrides,
        };
        let mut doc = match text {
            Some(t) => {
                // Typed parse first: serde_json then reports line and column.
                serde_json::from_str::<RunConfig>(t).map_err(|e| ConfigError {
                    message: e.to_string(),
                    location: Some(name.to_string()),
                })?;
                serde_json::from_str::<Value>(t).expect("already parsed")
            }
            None => Value::Object(Default::default()),
        };
        for (key, value) in overrides {
            apply_override(&mut doc, key, value.clone())?;
        }
        let mut config: RunConfig = serde_json::from_value(doc).map_err(|e| ConfigError {
            message: format!("after overrides: {e}"),
            location: None,
        })?;
        config.resolve(&source)?;
        Ok(config)
    }

    /// Fills derived defaults and applies every range check.
    fn resolve(&mut self, src: &Source) -> Result<(), ConfigError> {
        let m = &mut self.model;
        let zeta = *m.zeta.get_or_insert(m.rho.abs());
        if m.mu.is_none() {
            let norm = m.rho.hypot(zeta);
            if norm <= 0.0 || norm.is_nan() {
                return Err(src.error("model.zeta", "rho and zeta are both zero; give model.mu explicitly"));
            }
            m.mu = Some(m.vol_of_vol / norm);
        }
        if m.xi.is_none() {
            if m.theta == 0.0 {
                return Err(src.error("model.theta", "must be non-zero"));
            }
            m.xi = Some(m.lambda0 / m.theta);
        }
        let params = self.model_params();
        params.validate().map_err(|e| map_core_error(src, e))?;
        self.score_model().map_err(|e| map_core_error(src, e))?;
        self.discrete_params().map_err(|e| map_core_error(src, e))?;

        let steps = self.steps();
        if self.hurst.lags.is_none() {
            let top = 1usize << (2 * steps / 3).max(16).ilog2();
            self.hurst.lags = Some((0..5).rev().map(|k| (top >> k).max(1)).collect());
        }
        self.check_options(src)
    }

    fn check_options(&self, src: &Source) -> Result<(), ConfigError> {
        let p = &self.pricing;
        if p.strikes.is_empty() || p.strikes.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(src.error("pricing.strikes", "need one or more positive strikes"));
        }
        if !(p.barrier_up.is_finite() && p.barrier_up > 0.0) {
            return Err(src.error("pricing.barrier_up", "must be positive"));
        }
        if !(p.barrier_down.is_finite() && p.barrier_down > 0.0) {
            return Err(src.error("pricing.barrier_down", "must be positive"));
        }
        if !p.discount_rate.is_finite() {
            return Err(src.error("pricing.discount_rate", "must be finite"));
        }
        if self.kernel.ladder.iter().any(|&n| n < 10) || self.kernel.ladder.is_empty() {
            return Err(src.error("kernel.ladder", "every n must be at least 10"));
        }
        if self.kernel.points_per_cell == 0 {
            return Err(src.error("kernel.points_per_cell", "must be positive"));
        }
        let horizon = self.discretization.horizon;
        if self.compare.times.is_empty() || self.compare.times.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
            return Err(src.error("compare.times", format!("need times in (0, {horizon}]")));
        }
        if self.compare.oracle_steps.is_some_and(|n| n < 100) {
            return Err(src.error("compare.oracle_steps", "must be at least 100"));
        }
        if self.hurst.q.is_empty() || self.hurst.q.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
            return Err(src.error("hurst.q", "need positive moment orders"));
        }
        if self.bench.steps.is_empty() || self.bench.steps.iter().any(|&n| n < 2) {
            return Err(src.error("bench.steps", "need step counts of at least 2"));
        }
        if self.execution.paths == Some(0) {
            return Err(src.error("execution.paths", "must be positive"));
        }
        Ok(())
    }

    pub fn model_params(&self) -> ModelParams {
        let m = &self.model;
        ModelParams {
            alpha: m.alpha,
            kappa: m.kappa,
            theta: m.theta,
            mu: m.mu.unwrap_or(f64::NAN),
            rho: m.rho,
            zeta: m.zeta.unwrap_or(m.rho.abs()),
            xi: m.xi.unwrap_or(f64::NAN),
            x0: m.x0,
            lambda0: m.lambda0,
        }
    }

    pub fn score_model(&self) -> roughvol::Result<ScoreModel> {
        match self.model.score {
            ScoreKind::Qsd => ScoreModel::qsd(self.model.rho, self.model.zeta.unwrap_or(self.model.rho.abs())),
            ScoreKind::Ged => ScoreModel::ged(self.model.nu),
        }
    }

    pub fn discrete_params(&self) -> roughvol::Result<DiscreteParams> {
        self.discrete_params_at(self.discretization.n)
    }

    pub fn discrete_params_at(&self, n: usize) -> roughvol::Result<DiscreteParams> {
        discretize(&self.model_params(), n, self.discretization.horizon)
    }

    pub fn steps(&self) -> usize {
        (self.discretization.n as f64 * self.discretization.horizon).round() as usize
    }

    pub fn hurst_lags(&self) -> &[usize] {
        self.hurst.lags.as_deref().unwrap_or(&[])
    }

    /// Canonical JSON of the resolved configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Maps a core parameter error onto the config key that feeds it.
fn map_core_error(src: &Source, err: Error) -> ConfigError {
    match err {
        Error::Parameter { name, reason } => {
            let key = match name {
                "n" => "discretization.n".to_string(),
                "horizon" => "discretization.horizon".to_string(),
                other => format!("model.{other}"),
            };
            src.error(&key, reason)
        }
        other => ConfigError::new(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_reference_parameters() {
        let c = RunConfig::from_parts("x", None, &[]).unwrap();
        let p = c.model_params();
        let r = ModelParams::reference();
        assert!((p.mu - r.mu).abs() < 1e-15 && (p.xi - r.xi).abs() < 1e-15);
        assert_eq!(p.zeta, 0.681);
        assert_eq!(c.hurst_lags(), &[16, 32, 64, 128, 256]);
    }

    #[test]
    fn overrides_use_dotted_paths() {
        let sets = vec![
            parse_override("discretization.n=2000").unwrap(),
            parse_override("discretization.backend=naive").unwrap(),
            parse_override("pricing.strikes=[95,105]").unwrap(),
        ];
        let c = RunConfig::from_parts("x", None, &sets).unwrap();
        assert_eq!(c.discretization.n, 2000);
        assert_eq!(c.discretization.backend, Backend::Naive);
        assert_eq!(c.pricing.strikes, vec![95.0, 105.0]);
        assert_eq!(c.hurst_lags(), &[64, 128, 256, 512, 1024]);
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn range_errors_point_at_the_line() {
        let text = "{\n  \"model\": {\n    \"kappa\": 0.1,\n    \"alpha\": 1.4\n  }\n}\n";
        let err = RunConfig::from_parts("run.json", Some(text), &[]).unwrap_err();
        assert_eq!(err.location.as_deref(), Some("run.json:4"), "{err}");
        assert!(err.message.contains("model.alpha"));

        let sets = vec![parse_override("model.alpha=0.3").unwrap()];
        let err = RunConfig::from_parts("run.json", None, &sets).unwrap_err();
        assert_eq!(err.location.as_deref(), Some("command line (model.alpha)"));
    }

    #[test]
    fn unknown_and_mistyped_fields_report_line_and_column() {
        let text = "{\n  \"model\": {\n    \"alpah\": 0.6\n  }\n}";
        let err = RunConfig::from_parts("run.json", Some(text), &[]).unwrap_err();
        assert!(err.message.contains("line 3"), "{err}");
        let text = "{\"discretization\": {\"n\": \"many\"}}";
        assert!(RunConfig::from_parts("run.json", Some(text), &[]).is_err());
    }

    #[test]
    fn emitted_json_omits_execution_only_fields() {
        let sets = vec![
            parse_override("execution.threads=3").unwrap(),
            parse_override("output.path=/tmp/x.csv").unwrap(),
        ];
        let c = RunConfig::from_parts("x", None, &sets).unwrap();
        assert_eq!(c.execution.threads, Some(3));
        let json = c.to_json();
        assert!(!json.contains("threads") && !json.contains("/tmp/x.csv"));
        assert_eq!(json, RunConfig::from_parts("x", None, &[]).unwrap().to_json());
    }

    #[test]
    fn unstable_lattice_is_a_config_error() {
        let sets = vec![
            parse_override("model.kappa=50").unwrap(),
            parse_override("discretization.n=10").unwrap(),
        ];
        let err = RunConfig::from_parts("x", None, &sets).unwrap_err();
        assert!(err.message.contains("model.kappa"), "{err}");
    }
}
