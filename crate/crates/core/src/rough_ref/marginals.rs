use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Fewest paths per ensemble accepted by [`compare_marginals`].
pub const MIN_COMPARE_PATHS: usize = 10_000;

/// Samples of `Λ_t` at a few times, one vector per time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarginalSamples {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl MarginalSamples {
    /// Collects per-path rows (one value per time) into per-time columns.
    pub fn from_rows(times: &[f64], rows: Vec<Vec<f64>>) -> Self {
        let mut values = vec![Vec::with_capacity(rows.len()); times.len()];
        for row in rows {
            for (col, v) in values.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self {
            times: times.to_vec(),
            values,
        }
    }

    pub fn paths(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Grid index of time `t` on a grid with `per_unit` steps per unit time.
pub fn grid_index(t: f64, per_unit: f64) -> usize {
    (t * per_unit).round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRow {
    pub t: f64,
    pub mean_pathgen: f64,
    pub mean_oracle: f64,
    pub var_pathgen: f64,
    pub var_oracle: f64,
    /// `√(var_a/n_a + var_b/n_b)`.
    pub mean_diff_se: f64,
    pub ks_stat: f64,
    /// 1% two-sided critical value, `1.6276 √((n+m)/(nm))`.
    pub ks_critical_1pct: f64,
    pub ks_p_value: f64,
}

impl MarginalRow {
    pub fn mean_diff(&self) -> f64 {
        self.mean_pathgen - self.mean_oracle
    }

    /// Mean difference within `k` combined standard errors.
    pub fn means_agree(&self, k: f64) -> bool {
        self.mean_diff().abs() < k * self.mean_diff_se
    }

    pub fn ks_passes(&self) -> bool {
        self.ks_stat < self.ks_critical_1pct
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalReport {
    pub paths_pathgen: usize,
    pub paths_oracle: usize,
    pub rows: Vec<MarginalRow>,
}

impl MarginalReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "t,mean_pathgen,mean_oracle,var_pathgen,var_oracle,ks_stat,mean_diff_se,ks_critical_1pct,ks_p_value"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                r.t,
                r.mean_pathgen,
                r.mean_oracle,
                r.var_pathgen,
                r.var_oracle,
                r.ks_stat,
                r.mean_diff_se,
                r.ks_critical_1pct,
                r.ks_p_value
            )?;
        }
        Ok(())
    }
}

/// Compares two ensembles of marginals at matching times.
pub fn compare_marginals(pathgen: &MarginalSamples, oracle: &MarginalSamples) -> Result<MarginalReport> {
    compare_with_minimum(pathgen, oracle, MIN_COMPARE_PATHS)
}

pub(crate) fn compare_with_minimum(a: &MarginalSamples, b: &MarginalSamples, min: usize) -> Result<MarginalReport> {
    if a.times != b.times {
        return Err(Error::Estimation("ensembles are sampled at different times".into()));
    }
    let (na, nb) = (a.paths(), b.paths());
    if na < min || nb < min {
        return Err(Error::Estimation(format!("need {min} paths per ensemble, got {na} and {nb}")));
    }
    let mut rows = Vec::with_capacity(a.times.len());
    for (i, &t) in a.times.iter().enumerate() {
        let (xa, xb) = (&a.values[i], &b.values[i]);
        if xa.iter().chain(xb).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite marginal sample at t = {t}")));
        }
        let (ma, va) = mean_var(xa);
        let (mb, vb) = mean_var(xb);
        let d = ks_statistic(xa, xb);
        let (n, m) = (xa.len() as f64, xb.len() as f64);
        let ne = n * m / (n + m);
        rows.push(MarginalRow {
            t,
            mean_pathgen: ma,
            mean_oracle: mb,
            var_pathgen: va,
            var_oracle: vb,
            mean_diff_se: (va / n + vb / m).sqrt(),
            ks_stat: d,
            ks_critical_1pct: 1.6276 / ne.sqrt(),
            ks_p_value: kolmogorov_survival((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
        });
    }
    Ok(MarginalReport {
        paths_pathgen: na,
        paths_oracle: nb,
        rows,
    })
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
