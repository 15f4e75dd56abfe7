use crate::error::{Error, Result};

/// Fewest paths accepted by [`hurst_estimate`].
pub const MIN_HURST_PATHS: usize = 50;

/// Moment-scaling estimate of the Hurst index.
///
/// For each `q`, regresses `ln m(q, Δ)` on `ln Δ` with
/// `m(q, Δ) = mean |x_{t+Δ} − x_t|^q` pooled over paths and `t`, and
/// returns the mean of `slope / q` over `q_list`. Lags are in grid steps.
pub fn hurst_estimate<P: AsRef<[f64]>>(paths: &[P], q_list: &[f64], lag_list: &[usize]) -> Result<f64> {
    Ok(hurst_by_moment(paths, q_list, lag_list)?.iter().sum::<f64>() / q_list.len() as f64)
}

/// The per-`q` estimates behind [`hurst_estimate`].
pub fn hurst_by_moment<P: AsRef<[f64]>>(paths: &[P], q_list: &[f64], lag_list: &[usize]) -> Result<Vec<f64>> {
    if paths.len() < MIN_HURST_PATHS {
        return Err(Error::Estimation(format!(
            "need at least {MIN_HURST_PATHS} paths, got {}",
            paths.len()
        )));
    }
    if q_list.is_empty() || q_list.iter().any(|&q| !(q > 0.0 && q.is_finite())) {
        return Err(Error::Estimation("moment orders must be positive".into()));
    }
    if lag_list.len() < 4 {
        return Err(Error::Estimation(format!("need at least 4 lags, got {}", lag_list.len())));
    }
    let (lo, hi) = (
        *lag_list.iter().min().expect("non-empty"),
        *lag_list.iter().max().expect("non-empty"),
    );
    if lo == 0 || hi < 10 * lo {
        return Err(Error::Estimation(format!("lags must be positive and span a decade, got {lo}..{hi}")));
    }
    let shortest = paths.iter().map(|p| p.as_ref().len()).min().unwrap_or(0);
    if shortest <= hi {
        return Err(Error::Estimation(format!("paths of length {shortest} are too short for lag {hi}")));
    }

    let log_lags: Vec<f64> = lag_list.iter().map(|&l| (l as f64).ln()).collect();
    let mut estimates = Vec::with_capacity(q_list.len());
    for &q in q_list {
        let mut log_moments = Vec::with_capacity(lag_list.len());
        for &lag in lag_list {
            let (mut sum, mut count) = (0.0, 0usize);
            for p in paths {
                let x = p.as_ref();
                for (a, b) in x.iter().zip(&x[lag..]) {
                    sum += (b - a).abs().powf(q);
                }
                count += x.len() - lag;
            }
            let m = sum / count as f64;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Estimation(format!("degenerate increments at lag {lag}")));
            }
            log_moments.push(m.ln());
        }
        estimates.push(ols_slope(&log_lags, &log_moments) / q);
    }
    Ok(estimates)
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::path_stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const LAGS: [usize; 5] = [1, 2, 4, 8, 16];

    #[test]
    fn brownian_paths_give_one_half() {
        let paths: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let mut rng = path_stream(21, i);
                let mut x = 0.0;
                (0..1000)
                    .map(|_| {
                        x += rng.sample::<f64, _>(StandardNormal);
                        x
                    })
                    .collect()
            })
            .collect();
        let h = hurst_estimate(&paths, &[0.5, 1.0, 2.0], &LAGS).unwrap();
        assert!((h - 0.5).abs() < 0.05, "{h}");
    }

    #[test]
    fn constant_paths_are_an_error() {
        let paths = vec![vec![1.0; 100]; 60];
        assert!(matches!(hurst_estimate(&paths, &[1.0], &LAGS), Err(Error::Estimation(_))));
    }

    #[test]
    fn rejects_bad_designs() {
        let paths = vec![(0..100).map(|i| i as f64).collect::<Vec<_>>(); 60];
        assert!(hurst_estimate(&paths[..10], &[1.0], &LAGS).is_err());
        assert!(hurst_estimate(&paths, &[1.0], &[1, 2, 4]).is_err());
        assert!(hurst_estimate(&paths, &[1.0], &[1, 2, 3, 4]).is_err());
        assert!(hurst_estimate(&paths, &[1.0], &[10, 20, 40, 200]).is_err());
        // A straight line has H = 1.
        let h = hurst_estimate(&paths, &[1.0], &[1, 2, 5, 10]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }
}
