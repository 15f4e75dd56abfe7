//! Causal convolution `conv_t = Σ_{i=1}^{t} φ_i y_{t−i}` where `y_s` only
//! becomes known after `conv_s` has been used.
//!
//! The blocked backend splits the lags into a direct window `1..=B` and
//! dyadic segments `(B·2^k, B·2^{k+1}]`. Segment `k` has length `L = B·2^k`.
//! Whenever a source block `y[jL .. (j+1)L)` completes, its contribution
//! through that segment is computed with one real FFT of size `2L` and
//! scattered into an accumulator. The earliest output a block touches is
//! two steps after its last source, so causality is exact.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

pub(crate) const DIRECT_WINDOW: usize = 64;

struct Segment {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    /// Spectrum of lags `len+1 ..= 2·len`, pre-divided by the FFT size.
    spectrum: Vec<Complex<f64>>,
}

pub(crate) struct FftKernel {
    segments: Vec<Segment>,
}

impl FftKernel {
    /// `phi[i−1]` holds lag `i`; lags beyond `phi.len()` are zero.
    pub(crate) fn new(phi: &[f64]) -> Self {
        let mut planner = RealFftPlanner::<f64>::new();
        let mut segments = Vec::new();
        let mut len = DIRECT_WINDOW;
        while len < phi.len() {
            let size = 2 * len;
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut taps = vec![0.0; size];
            let first_lag = len + 1;
            for (b, tap) in taps[..len].iter_mut().enumerate() {
                let lag = first_lag + b;
                if lag > phi.len() {
                    break;
                }
                *tap = phi[lag - 1];
            }
            let mut spectrum = forward.make_output_vec();
            forward
                .process(&mut taps, &mut spectrum)
                .expect("buffer sizes come from the plan");
            let scale = 1.0 / size as f64;
            for c in &mut spectrum {
                *c *= scale;
            }
            segments.push(Segment {
                len,
                forward,
                inverse,
                spectrum,
            });
            len *= 2;
        }
        Self { segments }
    }
}

/// Per-thread scratch for one path at a time.
pub(crate) struct Workspace {
    y: Vec<f64>,
    acc: Vec<f64>,
    real: Vec<f64>,
    spec: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl Workspace {
    pub(crate) fn new(steps: usize, kernel: Option<&FftKernel>) -> Self {
        let (mut size, mut scratch) = (0, 0);
        if let Some(k) = kernel {
            for s in &k.segments {
                size = size.max(2 * s.len);
                scratch = scratch
                    .max(s.forward.get_scratch_len())
                    .max(s.inverse.get_scratch_len());
            }
        }
        Self {
            y: vec![0.0; steps],
            acc: vec![0.0; steps + 1],
            real: vec![0.0; size],
            spec: vec![Complex::new(0.0, 0.0); size / 2 + 1],
            scratch: vec![Complex::new(0.0, 0.0); scratch],
        }
    }
}

/// Runs `λ_t = ω_t + Σ_{i=1}^{t} φ_i y_{t−i}`, `t = 1..=steps`, with
/// `λ_0 = 0` and `y_t = source(t, λ_t)` for `t < steps`.
///
/// `baseline[t]` is `ω_t` (index 0 unused); `lambda` has `steps + 1` slots.
pub(crate) fn recurse<F: FnMut(usize, f64) -> f64>(
    phi: &[f64],
    baseline: &[f64],
    kernel: Option<&FftKernel>,
    ws: &mut Workspace,
    lambda: &mut [f64],
    mut source: F,
) {
    let steps = lambda.len() - 1;
    debug_assert!(phi.len() >= steps && baseline.len() > steps && ws.y.len() >= steps);
    lambda[0] = 0.0;
    if steps == 0 {
        return;
    }
    ws.y[0] = source(0, 0.0);
    match kernel {
        None => {
            for t in 1..=steps {
                let conv = dot_reversed(&phi[..t], &ws.y[..t]);
                lambda[t] = baseline[t] + conv;
                if t < steps {
                    ws.y[t] = source(t, lambda[t]);
                }
            }
        }
        Some(kernel) => {
            ws.acc[..=steps].fill(0.0);
            scatter_completed(kernel, ws, 0, steps);
            for t in 1..=steps {
                let near = t.min(DIRECT_WINDOW);
                let conv = ws.acc[t] + dot_reversed(&phi[..near], &ws.y[t - near..t]);
                lambda[t] = baseline[t] + conv;
                if t < steps {
                    ws.y[t] = source(t, lambda[t]);
                    scatter_completed(kernel, ws, t, steps);
                }
            }
        }
    }
}

/// `Σ_i phi[i] · y[len − 1 − i]`.
#[inline]
fn dot_reversed(phi: &[f64], y: &[f64]) -> f64 {
    phi.iter().zip(y.iter().rev()).map(|(p, v)| p * v).sum()
}

/// Called once `y[s]` is known.
fn scatter_completed(kernel: &FftKernel, ws: &mut Workspace, s: usize, steps: usize) {
    for seg in &kernel.segments {
        let len = seg.len;
        if !(s + 1).is_multiple_of(len) {
            // Larger segments complete on multiples of this one.
            break;
        }
        let start = s + 1 - len;
        let first_out = start + len + 1;
        if first_out > steps {
            continue;
        }
        let size = 2 * len;
        let real = &mut ws.real[..size];
        real[..len].copy_from_slice(&ws.y[start..=s]);
        real[len..].fill(0.0);
        let spec = &mut ws.spec[..len + 1];
        seg.forward
            .process_with_scratch(real, spec, &mut ws.scratch)
            .expect("buffer sizes come from the plan");
        for (c, h) in spec.iter_mut().zip(&seg.spectrum) {
            *c *= h;
        }
        spec[0].im = 0.0;
        spec[len].im = 0.0;
        seg.inverse
            .process_with_scratch(spec, real, &mut ws.scratch)
            .expect("buffer sizes come from the plan");
        let last_out = (first_out + size - 2).min(steps);
        for (a, v) in ws.acc[first_out..=last_out].iter_mut().zip(real.iter()) {
            *a += v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(phi: &[f64], sources: &[f64], fft: bool) -> Vec<f64> {
        let steps = sources.len();
        let kernel = fft.then(|| FftKernel::new(phi));
        let mut ws = Workspace::new(steps, kernel.as_ref());
        let baseline = vec![0.0; steps + 1];
        let mut lambda = vec![0.0; steps + 1];
        recurse(phi, &baseline, kernel.as_ref(), &mut ws, &mut lambda, |t, _| sources[t]);
        lambda
    }

    #[test]
    fn blocked_matches_direct_on_fixed_sources() {
        // Sources independent of λ: both backends compute a plain causal
        // convolution, checked against the textbook double loop.
        let steps = 1500;
        let phi: Vec<f64> = (1..=steps).map(|i| 1.0 / (i as f64).powf(1.3)).collect();
        let sources: Vec<f64> = (0..steps).map(|s| ((s * 7919) % 113) as f64 / 50.0 - 1.0).collect();
        let direct = run(&phi, &sources, false);
        let blocked = run(&phi, &sources, true);
        for t in 1..=steps {
            let want: f64 = (1..=t).map(|i| phi[i - 1] * sources[t - i]).sum();
            assert!((direct[t] - want).abs() < 1e-12);
            assert!((blocked[t] - want).abs() < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn block_boundaries_are_exact() {
        for steps in [1, 2, 63, 64, 65, 127, 128, 129, 257] {
            let phi: Vec<f64> = (1..=steps).map(|i| 0.5f64.powi(i % 7) / i as f64).collect();
            let sources: Vec<f64> = (0..steps).map(|s| (s as f64 * 0.37).sin()).collect();
            let direct = run(&phi, &sources, false);
            let blocked = run(&phi, &sources, true);
            let diff = direct.iter().zip(&blocked).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "steps {steps}: {diff}");
        }
    }
}
