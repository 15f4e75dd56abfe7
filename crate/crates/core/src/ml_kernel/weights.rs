use crate::error::{Error, Result};
use crate::special::{gamma, CompensatedSum};

/// Power-law lag weights `φ_1, …, φ_N` with unit total mass.
///
/// `φ_1 = 1 − 1/(Γ(1−α) 2^α)` and `φ_i = (i^{−α} − (i+1)^{−α}) / Γ(1−α)`
/// for `i ≥ 2`, so partial sums telescope to `1 − (N+1)^{−α}/Γ(1−α)` and
/// the tail behaves like `K / i^{1+α}` with `K = α / Γ(1−α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    alpha: f64,
    phi: Vec<f64>,
    tail_constant: f64,
    inv_gamma: f64,
}

impl KernelWeights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `φ_1..φ_N` stored at indices `0..N`.
    pub fn as_slice(&self) -> &[f64] {
        &self.phi
    }

    /// `φ_i` with the 1-based lag index used throughout the model.
    pub fn lag(&self, i: usize) -> f64 {
        self.phi[i - 1]
    }

    /// Tail constant `K = α / Γ(1−α)`.
    pub fn tail_constant(&self) -> f64 {
        self.tail_constant
    }

    /// Closed-form `Σ_{i=1}^{N} φ_i = 1 − (N+1)^{−α} / Γ(1−α)`, any `N ≥ 0`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        1.0 - ((n + 1) as f64).powf(-self.alpha) * self.inv_gamma
    }

    /// Weights scaled by the stability factor, `a·φ_i`.
    pub fn scaled(&self, a: f64) -> Vec<f64> {
        self.phi.iter().map(|p| a * p).collect()
    }
}

/// Builds `N` lag weights for `α ∈ (1/2, 1)`.
pub fn phi_weights(alpha: f64, length: usize) -> Result<KernelWeights> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::parameter("alpha", format!("must lie in (1/2, 1), got {alpha}")));
    }
    if length == 0 {
        return Err(Error::parameter("length", "at least one lag weight is required"));
    }
    let gamma_c = gamma(1.0 - alpha);
    let inv_gamma = 1.0 / gamma_c;
    let mut phi = Vec::with_capacity(length);
    phi.push(1.0 - inv_gamma * 2f64.powf(-alpha));
    for i in 2..=length {
        let x = i as f64;
        // i^{−α} − (i+1)^{−α} = i^{−α} (1 − (1 + 1/i)^{−α}), kept cancellation-free
        let diff = -(-alpha * (1.0 / x).ln_1p()).exp_m1();
        phi.push(inv_gamma * x.powf(-alpha) * diff);
    }
    Ok(KernelWeights {
        alpha,
        phi,
        tail_constant: alpha * inv_gamma,
        inv_gamma,
    })
}

/// Renewal weights `ψ = Σ_{k≥1} (aφ)^{*k}`, truncated to a finite length.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiWeights {
    a_n: f64,
    psi: Vec<f64>,
}

impl PsiWeights {
    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    /// `ψ_1..ψ_L` stored at indices `0..L`.
    pub fn as_slice(&self) -> &[f64] {
        &self.psi
    }

    pub fn lag(&self, t: usize) -> f64 {
        self.psi[t - 1]
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.psi.iter().copied().collect::<CompensatedSum>().value()
    }
}

/// Solves the renewal recursion `ψ_t = aφ_t + Σ_{j=1}^{t−1} aφ_j ψ_{t−j}`.
///
/// Cost is quadratic in `length`.
pub fn psi_weights(weights: &KernelWeights, a_n: f64, length: usize) -> Result<PsiWeights> {
    if !(a_n > 0.0 && a_n < 1.0) {
        return Err(Error::parameter("a_n", format!("must lie in (0, 1), got {a_n}")));
    }
    if length > weights.len() {
        return Err(Error::parameter(
            "length",
            format!("{length} renewal weights need at least as many lag weights, have {}", weights.len()),
        ));
    }
    let scaled = weights.scaled(a_n);
    let mut psi = vec![0.0f64; length];
    for t in 1..=length {
        // Σ_{j=1}^{t−1} aφ_j ψ_{t−j}
        let conv: f64 = scaled[..t - 1]
            .iter()
            .zip(psi[..t - 1].iter().rev())
            .map(|(p, s)| p * s)
            .sum();
        psi[t - 1] = scaled[t - 1] + conv;
    }
    Ok(PsiWeights { a_n, psi })
}
