//! Finite-alphabet memoryless source model and the moment ladder of its
//! self-information.
//!
//! For a source X ~ P the self-information L = −ln P(X) has mean H₁ (Shannon
//! entropy), variance V (varentropy) and third central moment T. Block-level
//! moments of the fluctuation W_n = S_n − nH₁ follow from cumulant
//! additivity: κ_j(W_n) = n·κ_j(L) for j ≥ 2, κ₁(W_n) = 0.

use crate::error::{Error, Result};
use crate::numerics::{stable_sum, NeumaierSum};

/// Hard ceiling for moment/cumulant orders. The resonance analysis needs
/// orders up to k+1 = 7; 12 leaves headroom without numerical blowup.
pub const MAX_MOMENT_ORDER: usize = 12;

/// Varentropy at or below this is treated as exactly zero: the source is
/// degenerate (uniform self-information) and every skewness-driven quantity
/// (α, Edgeworth term) is undefined.
pub const DEGENERATE_V_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// SourcePmf
// ---------------------------------------------------------------------------

/// Strictly positive probability vector over an alphabet of size ≥ 2.
///
/// Zero-probability symbols are rejected rather than dropped: silently
/// shrinking the alphabet would mask user error.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePmf {
    probs: Vec<f64>,
    info: Vec<f64>, // −ln p_x, cached at construction
}

impl SourcePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidPmf(format!(
                    "entry {i} is {p}; every probability must be strictly positive"
                )));
            }
        }
        let total = stable_sum(&probs);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!(
                "entries sum to {total}, expected 1 within 1e-12"
            )));
        }
        let info = probs.iter().map(|&p| -p.ln()).collect();
        Ok(Self { probs, info })
    }

    /// Parses the shared CLI format: comma-separated decimals, "0.11,0.89".
    pub fn parse(text: &str) -> Result<Self> {
        let probs = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPmf(format!("cannot parse {:?}: {e}", tok.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn is_binary(&self) -> bool {
        self.probs.len() == 2
    }

    /// Cached per-symbol self-informations −ln p_x.
    pub fn info(&self) -> &[f64] {
        &self.info
    }

    /// Shannon entropy H₁ = Σ p·(−ln p) in nats.
    pub fn h1(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for (&p, &l) in self.probs.iter().zip(&self.info) {
            acc.add(p * l);
        }
        acc.value()
    }
}

/// −ln P(symbol) in nats.
pub fn self_information(pmf: &SourcePmf, symbol: usize) -> Result<f64> {
    pmf.info.get(symbol).copied().ok_or_else(|| {
        Error::Domain(format!(
            "symbol index {symbol} out of range for alphabet of {}",
            pmf.probs.len()
        ))
    })
}

// ---------------------------------------------------------------------------
// Single-symbol moments
// ---------------------------------------------------------------------------

/// Moments and cumulants of the self-information of one symbol.
#[derive(Debug, Clone)]
pub struct InfoMoments {
    pub h1: f64,
    pub varentropy: f64,
    pub third_central: f64,
    central: Vec<f64>,   // central[j] = E[(L − H₁)^j]; central[0] = 1, central[1] = 0
    cumulants: Vec<f64>, // cumulants[1] = H₁, cumulants[j ≥ 2] from the recursion
    max_order: usize,
}

impl InfoMoments {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// E[(L − H₁)^order] for 2 ≤ order ≤ max_order.
    pub fn central_moment(&self, order: usize) -> Result<f64> {
        if (2..=self.max_order).contains(&order) {
            Ok(self.central[order])
        } else {
            Err(Error::MomentOrder { requested: order, available: self.max_order })
        }
    }

    /// κ_order for 1 ≤ order ≤ max_order; κ₁ = H₁.
    pub fn cumulant(&self, order: usize) -> Result<f64> {
        if (1..=self.max_order).contains(&order) {
            Ok(self.cumulants[order])
        } else {
            Err(Error::MomentOrder { requested: order, available: self.max_order })
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.varentropy <= DEGENERATE_V_TOL
    }
}

/// Exact small binomial coefficient as f64 (n ≤ 12 here, far below 2^53).
fn binom(n: usize, k: usize) -> f64 {
    let mut c: u64 = 1;
    for i in 0..k.min(n - k) {
        c = c * (n - i) as u64 / (i + 1) as u64;
    }
    c as f64
}

/// κ_j from centered moments via the Bell-polynomial recursion
/// κ_j = μ_j − Σ_{i=2}^{j−1} C(j−1, i−1)·κ_i·μ_{j−i}  (μ₁ = 0 kills i = j−1).
fn cumulants_from_central(central: &[f64], mean: f64) -> Vec<f64> {
    let k = central.len() - 1;
    let mut kappa = vec![0.0; k + 1];
    if k >= 1 {
        kappa[1] = mean;
    }
    for j in 2..=k {
        let mut v = central[j];
        for i in 2..j {
            v -= binom(j - 1, i - 1) * kappa[i] * central[j - i];
        }
        kappa[j] = v;
    }
    kappa
}

/// Centered moments from cumulants (κ₁ ignored: centering zeroes it):
/// μ_j = Σ_{i=2}^{j} C(j−1, i−1)·κ_i·μ_{j−i}, μ₀ = 1, μ₁ = 0.
fn central_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let k = kappa.len() - 1;
    let mut mu = vec![0.0; k + 1];
    mu[0] = 1.0;
    for j in 2..=k {
        let mut v = 0.0;
        for i in 2..=j {
            v += binom(j - 1, i - 1) * kappa[i] * mu[j - i];
        }
        mu[j] = v;
    }
    mu
}

/// Central moments E[(L − H₁)^j] for j ≤ max_order plus the cumulants derived
/// from them. max_order must lie in [3, 12].
pub fn info_moments(pmf: &SourcePmf, max_order: usize) -> Result<InfoMoments> {
    if !(3..=MAX_MOMENT_ORDER).contains(&max_order) {
        return Err(Error::MomentOrder { requested: max_order, available: MAX_MOMENT_ORDER });
    }
    let h1 = pmf.h1();
    let mut central = vec![0.0; max_order + 1];
    central[0] = 1.0;
    for (j, slot) in central.iter_mut().enumerate().skip(2) {
        let mut acc = NeumaierSum::default();
        for (&p, &l) in pmf.probs.iter().zip(&pmf.info) {
            acc.add(p * (l - h1).powi(j as i32));
        }
        *slot = acc.value();
    }
    let cumulants = cumulants_from_central(&central, h1);
    Ok(InfoMoments {
        h1,
        varentropy: central[2],
        third_central: central[3],
        central,
        cumulants,
        max_order,
    })
}

/// Independent analytic oracle for binary sources:
/// H₁ = −p ln p − (1−p) ln(1−p), V = p(1−p)L², T = p(1−p)(1−2p)L³ with
/// L = ln((1−p)/p).
pub fn bernoulli_closed_forms(p: f64) -> Result<(f64, f64, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "bernoulli_closed_forms requires p in (0,1), got {p}"
        )));
    }
    let w = 1.0 - p;
    let l = (w / p).ln();
    let h1 = -(p * p.ln() + w * w.ln());
    let v = p * w * l * l;
    let t = p * w * (1.0 - 2.0 * p) * l * l * l;
    Ok((h1, v, t))
}

// ---------------------------------------------------------------------------
// Block-level moments of the fluctuation W_n
// ---------------------------------------------------------------------------

/// Central moments E[W_n^j] of W_n = S_n − nH₁.
#[derive(Debug, Clone)]
pub struct BlockMoments {
    pub n: u64,
    central_w: Vec<f64>, // central_w[j] = E[W_n^j]; [0] = 1, [1] = 0
    max_order: usize,
}

impl BlockMoments {
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// E[W_n^order] for 2 ≤ order ≤ max_order.
    pub fn central_moment_w(&self, order: usize) -> Result<f64> {
        if (2..=self.max_order).contains(&order) {
            Ok(self.central_w[order])
        } else {
            Err(Error::MomentOrder { requested: order, available: self.max_order })
        }
    }
}

/// Block cumulants are n·(single-symbol cumulants) for orders ≥ 2 and 0 at
/// order 1; the central moments of W_n follow by the cumulant→moment
/// recursion. E[W_n²] = nV and E[W_n³] = nT hold exactly by construction.
pub fn block_moments(moments: &InfoMoments, n: u64, max_order: usize) -> Result<BlockMoments> {
    if max_order < 2 || max_order > moments.max_order() {
        return Err(Error::MomentOrder { requested: max_order, available: moments.max_order() });
    }
    if n == 0 {
        return Err(Error::Domain("block_moments requires n >= 1".into()));
    }
    let mut kappa = vec![0.0; max_order + 1];
    for (j, slot) in kappa.iter_mut().enumerate().skip(2) {
        *slot = n as f64 * moments.cumulant(j)?;
    }
    Ok(BlockMoments { n, central_w: central_from_cumulants(&kappa), max_order })
}
