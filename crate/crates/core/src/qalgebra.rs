//! Deformed logarithm, Tsallis entropy, and the centralized density map.
//!
//! Everything is parameterized through u = 1 − q. The deformed logarithm
//! ln_q x = (x^{1−q} − 1)/(1 − q) is evaluated as expm1(u·ln x)/u, which is
//! exact through the u → 0 limit and avoids the cancellation the power form
//! suffers when |u·ln x| is small.

use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, NeumaierSum};
use crate::source::{BlockMoments, InfoMoments, SourcePmf, DEGENERATE_V_TOL};

/// |1 − q| at or below this is treated as the Shannon limit q = 1.
pub const Q_LIMIT_TOL: f64 = 1e-14;

/// Log-MGF values above this would overflow exp; reported as an error
/// instead of returning +inf.
pub const LOG_MGF_CAP: f64 = 700.0;

/// Deformation parameter carried together with its centered form 1 − q, so
/// limit detection and series expansions never re-derive u from q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam {
    q: f64,
    one_minus_q: f64,
}

impl QParam {
    pub fn new(q: f64) -> Self {
        Self { q, one_minus_q: 1.0 - q }
    }

    /// Builds from u = 1 − q directly; u is stored exactly, which matters
    /// when u = α/n is far below the rounding floor of 1 − (1 − u).
    pub fn from_one_minus(u: f64) -> Self {
        Self { q: 1.0 - u, one_minus_q: u }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn one_minus(&self) -> f64 {
        self.one_minus_q
    }

    /// True when the parameter is indistinguishable from q = 1.
    pub fn is_limit(&self) -> bool {
        self.one_minus_q.abs() < Q_LIMIT_TOL
    }
}

/// Blocklength-coupled deformation 1 − q_n = α/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingLaw {
    pub alpha: f64,
}

impl ScalingLaw {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    /// q_n with 1 − q_n = α/n. Requires n ≥ 1.
    pub fn q_at(&self, n: u64) -> QParam {
        debug_assert!(n >= 1);
        QParam::from_one_minus(self.alpha / n as f64)
    }
}

/// Free-function form of [`ScalingLaw::q_at`].
pub fn scaling_q(alpha: f64, n: u64) -> QParam {
    ScalingLaw::new(alpha).q_at(n)
}

/// ln_q x for x > 0; plain ln x at the q = 1 limit.
pub fn ln_q(x: f64, q: &QParam) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("ln_q requires finite x > 0, got {x}")));
    }
    Ok(ln_q_from_log(x.ln(), q))
}

/// ln_q(e^L) evaluated from the natural log of the argument; the form every
/// caller that already lives in the log domain should use.
pub fn ln_q_from_log(log_x: f64, q: &QParam) -> f64 {
    if q.is_limit() {
        log_x
    } else {
        f64::exp_m1(q.one_minus_q * log_x) / q.one_minus_q
    }
}

/// Tsallis entropy H_q = Σ p·ln_q(1/p) in nats; Shannon entropy at q = 1.
///
/// Summing p·ln_q(1/p) term by term keeps each addend positive and
/// well-scaled; the textbook form (1 − Σ p^q)/(q − 1) cancels catastrophically
/// near q = 1.
pub fn tsallis_entropy(pmf: &SourcePmf, q: &QParam) -> f64 {
    let mut acc = NeumaierSum::default();
    for (&p, &l) in pmf.probs().iter().zip(pmf.info()) {
        acc.add(p * ln_q_from_log(l, q));
    }
    acc.value()
}

/// First-order expansion around q = 1:
/// H_q ≈ H₁ + ((1 − q)/2)(V + H₁²). The neglected remainder is O((1−q)²)
/// with leading coefficient E[L³]/6.
pub fn q_entropy_expansion(moments: &InfoMoments, q: &QParam) -> f64 {
    moments.h1 + 0.5 * q.one_minus_q * (moments.varentropy + moments.h1 * moments.h1)
}

/// Deformed self-information ln_q(1/P) of an outcome with joint probability
/// P ∈ (0, 1].
pub fn q_info_density(joint_prob: f64, q: &QParam) -> Result<f64> {
    if !(joint_prob > 0.0 && joint_prob <= 1.0) {
        return Err(Error::Domain(format!(
            "q_info_density requires joint_prob in (0,1], got {joint_prob}"
        )));
    }
    Ok(ln_q_from_log(-joint_prob.ln(), q))
}

/// E[exp(θ·W_n)] for the block fluctuation W_n = S_n − nH₁, computed exactly
/// in the log domain: ln MGF = n·(ln Σ_x p_x^{1−θ} − θH₁). Errors once the
/// log-MGF exceeds 700 (exp would overflow).
pub fn mgf_fluctuation(pmf: &SourcePmf, n: u64, theta: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("mgf_fluctuation requires n >= 1".into()));
    }
    if !theta.is_finite() {
        return Err(Error::Domain(format!("mgf_fluctuation requires finite theta, got {theta}")));
    }
    let logs: Vec<f64> = pmf.probs().iter().map(|&p| (1.0 - theta) * p.ln()).collect();
    let ln_sum = log_sum_exp(&logs)?;
    let ln_mgf = n as f64 * (ln_sum - theta * pmf.h1());
    if ln_mgf > LOG_MGF_CAP {
        return Err(Error::Overflow { what: "log-MGF of the block fluctuation", value: ln_mgf });
    }
    Ok(ln_mgf.exp())
}

/// Change of variable that recenters the deformed block information on nH₁:
///
///   S_q(s) = nH₁ + (e^{u(s − nH₁)} − E[e^{uW_n}])/u,   u = 1 − q,
///
/// the identity map at q = 1. Strictly increasing in s for every q, and
/// E[S_q(S_n)] = nH₁ by construction, so quantiles commute with the map.
#[derive(Debug, Clone)]
pub struct CentralizedMap {
    n_h1: f64,
    u: f64,
    mgf: f64,
    limit: bool,
}

impl CentralizedMap {
    pub fn new(pmf: &SourcePmf, n: u64, q: &QParam) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("CentralizedMap requires n >= 1".into()));
        }
        let n_h1 = n as f64 * pmf.h1();
        if q.is_limit() {
            return Ok(Self { n_h1, u: 0.0, mgf: 1.0, limit: true });
        }
        let u = q.one_minus_q;
        let mgf = mgf_fluctuation(pmf, n, u)?;
        Ok(Self { n_h1, u, mgf, limit: false })
    }

    pub fn center(&self) -> f64 {
        self.n_h1
    }

    /// Image of a raw block information value s_n = −ln P(xⁿ). At the q = 1
    /// limit s_n is returned unchanged, bit for bit.
    pub fn apply(&self, s_n: f64) -> Result<f64> {
        if self.limit {
            return Ok(s_n);
        }
        self.apply_w(s_n - self.n_h1)
    }

    /// Image expressed through the fluctuation w = s_n − nH₁.
    pub fn apply_w(&self, w: f64) -> Result<f64> {
        if self.limit {
            return Ok(self.n_h1 + w);
        }
        let e = (self.u * w).exp();
        if !e.is_finite() {
            return Err(Error::Overflow { what: "centralized-map exponent", value: self.u * w });
        }
        Ok(self.n_h1 + (e - self.mgf) / self.u)
    }
}

/// Centralized deformed information of one block outcome: builds the map for
/// (pmf, n, q) and applies it to s_n. Errors propagate from the MGF and from
/// exponent overflow.
pub fn centralized_q_density(s_n: f64, pmf: &SourcePmf, n: u64, q: &QParam) -> Result<f64> {
    CentralizedMap::new(pmf, n, q)?.apply(s_n)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// k-th series term of the centralized density in powers of u = 1 − q:
///
///   term_k(w) = u^{k−1}·(w^k − E[W_n^k])/k!,   k ≥ 2.
///
/// The k = 1 term is w itself (E[W_n] = 0) and is not produced here.
pub fn fluctuation_term(w: f64, q: &QParam, k: usize, block: &BlockMoments) -> Result<f64> {
    let mu_k = block.central_moment_w(k)?;
    let u = q.one_minus_q;
    Ok(u.powi(k as i32 - 1) * (w.powi(k as i32) - mu_k) / factorial(k))
}

/// α* = T/(3V²): the deformation rate at which the u·w² series term
/// reproduces the third-order Edgeworth refinement. Undefined for degenerate
/// sources (V ≈ 0).
pub fn optimal_alpha(moments: &InfoMoments) -> Result<ScalingLaw> {
    if moments.varentropy <= DEGENERATE_V_TOL {
        return Err(Error::DegenerateSource);
    }
    let v = moments.varentropy;
    Ok(ScalingLaw::new(moments.third_central / (3.0 * v * v)))
}
