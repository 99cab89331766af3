//! Closed-form blocklength expansions of the ε-achievable representation
//! length, and the sweep that tabulates them against the exact spectrum.
//!
//! With z = Q⁻¹(ε):
//!   shannon    nH₁
//!   normal     nH₁ + √(nV)·z
//!   edgeworth  normal + (T/(6V))·(z² − 1)
//!   q_bound    normal + (αV/2)·(z² − 1)
//!
//! At α = T/(3V²) the last two coincide exactly: αV/2 = T/(6V). Both
//! correction terms are n-free, so the identity holds at every blocklength.

use crate::error::{Error, Result};
use crate::numerics::inv_q_function;
use crate::qalgebra::optimal_alpha;
use crate::source::{info_moments, InfoMoments, SourcePmf, DEGENERATE_V_TOL};
use crate::spectrum::{exact_source_limit, type_class_spectrum};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ingredients shared by every bound at one (n, ε): moments, the Gaussian
/// quantile, and the deformation rate α.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    pub n: u64,
    pub eps: f64,
    pub z_eps: f64,
    pub h1: f64,
    pub varentropy: f64,
    pub third_central: f64,
    pub alpha: f64,
}

impl BoundInputs {
    pub fn new(moments: &InfoMoments, n: u64, eps: f64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("bounds require n >= 1".into()));
        }
        Ok(Self {
            n,
            eps,
            z_eps: inv_q_function(eps)?,
            h1: moments.h1,
            varentropy: moments.varentropy,
            third_central: moments.third_central,
            alpha,
        })
    }

    /// α = T/(3V²); errors for degenerate sources.
    pub fn with_optimal_alpha(moments: &InfoMoments, n: u64, eps: f64) -> Result<Self> {
        let law = optimal_alpha(moments)?;
        Self::new(moments, n, eps, law.alpha)
    }
}

/// First-order term nH₁.
pub fn shannon_limit(inputs: &BoundInputs) -> f64 {
    inputs.n as f64 * inputs.h1
}

/// Gaussian second-order approximation nH₁ + √(nV)·Q⁻¹(ε).
pub fn normal_approx(inputs: &BoundInputs) -> f64 {
    shannon_limit(inputs) + (inputs.n as f64 * inputs.varentropy).sqrt() * inputs.z_eps
}

/// Third-order refinement normal + (T/(6V))·(z² − 1); undefined when V ≈ 0.
pub fn edgeworth_third(inputs: &BoundInputs) -> Result<f64> {
    if inputs.varentropy <= DEGENERATE_V_TOL {
        return Err(Error::DegenerateSource);
    }
    let z = inputs.z_eps;
    Ok(normal_approx(inputs) + inputs.third_central / (6.0 * inputs.varentropy) * (z * z - 1.0))
}

/// Deformed-entropy bound normal + (αV/2)·(z² − 1).
pub fn q_bound(inputs: &BoundInputs) -> f64 {
    let z = inputs.z_eps;
    normal_approx(inputs) + 0.5 * inputs.alpha * inputs.varentropy * (z * z - 1.0)
}

/// One sweep line. Correction terms are None for degenerate sources, where
/// their derivations collapse; `exact` is None when not requested or when
/// the spectrum size cap forbids enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub n: u64,
    pub shannon: f64,
    pub normal: f64,
    pub edgeworth: Option<f64>,
    pub q_bound: Option<f64>,
    pub exact: Option<f64>,
}

fn sweep_row(
    pmf: &SourcePmf,
    moments: &InfoMoments,
    alpha: Option<f64>,
    n: u64,
    eps: f64,
    include_exact: bool,
) -> Result<BoundRow> {
    let degenerate = moments.is_degenerate();
    let inputs = BoundInputs::new(moments, n, eps, alpha.unwrap_or(0.0))?;
    let (edgeworth, qb) = if degenerate {
        (None, None)
    } else {
        (Some(edgeworth_third(&inputs)?), Some(q_bound(&inputs)))
    };
    let exact = if include_exact {
        match type_class_spectrum(pmf, n).and_then(|s| exact_source_limit(&s, eps)) {
            Ok(v) => Some(v),
            Err(Error::SizeCap { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(BoundRow {
        n,
        shannon: shannon_limit(&inputs),
        normal: normal_approx(&inputs),
        edgeworth,
        q_bound: qb,
        exact,
    })
}

fn sweep_setup(pmf: &SourcePmf, alpha_override: Option<f64>) -> Result<(InfoMoments, Option<f64>)> {
    let moments = info_moments(pmf, 3)?;
    let alpha = match alpha_override {
        Some(a) => Some(a),
        None if moments.is_degenerate() => None,
        None => Some(optimal_alpha(&moments)?.alpha),
    };
    Ok((moments, alpha))
}

/// Tabulates every bound over `n_values`. α comes from the override or from
/// T/(3V²). Rows are independent; with the `parallel` feature they run on
/// the rayon pool and the output is bitwise identical to
/// [`bound_sweep_seq`].
pub fn bound_sweep(
    pmf: &SourcePmf,
    eps: f64,
    n_values: &[u64],
    include_exact: bool,
    alpha_override: Option<f64>,
) -> Result<Vec<BoundRow>> {
    let (moments, alpha) = sweep_setup(pmf, alpha_override)?;
    #[cfg(feature = "parallel")]
    let rows = n_values
        .par_iter()
        .map(|&n| sweep_row(pmf, &moments, alpha, n, eps, include_exact))
        .collect::<Result<Vec<_>>>();
    #[cfg(not(feature = "parallel"))]
    let rows = n_values
        .iter()
        .map(|&n| sweep_row(pmf, &moments, alpha, n, eps, include_exact))
        .collect::<Result<Vec<_>>>();
    rows
}

/// Sequential twin of [`bound_sweep`].
pub fn bound_sweep_seq(
    pmf: &SourcePmf,
    eps: f64,
    n_values: &[u64],
    include_exact: bool,
    alpha_override: Option<f64>,
) -> Result<Vec<BoundRow>> {
    let (moments, alpha) = sweep_setup(pmf, alpha_override)?;
    n_values
        .iter()
        .map(|&n| sweep_row(pmf, &moments, alpha, n, eps, include_exact))
        .collect()
}
