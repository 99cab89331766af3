//! Exact block self-information spectra.
//!
//! A spectrum is the discrete law of S_n = −ln P(Xⁿ): finitely many atoms
//! (value, log-probability), sorted by value. For memoryless sources the
//! atoms are type classes, so the spectrum stays enumerable long after the
//! 2^n (or m^n) outcome space stops being so.

use crate::error::{Error, Result};
use crate::numerics::{log_gamma, log_sum_exp, NeumaierSum};
use crate::qalgebra::{CentralizedMap, QParam};
use crate::source::SourcePmf;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Relative gap at or below which two spectrum values are one atom. Values
/// of distinct type classes are separated by symbol-information gaps many
/// orders above this; values inside one class differ only by summation
/// rounding, many orders below it.
pub const MERGE_REL_TOL: f64 = 1e-12;

/// Largest n accepted by [`binary_spectrum`].
pub const BINARY_N_CAP: u64 = 1_000_000;

/// Largest composition count C(n+m−1, m−1) accepted by type-class
/// enumeration.
pub const TYPE_CLASS_CAP: u128 = 10_000_000;

/// Largest outcome count m^n accepted by [`brute_force_spectrum`].
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// One atom of the block information law: S_n takes `value` (nats) with
/// probability e^{log_prob}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumAtom {
    pub value: f64,
    pub log_prob: f64,
}

/// The law of S_n as a sorted list of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: u64,
    atoms: Vec<SpectrumAtom>,
}

impl Spectrum {
    /// Sorts atoms by value and merges runs of near-equal values. Merging
    /// chains through predecessors: an atom joins the current group when it
    /// sits within `MERGE_REL_TOL` (relative) of the group's last member.
    /// The merged atom keeps the group's first value; probabilities combine
    /// in the log domain.
    pub fn from_unsorted(n: u64, mut atoms: Vec<SpectrumAtom>) -> Spectrum {
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut merged: Vec<SpectrumAtom> = Vec::new();
        let mut group_logs: Vec<f64> = Vec::new();
        let mut group_first = 0.0_f64;
        let mut group_last = 0.0_f64;
        for atom in atoms {
            if group_logs.is_empty() {
                group_first = atom.value;
                group_last = atom.value;
                group_logs.push(atom.log_prob);
                continue;
            }
            let scale = atom.value.abs().max(group_last.abs());
            if (atom.value - group_last).abs() <= MERGE_REL_TOL * scale {
                group_last = atom.value;
                group_logs.push(atom.log_prob);
            } else {
                merged.push(SpectrumAtom {
                    value: group_first,
                    log_prob: log_sum_exp(&group_logs).expect("group is non-empty"),
                });
                group_logs.clear();
                group_first = atom.value;
                group_last = atom.value;
                group_logs.push(atom.log_prob);
            }
        }
        if !group_logs.is_empty() {
            merged.push(SpectrumAtom {
                value: group_first,
                log_prob: log_sum_exp(&group_logs).expect("group is non-empty"),
            });
        }
        Spectrum { n, atoms: merged }
    }

    /// Wraps atoms that are already sorted by value, without merging.
    /// Intended for images of a spectrum under a strictly increasing map,
    /// where re-merging could fuse atoms the original kept apart.
    pub fn from_atoms_sorted(n: u64, atoms: Vec<SpectrumAtom>) -> Result<Spectrum> {
        for pair in atoms.windows(2) {
            if pair[1].value.total_cmp(&pair[0].value) == std::cmp::Ordering::Less {
                return Err(Error::Domain(format!(
                    "atoms must be sorted by value; {} precedes {}",
                    pair[0].value, pair[1].value
                )));
            }
        }
        Ok(Spectrum { n, atoms })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn atoms(&self) -> &[SpectrumAtom] {
        &self.atoms
    }

    /// Σ of all atom probabilities; 1 up to enumeration rounding.
    pub fn total_mass(&self) -> f64 {
        if self.atoms.is_empty() {
            return 0.0;
        }
        let logs: Vec<f64> = self.atoms.iter().map(|a| a.log_prob).collect();
        log_sum_exp(&logs).expect("non-empty").exp()
    }

    /// P[S_n ≤ level], accumulated in value order.
    pub fn cdf(&self, level: f64) -> f64 {
        let mut cum = NeumaierSum::default();
        for atom in &self.atoms {
            if atom.value <= level {
                cum.add(atom.log_prob.exp());
            } else {
                break;
            }
        }
        cum.value()
    }
}

/// Free-function form of [`Spectrum::cdf`].
pub fn spectrum_cdf(spectrum: &Spectrum, level: f64) -> f64 {
    spectrum.cdf(level)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Spectrum of n iid Bernoulli(p) symbols: n+1 atoms indexed by the count k
/// of the probability-p symbol, with log C(n,k) through ln Γ.
pub fn binary_spectrum(p: f64, n: u64) -> Result<Spectrum> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("binary_spectrum requires p in (0,1), got {p}")));
    }
    if n == 0 {
        return Err(Error::Domain("binary_spectrum requires n >= 1".into()));
    }
    if n > BINARY_N_CAP {
        return Err(Error::SizeCap {
            what: "binary spectrum size n",
            size: u128::from(n),
            cap: u128::from(BINARY_N_CAP),
        });
    }
    let (ln_p, ln_w) = (p.ln(), (1.0 - p).ln());
    let lg: Vec<f64> = ln_factorial_table(n)?;
    let nf = n as f64;
    let mut atoms = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let kf = k as f64;
        atoms.push(SpectrumAtom {
            value: -(kf * ln_p + (nf - kf) * ln_w),
            log_prob: lg[n as usize] - lg[k as usize] - lg[(n - k) as usize]
                + kf * ln_p
                + (nf - kf) * ln_w,
        });
    }
    Ok(Spectrum::from_unsorted(n, atoms))
}

/// lg[j] = ln j! for j = 0..=n.
fn ln_factorial_table(n: u64) -> Result<Vec<f64>> {
    (0..=n).map(|j| log_gamma(j as f64 + 1.0)).collect()
}

/// C(n + m − 1, m − 1): the number of type classes. None once it exceeds
/// u128.
fn compositions_count(n: u64, m: usize) -> Option<u128> {
    let r = (m - 1) as u128;
    let top = n as u128 + r;
    let mut c: u128 = 1;
    for i in 0..r {
        c = c.checked_mul(top - i)?;
        c /= i + 1;
    }
    Some(c)
}

struct TypeClassCtx {
    info: Vec<f64>,
    log_p: Vec<f64>,
    lg: Vec<f64>, // ln j!
    n: u64,
}

impl TypeClassCtx {
    fn new(pmf: &SourcePmf, n: u64) -> Result<Self> {
        Ok(Self {
            info: pmf.info().to_vec(),
            log_p: pmf.probs().iter().map(|&p| p.ln()).collect(),
            lg: ln_factorial_table(n)?,
            n,
        })
    }

    /// All type classes with k₁ = `k1`, in lexicographic order of the
    /// remaining counts.
    fn chunk(&self, k1: u64) -> Vec<SpectrumAtom> {
        let mut out = Vec::new();
        let k1f = k1 as f64;
        self.fill(
            1,
            self.n - k1,
            k1f * self.info[0],
            self.lg[self.n as usize] + k1f * self.log_p[0] - self.lg[k1 as usize],
            &mut out,
        );
        out
    }

    fn fill(&self, coord: usize, n_left: u64, val: f64, logp: f64, out: &mut Vec<SpectrumAtom>) {
        if coord == self.info.len() - 1 {
            let k = n_left as f64;
            out.push(SpectrumAtom {
                value: val + k * self.info[coord],
                log_prob: logp + k * self.log_p[coord] - self.lg[n_left as usize],
            });
            return;
        }
        for k in 0..=n_left {
            self.fill(
                coord + 1,
                n_left - k,
                val + k as f64 * self.info[coord],
                logp + k as f64 * self.log_p[coord] - self.lg[k as usize],
                out,
            );
        }
    }

    fn check_cap(pmf: &SourcePmf, n: u64) -> Result<()> {
        let count = compositions_count(n, pmf.alphabet_size()).unwrap_or(u128::MAX);
        if count > TYPE_CLASS_CAP {
            return Err(Error::SizeCap {
                what: "type-class count",
                size: count,
                cap: TYPE_CLASS_CAP,
            });
        }
        Ok(())
    }
}

/// Exact spectrum over all type classes of n symbols. With the `parallel`
/// feature the k₁ slices run on the rayon pool; the result is bitwise
/// identical to [`type_class_spectrum_seq`].
pub fn type_class_spectrum(pmf: &SourcePmf, n: u64) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain("type_class_spectrum requires n >= 1".into()));
    }
    TypeClassCtx::check_cap(pmf, n)?;
    let ctx = TypeClassCtx::new(pmf, n)?;
    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<SpectrumAtom>> = (0..=n).into_par_iter().map(|k1| ctx.chunk(k1)).collect();
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<SpectrumAtom>> = (0..=n).map(|k1| ctx.chunk(k1)).collect();
    Ok(Spectrum::from_unsorted(n, chunks.concat()))
}

/// Sequential twin of [`type_class_spectrum`].
pub fn type_class_spectrum_seq(pmf: &SourcePmf, n: u64) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain("type_class_spectrum requires n >= 1".into()));
    }
    TypeClassCtx::check_cap(pmf, n)?;
    let ctx = TypeClassCtx::new(pmf, n)?;
    let chunks: Vec<Vec<SpectrumAtom>> = (0..=n).map(|k1| ctx.chunk(k1)).collect();
    Ok(Spectrum::from_unsorted(n, chunks.concat()))
}

/// Accumulates (value, probability) pairs into value-sorted groups, merging
/// on insert within the relative tolerance. Probabilities add in the linear
/// domain under compensated summation.
struct LinearAccum {
    entries: Vec<(f64, NeumaierSum)>,
}

impl LinearAccum {
    fn new() -> Self {
        Self { entries: Vec::new() }
    }

    fn add(&mut self, value: f64, prob: f64) {
        let idx = self.entries.partition_point(|e| e.0 < value);
        let near = |a: f64, b: f64| (a - b).abs() <= MERGE_REL_TOL * a.abs().max(b.abs());
        if idx < self.entries.len() && near(self.entries[idx].0, value) {
            self.entries[idx].1.add(prob);
            return;
        }
        if idx > 0 && near(self.entries[idx - 1].0, value) {
            self.entries[idx - 1].1.add(prob);
            return;
        }
        let mut sum = NeumaierSum::default();
        sum.add(prob);
        self.entries.insert(idx, (value, sum));
    }
}

/// Reference spectrum by enumerating all m^n outcomes, one by one. Exists to
/// validate the type-class path; capped at 10^7 outcomes.
pub fn brute_force_spectrum(pmf: &SourcePmf, n: u64) -> Result<Spectrum> {
    if n == 0 {
        return Err(Error::Domain("brute_force_spectrum requires n >= 1".into()));
    }
    let m = pmf.alphabet_size();
    let count = if n >= 128 {
        None
    } else {
        (m as u128).checked_pow(n as u32)
    };
    let count = count.unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_CAP {
        return Err(Error::SizeCap { what: "outcome count m^n", size: count, cap: BRUTE_FORCE_CAP });
    }
    let mut acc = LinearAccum::new();
    brute_into(pmf.info(), pmf.probs(), n, 0.0, 1.0, &mut acc);
    let atoms = acc
        .entries
        .into_iter()
        .map(|(value, prob)| SpectrumAtom { value, log_prob: prob.value().ln() })
        .collect();
    Ok(Spectrum::from_unsorted(n, atoms))
}

fn brute_into(info: &[f64], probs: &[f64], left: u64, val: f64, prob: f64, acc: &mut LinearAccum) {
    if left == 0 {
        acc.add(val, prob);
        return;
    }
    for s in 0..info.len() {
        brute_into(info, probs, left - 1, val + info[s], prob * probs[s], acc);
    }
}

// ---------------------------------------------------------------------------
// Quantiles
// ---------------------------------------------------------------------------

/// The achieving atom of an ε-quantile query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDetail {
    pub value: f64,
    pub atom_index: usize,
    pub cumulative: f64,
}

/// Smallest atom value v with P[S_n ≤ v] ≥ 1 − ε, together with its index
/// and the cumulative probability reached there. If rounding leaves the
/// total mass a hair below 1 − ε, the top atom is the answer.
pub fn exact_limit_detail(spectrum: &Spectrum, eps: f64) -> Result<LimitDetail> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    if spectrum.atoms.is_empty() {
        return Err(Error::Domain("spectrum has no atoms".into()));
    }
    let target = 1.0 - eps;
    let mut cum = NeumaierSum::default();
    let mut detail = LimitDetail { value: f64::NAN, atom_index: 0, cumulative: 0.0 };
    for (i, atom) in spectrum.atoms.iter().enumerate() {
        cum.add(atom.log_prob.exp());
        detail = LimitDetail { value: atom.value, atom_index: i, cumulative: cum.value() };
        if detail.cumulative >= target {
            return Ok(detail);
        }
    }
    Ok(detail)
}

/// Exact ε-achievable representation length: the value of
/// [`exact_limit_detail`].
pub fn exact_source_limit(spectrum: &Spectrum, eps: f64) -> Result<f64> {
    Ok(exact_limit_detail(spectrum, eps)?.value)
}

/// ε-quantile of the centralized deformed information. The centralizing map
/// is strictly increasing, so it commutes with the quantile: transform the
/// achieving atom rather than the whole spectrum. At q = 1 this returns
/// [`exact_source_limit`] bit for bit.
pub fn exact_q_limit(spectrum: &Spectrum, pmf: &SourcePmf, q: &QParam, eps: f64) -> Result<f64> {
    let detail = exact_limit_detail(spectrum, eps)?;
    CentralizedMap::new(pmf, spectrum.n(), q)?.apply(detail.value)
}
