//! Monte Carlo sampling of the block information fluctuation W_n.
//!
//! Every sample is produced by a counter-keyed ChaCha8 stream: the key is
//! (seed, n, sample_index, domain tag), so sample i is a pure function of
//! its coordinates. Parallel and sequential batch paths therefore return
//! bitwise-identical vectors, and reductions over them stay deterministic
//! by summing in index order.

use crate::error::{Error, Result};
use crate::numerics::stable_sum;
use crate::qalgebra::{fluctuation_term, scaling_q, CentralizedMap};
use crate::source::{block_moments, info_moments, SourcePmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Domain-separation tag mixed into every sampling key, so no other
/// subsystem can collide with this stream family.
const DOMAIN_TAG: u64 = 0x666c_7563_7475_6174;

/// Knobs shared by the Monte Carlo entry points.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Blocklength grid for scaling fits; strictly increasing, spanning at
    /// least two decades.
    pub n_grid: Vec<u64>,
    /// Highest series order fitted by [`estimate_term_scaling`].
    pub max_k: usize,
    /// Deformation rate: q_n carries 1 − q_n = α/n.
    pub alpha: f64,
}

/// One fitted ln sd vs ln n regression line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub k: usize,
    pub slope: f64,
    pub stderr: f64,
    pub expected: f64,
}

fn sampling_key(seed: u64, n: u64, index: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&n.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(&DOMAIN_TAG.to_le_bytes());
    key
}

/// One draw of W_n = S_n − nH₁: n symbols by cumulative inversion, folded
/// into per-symbol counts, then Σ counts·(info − H₁).
pub fn sample_w_n(pmf: &SourcePmf, n: u64, sample_index: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(sampling_key(seed, n, sample_index));
    let probs = pmf.probs();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut sym = probs.len() - 1;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                sym = i;
                break;
            }
        }
        counts[sym] += 1;
    }
    let h1 = pmf.h1();
    let mut w = 0.0;
    for (&c, &l) in counts.iter().zip(pmf.info()) {
        w += c as f64 * (l - h1);
    }
    w
}

/// `cfg.samples` draws of W_n, indexed 0..samples. Runs on the rayon pool
/// with the `parallel` feature; output is bitwise identical either way.
pub fn sample_fluctuations(pmf: &SourcePmf, n: u64, cfg: &McConfig) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| sample_w_n(pmf, n, i, cfg.seed))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cfg.samples).map(|i| sample_w_n(pmf, n, i, cfg.seed)).collect()
    }
}

/// Sequential twin of [`sample_fluctuations`].
pub fn sample_fluctuations_seq(pmf: &SourcePmf, n: u64, cfg: &McConfig) -> Vec<f64> {
    (0..cfg.samples).map(|i| sample_w_n(pmf, n, i, cfg.seed)).collect()
}

fn sample_sd(values: &[f64], mean: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|&x| (x - mean) * (x - mean)).collect();
    (stable_sum(&sq) / (values.len() as f64 - 1.0)).sqrt()
}

/// Draws W_n, maps each sample through the centralizing transform at
/// q_n = 1 − α/n, and returns (empirical mean, z-score of the gap to nH₁).
/// A zero standard error (constant samples) yields z = 0.
pub fn verify_centralization(pmf: &SourcePmf, n: u64, cfg: &McConfig) -> Result<(f64, f64)> {
    if cfg.samples < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: cfg.samples });
    }
    let q = scaling_q(cfg.alpha, n);
    let map = CentralizedMap::new(pmf, n, &q)?;
    let ws = sample_fluctuations(pmf, n, cfg);
    let mapped = ws.iter().map(|&w| map.apply_w(w)).collect::<Result<Vec<_>>>()?;
    let count = mapped.len() as f64;
    let mean = stable_sum(&mapped) / count;
    let se = sample_sd(&mapped, mean) / count.sqrt();
    let z = if se == 0.0 { 0.0 } else { (mean - map.center()) / se };
    Ok((mean, z))
}

/// Least squares of ln y on ln x: (slope, stderr of slope).
fn ols_loglog(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let m = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let mx = stable_sum(&lx) / m;
    let my = stable_sum(&ly) / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || !sxy.is_finite() {
        return Err(Error::DegenerateFit("log-grid has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut sse = 0.0;
    for (&x, &y) in lx.iter().zip(&ly) {
        let r = y - intercept - slope * x;
        sse += r * r;
    }
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

/// Fits how the sampled spread of each series term scales with n.
///
/// For term k at q_n = 1 − α/n the standard deviation behaves as
/// n^{1 − k/2}: the k = 1 term is W_n itself (sd √(nV)), the k = 2 term is
/// n-free, and every higher term decays. Returns one fit per k ≤ max_k.
pub fn estimate_term_scaling(pmf: &SourcePmf, cfg: &McConfig) -> Result<Vec<SlopeEstimate>> {
    if cfg.samples < 10_000 {
        return Err(Error::InsufficientSamples { needed: 10_000, got: cfg.samples });
    }
    if cfg.n_grid.len() < 4 {
        return Err(Error::Domain(format!(
            "scaling fit needs at least 4 grid points, got {}",
            cfg.n_grid.len()
        )));
    }
    if cfg.n_grid.windows(2).any(|p| p[1] <= p[0]) || cfg.n_grid[0] == 0 {
        return Err(Error::Domain("n_grid must be strictly increasing and positive".into()));
    }
    let span = cfg.n_grid[cfg.n_grid.len() - 1] as f64 / cfg.n_grid[0] as f64;
    if span < 100.0 {
        return Err(Error::Domain(format!(
            "n_grid must span at least two decades, got ratio {span}"
        )));
    }
    if !(2..=6).contains(&cfg.max_k) {
        return Err(Error::MomentOrder { requested: cfg.max_k, available: 6 });
    }
    let moments = info_moments(pmf, cfg.max_k.max(3))?;
    // sds[k − 1][grid point]
    let mut sds = vec![Vec::with_capacity(cfg.n_grid.len()); cfg.max_k];
    for &n in &cfg.n_grid {
        let block = block_moments(&moments, n, cfg.max_k)?;
        let q_n = scaling_q(cfg.alpha, n);
        let ws = sample_fluctuations(pmf, n, cfg);
        for k in 1..=cfg.max_k {
            let terms: Vec<f64> = if k == 1 {
                ws.clone()
            } else {
                ws.iter()
                    .map(|&w| fluctuation_term(w, &q_n, k, &block))
                    .collect::<Result<Vec<_>>>()?
            };
            let mean = stable_sum(&terms) / terms.len() as f64;
            let sd = sample_sd(&terms, mean);
            if !(sd > 0.0) || !sd.is_finite() {
                return Err(Error::DegenerateFit(format!(
                    "term k={k} has spread {sd} at n={n}; nothing to regress"
                )));
            }
            sds[k - 1].push(sd);
        }
    }
    let xs: Vec<f64> = cfg.n_grid.iter().map(|&n| n as f64).collect();
    (1..=cfg.max_k)
        .map(|k| {
            let (slope, stderr) = ols_loglog(&xs, &sds[k - 1])?;
            Ok(SlopeEstimate { k, slope, stderr, expected: 1.0 - k as f64 / 2.0 })
        })
        .collect()
}

/// Empirical ε-quantile of the centralized deformed information at
/// q_n = 1 − α/n: maps every W_n sample, sorts, and takes the
/// ⌈(1 − ε)·samples⌉-th order statistic. Requires samples ≥ 100/ε.
pub fn empirical_q_quantile(pmf: &SourcePmf, n: u64, eps: f64, cfg: &McConfig) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let needed = (100.0 / eps).ceil() as u64;
    if cfg.samples < needed {
        return Err(Error::InsufficientSamples { needed, got: cfg.samples });
    }
    let q = scaling_q(cfg.alpha, n);
    let map = CentralizedMap::new(pmf, n, &q)?;
    let ws = sample_fluctuations(pmf, n, cfg);
    let mut mapped = ws.iter().map(|&w| map.apply_w(w)).collect::<Result<Vec<_>>>()?;
    mapped.sort_by(|a, b| a.total_cmp(b));
    let rank = ((1.0 - eps) * cfg.samples as f64).ceil() as usize;
    let idx = rank.clamp(1, mapped.len()) - 1;
    Ok(mapped[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{binary_spectrum, exact_q_limit, exact_source_limit};

    fn bernoulli(p: f64) -> SourcePmf {
        SourcePmf::new(vec![p, 1.0 - p]).unwrap()
    }

    fn cfg(samples: u64, alpha: f64) -> McConfig {
        McConfig { samples, seed: 42, n_grid: vec![10, 50, 250, 1250], max_k: 3, alpha }
    }

    #[test]
    fn uniform_source_fluctuates_not_at_all() {
        let uni = SourcePmf::new(vec![0.25; 4]).unwrap();
        for i in 0..50 {
            assert_eq!(sample_w_n(&uni, 30, i, 7), 0.0);
        }
        let (mean, z) = verify_centralization(&uni, 30, &cfg(100, 1.0)).unwrap();
        assert!((mean - 30.0 * uni.h1()).abs() < 1e-9);
        assert_eq!(z, 0.0, "zero spread must short-circuit to z = 0");
    }

    #[test]
    fn sampling_is_a_pure_function_of_its_key() {
        let pmf = bernoulli(0.11);
        let a = sample_w_n(&pmf, 100, 17, 42);
        let b = sample_w_n(&pmf, 100, 17, 42);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(
            sample_w_n(&pmf, 100, 18, 42).to_bits(),
            a.to_bits(),
            "neighboring indices draw different symbols"
        );
        assert_ne!(sample_w_n(&pmf, 100, 17, 43).to_bits(), a.to_bits());
        let par = sample_fluctuations(&pmf, 64, &cfg(500, 0.0));
        let seq = sample_fluctuations_seq(&pmf, 64, &cfg(500, 0.0));
        assert_eq!(par.len(), seq.len());
        for (x, y) in par.iter().zip(&seq) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn sample_mean_within_clt_band() {
        let pmf = bernoulli(0.11);
        let mo = info_moments(&pmf, 3).unwrap();
        let c = cfg(20_000, 0.0);
        let ws = sample_fluctuations(&pmf, 1000, &c);
        let mean = stable_sum(&ws) / ws.len() as f64;
        let band = 4.0 * (1000.0 * mo.varentropy / ws.len() as f64).sqrt();
        assert!(mean.abs() <= band, "mean {mean} outside ±{band}");
    }

    #[test]
    fn empirical_cdf_tracks_exact_spectrum() {
        // Dvoretzky–Kiefer–Wolfowitz band at confidence 1 − 10⁻³ for the
        // pinned seed; probe levels sit between atoms to dodge boundary
        // rounding.
        let pmf = bernoulli(0.11);
        let n = 50u64;
        let c = cfg(20_000, 0.0);
        let spec = binary_spectrum(0.11, n).unwrap();
        let n_h1 = n as f64 * pmf.h1();
        let mut samples: Vec<f64> = sample_fluctuations(&pmf, n, &c)
            .iter()
            .map(|w| w + n_h1)
            .collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        let band = (2000.0f64.ln() / (2.0 * samples.len() as f64)).sqrt();
        let atoms = spec.atoms();
        let mut checked = 0;
        for pair in atoms.windows(2) {
            let level = 0.5 * (pair[0].value + pair[1].value);
            let exact = spec.cdf(level);
            if !(0.001..=0.999).contains(&exact) {
                continue;
            }
            let emp = samples.partition_point(|&s| s <= level) as f64 / samples.len() as f64;
            assert!(
                (emp - exact).abs() <= band,
                "level {level}: empirical {emp} vs exact {exact}, band {band}"
            );
            checked += 1;
        }
        assert!(checked >= 10, "probe set unexpectedly thin: {checked}");
    }

    #[test]
    fn centralization_z_score_within_range() {
        let pmf = bernoulli(0.11);
        let (mean, z) = verify_centralization(&pmf, 100, &cfg(20_000, 1.2703)).unwrap();
        assert!(z.abs() <= 4.0, "z = {z}");
        let center = 100.0 * pmf.h1();
        assert!((mean - center).abs() / center < 0.01, "mean {mean} vs center {center}");
        assert!(matches!(
            verify_centralization(&pmf, 100, &cfg(1, 1.0)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn quantile_at_shannon_point_matches_spectrum() {
        let pmf = bernoulli(0.11);
        let n = 50u64;
        let emp = empirical_q_quantile(&pmf, n, 0.1, &cfg(10_000, 0.0)).unwrap();
        let exact = exact_source_limit(&binary_spectrum(0.11, n).unwrap(), 0.1).unwrap();
        assert!(
            (emp - exact).abs() <= 1e-9 * exact,
            "empirical quantile {emp} must land on the exact atom {exact}"
        );
    }

    #[test]
    fn deformed_quantile_within_cdf_bracket() {
        // The empirical quantile must fall between the exact deformed
        // quantiles at eps ± 3·se(eps), se from the binomial CDF count.
        let pmf = bernoulli(0.11);
        let (n, eps) = (500u64, 0.01);
        let alpha = 1.2703;
        let c = cfg(20_000, alpha);
        let emp = empirical_q_quantile(&pmf, n, eps, &c).unwrap();
        let spec = binary_spectrum(0.11, n).unwrap();
        let q = scaling_q(alpha, n);
        let se = (eps * (1.0 - eps) / c.samples as f64).sqrt();
        let hi = exact_q_limit(&spec, &pmf, &q, eps - 3.0 * se).unwrap();
        let lo = exact_q_limit(&spec, &pmf, &q, eps + 3.0 * se).unwrap();
        // slack: mapped samples reach an atom's value along a different
        // floating-point route than the exact spectrum does
        assert!(
            emp >= lo - 1e-9 * lo.abs() && emp <= hi + 1e-9 * hi.abs(),
            "empirical {emp} outside exact bracket [{lo}, {hi}]"
        );
    }

    #[test]
    fn median_quantile_bracket() {
        let pmf = bernoulli(0.11);
        let n = 100u64;
        let emp = empirical_q_quantile(&pmf, n, 0.5, &cfg(10_000, 0.0)).unwrap();
        let spec = binary_spectrum(0.11, n).unwrap();
        let hi = exact_source_limit(&spec, 0.48).unwrap();
        let lo = exact_source_limit(&spec, 0.52).unwrap();
        // both probes may name the same atom; allow for the fp gap between
        // the sampled and enumerated routes to its value
        assert!(
            emp >= lo - 1e-9 * lo.abs() && emp <= hi + 1e-9 * hi.abs(),
            "median {emp} outside [{lo}, {hi}]"
        );
    }

    #[test]
    fn quantile_sample_floor_enforced() {
        let pmf = bernoulli(0.11);
        let err = empirical_q_quantile(&pmf, 50, 0.01, &cfg(5000, 0.0));
        match err {
            Err(Error::InsufficientSamples { needed, got }) => {
                assert_eq!(needed, 10_000);
                assert_eq!(got, 5000);
            }
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
        assert!(empirical_q_quantile(&pmf, 50, 2.0, &cfg(10_000, 0.0)).is_err());
    }

    #[test]
    fn scaling_fit_validates_its_grid() {
        let pmf = bernoulli(0.11);
        let mut c = cfg(10_000, 1.2703);
        c.n_grid = vec![16, 64, 256];
        assert!(estimate_term_scaling(&pmf, &c).is_err(), "too few grid points");
        c.n_grid = vec![16, 64, 64, 256];
        assert!(estimate_term_scaling(&pmf, &c).is_err(), "not strictly increasing");
        c.n_grid = vec![16, 32, 64, 128];
        assert!(estimate_term_scaling(&pmf, &c).is_err(), "span under two decades");
        c.n_grid = vec![16, 64, 256, 1600];
        c.max_k = 7;
        assert!(estimate_term_scaling(&pmf, &c).is_err(), "order beyond supported range");
        c.max_k = 3;
        c.samples = 5000;
        assert!(matches!(
            estimate_term_scaling(&pmf, &c),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn scaling_fit_recovers_expected_slopes() {
        let pmf = bernoulli(0.11);
        let fits = estimate_term_scaling(&pmf, &cfg(10_000, 1.2703)).unwrap();
        assert_eq!(fits.len(), 3);
        for fit in &fits {
            assert!(
                (fit.slope - fit.expected).abs() < 0.15,
                "k={}: slope {} vs expected {}",
                fit.k,
                fit.slope,
                fit.expected
            );
            assert!(fit.stderr.is_finite() && fit.stderr > 0.0);
        }
        assert_eq!(fits[0].expected, 0.5);
        assert_eq!(fits[1].expected, 0.0);
        assert_eq!(fits[2].expected, -0.5);
    }

    #[test]
    fn degenerate_sources_cannot_be_fit() {
        let uni = SourcePmf::new(vec![0.25; 4]).unwrap();
        assert!(matches!(
            estimate_term_scaling(&uni, &cfg(10_000, 1.0)),
            Err(Error::DegenerateFit(_))
        ));
    }
}
