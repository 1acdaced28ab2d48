//! Paired-sample analysis: mean difference, studentized bootstrap CI and the
//! Wilcoxon signed-rank test. Differences are always sketch minus WIMP.
//!
//! The bootstrap draws indices with `ChaCha8Rng::seed_from_u64(seed)` and
//! `gen_range(0..n)`, one replicate after another, so results are identical
//! across platforms for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Largest sample for which the exact null distribution is enumerated.
pub const EXACT_MAX_N: usize = 12;
/// Redraws allowed per bootstrap replicate whose resample has zero spread.
pub const MAX_REDRAWS_PER_REPLICATE: u32 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("sketch and wimp samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} pairs, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("differences have zero variance")]
    DegenerateSample,
    #[error("every difference is zero")]
    AllZeroDifferences,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("need at least one bootstrap replication")]
    NoReplications,
    #[error("resample kept coming out constant after {0} redraws")]
    TooManyRedraws(u32),
    #[error("non-finite value in samples")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSamples {
    pub sketch: Vec<f64>,
    pub wimp: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl PairedSamples {
    pub fn new(sketch: Vec<f64>, wimp: Vec<f64>) -> Result<Self, StatsError> {
        if sketch.len() != wimp.len() {
            return Err(StatsError::LengthMismatch(sketch.len(), wimp.len()));
        }
        if sketch.len() < 2 {
            return Err(StatsError::TooFew { need: 2, got: sketch.len() });
        }
        if sketch.iter().chain(&wimp).any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(PairedSamples { sketch, wimp, labels: None })
    }

    /// Pairs whose wimp value is zero and sketch value is `d`.
    pub fn from_differences(d: &[f64]) -> Result<Self, StatsError> {
        PairedSamples::new(d.to_vec(), vec![0.0; d.len()])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.sketch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sketch.is_empty()
    }

    pub fn differences(&self) -> Vec<f64> {
        self.sketch.iter().zip(&self.wimp).map(|(s, w)| s - w).collect()
    }

    pub fn swapped(&self) -> Self {
        PairedSamples { sketch: self.wimp.clone(), wimp: self.sketch.clone(), labels: self.labels.clone() }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn mean_difference(samples: &PairedSamples) -> f64 {
    mean(&samples.differences())
}

/// Linear-interpolation quantile of sorted data (Hyndman and Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeanDiffCI {
    pub mean_diff: f64,
    pub low: f64,
    pub high: f64,
    pub alpha: f64,
    pub replications: usize,
    pub seed: u64,
    /// Resamples thrown away because their spread was zero.
    pub redraws: u64,
}

pub fn bootstrap_ci_studentized(samples: &PairedSamples, replications: usize, alpha: f64, seed: u64) -> Result<MeanDiffCI, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    if replications == 0 {
        return Err(StatsError::NoReplications);
    }
    let d = samples.differences();
    let n = d.len();
    if n < 3 {
        return Err(StatsError::TooFew { need: 3, got: n });
    }
    let m = mean(&d);
    let sd = std_dev(&d);
    if !(sd > 0.0) {
        return Err(StatsError::DegenerateSample);
    }
    let root_n = (n as f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t_stats = Vec::with_capacity(replications);
    let mut resample = vec![0.0; n];
    let mut redraws = 0u64;
    for _ in 0..replications {
        let mut attempts = 0u32;
        loop {
            for slot in resample.iter_mut() {
                *slot = d[rng.gen_range(0..n)];
            }
            let sd_b = std_dev(&resample);
            if sd_b > 0.0 {
                t_stats.push((mean(&resample) - m) / (sd_b / root_n));
                break;
            }
            attempts += 1;
            redraws += 1;
            if attempts >= MAX_REDRAWS_PER_REPLICATE {
                return Err(StatsError::TooManyRedraws(attempts));
            }
        }
    }
    t_stats.sort_by(f64::total_cmp);
    let se = sd / root_n;
    let q_hi = quantile_sorted(&t_stats, 1.0 - alpha / 2.0);
    let q_lo = quantile_sorted(&t_stats, alpha / 2.0);
    Ok(MeanDiffCI { mean_diff: m, low: m - q_hi * se, high: m - q_lo * se, alpha, replications, seed, redraws })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WilcoxonResult {
    #[serde(rename = "W")]
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub n_used: usize,
    pub has_ties: bool,
    /// Two-sided p from the method named in `method`.
    pub p: f64,
    pub method: PMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_exact: Option<f64>,
    pub p_normal: f64,
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        groups.push(j - i + 1);
        i = j + 1;
    }
    groups
}

/// Two-sided exact p: share of the 2^n sign assignments whose smaller rank
/// sum is at most `w`.
pub fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len();
    let total: f64 = ranks.iter().sum();
    let mut hits = 0u64;
    for mask in 0u64..(1u64 << n) {
        let plus: f64 = ranks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum();
        if plus.min(total - plus) <= w + 1e-9 {
            hits += 1;
        }
    }
    (hits as f64 / (1u64 << n) as f64).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
pub fn normal_p(n: usize, w: f64, tie_sizes: &[usize]) -> f64 {
    let n = n as f64;
    let mu = n * (n + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t as f64).powi(3) - t as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - std_normal.cdf(z))).min(1.0)
}

pub fn wilcoxon_signed_rank(samples: &PairedSamples) -> Result<WilcoxonResult, StatsError> {
    let nonzero: Vec<f64> = samples.differences().into_iter().filter(|d| *d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    if nonzero.len() < 5 {
        return Err(StatsError::TooFew { need: 5, got: nonzero.len() });
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = nonzero.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let w = w_plus.min(w_minus);
    let ties = tie_groups(&abs);
    let has_ties = ties.iter().any(|&t| t > 1);
    let n_used = nonzero.len();

    let p_normal = normal_p(n_used, w, &ties);
    let p_exact = (n_used <= EXACT_MAX_N && !has_ties).then(|| exact_p(&ranks, w));
    let (p, method) = match p_exact {
        Some(p) => (p, PMethod::Exact),
        None => (p_normal, PMethod::Normal),
    };
    Ok(WilcoxonResult { w, w_plus, w_minus, n_used, has_ties, p, method, p_exact, p_normal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_difference_basics() {
        let s = PairedSamples::new(vec![3.0, 4.0, 5.0], vec![3.0, 4.0, 5.0]).unwrap();
        assert_eq!(mean_difference(&s), 0.0);
        let s = PairedSamples::new(vec![3.0, 6.0, 7.0], vec![1.0, 4.0, 5.0]).unwrap();
        assert_eq!(mean_difference(&s), 2.0);
        assert_eq!(mean_difference(&s.swapped()), -2.0);
        assert!(matches!(PairedSamples::new(vec![1.0], vec![1.0, 2.0]), Err(StatsError::LengthMismatch(1, 2))));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn quantile_type_seven() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert!((quantile_sorted(&xs, 0.5) - 2.5).abs() < 1e-12);
        assert!((quantile_sorted(&xs, 0.25) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_one_to_five() {
        let r = wilcoxon_signed_rank(&PairedSamples::from_differences(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.n_used, 5);
        assert_eq!(r.method, PMethod::Exact);
        assert_eq!(r.p, 0.0625);
    }

    #[test]
    fn wilcoxon_antisymmetric() {
        let d = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0];
        let r = wilcoxon_signed_rank(&PairedSamples::from_differences(&d).unwrap()).unwrap();
        assert_eq!(r.w, 21.0 / 2.0);
        assert_eq!(r.method, PMethod::Normal);
        assert!(r.p > 0.99);
    }

    #[test]
    fn wilcoxon_drops_zeros_and_errors() {
        let r = wilcoxon_signed_rank(&PairedSamples::from_differences(&[0.0, 1.0, 2.0, -3.0, 4.0, 5.0, 0.0]).unwrap()).unwrap();
        assert_eq!(r.n_used, 5);
        assert_eq!(r.w, 3.0);
        let zeros = PairedSamples::from_differences(&[0.0; 6]).unwrap();
        assert_eq!(wilcoxon_signed_rank(&zeros), Err(StatsError::AllZeroDifferences));
        let few = PairedSamples::from_differences(&[1.0, 2.0, 0.0]).unwrap();
        assert!(matches!(wilcoxon_signed_rank(&few), Err(StatsError::TooFew { .. })));
    }

    #[test]
    fn bootstrap_degenerate_and_deterministic() {
        let constant = PairedSamples::from_differences(&[2.0; 8]).unwrap();
        assert_eq!(bootstrap_ci_studentized(&constant, 100, 0.05, 1), Err(StatsError::DegenerateSample));
        let s = PairedSamples::from_differences(&[1.0, 4.0, -2.0, 3.0, 0.5, 2.0]).unwrap();
        let a = bootstrap_ci_studentized(&s, 2000, 0.05, 42).unwrap();
        let b = bootstrap_ci_studentized(&s, 2000, 0.05, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.low <= a.high);
        assert!(bootstrap_ci_studentized(&s, 2000, 1.5, 42).is_err());
        assert!(bootstrap_ci_studentized(&s, 0, 0.05, 42).is_err());
    }

    #[test]
    fn bootstrap_counts_redraws() {
        // with one outlier among equal values many resamples are constant
        let s = PairedSamples::from_differences(&[1.0, 1.0, 1.0, 5.0]).unwrap();
        let ci = bootstrap_ci_studentized(&s, 500, 0.1, 3).unwrap();
        assert!(ci.redraws > 0);
    }
}
