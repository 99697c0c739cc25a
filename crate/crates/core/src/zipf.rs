//! Discrete Zipf distribution over ranks `1..=n`:
//! `pmf(k) = k^-s / H(n, s)` with `H(n, s) = sum_{j=1..n} j^-s`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Generalized harmonic number `H(n, s)`.
///
/// Summed from the smallest term (rank `n`) up to rank 1; no asymptotic
/// expansion is used.
pub fn generalized_harmonic(n: usize, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::range("support size", n, ">= 1"));
    }
    Ok((1..=n).rev().map(|j| rank_weight(j, s)).sum())
}

/// Unnormalised weight `k^-s`.
#[inline]
pub fn rank_weight(k: usize, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        1.0 / k as f64
    } else {
        (k as f64).powf(-s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfModel {
    exponent: f64,
    support: usize,
    normalizer: f64,
}

impl ZipfModel {
    pub fn new(exponent: f64, support: usize) -> Result<Self> {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::range("Zipf exponent", exponent, "finite and >= 0"));
        }
        let normalizer = generalized_harmonic(support, exponent)?;
        Ok(Self {
            exponent,
            support,
            normalizer,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn support(&self) -> usize {
        self.support
    }

    /// `H(n, s)` for this model.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn pmf(&self, k: usize) -> Result<f64> {
        if k == 0 || k > self.support {
            return Err(Error::range("rank", k, format!("1..={}", self.support)));
        }
        Ok(self.pmf_unchecked(k))
    }

    #[inline]
    pub(crate) fn pmf_unchecked(&self, k: usize) -> f64 {
        rank_weight(k, self.exponent) / self.normalizer
    }

    /// All probabilities, index `k - 1` holding `pmf(k)`.
    pub fn pmf_vec(&self) -> Vec<f64> {
        (1..=self.support).map(|k| self.pmf_unchecked(k)).collect()
    }

    /// Log-likelihood `sum_k count_k * ln pmf(k)` of rank counts.
    pub fn log_likelihood(&self, counts: &[u64]) -> f64 {
        let ln_h = self.normalizer.ln();
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| c as f64 * (-self.exponent * ((i + 1) as f64).ln() - ln_h))
            .sum()
    }
}

/// Inverse-CDF sampler over a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(model: &ZipfModel) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=model.support)
            .map(|k| {
                acc += model.pmf_unchecked(k);
                acc
            })
            .collect();
        // The last bucket must absorb rounding so every u in [0, 1) maps to a rank.
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Self { cdf }
    }

    pub fn support(&self) -> usize {
        self.cdf.len()
    }

    /// One rank in `1..=n`, O(log n).
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u) + 1
    }
}

/// `count` i.i.d. ranks drawn from `model`, deterministic in `seed`.
pub fn zipf_sample(model: &ZipfModel, seed: u64, count: usize) -> Vec<usize> {
    let sampler = ZipfSampler::new(model);
    let mut rng = rng::stream(seed, 0);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

/// Histogram of ranks over `1..=support`; index `k - 1` counts rank `k`.
pub fn rank_counts(ranks: &[usize], support: usize) -> Vec<u64> {
    let mut counts = vec![0u64; support];
    for &r in ranks {
        counts[r - 1] += 1;
    }
    counts
}

const FIT_LOWER: f64 = 0.0;
const FIT_UPPER: f64 = 10.0;
const FIT_TOLERANCE: f64 = 1e-6;

/// Maximum-likelihood Zipf exponent for counts ordered by rank (index 0 is
/// rank 1). The support size is `rank_counts.len()`.
///
/// Golden-section search on `[0, 10]`; the log-likelihood is concave in `s`.
pub fn fit_zipf_exponent(rank_counts: &[u64]) -> Result<f64> {
    let nonzero = rank_counts.iter().filter(|&&c| c > 0).count();
    if nonzero < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 nonzero rank counts, got {nonzero}"
        )));
    }
    let n = rank_counts.len();
    let total: f64 = rank_counts.iter().map(|&c| c as f64).sum();
    let weighted_log_rank: f64 = rank_counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * ((i + 1) as f64).ln())
        .sum();
    let objective = |s: f64| -> f64 {
        // generalized_harmonic cannot fail for n >= 2.
        let h = generalized_harmonic(n, s).unwrap_or(f64::NAN);
        -s * weighted_log_rank - total * h.ln()
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (FIT_LOWER, FIT_UPPER);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > FIT_TOLERANCE {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let mid = 0.5 * (a + b);
    // Boundary maxima: prefer the endpoint when it beats the interior point.
    let best = [FIT_LOWER, mid, FIT_UPPER]
        .into_iter()
        .map(|s| (s, objective(s)))
        .fold((mid, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    Ok(best.0)
}
