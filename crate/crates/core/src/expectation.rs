//! Closed-form expectations of similarity and neighbourhood sizes under
//! Zipf-distributed clicks.
//!
//! Two weightings are supported. [`Mode::PaperRaw`] uses the unnormalised
//! rank weights `1/i^s` exactly as the textbook formulas write them; those
//! weights are not probabilities. [`Mode::Normalized`] replaces them with a
//! coherent model: a user who makes `N` Zipf clicks contains item `i` with
//! probability `π_i = 1 - (1 - pmf(i))^N`, independently across items
//! (Bernoulli inclusion). Only the normalised mode can be checked by
//! simulation.
//!
//! The nested sums over `i_1 < i_2 < … < i_t` of products of per-item weights
//! are elementary symmetric polynomials `e_t(q)`, evaluated here by an
//! `O(M·T)` dynamic programme instead of `O(M^t)` loops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zipf::{rank_weight, ZipfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PaperRaw,
    Normalized,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PaperRaw => "paper-raw",
            Mode::Normalized => "normalized",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-raw" | "raw" => Ok(Mode::PaperRaw),
            "normalized" => Ok(Mode::Normalized),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Parameters of the user-pair and neighbourhood expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationConfig {
    /// Item population `M`.
    pub items: usize,
    /// Click-set size of user A (`N_A`); also the per-user click count used by
    /// the item-side formulas.
    pub clicks_a: usize,
    /// Click-set size of user B (`N_B`).
    pub clicks_b: usize,
    /// User population `W`.
    pub users: usize,
    /// Zipf exponent `s`.
    pub exponent: f64,
    pub mode: Mode,
}

impl ExpectationConfig {
    pub fn new(items: usize, clicks_a: usize, clicks_b: usize, users: usize, exponent: f64, mode: Mode) -> Self {
        Self {
            items,
            clicks_a,
            clicks_b,
            users,
            exponent,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.items == 0 {
            return Err(Error::range("item count M", self.items, ">= 1"));
        }
        let limit = format!("1..={}", self.items);
        if self.clicks_a == 0 || self.clicks_a > self.items {
            return Err(Error::range("click count N_A", self.clicks_a, limit));
        }
        if self.clicks_b == 0 || self.clicks_b > self.items {
            return Err(Error::range("click count N_B", self.clicks_b, limit));
        }
        if self.users == 0 {
            return Err(Error::range("user count W", self.users, ">= 1"));
        }
        if !self.exponent.is_finite() || self.exponent < 0.0 {
            return Err(Error::range("Zipf exponent", self.exponent, "finite and >= 0"));
        }
        Ok(())
    }

    pub fn zipf(&self) -> Result<ZipfModel> {
        ZipfModel::new(self.exponent, self.items)
    }

    /// Truncation degree `T = min(N_A, N_B)`.
    pub fn overlap_degree(&self) -> usize {
        self.clicks_a.min(self.clicks_b)
    }

    fn check_rank(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.items {
            Err(Error::range("rank", i, format!("1..={}", self.items)))
        } else {
            Ok(())
        }
    }
}

/// `1 - (1 - p)^draws`: probability an item of per-draw probability `p` is hit
/// at least once in `draws` independent draws.
pub fn inclusion_probability(p: f64, draws: usize) -> f64 {
    if draws == 0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    -f64::exp_m1(draws as f64 * f64::ln_1p(-p))
}

/// Inclusion probabilities `π_1..π_M` for a user making `draws` clicks.
pub fn inclusion_probabilities(model: &ZipfModel, draws: usize) -> Vec<f64> {
    model
        .pmf_vec()
        .into_iter()
        .map(|p| inclusion_probability(p, draws))
        .collect()
}

/// Weight of the `i`-th most popular item in one user's click log:
/// `1/i^s` in paper-raw mode, `pmf(i)` when normalised.
pub fn click_probability(i: usize, config: &ExpectationConfig) -> Result<f64> {
    config.validate()?;
    config.check_rank(i)?;
    Ok(match config.mode {
        Mode::PaperRaw => rank_weight(i, config.exponent),
        Mode::Normalized => config.zipf()?.pmf(i)?,
    })
}

/// Per-item co-occurrence weights `q_1..q_M`: `(1/i^s)^2` in paper-raw mode,
/// `π_i^A · π_i^B` when normalised.
pub fn overlap_weights(config: &ExpectationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    Ok(match config.mode {
        Mode::PaperRaw => (1..=config.items)
            .map(|i| {
                let w = rank_weight(i, config.exponent);
                w * w
            })
            .collect(),
        Mode::Normalized => {
            let model = config.zipf()?;
            let pa = inclusion_probabilities(&model, config.clicks_a);
            let pb = inclusion_probabilities(&model, config.clicks_b);
            pa.iter().zip(&pb).map(|(a, b)| a * b).collect()
        }
    })
}

/// Elementary symmetric polynomials `e_0..e_T` of `q` (index `t` holds `e_t`,
/// so `e_0 = 1`).
///
/// `E[j][t] = E[j-1][t] + q_j · E[j-1][t-1]`, updated in place from high degree
/// to low; `O(len(q) · T)`.
pub fn elementary_symmetric(q: &[f64], max_degree: usize) -> Result<Vec<f64>> {
    if max_degree > q.len() {
        return Err(Error::range("degree T", max_degree, format!("0..={}", q.len())));
    }
    let mut e = vec![0.0; max_degree + 1];
    e[0] = 1.0;
    for (j, &qj) in q.iter().enumerate() {
        let top = (j + 1).min(max_degree);
        for t in (1..=top).rev() {
            e[t] += qj * e[t - 1];
        }
    }
    Ok(e)
}

/// Distribution of `sum_i X_i` for independent `X_i ~ Bernoulli(q_i)`, with
/// every outcome `>= max_degree` lumped into the last entry.
///
/// Polynomial-product DP over the factors `(1 - q_i) + q_i·x`; the top
/// coefficient is absorbing so the result always sums to one.
pub fn poisson_binomial_pmf(q: &[f64], max_degree: usize) -> Vec<f64> {
    if max_degree == 0 {
        return vec![1.0];
    }
    let mut pmf = vec![0.0; max_degree + 1];
    pmf[0] = 1.0;
    for (j, &qi) in q.iter().enumerate() {
        let top = (j + 1).min(max_degree);
        if top == max_degree {
            // Mass reaching the cap stays there.
            pmf[max_degree] += qi * pmf[max_degree - 1];
            for t in (1..max_degree).rev() {
                pmf[t] = (1.0 - qi) * pmf[t] + qi * pmf[t - 1];
            }
        } else {
            for t in (1..=top).rev() {
                pmf[t] = (1.0 - qi) * pmf[t] + qi * pmf[t - 1];
            }
        }
        pmf[0] *= 1.0 - qi;
    }
    pmf
}

/// Law of the shared-item count `|I_A ∩ I_B|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapDistribution {
    pub mode: Mode,
    /// Truncation degree `T = min(N_A, N_B)`.
    pub degree: usize,
    /// Co-occurrence weights `q_i` (index `i - 1`).
    pub weights: Vec<f64>,
    /// `e_0..e_T` of `weights`.
    pub elementary: Vec<f64>,
    /// `P(t)` for `t = 0..T`, the last entry holding `P(t >= T)`. Normalised
    /// mode only.
    pub pmf: Option<Vec<f64>>,
}

impl OverlapDistribution {
    /// `e_t`, zero beyond the truncation degree.
    pub fn e(&self, t: usize) -> f64 {
        self.elementary.get(t).copied().unwrap_or(0.0)
    }
}

pub fn overlap_distribution(config: &ExpectationConfig) -> Result<OverlapDistribution> {
    let weights = overlap_weights(config)?;
    let degree = config.overlap_degree();
    let elementary = elementary_symmetric(&weights, degree)?;
    let pmf = (config.mode == Mode::Normalized).then(|| poisson_binomial_pmf(&weights, degree));
    Ok(OverlapDistribution {
        mode: config.mode,
        degree,
        weights,
        elementary,
        pmf,
    })
}

/// `sum_{t=1..T} e_t(q) · t / union_size`: the nested-sum expectation with the
/// union size held fixed.
pub fn expected_similarity_user_pair(config: &ExpectationConfig, union_size: usize) -> Result<f64> {
    if union_size == 0 {
        return Err(Error::range("union size", union_size, ">= 1"));
    }
    let dist = overlap_distribution(config)?;
    Ok(similarity_from_elementary(&dist.elementary, union_size))
}

pub(crate) fn similarity_from_elementary(e: &[f64], union_size: usize) -> f64 {
    e.iter()
        .enumerate()
        .skip(1)
        .map(|(t, &et)| et * t as f64)
        .sum::<f64>()
        / union_size as f64
}

/// `N_A + N_B - round(sum_i q_i)`, never below `max(N_A, N_B)` nor 1.
pub fn default_union_size(config: &ExpectationConfig) -> Result<usize> {
    let shared: f64 = overlap_weights(config)?.iter().sum();
    let shared = shared.round() as usize;
    let union = (config.clicks_a + config.clicks_b).saturating_sub(shared);
    Ok(union.max(config.clicks_a).max(config.clicks_b).max(1))
}

/// Exact `(E|I_A ∩ I_B|, E|I_A ∪ I_B|)` under Bernoulli inclusion.
pub fn expected_overlap_union(config: &ExpectationConfig) -> Result<(f64, f64)> {
    if config.mode != Mode::Normalized {
        return Err(Error::Mode(
            "overlap/union moments are only defined in normalized mode".into(),
        ));
    }
    config.validate()?;
    let model = config.zipf()?;
    let pa = inclusion_probabilities(&model, config.clicks_a);
    let pb = inclusion_probabilities(&model, config.clicks_b);
    let (mut inter, mut union) = (0.0, 0.0);
    for (a, b) in pa.iter().zip(&pb) {
        inter += a * b;
        union += a + b - a * b;
    }
    Ok((inter, union))
}

/// Two items clicked by fractions `1/m` and `1/n` of `W` users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemPairModel {
    pub m: f64,
    pub n: f64,
    pub users: usize,
}

impl ItemPairModel {
    pub fn new(m: f64, n: f64, users: usize) -> Result<Self> {
        let model = Self { m, n, users };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::range("popularity denominator m", self.m, ">= 1"));
        }
        if !(self.n >= 1.0 && self.n.is_finite()) {
            return Err(Error::range("popularity denominator n", self.n, ">= 1"));
        }
        if self.users == 0 {
            return Err(Error::range("user count W", self.users, ">= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" | "cosine-l1" => Ok(Norm::L1),
            "l2" | "cosine-l2" => Ok(Norm::L2),
            other => Err(Error::Config(format!("unknown norm '{other}'"))),
        }
    }
}

/// Plug-in expected cosine similarity of two independent items: the expected
/// co-click count `W/(mn)` over the product (`1/W`) or the geometric mean
/// (`1/sqrt(mn)`) of the expected click counts.
pub fn expected_item_similarity(model: &ItemPairModel, norm: Norm) -> f64 {
    match norm {
        Norm::L1 => 1.0 / model.users as f64,
        Norm::L2 => 1.0 / (model.m * model.n).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborVariant {
    /// The textbook sum, which counts a co-clicking user once per shared item.
    Paper,
    /// Expected number of distinct co-interacting entities.
    Exact,
}

impl std::str::FromStr for NeighborVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(NeighborVariant::Paper),
            "exact" => Ok(NeighborVariant::Exact),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Expected number of users sharing an item with a given user.
///
/// * `Paper`: `sum_{i=1..M} (W - 1) · p_i` with `p_i` per the mode. In
///   normalised mode the weights are summed in the same order as the Zipf
///   normaliser, so the result is exactly `W - 1`.
/// * `Exact`: `(W - 1) · (1 - prod_{i in item_set} (1 - π_i))`, where `π_i` is
///   the inclusion probability of another user making `N_B` clicks.
///   `item_set` holds 1-based ranks.
pub fn expected_user_neighbors(
    config: &ExpectationConfig,
    variant: NeighborVariant,
    item_set: Option<&[usize]>,
) -> Result<f64> {
    config.validate()?;
    let others = (config.users - 1) as f64;
    match variant {
        NeighborVariant::Paper => {
            let raw = crate::zipf::generalized_harmonic(config.items, config.exponent)?;
            Ok(match config.mode {
                Mode::PaperRaw => others * raw,
                Mode::Normalized => others * (raw / config.zipf()?.normalizer()),
            })
        }
        NeighborVariant::Exact => {
            let set = item_set.ok_or_else(|| {
                Error::Config("the exact user-neighbour variant needs the user's item set".into())
            })?;
            let model = config.zipf()?;
            let mut miss = 1.0;
            for &i in set {
                config.check_rank(i)?;
                miss *= 1.0 - inclusion_probability(model.pmf(i)?, config.clicks_b);
            }
            Ok(others * (1.0 - miss))
        }
    }
}

/// The alternative reading of the user-side sum with its upper index taken
/// over users: `W · (W - 1) / H(M, s)`. Reported for comparison only.
pub fn user_neighbors_literal_user_index(config: &ExpectationConfig) -> Result<f64> {
    config.validate()?;
    let w = config.users as f64;
    Ok(w * (w - 1.0) / crate::zipf::generalized_harmonic(config.items, config.exponent)?)
}

/// Expected number of items co-clicked with the `i`-th most popular item.
///
/// * `Paper`: `sum_{j != i} (1/i^s)(1/j^s) = (1/i^s)(H(M, s) - 1/i^s)`.
/// * `Exact`: `sum_{j != i} 1 - (1 - π_i π_j)^W` under Bernoulli inclusion
///   with `N_A` clicks per user.
pub fn expected_item_neighbors(
    i: usize,
    config: &ExpectationConfig,
    variant: NeighborVariant,
) -> Result<f64> {
    config.validate()?;
    config.check_rank(i)?;
    match variant {
        NeighborVariant::Paper => {
            let wi = rank_weight(i, config.exponent);
            let others: f64 = (1..=config.items)
                .rev()
                .filter(|&j| j != i)
                .map(|j| rank_weight(j, config.exponent))
                .sum();
            Ok(wi * others)
        }
        NeighborVariant::Exact => {
            let pi = inclusion_probabilities(&config.zipf()?, config.clicks_a);
            Ok(exact_item_neighbors_from(&pi, i, config.users))
        }
    }
}

/// Exact-variant item neighbourhoods for every rank at once.
pub fn expected_item_neighbors_all(config: &ExpectationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let pi = inclusion_probabilities(&config.zipf()?, config.clicks_a);
    Ok((1..=config.items)
        .map(|i| exact_item_neighbors_from(&pi, i, config.users))
        .collect())
}

fn exact_item_neighbors_from(pi: &[f64], i: usize, users: usize) -> f64 {
    let a = pi[i - 1];
    pi.iter()
        .enumerate()
        .filter(|(j, _)| j + 1 != i)
        .map(|(_, &b)| inclusion_probability(a * b, users))
        .sum()
}

/// `N(i) / N(j) = j / i`.
pub fn neighborhood_ratio(i: usize, j: usize) -> Result<f64> {
    if i == 0 {
        return Err(Error::range("rank i", i, ">= 1"));
    }
    if j == 0 {
        return Err(Error::range("rank j", j, ">= 1"));
    }
    Ok(j as f64 / i as f64)
}
