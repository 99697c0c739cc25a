//! Seeded simulations of the quantities predicted in [`crate::expectation`].
//!
//! Trial `k` always draws from random stream `k` of the run seed, and per-trial
//! results are folded in trial order after the (parallel) simulation, so a
//! report depends only on `(config, seed)` and never on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expectation::{inclusion_probabilities, ExpectationConfig, ItemPairModel};
use crate::interactions::{draw_click_set, generate_synthetic, Axis, GeneratorConfig, InclusionModel};
use crate::rng::{self, RNG_ALGORITHM};
use crate::similarity::{intersection_size, neighborhood_sizes};
use crate::stats::{normal_critical, Moments};
use crate::zipf::ZipfSampler;

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        Ok(Self { trials, seed })
    }
}

/// Monte Carlo estimate of one scalar quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
    pub rng: String,
}

impl EstimateReport {
    pub fn from_moments(quantity: impl Into<String>, moments: &Moments, seed: u64) -> Self {
        let mean = moments.mean();
        let se = moments.std_error();
        let half = normal_critical(CONFIDENCE) * se;
        Self {
            quantity: quantity.into(),
            mean,
            std_error: se,
            ci_low: mean - half,
            ci_high: mean + half,
            trials: moments.count(),
            seed,
            rng: RNG_ALGORITHM.to_string(),
        }
    }

    /// `|mean - value|` in units of the standard error (infinite when the
    /// error is zero and the values differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        }
    }

    pub fn within_std_errors(&self, value: f64, k: f64) -> bool {
        self.z_score(value) <= k
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Result of [`simulate_user_pair`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserPairEstimate {
    pub inclusion: InclusionModel,
    /// Trials per shared-item count `0..=T`; the last bucket holds `>= T`.
    pub overlap_histogram: Vec<u64>,
    pub jaccard: EstimateReport,
    pub intersection: EstimateReport,
    pub union: EstimateReport,
}

impl UserPairEstimate {
    pub fn reports(&self) -> Vec<EstimateReport> {
        vec![self.jaccard.clone(), self.intersection.clone(), self.union.clone()]
    }
}

/// Realises two users' click sets per trial and records `|∩|`, `|∪|` and
/// Jaccard. User A makes `N_A` clicks and user B `N_B`, both on Zipf(s, M).
pub fn simulate_user_pair(
    config: &ExpectationConfig,
    inclusion: InclusionModel,
    sim: &SimConfig,
) -> Result<UserPairEstimate> {
    config.validate()?;
    let model = config.zipf()?;
    let sampler = ZipfSampler::new(&model);
    let (pa, pb) = match inclusion {
        InclusionModel::Bernoulli => (
            inclusion_probabilities(&model, config.clicks_a),
            inclusion_probabilities(&model, config.clicks_b),
        ),
        _ => (Vec::new(), Vec::new()),
    };
    let per_trial: Vec<(usize, usize)> = (0..sim.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(sim.seed, k as u64);
            let a: Vec<u32> = draw_click_set(&mut rng, &sampler, inclusion, config.clicks_a, &pa)
                .into_iter()
                .map(|(r, _)| r as u32)
                .collect();
            let b: Vec<u32> = draw_click_set(&mut rng, &sampler, inclusion, config.clicks_b, &pb)
                .into_iter()
                .map(|(r, _)| r as u32)
                .collect();
            let inter = intersection_size(&a, &b);
            (inter, a.len() + b.len() - inter)
        })
        .collect();

    let degree = config.overlap_degree();
    let mut histogram = vec![0u64; degree + 1];
    let (mut jac, mut inter_m, mut union_m) = (Moments::new(), Moments::new(), Moments::new());
    for &(inter, union) in &per_trial {
        histogram[inter.min(degree)] += 1;
        inter_m.push(inter as f64);
        union_m.push(union as f64);
        jac.push(if union == 0 { 0.0 } else { inter as f64 / union as f64 });
    }
    Ok(UserPairEstimate {
        inclusion,
        overlap_histogram: histogram,
        jaccard: EstimateReport::from_moments("user_pair.jaccard", &jac, sim.seed),
        intersection: EstimateReport::from_moments("user_pair.intersection", &inter_m, sim.seed),
        union: EstimateReport::from_moments("user_pair.union", &union_m, sim.seed),
    })
}

/// Result of [`simulate_item_pair`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemPairEstimate {
    pub l1: EstimateReport,
    pub l2: EstimateReport,
    /// Trials dropped because one of the items received no clicks.
    pub skipped: u64,
}

/// Each of `W` users independently clicks item A with probability `1/m` and
/// item B with probability `1/n`; both cosine similarities are recorded per
/// trial. Trials where either item got no clicks are skipped.
pub fn simulate_item_pair(model: &ItemPairModel, sim: &SimConfig) -> Result<ItemPairEstimate> {
    model.validate()?;
    let w = model.users as f64;
    if model.m > w || model.n > w {
        return Err(Error::Config(format!(
            "need m <= W and n <= W (m={}, n={}, W={})",
            model.m, model.n, model.users
        )));
    }
    let (pa, pb) = (1.0 / model.m, 1.0 / model.n);
    let per_trial: Vec<Option<(f64, f64)>> = (0..sim.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(sim.seed, k as u64);
            let (mut ca, mut cb, mut co) = (0u64, 0u64, 0u64);
            for _ in 0..model.users {
                let a = rng.random::<f64>() < pa;
                let b = rng.random::<f64>() < pb;
                ca += a as u64;
                cb += b as u64;
                co += (a && b) as u64;
            }
            if ca == 0 || cb == 0 {
                return None;
            }
            let (co, ca, cb) = (co as f64, ca as f64, cb as f64);
            Some((co / (ca * cb), co / (ca * cb).sqrt()))
        })
        .collect();
    let (mut l1, mut l2) = (Moments::new(), Moments::new());
    let mut skipped = 0;
    for r in &per_trial {
        match r {
            Some((a, b)) => {
                l1.push(*a);
                l2.push(*b);
            }
            None => skipped += 1,
        }
    }
    if l1.count() == 0 {
        return Err(Error::InsufficientData("every trial was skipped".into()));
    }
    Ok(ItemPairEstimate {
        l1: EstimateReport::from_moments("item_pair.cosine_l1", &l1, sim.seed),
        l2: EstimateReport::from_moments("item_pair.cosine_l2", &l2, sim.seed),
        skipped,
    })
}

/// Result of [`simulate_neighborhoods`]; entry `r - 1` belongs to generative
/// rank `r` (user id / Zipf item rank `r` in the synthetic matrix).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodEstimate {
    pub user: Vec<EstimateReport>,
    pub item: Vec<EstimateReport>,
}

impl NeighborhoodEstimate {
    pub fn user_means(&self) -> Vec<f64> {
        self.user.iter().map(|r| r.mean).collect()
    }

    pub fn item_means(&self) -> Vec<f64> {
        self.item.iter().map(|r| r.mean).collect()
    }
}

/// Generates a synthetic matrix per trial (trial `k` uses a seed derived from
/// `(seed, k)`; `gen.seed` is ignored) and measures neighbourhood sizes on both
/// axes, aggregated by generative rank.
pub fn simulate_neighborhoods(
    gen: &GeneratorConfig,
    sim: &SimConfig,
) -> Result<NeighborhoodEstimate> {
    gen.validate()?;
    let per_trial: Vec<(Vec<usize>, Vec<usize>)> = (0..sim.trials)
        .into_par_iter()
        .map(|k| -> Result<(Vec<usize>, Vec<usize>)> {
            let cfg = GeneratorConfig {
                seed: rng::derive_seed(sim.seed, k as u64),
                ..gen.clone()
            };
            let m = generate_synthetic(&cfg)?;
            Ok((
                neighborhood_sizes(&m, Axis::User).counts_by_index(),
                neighborhood_sizes(&m, Axis::Item).counts_by_index(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut users = vec![Moments::new(); gen.users];
    let mut items = vec![Moments::new(); gen.items];
    for (u, i) in &per_trial {
        for (acc, &c) in users.iter_mut().zip(u) {
            acc.push(c as f64);
        }
        for (acc, &c) in items.iter_mut().zip(i) {
            acc.push(c as f64);
        }
    }
    let label = |axis: &str, r: usize| format!("{axis}_neighbors[rank={r}]");
    Ok(NeighborhoodEstimate {
        user: users
            .iter()
            .enumerate()
            .map(|(r, m)| EstimateReport::from_moments(label("user", r + 1), m, sim.seed))
            .collect(),
        item: items
            .iter()
            .enumerate()
            .map(|(r, m)| EstimateReport::from_moments(label("item", r + 1), m, sim.seed))
            .collect(),
    })
}
