//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use cfskew_core::interactions::{build_interaction_matrix, InteractionLog, Record};
use cfskew_core::similarity::{intersection_size, Metric};
use cfskew_core::{Axis, InteractionMatrix};

/// `e_0..e_T` by enumerating every subset.
pub fn brute_elementary(q: &[f64], max_degree: usize) -> Vec<f64> {
    let mut e = vec![0.0; max_degree + 1];
    for mask in 0u32..(1 << q.len()) {
        let t = mask.count_ones() as usize;
        if t > max_degree {
            continue;
        }
        let prod: f64 = (0..q.len()).filter(|i| mask >> i & 1 == 1).map(|i| q[i]).product();
        e[t] += prod;
    }
    e
}

/// Poisson-binomial law by subset enumeration, outcomes `>= T` lumped into `T`.
pub fn brute_pmf(q: &[f64], max_degree: usize) -> Vec<f64> {
    let mut pmf = vec![0.0; max_degree + 1];
    for mask in 0u32..(1 << q.len()) {
        let t = (mask.count_ones() as usize).min(max_degree);
        let p: f64 = (0..q.len())
            .map(|i| if mask >> i & 1 == 1 { q[i] } else { 1.0 - q[i] })
            .product();
        pmf[t] += p;
    }
    pmf
}

/// The user-pair expectation evaluated as literal nested loops
/// `sum_t sum_{i_1 < ... < i_t} prod (w_{i_k})^2 * t / union` with
/// `w_i = 1/i^s`.
pub fn literal_nested_similarity(items: usize, s: f64, max_t: usize, union: usize) -> f64 {
    fn nest(start: usize, items: usize, depth: usize, s: f64, acc: f64) -> f64 {
        if depth == 0 {
            return acc;
        }
        let mut total = 0.0;
        for i in start..=items {
            let w = (i as f64).powf(-s);
            total += nest(i + 1, items, depth - 1, s, acc * w * w);
        }
        total
    }
    (1..=max_t)
        .map(|t| nest(1, items, t, s, 1.0) * t as f64 / union as f64)
        .sum()
}

/// One shared item: `sum_i (1/i)^2 / union`.
pub fn literal_one_shared(items: usize, union: usize) -> f64 {
    (1..=items).map(|i| (1.0 / i as f64).powi(2) / union as f64).sum()
}

/// Two shared items: `sum_{i<k} (1/i)^2 (1/k)^2 * 2 / union`.
pub fn literal_two_shared(items: usize, union: usize) -> f64 {
    let mut total = 0.0;
    for i in 1..items {
        for k in i + 1..=items {
            total += (1.0 / i as f64).powi(2) * (1.0 / k as f64).powi(2) * 2.0 / union as f64;
        }
    }
    total
}

/// All-pairs similarity by explicit set intersection, keyed by popularity rank.
pub fn naive_pairwise(m: &InteractionMatrix, axis: Axis, metric: Metric) -> Vec<(u32, u32, f64)> {
    let sets = m.sets(axis);
    let n = sets.len();
    // Rank: descending size, ties by index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sets[b].len().cmp(&sets[a].len()).then(a.cmp(&b)));
    let mut out = Vec::new();
    for ra in 0..n {
        for rb in ra + 1..n {
            let (a, b) = (&sets[order[ra]], &sets[order[rb]]);
            let co = intersection_size(a, b);
            if co > 0 {
                out.push((ra as u32 + 1, rb as u32 + 1, metric.from_counts(co, a.len(), b.len())));
            }
        }
    }
    out
}

/// Distinct co-interacting entities by pairwise intersection, per dense index.
pub fn naive_neighbors(m: &InteractionMatrix, axis: Axis, idx: usize) -> usize {
    let sets = m.sets(axis);
    (0..sets.len())
        .filter(|&b| b != idx && intersection_size(&sets[idx], &sets[b]) > 0)
        .count()
}

pub fn matrix_from_pairs(pairs: &[(u64, u64)]) -> InteractionMatrix {
    let log = InteractionLog::from_records(pairs.iter().map(|&(user, item)| Record {
        user,
        item,
        weight: 1,
    }))
    .unwrap();
    build_interaction_matrix(&log).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
