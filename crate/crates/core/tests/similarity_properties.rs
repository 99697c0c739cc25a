mod common;

use cfskew_core::similarity::{
    cosine_l1, cosine_l2, jaccard, neighborhood_sizes, pairwise_similarity, rank_binned_grid,
    similarity,
};
use cfskew_core::{Axis, InteractionMatrix, Metric};
use common::{matrix_from_pairs, naive_neighbors, naive_pairwise};
use proptest::prelude::*;

const METRICS: [Metric; 3] = [Metric::Jaccard, Metric::CosineL1, Metric::CosineL2];

fn arb_matrix(max_users: u64, max_items: u64) -> impl Strategy<Value = InteractionMatrix> {
    prop::collection::vec((1..=max_users, 1..=max_items), 1..600)
        .prop_map(|pairs| matrix_from_pairs(&pairs))
}

fn arb_set() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::btree_set(0u32..40, 0..25).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_naive_oracle(m in arb_matrix(200, 120)) {
        for axis in [Axis::User, Axis::Item] {
            for metric in METRICS {
                let fast = pairwise_similarity(&m, axis, metric, None);
                let slow = naive_pairwise(&m, axis, metric);
                prop_assert_eq!(fast.entries(), slow.as_slice());
            }
        }
    }

    #[test]
    fn neighbourhoods_match_naive_oracle(m in arb_matrix(150, 150)) {
        for axis in [Axis::User, Axis::Item] {
            let profile = neighborhood_sizes(&m, axis);
            let by_index = profile.counts_by_index();
            let population = m.population(axis);
            for (idx, &c) in by_index.iter().enumerate() {
                prop_assert_eq!(c, naive_neighbors(&m, axis, idx));
                prop_assert!(c < population);
            }
        }
    }

    #[test]
    fn metrics_are_symmetric_and_bounded(a in arb_set(), b in arb_set()) {
        let j = jaccard(&a, &b);
        prop_assert_eq!(j, jaccard(&b, &a));
        prop_assert!((0.0..=1.0).contains(&j));
        if !a.is_empty() && !b.is_empty() {
            for metric in [Metric::CosineL1, Metric::CosineL2] {
                let s = similarity(metric, &a, &b).unwrap();
                prop_assert_eq!(s, similarity(metric, &b, &a).unwrap());
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }
    }

    #[test]
    fn grid_conserves_pairs(m in arb_matrix(60, 40), bins in 1usize..60) {
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        let p = sim.population();
        let bins = bins.min(p);
        let grid = rank_binned_grid(&sim, bins).unwrap();
        prop_assert_eq!(grid.total_pairs(), (p * (p - 1) / 2) as u64);
        for r in 0..bins {
            for c in 0..bins {
                prop_assert_eq!(grid.cell(r, c), grid.cell(c, r));
                prop_assert!(grid.cell(r, c).mean_score.is_finite());
            }
        }
        // Pair-weighted mean over the whole grid equals the global mean.
        let total: f64 = sim.entries().iter().map(|e| e.2).sum();
        let mut weighted = 0.0;
        for r in 0..bins {
            for c in r..bins {
                let cell = grid.cell(r, c);
                weighted += cell.mean_score * cell.pair_count as f64;
            }
        }
        prop_assert!((weighted - total).abs() <= 1e-9 * total.max(1.0));
    }
}

/// Two sorted sets with `co` shared elements and sizes `len_a`, `len_b`.
fn sets_with(co: usize, len_a: usize, len_b: usize) -> (Vec<u32>, Vec<u32>) {
    let shared = 0..co as u32;
    let a = shared.clone().chain(10_000..10_000 + (len_a - co) as u32).collect();
    let b = shared.chain(20_000..20_000 + (len_b - co) as u32).collect();
    (a, b)
}

#[test]
fn popularity_scaling_of_l1_and_l2() {
    for &(co, a, b) in &[(1usize, 8usize, 12usize), (2, 20, 30), (1, 10, 10), (3, 9, 40)] {
        let (sa, sb) = sets_with(co, a, b);
        let l1 = cosine_l1(&sa, &sb).unwrap();
        let l2 = cosine_l2(&sa, &sb).unwrap();
        for lambda in [2usize, 3] {
            let l = lambda as f64;
            // Fixed co-count, both sizes scaled by lambda: L1 falls by lambda^2,
            // L2 by lambda.
            let (xa, xb) = sets_with(co, a * lambda, b * lambda);
            assert!((cosine_l1(&xa, &xb).unwrap() * l * l - l1).abs() < 1e-15);
            assert!((cosine_l2(&xa, &xb).unwrap() * l - l2).abs() < 1e-15);
            // Independent co-clicks: sizes scale by lambda and the co-count by
            // lambda^2. L1 is unchanged, L2 grows by lambda.
            let (za, zb) = sets_with(co * lambda * lambda, a * lambda, b * lambda);
            assert!((cosine_l1(&za, &zb).unwrap() - l1).abs() < 1e-15);
            assert!((cosine_l2(&za, &zb).unwrap() / l - l2).abs() < 1e-15);
        }
    }
}

#[test]
fn expected_counts_make_l1_popularity_free() {
    // Plug the expected counts co = W/(mn), |a| = W/m, |b| = W/n into both
    // metrics: L1 stays at 1/W for every (m, n), L2 follows 1/sqrt(mn).
    let w = 10_000.0f64;
    for m in [2.0, 4.0, 8.0, 16.0] {
        for n in [2.0, 5.0, 10.0] {
            let co = w / (m * n);
            let (a, b) = (w / m, w / n);
            assert!((co / (a * b) - 1.0 / w).abs() < 1e-18);
            assert!((co / (a * b).sqrt() - 1.0 / (m * n).sqrt()).abs() < 1e-15);
        }
    }
}

#[test]
fn engine_result_independent_of_thread_count() {
    let pairs: Vec<(u64, u64)> = (0..3000u64).map(|k| (k * 7919 % 180, (k * k) % 97)).collect();
    let m = matrix_from_pairs(&pairs);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    pairwise_similarity(&m, Axis::Item, Metric::CosineL2, None),
                    neighborhood_sizes(&m, Axis::User),
                )
            })
    };
    assert_eq!(run(1), run(4));
}
