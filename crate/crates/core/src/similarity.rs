//! Set-similarity kernels and the pairwise / neighbourhood engines over an
//! [`InteractionMatrix`].

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interactions::{popularity_ranking, Axis, InteractionMatrix, RankMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Jaccard,
    /// Co-count over the product of set sizes.
    CosineL1,
    /// Co-count over the geometric mean of set sizes.
    CosineL2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::CosineL1 => "l1",
            Metric::CosineL2 => "l2",
        }
    }

    /// Score from a co-count and the two set sizes. Sizes must be non-zero
    /// whenever `co > 0`.
    #[inline]
    pub fn from_counts(self, co: usize, len_a: usize, len_b: usize) -> f64 {
        let co = co as f64;
        match self {
            Metric::Jaccard => {
                let union = (len_a + len_b) as f64 - co;
                if union == 0.0 {
                    0.0
                } else {
                    co / union
                }
            }
            Metric::CosineL1 => co / (len_a as f64 * len_b as f64),
            Metric::CosineL2 => co / (len_a as f64 * len_b as f64).sqrt(),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jaccard" => Ok(Metric::Jaccard),
            "l1" | "cosine-l1" => Ok(Metric::CosineL1),
            "l2" | "cosine-l2" => Ok(Metric::CosineL2),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

/// `|a ∩ b|` for sorted, deduplicated slices.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `|a ∩ b| / |a ∪ b|`, zero when both sets are empty.
pub fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    Metric::Jaccard.from_counts(intersection_size(a, b), a.len(), b.len())
}

pub fn cosine_l1(a: &[u32], b: &[u32]) -> Result<f64> {
    non_empty(a, b)?;
    Ok(Metric::CosineL1.from_counts(intersection_size(a, b), a.len(), b.len()))
}

pub fn cosine_l2(a: &[u32], b: &[u32]) -> Result<f64> {
    non_empty(a, b)?;
    Ok(Metric::CosineL2.from_counts(intersection_size(a, b), a.len(), b.len()))
}

fn non_empty(a: &[u32], b: &[u32]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        Err(Error::Degenerate("cosine similarity of an empty set".into()))
    } else {
        Ok(())
    }
}

/// Metric applied to two sorted sets.
pub fn similarity(metric: Metric, a: &[u32], b: &[u32]) -> Result<f64> {
    match metric {
        Metric::Jaccard => Ok(jaccard(a, b)),
        Metric::CosineL1 => cosine_l1(a, b),
        Metric::CosineL2 => cosine_l2(a, b),
    }
}

/// Pairwise scores along one axis, keyed by 1-based popularity rank.
///
/// Only pairs with a non-empty intersection are stored, as `(rank_a, rank_b,
/// score)` with `rank_a < rank_b`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    axis: Axis,
    metric: Metric,
    ranking: RankMap,
    population: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SimilarityMatrix {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of ranked entities covered (after any top-R cap).
    pub fn population(&self) -> usize {
        self.population
    }

    pub fn ranking(&self) -> &RankMap {
        &self.ranking
    }

    pub fn entries(&self) -> &[(u32, u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Score between two 1-based ranks; 0 for absent pairs and for `a == b`.
    pub fn score_by_rank(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a < b { (a as u32, b as u32) } else { (b as u32, a as u32) };
        self.entries
            .binary_search_by(|&(x, y, _)| (x, y).cmp(&(lo, hi)))
            .map(|pos| self.entries[pos].2)
            .unwrap_or(0.0)
    }

    /// Score between two dense indices; 0 when either lies outside the cap.
    pub fn score_by_index(&self, a: usize, b: usize) -> f64 {
        let (ra, rb) = (self.ranking.rank_of(a), self.ranking.rank_of(b));
        if ra > self.population || rb > self.population || ra == rb {
            0.0
        } else {
            self.score_by_rank(ra, rb)
        }
    }
}

/// All pairwise scores along `axis` among the `top_r` most popular entities
/// (all of them when `None`).
///
/// Co-counts come from the inverted index: for each entity `a`, walk its
/// opposite-axis neighbours and increment a counter for every entity `b` they
/// touch. No set intersection is ever computed. Rows are processed in
/// parallel; each row's counts are exact integers, so the result does not
/// depend on the thread count.
pub fn pairwise_similarity(
    matrix: &InteractionMatrix,
    axis: Axis,
    metric: Metric,
    top_r: Option<usize>,
) -> SimilarityMatrix {
    let ranking = popularity_ranking(matrix, axis);
    let n = ranking.len();
    let population = top_r.map_or(n, |r| r.min(n));
    let sets = matrix.sets(axis);
    let opposite = matrix.sets(axis.opposite());

    let rows: Vec<Vec<(u32, u32, f64)>> = (1..=population)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], Vec::<u32>::new()),
            |(counts, touched), ra| {
                let a = ranking.index_at(ra);
                for &o in &sets[a] {
                    for &b in &opposite[o as usize] {
                        let rb = ranking.rank_of(b as usize);
                        if rb <= ra || rb > population {
                            continue;
                        }
                        if counts[b as usize] == 0 {
                            touched.push(b);
                        }
                        counts[b as usize] += 1;
                    }
                }
                let len_a = sets[a].len();
                let mut row: Vec<(u32, u32, f64)> = touched
                    .drain(..)
                    .map(|b| {
                        let co = std::mem::take(&mut counts[b as usize]) as usize;
                        let rb = ranking.rank_of(b as usize) as u32;
                        let score = metric.from_counts(co, len_a, sets[b as usize].len());
                        (ra as u32, rb, score)
                    })
                    .collect();
                row.sort_unstable_by_key(|&(_, rb, _)| rb);
                row
            },
        )
        .collect();

    SimilarityMatrix {
        axis,
        metric,
        ranking,
        population,
        entries: rows.into_iter().flatten().collect(),
    }
}

/// Literal indicator-gated average: the mean of `sim(i, k)` over users
/// `k != i` with `sim(i, k) > 0` who clicked `item`; 0 when there are none.
pub fn predict_rating_paper(
    sim: &SimilarityMatrix,
    matrix: &InteractionMatrix,
    user: u64,
    item: u64,
) -> Result<f64> {
    if sim.axis != Axis::User {
        return Err(Error::Mode("rating prediction needs a user-axis similarity matrix".into()));
    }
    let i = matrix.user_index(user)?;
    let j = matrix.item_index(item)?;
    let (sum, n) = matrix
        .col(j)
        .iter()
        .map(|&k| k as usize)
        .filter(|&k| k != i)
        .map(|k| sim.score_by_index(i, k))
        .filter(|&s| s > 0.0)
        .fold((0.0, 0usize), |(sum, n), s| (sum + s, n + 1));
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// One unordered block of a rank-binned grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub mean_score: f64,
    pub pair_count: u64,
}

/// `B × B` grid of mean similarity over popularity-rank bins; cell `(0, 0)`
/// pairs the most popular bin with itself.
///
/// Cells `(x, y)` and `(y, x)` describe the same unordered block of pairs, so
/// the grid is symmetric; [`HeatmapGrid::total_pairs`] counts each block once.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    bins: usize,
    population: usize,
    cells: Vec<HeatmapCell>,
}

impl HeatmapGrid {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn cell(&self, row: usize, col: usize) -> HeatmapCell {
        self.cells[row * self.bins + col]
    }

    /// 0-based bin of a 0-based rank position.
    pub fn bin_of(&self, rank_pos: usize) -> usize {
        rank_pos * self.bins / self.population
    }

    /// 1-based rank range covered by `bin`, inclusive.
    pub fn bin_ranks(&self, bin: usize) -> (usize, usize) {
        let first = (bin * self.population).div_ceil(self.bins);
        let next = ((bin + 1) * self.population).div_ceil(self.bins);
        (first + 1, next)
    }

    /// Percentile label of a bin, e.g. `"0.0-1.0%"`.
    pub fn bin_label(&self, bin: usize) -> String {
        let (first, last) = self.bin_ranks(bin);
        let p = self.population as f64;
        format!(
            "{:.1}-{:.1}%",
            100.0 * (first - 1) as f64 / p,
            100.0 * last as f64 / p
        )
    }

    /// Pairs over the blocks with `row <= col`.
    pub fn total_pairs(&self) -> u64 {
        (0..self.bins)
            .flat_map(|r| (r..self.bins).map(move |c| (r, c)))
            .map(|(r, c)| self.cell(r, c).pair_count)
            .sum()
    }

    /// Mean of the cell means over a rectangular block of cells, skipping
    /// cells with no pairs. `None` if every cell is empty.
    pub fn block_mean(&self, rows: Range<usize>, cols: Range<usize>) -> Option<f64> {
        let (sum, n) = rows
            .flat_map(|r| cols.clone().map(move |c| (r, c)))
            .map(|(r, c)| self.cell(r, c))
            .filter(|cell| cell.pair_count > 0)
            .fold((0.0, 0usize), |(s, n), cell| (s + cell.mean_score, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// `k × k` block in the most-popular corner.
    pub fn top_left_mean(&self, k: usize) -> Option<f64> {
        let k = k.min(self.bins);
        self.block_mean(0..k, 0..k)
    }

    /// `k × k` block in the least-popular corner.
    pub fn bottom_right_mean(&self, k: usize) -> Option<f64> {
        let k = k.min(self.bins);
        let start = self.bins - k;
        self.block_mean(start..self.bins, start..self.bins)
    }

    pub fn min_max_mean(&self) -> (f64, f64) {
        self.cells
            .iter()
            .filter(|c| c.pair_count > 0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c.mean_score), hi.max(c.mean_score))
            })
    }
}

/// Averages similarity over `bins × bins` contiguous rank blocks. Pairs with
/// an empty intersection count as score 0 but are included in the pair count.
pub fn rank_binned_grid(sim: &SimilarityMatrix, bins: usize) -> Result<HeatmapGrid> {
    let p = sim.population;
    if bins == 0 || bins > p {
        return Err(Error::range("bin count", bins, format!("1..={p}")));
    }
    let mut grid = HeatmapGrid {
        bins,
        population: p,
        cells: vec![HeatmapCell::default(); bins * bins],
    };
    let mut size = vec![0u64; bins];
    for pos in 0..p {
        size[grid.bin_of(pos)] += 1;
    }
    let mut sums = vec![0.0f64; bins * bins];
    for &(ra, rb, score) in &sim.entries {
        let (x, y) = (grid.bin_of(ra as usize - 1), grid.bin_of(rb as usize - 1));
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        sums[x * bins + y] += score;
    }
    for x in 0..bins {
        for y in x..bins {
            let pairs = if x == y {
                size[x] * size[x].saturating_sub(1) / 2
            } else {
                size[x] * size[y]
            };
            let mean = if pairs > 0 { sums[x * bins + y] / pairs as f64 } else { 0.0 };
            let cell = HeatmapCell {
                mean_score: mean,
                pair_count: pairs,
            };
            grid.cells[x * bins + y] = cell;
            grid.cells[y * bins + x] = cell;
        }
    }
    Ok(grid)
}

/// Per-rank count of distinct co-interacting entities along one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodProfile {
    pub axis: Axis,
    /// `counts[r - 1]` belongs to the entity of popularity rank `r`.
    pub counts: Vec<usize>,
    /// Dense index of the entity at each rank.
    pub order: Vec<u32>,
}

impl NeighborhoodProfile {
    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Counts re-ordered by dense index instead of rank.
    pub fn counts_by_index(&self) -> Vec<usize> {
        let mut out = vec![0; self.counts.len()];
        for (&idx, &c) in self.order.iter().zip(&self.counts) {
            out[idx as usize] = c;
        }
        out
    }
}

/// For each entity (in popularity order), the number of other entities that
/// share at least one interaction with it, via the inverted index.
pub fn neighborhood_sizes(matrix: &InteractionMatrix, axis: Axis) -> NeighborhoodProfile {
    let ranking = popularity_ranking(matrix, axis);
    let sets = matrix.sets(axis);
    let opposite = matrix.sets(axis.opposite());
    let n = sets.len();
    let counts = ranking
        .order()
        .par_iter()
        .map_init(
            || vec![u32::MAX; n],
            |stamp, &a| {
                let mut count = 0;
                for &o in &sets[a as usize] {
                    for &b in &opposite[o as usize] {
                        if b != a && stamp[b as usize] != a {
                            stamp[b as usize] = a;
                            count += 1;
                        }
                    }
                }
                count
            },
        )
        .collect();
    NeighborhoodProfile {
        axis,
        counts,
        order: ranking.order().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::{build_interaction_matrix, InteractionLog, Record};

    fn matrix(pairs: &[(u64, u64)]) -> InteractionMatrix {
        let log = InteractionLog::from_records(
            pairs.iter().map(|&(user, item)| Record { user, item, weight: 1 }),
        )
        .unwrap();
        build_interaction_matrix(&log).unwrap()
    }

    #[test]
    fn jaccard_examples() {
        assert!((jaccard(&[1, 2], &[2, 3]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&[4, 5, 6], &[4, 5, 6]), 1.0);
        assert_eq!(jaccard(&[1], &[2]), 0.0);
        assert_eq!(jaccard(&[], &[]), 0.0);
    }

    #[test]
    fn cosine_examples() {
        let a = [1, 2, 3, 4];
        let b = [3, 4, 5, 6, 7];
        assert!((cosine_l1(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        assert!((cosine_l2(&a, &b).unwrap() - 2.0 / 20f64.sqrt()).abs() < 1e-15);
        assert_eq!(cosine_l1(&[9], &[9]).unwrap(), 1.0);
        assert_eq!(cosine_l2(&a, &a).unwrap(), 1.0);
        assert!(matches!(cosine_l1(&[], &[1]), Err(Error::Degenerate(_))));
        assert!(matches!(cosine_l2(&[1], &[]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn expected_counts_reduce_to_closed_forms() {
        // co = W/(mn), |a| = W/m, |b| = W/n with W = 1000, m = 4, n = 10.
        let (w, m, n) = (1000.0f64, 4.0, 10.0);
        let co = w / (m * n);
        let l1 = co / ((w / m) * (w / n));
        let l2 = co / ((w / m) * (w / n)).sqrt();
        assert!((l1 - 1.0 / w).abs() < 1e-15);
        assert!((l2 - 1.0 / (m * n).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_two_users_one_shared() {
        let m = matrix(&[(1, 1), (1, 2), (2, 2), (2, 3)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        assert_eq!(sim.len(), 1);
        assert!((sim.entries()[0].2 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(sim.entries()[0].0, 1);
        assert_eq!(sim.entries()[0].1, 2);
    }

    #[test]
    fn pairwise_disjoint_rows_is_empty() {
        let m = matrix(&[(1, 1), (2, 2), (3, 3)]);
        assert!(pairwise_similarity(&m, Axis::User, Metric::Jaccard, None).is_empty());
        assert!(pairwise_similarity(&m, Axis::Item, Metric::CosineL2, None).is_empty());
    }

    #[test]
    fn top_r_cap_restricts_population() {
        let m = matrix(&[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, Some(2));
        assert_eq!(sim.population(), 2);
        assert!(sim.entries().iter().all(|&(a, b, _)| a <= 2 && b <= 2));
        assert_eq!(sim.len(), 1);
    }

    #[test]
    fn prediction_examples() {
        // users 1..3, items 10..13
        let m = matrix(&[(1, 10), (1, 11), (2, 10), (2, 12), (3, 11), (3, 12), (3, 13)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        // Hand-computed: J(1,2) = 1/3, J(1,3) = 1/4, J(2,3) = 1/4.
        // Item 12 clicked by users 2 and 3: R(1, 12) = (1/3 + 1/4) / 2.
        let r = predict_rating_paper(&sim, &m, 1, 12).unwrap();
        assert!((r - 7.0 / 24.0).abs() < 1e-15);
        // Item 13 clicked only by user 3.
        assert!((predict_rating_paper(&sim, &m, 1, 13).unwrap() - 0.25).abs() < 1e-15);
        // Item 10 clicked by users 1 and 2, both at 1/4 from user 3.
        assert!((predict_rating_paper(&sim, &m, 3, 10).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            predict_rating_paper(&sim, &m, 7, 10),
            Err(Error::Lookup { kind: "user", .. })
        ));
        assert!(matches!(
            predict_rating_paper(&sim, &m, 1, 99),
            Err(Error::Lookup { kind: "item", .. })
        ));
    }

    #[test]
    fn prediction_without_neighbours_is_zero() {
        let m = matrix(&[(1, 1), (2, 2)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        assert_eq!(predict_rating_paper(&sim, &m, 1, 2).unwrap(), 0.0);
    }

    #[test]
    fn prediction_single_neighbour_half() {
        // J(1,2) = 2/4 = 0.5; only user 2 clicked item 5.
        let m = matrix(&[(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 5)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        assert_eq!(predict_rating_paper(&sim, &m, 1, 5).unwrap(), 0.5);
    }

    #[test]
    fn prediction_needs_user_axis() {
        let m = matrix(&[(1, 1), (2, 1)]);
        let sim = pairwise_similarity(&m, Axis::Item, Metric::Jaccard, None);
        assert!(matches!(predict_rating_paper(&sim, &m, 1, 1), Err(Error::Mode(_))));
    }

    #[test]
    fn grid_single_bin_is_global_mean() {
        let m = matrix(&[(1, 1), (1, 2), (2, 2), (2, 3), (3, 4)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        let g = rank_binned_grid(&sim, 1).unwrap();
        assert_eq!(g.cell(0, 0).pair_count, 3);
        assert!((g.cell(0, 0).mean_score - (1.0 / 3.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_full_resolution_is_dense_matrix() {
        let m = matrix(&[(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3), (4, 9)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        let p = sim.population();
        let g = rank_binned_grid(&sim, p).unwrap();
        for a in 1..=p {
            for b in 1..=p {
                let expected = if a == b { 0.0 } else { sim.score_by_rank(a, b) };
                assert_eq!(g.cell(a - 1, b - 1).mean_score, expected, "({a},{b})");
            }
        }
        assert_eq!(g.total_pairs(), (p * (p - 1) / 2) as u64);
    }

    #[test]
    fn grid_rejects_bad_bins() {
        let m = matrix(&[(1, 1), (2, 1)]);
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        assert!(rank_binned_grid(&sim, 0).is_err());
        assert!(rank_binned_grid(&sim, 3).is_err());
    }

    #[test]
    fn bin_ranks_partition_population() {
        let m = matrix(&(1..=10).map(|u| (u, 1)).collect::<Vec<_>>());
        let sim = pairwise_similarity(&m, Axis::User, Metric::Jaccard, None);
        let g = rank_binned_grid(&sim, 3).unwrap();
        let ranges: Vec<_> = (0..3).map(|b| g.bin_ranks(b)).collect();
        assert_eq!(ranges, vec![(1, 4), (5, 7), (8, 10)]);
        for (b, &(first, last)) in ranges.iter().enumerate() {
            assert_eq!(g.bin_of(first - 1), b);
            assert_eq!(g.bin_of(last - 1), b);
        }
        assert_eq!(g.bin_label(0), "0.0-40.0%");
    }

    #[test]
    fn neighbourhood_identical_rows() {
        let m = matrix(&[(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]);
        let p = neighborhood_sizes(&m, Axis::User);
        assert_eq!(p.counts, vec![2, 2, 2]);
        let p = neighborhood_sizes(&m, Axis::Item);
        assert_eq!(p.counts, vec![1, 1]);
    }

    #[test]
    fn neighbourhood_disjoint_rows() {
        let m = matrix(&[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(neighborhood_sizes(&m, Axis::User).counts, vec![0, 0, 0]);
        assert_eq!(neighborhood_sizes(&m, Axis::Item).counts, vec![0, 0, 0]);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("jaccard".parse::<Metric>().unwrap(), Metric::Jaccard);
        assert_eq!("l1".parse::<Metric>().unwrap(), Metric::CosineL1);
        assert_eq!("cosine-l2".parse::<Metric>().unwrap(), Metric::CosineL2);
        assert!("dice".parse::<Metric>().is_err());
    }
}
