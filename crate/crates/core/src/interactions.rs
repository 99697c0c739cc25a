//! Click logs and the sparse binary user×item incidence matrix.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::zipf::{rank_weight, ZipfModel, ZipfSampler};

/// Header of the hetrec-2011 Lastfm `user_artists.dat` file and of the
/// canonical log serialization.
pub const LOG_HEADER: &str = "userID\tartistID\tweight";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    User,
    Item,
}

impl Axis {
    pub fn opposite(self) -> Axis {
        match self {
            Axis::User => Axis::Item,
            Axis::Item => Axis::User,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::User => "user",
            Axis::Item => "item",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(Axis::User),
            "item" => Ok(Axis::Item),
            other => Err(Error::Config(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Record {
    pub user: u64,
    pub item: u64,
    pub weight: u64,
}

/// Raw click log: one record per distinct `(user, item)`, sorted by
/// `(user, item)`, every weight at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    records: Vec<Record>,
}

/// Result of parsing a TSV log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOutcome {
    pub log: InteractionLog,
    pub lines_read: usize,
    /// Blank lines ignored in the body.
    pub lines_skipped: usize,
}

impl InteractionLog {
    /// Builds a log from arbitrary records, merging duplicate pairs by summing
    /// their weights.
    pub fn from_records<I: IntoIterator<Item = Record>>(records: I) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for r in records {
            if r.weight == 0 {
                return Err(Error::Config(format!(
                    "record ({}, {}) has weight 0",
                    r.user, r.item
                )));
            }
            *merged.entry((r.user, r.item)).or_insert(0) += r.weight;
        }
        Ok(Self {
            records: merged
                .into_iter()
                .map(|((user, item), weight)| Record { user, item, weight })
                .collect(),
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn distinct_users(&self) -> usize {
        let mut n = 0;
        let mut last = None;
        for r in &self.records {
            if last != Some(r.user) {
                n += 1;
                last = Some(r.user);
            }
        }
        n
    }

    pub fn distinct_items(&self) -> usize {
        let mut items: Vec<u64> = self.records.iter().map(|r| r.item).collect();
        items.sort_unstable();
        items.dedup();
        items.len()
    }

    /// Canonical TSV: the Lastfm header, then `user\titem\tweight` lines in
    /// `(user, item)` order, LF line endings.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{LOG_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}\t{}\t{}", r.user, r.item, r.weight)?;
        }
        out.flush()
    }
}

/// Parses a hetrec-style tab-separated log. The first line is a header and is
/// not validated; every other non-blank line needs `user\titem[\tweight]`
/// with decimal integers (weight defaults to 1). Trailing `\r` is stripped.
pub fn ingest_lastfm_tsv<R: BufRead>(source: R) -> Result<IngestOutcome> {
    let mut records = Vec::new();
    let mut lines_read = 0;
    let mut lines_skipped = 0;
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        lines_read += 1;
        if idx == 0 {
            continue;
        }
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            lines_skipped += 1;
            continue;
        }
        let mut fields = line.split('\t');
        let parse = |field: Option<&str>, name: &str| -> Result<u64> {
            let raw = field.ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("missing {name} field"),
            })?;
            raw.trim().parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("{name} '{raw}' is not a non-negative integer"),
            })
        };
        let user = parse(fields.next(), "user id")?;
        let item = parse(fields.next(), "item id")?;
        let weight = match fields.next() {
            Some(w) => parse(Some(w), "weight")?,
            None => 1,
        };
        if weight == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "weight must be at least 1".into(),
            });
        }
        records.push(Record { user, item, weight });
    }
    if records.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(IngestOutcome {
        log: InteractionLog::from_records(records)?,
        lines_read,
        lines_skipped,
    })
}

/// Sparse binary user×item incidence with both row and column views.
///
/// Dense indices follow ascending original id, so index order and id order
/// coincide on both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionMatrix {
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl InteractionMatrix {
    /// Assembles a matrix from per-user item-index sets. `user_ids` and
    /// `item_ids` must be strictly ascending; each row is sorted and
    /// deduplicated here.
    pub fn from_rows(user_ids: Vec<u64>, item_ids: Vec<u64>, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        if user_ids.is_empty() || item_ids.is_empty() {
            return Err(Error::EmptyLog);
        }
        if rows.len() != user_ids.len() {
            return Err(Error::Config(format!(
                "{} rows for {} users",
                rows.len(),
                user_ids.len()
            )));
        }
        if !user_ids.windows(2).all(|w| w[0] < w[1]) || !item_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("ids must be strictly ascending".into()));
        }
        let mut cols = vec![Vec::new(); item_ids.len()];
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &i in row.iter() {
                let col = cols.get_mut(i as usize).ok_or_else(|| {
                    Error::range("item index", i, format!("< {}", item_ids.len()))
                })?;
                col.push(u as u32);
            }
        }
        Ok(Self {
            user_ids,
            item_ids,
            rows,
            cols,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    /// Number of `(user, item)` incidences.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn user_ids(&self) -> &[u64] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[u64] {
        &self.item_ids
    }

    /// Sorted item indices of user `u`.
    pub fn row(&self, u: usize) -> &[u32] {
        &self.rows[u]
    }

    /// Sorted user indices of item `i`.
    pub fn col(&self, i: usize) -> &[u32] {
        &self.cols[i]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<u32>] {
        &self.cols
    }

    /// Entity sets along `axis` (rows for users, columns for items).
    pub fn sets(&self, axis: Axis) -> &[Vec<u32>] {
        match axis {
            Axis::User => &self.rows,
            Axis::Item => &self.cols,
        }
    }

    pub fn ids(&self, axis: Axis) -> &[u64] {
        match axis {
            Axis::User => &self.user_ids,
            Axis::Item => &self.item_ids,
        }
    }

    pub fn population(&self, axis: Axis) -> usize {
        self.ids(axis).len()
    }

    pub fn user_index(&self, id: u64) -> Result<usize> {
        self.user_ids
            .binary_search(&id)
            .map_err(|_| Error::Lookup { kind: "user", id })
    }

    pub fn item_index(&self, id: u64) -> Result<usize> {
        self.item_ids
            .binary_search(&id)
            .map_err(|_| Error::Lookup { kind: "item", id })
    }

    pub fn contains(&self, u: usize, i: usize) -> bool {
        self.rows[u].binary_search(&(i as u32)).is_ok()
    }
}

/// Binarizes a log into an [`InteractionMatrix`]; weights are discarded.
pub fn build_interaction_matrix(log: &InteractionLog) -> Result<InteractionMatrix> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut user_ids: Vec<u64> = log.records.iter().map(|r| r.user).collect();
    user_ids.dedup(); // records are sorted by user
    let mut item_ids: Vec<u64> = log.records.iter().map(|r| r.item).collect();
    item_ids.sort_unstable();
    item_ids.dedup();

    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); user_ids.len()];
    let mut u = 0;
    for r in &log.records {
        while user_ids[u] != r.user {
            u += 1;
        }
        let i = item_ids.binary_search(&r.item).expect("item id collected above");
        rows[u].push(i as u32);
    }
    InteractionMatrix::from_rows(user_ids, item_ids, rows)
}

/// Entities of one axis ordered by descending interaction count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMap {
    axis: Axis,
    order: Vec<u32>,
    rank_of: Vec<u32>,
    counts: Vec<usize>,
}

impl RankMap {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Dense indices in rank order (position 0 is rank 1).
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Dense index of the entity at 1-based `rank`.
    pub fn index_at(&self, rank: usize) -> usize {
        self.order[rank - 1] as usize
    }

    /// 1-based rank of dense index `idx`.
    pub fn rank_of(&self, idx: usize) -> usize {
        self.rank_of[idx] as usize
    }

    /// Interaction count per dense index.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Interaction counts read in rank order.
    pub fn counts_by_rank(&self) -> Vec<usize> {
        self.order.iter().map(|&i| self.counts[i as usize]).collect()
    }
}

/// Ranks users or items by descending interaction count; ties go to the
/// smaller original id.
pub fn popularity_ranking(matrix: &InteractionMatrix, axis: Axis) -> RankMap {
    let counts: Vec<usize> = matrix.sets(axis).iter().map(Vec::len).collect();
    let mut order: Vec<u32> = (0..counts.len() as u32).collect();
    // Stable sort over ascending dense index == ascending id.
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]));
    let mut rank_of = vec![0u32; counts.len()];
    for (pos, &idx) in order.iter().enumerate() {
        rank_of[idx as usize] = pos as u32 + 1;
    }
    RankMap {
        axis,
        order,
        rank_of,
        counts,
    }
}

/// How many clicks each synthetic user makes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ClicksPerUser {
    /// Every user makes `clicks` draws.
    Fixed { clicks: usize },
    /// The user of rank `r` makes `max(1, round(max / r^exponent))` draws.
    Zipf { max: usize, exponent: f64 },
}

impl ClicksPerUser {
    pub fn for_user_rank(&self, rank: usize) -> usize {
        match *self {
            ClicksPerUser::Fixed { clicks } => clicks,
            ClicksPerUser::Zipf { max, exponent } => {
                ((max as f64) * rank_weight(rank, exponent)).round().max(1.0) as usize
            }
        }
    }

    fn max_clicks(&self) -> usize {
        match *self {
            ClicksPerUser::Fixed { clicks } => clicks,
            ClicksPerUser::Zipf { max, .. } => max,
        }
    }
}

/// How a user's click set is realised from `C` clicks on Zipf(s, M) items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InclusionModel {
    /// `C` i.i.d. Zipf draws, repeats collapsed; the set has at most `C` items.
    #[default]
    CollapsedDraws,
    /// Zipf draws repeated until `C` distinct items are clicked (`C <= M`).
    DistinctDraws,
    /// Item `i` is included independently with `1 - (1 - pmf(i))^C`.
    Bernoulli,
}

impl InclusionModel {
    pub fn as_str(self) -> &'static str {
        match self {
            InclusionModel::CollapsedDraws => "collapsed-draws",
            InclusionModel::DistinctDraws => "distinct-draws",
            InclusionModel::Bernoulli => "bernoulli",
        }
    }
}

impl std::str::FromStr for InclusionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collapsed-draws" | "iid-draws" => Ok(InclusionModel::CollapsedDraws),
            "distinct-draws" => Ok(InclusionModel::DistinctDraws),
            "bernoulli" | "bernoulli-inclusion" => Ok(InclusionModel::Bernoulli),
            other => Err(Error::Config(format!("unknown inclusion model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub users: usize,
    pub items: usize,
    pub clicks: ClicksPerUser,
    pub exponent: f64,
    pub seed: u64,
    pub inclusion: InclusionModel,
}

impl GeneratorConfig {
    pub fn new(users: usize, items: usize, clicks: usize, exponent: f64, seed: u64) -> Self {
        Self {
            users,
            items,
            clicks: ClicksPerUser::Fixed { clicks },
            exponent,
            seed,
            inclusion: InclusionModel::CollapsedDraws,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::Config("users must be >= 1".into()));
        }
        if self.items == 0 {
            return Err(Error::Config("items must be >= 1".into()));
        }
        if self.clicks.max_clicks() == 0 {
            return Err(Error::Config("clicks per user must be >= 1".into()));
        }
        if let ClicksPerUser::Zipf { exponent, .. } = self.clicks {
            if !exponent.is_finite() || exponent < 0.0 {
                return Err(Error::Config("user click exponent must be finite and >= 0".into()));
            }
        }
        if self.inclusion == InclusionModel::DistinctDraws && self.clicks.max_clicks() > self.items {
            return Err(Error::Config(format!(
                "distinct-draws needs clicks <= items ({} > {})",
                self.clicks.max_clicks(),
                self.items
            )));
        }
        Ok(())
    }
}

/// Draws one user's clicks. Returns `(item rank, number of draws)` pairs sorted
/// by rank; for the Bernoulli model the draw count is 1.
pub(crate) fn draw_click_set<R: rand::Rng + ?Sized>(
    rng: &mut R,
    sampler: &ZipfSampler,
    inclusion: InclusionModel,
    clicks: usize,
    inclusion_probs: &[f64],
) -> Vec<(usize, u64)> {
    match inclusion {
        InclusionModel::CollapsedDraws => {
            let mut draws: Vec<usize> = (0..clicks).map(|_| sampler.sample(rng)).collect();
            draws.sort_unstable();
            run_lengths(&draws)
        }
        InclusionModel::DistinctDraws => {
            let mut seen: BTreeMap<usize, u64> = BTreeMap::new();
            while seen.len() < clicks {
                *seen.entry(sampler.sample(rng)).or_insert(0) += 1;
            }
            seen.into_iter().collect()
        }
        InclusionModel::Bernoulli => inclusion_probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| rng.random::<f64>() < p)
            .map(|(i, _)| (i + 1, 1))
            .collect(),
    }
}

fn run_lengths(sorted: &[usize]) -> Vec<(usize, u64)> {
    let mut out: Vec<(usize, u64)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((v, n)) if *v == x => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Per-user click sets `(rank, draws)`; user `u` (0-based) has user rank `u + 1`
/// and draws from its own random stream.
fn synthetic_click_sets(config: &GeneratorConfig) -> Result<Vec<Vec<(usize, u64)>>> {
    config.validate()?;
    let model = ZipfModel::new(config.exponent, config.items)?;
    let sampler = ZipfSampler::new(&model);
    let pmf = model.pmf_vec();
    let per_user_probs = |clicks: usize| -> Vec<f64> {
        pmf.iter()
            .map(|&p| crate::expectation::inclusion_probability(p, clicks))
            .collect()
    };
    let fixed_probs = match (config.inclusion, config.clicks) {
        (InclusionModel::Bernoulli, ClicksPerUser::Fixed { clicks }) => Some(per_user_probs(clicks)),
        _ => None,
    };
    Ok((0..config.users)
        .into_par_iter()
        .map(|u| {
            let clicks = config.clicks.for_user_rank(u + 1);
            let mut rng = rng::stream(config.seed, u as u64);
            match (&fixed_probs, config.inclusion) {
                (Some(p), _) => draw_click_set(&mut rng, &sampler, config.inclusion, clicks, p),
                (None, InclusionModel::Bernoulli) => {
                    let p = per_user_probs(clicks);
                    draw_click_set(&mut rng, &sampler, config.inclusion, clicks, &p)
                }
                (None, _) => draw_click_set(&mut rng, &sampler, config.inclusion, clicks, &[]),
            }
        })
        .collect())
}

/// Synthetic click log: user ids `1..=W`, item ids are Zipf ranks `1..=M`, and
/// each weight is the number of draws that landed on the item.
pub fn generate_synthetic_log(config: &GeneratorConfig) -> Result<InteractionLog> {
    let sets = synthetic_click_sets(config)?;
    let records = sets.into_iter().enumerate().flat_map(|(u, set)| {
        set.into_iter().map(move |(rank, draws)| Record {
            user: u as u64 + 1,
            item: rank as u64,
            weight: draws,
        })
    });
    let log = InteractionLog::from_records(records)?;
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(log)
}

/// Synthetic click matrix over the full `W × M` id space (items nobody clicked
/// keep an empty column), so dense item index `i` is Zipf rank `i + 1`.
/// Deterministic in `config.seed` and identical in content to
/// [`generate_synthetic_log`].
pub fn generate_synthetic(config: &GeneratorConfig) -> Result<InteractionMatrix> {
    let sets = synthetic_click_sets(config)?;
    let rows = sets
        .into_iter()
        .map(|set| set.into_iter().map(|(rank, _)| rank as u32 - 1).collect())
        .collect();
    InteractionMatrix::from_rows(
        (1..=config.users as u64).collect(),
        (1..=config.items as u64).collect(),
        rows,
    )
}
