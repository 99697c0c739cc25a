//! Quantitative measures of popularity skew ("Matthew effect") and sparsity in
//! user-based and item-based collaborative filtering.
//!
//! The crate is organised bottom-up:
//!
//! * [`zipf`] – the rank distribution every model is built on.
//! * [`interactions`] – click logs, the sparse binary user×item matrix, popularity
//!   rankings and a synthetic Zipf click generator.
//! * [`similarity`] – Jaccard / cosine kernels, an inverted-index pairwise engine,
//!   rank-binned heatmaps and neighbourhood-size profiles.
//! * [`expectation`] – closed-form expectations of the similarity and
//!   neighbourhood measures under Zipf clicks.
//! * [`montecarlo`] – seeded simulations estimating the same quantities, with
//!   standard errors, so the closed forms can be checked empirically.
//! * [`export`] – CSV / JSON / SVG writers shared by the command line tool.

pub mod error;
pub mod expectation;
pub mod export;
pub mod interactions;
pub mod montecarlo;
pub mod rng;
pub mod similarity;
pub mod stats;
pub mod zipf;

pub use error::{Error, Result};
pub use expectation::{
    ExpectationConfig, ItemPairModel, Mode, NeighborVariant, Norm, OverlapDistribution,
};
pub use interactions::{
    Axis, ClicksPerUser, GeneratorConfig, InclusionModel, InteractionLog, InteractionMatrix,
    RankMap, Record,
};
pub use montecarlo::{EstimateReport, SimConfig};
pub use similarity::{HeatmapGrid, Metric, NeighborhoodProfile, SimilarityMatrix};
pub use zipf::{ZipfModel, ZipfSampler};

/// Version string embedded in every exported report.
pub const TOOL_VERSION: &str = concat!("cfskew ", env!("CARGO_PKG_VERSION"));
