//! The six ranking algorithms behind one contract: a graph and a
//! configuration in, a [`RankingResult`] out.
//!
//! | name     | item quality from                                      |
//! |----------|--------------------------------------------------------|
//! | `avg`    | plain mean rating                                      |
//! | `ir`     | mean weighted by inverse squared rating error          |
//! | `cr`     | mean weighted by clamped Pearson correlation           |
//! | `iarr`   | `cr` with power-law reputation redistribution          |
//! | `birank` | coupled propagation on the normalised rating matrix    |
//! | `atr`    | year-by-year accumulation with behavioural factors     |
//!
//! Every algorithm is a pure function of `(graph, config)`.

mod atr;
mod average;
mod birank;
mod correlation;
mod output;
mod refinement;

pub use atr::{
    atr_behavioral_factors, atr_epoch_update, atr_initialize, atr_run, atr_year_weights, AtrConfig,
    AtrState, BehavioralFactors, EpochUpdate, FloorCounts, QualityCentering, ReputationCoupling,
    YearWeights,
};
pub use average::average_score;
pub use birank::{birank, birank_from, BiRankConfig, QueryVectors};
pub use correlation::{correlation_ranking, iarr, pearson, redistribute, CrConfig, IarrConfig};
pub use output::{read_result_csv, write_result_csv, ScoreTable};
pub use refinement::{iterative_refinement, IrConfig};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{Adjacency, RatingScale, TemporalBipartiteGraph};
use crate::{Error, Result};

/// Algorithm tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Avg,
    Ir,
    Cr,
    Iarr,
    BiRank,
    Atr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Avg,
        Algorithm::Ir,
        Algorithm::Cr,
        Algorithm::Iarr,
        Algorithm::BiRank,
        Algorithm::Atr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Avg => "avg",
            Algorithm::Ir => "ir",
            Algorithm::Cr => "cr",
            Algorithm::Iarr => "iarr",
            Algorithm::BiRank => "birank",
            Algorithm::Atr => "atr",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm `{s}` (expected one of avg, ir, cr, iarr, birank, atr)"
                ))
            })
    }
}

/// Configuration of one algorithm run; echoed into its result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum AlgorithmConfig {
    Avg,
    Ir(IrConfig),
    Cr(CrConfig),
    Iarr(IarrConfig),
    BiRank(BiRankConfig),
    Atr(AtrConfig),
}

impl AlgorithmConfig {
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Avg => AlgorithmConfig::Avg,
            Algorithm::Ir => AlgorithmConfig::Ir(IrConfig::default()),
            Algorithm::Cr => AlgorithmConfig::Cr(CrConfig::default()),
            Algorithm::Iarr => AlgorithmConfig::Iarr(IarrConfig::default()),
            Algorithm::BiRank => AlgorithmConfig::BiRank(BiRankConfig::default()),
            Algorithm::Atr => AlgorithmConfig::Atr(AtrConfig::default()),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmConfig::Avg => Algorithm::Avg,
            AlgorithmConfig::Ir(_) => Algorithm::Ir,
            AlgorithmConfig::Cr(_) => Algorithm::Cr,
            AlgorithmConfig::Iarr(_) => Algorithm::Iarr,
            AlgorithmConfig::BiRank(_) => Algorithm::BiRank,
            AlgorithmConfig::Atr(_) => Algorithm::Atr,
        }
    }

    /// Applies `key = value` overrides; unknown keys are an error.
    pub fn with_overrides(mut self, overrides: &BTreeMap<String, String>) -> Result<Self> {
        for (key, value) in overrides {
            let known = match &mut self {
                AlgorithmConfig::Avg => false,
                AlgorithmConfig::Ir(c) => c.set(key, value)?,
                AlgorithmConfig::Cr(c) => c.set(key, value)?,
                AlgorithmConfig::Iarr(c) => c.set(key, value)?,
                AlgorithmConfig::BiRank(c) => c.set(key, value)?,
                AlgorithmConfig::Atr(c) => c.set(key, value)?,
            };
            if !known {
                return Err(Error::Config(format!(
                    "`{key}` is not a parameter of {}",
                    self.algorithm()
                )));
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmConfig::Avg => Ok(()),
            AlgorithmConfig::Ir(c) => c.validate(),
            AlgorithmConfig::Cr(c) => c.validate(),
            AlgorithmConfig::Iarr(c) => c.validate(),
            AlgorithmConfig::BiRank(c) => c.validate(),
            AlgorithmConfig::Atr(c) => c.validate(),
        }
    }
}

/// Runs the configured algorithm.
pub fn rank(graph: &TemporalBipartiteGraph, config: &AlgorithmConfig) -> Result<RankingResult> {
    config.validate()?;
    match config {
        AlgorithmConfig::Avg => average_score(graph),
        AlgorithmConfig::Ir(c) => iterative_refinement(graph, c),
        AlgorithmConfig::Cr(c) => correlation_ranking(graph, c),
        AlgorithmConfig::Iarr(c) => iarr(graph, c),
        AlgorithmConfig::BiRank(c) => birank(graph, c),
        AlgorithmConfig::Atr(c) => atr_run(graph, c),
    }
}

/// One convergence epoch: a whole run, or one year for `atr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epoch {
    pub year: Option<i32>,
    pub iterations: usize,
    pub converged: bool,
    pub final_delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub epochs: Vec<Epoch>,
    /// Guard activations and other degenerate-input counts, by name.
    pub counters: BTreeMap<String, u64>,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    fn single_epoch(iterations: usize, converged: bool, final_delta: f64) -> Self {
        Self {
            converged,
            epochs: vec![Epoch {
                year: None,
                iterations,
                converged,
                final_delta,
            }],
            ..Self::default()
        }
    }

    fn count(&mut self, name: &str, n: u64) {
        if n > 0 {
            *self.counters.entry(name.to_string()).or_default() += n;
        }
    }
}

/// Per-item quality, per-user reputation and how the run went.
#[derive(Debug, Clone, Serialize)]
pub struct RankingResult {
    pub algorithm: Algorithm,
    pub config: AlgorithmConfig,
    #[serde(skip)]
    pub item_ids: Arc<Vec<String>>,
    #[serde(skip)]
    pub user_ids: Arc<Vec<String>>,
    /// Q_α, indexed like the graph's items.
    pub quality: Vec<f64>,
    /// R_i, indexed like the graph's users; `None` for `avg`.
    pub reputation: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl RankingResult {
    pub fn converged(&self) -> bool {
        self.diagnostics.converged
    }

    /// Total iterations over all epochs.
    pub fn iterations(&self) -> usize {
        self.diagnostics.epochs.iter().map(|e| e.iterations).sum()
    }

    pub fn quality_of(&self, item: &str) -> Option<f64> {
        self.item_ids.iter().position(|i| i == item).map(|a| self.quality[a])
    }

    pub fn reputation_of(&self, user: &str) -> Option<f64> {
        let rep = self.reputation.as_ref()?;
        self.user_ids.iter().position(|u| u == user).map(|i| rep[i])
    }

    /// Item indexes by descending quality; ties by ascending identifier.
    pub fn ranked_items(&self) -> Vec<usize> {
        crate::metrics::rank_order(&self.item_ids, &self.quality)
    }

    /// Item identifiers by descending quality.
    pub fn ranked_item_ids(&self) -> Vec<&str> {
        self.ranked_items().into_iter().map(|a| self.item_ids[a].as_str()).collect()
    }

    /// Min–max rescale of the qualities onto `[scale.min, scale.max]`.
    /// Monotone, so no ranking metric changes.
    pub fn rescaled_quality(&self, scale: RatingScale) -> Vec<f64> {
        let (lo, hi) = self
            .quality
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)));
        if !(hi > lo) {
            return vec![(scale.min + scale.max) / 2.0; self.quality.len()];
        }
        self.quality
            .iter()
            .map(|q| scale.min + (q - lo) / (hi - lo) * (scale.max - scale.min))
            .collect()
    }
}

pub(crate) fn new_result(
    graph: &TemporalBipartiteGraph,
    config: AlgorithmConfig,
    quality: Vec<f64>,
    reputation: Option<Vec<f64>>,
    diagnostics: Diagnostics,
) -> RankingResult {
    RankingResult {
        algorithm: config.algorithm(),
        config,
        item_ids: Arc::clone(graph.item_ids()),
        user_ids: Arc::clone(graph.user_ids()),
        quality,
        reputation,
        diagnostics,
    }
}

/// Eq. (2): reputation-weighted mean rating per item over pooled links.
/// `None` where every rater has zero reputation.
pub(crate) fn weighted_quality(pooled: &Adjacency, n_items: usize, reputation: &[f64]) -> Vec<Option<f64>> {
    let mut num = vec![0.0; n_items];
    let mut den = vec![0.0; n_items];
    for (pos, &item) in pooled.items().iter().enumerate() {
        for &e in pooled.item_edge_ids(pos) {
            let edge = pooled.edges()[e];
            num[item] += reputation[edge.user] * edge.rating;
            den[item] += reputation[edge.user];
        }
    }
    num.into_iter()
        .zip(den)
        .map(|(n, d)| if d > 0.0 { Some(n / d) } else { None })
        .collect()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for `{key}`")))
}

pub(crate) fn check_threshold(threshold: f64, max_iterations: usize) -> Result<()> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("threshold must be > 0, got {threshold}")));
    }
    if max_iterations == 0 {
        return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
    }
    Ok(())
}
