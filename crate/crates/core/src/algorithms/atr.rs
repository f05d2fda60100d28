use std::ops::AddAssign;

use serde::Serialize;

use super::{new_result, parse_value, AlgorithmConfig, Diagnostics, Epoch, RankingResult};
use crate::model::{TemporalBipartiteGraph, YearSlice};
use crate::{Error, Result};

/// What a user's quality term is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualityCentering {
    /// Mean current quality of the items the user rated this year, which makes
    /// the reputation numerator a weighted covariance.
    #[default]
    RaterMean,
    /// The item's quality at the previous inner iterate.
    PreviousIterate,
}

/// How R_i(t) depends on R_i(t−1) through the user's behavioural factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReputationCoupling {
    /// R solves R = P / (accu_i(R) · L); accu_i is linear in R, so
    /// R = sqrt(P / (a_i · L)) with a_i the factor at unit reputation.
    #[default]
    SelfConsistent,
    /// R(t) = P / (accu_i(R(t−1)) · L), evaluated with the previous iterate.
    Lagged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtrConfig {
    /// Inner loop stops once max |ΔQ| falls below this.
    pub convergence_threshold: f64,
    pub max_inner_iterations: usize,
    /// Floor for every quantity that divides or is square-rooted.
    pub epsilon: f64,
    pub clamp_negative_reputation: bool,
    pub centering: QualityCentering,
    pub coupling: ReputationCoupling,
    /// Rescale this year's qualities after each step so their mean is kept.
    pub rescale_quality: bool,
}

impl Default for AtrConfig {
    fn default() -> Self {
        Self {
            convergence_threshold: 1e-4,
            max_inner_iterations: 1000,
            epsilon: 1e-6,
            clamp_negative_reputation: true,
            centering: QualityCentering::RaterMean,
            coupling: ReputationCoupling::SelfConsistent,
            rescale_quality: true,
        }
    }
}

impl AtrConfig {
    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "threshold" | "convergence_threshold" => self.convergence_threshold = parse_value(key, value)?,
            "max_iterations" | "max_inner_iterations" => self.max_inner_iterations = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "clamp_negative_reputation" => self.clamp_negative_reputation = parse_value(key, value)?,
            "rescale_quality" => self.rescale_quality = parse_value(key, value)?,
            "centering" => {
                self.centering = match value.trim() {
                    "rater-mean" => QualityCentering::RaterMean,
                    "previous-iterate" => QualityCentering::PreviousIterate,
                    other => {
                        return Err(Error::Config(format!(
                            "centering must be `rater-mean` or `previous-iterate`, got `{other}`"
                        )))
                    }
                }
            }
            "coupling" => {
                self.coupling = match value.trim() {
                    "self-consistent" => ReputationCoupling::SelfConsistent,
                    "lagged" => ReputationCoupling::Lagged,
                    other => {
                        return Err(Error::Config(format!(
                            "coupling must be `self-consistent` or `lagged`, got `{other}`"
                        )))
                    }
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        super::check_threshold(self.convergence_threshold, self.max_inner_iterations)
    }
}

/// Guard activations, summed over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FloorCounts {
    /// Q_α(t−1) < ε in a behavioural factor.
    pub quality: u64,
    /// r_iα < ε under a square root.
    pub rating: u64,
    /// accu_i(t) < ε.
    pub user_factor: u64,
    /// σ_i < ε.
    pub user_sigma: u64,
    /// σ̃_α < ε.
    pub item_sigma: u64,
    /// ln max_j k_j(t) < ε, i.e. every user rated once that year.
    pub log_normalizer: u64,
    /// Σ_t W̃_α(t) < ε.
    pub weight_total: u64,
    /// Initial quality fell back to the plain mean.
    pub init_fallback: u64,
    pub negative_reputation: u64,
    /// Step discarded because the new mean quality was not positive.
    pub rescale_skipped: u64,
}

impl AddAssign for FloorCounts {
    fn add_assign(&mut self, o: Self) {
        self.quality += o.quality;
        self.rating += o.rating;
        self.user_factor += o.user_factor;
        self.user_sigma += o.user_sigma;
        self.item_sigma += o.item_sigma;
        self.log_normalizer += o.log_normalizer;
        self.weight_total += o.weight_total;
        self.init_fallback += o.init_fallback;
        self.negative_reputation += o.negative_reputation;
        self.rescale_skipped += o.rescale_skipped;
    }
}

impl FloorCounts {
    fn record(&self, d: &mut Diagnostics) {
        d.count("floor_quality", self.quality);
        d.count("floor_rating", self.rating);
        d.count("floor_user_factor", self.user_factor);
        d.count("floor_user_sigma", self.user_sigma);
        d.count("floor_item_sigma", self.item_sigma);
        d.count("floor_log_normalizer", self.log_normalizer);
        d.count("floor_weight_total", self.weight_total);
        d.count("init_quality_fallback", self.init_fallback);
        d.count("negative_reputation_clamped", self.negative_reputation);
        d.count("rescale_skipped", self.rescale_skipped);
    }
}

/// W_i(t) = k_i(t)/N(t) and W̃_α(t) = k̃_α(t)/N(t), aligned with the slice's
/// `users()` and `items()`.
#[derive(Debug, Clone, PartialEq)]
pub struct YearWeights {
    pub year: i32,
    pub users: Vec<f64>,
    pub items: Vec<f64>,
}

pub fn atr_year_weights(slice: &YearSlice) -> YearWeights {
    let n = slice.n_ratings() as f64;
    YearWeights {
        year: slice.year(),
        users: (0..slice.users().len()).map(|p| slice.user_degree_at(p) as f64 / n).collect(),
        items: (0..slice.items().len()).map(|p| slice.item_degree_at(p) as f64 / n).collect(),
    }
}

/// Running reputations and qualities plus the statistics every step reads.
#[derive(Debug, Clone)]
pub struct AtrState {
    pub reputation: Vec<f64>,
    pub quality: Vec<f64>,
    /// Quality before the latest update.
    pub previous_quality: Vec<f64>,
    /// r̄_i over all years.
    pub user_mean: Vec<f64>,
    /// σ_i over all years.
    pub user_std: Vec<f64>,
    /// σ̃_α over all years.
    pub item_std: Vec<f64>,
    /// Σ_t W̃_α(t).
    pub item_weight_total: Vec<f64>,
    pub floors: FloorCounts,
}

/// Initial reputation is the year-weighted rating sum over the user's total
/// degree; initial quality the reputation- and year-weighted mean rating.
pub fn atr_initialize(graph: &TemporalBipartiteGraph) -> AtrState {
    let (n_users, n_items) = (graph.n_users(), graph.n_items());
    let mut rep_num = vec![0.0; n_users];
    let mut item_weight_total = vec![0.0; n_items];
    let weights: Vec<YearWeights> = graph.slices().iter().map(atr_year_weights).collect();
    for (slice, w) in graph.slices().iter().zip(&weights) {
        for (p, &user) in slice.users().iter().enumerate() {
            rep_num[user] += slice.user_edges(p).iter().map(|e| e.rating).sum::<f64>() * w.users[p];
        }
        for (q, &item) in slice.items().iter().enumerate() {
            item_weight_total[item] += w.items[q];
        }
    }
    let reputation: Vec<f64> = rep_num
        .iter()
        .enumerate()
        .map(|(i, num)| num / graph.pooled().user_degree(i) as f64)
        .collect();

    let mut q_num = vec![0.0; n_items];
    let mut q_den = vec![0.0; n_items];
    for (slice, w) in graph.slices().iter().zip(&weights) {
        for e in slice.edges() {
            let q = slice.item_position(e.item).expect("edge item is in its slice");
            let weight = reputation[e.user] * w.items[q];
            q_num[e.item] += e.rating * weight;
            q_den[e.item] += weight;
        }
    }
    let mut floors = FloorCounts::default();
    let quality: Vec<f64> = (0..n_items)
        .map(|a| {
            if q_den[a] > 0.0 {
                q_num[a] / q_den[a]
            } else {
                floors.init_fallback += 1;
                graph.item_stats(a).mean
            }
        })
        .collect();

    AtrState {
        reputation,
        previous_quality: quality.clone(),
        quality,
        user_mean: (0..n_users).map(|i| graph.user_stats(i).mean).collect(),
        user_std: (0..n_users).map(|i| graph.user_stats(i).std).collect(),
        item_std: (0..n_items).map(|a| graph.item_stats(a).std).collect(),
        item_weight_total,
        floors,
    }
}

/// accu_i(t) and accu_α(t), aligned with the slice's users and items.
#[derive(Debug, Clone, PartialEq)]
pub struct BehavioralFactors {
    /// accu_i(t), floored at ε.
    pub users: Vec<f64>,
    /// accu_i(t) / R_i(t−1): the factor at unit reputation, never floored.
    pub user_activity: Vec<f64>,
    pub items: Vec<f64>,
    pub floors: FloorCounts,
}

/// accu_i(t) = R_i(t−1)/√k_i(t) · Σ_α k̃_α(t) / (Q_α(t−1)·√r_iα) and
/// accu_α(t) = Σ_i R_i(t−1)·Q_α(t−1)/k̃_α(t) · (1 − 1/√k_i(t)).
pub fn atr_behavioral_factors(state: &AtrState, slice: &YearSlice, config: &AtrConfig) -> BehavioralFactors {
    let eps = config.epsilon;
    let mut floors = FloorCounts::default();
    let n_users = slice.users().len();
    let mut users = Vec::with_capacity(n_users);
    let mut user_activity = Vec::with_capacity(n_users);
    for (p, &user) in slice.users().iter().enumerate() {
        let k = slice.user_degree_at(p) as f64;
        let mut sum = 0.0;
        for e in slice.user_edges(p) {
            let kt = slice.item_degree(e.item) as f64;
            let q = state.quality[e.item];
            if q < eps {
                floors.quality += 1;
            }
            if e.rating < eps {
                floors.rating += 1;
            }
            sum += kt / (q.max(eps) * e.rating.max(eps).sqrt());
        }
        let activity = sum / k.sqrt();
        let mut accu = state.reputation[user] * activity;
        if !(accu >= eps) {
            floors.user_factor += 1;
            accu = eps;
        }
        users.push(accu);
        user_activity.push(activity);
    }

    let items = slice
        .items()
        .iter()
        .enumerate()
        .map(|(q, &item)| {
            let kt = slice.item_degree_at(q) as f64;
            slice
                .item_edge_ids(q)
                .iter()
                .map(|&e| {
                    let edge = slice.edges()[e];
                    let k = slice.user_degree_at(slice.edge_user_pos(e)) as f64;
                    state.reputation[edge.user] * state.quality[item] / kt * (1.0 - 1.0 / k.sqrt())
                })
                .sum()
        })
        .collect();
    BehavioralFactors {
        users,
        user_activity,
        items,
        floors,
    }
}

/// The raw outputs of one update, aligned with the slice.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochUpdate {
    pub reputation: Vec<f64>,
    pub quality: Vec<f64>,
}

/// One update of this year's users and items; others keep their values.
///
/// R_i(t) = 1/(accu_i(t)·L) · Σ_α [W_i(t)(r_iα − r̄_i)/σ_i] · [W̃_α(t)(Q_α − c)/√(σ̃_α/k_i(t))]
/// with L = ln max_j k_j(t) and c the configured centring, then
/// Q_α(t) = Σ_i W̃_α(t)·r_iα / Σ_t' W̃_α(t') · accu_α(t) · k̃_α(t).
pub fn atr_epoch_update(
    state: &mut AtrState,
    slice: &YearSlice,
    factors: &BehavioralFactors,
    config: &AtrConfig,
) -> EpochUpdate {
    let eps = config.epsilon;
    let mut floors = FloorCounts::default();
    let weights = atr_year_weights(slice);
    let mut log_norm = (slice.max_user_degree() as f64).ln();
    if log_norm < eps {
        floors.log_normalizer += 1;
        log_norm = eps;
    }

    let mut reputation = Vec::with_capacity(slice.users().len());
    for (p, &user) in slice.users().iter().enumerate() {
        let edges = slice.user_edges(p);
        let k = edges.len() as f64;
        let sigma = if state.user_std[user] < eps {
            floors.user_sigma += 1;
            eps
        } else {
            state.user_std[user]
        };
        let rater_mean = match config.centering {
            QualityCentering::RaterMean => edges.iter().map(|e| state.quality[e.item]).sum::<f64>() / k,
            QualityCentering::PreviousIterate => 0.0,
        };
        let mut numerator = 0.0;
        for e in edges {
            let q = slice.item_position(e.item).expect("edge item is in its slice");
            let centre = match config.centering {
                QualityCentering::RaterMean => rater_mean,
                QualityCentering::PreviousIterate => state.previous_quality[e.item],
            };
            let item_sigma = if state.item_std[e.item] < eps {
                floors.item_sigma += 1;
                eps
            } else {
                state.item_std[e.item]
            };
            let rating_term = weights.users[p] * (e.rating - state.user_mean[user]) / sigma;
            let quality_term = weights.items[q] * (state.quality[e.item] - centre) / (item_sigma / k).sqrt();
            numerator += rating_term * quality_term;
        }
        let mut r = match config.coupling {
            ReputationCoupling::Lagged => numerator / (factors.users[p] * log_norm),
            ReputationCoupling::SelfConsistent => {
                let c = numerator / (factors.user_activity[p] * log_norm);
                c.signum() * c.abs().sqrt()
            }
        };
        if r < 0.0 && config.clamp_negative_reputation {
            floors.negative_reputation += 1;
            r = 0.0;
        }
        reputation.push(r);
    }

    let quality: Vec<f64> = slice
        .items()
        .iter()
        .enumerate()
        .map(|(q, &item)| {
            let weighted: f64 = slice
                .item_edge_ids(q)
                .iter()
                .map(|&e| weights.items[q] * slice.edges()[e].rating)
                .sum();
            let total = if state.item_weight_total[item] < eps {
                floors.weight_total += 1;
                eps
            } else {
                state.item_weight_total[item]
            };
            weighted / total * factors.items[q] * slice.item_degree_at(q) as f64
        })
        .collect();

    for (&item, &q) in slice.items().iter().zip(&quality) {
        state.previous_quality[item] = state.quality[item];
        state.quality[item] = q;
    }
    for (&user, &r) in slice.users().iter().zip(&reputation) {
        state.reputation[user] = r;
    }
    state.floors += floors;
    EpochUpdate { reputation, quality }
}

/// Chronological pass over the years; within a year, factors and update
/// repeat until this year's qualities move by less than the threshold.
pub fn atr_run(graph: &TemporalBipartiteGraph, config: &AtrConfig) -> Result<RankingResult> {
    config.validate()?;
    let mut state = atr_initialize(graph);
    let mut diagnostics = Diagnostics {
        converged: true,
        ..Diagnostics::default()
    };
    for slice in graph.slices() {
        let items = slice.items();
        let mut before = vec![0.0; items.len()];
        let mut iterations = 0;
        let mut delta = f64::INFINITY;
        let mut converged = false;
        while iterations < config.max_inner_iterations {
            iterations += 1;
            for (b, &item) in before.iter_mut().zip(items) {
                *b = state.quality[item];
            }
            let factors = atr_behavioral_factors(&state, slice, config);
            state.floors += factors.floors;
            atr_epoch_update(&mut state, slice, &factors, config);
            if config.rescale_quality {
                rescale(&mut state, items, &before);
            }
            delta = items
                .iter()
                .zip(&before)
                .map(|(&item, b)| (state.quality[item] - b).abs())
                .fold(0.0, f64::max);
            if !delta.is_finite() || items.iter().any(|&a| !state.quality[a].is_finite()) {
                diagnostics
                    .warnings
                    .push(format!("year {}: qualities became non-finite", slice.year()));
                delta = f64::NAN;
                break;
            }
            if delta < config.convergence_threshold {
                converged = true;
                break;
            }
        }
        if !converged {
            diagnostics.converged = false;
            diagnostics.warnings.push(format!(
                "year {} stopped after {iterations} iterations with max |dQ| = {delta:e}",
                slice.year()
            ));
        }
        diagnostics.epochs.push(Epoch {
            year: Some(slice.year()),
            iterations,
            converged,
            final_delta: delta,
        });
    }
    state.floors.record(&mut diagnostics);
    Ok(new_result(
        graph,
        AlgorithmConfig::Atr(config.clone()),
        state.quality,
        Some(state.reputation),
        diagnostics,
    ))
}

fn rescale(state: &mut AtrState, items: &[usize], before: &[f64]) {
    let n = items.len() as f64;
    let old_mean = before.iter().sum::<f64>() / n;
    let new_mean = items.iter().map(|&a| state.quality[a]).sum::<f64>() / n;
    if new_mean > 0.0 && new_mean.is_finite() && old_mean.is_finite() {
        let factor = old_mean / new_mean;
        items.iter().for_each(|&a| state.quality[a] *= factor);
    } else {
        state.floors.rescale_skipped += 1;
        items.iter().zip(before).for_each(|(&a, &b)| state.quality[a] = b);
    }
}
