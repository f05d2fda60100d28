use serde::Serialize;

use super::{check_threshold, max_abs_diff, new_result, parse_value, weighted_quality, AlgorithmConfig, Diagnostics, RankingResult};
use crate::model::TemporalBipartiteGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrConfig {
    /// Added to the squared error before inversion.
    pub epsilon: f64,
    pub threshold: f64,
    pub max_iterations: usize,
}

impl Default for IrConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            threshold: 1e-6,
            max_iterations: 1000,
        }
    }
}

impl IrConfig {
    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "threshold" => self.threshold = parse_value(key, value)?,
            "max_iterations" => self.max_iterations = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        check_threshold(self.threshold, self.max_iterations)
    }
}

/// Reputation is the inverse mean squared deviation of a user's ratings from
/// the current qualities; quality is the reputation-weighted mean.
pub fn iterative_refinement(graph: &TemporalBipartiteGraph, config: &IrConfig) -> Result<RankingResult> {
    config.validate()?;
    let pooled = graph.pooled();
    let n_items = graph.n_items();
    let mut reputation = vec![1.0; graph.n_users()];
    let mut quality: Vec<f64> = weighted_quality(pooled, n_items, &reputation)
        .into_iter()
        .map(|q| q.unwrap_or(f64::NAN))
        .collect();

    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        for (pos, &user) in pooled.users().iter().enumerate() {
            let edges = pooled.user_edges(pos);
            let d = edges.iter().map(|e| (e.rating - quality[e.item]).powi(2)).sum::<f64>() / edges.len() as f64;
            reputation[user] = 1.0 / (d + config.epsilon);
        }
        let next: Vec<f64> = weighted_quality(pooled, n_items, &reputation)
            .into_iter()
            .zip(&quality)
            .map(|(q, &prev)| q.unwrap_or(prev))
            .collect();
        delta = max_abs_diff(&next, &quality);
        quality = next;
        if delta < config.threshold {
            converged = true;
            break;
        }
    }
    let diagnostics = Diagnostics::single_epoch(iterations, converged, delta);
    Ok(new_result(
        graph,
        AlgorithmConfig::Ir(config.clone()),
        quality,
        Some(reputation),
        diagnostics,
    ))
}
