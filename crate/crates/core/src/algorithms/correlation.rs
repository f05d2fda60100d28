use serde::Serialize;

use super::{
    check_threshold, max_abs_diff, new_result, parse_value, weighted_quality, AlgorithmConfig, Diagnostics,
    RankingResult,
};
use crate::model::TemporalBipartiteGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrConfig {
    pub threshold: f64,
    pub max_iterations: usize,
}

impl Default for CrConfig {
    fn default() -> Self {
        Self {
            threshold: 1e-6,
            max_iterations: 1000,
        }
    }
}

impl CrConfig {
    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "threshold" => self.threshold = parse_value(key, value)?,
            "max_iterations" => self.max_iterations = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        check_threshold(self.threshold, self.max_iterations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IarrConfig {
    /// Redistribution exponent; 1 reduces to plain correlation ranking.
    pub phi: f64,
    pub threshold: f64,
    pub max_iterations: usize,
}

impl Default for IarrConfig {
    fn default() -> Self {
        Self {
            phi: 2.0,
            threshold: 1e-6,
            max_iterations: 1000,
        }
    }
}

impl IarrConfig {
    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "phi" => self.phi = parse_value(key, value)?,
            "threshold" => self.threshold = parse_value(key, value)?,
            "max_iterations" => self.max_iterations = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.phi >= 1.0 && self.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be >= 1, got {}", self.phi)));
        }
        check_threshold(self.threshold, self.max_iterations)
    }
}

/// Pearson correlation with population moments; `None` when fewer than two
/// points or either side is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// R_i = TR_i^φ · ΣTR / ΣTR^φ. Fails when every TR_i is zero.
pub fn redistribute(tr: &[f64], phi: f64) -> Result<Vec<f64>> {
    let total: f64 = tr.iter().sum();
    let powered: Vec<f64> = tr.iter().map(|t| t.powf(phi)).collect();
    let total_powered: f64 = powered.iter().sum();
    if !(total > 0.0) || !(total_powered > 0.0) {
        return Err(Error::DegenerateReputation);
    }
    if phi == 1.0 {
        return Ok(tr.to_vec());
    }
    Ok(powered.into_iter().map(|p| p * total / total_powered).collect())
}

/// Reputation is the clamped correlation between a user's ratings and the
/// current qualities of the items they rated.
pub fn correlation_ranking(graph: &TemporalBipartiteGraph, config: &CrConfig) -> Result<RankingResult> {
    config.validate()?;
    let (quality, reputation, diagnostics) =
        correlation_loop(graph, config.threshold, config.max_iterations, None)?;
    Ok(new_result(
        graph,
        AlgorithmConfig::Cr(config.clone()),
        quality,
        Some(reputation),
        diagnostics,
    ))
}

/// Correlation ranking with power-law redistribution of the reputations.
pub fn iarr(graph: &TemporalBipartiteGraph, config: &IarrConfig) -> Result<RankingResult> {
    config.validate()?;
    let (quality, reputation, diagnostics) =
        correlation_loop(graph, config.threshold, config.max_iterations, Some(config.phi))?;
    Ok(new_result(
        graph,
        AlgorithmConfig::Iarr(config.clone()),
        quality,
        Some(reputation),
        diagnostics,
    ))
}

fn correlation_loop(
    graph: &TemporalBipartiteGraph,
    threshold: f64,
    max_iterations: usize,
    phi: Option<f64>,
) -> Result<(Vec<f64>, Vec<f64>, Diagnostics)> {
    let pooled = graph.pooled();
    let n_items = graph.n_items();
    let mut reputation: Vec<f64> = (0..graph.n_users())
        .map(|i| pooled.user_degree(i) as f64 / n_items as f64)
        .collect();
    let mut quality: Vec<f64> = weighted_quality(pooled, n_items, &reputation)
        .into_iter()
        .map(|q| q.unwrap_or(f64::NAN))
        .collect();

    let mut undefined = 0u64;
    let mut anti_correlated = 0u64;
    let mut unweighted = 0u64;
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    while iterations < max_iterations {
        iterations += 1;
        undefined = 0;
        anti_correlated = 0;
        let mut trust = vec![0.0; graph.n_users()];
        for (pos, &user) in pooled.users().iter().enumerate() {
            xs.clear();
            ys.clear();
            for e in pooled.user_edges(pos) {
                xs.push(e.rating);
                ys.push(quality[e.item]);
            }
            trust[user] = match pearson(&xs, &ys) {
                Some(c) if c < 0.0 => {
                    anti_correlated += 1;
                    0.0
                }
                Some(c) => c,
                None => {
                    undefined += 1;
                    0.0
                }
            };
        }
        reputation = match phi {
            Some(phi) => redistribute(&trust, phi)?,
            None => trust,
        };
        unweighted = 0;
        let next: Vec<f64> = weighted_quality(pooled, n_items, &reputation)
            .into_iter()
            .zip(&quality)
            .map(|(q, &prev)| {
                q.unwrap_or_else(|| {
                    unweighted += 1;
                    prev
                })
            })
            .collect();
        delta = max_abs_diff(&next, &quality);
        quality = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    let mut diagnostics = Diagnostics::single_epoch(iterations, converged, delta);
    diagnostics.count("undefined_correlation", undefined);
    diagnostics.count("negative_correlation_clamped", anti_correlated);
    diagnostics.count("items_without_reputed_raters", unweighted);
    if undefined > 0 {
        diagnostics
            .warnings
            .push(format!("{undefined} users have undefined correlation and reputation 0"));
    }
    Ok((quality, reputation, diagnostics))
}
