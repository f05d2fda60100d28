use super::{new_result, AlgorithmConfig, Diagnostics, RankingResult};
use crate::model::TemporalBipartiteGraph;
use crate::Result;

/// Mean rating per item over all years. Defines no reputation.
pub fn average_score(graph: &TemporalBipartiteGraph) -> Result<RankingResult> {
    let mut diagnostics = Diagnostics {
        converged: true,
        ..Diagnostics::default()
    };
    let quality: Vec<f64> = (0..graph.n_items())
        .map(|a| {
            let stats = graph.item_stats(a);
            if stats.count == 0 {
                diagnostics.warnings.push(format!("item {} has no ratings", graph.item_id(a)));
                f64::NAN
            } else {
                stats.mean
            }
        })
        .collect();
    Ok(new_result(graph, AlgorithmConfig::Avg, quality, None, diagnostics))
}
