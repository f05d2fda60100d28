use serde::Serialize;

use super::{check_threshold, max_abs_diff, new_result, parse_value, AlgorithmConfig, Diagnostics, RankingResult};
use crate::model::TemporalBipartiteGraph;
use crate::{Error, Result};

/// Prior vectors u⁰ (users) and v⁰ (items), normalised to sum 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryVectors {
    /// Proportional to weighted degree.
    #[default]
    DegreeProportional,
    Uniform,
    Custom { users: Vec<f64>, items: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiRankConfig {
    /// Weight of propagation into item scores.
    pub alpha: f64,
    /// Weight of propagation into user scores.
    pub beta: f64,
    pub query: QueryVectors,
    pub threshold: f64,
    pub max_iterations: usize,
}

impl Default for BiRankConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            beta: 0.85,
            query: QueryVectors::DegreeProportional,
            threshold: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl BiRankConfig {
    pub(crate) fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "alpha" => self.alpha = parse_value(key, value)?,
            "beta" => self.beta = parse_value(key, value)?,
            "threshold" => self.threshold = parse_value(key, value)?,
            "max_iterations" => self.max_iterations = parse_value(key, value)?,
            "query" => {
                self.query = match value.trim() {
                    "degree" => QueryVectors::DegreeProportional,
                    "uniform" => QueryVectors::Uniform,
                    other => {
                        return Err(Error::Config(format!(
                            "query must be `degree` or `uniform`, got `{other}`"
                        )))
                    }
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1), got {x}")));
            }
        }
        check_threshold(self.threshold, self.max_iterations)
    }
}

struct Normalised {
    /// S entry per pooled edge.
    s: Vec<f64>,
    u0: Vec<f64>,
    v0: Vec<f64>,
    isolated: u64,
}

fn normalise(graph: &TemporalBipartiteGraph, config: &BiRankConfig) -> Result<Normalised> {
    let pooled = graph.pooled();
    let (n_users, n_items) = (graph.n_users(), graph.n_items());
    let mut du = vec![0.0; n_users];
    let mut dv = vec![0.0; n_items];
    for e in pooled.edges() {
        du[e.user] += e.rating;
        dv[e.item] += e.rating;
    }
    let isolated = du.iter().chain(&dv).filter(|&&d| d <= 0.0).count() as u64;
    let s = pooled
        .edges()
        .iter()
        .map(|e| {
            let d = du[e.user] * dv[e.item];
            if d > 0.0 {
                e.rating / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let (u0, v0) = match &config.query {
        QueryVectors::DegreeProportional => (du, dv),
        QueryVectors::Uniform => (vec![1.0; n_users], vec![1.0; n_items]),
        QueryVectors::Custom { users, items } => {
            if users.len() != n_users || items.len() != n_items {
                return Err(Error::InvalidParameter(format!(
                    "query vectors need {n_users} user and {n_items} item entries"
                )));
            }
            (users.clone(), items.clone())
        }
    };
    Ok(Normalised {
        s,
        u0: unit_sum(u0, "user query")?,
        v0: unit_sum(v0, "item query")?,
        isolated,
    })
}

fn unit_sum(mut x: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    let total: f64 = x.iter().sum();
    if x.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || !(total > 0.0) {
        return Err(Error::InvalidParameter(format!("{what} vector must be non-negative with positive sum")));
    }
    x.iter_mut().for_each(|v| *v /= total);
    Ok(x)
}

/// Coupled propagation v = αSᵀu + (1−α)v⁰, u = βSv + (1−β)u⁰ with
/// S = D_u^{-1/2} W D_v^{-1/2}, W the summed ratings. Starts from the query
/// vectors.
pub fn birank(graph: &TemporalBipartiteGraph, config: &BiRankConfig) -> Result<RankingResult> {
    birank_from(graph, config, None)
}

/// [`birank`] from an explicit `(users, items)` starting point.
pub fn birank_from(
    graph: &TemporalBipartiteGraph,
    config: &BiRankConfig,
    start: Option<(&[f64], &[f64])>,
) -> Result<RankingResult> {
    config.validate()?;
    let norm = normalise(graph, config)?;
    let pooled = graph.pooled();
    let (mut u, mut v) = match start {
        Some((u, v)) => {
            if u.len() != graph.n_users() || v.len() != graph.n_items() {
                return Err(Error::InvalidParameter("start vectors do not match the graph".into()));
            }
            (u.to_vec(), v.to_vec())
        }
        None => (norm.u0.clone(), norm.v0.clone()),
    };
    let (alpha, beta) = (config.alpha, config.beta);

    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut converged = false;
    let mut v_next = vec![0.0; v.len()];
    let mut u_next = vec![0.0; u.len()];
    while iterations < config.max_iterations {
        iterations += 1;
        v_next.iter_mut().zip(&norm.v0).for_each(|(x, v0)| *x = (1.0 - alpha) * v0);
        for (e, edge) in pooled.edges().iter().enumerate() {
            v_next[edge.item] += alpha * norm.s[e] * u[edge.user];
        }
        u_next.iter_mut().zip(&norm.u0).for_each(|(x, u0)| *x = (1.0 - beta) * u0);
        for (e, edge) in pooled.edges().iter().enumerate() {
            u_next[edge.user] += beta * norm.s[e] * v_next[edge.item];
        }
        delta = max_abs_diff(&v_next, &v).max(max_abs_diff(&u_next, &u));
        std::mem::swap(&mut u, &mut u_next);
        std::mem::swap(&mut v, &mut v_next);
        if delta < config.threshold {
            converged = true;
            break;
        }
    }
    let mut diagnostics = Diagnostics::single_epoch(iterations, converged, delta);
    diagnostics.count("zero_degree_vertices", norm.isolated);
    if norm.isolated > 0 {
        diagnostics
            .warnings
            .push(format!("{} vertices have zero weighted degree and keep their prior", norm.isolated));
    }
    Ok(new_result(
        graph,
        AlgorithmConfig::BiRank(config.clone()),
        v,
        Some(u),
        diagnostics,
    ))
}
