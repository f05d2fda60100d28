//! Identification, year-sweep and robustness experiments.
//!
//! A plan names a dataset, a truth set, algorithm configurations and the
//! parameter grids. Each experiment turns the plan into a long-form
//! [`ExperimentReport`]: one row per `(algorithm, parameter, sample, metric)`.
//! Cells run in parallel when `jobs > 1`; rows are assembled in grid order so
//! reports are byte-identical for any `jobs`.
//!
//! Robustness replication `s` at spammer count `n` injects with seed
//! `derive_seed(master, Replication, n, s)`, shared by every algorithm, so
//! adding samples or grid points never changes existing cells.

mod report;

pub(crate) use report::write_atomic;

pub use report::{
    emit_report, emit_year_counts, read_report_csv, write_report_csv, year_counts, DatasetSummary,
    ReportFormat, YearCount,
};

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::algorithms::{rank, AlgorithmConfig, RankingResult};
use crate::metrics::{auc, evaluate, matching_number, AucMode, RobustnessPoint};
use crate::model::{build_graph, write_ratings, GroundTruth, RatingEvent, RatingScale, TemporalBipartiteGraph};
use crate::rng::{derive_seed, Domain};
use crate::synth::{inject_random_spammers, GraphShape, SpamInjection};
use crate::{Error, Result};

/// Rating events plus a digest of their canonical serialisation.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub label: String,
    pub events: Vec<RatingEvent>,
    pub scale: RatingScale,
    pub digest: String,
}

impl Dataset {
    pub fn new(label: impl Into<String>, events: Vec<RatingEvent>, scale: RatingScale) -> Result<Self> {
        let mut hasher = HashWriter(Sha256::new());
        write_ratings(&mut hasher, &events)?;
        Ok(Self {
            label: label.into(),
            events,
            scale,
            digest: hex::encode(hasher.0.finalize()),
        })
    }
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn truth_digest(truth: &GroundTruth) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(truth)?)))
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub dataset: Dataset,
    pub truth: Option<GroundTruth>,
    pub algorithms: Vec<AlgorithmConfig>,
    /// Cutoff percentages for identification.
    pub f_grid: Vec<f64>,
    /// Cutoff percentage for the year sweep.
    pub sweep_f: f64,
    /// Year-sweep horizons; `None` takes every year of the dataset.
    pub horizons: Option<Vec<i32>>,
    /// Spammer counts n for robustness.
    pub spammers: Vec<usize>,
    /// Replications N_sam per spammer count.
    pub samples: usize,
    /// Items per spammer; `None` uses the mean user degree.
    pub spammer_ratings: Option<usize>,
    /// With true qualities, the top fraction counted as positives.
    pub top_fraction: f64,
    pub auc_mode: AucMode,
    pub seed: u64,
    /// Worker threads; never changes the output.
    pub jobs: usize,
    /// Upper bound on algorithm runs, checked before any work.
    pub max_cells: Option<usize>,
}

impl ExperimentPlan {
    pub fn new(dataset: Dataset, truth: Option<GroundTruth>, algorithms: Vec<AlgorithmConfig>) -> Self {
        Self {
            dataset,
            truth,
            algorithms,
            f_grid: (1..=10).map(f64::from).collect(),
            sweep_f: 5.0,
            horizons: None,
            spammers: vec![0],
            samples: 10,
            spammer_ratings: None,
            top_fraction: 0.1,
            auc_mode: AucMode::Exact,
            seed: 0,
            jobs: 1,
            max_cells: None,
        }
    }

    fn validate(&self, experiment: Experiment) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("the algorithm list is empty".into()));
        }
        for config in &self.algorithms {
            config.validate()?;
        }
        if self.truth.is_none() {
            return Err(Error::Config(format!("{} needs a truth file", experiment.name())));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(Error::Config(format!("top_fraction must lie in (0, 1], got {}", self.top_fraction)));
        }
        match experiment {
            Experiment::Identification if self.f_grid.is_empty() => Err(Error::Config("the f grid is empty".into())),
            Experiment::Robustness if self.spammers.is_empty() => {
                Err(Error::Config("the spammer grid is empty".into()))
            }
            Experiment::Robustness if self.samples == 0 => Err(Error::Config("samples must be >= 1".into())),
            Experiment::YearSweep if self.horizons.as_ref().is_some_and(Vec::is_empty) => {
                Err(Error::Config("the horizon list is empty".into()))
            }
            _ => Ok(()),
        }
    }

    fn check_budget(&self, cells: usize) -> Result<()> {
        match self.max_cells {
            Some(max) if cells > max => Err(Error::Config(format!(
                "plan needs {cells} algorithm runs, above the budget of {max}"
            ))),
            _ => Ok(()),
        }
    }

    fn echo(&self, experiment: Experiment) -> PlanEcho {
        PlanEcho {
            experiment: experiment.name(),
            dataset: self.dataset.label.clone(),
            scale: self.dataset.scale.to_string(),
            algorithms: self.algorithms.clone(),
            f_grid: self.f_grid.clone(),
            sweep_f: self.sweep_f,
            horizons: self.horizons.clone(),
            spammers: self.spammers.clone(),
            samples: self.samples,
            spammer_ratings: self.spammer_ratings,
            top_fraction: self.top_fraction,
            auc_mode: self.auc_mode.to_string(),
            seed: self.seed,
        }
    }

    fn map_cells<T: Sync, R: Send>(&self, cells: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
        if self.jobs <= 1 {
            return Ok(cells.iter().map(f).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", self.jobs)))?;
        Ok(pool.install(|| cells.par_iter().map(f).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Identification,
    YearSweep,
    Robustness,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Identification => "identification",
            Experiment::YearSweep => "year-sweep",
            Experiment::Robustness => "robustness",
        }
    }
}

/// The plan as it affected the output; `jobs` is deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEcho {
    pub experiment: &'static str,
    pub dataset: String,
    pub scale: String,
    pub algorithms: Vec<AlgorithmConfig>,
    pub f_grid: Vec<f64>,
    pub sweep_f: f64,
    pub horizons: Option<Vec<i32>>,
    pub spammers: Vec<usize>,
    pub samples: usize,
    pub spammer_ratings: Option<usize>,
    pub top_fraction: f64,
    pub auc_mode: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub input_digest: String,
    pub truth_digest: String,
    pub plan: PlanEcho,
    pub warnings: Vec<String>,
}

/// One long-form report row.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub algorithm: String,
    /// `f=5`, `year=2003`, `n=30`.
    pub parameter: String,
    pub sample: Option<usize>,
    pub seed: Option<u64>,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: &'static str,
    pub rows: Vec<ReportRow>,
    pub provenance: Provenance,
    /// Algorithm runs that stopped at their iteration cap.
    pub non_converged: usize,
    /// Cells that failed and were skipped.
    pub failures: usize,
}

impl ExperimentReport {
    pub fn value(&self, algorithm: &str, parameter: &str, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.parameter == parameter && r.metric == metric && r.sample.is_none())
            .map(|r| r.value)
    }

    pub fn values<'a>(&'a self, algorithm: &'a str, metric: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.algorithm == algorithm && r.metric == metric)
    }
}

struct Builder {
    experiment: Experiment,
    rows: Vec<ReportRow>,
    warnings: Vec<String>,
    non_converged: usize,
    failures: usize,
}

impl Builder {
    fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            warnings: Vec::new(),
            non_converged: 0,
            failures: 0,
        }
    }

    fn row(&mut self, algorithm: &str, parameter: String, sample: Option<(usize, u64)>, metric: &str, value: f64) {
        self.rows.push(ReportRow {
            experiment: self.experiment.name().to_string(),
            algorithm: algorithm.to_string(),
            parameter,
            sample: sample.map(|s| s.0),
            seed: sample.map(|s| s.1),
            metric: metric.to_string(),
            value,
        });
    }

    fn ranked(&mut self, context: &str, outcome: Result<RankingResult>) -> Option<RankingResult> {
        match outcome {
            Ok(r) => {
                if !r.converged() {
                    self.non_converged += 1;
                    self.warnings.push(format!("{context}: {} did not converge", r.algorithm));
                }
                Some(r)
            }
            Err(e) => {
                self.failures += 1;
                self.warnings.push(format!("{context}: {e}"));
                None
            }
        }
    }

    fn finish(self, plan: &ExperimentPlan, truth: &GroundTruth) -> Result<ExperimentReport> {
        Ok(ExperimentReport {
            experiment: self.experiment.name(),
            rows: self.rows,
            provenance: Provenance {
                tool: "atrank",
                version: env!("CARGO_PKG_VERSION"),
                input_digest: plan.dataset.digest.clone(),
                truth_digest: truth_digest(truth)?,
                plan: plan.echo(self.experiment),
                warnings: self.warnings,
            },
            non_converged: self.non_converged,
            failures: self.failures,
        })
    }
}

fn prepared(plan: &ExperimentPlan, experiment: Experiment) -> Result<(TemporalBipartiteGraph, GroundTruth, Vec<String>)> {
    plan.validate(experiment)?;
    let graph = build_graph(plan.dataset.events.clone(), plan.dataset.scale)?;
    let truth = plan.truth.as_ref().expect("validated");
    let (kept, dropped) = truth.restrict_to(&graph);
    let mut warnings = Vec::new();
    if dropped > 0 {
        warnings.push(format!("{dropped} truth items do not occur in the dataset and were dropped"));
    }
    Ok((graph, kept, warnings))
}

fn positives(graph: &TemporalBipartiteGraph, targets: &BTreeSet<String>) -> Vec<bool> {
    graph.item_ids().iter().map(|id| targets.contains(id)).collect()
}

/// Ranks with every algorithm and scores M, AUC, precision, recall and F at
/// every cutoff of the f grid.
pub fn run_identification(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    let (graph, truth, warnings) = prepared(plan, Experiment::Identification)?;
    plan.check_budget(plan.algorithms.len())?;
    let targets = truth.targets(plan.top_fraction);
    let results = plan.map_cells(&plan.algorithms, |config| rank(&graph, config))?;

    let mut b = Builder::new(Experiment::Identification);
    b.warnings = warnings;
    for (config, outcome) in plan.algorithms.iter().zip(results) {
        let name = config.algorithm().name();
        let Some(result) = b.ranked(name, outcome) else { continue };
        for &f in &plan.f_grid {
            match evaluate(&result.item_ids, &result.quality, &targets, f, plan.auc_mode) {
                Ok(m) => {
                    let p = format!("f={f}");
                    b.row(name, p.clone(), None, "M", m.m as f64);
                    b.row(name, p.clone(), None, "auc", m.auc);
                    b.row(name, p.clone(), None, "precision", m.precision);
                    b.row(name, p.clone(), None, "recall", m.recall);
                    b.row(name, p, None, "f_value", m.f_value);
                }
                Err(e) => {
                    b.failures += 1;
                    b.warnings.push(format!("{name} f={f}: {e}"));
                }
            }
        }
    }
    b.finish(plan, &truth)
}

/// Reruns every algorithm on the data up to each horizon and counts the
/// items awarded by then among the top `sweep_f` percent.
pub fn run_year_sweep(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    let (graph, truth, warnings) = prepared(plan, Experiment::YearSweep)?;
    let horizons = plan.horizons.clone().unwrap_or_else(|| graph.years());
    let mut b = Builder::new(Experiment::YearSweep);
    b.warnings = warnings;

    let mut usable = Vec::new();
    for &t in &horizons {
        if t < graph.first_year() {
            b.warnings.push(format!("horizon {t} precedes the first data year {}; skipped", graph.first_year()));
        } else {
            usable.push(t);
        }
    }
    plan.check_budget(usable.len() * plan.algorithms.len())?;
    let slices = usable
        .iter()
        .map(|&t| graph.restrict_to_years(t))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..usable.len())
        .flat_map(|h| (0..plan.algorithms.len()).map(move |a| (h, a)))
        .collect();
    let results = plan.map_cells(&cells, |&(h, a)| rank(&slices[h], &plan.algorithms[a]))?;

    for (&(h, a), outcome) in cells.iter().zip(results) {
        let (t, sub) = (usable[h], &slices[h]);
        let name = plan.algorithms[a].algorithm().name();
        let Some(result) = b.ranked(&format!("{name} year={t}"), outcome) else { continue };
        let targets: BTreeSet<String> = truth
            .targets_as_of(t, plan.top_fraction)
            .into_iter()
            .filter(|id| sub.item_index(id).is_some())
            .collect();
        let ranked = result.ranked_item_ids();
        match matching_number(&ranked, &targets, plan.sweep_f) {
            Ok(m) => {
                b.row(name, format!("year={t}"), None, "M", m as f64);
                b.row(name, format!("year={t}"), None, "truth_size", targets.len() as f64);
            }
            Err(e) => {
                b.failures += 1;
                b.warnings.push(format!("{name} year={t}: {e}"));
            }
        }
    }
    b.finish(plan, &truth)
}

/// Seed of robustness replication `sample` at spammer count `n`.
pub fn replication_seed(master: u64, n: usize, sample: usize) -> u64 {
    derive_seed(master, Domain::Replication, n as u64, sample as u64)
}

/// AUC on the clean graph, then AUC after each spammer injection, and the
/// RMSE between them per `(algorithm, n)`.
pub fn run_robustness(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    let (graph, truth, warnings) = prepared(plan, Experiment::Robustness)?;
    let n_alg = plan.algorithms.len();
    plan.check_budget(n_alg * (1 + plan.spammers.len() * plan.samples))?;
    let targets = truth.targets(plan.top_fraction);
    let clean_positive = positives(&graph, &targets);
    let shape = GraphShape::of(&graph);

    let mut b = Builder::new(Experiment::Robustness);
    b.warnings = warnings;
    let clean = plan.map_cells(&plan.algorithms, |config| {
        rank(&graph, config).and_then(|r| Ok((auc(&r.quality, &clean_positive, plan.auc_mode)?, r)))
    })?;
    let mut auc_real = Vec::with_capacity(n_alg);
    for (config, outcome) in plan.algorithms.iter().zip(clean) {
        let name = config.algorithm().name();
        match outcome {
            Ok((value, result)) => {
                b.ranked(&format!("{name} clean"), Ok(result));
                b.row(name, "n=0".into(), None, "auc_real", value);
                auc_real.push(Some(value));
            }
            Err(e) => {
                b.ranked(&format!("{name} clean"), Err(e));
                auc_real.push(None);
            }
        }
    }

    let cells: Vec<(usize, usize)> = plan
        .spammers
        .iter()
        .flat_map(|&n| (0..plan.samples).map(move |s| (n, s)))
        .collect();
    let per_cell = plan.map_cells(&cells, |&(n, s)| -> Result<Vec<Result<(f64, RankingResult)>>> {
        let seed = replication_seed(plan.seed, n, s);
        let spec = SpamInjection {
            n_spammers: n,
            ratings_per_spammer: plan.spammer_ratings,
            seed,
        };
        let events = inject_random_spammers(&plan.dataset.events, &shape, &spec)?;
        let noisy = build_graph(events, plan.dataset.scale)?;
        let positive = positives(&noisy, &targets);
        Ok(plan
            .algorithms
            .iter()
            .map(|config| rank(&noisy, config).and_then(|r| Ok((auc(&r.quality, &positive, plan.auc_mode)?, r))))
            .collect::<Vec<_>>())
    })?;

    let mut samples: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); plan.spammers.len()]; n_alg];
    for (&(n, s), outcome) in cells.iter().zip(per_cell) {
        let seed = replication_seed(plan.seed, n, s);
        let runs: Vec<Result<(f64, RankingResult)>> = match outcome {
            Ok(runs) => runs,
            Err(e) => {
                b.failures += 1;
                b.warnings.push(format!("n={n} sample={s}: {e}"));
                continue;
            }
        };
        let grid = plan.spammers.iter().position(|&x| x == n).expect("n from the grid");
        for (a, run) in runs.into_iter().enumerate() {
            let name = plan.algorithms[a].algorithm().name();
            let (value, result) = match run {
                Ok(x) => x,
                Err(e) => {
                    b.failures += 1;
                    b.warnings.push(format!("{name} n={n} sample={s}: {e}"));
                    continue;
                }
            };
            b.ranked(&format!("{name} n={n} sample={s}"), Ok(result));
            b.row(name, format!("n={n}"), Some((s, seed)), "auc_ran", value);
            samples[a][grid].push(value);
        }
    }

    for (a, config) in plan.algorithms.iter().enumerate() {
        let name = config.algorithm().name();
        let Some(real) = auc_real[a] else { continue };
        for (grid, &n) in plan.spammers.iter().enumerate() {
            if samples[a][grid].is_empty() {
                continue;
            }
            let point = RobustnessPoint::new(n, samples[a][grid].clone(), real)?;
            b.row(name, format!("n={n}"), None, "rmse", point.rmse);
        }
    }
    b.finish(plan, &truth)
}

/// Robustness points regrouped from a report's `auc_ran` rows.
pub fn robustness_points(report: &ExperimentReport, algorithm: &str) -> Vec<RobustnessPoint> {
    let Some(real) = report.value(algorithm, "n=0", "auc_real") else { return Vec::new() };
    let mut by_n: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
    for row in report.values(algorithm, "auc_ran") {
        let n: usize = row.parameter.trim_start_matches("n=").parse().unwrap_or(0);
        by_n.entry(n).or_default().push((row.sample.unwrap_or(0), row.value));
    }
    by_n.into_iter()
        .filter_map(|(n, mut v)| {
            v.sort_by_key(|x| x.0);
            RobustnessPoint::new(n, v.into_iter().map(|x| x.1).collect(), real).ok()
        })
        .collect()
}
