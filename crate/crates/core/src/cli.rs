//! The `atrank` command line.
//!
//! Exit status is 0 on success, 1 on a domain error (bad data, degenerate
//! input, an algorithm that did not converge) and 2 on a usage error. Files
//! are written atomically, so an error never leaves a partial output behind;
//! a non-converged run still writes its results and then exits 1.
//!
//! Experiment options resolve as built-in defaults < `--plan` file < flags.
//! A plan file is flat TOML whose keys are the long flag names with `_` for
//! `-`; a table named after an algorithm overrides that algorithm's
//! parameters:
//!
//! ```toml
//! algorithms = "atr,iarr,ir"
//! spammers = "15,30,60"
//! samples = 10
//! seed = 7
//!
//! [iarr]
//! phi = 3
//! ```

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::algorithms::{rank, read_result_csv, write_result_csv, Algorithm, AlgorithmConfig};
use crate::harness::{
    emit_report, emit_year_counts, run_identification, run_robustness, run_year_sweep, year_counts, Dataset,
    DatasetSummary, ExperimentPlan, ExperimentReport, ReportFormat,
};
use crate::metrics::{evaluate, AucMode, MetricReport};
use crate::model::{
    build_graph_with, citation_to_bipartite, parse_citations, parse_ratings_with, read_ground_truth,
    write_qualities, write_ratings, DuplicatePolicy, GroundTruth, IngestOptions, RatingEvent, RatingScale,
    SelfLoopPolicy, TemporalBipartiteGraph, TimeUnit,
};
use crate::synth::{generate_artificial, SynthParams};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "atrank", version, about = "Reputation and quality ranking on temporal rating networks")]
pub struct Cli {
    /// More log output on standard error (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    /// Master seed for every random choice; a random one is drawn and logged
    /// when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "ATRANK_OUT_DIR")]
    pub out_dir: Option<PathBuf>,

    /// Worker threads for experiment grids; never changes the output.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a rating or citation file and write it as canonical rating CSV.
    Ingest(IngestArgs),
    /// Generate an artificial network with known item qualities.
    Synth(SynthArgs),
    /// Run one algorithm and write item and user scores.
    Rank(RankArgs),
    /// Score a result file against a truth file.
    Evaluate(EvaluateArgs),
    /// Matching number, AUC, precision, recall and F for every algorithm.
    Identify(IdentifyArgs),
    /// AUC RMSE under random-rating spammers.
    Robustness(RobustnessArgs),
    /// Matching number on the data available up to each year.
    YearSweep(YearSweepArgs),
    /// Per-year rating counts and dataset summary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Rating CSV with header `user,item,rating,year`.
    #[arg(long)]
    pub input: PathBuf,

    /// Rating scale as `min:max` or `min:max:real`.
    #[arg(long)]
    pub scale: Option<RatingScale>,

    /// Unit of the year column: `year` or `epoch-seconds`.
    #[arg(long, default_value = "year")]
    pub time_unit: TimeUnit,

    /// Repeated (user, item, year) events: `reject` fails, `last` keeps the last one.
    #[arg(long, value_enum, default_value_t = Dedupe::Reject)]
    pub dedupe: Dedupe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dedupe {
    Reject,
    Last,
}

impl From<Dedupe> for DuplicatePolicy {
    fn from(d: Dedupe) -> Self {
        match d {
            Dedupe::Reject => DuplicatePolicy::Reject,
            Dedupe::Last => DuplicatePolicy::KeepLast,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Read a `citing,cited,year` citation file instead of ratings.
    #[arg(long)]
    pub citations: bool,

    /// Rating given to every citation; defaults to the top of the scale.
    #[arg(long, requires = "citations")]
    pub citation_rating: Option<f64>,

    /// Keep papers citing themselves instead of failing.
    #[arg(long, requires = "citations")]
    pub keep_self_citations: bool,

    /// Output rating CSV [default: <out-dir>/events.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 600)]
    pub users: usize,
    #[arg(long, default_value_t = 400)]
    pub items: usize,
    /// Fraction of the user × item grid that is rated.
    #[arg(long, default_value_t = 0.2)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 10)]
    pub years: usize,
    #[arg(long, default_value_t = 2000)]
    pub first_year: i32,
    /// Standard deviation of the rating noise.
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[arg(long, default_value = "1:5")]
    pub scale: RatingScale,
    /// 6000 users, 4000 items, 480000 links; overrides the size flags.
    #[arg(long)]
    pub full_size: bool,
    /// Output rating CSV [default: <out-dir>/events.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output `item,quality` file [default: <out-dir>/truth.csv].
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub algorithm: Algorithm,

    #[command(flatten)]
    pub input: InputArgs,

    /// TOML file of algorithm parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Parameter override `key=value` (repeatable), applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Add a column with qualities mapped onto the rating scale.
    #[arg(long)]
    pub scaled: bool,

    /// Result CSV [default: <out-dir>/result.csv]; diagnostics go next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Result CSV written by `rank`.
    #[arg(long)]
    pub result: PathBuf,

    /// Target set (one item per line) or `item,quality` file.
    #[arg(long)]
    pub truth: PathBuf,

    /// Cutoff percentages, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub f: Vec<f64>,

    /// `exact` or `sampled:N:seed`.
    #[arg(long, default_value = "exact")]
    pub auc_mode: AucMode,

    /// With true qualities, the top fraction counted as targets.
    #[arg(long, default_value_t = 0.1)]
    pub top_fraction: f64,

    /// JSON report; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Target set or `item,quality` file.
    #[arg(long)]
    pub truth: PathBuf,

    /// Comma-separated algorithms [default: all six].
    #[arg(long)]
    pub algorithms: Option<String>,

    /// TOML plan file; flags override its values.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    /// `exact` or `sampled:N:seed`.
    #[arg(long)]
    pub auc_mode: Option<AucMode>,

    /// With true qualities, the top fraction counted as targets [default: 0.1].
    #[arg(long)]
    pub top_fraction: Option<f64>,

    /// Refuse plans with more algorithm runs than this.
    #[arg(long)]
    pub max_cells: Option<usize>,

    /// `csv` (long-form rows plus provenance JSON) or `json`.
    #[arg(long)]
    pub format: Option<ReportFormat>,

    /// Report directory [default: <out-dir>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,

    /// Cutoff percentages: `1,2,5` or `start:step:end` [default: 1:1:10].
    #[arg(long)]
    pub f: Option<String>,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,

    /// Spammer counts: `15,30,60` or `start:step:end` [default: 0].
    #[arg(long)]
    pub spammers: Option<String>,

    /// Replications per spammer count [default: 10].
    #[arg(long)]
    pub samples: Option<usize>,

    /// Items rated by each spammer [default: mean user degree].
    #[arg(long)]
    pub spammer_ratings: Option<usize>,
}

#[derive(Debug, Args)]
pub struct YearSweepArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,

    /// Horizon years: `1999,2003` or `start:step:end` [default: every year].
    #[arg(long)]
    pub horizons: Option<String>,

    /// Cutoff percentage [default: 5].
    #[arg(long)]
    pub f: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Directory for `year_counts.csv` and `dataset.json` [default: <out-dir>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Why a command did not finish cleanly.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidScale(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Ingest(a) => ingest(cli, a),
        Command::Synth(a) => synth(cli, a),
        Command::Rank(a) => rank_command(cli, a),
        Command::Evaluate(a) => evaluate_command(a),
        Command::Identify(a) => experiment(cli, &a.common, Kind::Identify(a)),
        Command::Robustness(a) => experiment(cli, &a.common, Kind::Robustness(a)),
        Command::YearSweep(a) => experiment(cli, &a.common, Kind::YearSweep(a)),
        Command::Report(a) => report(cli, a),
    }
}

fn output_path(cli: &Cli, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.clone(),
        None => cli.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")).join(default_name),
    }
}

fn output_dir(cli: &Cli, explicit: &Option<PathBuf>) -> PathBuf {
    explicit
        .clone()
        .or_else(|| cli.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn master_seed(cli: &Cli, from_plan: Option<u64>) -> u64 {
    cli.seed.or(from_plan).unwrap_or_else(|| {
        let seed = rand::random::<u64>();
        warn!("no --seed given; using seed {seed}");
        seed
    })
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))
}

fn load_events(args: &InputArgs, scale: RatingScale) -> CliResult<Vec<RatingEvent>> {
    let options = IngestOptions {
        scale,
        time_unit: args.time_unit,
    };
    parse_ratings_with(open(&args.input)?, options).map_err(|e| Failure::Domain(format!("{}: {e}", args.input.display())))
}

fn load_graph(args: &InputArgs, scale: RatingScale) -> CliResult<(Vec<RatingEvent>, TemporalBipartiteGraph)> {
    let events = load_events(args, scale)?;
    let graph = build_graph_with(events.clone(), scale, args.dedupe.into())?;
    Ok((events, graph))
}

fn load_truth(path: &Path) -> CliResult<GroundTruth> {
    read_ground_truth(open(path)?).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    crate::harness::write_atomic(path, bytes)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn ingest(cli: &Cli, a: &IngestArgs) -> CliResult {
    let scale = a.input.scale.unwrap_or_default();
    let events = if a.citations {
        let edges = parse_citations(open(&a.input.input)?).map_err(|e| Failure::Domain(format!("{}: {e}", a.input.input.display())))?;
        let policy = if a.keep_self_citations {
            SelfLoopPolicy::Keep
        } else {
            SelfLoopPolicy::Reject
        };
        citation_to_bipartite(&edges, a.citation_rating.unwrap_or(scale.max), policy)?
    } else {
        load_events(&a.input, scale)?
    };
    let graph = build_graph_with(events, scale, a.input.dedupe.into())?;
    let canonical: Vec<RatingEvent> = graph.events().collect();
    let mut bytes = Vec::new();
    write_ratings(&mut bytes, &canonical)?;
    write_file(&output_path(cli, &a.out, "events.csv"), &bytes)?;
    print!("{}", String::from_utf8_lossy(&json(&DatasetSummary::of(&graph))?));
    Ok(())
}

fn synth(cli: &Cli, a: &SynthArgs) -> CliResult {
    let mut params = SynthParams {
        n_users: a.users,
        n_items: a.items,
        sparsity: a.sparsity,
        n_years: a.years,
        first_year: a.first_year,
        noise_sigma: a.noise,
        scale: a.scale,
        seed: master_seed(cli, None),
    };
    if a.full_size {
        let full = SynthParams::full_size();
        params.n_users = full.n_users;
        params.n_items = full.n_items;
        params.sparsity = full.sparsity;
    }
    info!("synth parameters: {}", serde_json::to_string(&params).map_err(Error::from)?);
    let (events, truth) = generate_artificial(&params)?;
    let mut bytes = Vec::new();
    write_ratings(&mut bytes, &events)?;
    let GroundTruth::TrueQualities(q) = truth else { unreachable!("synthetic truth is qualities") };
    let mut truth_bytes = Vec::new();
    write_qualities(&mut truth_bytes, &q.into_iter().collect::<Vec<_>>())?;
    write_file(&output_path(cli, &a.out, "events.csv"), &bytes)?;
    write_file(&output_path(cli, &a.truth, "truth.csv"), &truth_bytes)?;
    Ok(())
}

/// Flattens a TOML document into top-level settings and per-algorithm
/// parameter tables, all as strings.
#[derive(Debug, Default)]
struct PlanFile {
    settings: BTreeMap<String, String>,
    algorithms: BTreeMap<String, BTreeMap<String, String>>,
}

fn toml_scalar(key: &str, value: &toml::Value) -> CliResult<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| toml_scalar(key, v))
            .collect::<CliResult<Vec<_>>>()?
            .join(","),
        _ => return Err(Failure::Usage(format!("`{key}` must be a scalar or a list"))),
    })
}

fn read_plan_file(path: &Path) -> CliResult<PlanFile> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut plan = PlanFile::default();
    for (key, value) in &table {
        let key = key.replace('-', "_");
        match value {
            toml::Value::Table(t) => {
                key.parse::<Algorithm>()?;
                let params = plan.algorithms.entry(key.clone()).or_default();
                for (k, v) in t {
                    params.insert(k.replace('-', "_"), toml_scalar(k, v)?);
                }
            }
            other => {
                plan.settings.insert(key.clone(), toml_scalar(&key, other)?);
            }
        }
    }
    Ok(plan)
}

fn parse_setting<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("cannot parse `{value}` for `{key}`")))
}

/// `a,b,c` or inclusive `start:step:end`.
pub fn parse_grid<T>(text: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr + Copy + PartialOrd + std::ops::Add<Output = T> + Default,
{
    let bad = || Error::Config(format!("cannot parse grid `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if let [start, step, end] = parts.as_slice() {
        let (start, step, end): (T, T, T) = (
            start.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
            end.trim().parse().map_err(|_| bad())?,
        );
        if !(step > T::default()) {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut x = start;
        while x <= end {
            out.push(x);
            x = x + step;
        }
        return Ok(out);
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn split_overrides(pairs: &[String]) -> CliResult<BTreeMap<String, String>> {
    pairs
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().replace('-', "_"), v.trim().to_string()))
                .ok_or_else(|| Failure::Usage(format!("`{p}` is not KEY=VALUE")))
        })
        .collect()
}

fn rank_command(cli: &Cli, a: &RankArgs) -> CliResult {
    let mut params = BTreeMap::new();
    if let Some(path) = &a.config {
        let file = read_plan_file(path)?;
        params.extend(file.settings);
        if let Some(section) = file.algorithms.get(a.algorithm.name()) {
            params.extend(section.clone());
        }
    }
    params.extend(split_overrides(&a.overrides)?);
    let config = AlgorithmConfig::default_for(a.algorithm).with_overrides(&params)?;
    let scale = a.input.scale.unwrap_or_default();
    info!("rank configuration: {}", serde_json::to_string(&config).map_err(Error::from)?);
    let (_, graph) = load_graph(&a.input, scale)?;
    let result = rank(&graph, &config)?;

    let out = output_path(cli, &a.out, "result.csv");
    let mut bytes = Vec::new();
    write_result_csv(&mut bytes, &result, a.scaled.then_some(scale))?;
    let diag_path = out.with_extension("diagnostics.json");
    let diagnostics = serde_json::json!({
        "algorithm": result.algorithm,
        "config": result.config,
        "input": a.input.input.display().to_string(),
        "converged": result.diagnostics.converged,
        "epochs": result.diagnostics.epochs,
        "counters": result.diagnostics.counters,
        "warnings": result.diagnostics.warnings,
    });
    write_file(&out, &bytes)?;
    write_file(&diag_path, &json(&diagnostics)?)?;
    for w in &result.diagnostics.warnings {
        warn!("{w}");
    }
    if !result.converged() {
        return Err(Failure::Domain(format!(
            "{} did not converge; results written to {}",
            result.algorithm,
            out.display()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct Evaluation {
    result: String,
    truth: String,
    truth_size: usize,
    truth_dropped: usize,
    items: usize,
    reports: Vec<MetricReport>,
}

fn evaluate_command(a: &EvaluateArgs) -> CliResult {
    let table = read_result_csv(open(&a.result)?).map_err(|e| Failure::Domain(format!("{}: {e}", a.result.display())))?;
    let truth = load_truth(&a.truth)?;
    let ids: Vec<&str> = table.items.iter().map(|(id, _)| id.as_str()).collect();
    let scores: Vec<f64> = table.items.iter().map(|(_, s)| *s).collect();
    let known: std::collections::BTreeSet<&str> = ids.iter().copied().collect();
    let all = truth.targets(a.top_fraction);
    let targets: std::collections::BTreeSet<String> = all.iter().filter(|t| known.contains(t.as_str())).cloned().collect();
    if targets.len() < all.len() {
        warn!("{} truth items are absent from the result", all.len() - targets.len());
    }
    let reports = a
        .f
        .iter()
        .map(|&f| evaluate(&ids, &scores, &targets, f, a.auc_mode))
        .collect::<Result<Vec<_>>>()?;
    let out = Evaluation {
        result: a.result.display().to_string(),
        truth: a.truth.display().to_string(),
        truth_size: targets.len(),
        truth_dropped: all.len() - targets.len(),
        items: ids.len(),
        reports,
    };
    let bytes = json(&out)?;
    match &a.out {
        Some(path) => write_file(path, &bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

enum Kind<'a> {
    Identify(&'a IdentifyArgs),
    Robustness(&'a RobustnessArgs),
    YearSweep(&'a YearSweepArgs),
}

/// The flag value, else the plan-file value, else nothing.
fn pick<T: std::str::FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key).map(|v| parse_setting(key, v)).transpose(),
    }
}

fn experiment(cli: &Cli, c: &ExperimentArgs, kind: Kind<'_>) -> CliResult {
    let file = match &c.plan {
        Some(path) => read_plan_file(path)?,
        None => PlanFile::default(),
    };
    let s = &file.settings;
    let known = [
        "algorithms", "auc_mode", "top_fraction", "max_cells", "format", "seed", "jobs", "scale", "f", "spammers",
        "samples", "spammer_ratings", "horizons",
    ];
    if let Some(k) = s.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Failure::Usage(format!("unknown plan key `{k}`")));
    }

    let algorithms = match c.algorithms.clone().or_else(|| s.get("algorithms").cloned()) {
        Some(list) => list
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Algorithm>>>()?,
        None => Algorithm::ALL.to_vec(),
    };
    let configs = algorithms
        .iter()
        .map(|&alg| {
            let params = file.algorithms.get(alg.name()).cloned().unwrap_or_default();
            AlgorithmConfig::default_for(alg).with_overrides(&params)
        })
        .collect::<Result<Vec<_>>>()?;

    let scale = pick(c.input.scale, s, "scale")?.unwrap_or_default();
    let seed = master_seed(cli, pick(None, s, "seed")?);
    let format = pick(c.format, s, "format")?.unwrap_or_default();
    let truth = load_truth(&c.truth)?;
    let mut events = load_events(&c.input, scale)?;
    if c.input.dedupe == Dedupe::Last {
        events = build_graph_with(events, scale, DuplicatePolicy::KeepLast)?.events().collect();
    }
    let dataset = Dataset::new(c.input.input.display().to_string(), events, scale)?;

    let mut plan = ExperimentPlan::new(dataset, Some(truth), configs);
    plan.seed = seed;
    plan.jobs = cli.jobs.or(pick(None, s, "jobs")?).unwrap_or(1);
    plan.max_cells = pick(c.max_cells, s, "max_cells")?;
    if let Some(mode) = pick(c.auc_mode, s, "auc_mode")? {
        plan.auc_mode = mode;
    }
    if let Some(t) = pick(c.top_fraction, s, "top_fraction")? {
        plan.top_fraction = t;
    }
    let grid = |flag: &Option<String>, key: &str| flag.clone().or_else(|| s.get(key).cloned());
    let report: ExperimentReport = match kind {
        Kind::Identify(a) => {
            if let Some(g) = grid(&a.f, "f") {
                plan.f_grid = parse_grid(&g)?;
            }
            log_plan(&plan);
            run_identification(&plan)?
        }
        Kind::Robustness(a) => {
            if let Some(g) = grid(&a.spammers, "spammers") {
                plan.spammers = parse_grid(&g)?;
            }
            if let Some(n) = pick(a.samples, s, "samples")? {
                plan.samples = n;
            }
            plan.spammer_ratings = pick(a.spammer_ratings, s, "spammer_ratings")?;
            log_plan(&plan);
            run_robustness(&plan)?
        }
        Kind::YearSweep(a) => {
            if let Some(g) = grid(&a.horizons, "horizons") {
                plan.horizons = Some(parse_grid(&g)?);
            }
            if let Some(f) = pick(a.f, s, "f")? {
                plan.sweep_f = f;
            }
            log_plan(&plan);
            run_year_sweep(&plan)?
        }
    };
    for w in &report.provenance.warnings {
        warn!("{w}");
    }
    let dir = output_dir(cli, &c.out);
    let paths = emit_report(&report, format, &dir)?;
    for p in &paths {
        info!("wrote {}", p.display());
    }
    if report.failures > 0 || report.non_converged > 0 {
        return Err(Failure::Domain(format!(
            "{} failed cells and {} non-converged runs; reports written to {}",
            report.failures,
            report.non_converged,
            dir.display()
        )));
    }
    Ok(())
}

fn log_plan(plan: &ExperimentPlan) {
    info!(
        "plan: dataset {} ({}), algorithms {:?}, seed {}, jobs {}",
        plan.dataset.label,
        plan.dataset.digest,
        plan.algorithms,
        plan.seed,
        plan.jobs
    );
}

fn report(cli: &Cli, a: &ReportArgs) -> CliResult {
    let scale = a.input.scale.unwrap_or_default();
    let (_, graph) = load_graph(&a.input, scale)?;
    let dir = output_dir(cli, &a.out);
    emit_year_counts(&graph, &dir)?;
    println!("year\tratings\tusers\titems");
    for c in year_counts(&graph) {
        println!("{}\t{}\t{}\t{}", c.year, c.ratings, c.users, c.items);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid::<usize>("100:100:500").unwrap(), vec![100, 200, 300, 400, 500]);
        assert_eq!(parse_grid::<usize>("15, 30,60").unwrap(), vec![15, 30, 60]);
        assert_eq!(parse_grid::<f64>("1:1:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_grid::<usize>("1:0:3").is_err());
        assert!(parse_grid::<usize>("a,b").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["atrank", "frobnicate"]), 2);
        assert_eq!(run(["atrank", "rank", "--algorithm", "pagerank", "--input", "x.csv"]), 2);
        assert_eq!(run(["atrank", "--help"]), 0);
    }
}
