//! Award-winner identification on the toy ratings: matching number,
//! precision, recall and AUC at several cutoffs, written as a report.

use std::fs::File;

use atrank::algorithms::{Algorithm, AlgorithmConfig};
use atrank::harness::{emit_report, run_identification, Dataset, ExperimentPlan, ReportFormat};
use atrank::model::{parse_ratings, parse_target_set, RatingScale};

fn main() -> atrank::Result<()> {
    let dir = env!("CARGO_MANIFEST_DIR");
    let events = parse_ratings(File::open(format!("{dir}/fixtures/toy.csv"))?, RatingScale::FIVE_STAR)?;
    let truth = parse_target_set(File::open(format!("{dir}/fixtures/winners.txt"))?)?;
    let dataset = Dataset::new("toy", events, RatingScale::FIVE_STAR)?;
    let algorithms = Algorithm::ALL.iter().map(|&a| AlgorithmConfig::default_for(a)).collect();
    let mut plan = ExperimentPlan::new(dataset, Some(truth), algorithms);
    plan.f_grid = vec![20.0, 40.0, 60.0];
    let report = run_identification(&plan)?;

    println!("{:<8}{:>8}{:>8}{:>8}{:>8}", "", "M@20", "M@40", "M@60", "AUC");
    for alg in Algorithm::ALL {
        let m = |f: &str| report.value(alg.name(), f, "M").unwrap_or(f64::NAN);
        println!(
            "{:<8}{:>8}{:>8}{:>8}{:>8.3}",
            alg.name(),
            m("f=20"),
            m("f=40"),
            m("f=60"),
            report.value(alg.name(), "f=20", "auc").unwrap_or(f64::NAN)
        );
    }
    let out = std::env::temp_dir().join("atrank-identification");
    std::fs::create_dir_all(&out)?;
    for path in emit_report(&report, ReportFormat::Csv, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
