//! Robustness to random raters: AUC drift (RMSE) per algorithm as spammers
//! are added to an artificial network.
//!
//!     cargo run --release --example spam_robustness -- [samples] [jobs]

use atrank::algorithms::{Algorithm, AlgorithmConfig};
use atrank::harness::{robustness_points, run_robustness, Dataset, ExperimentPlan};
use atrank::synth::{generate_artificial, SynthParams};

fn main() -> atrank::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples = args.next().map_or(5, |s| s.parse().expect("samples"));
    let jobs = args.next().map_or(1, |s| s.parse().expect("jobs"));
    let params = SynthParams::default().with_seed(3);
    let (events, truth) = generate_artificial(&params)?;
    let dataset = Dataset::new("synthetic", events, params.scale)?;
    let algorithms = Algorithm::ALL.iter().map(|&a| AlgorithmConfig::default_for(a)).collect();
    let mut plan = ExperimentPlan::new(dataset, Some(truth), algorithms);
    plan.spammers = vec![0, 15, 30, 60];
    plan.samples = samples;
    plan.jobs = jobs;
    plan.seed = 3;
    let report = run_robustness(&plan)?;

    println!("{:<8}{:>10}{:>10}{:>10}{:>10}{:>10}", "", "AUC", "n=0", "n=15", "n=30", "n=60");
    for alg in Algorithm::ALL {
        let points = robustness_points(&report, alg.name());
        print!("{:<8}{:>10.4}", alg.name(), points.first().map_or(f64::NAN, |p| p.auc_real));
        for p in &points {
            print!("{:>10.5}", p.rmse);
        }
        println!();
    }
    println!("\nfailures {}, non-converged runs {}", report.failures, report.non_converged);
    Ok(())
}
