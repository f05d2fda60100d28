//! Matching number as the data grows year by year: each horizon ranks only
//! the ratings up to that year against winners already awarded.

use atrank::algorithms::{Algorithm, AlgorithmConfig};
use atrank::harness::{run_year_sweep, Dataset, ExperimentPlan};
use atrank::model::GroundTruth;
use atrank::synth::{generate_artificial, SynthParams};

fn main() -> atrank::Result<()> {
    let params = SynthParams {
        n_users: 300,
        n_items: 200,
        n_years: 8,
        ..SynthParams::default()
    };
    let (events, truth) = generate_artificial(&params)?;
    // Top-decile items become winners, awarded in a year spread across the span.
    let winners = truth
        .targets(0.1)
        .into_iter()
        .enumerate()
        .map(|(k, id)| (id, Some(params.first_year + (k % params.n_years) as i32)))
        .collect();
    let dataset = Dataset::new("synthetic", events, params.scale)?;
    let algorithms = Algorithm::ALL.iter().map(|&a| AlgorithmConfig::default_for(a)).collect();
    let mut plan = ExperimentPlan::new(dataset, Some(GroundTruth::TargetSet(winners)), algorithms);
    plan.sweep_f = 10.0;
    let report = run_year_sweep(&plan)?;

    let years: Vec<i32> = (0..params.n_years as i32).map(|k| params.first_year + k).collect();
    print!("{:<8}", "");
    for y in &years {
        print!("{y:>6}");
    }
    println!();
    for alg in Algorithm::ALL {
        print!("{:<8}", alg.name());
        for y in &years {
            print!("{:>6}", report.value(alg.name(), &format!("year={y}"), "M").unwrap_or(f64::NAN));
        }
        println!();
    }
    print!("{:<8}", "winners");
    for y in &years {
        print!("{:>6}", report.value("avg", &format!("year={y}"), "truth_size").unwrap_or(f64::NAN));
    }
    println!();
    Ok(())
}
