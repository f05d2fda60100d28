//! How well each algorithm recovers the known qualities of an artificial
//! network: AUC against the top decile of true quality, per seed.
//!
//!     cargo run --release --example synthetic_recovery -- [seeds] [noise]

use atrank::algorithms::{rank, Algorithm, AlgorithmConfig};
use atrank::metrics::{auc, AucMode};
use atrank::model::build_graph;
use atrank::synth::{generate_artificial, SynthParams};

fn main() -> atrank::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map_or(3, |s| s.parse().expect("seed count"));
    let noise: f64 = args.next().map_or(0.5, |s| s.parse().expect("noise sigma"));

    print!("{:>5}", "seed");
    for a in Algorithm::ALL {
        print!("{:>9}", a.name());
    }
    println!();
    for seed in 0..seeds {
        let params = SynthParams {
            noise_sigma: noise,
            ..SynthParams::default().with_seed(seed)
        };
        let (events, truth) = generate_artificial(&params)?;
        let graph = build_graph(events, params.scale)?;
        let targets = truth.targets(0.1);
        let positive: Vec<bool> = graph.item_ids().iter().map(|id| targets.contains(id)).collect();
        print!("{seed:>5}");
        for a in Algorithm::ALL {
            let result = rank(&graph, &AlgorithmConfig::default_for(a))?;
            print!("{:>9.4}", auc(&result.quality, &positive, AucMode::Exact)?);
        }
        println!();
    }
    Ok(())
}
