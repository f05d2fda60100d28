//! BiRank converges to the same scores from any start; the residual of the
//! fixed-point equations shrinks with the threshold.

use atrank::algorithms::{birank, birank_from, BiRankConfig, QueryVectors};
use atrank::model::build_graph;
use atrank::synth::{generate_artificial, SynthParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> atrank::Result<()> {
    let params = SynthParams {
        n_users: 200,
        n_items: 150,
        ..SynthParams::default()
    };
    let (events, _) = generate_artificial(&params)?;
    let graph = build_graph(events, params.scale)?;

    for threshold in [1e-4, 1e-7, 1e-10, 1e-13] {
        let config = BiRankConfig {
            threshold,
            ..BiRankConfig::default()
        };
        let r = birank(&graph, &config)?;
        println!("threshold {threshold:.0e}: {} iterations, last step {:.2e}", r.iterations(), r.diagnostics.epochs[0].final_delta);
    }

    let config = BiRankConfig::default();
    let base = birank(&graph, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..5 {
        let u: Vec<f64> = (0..graph.n_users()).map(|_| rng.gen::<f64>() * 10.0).collect();
        let v: Vec<f64> = (0..graph.n_items()).map(|_| rng.gen::<f64>() * 10.0).collect();
        let other = birank_from(&graph, &config, Some((&u, &v)))?;
        let gap = base.quality.iter().zip(&other.quality).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("random start {trial}: max |dQ| {gap:.2e} after {} iterations", other.iterations());
    }

    let uniform = birank(
        &graph,
        &BiRankConfig {
            query: QueryVectors::Uniform,
            ..config
        },
    )?;
    println!("\ntop items, degree prior: {:?}", &base.ranked_item_ids()[..5]);
    println!("top items, uniform prior: {:?}", &uniform.ranked_item_ids()[..5]);
    Ok(())
}
