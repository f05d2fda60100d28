//! Per-year inner-loop convergence of ATR on the full-size artificial
//! network (6000 users, 4000 items, 480000 links).
//!
//!     cargo run --release --example atr_convergence -- [seed]

use std::time::Instant;

use atrank::algorithms::{atr_run, AtrConfig};
use atrank::model::build_graph;
use atrank::synth::{generate_artificial, SynthParams};

fn main() -> atrank::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let params = SynthParams::full_size().with_seed(seed);
    let start = Instant::now();
    let (events, _) = generate_artificial(&params)?;
    let graph = build_graph(events, params.scale)?;
    println!("built {} ratings in {:.2?}", graph.n_events(), start.elapsed());

    let start = Instant::now();
    let result = atr_run(&graph, &AtrConfig::default())?;
    let elapsed = start.elapsed();
    for epoch in &result.diagnostics.epochs {
        println!(
            "year {}  iterations {:>4}  converged {}  max|dQ| {:.3e}",
            epoch.year.unwrap_or_default(),
            epoch.iterations,
            epoch.converged,
            epoch.final_delta
        );
    }
    println!("ATR finished in {elapsed:.2?}; converged = {}", result.converged());
    for (name, count) in &result.diagnostics.counters {
        println!("  {name}: {count}");
    }
    Ok(())
}
