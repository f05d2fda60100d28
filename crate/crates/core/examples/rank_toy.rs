//! Every algorithm on the bundled toy ratings, side by side.
//!
//!     cargo run --example rank_toy -- [ratings.csv]

use std::fs::File;

use atrank::algorithms::{rank, Algorithm, AlgorithmConfig};
use atrank::model::{build_graph, parse_ratings, RatingScale};

fn main() -> atrank::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy.csv").to_string());
    let events = parse_ratings(File::open(&path)?, RatingScale::FIVE_STAR)?;
    let graph = build_graph(events, RatingScale::FIVE_STAR)?;
    println!(
        "{} users, {} items, {} ratings over {:?}\n",
        graph.n_users(),
        graph.n_items(),
        graph.n_events(),
        graph.years()
    );

    let results = Algorithm::ALL
        .iter()
        .map(|&a| rank(&graph, &AlgorithmConfig::default_for(a)))
        .collect::<atrank::Result<Vec<_>>>()?;
    print!("{:<10}", "item");
    for r in &results {
        print!("{:>12}", r.algorithm.name());
    }
    println!();
    for (i, id) in graph.item_ids().iter().enumerate() {
        print!("{id:<10}");
        for r in &results {
            print!("{:>12.5}", r.quality[i]);
        }
        println!();
    }
    println!();
    for r in &results {
        println!(
            "{:<7} order {:?}  iterations {}  converged {}",
            r.algorithm.name(),
            r.ranked_item_ids(),
            r.iterations(),
            r.converged()
        );
    }
    Ok(())
}
