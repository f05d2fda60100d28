//! One ATR pass on the toy ratings with every intermediate quantity shown:
//! year weights, behavioural factors and each inner update.

use std::fs::File;

use atrank::algorithms::{atr_behavioral_factors, atr_epoch_update, atr_initialize, atr_year_weights, AtrConfig};
use atrank::model::{build_graph, parse_ratings, RatingScale};

fn main() -> atrank::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/toy.csv");
    let graph = build_graph(parse_ratings(File::open(path)?, RatingScale::FIVE_STAR)?, RatingScale::FIVE_STAR)?;
    let config = AtrConfig {
        rescale_quality: false,
        ..AtrConfig::default()
    };
    let mut state = atr_initialize(&graph);
    let show = |label: &str, values: &[f64], ids: &[String]| {
        let cells: Vec<String> = ids.iter().zip(values).map(|(id, v)| format!("{id}={v:.4}")).collect();
        println!("  {label:<6} {}", cells.join("  "));
    };
    println!("initial");
    show("R", &state.reputation, graph.user_ids());
    show("Q", &state.quality, graph.item_ids());

    for slice in graph.slices() {
        let users: Vec<String> = slice.users().iter().map(|&u| graph.user_id(u).to_string()).collect();
        let items: Vec<String> = slice.items().iter().map(|&i| graph.item_id(i).to_string()).collect();
        let w = atr_year_weights(slice);
        println!("\nyear {} ({} ratings)", slice.year(), slice.n_ratings());
        show("W", &w.users, &users);
        show("W~", &w.items, &items);
        // Three raw steps, without the mean-preserving rescale.
        for step in 1..=3 {
            let factors = atr_behavioral_factors(&state, slice, &config);
            let update = atr_epoch_update(&mut state, slice, &factors, &config);
            println!(" step {step}");
            show("accu_i", &factors.users, &users);
            show("accu_a", &factors.items, &items);
            show("R", &update.reputation, &users);
            show("Q", &update.quality, &items);
        }
    }
    println!("\nfloors: {:?}", state.floors);
    Ok(())
}
