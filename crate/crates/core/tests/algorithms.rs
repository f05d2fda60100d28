mod common;

use atrank::algorithms::{
    atr_behavioral_factors, atr_epoch_update, atr_initialize, atr_run, atr_year_weights, average_score, birank,
    correlation_ranking, AtrConfig, BiRankConfig, CrConfig,
};
use atrank::model::{build_graph, RatingEvent, TemporalBipartiteGraph};
use common::FIVE;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph(events: &[RatingEvent]) -> TemporalBipartiteGraph {
    build_graph(events.to_vec(), FIVE).unwrap()
}

#[test]
fn average_matches_brute_force_mean_exactly() {
    let events = common::random_grid(1, 40, 50, 0.3);
    let g = graph(&events);
    assert_eq!(g.n_items(), 50);
    let oracle = common::average(&events);
    let r = average_score(&g).unwrap();
    for (id, q) in g.item_ids().iter().zip(&r.quality) {
        assert_eq!(*q, oracle[id], "{id}");
    }
}

#[test]
fn correlation_ranking_reaches_long_run_fixed_point() {
    let events = common::random_grid(2, 20, 20, 0.5);
    let g = graph(&events);
    let config = CrConfig {
        threshold: 1e-13,
        max_iterations: 10_000,
    };
    let lib = correlation_ranking(&g, &config).unwrap();
    let long = common::correlation(&events, None, 0.0, 10_000).unwrap();
    assert!(lib.converged());
    for (id, q) in g.item_ids().iter().zip(&lib.quality) {
        assert!((q - long.quality[id]).abs() < 1e-10, "{id}: {q} vs {}", long.quality[id]);
    }
}

#[test]
fn birank_matches_dense_solve() {
    let events = common::random_grid(3, 10, 10, 0.5);
    let g = graph(&events);
    let r = birank(&g, &BiRankConfig::default()).unwrap();
    let (q, u) = common::birank_solve(&events, 0.85, 0.85);
    for (id, x) in g.item_ids().iter().zip(&r.quality) {
        assert!((x - q[id]).abs() < 1e-9, "{id}");
    }
    for (id, x) in g.user_ids().iter().zip(r.reputation.as_ref().unwrap()) {
        assert!((x - u[id]).abs() < 1e-9, "{id}");
    }
}

#[test]
fn year_weights_match_recount() {
    let events = common::random_grid(4, 15, 15, 0.4);
    let g = graph(&events);
    for slice in g.slices() {
        let (wu, wi) = common::year_weights(&events, slice.year());
        let w = atr_year_weights(slice);
        for (p, &u) in slice.users().iter().enumerate() {
            assert!((w.users[p] - wu[g.user_id(u)]).abs() < 1e-15);
        }
        for (p, &i) in slice.items().iter().enumerate() {
            assert!((w.items[p] - wi[g.item_id(i)]).abs() < 1e-15);
        }
    }
}

#[test]
fn user_with_half_the_year_has_weight_one_half() {
    let g = graph(&[
        RatingEvent::new("a", "x", 3.0, 2000),
        RatingEvent::new("a", "y", 4.0, 2000),
        RatingEvent::new("b", "x", 2.0, 2000),
        RatingEvent::new("c", "y", 5.0, 2000),
    ]);
    let w = atr_year_weights(&g.slices()[0]);
    assert_eq!(w.users[0], 0.5);
}

fn thirty_events() -> Vec<RatingEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut events = Vec::new();
    for u in 0..6 {
        for i in 0..5 {
            events.push(RatingEvent::new(
                format!("u{u}"),
                format!("i{i}"),
                rng.gen_range(1..=5) as f64,
                2000 + rng.gen_range(0..3),
            ));
        }
    }
    events
}

#[test]
fn initialisation_matches_two_pass_summation() {
    let events = thirty_events();
    assert_eq!(events.len(), 30);
    let g = graph(&events);
    let state = atr_initialize(&g);
    let (rep, q) = common::atr_initial(&events);
    for (u, id) in g.user_ids().iter().enumerate() {
        assert!((state.reputation[u] - rep[id]).abs() < 1e-12, "{id}");
    }
    for (i, id) in g.item_ids().iter().enumerate() {
        assert!((state.quality[i] - q[id]).abs() < 1e-12, "{id}");
    }
}

#[test]
fn single_event_initialisation() {
    let state = atr_initialize(&graph(&[RatingEvent::new("u", "m", 5.0, 1997)]));
    assert_eq!(state.reputation, vec![5.0]);
    assert_eq!(state.quality, vec![5.0]);
}

#[test]
fn constant_ratings_initialise_to_the_constant() {
    let events: Vec<RatingEvent> = thirty_events()
        .into_iter()
        .map(|e| RatingEvent { rating: 3.0, ..e })
        .collect();
    let state = atr_initialize(&graph(&events));
    assert!(state.quality.iter().all(|&q| (q - 3.0).abs() < 1e-12));
}

#[test]
fn epoch_update_matches_straight_line_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let mut events = Vec::new();
    for u in 0..5 {
        for i in 0..4 {
            if rng.gen_bool(0.8) {
                events.push(RatingEvent::new(
                    format!("u{u}"),
                    format!("i{i}"),
                    rng.gen_range(1..=5) as f64,
                    2000 + rng.gen_range(0..2),
                ));
            }
        }
    }
    let g = graph(&events);
    assert_eq!(g.years().len(), 2);
    let config = AtrConfig::default();
    let statics = common::atr_statics(&events, config.epsilon);
    let mut state = atr_initialize(&g);
    let (mut rep, mut q) = common::atr_initial(&events);
    for slice in g.slices() {
        let factors = atr_behavioral_factors(&state, slice, &config);
        let update = atr_epoch_update(&mut state, slice, &factors, &config);
        let (orep, oq) = common::atr_epoch(&events, &statics, slice.year(), &rep, &q, config.epsilon);
        for (p, &u) in slice.users().iter().enumerate() {
            let id = g.user_id(u);
            assert!((update.reputation[p] - orep[id]).abs() < 1e-12, "{id}: {} vs {}", update.reputation[p], orep[id]);
        }
        for (p, &i) in slice.items().iter().enumerate() {
            let id = g.item_id(i);
            assert!((update.quality[p] - oq[id]).abs() < 1e-12, "{id}: {} vs {}", update.quality[p], oq[id]);
        }
        // Continue both from the library's state so the second year is compared too.
        rep = common::to_map(g.user_ids(), &state.reputation);
        q = common::to_map(g.item_ids(), &state.quality);
    }
}

#[test]
fn unrated_items_carry_over() {
    let events = vec![
        RatingEvent::new("a", "x", 5.0, 2000),
        RatingEvent::new("b", "x", 2.0, 2000),
        RatingEvent::new("a", "y", 3.0, 2000),
        RatingEvent::new("b", "y", 4.0, 2001),
        RatingEvent::new("c", "y", 1.0, 2001),
    ];
    let g = graph(&events);
    let config = AtrConfig::default();
    let mut state = atr_initialize(&g);
    let x = g.item_index("x").unwrap();
    let before = state.quality[x];
    let slice = g.year_slice(2001).unwrap();
    let factors = atr_behavioral_factors(&state, slice, &config);
    atr_epoch_update(&mut state, slice, &factors, &config);
    assert_eq!(state.quality[x], before);
}

#[test]
fn every_year_stops_below_the_threshold() {
    let events = common::random_grid(6, 30, 30, 0.3);
    let r = atr_run(&graph(&events), &AtrConfig::default()).unwrap();
    assert!(r.converged());
    for epoch in &r.diagnostics.epochs {
        assert!(epoch.final_delta < 1e-4, "{epoch:?}");
    }
}

#[test]
fn single_year_run_is_one_inner_loop() {
    let events: Vec<RatingEvent> = common::random_grid(7, 12, 12, 0.5)
        .into_iter()
        .map(|e| RatingEvent { year: 2000, ..e })
        .collect();
    let g = graph(&events);
    let r = atr_run(&g, &AtrConfig::default()).unwrap();
    assert_eq!(r.diagnostics.epochs.len(), 1);
    let naive = common::atr(&events, 1e-4, 1000, 1e-6);
    assert_eq!(r.iterations(), naive.iterations);
}
