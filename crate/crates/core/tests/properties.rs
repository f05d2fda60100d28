use std::collections::{BTreeMap, BTreeSet};

use atrank::algorithms::{atr_year_weights, pearson, rank, redistribute, Algorithm, AlgorithmConfig};
use atrank::metrics::{auc, matching_number, precision_recall_f, rank_order, AucMode};
use atrank::model::{build_graph, parse_ratings, write_ratings, RatingEvent, RatingScale};
use atrank::synth::{generate_artificial, inject_random_spammers, GraphShape, SpamInjection, SynthParams};
use proptest::prelude::*;

const FIVE: RatingScale = RatingScale::FIVE_STAR;

fn events() -> impl Strategy<Value = Vec<RatingEvent>> {
    prop::collection::vec((0..8usize, 0..8usize, 0..4i32, 1..=5u8), 1..60).prop_map(|raw| {
        let unique: BTreeMap<(usize, usize, i32), u8> = raw.into_iter().map(|(u, i, y, r)| ((u, i, y), r)).collect();
        unique
            .into_iter()
            .map(|((u, i, y), r)| RatingEvent::new(format!("u{u}"), format!("i{i}"), r as f64, 2000 + y))
            .collect()
    })
}

fn sorted(mut events: Vec<RatingEvent>) -> Vec<RatingEvent> {
    events.sort_by(|a, b| (a.year, &a.user, &a.item).cmp(&(b.year, &b.user, &b.item)));
    events
}

proptest! {
    #[test]
    fn degrees_match_brute_force(evs in events()) {
        let g = build_graph(evs.clone(), FIVE).unwrap();
        for slice in g.slices() {
            let n = evs.iter().filter(|e| e.year == slice.year()).count();
            prop_assert_eq!(slice.n_ratings(), n);
            for (p, &u) in slice.users().iter().enumerate() {
                let k = evs.iter().filter(|e| e.year == slice.year() && e.user == g.user_id(u)).count();
                prop_assert_eq!(slice.user_degree_at(p), k);
            }
            for (p, &i) in slice.items().iter().enumerate() {
                let k = evs.iter().filter(|e| e.year == slice.year() && e.item == g.item_id(i)).count();
                prop_assert_eq!(slice.item_degree_at(p), k);
            }
            let users: usize = (0..slice.users().len()).map(|p| slice.user_degree_at(p)).sum();
            let items: usize = (0..slice.items().len()).map(|p| slice.item_degree_at(p)).sum();
            prop_assert_eq!(users, n);
            prop_assert_eq!(items, n);
        }
    }

    #[test]
    fn serialisation_round_trip(evs in events()) {
        let mut bytes = Vec::new();
        write_ratings(&mut bytes, &evs).unwrap();
        let g = build_graph(parse_ratings(bytes.as_slice(), FIVE).unwrap(), FIVE).unwrap();
        prop_assert_eq!(sorted(g.events().collect()), sorted(evs));
    }

    #[test]
    fn restriction_is_idempotent(evs in events(), back in 0..4i32) {
        let g = build_graph(evs, FIVE).unwrap();
        let horizon = g.first_year() + back;
        let once = g.restrict_to_years(horizon).unwrap();
        let twice = once.restrict_to_years(horizon).unwrap();
        prop_assert_eq!(once.events().collect::<Vec<_>>(), twice.events().collect::<Vec<_>>());
    }

    #[test]
    fn year_weights_sum_to_one(evs in events()) {
        let g = build_graph(evs, FIVE).unwrap();
        for slice in g.slices() {
            let w = atr_year_weights(slice);
            prop_assert!((w.users.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!((w.items.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn redistribution_conserves_total(tr in prop::collection::vec(0.0..1.0f64, 1..100), phi in 1.0..6.0f64) {
        let total: f64 = tr.iter().sum();
        prop_assume!(total > 0.0);
        let r = redistribute(&tr, phi).unwrap();
        prop_assert!(((r.iter().sum::<f64>() - total) / total).abs() <= 1e-10);
        prop_assert!(r.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn pearson_is_affine_invariant(
        xy in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..40),
        slope in 0.01..100.0f64,
        shift in -50.0..50.0f64,
    ) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let moved: Vec<f64> = xs.iter().map(|x| slope * x + shift).collect();
        match (pearson(&xs, &ys), pearson(&moved, &ys)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b),
            (None, None) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn metrics_ignore_increasing_transforms(
        scored in prop::collection::vec((0..40i32, any::<bool>()), 2..200),
        f in 1.0..100.0f64,
    ) {
        prop_assume!(scored.iter().any(|s| s.1) && scored.iter().any(|s| !s.1));
        let ids: Vec<String> = (0..scored.len()).map(|i| format!("x{i}")).collect();
        let scores: Vec<f64> = scored.iter().map(|s| s.0 as f64).collect();
        let cubed: Vec<f64> = scores.iter().map(|x| x * x * x + 7.0).collect();
        let positive: Vec<bool> = scored.iter().map(|s| s.1).collect();
        let truth: BTreeSet<String> = ids.iter().zip(&positive).filter(|p| *p.1).map(|p| p.0.clone()).collect();
        prop_assert_eq!(auc(&scores, &positive, AucMode::Exact).unwrap(), auc(&cubed, &positive, AucMode::Exact).unwrap());
        let a: Vec<&String> = rank_order(&ids, &scores).into_iter().map(|i| &ids[i]).collect();
        let b: Vec<&String> = rank_order(&ids, &cubed).into_iter().map(|i| &ids[i]).collect();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(matching_number(&a, &truth, f).unwrap(), matching_number(&b, &truth, f).unwrap());
        let cutoff = 1 + (scored.len() - 1) / 2;
        let (p, r, _) = precision_recall_f(&a, &truth, cutoff).unwrap();
        let hits = a[..cutoff].iter().filter(|x| truth.contains(x.as_str())).count() as f64;
        prop_assert!((p * cutoff as f64 - hits).abs() < 1e-9);
        prop_assert!((r * truth.len() as f64 - hits).abs() < 1e-9);
    }

    #[test]
    fn matching_number_is_monotone(n in 1..300usize, density in 0.0..1.0f64, seed in any::<u64>()) {
        let ids: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let truth: BTreeSet<String> = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| ((seed.wrapping_mul(*i as u64 + 1) >> 11) as f64 / (1u64 << 53) as f64) < density)
            .map(|(_, id)| id.clone())
            .collect();
        let mut last = 0;
        for f in 1..=100 {
            let m = matching_number(&ids, &truth, f as f64).unwrap();
            prop_assert!(m >= last);
            last = m;
        }
        prop_assert_eq!(last, truth.len());
    }

    #[test]
    fn ranking_is_deterministic(evs in events()) {
        let g = build_graph(evs, FIVE).unwrap();
        for alg in Algorithm::ALL {
            let config = AlgorithmConfig::default_for(alg);
            match (rank(&g, &config), rank(&g, &config)) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.quality.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.quality.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
                    prop_assert_eq!(format!("{:?}", a.reputation), format!("{:?}", b.reputation));
                }
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                _ => prop_assert!(false, "{} differs between runs", alg),
            }
        }
    }

    #[test]
    fn clamped_reputations_are_non_negative(evs in events()) {
        let g = build_graph(evs, FIVE).unwrap();
        for alg in [Algorithm::Cr, Algorithm::Iarr, Algorithm::Atr] {
            if let Ok(r) = rank(&g, &AlgorithmConfig::default_for(alg)) {
                prop_assert!(r.reputation.unwrap().iter().all(|&x| x >= 0.0), "{}", alg);
            }
        }
    }

    #[test]
    fn injection_keeps_original_events(evs in events(), n in 0..20usize, per in 1..5usize, seed in any::<u64>()) {
        let g = build_graph(evs.clone(), FIVE).unwrap();
        let shape = GraphShape::of(&g);
        prop_assume!(per <= shape.items.len());
        let spec = SpamInjection { n_spammers: n, ratings_per_spammer: Some(per), seed };
        let out = inject_random_spammers(&evs, &shape, &spec).unwrap();
        prop_assert_eq!(&out[..evs.len()], &evs[..]);
        prop_assert_eq!(out.len(), evs.len() + n * per);
        prop_assert!(out[evs.len()..].iter().all(|e| FIVE.contains(e.rating) && shape.years.contains(&e.year)));
        prop_assert!(build_graph(out, FIVE).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_links_are_distinct(users in 2..60usize, items in 2..60usize, sparsity in 0.05..1.0f64, seed in any::<u64>()) {
        let params = SynthParams { n_users: users, n_items: items, sparsity, n_years: 3, ..SynthParams::default() }.with_seed(seed);
        let (evs, _) = generate_artificial(&params).unwrap();
        let pairs: BTreeSet<(&str, &str)> = evs.iter().map(|e| (e.user.as_str(), e.item.as_str())).collect();
        prop_assert_eq!(pairs.len(), evs.len());
        prop_assert_eq!(evs.len(), params.n_links().unwrap());
        let (again, _) = generate_artificial(&params).unwrap();
        prop_assert_eq!(evs, again);
    }
}
