//! A citation list treated as a rating network: citing papers are users,
//! cited papers are items, every citation is a top rating.

use atrank::algorithms::{rank, Algorithm, AlgorithmConfig};
use atrank::model::{build_graph, citation_to_bipartite, CitationEdge, RatingScale, SelfLoopPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> atrank::Result<()> {
    // Preferential attachment: later papers cite earlier ones in proportion to their citations so far.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut cited_count = vec![1usize; 5];
    let mut edges = Vec::new();
    for paper in 5..300usize {
        let year = 1990 + (paper / 30) as i32;
        let mut refs = std::collections::BTreeSet::new();
        while refs.len() < 4.min(paper) {
            let total: usize = cited_count.iter().sum();
            let mut pick = rng.gen_range(0..total);
            let target = cited_count.iter().position(|&c| {
                if pick < c {
                    true
                } else {
                    pick -= c;
                    false
                }
            });
            refs.insert(target.unwrap());
        }
        for &r in &refs {
            cited_count[r] += 1;
            edges.push(CitationEdge {
                citing: format!("P{paper}"),
                cited: format!("P{r}"),
                year,
            });
        }
        cited_count.push(1);
    }

    let scale = RatingScale::FIVE_STAR;
    let events = citation_to_bipartite(&edges, scale.max, SelfLoopPolicy::Reject)?;
    let graph = build_graph(events, scale)?;
    println!("{} citations, {} citing papers, {} cited papers", graph.n_events(), graph.n_users(), graph.n_items());
    for alg in [Algorithm::Avg, Algorithm::BiRank, Algorithm::Atr] {
        let r = rank(&graph, &AlgorithmConfig::default_for(alg))?;
        println!("{:<7} top 8: {:?}", alg.name(), &r.ranked_item_ids()[..8]);
    }
    Ok(())
}
