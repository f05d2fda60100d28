//! The evaluation metrics on a small hand-made ranking.

use std::collections::BTreeSet;

use atrank::metrics::{auc, cutoff_size, evaluate, matching_number, precision_recall_f, rmse_auc, AucMode};

fn main() -> atrank::Result<()> {
    let ids = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
    let scores = [9.0, 8.0, 8.0, 7.0, 5.0, 5.0, 4.0, 2.0, 1.0, 0.0];
    let truth: BTreeSet<String> = ["a", "c", "f", "j"].iter().map(|s| s.to_string()).collect();
    let positive: Vec<bool> = ids.iter().map(|id| truth.contains(*id)).collect();

    println!("exact AUC          {:.4}", auc(&scores, &positive, AucMode::Exact)?);
    println!("sampled AUC (1e5)  {:.4}", auc(&scores, &positive, AucMode::Sampled { n: 100_000, seed: 1 })?);
    for cutoff in [2, 5, 10] {
        let (p, r, f) = precision_recall_f(&ids, &truth, cutoff)?;
        println!("top {cutoff:>2}: precision {p:.3} recall {r:.3} F {f:.3}");
    }
    for f in [10.0, 30.0, 50.0, 100.0] {
        println!("M@{f}% = {} (cutoff {})", matching_number(&ids, &truth, f)?, cutoff_size(ids.len(), f)?);
    }
    println!("RMSE of {{0.80, 0.90}} around 0.85: {:.3}", rmse_auc(&[0.8, 0.9], 0.85)?);
    println!("\n{:#?}", evaluate(&ids, &scores, &truth, 30.0, AucMode::Exact)?);
    Ok(())
}
