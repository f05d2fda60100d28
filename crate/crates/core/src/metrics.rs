//! AUC, precision, recall, F, the matching number and robustness RMSE.
//!
//! Rankings are descending by score with ties broken by ascending item
//! identifier, so every cutoff is deterministic.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// How AUC is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AucMode {
    /// Every positive–negative pair, ties counting one half.
    #[default]
    Exact,
    /// `n` uniformly drawn positive–negative pairs.
    Sampled { n: usize, seed: u64 },
}

impl fmt::Display for AucMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AucMode::Exact => f.write_str("exact"),
            AucMode::Sampled { n, seed } => write!(f, "sampled:{n}:{seed}"),
        }
    }
}

/// Parses `exact` or `sampled:N:seed`.
impl FromStr for AucMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("AUC mode must be `exact` or `sampled:N:seed`, got `{s}`"));
        match s.split(':').collect::<Vec<_>>().as_slice() {
            ["exact"] => Ok(AucMode::Exact),
            ["sampled", n, seed] => Ok(AucMode::Sampled {
                n: n.parse().map_err(|_| bad())?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Indexes by descending score, ties by ascending identifier. NaN sorts last.
pub fn rank_order<S: AsRef<str>>(ids: &[S], scores: &[f64]) -> Vec<usize> {
    let key = |i: usize| if scores[i].is_nan() { f64::NEG_INFINITY } else { scores[i] };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        key(b)
            .total_cmp(&key(a))
            .then_with(|| scores[a].is_nan().cmp(&scores[b].is_nan()))
            .then_with(|| ids[a].as_ref().cmp(ids[b].as_ref()))
    });
    order
}

/// AUC of `scores` for the items flagged in `positive`; every other item is
/// a negative.
pub fn auc(scores: &[f64], positive: &[bool], mode: AucMode) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::InvalidParameter("scores and labels differ in length".into()));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUC needs positives and negatives, got {n_pos} and {n_neg}"
        )));
    }
    match mode {
        AucMode::Exact => Ok(exact_auc(scores, positive, n_pos, n_neg)),
        AucMode::Sampled { n, seed } => sampled_auc(scores, positive, n, seed),
    }
}

fn exact_auc(scores: &[f64], positive: &[bool], n_pos: usize, n_neg: usize) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean.
        let mid = (start + 1 + end) as f64 / 2.0;
        rank_sum += mid * order[start..end].iter().filter(|&&i| positive[i]).count() as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

fn sampled_auc(scores: &[f64], positive: &[bool], n: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("sampled AUC needs at least one comparison".into()));
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..scores.len()).partition(|&i| positive[i]);
    let mut rng = stream(seed, Domain::AucSampling, 0, 0);
    let mut total = 0.0;
    for _ in 0..n {
        let a = scores[pos[rng.gen_range(0..pos.len())]];
        let b = scores[neg[rng.gen_range(0..neg.len())]];
        total += if a > b {
            1.0
        } else if a == b {
            0.5
        } else {
            0.0
        };
    }
    Ok(total / n as f64)
}

/// Precision, recall and F of the top `cutoff` of `ranked` against `truth`.
pub fn precision_recall_f<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, cutoff: usize) -> Result<(f64, f64, f64)> {
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("recall needs a non-empty truth set".into()));
    }
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    let retrieved = cutoff.min(ranked.len());
    if retrieved == 0 {
        return Err(Error::UndefinedMetric("precision needs a non-empty ranking".into()));
    }
    let hits = hits(ranked, truth, retrieved) as f64;
    let p = hits / retrieved as f64;
    let r = hits / truth.len() as f64;
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    Ok((p, r, f))
}

/// ⌈f/100 · n⌉.
pub fn cutoff_size(n: usize, f_percent: f64) -> Result<usize> {
    if !(f_percent > 0.0 && f_percent <= 100.0) {
        return Err(Error::InvalidParameter(format!("f must lie in (0, 100], got {f_percent}")));
    }
    if n == 0 {
        return Err(Error::UndefinedMetric("empty ranking".into()));
    }
    Ok(((f_percent / 100.0 * n as f64).ceil() as usize).clamp(1, n))
}

/// Truth items among the top f% of the ranking.
pub fn matching_number<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, f_percent: f64) -> Result<usize> {
    let cutoff = cutoff_size(ranked.len(), f_percent)?;
    Ok(hits(ranked, truth, cutoff))
}

fn hits<S: AsRef<str>>(ranked: &[S], truth: &BTreeSet<String>, cutoff: usize) -> usize {
    ranked[..cutoff].iter().filter(|id| truth.contains(id.as_ref())).count()
}

/// Root mean squared deviation of the perturbed AUCs from the clean one.
pub fn rmse_auc(samples: &[f64], baseline: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::UndefinedMetric("RMSE needs at least one sample".into()));
    }
    let ss: f64 = samples.iter().map(|s| (s - baseline).powi(2)).sum();
    Ok((ss / samples.len() as f64).sqrt())
}

/// Every metric of one ranking against one truth set at one cutoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub auc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_value: f64,
    pub m: usize,
    pub cutoff_f_percent: f64,
    pub cutoff: usize,
    /// Comparisons behind a sampled AUC.
    pub n_comparisons: Option<usize>,
}

/// Scores every metric; the retrieved set Y is the top ⌈f/100 · n⌉ items.
pub fn evaluate<S: AsRef<str>>(
    ids: &[S],
    scores: &[f64],
    truth: &BTreeSet<String>,
    f_percent: f64,
    mode: AucMode,
) -> Result<MetricReport> {
    let order = rank_order(ids, scores);
    let ranked: Vec<&str> = order.iter().map(|&i| ids[i].as_ref()).collect();
    let cutoff = cutoff_size(ranked.len(), f_percent)?;
    let (precision, recall, f_value) = precision_recall_f(&ranked, truth, cutoff)?;
    let positive: Vec<bool> = ids.iter().map(|id| truth.contains(id.as_ref())).collect();
    Ok(MetricReport {
        auc: auc(scores, &positive, mode)?,
        precision,
        recall,
        f_value,
        m: hits(&ranked, truth, cutoff),
        cutoff_f_percent: f_percent,
        cutoff,
        n_comparisons: match mode {
            AucMode::Exact => None,
            AucMode::Sampled { n, .. } => Some(n),
        },
    })
}

/// RMSE of one algorithm at one spammer count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessPoint {
    pub n_spammers: usize,
    pub auc_ran: Vec<f64>,
    pub auc_real: f64,
    pub rmse: f64,
}

impl RobustnessPoint {
    pub fn new(n_spammers: usize, auc_ran: Vec<f64>, auc_real: f64) -> Result<Self> {
        let rmse = rmse_auc(&auc_ran, auc_real)?;
        Ok(Self {
            n_spammers,
            auc_ran,
            auc_real,
            rmse,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn auc_by_hand() {
        assert_eq!(auc(&[3.0, 2.0, 1.0], &[true, false, true], AucMode::Exact).unwrap(), 0.5);
        assert_eq!(auc(&[3.0, 2.0, 1.0], &[true, false, false], AucMode::Exact).unwrap(), 1.0);
        assert_eq!(auc(&[1.0; 4], &[true, false, true, false], AucMode::Exact).unwrap(), 0.5);
        assert!(matches!(auc(&[1.0], &[true], AucMode::Exact), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn sampled_auc_is_close() {
        let scores: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let positive: Vec<bool> = (0..200).map(|i| i % 3 == 0).collect();
        let exact = auc(&scores, &positive, AucMode::Exact).unwrap();
        let sampled = auc(&scores, &positive, AucMode::Sampled { n: 100_000, seed: 3 }).unwrap();
        assert!((exact - sampled).abs() < 0.01);
    }

    #[test]
    fn auc_mode_parsing() {
        assert_eq!("exact".parse::<AucMode>().unwrap(), AucMode::Exact);
        let m: AucMode = "sampled:1000:7".parse().unwrap();
        assert_eq!(m, AucMode::Sampled { n: 1000, seed: 7 });
        assert_eq!(m.to_string().parse::<AucMode>().unwrap(), m);
        assert!("sampled:x".parse::<AucMode>().is_err());
    }

    #[test]
    fn prf_by_hand() {
        let ranked = ["a", "b", "c", "d", "e", "f"];
        let (p, r, f) = precision_recall_f(&ranked, &set(&["a", "c", "x", "y"]), 5).unwrap();
        assert_eq!((p, r), (0.4, 0.5));
        assert!((f - 0.4 / 0.9).abs() < 1e-15);
        assert_eq!(precision_recall_f(&ranked, &set(&["f"]), 2).unwrap(), (0.0, 0.0, 0.0));
        assert_eq!(precision_recall_f(&ranked, &set(&["a", "b"]), 2).unwrap(), (1.0, 1.0, 1.0));
        assert!(precision_recall_f(&ranked, &set(&[]), 2).is_err());
    }

    #[test]
    fn matching_by_hand() {
        let ranked: Vec<String> = (0..200).map(|i| format!("m{i:03}")).collect();
        let truth = set(&["m001", "m004", "m009", "m050", "m100", "m150", "m190", "m191", "m192", "m199"]);
        assert_eq!(matching_number(&ranked, &truth, 5.0).unwrap(), 3);
        assert_eq!(matching_number(&ranked, &truth, 100.0).unwrap(), 10);
        assert_eq!(matching_number(&ranked, &set(&["zzz"]), 100.0).unwrap(), 0);
        assert!(matching_number(&ranked, &truth, 0.0).is_err());
        assert!(matching_number::<String>(&[], &truth, 5.0).is_err());
    }

    #[test]
    fn rank_order_ties() {
        let order = rank_order(&["b", "a", "c", "d"], &[1.0, 1.0, f64::NAN, 2.0]);
        assert_eq!(order, vec![3, 1, 0, 2]);
    }

    #[test]
    fn rmse_by_hand() {
        assert!((rmse_auc(&[0.8, 0.9], 0.85).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(rmse_auc(&[0.7, 0.7], 0.7).unwrap(), 0.0);
        assert!((rmse_auc(&[0.6], 0.75).unwrap() - 0.15).abs() < 1e-15);
        assert!(rmse_auc(&[], 0.5).is_err());
    }
}
