//! Shared test support: random fixtures and a naive, string-keyed
//! re-implementation of every algorithm written straight from the formulas.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use atrank::model::{RatingEvent, RatingScale};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Map = BTreeMap<String, f64>;

/// Up to `max_events` events on a few users, items and years; every
/// (user, item) pair occurs at most once.
pub fn random_events(seed: u64, max_events: usize) -> Vec<RatingEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = rng.gen_range(2..=9);
    let n_items = rng.gen_range(2..=9);
    let n_years = rng.gen_range(1..=4);
    let mut cells: Vec<(usize, usize)> = (0..n_users).flat_map(|u| (0..n_items).map(move |i| (u, i))).collect();
    cells.shuffle(&mut rng);
    let n = rng.gen_range(n_users.max(n_items)..=max_events.min(cells.len()).max(n_users.max(n_items)));
    cells
        .into_iter()
        .take(n)
        .map(|(u, i)| {
            RatingEvent::new(
                format!("u{u}"),
                format!("i{i}"),
                rng.gen_range(1..=5) as f64,
                2000 + rng.gen_range(0..n_years),
            )
        })
        .collect()
}

/// Dense-ish graph: every user rates each item with probability `density`.
pub fn random_grid(seed: u64, n_users: usize, n_items: usize, density: f64) -> Vec<RatingEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quality: Vec<f64> = (0..n_items).map(|_| rng.gen_range(1.0..5.0)).collect();
    let mut events = Vec::new();
    for u in 0..n_users {
        for (i, q) in quality.iter().enumerate() {
            if rng.gen_bool(density) {
                let r = (q + rng.gen_range(-1.5..1.5f64)).round().clamp(1.0, 5.0);
                events.push(RatingEvent::new(format!("u{u}"), format!("i{i}"), r, 2000 + rng.gen_range(0..3)));
            }
        }
    }
    events
}

pub const FIVE: RatingScale = RatingScale::FIVE_STAR;

#[derive(Debug, Clone)]
pub struct Naive {
    pub quality: Map,
    pub reputation: Map,
    pub iterations: usize,
    pub converged: bool,
}

fn by_user(events: &[RatingEvent]) -> BTreeMap<String, Vec<(String, f64)>> {
    let mut m: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for e in events {
        m.entry(e.user.clone()).or_default().push((e.item.clone(), e.rating));
    }
    m
}

fn items(events: &[RatingEvent]) -> BTreeSet<String> {
    events.iter().map(|e| e.item.clone()).collect()
}

pub fn average(events: &[RatingEvent]) -> Map {
    let mut sum: Map = BTreeMap::new();
    let mut count: BTreeMap<String, f64> = BTreeMap::new();
    for e in events {
        *sum.entry(e.item.clone()).or_default() += e.rating;
        *count.entry(e.item.clone()).or_default() += 1.0;
    }
    sum.into_iter().map(|(k, s)| (k.clone(), s / count[&k])).collect()
}

/// Σ_i R_i r_iα / Σ_i R_i, keeping `previous` where the denominator is 0.
fn weighted(events: &[RatingEvent], rep: &Map, previous: Option<&Map>) -> Map {
    let mut out = Map::new();
    for item in items(events) {
        let (mut num, mut den) = (0.0, 0.0);
        for e in events.iter().filter(|e| e.item == item) {
            num += rep[&e.user] * e.rating;
            den += rep[&e.user];
        }
        let q = if den > 0.0 {
            num / den
        } else {
            previous.map_or(f64::NAN, |p| p[&item])
        };
        out.insert(item, q);
    }
    out
}

fn max_change(a: &Map, b: &Map) -> f64 {
    a.iter().map(|(k, v)| (v - b[k]).abs()).fold(0.0, f64::max)
}

pub fn iterative_refinement(events: &[RatingEvent], eps: f64, threshold: f64, max_iter: usize) -> Naive {
    let users = by_user(events);
    let mut rep: Map = users.keys().map(|u| (u.clone(), 1.0)).collect();
    let mut q = weighted(events, &rep, None);
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        it += 1;
        for (u, rated) in &users {
            let d: f64 = rated.iter().map(|(i, r)| (r - q[i]) * (r - q[i])).sum::<f64>() / rated.len() as f64;
            rep.insert(u.clone(), 1.0 / (d + eps));
        }
        let next = weighted(events, &rep, Some(&q));
        let delta = max_change(&next, &q);
        q = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    Naive {
        quality: q,
        reputation: rep,
        iterations: it,
        converged,
    }
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / n).sqrt();
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    let z: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) / sx * ((y - my) / sy)).sum();
    Some(z / n)
}

/// Correlation ranking; with `phi`, IARR. `None` when IARR degenerates.
pub fn correlation(events: &[RatingEvent], phi: Option<f64>, threshold: f64, max_iter: usize) -> Option<Naive> {
    let users = by_user(events);
    let n_items = items(events).len() as f64;
    let mut rep: Map = users.iter().map(|(u, r)| (u.clone(), r.len() as f64 / n_items)).collect();
    let mut q = weighted(events, &rep, None);
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        it += 1;
        let tr: Map = users
            .iter()
            .map(|(u, rated)| {
                let xs: Vec<f64> = rated.iter().map(|(_, r)| *r).collect();
                let ys: Vec<f64> = rated.iter().map(|(i, _)| q[i]).collect();
                (u.clone(), pearson(&xs, &ys).unwrap_or(0.0).max(0.0))
            })
            .collect();
        rep = match phi {
            None => tr,
            Some(phi) => {
                let total: f64 = tr.values().sum();
                let total_phi: f64 = tr.values().map(|t| t.powf(phi)).sum();
                if total <= 0.0 {
                    return None;
                }
                tr.iter().map(|(u, t)| (u.clone(), t.powf(phi) * total / total_phi)).collect()
            }
        };
        let next = weighted(events, &rep, Some(&q));
        let delta = max_change(&next, &q);
        q = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    Some(Naive {
        quality: q,
        reputation: rep,
        iterations: it,
        converged,
    })
}

struct Dense {
    users: Vec<String>,
    items: Vec<String>,
    /// S = D_u^{-1/2} W D_v^{-1/2}, users × items.
    s: Vec<Vec<f64>>,
    u0: Vec<f64>,
    v0: Vec<f64>,
}

fn dense(events: &[RatingEvent]) -> Dense {
    let users: Vec<String> = by_user(events).into_keys().collect();
    let items: Vec<String> = items(events).into_iter().collect();
    let mut w = vec![vec![0.0; items.len()]; users.len()];
    for e in events {
        let u = users.binary_search(&e.user).unwrap();
        let i = items.binary_search(&e.item).unwrap();
        w[u][i] += e.rating;
    }
    let du: Vec<f64> = w.iter().map(|row| row.iter().sum()).collect();
    let dv: Vec<f64> = (0..items.len()).map(|i| w.iter().map(|row| row[i]).sum()).collect();
    let s = w
        .iter()
        .enumerate()
        .map(|(u, row)| row.iter().enumerate().map(|(i, x)| x / (du[u] * dv[i]).sqrt()).collect())
        .collect();
    let su: f64 = du.iter().sum();
    let sv: f64 = dv.iter().sum();
    Dense {
        users,
        items,
        s,
        u0: du.iter().map(|d| d / su).collect(),
        v0: dv.iter().map(|d| d / sv).collect(),
    }
}

pub fn birank(events: &[RatingEvent], alpha: f64, beta: f64, threshold: f64, max_iter: usize) -> Naive {
    let d = dense(events);
    let (mut u, mut v) = (d.u0.clone(), d.v0.clone());
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        it += 1;
        let v_new: Vec<f64> = (0..d.items.len())
            .map(|i| alpha * (0..d.users.len()).map(|x| d.s[x][i] * u[x]).sum::<f64>() + (1.0 - alpha) * d.v0[i])
            .collect();
        let u_new: Vec<f64> = (0..d.users.len())
            .map(|x| beta * (0..d.items.len()).map(|i| d.s[x][i] * v_new[i]).sum::<f64>() + (1.0 - beta) * d.u0[x])
            .collect();
        let delta = v_new
            .iter()
            .zip(&v)
            .chain(u_new.iter().zip(&u))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        u = u_new;
        v = v_new;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    Naive {
        quality: d.items.into_iter().zip(v).collect(),
        reputation: d.users.into_iter().zip(u).collect(),
        iterations: it,
        converged,
    }
}

/// Exact fixed point of the coupled BiRank system by Gaussian elimination.
pub fn birank_solve(events: &[RatingEvent], alpha: f64, beta: f64) -> (Map, Map) {
    let d = dense(events);
    let (nu, ni) = (d.users.len(), d.items.len());
    let n = nu + ni;
    // Unknowns [u; v]: u − βSv = (1−β)u⁰ and v − αSᵀu = (1−α)v⁰.
    let mut a = vec![vec![0.0; n + 1]; n];
    for x in 0..nu {
        a[x][x] = 1.0;
        for i in 0..ni {
            a[x][nu + i] = -beta * d.s[x][i];
        }
        a[x][n] = (1.0 - beta) * d.u0[x];
    }
    for i in 0..ni {
        a[nu + i][nu + i] = 1.0;
        for x in 0..nu {
            a[nu + i][x] = -alpha * d.s[x][i];
        }
        a[nu + i][n] = (1.0 - alpha) * d.v0[i];
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let x: Vec<f64> = (0..n).map(|r| a[r][n] / a[r][r]).collect();
    (
        d.items.into_iter().zip(x[nu..].iter().copied()).collect(),
        d.users.into_iter().zip(x[..nu].iter().copied()).collect(),
    )
}

/// Year weights W_i(t), W̃_α(t) straight from degree counts.
pub fn year_weights(events: &[RatingEvent], year: i32) -> (Map, Map) {
    let this: Vec<&RatingEvent> = events.iter().filter(|e| e.year == year).collect();
    let n = this.len() as f64;
    let mut wu = Map::new();
    let mut wi = Map::new();
    for e in this {
        *wu.entry(e.user.clone()).or_default() += 1.0 / n;
        *wi.entry(e.item.clone()).or_default() += 1.0 / n;
    }
    (wu, wi)
}

fn population_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt()
}

/// ATR initial reputation and quality.
pub fn atr_initial(events: &[RatingEvent]) -> (Map, Map) {
    let years: BTreeSet<i32> = events.iter().map(|e| e.year).collect();
    let mut num = Map::new();
    let mut deg = Map::new();
    for &t in &years {
        let (wu, _) = year_weights(events, t);
        for e in events.iter().filter(|e| e.year == t) {
            *num.entry(e.user.clone()).or_default() += e.rating * wu[&e.user];
            *deg.entry(e.user.clone()).or_default() += 1.0;
        }
    }
    let rep: Map = num.iter().map(|(u, x)| (u.clone(), x / deg[u])).collect();
    let mut qn = Map::new();
    let mut qd = Map::new();
    for &t in &years {
        let (_, wi) = year_weights(events, t);
        for e in events.iter().filter(|e| e.year == t) {
            let w = rep[&e.user] * wi[&e.item];
            *qn.entry(e.item.clone()).or_default() += e.rating * w;
            *qd.entry(e.item.clone()).or_default() += w;
        }
    }
    let avg = average(events);
    let q = qn
        .iter()
        .map(|(i, n)| (i.clone(), if qd[i] > 0.0 { n / qd[i] } else { avg[i] }))
        .collect();
    (rep, q)
}

/// Per-graph constants of ATR: rater means and deviations, item deviations
/// and each item's year weights summed over all years.
pub struct AtrStatics {
    pub r_bar: Map,
    pub sigma: Map,
    pub sigma_item: Map,
    pub w_total: Map,
}

pub fn atr_statics(events: &[RatingEvent], eps: f64) -> AtrStatics {
    let mut r_bar = Map::new();
    let mut sigma = Map::new();
    for (u, rated) in by_user(events) {
        let xs: Vec<f64> = rated.iter().map(|x| x.1).collect();
        r_bar.insert(u.clone(), xs.iter().sum::<f64>() / xs.len() as f64);
        sigma.insert(u, population_std(&xs).max(eps));
    }
    let sigma_item = items(events)
        .into_iter()
        .map(|i| {
            let xs: Vec<f64> = events.iter().filter(|e| e.item == i).map(|e| e.rating).collect();
            (i, population_std(&xs).max(eps))
        })
        .collect();
    let years: BTreeSet<i32> = events.iter().map(|e| e.year).collect();
    let mut w_total = Map::new();
    for t in years {
        for (i, w) in year_weights(events, t).1 {
            *w_total.entry(i).or_default() += w;
        }
    }
    AtrStatics {
        r_bar,
        sigma,
        sigma_item,
        w_total,
    }
}

/// One raw update of year `year` from `(rep, q)`: new reputations of the
/// year's users and unrescaled qualities of its items.
pub fn atr_epoch(events: &[RatingEvent], st: &AtrStatics, year: i32, rep: &Map, q: &Map, eps: f64) -> (Map, Map) {
    let this: Vec<&RatingEvent> = events.iter().filter(|e| e.year == year).collect();
    let n = this.len() as f64;
    let mut k_user = Map::new();
    let mut k_item = Map::new();
    for e in &this {
        *k_user.entry(e.user.clone()).or_default() += 1.0;
        *k_item.entry(e.item.clone()).or_default() += 1.0;
    }
    let l = k_user.values().fold(0.0f64, |a, &b| a.max(b)).ln().max(eps);
    let mut new_rep = Map::new();
    for (u, &k) in &k_user {
        let mine: Vec<&&RatingEvent> = this.iter().filter(|e| &e.user == u).collect();
        let activity = mine
            .iter()
            .map(|e| k_item[&e.item] / (q[&e.item].max(eps) * e.rating.max(eps).sqrt()))
            .sum::<f64>()
            / k.sqrt();
        let q_mean = mine.iter().map(|e| q[&e.item]).sum::<f64>() / k;
        let p: f64 = mine
            .iter()
            .map(|e| {
                let a = (k / n) * (e.rating - st.r_bar[u]) / st.sigma[u];
                let b = (k_item[&e.item] / n) * (q[&e.item] - q_mean) / (st.sigma_item[&e.item] / k).sqrt();
                a * b
            })
            .sum();
        let c = p / (activity * l);
        new_rep.insert(u.clone(), if c > 0.0 { c.sqrt() } else { 0.0 });
    }
    let mut new_q = Map::new();
    for (i, &kt) in &k_item {
        let raters: Vec<&&RatingEvent> = this.iter().filter(|e| &e.item == i).collect();
        let accu: f64 = raters
            .iter()
            .map(|e| rep[&e.user] * q[i] / kt * (1.0 - 1.0 / k_user[&e.user].sqrt()))
            .sum();
        let s: f64 = raters.iter().map(|e| (kt / n) * e.rating).sum();
        new_q.insert(i.clone(), s / st.w_total[i].max(eps) * accu * kt);
    }
    (new_rep, new_q)
}

/// ATR with the crate's default reconstruction: rater-mean centring,
/// self-consistent reputation, clamping and mean-preserving rescale.
pub fn atr(events: &[RatingEvent], threshold: f64, max_inner: usize, eps: f64) -> Naive {
    let years: BTreeSet<i32> = events.iter().map(|e| e.year).collect();
    let st = atr_statics(events, eps);
    let (mut rep, mut q) = atr_initial(events);
    let mut total_iterations = 0;
    let mut all_converged = true;
    for &t in &years {
        let mut converged = false;
        let mut it = 0;
        while it < max_inner {
            it += 1;
            let (new_rep, new_q) = atr_epoch(events, &st, t, &rep, &q, eps);
            let before: Map = new_q.keys().map(|i| (i.clone(), q[i])).collect();
            let m_old = before.values().sum::<f64>() / before.len() as f64;
            let m_new = new_q.values().sum::<f64>() / new_q.len() as f64;
            rep.extend(new_rep);
            if m_new > 0.0 && m_new.is_finite() {
                for (i, x) in new_q {
                    q.insert(i, x * m_old / m_new);
                }
            }
            let delta = before.iter().map(|(i, b)| (q[i] - b).abs()).fold(0.0, f64::max);
            if delta < threshold {
                converged = true;
                break;
            }
        }
        total_iterations += it;
        all_converged &= converged;
    }
    Naive {
        quality: q,
        reputation: rep,
        iterations: total_iterations,
        converged: all_converged,
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(x: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
        let mut r = vec![0.0; x.len()];
        let mut s = 0;
        while s < idx.len() {
            let mut e = s + 1;
            while e < idx.len() && x[idx[e]] == x[idx[s]] {
                e += 1;
            }
            for &i in &idx[s..e] {
                r[i] = (s + e + 1) as f64 / 2.0;
            }
            s = e;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Fraction of positive–negative pairs ordered correctly, ties one half.
pub fn brute_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut hits, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate().filter(|(i, _)| positive[*i]) {
        let _ = i;
        for (_, &sj) in scores.iter().enumerate().filter(|(j, _)| !positive[*j]) {
            pairs += 1.0;
            hits += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    hits / pairs
}

pub fn oracle_max_diff(lib_ids: &[String], lib: &[f64], oracle: &Map) -> f64 {
    lib_ids
        .iter()
        .zip(lib)
        .map(|(id, x)| {
            let o = oracle[id];
            if x.is_nan() && o.is_nan() {
                0.0
            } else {
                // Absolute below magnitude 1, relative above: IR reputations reach 1/ε.
                (x - o).abs() / o.abs().max(1.0)
            }
        })
        .fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

pub fn to_map(ids: &[String], values: &[f64]) -> Map {
    ids.iter().cloned().zip(values.iter().copied()).collect()
}

/// Largest violation of v = αSᵀu + (1−α)v⁰ and u = βSv + (1−β)u⁰.
pub fn birank_residual(events: &[RatingEvent], alpha: f64, beta: f64, quality: &Map, reputation: &Map) -> f64 {
    let d = dense(events);
    let u: Vec<f64> = d.users.iter().map(|x| reputation[x]).collect();
    let v: Vec<f64> = d.items.iter().map(|x| quality[x]).collect();
    let mut worst = 0.0f64;
    for i in 0..d.items.len() {
        let rhs = alpha * (0..d.users.len()).map(|x| d.s[x][i] * u[x]).sum::<f64>() + (1.0 - alpha) * d.v0[i];
        worst = worst.max((v[i] - rhs).abs());
    }
    for x in 0..d.users.len() {
        let rhs = beta * (0..d.items.len()).map(|i| d.s[x][i] * v[i]).sum::<f64>() + (1.0 - beta) * d.u0[x];
        worst = worst.max((u[x] - rhs).abs());
    }
    worst
}
