use std::collections::{BTreeMap, HashMap};
use std::ops::{Deref, Range};
use std::sync::Arc;

use serde::Serialize;

use super::{RatingEvent, RatingScale};
use crate::{Error, Result};

/// One rating link between dense user and item indexes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
}

/// What to do when a `(user, item, year)` triple occurs more than once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DuplicatePolicy {
    #[default]
    Reject,
    KeepLast,
}

/// Dual-indexed sparse adjacency: edges grouped by user, plus an item-major
/// permutation. Users and items are stored in ascending index order.
#[derive(Debug, Clone)]
pub struct Adjacency {
    edges: Vec<Edge>,
    edge_user_pos: Vec<usize>,
    edge_item_pos: Vec<usize>,
    users: Vec<usize>,
    user_offsets: Vec<usize>,
    items: Vec<usize>,
    item_offsets: Vec<usize>,
    by_item: Vec<usize>,
}

impl Adjacency {
    fn build(mut edges: Vec<Edge>, n_users: usize, n_items: usize) -> Self {
        // stable: parallel edges (same pair, several years) keep chronological order
        edges.sort_by(|a, b| (a.user, a.item).cmp(&(b.user, b.item)));

        let mut users = Vec::new();
        let mut user_offsets = vec![0];
        let mut user_slot = vec![usize::MAX; n_users];
        for (e, edge) in edges.iter().enumerate() {
            if users.last() != Some(&edge.user) {
                if !users.is_empty() {
                    user_offsets.push(e);
                }
                user_slot[edge.user] = users.len();
                users.push(edge.user);
            }
        }
        user_offsets.push(edges.len());
        if users.is_empty() {
            user_offsets.truncate(1);
        }

        let mut by_item: Vec<usize> = (0..edges.len()).collect();
        by_item.sort_by_key(|&e| (edges[e].item, edges[e].user));
        let mut items = Vec::new();
        let mut item_offsets = vec![0];
        let mut item_slot = vec![usize::MAX; n_items];
        for (k, &e) in by_item.iter().enumerate() {
            let item = edges[e].item;
            if items.last() != Some(&item) {
                if !items.is_empty() {
                    item_offsets.push(k);
                }
                item_slot[item] = items.len();
                items.push(item);
            }
        }
        item_offsets.push(by_item.len());
        if items.is_empty() {
            item_offsets.truncate(1);
        }

        let edge_user_pos = edges.iter().map(|e| user_slot[e.user]).collect();
        let edge_item_pos = edges.iter().map(|e| item_slot[e.item]).collect();
        Self {
            edges,
            edge_user_pos,
            edge_item_pos,
            users,
            user_offsets,
            items,
            item_offsets,
            by_item,
        }
    }

    /// Number of rating links.
    pub fn n_ratings(&self) -> usize {
        self.edges.len()
    }

    /// All edges, grouped by user in ascending user order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Active users, ascending.
    pub fn users(&self) -> &[usize] {
        &self.users
    }

    /// Active items, ascending.
    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn user_degree_at(&self, pos: usize) -> usize {
        self.user_offsets[pos + 1] - self.user_offsets[pos]
    }

    pub fn item_degree_at(&self, pos: usize) -> usize {
        self.item_offsets[pos + 1] - self.item_offsets[pos]
    }

    /// Range into [`edges`](Self::edges) holding the links of the user at `pos`.
    pub fn user_edge_range(&self, pos: usize) -> Range<usize> {
        self.user_offsets[pos]..self.user_offsets[pos + 1]
    }

    pub fn user_edges(&self, pos: usize) -> &[Edge] {
        &self.edges[self.user_edge_range(pos)]
    }

    /// Edge indexes of the item at `pos`, ordered by user.
    pub fn item_edge_ids(&self, pos: usize) -> &[usize] {
        &self.by_item[self.item_offsets[pos]..self.item_offsets[pos + 1]]
    }

    /// Position of edge `e`'s user within [`users`](Self::users).
    pub fn edge_user_pos(&self, e: usize) -> usize {
        self.edge_user_pos[e]
    }

    /// Position of edge `e`'s item within [`items`](Self::items).
    pub fn edge_item_pos(&self, e: usize) -> usize {
        self.edge_item_pos[e]
    }

    pub fn user_position(&self, user: usize) -> Option<usize> {
        self.users.binary_search(&user).ok()
    }

    pub fn item_position(&self, item: usize) -> Option<usize> {
        self.items.binary_search(&item).ok()
    }

    /// Degree of `user` here; zero when inactive.
    pub fn user_degree(&self, user: usize) -> usize {
        self.user_position(user).map_or(0, |p| self.user_degree_at(p))
    }

    pub fn item_degree(&self, item: usize) -> usize {
        self.item_position(item).map_or(0, |p| self.item_degree_at(p))
    }

    /// `(user, degree)` pairs in ascending user order.
    pub fn user_degrees(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.users.len()).map(|p| (self.users[p], self.user_degree_at(p)))
    }

    pub fn item_degrees(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.items.len()).map(|p| (self.items[p], self.item_degree_at(p)))
    }

    pub fn max_user_degree(&self) -> usize {
        (0..self.users.len())
            .map(|p| self.user_degree_at(p))
            .max()
            .unwrap_or(0)
    }
}

/// The sub-network of one calendar year: 𝒰(t), 𝒪(t), k_i(t), k̃_α(t), N(t).
#[derive(Debug, Clone)]
pub struct YearSlice {
    year: i32,
    adjacency: Adjacency,
}

impl YearSlice {
    pub fn year(&self) -> i32 {
        self.year
    }
}

impl Deref for YearSlice {
    type Target = Adjacency;

    fn deref(&self) -> &Adjacency {
        &self.adjacency
    }
}

/// Count, mean and population standard deviation of a set of ratings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RatingStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl RatingStats {
    fn from_sums(count: usize, sum: f64, sum_sq_dev: f64) -> Self {
        if count == 0 {
            return Self::default();
        }
        let n = count as f64;
        Self {
            count,
            mean: sum / n,
            std: (sum_sq_dev / n).sqrt(),
        }
    }
}

/// Immutable user–item rating network indexed by year.
#[derive(Debug, Clone)]
pub struct TemporalBipartiteGraph {
    user_ids: Arc<Vec<String>>,
    item_ids: Arc<Vec<String>>,
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    scale: RatingScale,
    slices: Vec<YearSlice>,
    pooled: Adjacency,
    user_stats: Vec<RatingStats>,
    item_stats: Vec<RatingStats>,
}

/// Builds a graph, rejecting duplicate `(user, item, year)` triples.
pub fn build_graph(events: Vec<RatingEvent>, scale: RatingScale) -> Result<TemporalBipartiteGraph> {
    build_graph_with(events, scale, DuplicatePolicy::Reject)
}

pub fn build_graph_with(
    events: Vec<RatingEvent>,
    scale: RatingScale,
    duplicates: DuplicatePolicy,
) -> Result<TemporalBipartiteGraph> {
    if events.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let mut user_index = HashMap::new();
    let mut item_index = HashMap::new();
    let mut seen: HashMap<(usize, usize, i32), usize> = HashMap::with_capacity(events.len());
    let mut kept: Vec<(i32, Edge)> = Vec::with_capacity(events.len());

    for ev in events {
        if !scale.contains(ev.rating) {
            return Err(Error::EventOutOfRange {
                user: ev.user,
                item: ev.item,
                year: ev.year,
                rating: ev.rating,
                min: scale.min,
                max: scale.max,
            });
        }
        let user = intern(&mut user_index, &mut user_ids, ev.user);
        let item = intern(&mut item_index, &mut item_ids, ev.item);
        let edge = Edge {
            user,
            item,
            rating: ev.rating,
        };
        match seen.get(&(user, item, ev.year)) {
            None => {
                seen.insert((user, item, ev.year), kept.len());
                kept.push((ev.year, edge));
            }
            Some(&slot) => match duplicates {
                DuplicatePolicy::Reject => {
                    return Err(Error::DuplicateEvent {
                        user: user_ids[user].clone(),
                        item: item_ids[item].clone(),
                        year: ev.year,
                    })
                }
                DuplicatePolicy::KeepLast => kept[slot].1.rating = ev.rating,
            },
        }
    }

    let n_users = user_ids.len();
    let n_items = item_ids.len();
    let mut by_year: BTreeMap<i32, Vec<Edge>> = BTreeMap::new();
    for &(year, edge) in &kept {
        by_year.entry(year).or_default().push(edge);
    }
    let slices = by_year
        .into_iter()
        .map(|(year, edges)| YearSlice {
            year,
            adjacency: Adjacency::build(edges, n_users, n_items),
        })
        .collect();
    let pooled = Adjacency::build(kept.into_iter().map(|(_, e)| e).collect(), n_users, n_items);

    let (user_stats, item_stats) = rating_stats(&pooled, n_users, n_items);

    Ok(TemporalBipartiteGraph {
        user_ids: Arc::new(user_ids),
        item_ids: Arc::new(item_ids),
        user_index,
        item_index,
        scale,
        slices,
        pooled,
        user_stats,
        item_stats,
    })
}

fn intern(index: &mut HashMap<String, usize>, ids: &mut Vec<String>, id: String) -> usize {
    if let Some(&i) = index.get(&id) {
        return i;
    }
    let i = ids.len();
    ids.push(id.clone());
    index.insert(id, i);
    i
}

fn rating_stats(
    pooled: &Adjacency,
    n_users: usize,
    n_items: usize,
) -> (Vec<RatingStats>, Vec<RatingStats>) {
    let mut u_count = vec![0usize; n_users];
    let mut u_sum = vec![0.0; n_users];
    let mut i_count = vec![0usize; n_items];
    let mut i_sum = vec![0.0; n_items];
    for e in pooled.edges() {
        u_count[e.user] += 1;
        u_sum[e.user] += e.rating;
        i_count[e.item] += 1;
        i_sum[e.item] += e.rating;
    }
    // two-pass variance
    let u_mean: Vec<f64> = (0..n_users).map(|u| u_sum[u] / u_count[u].max(1) as f64).collect();
    let i_mean: Vec<f64> = (0..n_items).map(|i| i_sum[i] / i_count[i].max(1) as f64).collect();
    let mut u_dev = vec![0.0; n_users];
    let mut i_dev = vec![0.0; n_items];
    for e in pooled.edges() {
        u_dev[e.user] += (e.rating - u_mean[e.user]).powi(2);
        i_dev[e.item] += (e.rating - i_mean[e.item]).powi(2);
    }
    let users = (0..n_users)
        .map(|u| RatingStats::from_sums(u_count[u], u_sum[u], u_dev[u]))
        .collect();
    let items = (0..n_items)
        .map(|i| RatingStats::from_sums(i_count[i], i_sum[i], i_dev[i]))
        .collect();
    (users, items)
}

impl TemporalBipartiteGraph {
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    /// |R|, the number of rating events.
    pub fn n_events(&self) -> usize {
        self.pooled.n_ratings()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    /// Distinct years, ascending.
    pub fn years(&self) -> Vec<i32> {
        self.slices.iter().map(|s| s.year).collect()
    }

    pub fn first_year(&self) -> i32 {
        self.slices[0].year
    }

    pub fn last_year(&self) -> i32 {
        self.slices[self.slices.len() - 1].year
    }

    /// All year slices in chronological order.
    pub fn slices(&self) -> &[YearSlice] {
        &self.slices
    }

    pub fn year_slice(&self, year: i32) -> Result<&YearSlice> {
        self.slices
            .binary_search_by_key(&year, |s| s.year)
            .map(|i| &self.slices[i])
            .map_err(|_| Error::UnknownYear(year))
    }

    /// Every event with years pooled; parallel edges remain distinct links.
    pub fn pooled(&self) -> &Adjacency {
        &self.pooled
    }

    pub fn user_ids(&self) -> &Arc<Vec<String>> {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &Arc<Vec<String>> {
        &self.item_ids
    }

    pub fn user_id(&self, user: usize) -> &str {
        &self.user_ids[user]
    }

    pub fn item_id(&self, item: usize) -> &str {
        &self.item_ids[item]
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_index.get(id).copied()
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.item_index.get(id).copied()
    }

    /// r̄_i and σ_i over all of the user's ratings.
    pub fn user_stats(&self, user: usize) -> RatingStats {
        self.user_stats[user]
    }

    /// Mean and σ̃_α over all ratings the item received.
    pub fn item_stats(&self, item: usize) -> RatingStats {
        self.item_stats[item]
    }

    pub fn mean_user_degree(&self) -> f64 {
        self.n_events() as f64 / self.n_users() as f64
    }

    pub fn mean_item_degree(&self) -> f64 {
        self.n_events() as f64 / self.n_items() as f64
    }

    /// Events in (year, user, item) order with original identifiers.
    pub fn events(&self) -> impl Iterator<Item = RatingEvent> + '_ {
        self.slices.iter().flat_map(move |s| {
            s.edges().iter().map(move |e| RatingEvent {
                user: self.user_ids[e.user].clone(),
                item: self.item_ids[e.item].clone(),
                rating: e.rating,
                year: s.year,
            })
        })
    }

    /// Graph of the events dated `horizon` or earlier.
    pub fn restrict_to_years(&self, horizon: i32) -> Result<TemporalBipartiteGraph> {
        if horizon < self.first_year() {
            return Err(Error::EmptyGraph);
        }
        if horizon >= self.last_year() {
            return Ok(self.clone());
        }
        let events = self
            .slices
            .iter()
            .take_while(|s| s.year <= horizon)
            .flat_map(|s| {
                s.edges().iter().map(move |e| RatingEvent {
                    user: self.user_ids[e.user].clone(),
                    item: self.item_ids[e.item].clone(),
                    rating: e.rating,
                    year: s.year,
                })
            })
            .collect();
        build_graph(events, self.scale)
    }
}
