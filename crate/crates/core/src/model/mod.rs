//! Rating events, the temporal bipartite graph and its per-year slices.

mod graph;
pub(crate) mod io;
mod truth;

pub use graph::{
    build_graph, build_graph_with, Adjacency, DuplicatePolicy, Edge, RatingStats,
    TemporalBipartiteGraph, YearSlice,
};
pub use io::{
    citation_to_bipartite, epoch_seconds_to_year, parse_citations, parse_ratings,
    parse_ratings_with, write_ratings, CitationEdge, IngestOptions, SelfLoopPolicy, TimeUnit,
};
pub use truth::{parse_qualities, parse_target_set, read_ground_truth, write_qualities, GroundTruth};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// One `(user, item, rating, year)` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingEvent {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub year: i32,
}

impl RatingEvent {
    pub fn new(user: impl Into<String>, item: impl Into<String>, rating: f64, year: i32) -> Self {
        Self {
            user: user.into(),
            item: item.into(),
            rating,
            year,
        }
    }
}

/// Bounds of the rating values a dataset may contain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
    pub integral: bool,
}

impl RatingScale {
    /// Integer ratings from 1 to 5.
    pub const FIVE_STAR: RatingScale = RatingScale {
        min: 1.0,
        max: 5.0,
        integral: true,
    };

    pub fn new(min: f64, max: f64, integral: bool) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidScale(format!("need min < max, got [{min}, {max}]")));
        }
        if integral && (min.fract() != 0.0 || max.fract() != 0.0) {
            return Err(Error::InvalidScale(format!(
                "integral scale needs integer bounds, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max, integral })
    }

    pub fn contains(&self, rating: f64) -> bool {
        rating >= self.min && rating <= self.max && (!self.integral || rating.fract() == 0.0)
    }

    pub fn clamp(&self, rating: f64) -> f64 {
        rating.clamp(self.min, self.max)
    }

    /// Snaps a real value onto the scale: rounded when integral, then clamped.
    pub fn quantize(&self, value: f64) -> f64 {
        let v = if self.integral { value.round() } else { value };
        self.clamp(v)
    }
}

impl Default for RatingScale {
    fn default() -> Self {
        Self::FIVE_STAR
    }
}

impl fmt::Display for RatingScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.integral {
            write!(f, "{}:{}", self.min, self.max)
        } else {
            write!(f, "{}:{}:real", self.min, self.max)
        }
    }
}

/// Parses `min:max` (integral) or `min:max:real`.
impl FromStr for RatingScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidScale(format!("expected `min:max` or `min:max:real`, got `{s}`"));
        let (min, max, integral) = match parts.as_slice() {
            [min, max] => (min, max, true),
            [min, max, "real"] => (min, max, false),
            [min, max, "int"] => (min, max, true),
            _ => return Err(bad()),
        };
        let min: f64 = min.trim().parse().map_err(|_| bad())?;
        let max: f64 = max.trim().parse().map_err(|_| bad())?;
        RatingScale::new(min, max, integral)
    }
}
