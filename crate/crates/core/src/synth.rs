//! Artificial rating networks with known item qualities, and random-rating
//! spammer injection.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::model::{GroundTruth, RatingEvent, RatingScale, TemporalBipartiteGraph};
use crate::rng::{stream, Domain};
use crate::{Error, Result};

/// Shape and noise of an artificial network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthParams {
    pub n_users: usize,
    pub n_items: usize,
    /// Fraction β of the user × item grid that carries a rating.
    pub sparsity: f64,
    pub n_years: usize,
    pub first_year: i32,
    /// Standard deviation of the Gaussian rating noise.
    pub noise_sigma: f64,
    pub scale: RatingScale,
    pub seed: u64,
}

impl Default for SynthParams {
    /// 600 users, 400 items, β = 0.2, ten years, σ = 0.5.
    fn default() -> Self {
        Self {
            n_users: 600,
            n_items: 400,
            sparsity: 0.2,
            n_years: 10,
            first_year: 2000,
            noise_sigma: 0.5,
            scale: RatingScale::FIVE_STAR,
            seed: 0,
        }
    }
}

impl SynthParams {
    /// 6000 users, 4000 items and 480 000 links.
    pub fn full_size() -> Self {
        Self {
            n_users: 6000,
            n_items: 4000,
            sparsity: 0.02,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// ⌊n_users · n_items · β⌋.
    pub fn n_links(&self) -> Result<usize> {
        let grid = self.n_users as f64 * self.n_items as f64;
        let x = grid * self.sparsity;
        // 6000 · 4000 · 0.02 is 480000.00000000006 in binary floating point.
        let links = if (x - x.round()).abs() <= 1e-9 * x.max(1.0) {
            x.round()
        } else {
            x.floor()
        };
        if links < 1.0 {
            return Err(Error::DegenerateSize(format!(
                "{} x {} grid at sparsity {} has no links",
                self.n_users, self.n_items, self.sparsity
            )));
        }
        Ok(links as usize)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::InvalidParameter(format!("sparsity must lie in (0, 1], got {}", self.sparsity)));
        }
        if self.n_years == 0 {
            return Err(Error::InvalidParameter("n_years must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

pub fn user_id(n: usize) -> String {
    format!("u{n}")
}

pub fn item_id(n: usize) -> String {
    format!("i{n}")
}

/// Draws item qualities uniformly on the scale, links uniformly without
/// replacement, ratings as `quantize(q + noise)` and years uniformly.
///
/// Events come out ordered by user, then item.
pub fn generate_artificial(params: &SynthParams) -> Result<(Vec<RatingEvent>, GroundTruth)> {
    params.validate()?;
    let links = params.n_links()?;
    let scale = params.scale;
    let mut rng = stream(params.seed, Domain::Synthetic, 0, 0);

    let qualities: Vec<f64> = (0..params.n_items).map(|_| rng.gen_range(scale.min..=scale.max)).collect();
    let mut cells = index::sample(&mut rng, params.n_users * params.n_items, links).into_vec();
    cells.sort_unstable();
    let noise = Normal::new(0.0, params.noise_sigma).expect("sigma validated");

    let mut events = Vec::with_capacity(links);
    for cell in cells {
        let (user, item) = (cell / params.n_items, cell % params.n_items);
        let eps = if params.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        let year = params.first_year + rng.gen_range(0..params.n_years) as i32;
        events.push(RatingEvent::new(user_id(user), item_id(item), scale.quantize(qualities[item] + eps), year));
    }
    let truth: BTreeMap<String, f64> = qualities.into_iter().enumerate().map(|(a, q)| (item_id(a), q)).collect();
    Ok((events, GroundTruth::TrueQualities(truth)))
}

/// Items, years and scale that injected ratings are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphShape {
    pub items: Vec<String>,
    pub years: Vec<i32>,
    pub scale: RatingScale,
}

impl GraphShape {
    pub fn of(graph: &TemporalBipartiteGraph) -> Self {
        Self {
            items: graph.item_ids().to_vec(),
            years: graph.years(),
            scale: graph.scale(),
        }
    }
}

/// How many random raters to add.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpamInjection {
    pub n_spammers: usize,
    /// Items each spammer rates; `None` takes the mean user degree of the
    /// original events, rounded.
    pub ratings_per_spammer: Option<usize>,
    pub seed: u64,
}

/// Prefix of injected user identifiers.
pub const SPAMMER_PREFIX: &str = "spammer-";

/// Appends `n_spammers` users who rate distinct uniformly chosen items with
/// uniform ratings in uniformly chosen years. The input events come first,
/// unchanged.
pub fn inject_random_spammers(
    events: &[RatingEvent],
    shape: &GraphShape,
    spec: &SpamInjection,
) -> Result<Vec<RatingEvent>> {
    let mut out = events.to_vec();
    if spec.n_spammers == 0 {
        return Ok(out);
    }
    if shape.items.is_empty() || shape.years.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let per = match spec.ratings_per_spammer {
        Some(k) => k,
        None => {
            let users: HashSet<&str> = events.iter().map(|e| e.user.as_str()).collect();
            ((events.len() as f64 / users.len().max(1) as f64).round() as usize).max(1)
        }
    };
    if per == 0 || per > shape.items.len() {
        return Err(Error::InvalidParameter(format!(
            "ratings_per_spammer = {per} but the graph has {} items",
            shape.items.len()
        )));
    }
    if events.iter().any(|e| e.user.starts_with(SPAMMER_PREFIX)) {
        return Err(Error::InvalidParameter(format!(
            "input already contains users named `{SPAMMER_PREFIX}*`"
        )));
    }
    let scale = shape.scale;
    let mut rng = stream(spec.seed, Domain::Spammers, 0, 0);
    out.reserve(spec.n_spammers * per);
    for s in 0..spec.n_spammers {
        let user = format!("{SPAMMER_PREFIX}{s}");
        for item in index::sample(&mut rng, shape.items.len(), per) {
            let rating = if scale.integral {
                rng.gen_range(scale.min as i64..=scale.max as i64) as f64
            } else {
                rng.gen_range(scale.min..=scale.max)
            };
            let year = shape.years[rng.gen_range(0..shape.years.len())];
            out.push(RatingEvent::new(user.clone(), shape.items[item].clone(), rating, year));
        }
    }
    Ok(out)
}
