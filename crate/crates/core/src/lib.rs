//! Reputation and quality ranking on temporal bipartite rating networks.
//!
//! The crate is organised around one data model and five layers on top of it:
//!
//! - [`model`]: rating events, the year-sliced bipartite graph, file ingestion.
//! - [`algorithms`]: average score, iterative refinement, correlation-based
//!   ranking, reputation redistribution, BiRank and accumulative time-based
//!   ranking, all behind [`algorithms::rank`].
//! - [`synth`]: artificial networks with known item qualities and random-rating
//!   spammer injection.
//! - [`metrics`]: AUC, precision/recall/F, matching number and robustness RMSE.
//! - [`harness`]: identification, year-sweep and robustness experiments with
//!   deterministic, file-based reports.
//! - [`cli`]: the `atrank` command line.
//!
//! ```
//! use atrank::algorithms::{rank, AlgorithmConfig};
//! use atrank::model::{build_graph, RatingEvent, RatingScale};
//!
//! let events = vec![
//!     RatingEvent::new("alice", "heat", 5.0, 1995),
//!     RatingEvent::new("bob", "heat", 4.0, 1996),
//!     RatingEvent::new("bob", "jaws", 2.0, 1996),
//! ];
//! let graph = build_graph(events, RatingScale::FIVE_STAR).unwrap();
//! let result = rank(&graph, &AlgorithmConfig::default_for("avg".parse().unwrap())).unwrap();
//! assert_eq!(result.quality_of("heat"), Some(4.5));
//! ```

pub mod algorithms;
pub mod cli;
mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
