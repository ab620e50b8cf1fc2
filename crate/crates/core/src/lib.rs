//! Spam-dynamics biased random-walk node embeddings for spammer detection.
//!
//! The pipeline: load a follower graph with per-user behavior
//! ([`graph`]), score node pairs by behavioral similarity ([`dynamics`]),
//! sample biased walks ([`walk`]), learn skip-gram features ([`embed`]) and
//! evaluate them against PageRank and MRF baselines ([`baselines`],
//! [`eval`]). [`synth`] plants spammer cohorts in a synthetic network for
//! desk-scale experiments.

pub mod baselines;
pub mod dynamics;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod synth;
pub mod walk;

pub use error::{Error, Result};
