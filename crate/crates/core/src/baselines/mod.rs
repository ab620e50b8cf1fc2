//! Ranking baselines: PageRank (plain and trust-weighted), the linear trust
//! score, and a three-state Markov random field solved by loopy belief
//! propagation.

pub mod mrf;
pub mod pagerank;
pub mod trust;

pub use mrf::{lbp_marginals, LbpResult, MrfConfig, PROPAGATION};
pub use pagerank::{pagerank, PageRankConfig, PageRankResult, PageRankVariant};
pub use trust::{fit_trust, read_trust_labels, TrustModel};
