//! Three-state (spammer / mixed / non-spammer) pairwise MRF over the
//! undirected follower graph, solved with damped sum-product loopy belief
//! propagation.

use std::path::Path;

use serde::Serialize;

use crate::baselines::trust::TrustModel;
use crate::error::{Error, Result};
use crate::eval::ScoreTable;
use crate::graph::{write_file, SpamGraph, View};

pub const STATES: usize = 3;
pub type Dist = [f64; STATES];

/// Propagation table over (spammer, mixed, non-spammer). Column `j` is the
/// state of a node, row `i` the state of its neighbor; columns sum to one.
pub const PROPAGATION: [[f64; STATES]; STATES] = [
    [0.80, 0.40, 0.025],
    [0.15, 0.50, 0.125],
    [0.05, 0.10, 0.850],
];

/// `(ψ + ψᵀ) / 2`, the compatibility used on undirected edges.
pub fn symmetrized(psi: &[[f64; STATES]; STATES]) -> [[f64; STATES]; STATES] {
    std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (psi[i][j] + psi[j][i])))
}

/// Maps a trust score to a prior over (spammer, mixed, non-spammer):
/// `(1 - f, min(f, 1 - f), f)` renormalized.
pub fn trust_prior(trust: f64) -> Dist {
    let f = trust.clamp(0.0, 1.0);
    normalized([1.0 - f, f.min(1.0 - f), f])
}

fn normalized(mut d: Dist) -> Dist {
    let s: f64 = d.iter().sum();
    if s > 0.0 && s.is_finite() {
        d.iter_mut().for_each(|x| *x /= s);
        d
    } else {
        [1.0 / STATES as f64; STATES]
    }
}

#[inline]
fn mul(a: &Dist, b: &Dist) -> Dist {
    std::array::from_fn(|i| a[i] * b[i])
}

/// Rescales so the largest entry is 1; keeps long products away from underflow.
#[inline]
fn rescaled(d: Dist) -> Dist {
    let m = d.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        std::array::from_fn(|i| d[i] / m)
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MrfConfig {
    /// Pairwise compatibility ψ(s_i, s_j); must be symmetric.
    pub compatibility: [[f64; STATES]; STATES],
    /// Weight kept from the previous message on each update.
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MrfConfig {
    fn default() -> Self {
        MrfConfig {
            compatibility: symmetrized(&PROPAGATION),
            damping: 0.5,
            tolerance: 1e-10,
            max_iterations: 500,
        }
    }
}

impl MrfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("damping must lie in [0, 1), got {}", self.damping)));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config("tolerance must be positive, max iterations at least 1".into()));
        }
        let psi = &self.compatibility;
        for i in 0..STATES {
            for j in 0..STATES {
                if !(psi[i][j] >= 0.0 && psi[i][j].is_finite()) || psi[i][j] != psi[j][i] {
                    return Err(Error::Config(
                        "compatibility must be symmetric with non-negative finite entries".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbpResult {
    /// Per-node marginals over (spammer, mixed, non-spammer).
    pub beliefs: Vec<Dist>,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
}

impl LbpResult {
    /// Spamicity = P(spammer).
    pub fn scores(&self, graph: &SpamGraph) -> ScoreTable {
        ScoreTable::new(
            graph.ids().to_vec(),
            self.beliefs.iter().map(|b| b[0]).collect(),
        )
        .expect("one finite belief per node")
    }

    /// Writes `node pS pM pN`.
    pub fn write_beliefs(&self, graph: &SpamGraph, path: &Path) -> Result<()> {
        write_file(path, |w| {
            for (v, b) in self.beliefs.iter().enumerate() {
                writeln!(w, "{}\t{:.6}\t{:.6}\t{:.6}", graph.node_id(v), b[0], b[1], b[2])?;
            }
            Ok(())
        })
    }
}

/// Sum-product LBP with explicit node priors on the undirected view.
///
/// Messages are updated synchronously (every update reads the previous
/// sweep), damped, and normalized.
pub fn loopy_bp(graph: &SpamGraph, priors: &[Dist], config: &MrfConfig) -> Result<LbpResult> {
    config.validate()?;
    let n = graph.node_count();
    if priors.len() != n {
        return Err(Error::Validation(format!(
            "{} priors for {n} nodes",
            priors.len()
        )));
    }
    let adj = graph.adjacency(View::Undirected);
    let psi = &config.compatibility;
    // reverse[slot of u->v] = slot of v->u
    let reverse: Vec<usize> = (0..n)
        .flat_map(|u| adj.neighbors(u).iter().map(move |&v| (u, v)))
        .map(|(u, v)| adj.position(v, u).expect("undirected view is symmetric"))
        .collect();

    let uniform = [1.0 / STATES as f64; STATES];
    let mut messages = vec![uniform; adj.len()];
    let mut fresh = messages.clone();
    let mut prefix: Vec<Dist> = Vec::new();
    let mut iterations = 0;
    let mut change = 0.0;
    let mut converged = n == 0 || adj.is_empty();

    while !converged && iterations < config.max_iterations {
        iterations += 1;
        change = 0.0f64;
        for u in 0..n {
            let range = adj.range(u);
            let deg = range.len();
            // incoming[k] = message from the k-th neighbor into u
            let incoming = |k: usize| &messages[reverse[range.start + k]];
            prefix.clear();
            prefix.push(priors[u]);
            for k in 0..deg {
                let next = rescaled(mul(&prefix[k], incoming(k)));
                prefix.push(next);
            }
            let mut suffix = [1.0; STATES];
            for k in (0..deg).rev() {
                let others = mul(&prefix[k], &suffix);
                let out: Dist = std::array::from_fn(|j| {
                    (0..STATES).map(|i| others[i] * psi[i][j]).sum()
                });
                let computed = normalized(out);
                let old = &messages[range.start + k];
                let damped = normalized(std::array::from_fn(|j| {
                    (1.0 - config.damping) * computed[j] + config.damping * old[j]
                }));
                for j in 0..STATES {
                    change = change.max((damped[j] - old[j]).abs());
                }
                fresh[range.start + k] = damped;
                suffix = rescaled(mul(&suffix, incoming(k)));
            }
        }
        std::mem::swap(&mut messages, &mut fresh);
        converged = change < config.tolerance;
    }
    if !converged {
        log::warn!("loopy BP stopped after {iterations} sweeps (max change {change:.3e})");
    }

    let beliefs = (0..n)
        .map(|u| {
            let range = adj.range(u);
            let mut b = priors[u];
            for k in 0..range.len() {
                b = rescaled(mul(&b, &messages[reverse[range.start + k]]));
            }
            normalized(b)
        })
        .collect();
    Ok(LbpResult {
        beliefs,
        iterations,
        converged,
        last_change: change,
    })
}

/// Marginals with priors derived from the trust model.
pub fn lbp_marginals(graph: &SpamGraph, config: &MrfConfig, trust: &TrustModel) -> Result<LbpResult> {
    let priors: Vec<Dist> = trust.score_graph(graph).into_iter().map(trust_prior).collect();
    loopy_bp(graph, &priors, config)
}
