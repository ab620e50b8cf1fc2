//! Random-walk corpus generation.
//!
//! Three strategies share one sampler:
//! - `EnWalk`: second-order walk whose step from `v` to `x` (arriving from `t`)
//!   has mass `alpha(t, v, x) * w_vx`, where alpha mixes the pair dynamics of
//!   `(t, v)` and `(v, x)` with the bias weights `p, q, r, s`.
//! - `Uniform`: first-order, weight-proportional (DeepWalk-style).
//! - `ReturnInOut`: the return / in-out reweighting of node2vec.
//!
//! Every walk draws from its own ChaCha stream keyed by
//! `(seed, start, repetition)`, so the corpus is identical no matter how
//! walks are scheduled across threads.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Dynamics, EdgeDynamics, PairDynamics};
use crate::error::{Error, Result};
use crate::graph::{data_lines, write_file, Adjacency, SpamGraph, View};

/// Priorities of the four pair dynamics (common time, success rate,
/// fraudulence, mentions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasWeights {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl Default for BiasWeights {
    fn default() -> Self {
        BiasWeights {
            p: 0.25,
            q: 0.25,
            r: 0.25,
            s: 0.25,
        }
    }
}

impl BiasWeights {
    pub fn new(p: f64, q: f64, r: f64, s: f64) -> Result<Self> {
        let b = BiasWeights { p, q, r, s };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.q, self.r, self.s];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!(
                "bias weights must be finite and non-negative, got {all:?}"
            )));
        }
        if all.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("bias weights must not all be zero".into()));
        }
        Ok(())
    }

    #[inline]
    fn combine(&self, d: &PairDynamics) -> f64 {
        self.p * d.ct + self.q * d.sr + self.r * d.fr + self.s * d.me
    }
}

/// Transition score of stepping `v -> x` after arriving from `t`.
///
/// `prev` holds the dynamics of `(t, v)`; on the first step of a walk there is
/// no `t` and only the `(v, x)` half contributes.
pub fn alpha(prev: Option<&PairDynamics>, next: &PairDynamics, bias: &BiasWeights) -> f64 {
    bias.combine(next) + prev.map_or(0.0, |d| bias.combine(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    EnWalk(BiasWeights),
    Uniform,
    /// `ret` discourages returning to `t`, `inout` discourages moving away from `t`.
    ReturnInOut { ret: f64, inout: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::EnWalk(_) => "enwalk",
            Strategy::Uniform => "uniform",
            Strategy::ReturnInOut { .. } => "node2vec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub seed: u64,
    pub view: View,
    pub strategy: Strategy,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 80,
            seed: 0,
            view: View::Out,
            strategy: Strategy::EnWalk(BiasWeights::default()),
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node == 0 || self.walk_length == 0 {
            return Err(Error::Config(
                "walks per node and walk length must both be at least 1".into(),
            ));
        }
        match self.strategy {
            Strategy::EnWalk(b) => b.validate(),
            Strategy::Uniform => Ok(()),
            Strategy::ReturnInOut { ret, inout } => {
                if ret > 0.0 && inout > 0.0 && !ret.is_nan() && !inout.is_nan() {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "return and in-out parameters must be positive, got {ret} and {inout}"
                    )))
                }
            }
        }
    }
}

/// Ordered walks of node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    pub fn write(&self, graph: &SpamGraph, path: &Path) -> Result<()> {
        write_file(path, |w| {
            for walk in &self.walks {
                let mut first = true;
                for &v in walk {
                    if !first {
                        w.write_all(b" ")?;
                    }
                    w.write_all(graph.node_id(v).as_bytes())?;
                    first = false;
                }
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }

    pub fn read(graph: &SpamGraph, path: &Path) -> Result<Self> {
        let mut walks = Vec::new();
        for (line_no, line) in data_lines(path)? {
            let walk = line
                .split_whitespace()
                .map(|id| {
                    graph.node_index(id).map_err(|_| {
                        Error::parse(path, line_no, format!("unknown node id `{id}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            walks.push(walk);
        }
        Ok(WalkCorpus { walks })
    }
}

/// Where the walk came from: previous node and the adjacency slot of `t -> v`.
#[derive(Debug, Clone, Copy)]
struct Arrival {
    from: usize,
    slot: Option<usize>,
}

pub struct Walker<'a> {
    dynamics: &'a Dynamics<'a>,
    adj: &'a Adjacency,
    edge_dynamics: Option<EdgeDynamics>,
    config: WalkConfig,
}

impl<'a> Walker<'a> {
    pub fn new(dynamics: &'a Dynamics<'a>, config: WalkConfig) -> Result<Self> {
        config.validate()?;
        let edge_dynamics = match config.strategy {
            Strategy::EnWalk(_) => Some(dynamics.over_edges(config.view)),
            _ => None,
        };
        Ok(Walker {
            dynamics,
            adj: dynamics.graph().adjacency(config.view),
            edge_dynamics,
            config,
        })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    fn pair_at(&self, slot: Option<usize>, a: usize, b: usize) -> PairDynamics {
        match (slot, &self.edge_dynamics) {
            (Some(slot), Some(ed)) => *ed.at(slot),
            _ => self.dynamics.pair(a, b),
        }
    }

    /// Unnormalized step masses over the neighbors of `v`; falls back to raw
    /// edge weights when every biased mass is zero.
    fn step_masses(&self, arrival: Option<Arrival>, v: usize, out: &mut Vec<f64>) {
        out.clear();
        let range = self.adj.range(v);
        let neighbors = self.adj.neighbors(v);
        let weights = self.adj.weights(v);
        match self.config.strategy {
            Strategy::Uniform => out.extend_from_slice(weights),
            Strategy::EnWalk(bias) => {
                let prev = arrival.map(|a| self.pair_at(a.slot, a.from, v));
                for (i, (&x, &w)) in neighbors.iter().zip(weights).enumerate() {
                    let next = self.pair_at(Some(range.start + i), v, x);
                    out.push(alpha(prev.as_ref(), &next, &bias) * w);
                }
            }
            Strategy::ReturnInOut { ret, inout } => {
                for (&x, &w) in neighbors.iter().zip(weights) {
                    let factor = match arrival {
                        None => 1.0,
                        Some(a) if x == a.from => 1.0 / ret,
                        Some(a) if self.adj.contains(a.from, x) => 1.0,
                        Some(_) => 1.0 / inout,
                    };
                    out.push(factor * w);
                }
            }
        }
        let total: f64 = out.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            out.clear();
            out.extend_from_slice(weights);
        }
    }

    /// Normalized next-step distribution over the neighbors of `v` (in
    /// adjacency order) given the previous node `prev`. Empty when `v` is a
    /// dead end.
    pub fn transition_distribution(&self, prev: Option<usize>, v: usize) -> Vec<f64> {
        let arrival = prev.map(|t| Arrival {
            from: t,
            slot: self.adj.position(t, v),
        });
        let mut masses = Vec::new();
        self.step_masses(arrival, v, &mut masses);
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= total);
        masses
    }

    fn stream(&self, start: u64, repetition: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.config.seed.to_le_bytes());
        key[8..16].copy_from_slice(&start.to_le_bytes());
        key[16..24].copy_from_slice(&repetition.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// One walk of at most `walk_length + 1` nodes, cut short at dead ends.
    pub fn sample_walk(&self, start: usize, repetition: usize) -> Vec<usize> {
        let mut rng = self.stream(start as u64, repetition as u64);
        let mut walk = Vec::with_capacity(self.config.walk_length + 1);
        walk.push(start);
        let mut masses = Vec::new();
        let mut arrival = None;
        let mut v = start;
        for _ in 0..self.config.walk_length {
            if self.adj.degree(v) == 0 {
                break;
            }
            self.step_masses(arrival, v, &mut masses);
            let i = sample_index(&masses, &mut rng);
            let slot = self.adj.range(v).start + i;
            let x = self.adj.target_at(slot);
            arrival = Some(Arrival {
                from: v,
                slot: Some(slot),
            });
            walk.push(x);
            v = x;
        }
        walk
    }

    /// `walks_per_node` rounds; each round walks from every node in a
    /// seeded shuffled order.
    pub fn generate_corpus(&self) -> WalkCorpus {
        let n = self.dynamics.graph().node_count();
        let mut walks = Vec::with_capacity(n * self.config.walks_per_node);
        for rep in 0..self.config.walks_per_node {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut self.stream(u64::MAX, rep as u64));
            let round: Vec<Vec<usize>> = order
                .par_iter()
                .map(|&start| self.sample_walk(start, rep))
                .collect();
            walks.extend(round);
        }
        WalkCorpus { walks }
    }
}

/// Cumulative-sum inversion over non-negative masses with a positive total.
pub fn sample_index<R: Rng + ?Sized>(masses: &[f64], rng: &mut R) -> usize {
    let total: f64 = masses.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &m) in masses.iter().enumerate() {
        acc += m;
        if u < acc {
            return i;
        }
    }
    // rounding left u at the very top: take the last positive entry
    masses.iter().rposition(|&m| m > 0.0).unwrap_or(masses.len() - 1)
}

/// Convenience wrapper: dynamics, walker and corpus in one call.
pub fn generate_corpus(graph: &SpamGraph, config: WalkConfig) -> Result<WalkCorpus> {
    let dynamics = Dynamics::new(graph);
    let walker = Walker::new(&dynamics, config)?;
    Ok(walker.generate_corpus())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, UserRecord};

    fn ones() -> PairDynamics {
        PairDynamics {
            ct: 1.0,
            sr: 1.0,
            fr: 1.0,
            me: 1.0,
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> SpamGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_user(&format!("n{i}"), UserRecord::default()).unwrap();
        }
        for &(s, d) in edges {
            b.add_edge(&format!("n{s}"), &format!("n{d}"), 1.0).unwrap();
        }
        b.build()
    }

    fn config(strategy: Strategy, view: View, length: usize) -> WalkConfig {
        WalkConfig {
            walks_per_node: 2,
            walk_length: length,
            seed: 11,
            view,
            strategy,
        }
    }

    #[test]
    fn alpha_examples() {
        let quarter = BiasWeights::default();
        assert_eq!(alpha(Some(&ones()), &ones(), &quarter), 2.0);
        assert_eq!(alpha(None, &ones(), &quarter), 1.0);
        let only_p = BiasWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let tv = PairDynamics {
            ct: 0.5,
            ..ones()
        };
        let vx = PairDynamics {
            ct: 0.25,
            ..ones()
        };
        assert_eq!(alpha(Some(&tv), &vx, &only_p), 0.75);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(BiasWeights::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(BiasWeights::new(-1.0, 1.0, 0.0, 0.0).is_err());
        let g = graph(2, &[(0, 1)]);
        let d = Dynamics::new(&g);
        let bad = config(Strategy::ReturnInOut { ret: 0.0, inout: 1.0 }, View::Out, 3);
        assert!(Walker::new(&d, bad).is_err());
        let zero_len = config(Strategy::Uniform, View::Out, 0);
        assert!(Walker::new(&d, zero_len).is_err());
    }

    #[test]
    fn equal_masses_normalize_uniformly() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::EnWalk(BiasWeights::default()), View::Out, 3)).unwrap();
        let dist = w.transition_distribution(None, 0);
        for p in dist {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_alpha_falls_back_to_weights() {
        let mut b = GraphBuilder::new();
        for i in 0..3 {
            b.add_user(&format!("n{i}"), UserRecord::default()).unwrap();
        }
        b.add_edge("n0", "n1", 3.0).unwrap();
        b.add_edge("n0", "n2", 1.0).unwrap();
        let g = b.build();
        let d = Dynamics::new(&g);
        // only the mention term is weighted, and no node mentions anything
        let bias = BiasWeights::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let w = Walker::new(&d, config(Strategy::EnWalk(bias), View::Out, 3)).unwrap();
        assert_eq!(w.transition_distribution(None, 0), vec![0.75, 0.25]);
    }

    #[test]
    fn forced_cycle() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::EnWalk(BiasWeights::default()), View::Out, 4)).unwrap();
        assert_eq!(w.sample_walk(0, 0), vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn dead_end_truncates() {
        let g = graph(2, &[(0, 1)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::Uniform, View::Out, 10)).unwrap();
        assert_eq!(w.sample_walk(1, 0), vec![1]);
        assert_eq!(w.sample_walk(0, 0), vec![0, 1]);
        assert!(w.transition_distribution(None, 1).is_empty());
    }

    #[test]
    fn corpus_counts_and_determinism() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::Uniform, View::Out, 5)).unwrap();
        let a = w.generate_corpus();
        assert_eq!(a.len(), 6);
        assert_eq!(a, w.generate_corpus());
        for rep in 0..2 {
            let mut starts: Vec<usize> = a.walks[rep * 3..rep * 3 + 3].iter().map(|w| w[0]).collect();
            starts.sort();
            assert_eq!(starts, vec![0, 1, 2]);
        }
    }

    #[test]
    fn return_inout_degenerates_to_uniform() {
        let g = graph(5, &[(0, 1), (1, 0), (1, 2), (1, 3), (0, 2), (3, 4), (2, 4)]);
        let d = Dynamics::new(&g);
        let uni = Walker::new(&d, config(Strategy::Uniform, View::Undirected, 3)).unwrap();
        let n2v = Walker::new(&d, config(Strategy::ReturnInOut { ret: 1.0, inout: 1.0 }, View::Undirected, 3)).unwrap();
        for v in 0..5 {
            for &t in g.adjacency(View::Undirected).neighbors(v) {
                assert_eq!(uni.transition_distribution(Some(t), v), n2v.transition_distribution(Some(t), v));
            }
        }
    }

    #[test]
    fn huge_return_parameter_suppresses_backtracking() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::ReturnInOut { ret: 1e12, inout: 1.0 }, View::Undirected, 3)).unwrap();
        // at node 1 having come from 0: neighbors [0, 2]
        let dist = w.transition_distribution(Some(0), 1);
        assert!(dist[0] < 1e-11);
        assert!((dist[1] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn return_inout_hand_computed() {
        // undirected: 0-1, 1-2, 1-3, 1-4, 0-2; walk at 1 having come from 0
        let g = graph(5, &[(0, 1), (1, 2), (1, 3), (1, 4), (0, 2)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::ReturnInOut { ret: 0.5, inout: 2.0 }, View::Undirected, 3)).unwrap();
        // neighbors of 1: [0, 2, 3, 4] -> factors 1/0.5, 1 (2 touches 0), 1/2, 1/2
        let raw = [2.0, 1.0, 0.5, 0.5];
        let total: f64 = raw.iter().sum();
        let dist = w.transition_distribution(Some(0), 1);
        for (p, r) in dist.iter().zip(raw) {
            assert!((p - r / total).abs() < 1e-15);
        }
    }

    #[test]
    fn walks_follow_edges_undirected() {
        let g = graph(6, &[(0, 1), (2, 1), (3, 2), (4, 3), (5, 0)]);
        let d = Dynamics::new(&g);
        let w = Walker::new(&d, config(Strategy::EnWalk(BiasWeights::default()), View::Undirected, 12)).unwrap();
        let adj = g.adjacency(View::Undirected);
        for walk in w.generate_corpus().walks {
            assert_eq!(walk.len(), 13);
            assert!(walk.windows(2).all(|p| adj.contains(p[0], p[1])));
        }
    }
}
