//! Per-user spam statistics and the four pairwise equivalence scores that
//! bias the walk: common activity time, success-rate closeness, fraudulence
//! closeness and shared mentions.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{write_file, SpamGraph, UserRecord, View};

/// Statistics of one user derived from its record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeStats {
    /// followers / max(1, followings).
    pub success_rate: f64,
    /// fraud tweets / max(1, total tweets).
    pub fraudulence: f64,
    /// Days from first to last activity, inclusive; 0 when never active.
    pub activity_window: u32,
    /// max(1, success_rate).
    pub clamped_ratio: f64,
}

impl NodeStats {
    pub fn from_record(record: &UserRecord) -> Self {
        let success_rate = record.followers as f64 / record.followings.max(1) as f64;
        let fraudulence = record.fraud_tweets as f64 / record.total_tweets.max(1) as f64;
        let activity_window = match (record.active_days.first(), record.active_days.last()) {
            (Some(lo), Some(hi)) => hi - lo + 1,
            _ => 0,
        };
        NodeStats {
            success_rate,
            fraudulence,
            activity_window,
            clamped_ratio: success_rate.max(1.0),
        }
    }

    /// Success rate of at least one marks the vigilant spammer type.
    pub fn is_vigilant_type(&self) -> bool {
        self.success_rate >= 1.0
    }
}

pub fn node_stats(record: &UserRecord) -> NodeStats {
    NodeStats::from_record(record)
}

/// Intersection-over-union of two ascending, duplicate-free sequences.
/// Two empty sequences give 0.
fn sorted_jaccard<T: Ord>(a: impl IntoIterator<Item = T>, b: impl IntoIterator<Item = T>) -> f64 {
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    let (mut common, mut union) = (0usize, 0usize);
    loop {
        let ord = match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => x.cmp(y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => break,
        };
        union += 1;
        match ord {
            Ordering::Less => {
                a.next();
            }
            Ordering::Greater => {
                b.next();
            }
            Ordering::Equal => {
                common += 1;
                a.next();
                b.next();
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

/// Days active in common over days on which either user was active.
pub fn pair_common_time(a: &UserRecord, b: &UserRecord) -> f64 {
    sorted_jaccard(&a.active_days, &b.active_days)
}

/// 1 - |max(1, ratio_a) - max(1, ratio_b)|, clamped to [0, 1].
pub fn pair_success(a: &NodeStats, b: &NodeStats) -> f64 {
    (1.0 - (a.clamped_ratio - b.clamped_ratio).abs()).clamp(0.0, 1.0)
}

pub fn pair_fraud(a: &NodeStats, b: &NodeStats) -> f64 {
    1.0 - (a.fraudulence - b.fraudulence).abs()
}

/// Jaccard overlap of the distinct mention tokens.
pub fn pair_mentions(a: &UserRecord, b: &UserRecord) -> f64 {
    sorted_jaccard(a.mentions.keys(), b.mentions.keys())
}

/// The four equivalence scores of a node pair, each in [0, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PairDynamics {
    pub ct: f64,
    pub sr: f64,
    pub fr: f64,
    pub me: f64,
}

impl PairDynamics {
    pub fn compute(ra: &UserRecord, sa: &NodeStats, rb: &UserRecord, sb: &NodeStats) -> Self {
        PairDynamics {
            ct: pair_common_time(ra, rb),
            sr: pair_success(sa, sb),
            fr: pair_fraud(sa, sb),
            me: pair_mentions(ra, rb),
        }
    }
}

/// Node statistics for a whole graph plus on-demand pair scores.
#[derive(Debug, Clone)]
pub struct Dynamics<'g> {
    graph: &'g SpamGraph,
    stats: Vec<NodeStats>,
}

impl<'g> Dynamics<'g> {
    pub fn new(graph: &'g SpamGraph) -> Self {
        let stats = graph.records().iter().map(NodeStats::from_record).collect();
        Dynamics { graph, stats }
    }

    pub fn graph(&self) -> &'g SpamGraph {
        self.graph
    }

    pub fn stats(&self, v: usize) -> &NodeStats {
        &self.stats[v]
    }

    pub fn all_stats(&self) -> &[NodeStats] {
        &self.stats
    }

    pub fn pair(&self, a: usize, b: usize) -> PairDynamics {
        PairDynamics::compute(
            self.graph.record(a),
            &self.stats[a],
            self.graph.record(b),
            &self.stats[b],
        )
    }

    /// Scores for every adjacency slot of `view`, computed once up front.
    pub fn over_edges(&self, view: View) -> EdgeDynamics {
        let adj = self.graph.adjacency(view);
        let n = self.graph.node_count();
        let per_node: Vec<Vec<PairDynamics>> = (0..n)
            .into_par_iter()
            .map(|v| adj.neighbors(v).iter().map(|&x| self.pair(v, x)).collect())
            .collect();
        EdgeDynamics {
            view,
            slots: per_node.into_iter().flatten().collect(),
        }
    }
}

/// Pair scores aligned with the slots of one adjacency view.
///
/// Every pair a walk can query, `(t, v)` and `(v, x)`, is an edge of the
/// walked view, so precomputing over edges covers all lookups.
#[derive(Debug, Clone)]
pub struct EdgeDynamics {
    view: View,
    slots: Vec<PairDynamics>,
}

impl EdgeDynamics {
    pub fn view(&self) -> View {
        self.view
    }

    #[inline]
    pub fn at(&self, slot: usize) -> &PairDynamics {
        &self.slots[slot]
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Writes `src dst ct sr fr me` for every directed edge.
pub fn write_pairs(dynamics: &Dynamics<'_>, path: &Path) -> Result<()> {
    let graph = dynamics.graph();
    let edge_dyn = dynamics.over_edges(View::Out);
    write_file(path, |w| {
        for (slot, (s, d, _)) in graph.edges().enumerate() {
            let p = edge_dyn.at(slot);
            writeln!(
                w,
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                graph.node_id(s),
                graph.node_id(d),
                p.ct,
                p.sr,
                p.fr,
                p.me
            )?;
        }
        Ok(())
    })
}
