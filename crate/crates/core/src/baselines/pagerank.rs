use serde::Serialize;

use crate::baselines::trust::TrustModel;
use crate::error::{Error, Result};
use crate::eval::ScoreTable;
use crate::graph::SpamGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PageRankVariant {
    Traditional,
    /// Transitions reweighted by the target's trust, teleport prior
    /// proportional to trust.
    TrustInducedAndPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PageRankConfig {
    /// Teleport mass multiplying the prior.
    pub teleport: f64,
    /// Stop once the L1 change between iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub variant: PageRankVariant,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            teleport: 0.15,
            tolerance: 1e-12,
            max_iterations: 1000,
            variant: PageRankVariant::Traditional,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.teleport > 0.0 && self.teleport < 1.0) {
            return Err(Error::Config(format!(
                "teleport must lie in (0, 1), got {}",
                self.teleport
            )));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config(
                "tolerance must be positive and max iterations at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageRankResult {
    pub ranks: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub last_delta: f64,
}

impl PageRankResult {
    /// Spamicity view: `1 - rank / max_rank`, so low-ranked nodes come first.
    pub fn spamicity(&self, graph: &SpamGraph) -> ScoreTable {
        let max = self.ranks.iter().copied().fold(0.0, f64::max);
        let scores = self
            .ranks
            .iter()
            .map(|r| if max > 0.0 { 1.0 - r / max } else { 0.0 })
            .collect();
        ScoreTable::new(graph.ids().to_vec(), scores).expect("one finite score per node")
    }
}

/// Power iteration of `PR = (1 - a) M PR + a p`, with dangling mass
/// redistributed along the prior `p`.
///
/// `trust` is required by the trust-weighted variant and ignored otherwise.
pub fn pagerank(
    graph: &SpamGraph,
    config: &PageRankConfig,
    trust: Option<&TrustModel>,
) -> Result<PageRankResult> {
    config.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Validation("pagerank needs a non-empty graph".into()));
    }
    let adj = graph.out_adjacency();

    let node_weight: Vec<f64> = match config.variant {
        PageRankVariant::Traditional => vec![1.0; n],
        PageRankVariant::TrustInducedAndPrior => trust
            .ok_or_else(|| Error::Config("trust-weighted pagerank needs a trust model".into()))?
            .score_graph(graph),
    };
    let total_trust: f64 = node_weight.iter().sum();
    let prior: Vec<f64> = if total_trust > 0.0 {
        node_weight.iter().map(|w| w / total_trust).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    // outgoing mass of every node under the reweighted transitions
    let out_mass: Vec<f64> = (0..n)
        .map(|v| {
            adj.neighbors(v)
                .iter()
                .zip(adj.weights(v))
                .map(|(&x, &w)| w * node_weight[x])
                .sum()
        })
        .collect();

    let damping = 1.0 - config.teleport;
    let mut ranks = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut last_delta = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let dangling: f64 = (0..n).filter(|&v| out_mass[v] <= 0.0).map(|v| ranks[v]).sum();
        for (x, p) in next.iter_mut().zip(&prior) {
            *x = (config.teleport + damping * dangling) * p;
        }
        for v in 0..n {
            if out_mass[v] <= 0.0 {
                continue;
            }
            let share = damping * ranks[v] / out_mass[v];
            for (&x, &w) in adj.neighbors(v).iter().zip(adj.weights(v)) {
                next[x] += share * w * node_weight[x];
            }
        }
        // renormalize away rounding drift
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        last_delta = ranks.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut ranks, &mut next);
        if last_delta < config.tolerance {
            return Ok(PageRankResult {
                ranks,
                iterations: iteration,
                converged: true,
                last_delta,
            });
        }
    }
    log::warn!(
        "pagerank did not converge in {} iterations (L1 change {last_delta:.3e})",
        config.max_iterations
    );
    Ok(PageRankResult {
        ranks,
        iterations: config.max_iterations,
        converged: false,
        last_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, UserRecord};

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

    #[test]
    fn cycle_is_uniform() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let r = pagerank(&g, &PageRankConfig::default(), None).unwrap();
        assert!(r.converged);
        for x in &r.ranks {
            assert!((x - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn star_hand_solution() {
        // leaves 1..=3 point at hub 0; the hub is dangling.
        // hub h, leaf l: l = (a + (1-a) h) / 4, h = (a + (1-a) h) / 4 + 3 (1-a) l
        let g = graph(4, &[(1, 0), (2, 0), (3, 0)]);
        let a = 0.15;
        let r = pagerank(&g, &PageRankConfig::default(), None).unwrap();
        let (h, l) = (r.ranks[0], r.ranks[1]);
        assert!((h + 3.0 * l - 1.0).abs() < 1e-12);
        assert!((l - (a + (1.0 - a) * h) / 4.0).abs() < 1e-10);
        assert!(h > l);
    }

    #[test]
    fn constant_trust_matches_traditional() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 0), (3, 0), (3, 4), (1, 3)]);
        let plain = pagerank(&g, &PageRankConfig::default(), None).unwrap();
        let cfg = PageRankConfig {
            variant: PageRankVariant::TrustInducedAndPrior,
            ..Default::default()
        };
        let trusted = pagerank(&g, &cfg, Some(&TrustModel::constant(0.4))).unwrap();
        for (a, b) in plain.ranks.iter().zip(&trusted.ranks) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn trust_variant_requires_model() {
        let g = graph(2, &[(0, 1)]);
        let cfg = PageRankConfig {
            variant: PageRankVariant::TrustInducedAndPrior,
            ..Default::default()
        };
        assert!(pagerank(&g, &cfg, None).is_err());
        let bad = PageRankConfig {
            teleport: 1.0,
            ..Default::default()
        };
        assert!(pagerank(&g, &bad, None).is_err());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let cfg = PageRankConfig {
            max_iterations: 2,
            tolerance: 1e-15,
            ..Default::default()
        };
        let r = pagerank(&g, &cfg, None).unwrap();
        assert!(!r.converged);
        assert!((r.ranks.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spamicity_orders_low_rank_first() {
        let g = graph(4, &[(1, 0), (2, 0), (3, 0)]);
        let r = pagerank(&g, &PageRankConfig::default(), None).unwrap();
        let s = r.spamicity(&g);
        assert_eq!(s.scores()[0], 0.0);
        assert!(s.scores()[1] > 0.0);
    }
}
