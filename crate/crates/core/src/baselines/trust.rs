use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{data_lines, SpamGraph, TRUST_FEATURES};

/// Linear trustworthiness score over the eight trust features, clamped to
/// [0, 1]. Lower means more likely a spammer.
///
/// Features are standardized before fitting; `means` and `scales` carry the
/// transform so predictions take raw feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustModel {
    pub means: [f64; TRUST_FEATURES],
    pub scales: [f64; TRUST_FEATURES],
    pub weights: [f64; TRUST_FEATURES],
    pub intercept: f64,
}

impl TrustModel {
    /// A model that scores every user with the same value.
    pub fn constant(value: f64) -> Self {
        TrustModel {
            means: [0.0; TRUST_FEATURES],
            scales: [1.0; TRUST_FEATURES],
            weights: [0.0; TRUST_FEATURES],
            intercept: value,
        }
    }

    pub fn raw_predict(&self, features: &[f64; TRUST_FEATURES]) -> f64 {
        self.intercept
            + (0..TRUST_FEATURES)
                .map(|i| self.weights[i] * (features[i] - self.means[i]) / self.scales[i])
                .sum::<f64>()
    }

    pub fn predict(&self, features: &[f64; TRUST_FEATURES]) -> f64 {
        self.raw_predict(features).clamp(0.0, 1.0)
    }

    /// Trust score of every node of the graph.
    pub fn score_graph(&self, graph: &SpamGraph) -> Vec<f64> {
        graph
            .records()
            .iter()
            .map(|r| self.predict(&r.trust_features))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("trust model serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot falls below `tol` times the largest diagonal entry.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= tol * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Least-squares fit of trust scores on trust features.
///
/// A rank-deficient design (constant features, fewer examples than
/// features) is refit with a small ridge penalty.
pub fn fit_trust(labeled: &[([f64; TRUST_FEATURES], f64)]) -> Result<TrustModel> {
    let n = labeled.len();
    let distinct = {
        let mut seen: Vec<&[f64; TRUST_FEATURES]> = Vec::new();
        for (x, _) in labeled {
            if !seen.contains(&x) {
                seen.push(x);
            }
        }
        seen.len()
    };
    if n < 2 || distinct < 2 && labeled.windows(2).all(|w| w[0].1 == w[1].1) {
        return Err(Error::Config(
            "trust fitting needs at least two distinct labeled examples".into(),
        ));
    }
    if let Some((_, y)) = labeled.iter().find(|(_, y)| !(0.0..=1.0).contains(y)) {
        return Err(Error::Validation(format!("trust label {y} outside [0, 1]")));
    }

    let nf = n as f64;
    let mut means = [0.0; TRUST_FEATURES];
    let mut scales = [1.0; TRUST_FEATURES];
    for i in 0..TRUST_FEATURES {
        means[i] = labeled.iter().map(|(x, _)| x[i]).sum::<f64>() / nf;
        let var = labeled.iter().map(|(x, _)| (x[i] - means[i]).powi(2)).sum::<f64>() / nf;
        if var > 0.0 {
            scales[i] = var.sqrt();
        }
    }
    let y_mean = labeled.iter().map(|(_, y)| y).sum::<f64>() / nf;

    // centered normal equations; the intercept is the label mean
    let z: Vec<[f64; TRUST_FEATURES]> = labeled
        .iter()
        .map(|(x, _)| std::array::from_fn(|i| (x[i] - means[i]) / scales[i]))
        .collect();
    let mut gram = vec![vec![0.0; TRUST_FEATURES]; TRUST_FEATURES];
    let mut rhs = vec![0.0; TRUST_FEATURES];
    for (zi, (_, y)) in z.iter().zip(labeled) {
        for a in 0..TRUST_FEATURES {
            rhs[a] += zi[a] * (y - y_mean);
            for b in 0..TRUST_FEATURES {
                gram[a][b] += zi[a] * zi[b];
            }
        }
    }
    let weights = match solve(gram.clone(), rhs.clone(), 1e-10) {
        Some(w) => w,
        None => {
            log::warn!("trust fit: rank-deficient design, falling back to ridge regression");
            let ridge = 1e-6 * nf;
            for (i, row) in gram.iter_mut().enumerate() {
                row[i] += ridge;
            }
            solve(gram, rhs, 0.0).expect("ridge system is positive definite")
        }
    };
    Ok(TrustModel {
        means,
        scales,
        weights: std::array::from_fn(|i| weights[i]),
        intercept: y_mean,
    })
}

/// Reads `node<TAB>score` trust labels and pairs them with the node's features.
pub fn read_trust_labels(graph: &SpamGraph, path: &Path) -> Result<Vec<([f64; TRUST_FEATURES], f64)>> {
    data_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            let (id, score) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected `node<TAB>score`"))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad score `{score}`")))?;
            let v = graph
                .node_index(id)
                .map_err(|_| Error::parse(path, line_no, format!("unknown node `{id}`")))?;
            Ok((graph.record(v).trust_features, score))
        })
        .collect()
}
