//! Evaluation harness: score tables, a logistic classifier, balanced
//! cross-validation, and ranking metrics (suspended-user CDF, its area, and
//! precision at n).

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{data_lines, write_file};

/// Spamicity per node; higher means more likely a spammer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    ids: Vec<String>,
    scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(ids: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::Validation(format!(
                "{} ids but {} scores",
                ids.len(),
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Validation(format!(
                "score of `{}` is not finite",
                ids[i]
            )));
        }
        Ok(ScoreTable { ids, scores })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Row indices by descending score, ties broken by ascending node id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.scores[b]
                .total_cmp(&self.scores[a])
                .then_with(|| self.ids[a].cmp(&self.ids[b]))
        });
        order
    }

    /// The same scores rearranged into the order of `ids`.
    pub fn reordered(&self, ids: &[String]) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::Validation(format!(
                "score table covers {} nodes, expected {}",
                self.len(),
                ids.len()
            )));
        }
        let pos: HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let scores = ids
            .iter()
            .map(|id| {
                pos.get(id.as_str())
                    .map(|&i| self.scores[i])
                    .ok_or_else(|| Error::Validation(format!("node `{id}` missing from score table")))
            })
            .collect::<Result<Vec<_>>>()?;
        ScoreTable::new(ids.to_vec(), scores)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            for (id, s) in self.ids.iter().zip(&self.scores) {
                writeln!(w, "{id}\t{s:.17e}")?;
            }
            Ok(())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let (mut ids, mut scores) = (Vec::new(), Vec::new());
        for (line_no, line) in data_lines(path)? {
            let (id, s) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected `node<TAB>score`"))?;
            ids.push(id.to_string());
            scores.push(
                s.trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("bad score `{s}`")))?,
            );
        }
        ScoreTable::new(ids, scores)
    }
}

/// Number of rank percentiles the CDF is sampled at.
pub const PERCENTILES: u64 = 100;

/// Fraction of suspended users captured at each rank percentile, plus the
/// trapezoid area under that curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspendedCdf {
    /// `cdf[x - 1]` is the value at percentile `x`, for `x = 1..=100`.
    pub cdf: Vec<f64>,
    pub auc: f64,
}

/// Suspended-user CDF over the ranking induced by `scores`.
///
/// The top `x` percent of `N` nodes is `x·N/100` ranks, counted
/// fractionally when that is not a whole number: the partially included
/// node contributes its covered share. The area starts from the origin.
/// Everything is accumulated in integers so results are exact up to the
/// final division.
pub fn suspended_cdf(scores: &ScoreTable, labels: &[bool]) -> Result<SuspendedCdf> {
    let n = scores.len();
    if labels.len() != n {
        return Err(Error::Validation(format!("{} labels for {n} scores", labels.len())));
    }
    let ranked: Vec<u64> = scores.ranking().iter().map(|&i| u64::from(labels[i])).collect();
    let positives: u64 = ranked.iter().sum();
    if positives == 0 {
        return Err(Error::Validation("no suspended users among the labels".into()));
    }
    let mut cum = vec![0u64; n + 1];
    for (k, &l) in ranked.iter().enumerate() {
        cum[k + 1] = cum[k] + l;
    }
    // numerator of CDF(x) in units of 1 / (100 · positives)
    let numer = |x: u64| -> u64 {
        let covered = x * n as u64;
        let (whole, rem) = ((covered / PERCENTILES) as usize, covered % PERCENTILES);
        PERCENTILES * cum[whole] + if whole < n { rem * ranked[whole] } else { 0 }
    };
    let denom = (PERCENTILES * positives) as f64;
    let cdf = (1..=PERCENTILES).map(|x| numer(x) as f64 / denom).collect();
    let area: u128 = (1..=PERCENTILES)
        .map(|x| u128::from(numer(x - 1) + numer(x)))
        .sum();
    let auc = area as f64 / (2 * PERCENTILES as u128 * PERCENTILES as u128 * positives as u128) as f64;
    Ok(SuspendedCdf { cdf, auc })
}

/// Fraction of the top-`n` ranked nodes that are suspended.
pub fn precision_at_n(scores: &ScoreTable, labels: &[bool], n: usize) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Validation(format!(
            "{} labels for {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if n == 0 || n > scores.len() {
        return Err(Error::Validation(format!(
            "precision@n needs 1 <= n <= {}, got {n}",
            scores.len()
        )));
    }
    let hits = scores.ranking()[..n].iter().filter(|&&i| labels[i]).count();
    Ok(hits as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogisticConfig {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    pub max_iterations: usize,
    /// Stop once the gradient's max-norm falls below this.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-3,
            max_iterations: 500,
            tolerance: 1e-7,
        }
    }
}

/// Logistic classifier on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticModel {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let z: f64 = self.bias
            + x.iter()
                .zip(&self.weights)
                .zip(self.means.iter().zip(&self.scales))
                .map(|((xi, w), (m, s))| w * (xi - m) / s)
                .sum::<f64>();
        crate::embed::sigmoid(z)
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.predict_proba(x) >= 0.5
    }
}

/// Mean logistic loss plus `l2/2 · |w|²`, and its gradient `(dw, db)`.
pub fn logistic_objective(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[bool],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut grad = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    let mut loss = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z = bias + x.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
        let y = f64::from(u8::from(y));
        // ln(1 + e^z) - y z, computed stably
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
        let g = crate::embed::sigmoid(z) - y;
        grad_b += g;
        grad.iter_mut().zip(x).for_each(|(gw, xi)| *gw += g * xi);
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * 0.5 * l2;
    grad.iter_mut()
        .zip(weights)
        .for_each(|(g, w)| *g = *g / n + l2 * w);
    (loss / n + penalty, grad, grad_b / n)
}

fn standardize(features: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let d = features[0].len();
    let n = features.len() as f64;
    let means: Vec<f64> = (0..d)
        .map(|j| features.iter().map(|x| x[j]).sum::<f64>() / n)
        .collect();
    let scales: Vec<f64> = (0..d)
        .map(|j| {
            let var = features.iter().map(|x| (x[j] - means[j]).powi(2)).sum::<f64>() / n;
            if var > 1e-24 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let z = features
        .iter()
        .map(|x| (0..d).map(|j| (x[j] - means[j]) / scales[j]).collect())
        .collect();
    (means, scales, z)
}

/// Fits an L2-regularized logistic classifier by gradient descent with
/// backtracking line search.
pub fn train_linear_classifier(
    features: &[Vec<f64>],
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    if features.len() != labels.len() || features.is_empty() {
        return Err(Error::Validation(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let d = features[0].len();
    if features.iter().any(|x| x.len() != d) {
        return Err(Error::Validation("feature rows differ in length".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Config(
            "classifier needs at least one example of each class".into(),
        ));
    }
    let (means, scales, z) = standardize(features);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let (mut loss, mut gw, mut gb) = logistic_objective(&w, b, &z, labels, config.l2);
    let mut step = 1.0;
    for _ in 0..config.max_iterations {
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < config.tolerance {
            break;
        }
        let gnorm2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        step *= 2.0;
        loop {
            let w_try: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let b_try = b - step * gb;
            let (l_try, gw_try, gb_try) = logistic_objective(&w_try, b_try, &z, labels, config.l2);
            if l_try <= loss - 0.5 * step * gnorm2 || step < 1e-12 {
                w = w_try;
                b = b_try;
                loss = l_try;
                gw = gw_try;
                gb = gb_try;
                break;
            }
            step *= 0.5;
        }
    }
    Ok(LogisticModel {
        means,
        scales,
        weights: w,
        bias: b,
    })
}

/// Averaged binary classification metrics; the positive class is "spammer".
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl ClassificationMetrics {
    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Self {
        let (mut tp, mut fp, mut fneg, mut tn) = (0usize, 0usize, 0usize, 0usize);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => tn += 1,
            }
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fneg);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassificationMetrics {
            precision,
            recall,
            f1,
            accuracy: ratio(tp + tn, tp + fp + fneg + tn),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub mean: ClassificationMetrics,
    pub per_fold: Vec<ClassificationMetrics>,
    pub folds: usize,
    pub seed: u64,
    /// Examples per class after balancing.
    pub per_class: usize,
}

/// Example indices in an order that depends only on the examples' content.
fn canonical_order(features: &[Vec<f64>], labels: &[bool]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..features.len()).collect();
    idx.sort_by(|&a, &b| {
        labels[a].cmp(&labels[b]).then_with(|| {
            features[a]
                .iter()
                .zip(&features[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    idx
}

/// Stratified `folds`-way split: fold id per listed example.
fn stratified_folds(positives: &[usize], negatives: &[usize], folds: usize) -> HashMap<usize, usize> {
    positives
        .iter()
        .enumerate()
        .chain(negatives.iter().enumerate())
        .map(|(k, &i)| (i, k % folds))
        .collect()
}

/// Balanced k-fold cross-validation: the majority class is subsampled to the
/// minority count, folds are stratified, and metrics averaged over folds.
pub fn cross_validate(
    features: &[Vec<f64>],
    labels: &[bool],
    folds: usize,
    seed: u64,
    config: &LogisticConfig,
) -> Result<CrossValidation> {
    if features.len() != labels.len() {
        return Err(Error::Validation("features and labels differ in length".into()));
    }
    if folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    let order = canonical_order(features, labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = order.iter().copied().filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = order.iter().copied().filter(|&i| !labels[i]).collect();
    let per_class = pos.len().min(neg.len());
    if per_class < folds {
        return Err(Error::Config(format!(
            "{folds}-fold cross-validation needs at least {folds} examples per class, have {per_class}"
        )));
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    pos.truncate(per_class);
    neg.truncate(per_class);
    let fold_of = stratified_folds(&pos, &neg, folds);
    let mut selected: Vec<usize> = pos.iter().chain(&neg).copied().collect();
    selected.sort_unstable();

    let mut per_fold = Vec::with_capacity(folds);
    for f in 0..folds {
        let (train, test): (Vec<usize>, Vec<usize>) = selected.iter().partition(|&&i| fold_of[&i] != f);
        let xs: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
        let ys: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let model = train_linear_classifier(&xs, &ys, config)?;
        let predicted: Vec<bool> = test.iter().map(|&i| model.predict(&features[i])).collect();
        let actual: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
        per_fold.push(ClassificationMetrics::from_predictions(&predicted, &actual));
    }
    let k = folds as f64;
    let mean = ClassificationMetrics {
        precision: per_fold.iter().map(|m| m.precision).sum::<f64>() / k,
        recall: per_fold.iter().map(|m| m.recall).sum::<f64>() / k,
        f1: per_fold.iter().map(|m| m.f1).sum::<f64>() / k,
        accuracy: per_fold.iter().map(|m| m.accuracy).sum::<f64>() / k,
    };
    Ok(CrossValidation {
        mean,
        per_fold,
        folds,
        seed,
        per_class,
    })
}

/// Spamicity from features: every node is scored by a classifier trained on
/// the other folds (stratified, unbalanced), so no node is scored by a
/// model that saw its label.
pub fn out_of_fold_scores(
    ids: &[String],
    features: &[Vec<f64>],
    labels: &[bool],
    folds: usize,
    seed: u64,
    config: &LogisticConfig,
) -> Result<ScoreTable> {
    if folds < 2 {
        return Err(Error::Config("out-of-fold scoring needs at least 2 folds".into()));
    }
    let order = canonical_order(features, labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = order.iter().copied().filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = order.iter().copied().filter(|&i| !labels[i]).collect();
    if pos.len() < folds || neg.len() < folds {
        return Err(Error::Config(format!(
            "{folds}-fold scoring needs at least {folds} examples per class"
        )));
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let fold_of = stratified_folds(&pos, &neg, folds);
    let mut scores = vec![0.0; features.len()];
    for f in 0..folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..features.len()).partition(|i| fold_of[i] != f);
        let xs: Vec<Vec<f64>> = train.iter().map(|&i| features[i].clone()).collect();
        let ys: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let model = train_linear_classifier(&xs, &ys, config)?;
        for i in test {
            scores[i] = model.predict_proba(&features[i]);
        }
    }
    ScoreTable::new(ids.to_vec(), scores)
}

/// Ranking metrics of one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: String,
    pub auc: f64,
    /// `(n, precision@n)` pairs.
    pub precision_at: Vec<(usize, f64)>,
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub nodes: usize,
    pub suspended: usize,
    pub rows: Vec<ModelRow>,
}

impl Comparison {
    pub fn row(&self, model: &str) -> Option<&ModelRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// Plain-text table: model, AUC, then one column per precision cutoff.
    pub fn table(&self) -> String {
        let mut out = String::from("Model\tAUC");
        if let Some(first) = self.rows.first() {
            for (n, _) in &first.precision_at {
                out.push_str(&format!("\tP@{n}"));
            }
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{}\t{:.4}", row.model, row.auc));
            for (_, p) in &row.precision_at {
                out.push_str(&format!("\t{p:.4}"));
            }
            out.push('\n');
        }
        out
    }

    /// `percentile model cdf` lines.
    pub fn write_cdf(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "percentile\tmodel\tcdf")?;
            for row in &self.rows {
                for (x, c) in row.cdf.iter().enumerate() {
                    writeln!(w, "{}\t{}\t{:.6}", x + 1, row.model, c)?;
                }
            }
            Ok(())
        })
    }
}

/// Runs the ranking metrics uniformly over several models, keeping the
/// given row order. Every table must cover exactly the nodes of `ids`.
pub fn compare_models(
    tables: &[(String, ScoreTable)],
    ids: &[String],
    labels: &[bool],
    cutoffs: &[usize],
) -> Result<Comparison> {
    let mut rows = Vec::with_capacity(tables.len());
    for (name, table) in tables {
        let table = table
            .reordered(ids)
            .map_err(|e| Error::Validation(format!("model `{name}`: {e}")))?;
        let cdf = suspended_cdf(&table, labels)?;
        let mut precision_at = Vec::new();
        for &n in cutoffs {
            if n > ids.len() {
                log::warn!("skipping precision@{n}: only {} nodes", ids.len());
                continue;
            }
            precision_at.push((n, precision_at_n(&table, labels, n)?));
        }
        rows.push(ModelRow {
            model: name.clone(),
            auc: cdf.auc,
            precision_at,
            cdf: cdf.cdf,
        });
    }
    Ok(Comparison {
        nodes: ids.len(),
        suspended: labels.iter().filter(|&&l| l).count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn table(scores: &[f64]) -> ScoreTable {
        let ids = (0..scores.len()).map(|i| format!("n{i:03}")).collect();
        ScoreTable::new(ids, scores.to_vec()).unwrap()
    }

    #[test]
    fn cdf_top_two_of_ten() {
        let scores: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
        let mut labels = vec![false; 10];
        labels[0] = true;
        labels[1] = true;
        let c = suspended_cdf(&table(&scores), &labels).unwrap();
        assert_eq!(c.cdf[19], 1.0);
        assert!(c.cdf[18] < 1.0);
        assert_eq!(c.cdf[9], 0.5);
        assert!((c.auc - 0.9).abs() < 1e-12);
        assert_eq!(*c.cdf.last().unwrap(), 1.0);
    }

    #[test]
    fn cdf_last_ranked_is_minimal() {
        let scores: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
        let mut labels = vec![false; 10];
        labels[9] = true;
        let c = suspended_cdf(&table(&scores), &labels).unwrap();
        assert!(c.cdf[..90].iter().all(|&x| x == 0.0));
        assert!((c.auc - 0.05).abs() < 1e-12);
        // any other placement of the single suspended node does better
        for pos in 0..9 {
            let mut l = vec![false; 10];
            l[pos] = true;
            assert!(suspended_cdf(&table(&scores), &l).unwrap().auc > c.auc);
        }
    }

    #[test]
    fn ties_break_by_id() {
        let t = ScoreTable::new(vec!["b".into(), "a".into(), "c".into()], vec![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(t.ranking(), vec![2, 1, 0]);
    }

    #[test]
    fn cdf_requires_a_positive() {
        assert!(suspended_cdf(&table(&[1.0, 2.0]), &[false, false]).is_err());
    }

    #[test]
    fn precision_at_n_cases() {
        let t = table(&[0.9, 0.8, 0.1, 0.2]);
        let labels = [true, true, false, false];
        assert_eq!(precision_at_n(&t, &labels, 2).unwrap(), 1.0);
        assert_eq!(precision_at_n(&t, &[false, false, true, true], 2).unwrap(), 0.0);
        assert_eq!(precision_at_n(&t, &labels, 4).unwrap(), 0.5);
        assert!(precision_at_n(&t, &labels, 5).is_err());
        assert!(precision_at_n(&t, &labels, 0).is_err());
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let scores: Vec<f64> = (0..37).map(|_| rng.random_range(-3.0..3.0)).collect();
        let labels: Vec<bool> = (0..37).map(|i| i % 4 == 0).collect();
        let a = suspended_cdf(&table(&scores), &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() + 7.0).collect();
        let b = suspended_cdf(&table(&warped), &labels).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_scores_have_half_auc() {
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scores: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
            let labels: Vec<bool> = (0..2000).map(|i| i % 20 == 0).collect();
            let auc = suspended_cdf(&table(&scores), &labels).unwrap().auc;
            assert!((auc - 0.5).abs() < 0.05 + 0.05, "{auc}");
            total += auc;
        }
        assert!((total / 20.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<Vec<f64>> = (0..15).map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<bool> = (0..15).map(|i| i % 3 == 0).collect();
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = 0.3;
        let (_, gw, gb) = logistic_objective(&w, b, &xs, &ys, 1e-3);
        let h = 1e-5;
        for j in 0..4 {
            let (mut wp, mut wm) = (w.clone(), w.clone());
            wp[j] += h;
            wm[j] -= h;
            let fd = (logistic_objective(&wp, b, &xs, &ys, 1e-3).0 - logistic_objective(&wm, b, &xs, &ys, 1e-3).0) / (2.0 * h);
            assert!((fd - gw[j]).abs() <= 1e-4 * gw[j].abs().max(1e-3), "{fd} vs {}", gw[j]);
        }
        let fd = (logistic_objective(&w, b + h, &xs, &ys, 1e-3).0 - logistic_objective(&w, b - h, &xs, &ys, 1e-3).0) / (2.0 * h);
        assert!((fd - gb).abs() <= 1e-4 * gb.abs().max(1e-3));
    }

    #[test]
    fn separable_clusters_fit_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..80 {
            let c = if i % 2 == 0 { 2.0 } else { -2.0 };
            xs.push(vec![c + rng.random_range(-0.5..0.5), c + rng.random_range(-0.5..0.5)]);
            ys.push(i % 2 == 0);
        }
        let model = train_linear_classifier(&xs, &ys, &LogisticConfig::default()).unwrap();
        let correct = xs.iter().zip(&ys).filter(|(x, &y)| model.predict(x) == y).count();
        assert_eq!(correct, 80);
    }

    #[test]
    fn identical_features_predict_class_prior() {
        let xs = vec![vec![1.0, 2.0]; 10];
        let ys: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let model = train_linear_classifier(&xs, &ys, &LogisticConfig::default()).unwrap();
        assert!((model.predict_proba(&xs[0]) - 0.3).abs() < 1e-6);
        let correct = xs.iter().zip(&ys).filter(|(x, &y)| model.predict(x) == y).count();
        assert_eq!(correct, 7);
    }

    #[test]
    fn single_class_rejected() {
        let xs = vec![vec![1.0]; 4];
        assert!(train_linear_classifier(&xs, &[true; 4], &LogisticConfig::default()).is_err());
    }

    #[test]
    fn leaked_label_gives_perfect_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ys: Vec<bool> = (0..300).map(|i| i % 6 == 0).collect();
        let xs: Vec<Vec<f64>> = ys
            .iter()
            .map(|&y| vec![rng.random(), if y { 1.0 } else { 0.0 }, rng.random()])
            .collect();
        let cv = cross_validate(&xs, &ys, 10, 1, &LogisticConfig::default()).unwrap();
        assert_eq!(cv.per_class, 50);
        let m = cv.mean;
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn random_features_give_chance_accuracy() {
        let accuracies: Vec<f64> = (0..10)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
                let ys: Vec<bool> = (0..400).map(|i| i % 2 == 0).collect();
                let xs: Vec<Vec<f64>> = ys.iter().map(|_| (0..5).map(|_| rng.random()).collect()).collect();
                cross_validate(&xs, &ys, 10, seed, &LogisticConfig::default()).unwrap().mean.accuracy
            })
            .collect();
        let mean = accuracies.iter().sum::<f64>() / 10.0;
        assert!((mean - 0.5).abs() <= 0.08, "{accuracies:?}");
    }

    #[test]
    fn cross_validation_is_deterministic_and_order_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ys: Vec<bool> = (0..200).map(|i| i % 4 == 0).collect();
        let xs: Vec<Vec<f64>> = ys
            .iter()
            .map(|&y| vec![rng.random::<f64>() + if y { 0.3 } else { 0.0 }, rng.random()])
            .collect();
        let cfg = LogisticConfig::default();
        let a = cross_validate(&xs, &ys, 5, 3, &cfg).unwrap();
        assert_eq!(a, cross_validate(&xs, &ys, 5, 3, &cfg).unwrap());
        let mut perm: Vec<usize> = (0..200).collect();
        perm.shuffle(&mut rng);
        let xs2: Vec<_> = perm.iter().map(|&i| xs[i].clone()).collect();
        let ys2: Vec<_> = perm.iter().map(|&i| ys[i]).collect();
        assert_eq!(a, cross_validate(&xs2, &ys2, 5, 3, &cfg).unwrap());
    }

    #[test]
    fn too_few_examples_rejected() {
        let xs = vec![vec![0.0]; 12];
        let ys: Vec<bool> = (0..12).map(|i| i < 3).collect();
        assert!(cross_validate(&xs, &ys, 10, 0, &LogisticConfig::default()).is_err());
    }

    #[test]
    fn compare_keeps_order_and_checks_nodes() {
        let good = table(&[0.9, 0.8, 0.1, 0.2]);
        let bad = table(&[0.1, 0.2, 0.9, 0.8]);
        let ids = good.ids().to_vec();
        let labels = [true, false, false, false];
        let c = compare_models(
            &[("good".into(), good.clone()), ("bad".into(), bad), ("same".into(), good.clone())],
            &ids,
            &labels,
            &[1, 2, 100],
        )
        .unwrap();
        assert_eq!(c.rows.iter().map(|r| r.model.as_str()).collect::<Vec<_>>(), ["good", "bad", "same"]);
        assert!(c.rows[0].auc > c.rows[1].auc);
        assert_eq!(c.rows[0], ModelRow { model: "good".into(), ..c.rows[2].clone() });
        assert_eq!(c.rows[0].precision_at, vec![(1, 1.0), (2, 0.5)]);

        let other = ScoreTable::new(vec!["x".into(); 4], vec![0.0; 4]).unwrap();
        assert!(compare_models(&[("o".into(), other)], &ids, &labels, &[1]).is_err());
    }

    #[test]
    fn score_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.tsv");
        let t = table(&[0.25, -1.5e-7, 3.0]);
        t.write(&path).unwrap();
        assert_eq!(ScoreTable::read(&path).unwrap(), t);
    }
}
