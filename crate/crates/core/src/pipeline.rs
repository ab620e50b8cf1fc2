//! End-to-end model comparison: the three graph baselines and the three
//! walk-based embeddings, scored and ranked on the same labels.

use std::path::Path;

use serde::Serialize;

use crate::baselines::{fit_trust, lbp_marginals, pagerank, MrfConfig, PageRankConfig, PageRankVariant, TrustModel};
use crate::embed::{train, EmbedConfig, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::eval::{compare_models, cross_validate, out_of_fold_scores, Comparison, CrossValidation, LogisticConfig, ScoreTable};
use crate::graph::{SpamGraph, TRUST_FEATURES};
use crate::walk::{generate_corpus, BiasWeights, Strategy, WalkConfig, WalkCorpus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    #[serde(rename = "PR-T")]
    PageRank,
    #[serde(rename = "PR-TITP")]
    TrustPageRank,
    #[serde(rename = "MRF")]
    Mrf,
    #[serde(rename = "DeepWalk")]
    DeepWalk,
    #[serde(rename = "node2vec")]
    Node2Vec,
    #[serde(rename = "ENWalk")]
    EnWalk,
}

impl Model {
    /// Report order.
    pub const ALL: [Model; 6] = [
        Model::PageRank,
        Model::TrustPageRank,
        Model::Mrf,
        Model::DeepWalk,
        Model::Node2Vec,
        Model::EnWalk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::PageRank => "PR-T",
            Model::TrustPageRank => "PR-TITP",
            Model::Mrf => "MRF",
            Model::DeepWalk => "DeepWalk",
            Model::Node2Vec => "node2vec",
            Model::EnWalk => "ENWalk",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Config(format!("unknown model `{name}`")))
    }

    pub fn needs_trust(self) -> bool {
        matches!(self, Model::TrustPageRank | Model::Mrf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub models: Vec<Model>,
    /// Shared by all walk models; the strategy is set per model.
    pub walk: WalkConfig,
    pub bias: BiasWeights,
    /// Return and in-out parameters of the node2vec walk.
    pub node2vec: (f64, f64),
    pub embed: EmbedConfig,
    pub pagerank: PageRankConfig,
    pub mrf: MrfConfig,
    pub logistic: LogisticConfig,
    pub folds: usize,
    /// Seeds fold assignment and class balancing.
    pub eval_seed: u64,
    pub cutoffs: Vec<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            models: Model::ALL.to_vec(),
            walk: WalkConfig::default(),
            bias: BiasWeights::default(),
            node2vec: (1.0, 0.5),
            embed: EmbedConfig::default(),
            pagerank: PageRankConfig::default(),
            mrf: MrfConfig::default(),
            logistic: LogisticConfig::default(),
            folds: 10,
            eval_seed: 0,
            cutoffs: vec![100],
        }
    }
}

impl PipelineConfig {
    pub fn strategy(&self, model: Model) -> Option<Strategy> {
        match model {
            Model::DeepWalk => Some(Strategy::Uniform),
            Model::Node2Vec => Some(Strategy::ReturnInOut {
                ret: self.node2vec.0,
                inout: self.node2vec.1,
            }),
            Model::EnWalk => Some(Strategy::EnWalk(self.bias)),
            _ => None,
        }
    }
}

/// Outputs of one model run.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub model: Model,
    pub scores: ScoreTable,
    pub corpus: Option<WalkCorpus>,
    pub embedding: Option<EmbeddingMatrix>,
    pub classification: Option<CrossValidation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRow {
    pub model: String,
    #[serde(flatten)]
    pub result: CrossValidation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub ranking: Comparison,
    pub classification: Vec<ClassificationRow>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        self.ranking.write_cdf(&dir.join("cdf.tsv"))
    }
}

/// Node labels with unlabeled nodes counted as not suspended.
pub fn label_vector(graph: &SpamGraph) -> Vec<bool> {
    graph.labels().into_iter().map(|l| l.unwrap_or(false)).collect()
}

/// Scores from walk embeddings: walks, training, then out-of-fold
/// classifier probabilities; classification metrics come from balanced
/// cross-validation on the same features.
pub fn embedding_model(
    graph: &SpamGraph,
    labels: &[bool],
    strategy: Strategy,
    config: &PipelineConfig,
) -> Result<(WalkCorpus, EmbeddingMatrix, ScoreTable, CrossValidation)> {
    let corpus = generate_corpus(graph, WalkConfig { strategy, ..config.walk })?;
    let (embedding, _) = train(&corpus, graph.ids(), &config.embed)?;
    let features = embedding.rows();
    let scores = out_of_fold_scores(
        graph.ids(),
        &features,
        labels,
        config.folds,
        config.eval_seed,
        &config.logistic,
    )?;
    let cv = cross_validate(&features, labels, config.folds, config.eval_seed, &config.logistic)?;
    Ok((corpus, embedding, scores, cv))
}

/// Runs every configured model. `trust_labels` feed the trust model needed
/// by PR-TITP and MRF.
pub fn run_models(
    graph: &SpamGraph,
    trust_labels: &[([f64; TRUST_FEATURES], f64)],
    config: &PipelineConfig,
) -> Result<Vec<ModelRun>> {
    let labels = label_vector(graph);
    let trust: Option<TrustModel> = if config.models.iter().any(|m| m.needs_trust()) {
        Some(fit_trust(trust_labels)?)
    } else {
        None
    };
    let mut runs = Vec::with_capacity(config.models.len());
    for &model in &config.models {
        log::info!("running {}", model.name());
        let run = match model {
            Model::PageRank | Model::TrustPageRank => {
                let variant = if model == Model::PageRank {
                    PageRankVariant::Traditional
                } else {
                    PageRankVariant::TrustInducedAndPrior
                };
                let cfg = PageRankConfig { variant, ..config.pagerank };
                let result = pagerank(graph, &cfg, trust.as_ref())?;
                ModelRun {
                    model,
                    scores: result.spamicity(graph),
                    corpus: None,
                    embedding: None,
                    classification: None,
                }
            }
            Model::Mrf => {
                let trust = trust.as_ref().expect("fitted above");
                ModelRun {
                    model,
                    scores: lbp_marginals(graph, &config.mrf, trust)?.scores(graph),
                    corpus: None,
                    embedding: None,
                    classification: None,
                }
            }
            Model::DeepWalk | Model::Node2Vec | Model::EnWalk => {
                let strategy = config.strategy(model).expect("walk model");
                let (corpus, embedding, scores, cv) = embedding_model(graph, &labels, strategy, config)?;
                ModelRun {
                    model,
                    scores,
                    corpus: Some(corpus),
                    embedding: Some(embedding),
                    classification: Some(cv),
                }
            }
        };
        runs.push(run);
    }
    Ok(runs)
}

pub fn report(graph: &SpamGraph, runs: &[ModelRun], cutoffs: &[usize]) -> Result<PipelineReport> {
    let labels = label_vector(graph);
    let tables: Vec<(String, ScoreTable)> = runs
        .iter()
        .map(|r| (r.model.name().to_string(), r.scores.clone()))
        .collect();
    let ranking = compare_models(&tables, graph.ids(), &labels, cutoffs)?;
    let classification = runs
        .iter()
        .filter_map(|r| {
            r.classification.clone().map(|result| ClassificationRow {
                model: r.model.name().to_string(),
                result,
            })
        })
        .collect();
    Ok(PipelineReport { ranking, classification })
}

pub fn run(
    graph: &SpamGraph,
    trust_labels: &[([f64; TRUST_FEATURES], f64)],
    config: &PipelineConfig,
) -> Result<(Vec<ModelRun>, PipelineReport)> {
    let runs = run_models(graph, trust_labels, config)?;
    let report = report(graph, &runs, &config.cutoffs)?;
    Ok((runs, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn small_network_yields_all_six_rows() {
        let net = generate(&SynthConfig {
            nodes: 300,
            spam_fraction: 0.1,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        let trust: Vec<_> = net
            .trust_labels
            .iter()
            .map(|(id, t)| (net.graph.record(net.graph.node_index(id).unwrap()).trust_features, *t))
            .collect();
        let config = PipelineConfig {
            walk: WalkConfig {
                walks_per_node: 2,
                walk_length: 10,
                ..Default::default()
            },
            embed: EmbedConfig {
                dim: 8,
                window: 3,
                epochs: 1,
                ..Default::default()
            },
            folds: 3,
            cutoffs: vec![10, 100, 1000],
            ..Default::default()
        };
        let (runs, report) = run(&net.graph, &trust, &config).unwrap();
        assert_eq!(runs.len(), 6);
        let names: Vec<&str> = report.ranking.rows.iter().map(|r| r.model.as_str()).collect();
        assert_eq!(names, ["PR-T", "PR-TITP", "MRF", "DeepWalk", "node2vec", "ENWalk"]);
        assert_eq!(report.classification.len(), 3);
        for row in &report.ranking.rows {
            assert!((0.0..=1.0).contains(&row.auc));
            assert_eq!(row.precision_at.len(), 2);
        }
        let json = report.to_json();
        assert!(json.contains("\"ENWalk\""));
    }

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(Model::from_name(m.name()).unwrap(), m);
        }
        assert!(Model::from_name("svm").is_err());
    }
}
