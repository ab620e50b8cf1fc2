//! Skip-gram with negative sampling over walk corpora.
//!
//! Two parameter matrices are trained: node features `f` (reported) and
//! context vectors `f'` (internal). For a `(center, context)` pair with
//! negatives `n_1..n_k` the loss is
//! `-ln σ(f'(ctx)·f(ctr)) - Σ_j ln σ(-f'(n_j)·f(ctr))`.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{data_lines, write_file, SpamGraph};
use crate::walk::WalkCorpus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbedConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub noise_exponent: f64,
    pub seed: u64,
    /// Single worker, corpus order, bit-reproducible.
    pub deterministic: bool,
    /// Worker threads for the lock-free mode.
    pub workers: usize,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 128,
            window: 10,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            noise_exponent: 0.75,
            seed: 0,
            deterministic: true,
            workers: 1,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "dimension, window, negatives and epochs must all be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !self.noise_exponent.is_finite() {
            return Err(Error::Config("noise exponent must be finite".into()));
        }
        Ok(())
    }
}

/// Learned node features plus the context vectors used during training.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub ids: Vec<String>,
    pub dim: usize,
    /// Row-major `N x dim` node features.
    pub input: Vec<f64>,
    /// Row-major `N x dim` context vectors.
    pub output: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(ids: Vec<String>, dim: usize) -> Self {
        let n = ids.len();
        EmbeddingMatrix {
            ids,
            dim,
            input: vec![0.0; n * dim],
            output: vec![0.0; n * dim],
        }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.input[v * self.dim..(v + 1) * self.dim]
    }

    pub fn context_row(&self, v: usize) -> &[f64] {
        &self.output[v * self.dim..(v + 1) * self.dim]
    }

    /// Feature rows as owned vectors, for classifiers.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.node_count()).map(|v| self.row(v).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// Writes `N d` then `id f_1 .. f_d` per node, 6 significant digits.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "{} {}", self.node_count(), self.dim)?;
            for (v, id) in self.ids.iter().enumerate() {
                w.write_all(id.as_bytes())?;
                for &x in self.row(v) {
                    write!(w, " {}", format_sig6(x))?;
                }
                w.write_all(b"\n")?;
            }
            Ok(())
        })
    }

    /// Reads node features back; context vectors come back as zeros.
    pub fn read(path: &Path) -> Result<Self> {
        let lines = data_lines(path)?;
        let mut it = lines.into_iter();
        let (line_no, header) = it
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty embedding file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, line_no, "header must be `N d`"))?;
        let [n, dim] = dims[..] else {
            return Err(Error::parse(path, line_no, "header must be `N d`"));
        };
        let mut ids = Vec::with_capacity(n);
        let mut input = Vec::with_capacity(n * dim);
        for (line_no, line) in it {
            let mut fields = line.split_whitespace();
            let id = fields.next().unwrap_or_default().to_string();
            let before = input.len();
            for f in fields {
                input.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(path, line_no, format!("bad number `{f}`")))?,
                );
            }
            if input.len() - before != dim {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {dim} values, got {}", input.len() - before),
                ));
            }
            ids.push(id);
        }
        if ids.len() != n {
            return Err(Error::Validation(format!(
                "{}: header announces {n} rows, found {}",
                path.display(),
                ids.len()
            )));
        }
        Ok(EmbeddingMatrix {
            output: vec![0.0; n * dim],
            ids,
            dim,
            input,
        })
    }

    /// Reorders rows to follow the graph's node indices.
    pub fn aligned_to(&self, graph: &SpamGraph) -> Result<Self> {
        if self.node_count() != graph.node_count() {
            return Err(Error::Validation(format!(
                "embedding has {} rows but the graph has {} nodes",
                self.node_count(),
                graph.node_count()
            )));
        }
        let mut out = EmbeddingMatrix::zeros(graph.ids().to_vec(), self.dim);
        for (r, id) in self.ids.iter().enumerate() {
            let v = graph.node_index(id)?;
            out.input[v * self.dim..(v + 1) * self.dim].copy_from_slice(self.row(r));
            out.output[v * self.dim..(v + 1) * self.dim].copy_from_slice(self.context_row(r));
        }
        Ok(out)
    }
}

/// `%g`-style rendering with six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

/// All `(center, context)` pairs within `window` positions of each other.
pub fn context_pairs(walk: &[usize], window: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..walk.len()).flat_map(move |i| {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(walk.len().saturating_sub(1));
        (lo..=hi).filter(move |&j| j != i).map(move |j| (walk[i], walk[j]))
    })
}

pub fn generate_contexts(
    corpus: &WalkCorpus,
    window: usize,
) -> impl Iterator<Item = (usize, usize)> + '_ {
    corpus.walks.iter().flat_map(move |w| context_pairs(w, window))
}

fn pairs_in_walk(len: usize, window: usize) -> usize {
    (0..len)
        .map(|i| i.min(window) + (len - 1 - i).min(window))
        .sum()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one pair.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    softplus(-dot(context, center)) + negatives.iter().map(|n| softplus(dot(n, center))).sum::<f64>()
}

/// Gradient of [`sgns_loss`] with respect to each parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> SgnsGradient {
    let pos = dot(context, center);
    // dloss/dscore: σ(s) - 1 for the positive, σ(s) for each negative
    let g_pos = sigmoid(pos) - 1.0;
    let mut grad_center: Vec<f64> = context.iter().map(|c| g_pos * c).collect();
    let mut loss = softplus(-pos);
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = dot(n, center);
        loss += softplus(s);
        let g = sigmoid(s);
        grad_center.iter_mut().zip(n.iter()).for_each(|(gc, x)| *gc += g * x);
        grad_negs.push(center.iter().map(|h| g * h).collect());
    }
    SgnsGradient {
        loss,
        context: center.iter().map(|h| g_pos * h).collect(),
        center: grad_center,
        negatives: grad_negs,
    }
}

/// Row access shared by the single-threaded and lock-free trainers.
trait Params {
    fn dim(&self) -> usize;
    fn load_input(&self, row: usize, buf: &mut [f64]);
    fn load_output(&self, row: usize, buf: &mut [f64]);
    fn add_input(&mut self, row: usize, scale: f64, delta: &[f64]);
    fn add_output(&mut self, row: usize, scale: f64, delta: &[f64]);
}

impl Params for EmbeddingMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn load_input(&self, row: usize, buf: &mut [f64]) {
        buf.copy_from_slice(self.row(row));
    }
    fn load_output(&self, row: usize, buf: &mut [f64]) {
        buf.copy_from_slice(self.context_row(row));
    }
    fn add_input(&mut self, row: usize, scale: f64, delta: &[f64]) {
        let d = self.dim;
        for (x, g) in self.input[row * d..(row + 1) * d].iter_mut().zip(delta) {
            *x += scale * g;
        }
    }
    fn add_output(&mut self, row: usize, scale: f64, delta: &[f64]) {
        let d = self.dim;
        for (x, g) in self.output[row * d..(row + 1) * d].iter_mut().zip(delta) {
            *x += scale * g;
        }
    }
}

/// Parameters shared by lock-free workers. Concurrent read-modify-write
/// races may drop an update; every individual access is a relaxed atomic.
struct SharedParams {
    dim: usize,
    input: Vec<AtomicU64>,
    output: Vec<AtomicU64>,
}

impl SharedParams {
    fn from_matrix(m: &EmbeddingMatrix) -> Self {
        let wrap = |v: &[f64]| v.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        SharedParams {
            dim: m.dim,
            input: wrap(&m.input),
            output: wrap(&m.output),
        }
    }

    fn store_into(&self, m: &mut EmbeddingMatrix) {
        let unwrap = |src: &[AtomicU64], dst: &mut [f64]| {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = f64::from_bits(s.load(Ordering::Relaxed));
            }
        };
        unwrap(&self.input, &mut m.input);
        unwrap(&self.output, &mut m.output);
    }
}

struct SharedView<'a>(&'a SharedParams);

impl SharedView<'_> {
    fn load(cells: &[AtomicU64], buf: &mut [f64]) {
        for (b, c) in buf.iter_mut().zip(cells) {
            *b = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add(cells: &[AtomicU64], scale: f64, delta: &[f64]) {
        for (c, g) in cells.iter().zip(delta) {
            let x = f64::from_bits(c.load(Ordering::Relaxed)) + scale * g;
            c.store(x.to_bits(), Ordering::Relaxed);
        }
    }
}

impl Params for SharedView<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }
    fn load_input(&self, row: usize, buf: &mut [f64]) {
        let d = self.0.dim;
        Self::load(&self.0.input[row * d..(row + 1) * d], buf);
    }
    fn load_output(&self, row: usize, buf: &mut [f64]) {
        let d = self.0.dim;
        Self::load(&self.0.output[row * d..(row + 1) * d], buf);
    }
    fn add_input(&mut self, row: usize, scale: f64, delta: &[f64]) {
        let d = self.0.dim;
        Self::add(&self.0.input[row * d..(row + 1) * d], scale, delta);
    }
    fn add_output(&mut self, row: usize, scale: f64, delta: &[f64]) {
        let d = self.0.dim;
        Self::add(&self.0.output[row * d..(row + 1) * d], scale, delta);
    }
}

#[derive(Default)]
struct Scratch {
    center: Vec<f64>,
    targets: Vec<f64>,
    grad_center: Vec<f64>,
    scores: Vec<f64>,
}

/// One gradient step on a pair: all blocks use the pre-step values.
/// Returns the loss before the step.
fn pair_update<P: Params>(
    params: &mut P,
    center: usize,
    context: usize,
    negatives: &[usize],
    step: f64,
    s: &mut Scratch,
) -> f64 {
    let d = params.dim();
    let k = negatives.len() + 1;
    s.center.resize(d, 0.0);
    s.targets.resize(k * d, 0.0);
    s.grad_center.clear();
    s.grad_center.resize(d, 0.0);
    s.scores.clear();

    params.load_input(center, &mut s.center);
    let rows = std::iter::once(context).chain(negatives.iter().copied());
    let mut loss = 0.0;
    for (j, row) in rows.enumerate() {
        let o = &mut s.targets[j * d..(j + 1) * d];
        params.load_output(row, o);
        let score = dot(o, &s.center);
        let (l, g) = if j == 0 {
            (softplus(-score), sigmoid(score) - 1.0)
        } else {
            (softplus(score), sigmoid(score))
        };
        loss += l;
        s.scores.push(g);
        s.grad_center.iter_mut().zip(o.iter()).for_each(|(gc, x)| *gc += g * x);
    }
    let rows = std::iter::once(context).chain(negatives.iter().copied());
    for (row, &g) in rows.zip(&s.scores) {
        params.add_output(row, -step * g, &s.center);
    }
    params.add_input(center, -step, &s.grad_center);
    loss
}

/// Applies one negative-sampling gradient step to `embedding` and returns
/// the pair's loss before the update.
pub fn sgns_pair_step(
    embedding: &mut EmbeddingMatrix,
    center: usize,
    context: usize,
    negatives: &[usize],
    step: f64,
) -> f64 {
    pair_update(embedding, center, context, negatives, step, &mut Scratch::default())
}

/// Unigram^exponent noise over the nodes that occur in a corpus.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl NoiseDistribution {
    pub fn from_corpus(corpus: &WalkCorpus, node_count: usize, exponent: f64) -> Result<Self> {
        let mut counts = vec![0u64; node_count];
        for &v in corpus.walks.iter().flatten() {
            let c = counts.get_mut(v).ok_or_else(|| {
                Error::Validation(format!("walk node {v} outside graph of {node_count} nodes"))
            })?;
            *c += 1;
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { (c as f64).powf(exponent) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config("walk corpus is empty".into()));
        }
        let alias = WeightedAliasIndex::new(weights.clone())
            .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
        Ok(NoiseDistribution {
            probs: weights.iter().map(|w| w / total).collect(),
            alias,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainReport {
    pub pairs_per_epoch: usize,
    pub epoch_mean_loss: Vec<f64>,
}

struct Schedule {
    initial: f64,
    total: f64,
}

impl Schedule {
    /// Linear decay from the initial rate to initial / 1e4.
    fn rate(&self, done: usize) -> f64 {
        self.initial * (1.0 - done as f64 / self.total).max(1e-4)
    }
}

fn draw_negatives<R: Rng>(noise: &NoiseDistribution, context: usize, k: usize, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    while out.len() < k {
        let n = noise.sample(rng);
        // a single-node corpus has nothing else to offer
        if n != context || noise.probs[n] >= 1.0 {
            out.push(n);
        }
    }
}

fn train_walks<P: Params>(
    params: &mut P,
    walks: &[Vec<usize>],
    config: &EmbedConfig,
    noise: &NoiseDistribution,
    schedule: &Schedule,
    done_before: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, usize) {
    let mut scratch = Scratch::default();
    let mut negs = Vec::with_capacity(config.negatives);
    let (mut loss, mut done) = (0.0, 0usize);
    for walk in walks {
        for (center, context) in context_pairs(walk, config.window) {
            draw_negatives(noise, context, config.negatives, rng, &mut negs);
            let step = schedule.rate(done_before + done);
            loss += pair_update(params, center, context, &negs, step, &mut scratch);
            done += 1;
        }
    }
    (loss, done)
}

/// Seeded starting point of training: input rows uniform in
/// `[-0.5/d, 0.5/d)`, context rows zero.
pub fn initial_matrix(ids: Vec<String>, config: &EmbedConfig) -> EmbeddingMatrix {
    let mut m = EmbeddingMatrix::zeros(ids, config.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / config.dim as f64;
    m.input.iter_mut().for_each(|x| *x = rng.random_range(-half..half));
    m
}

/// Trains node features on a walk corpus. `ids` fixes the row order.
pub fn train(
    corpus: &WalkCorpus,
    ids: &[String],
    config: &EmbedConfig,
) -> Result<(EmbeddingMatrix, TrainReport)> {
    config.validate()?;
    let pairs_per_epoch: usize = corpus
        .walks
        .iter()
        .map(|w| pairs_in_walk(w.len(), config.window))
        .sum();
    if corpus.is_empty() || pairs_per_epoch == 0 {
        return Err(Error::Config("walk corpus yields no training pairs".into()));
    }
    let noise = NoiseDistribution::from_corpus(corpus, ids.len(), config.noise_exponent)?;
    let mut matrix = initial_matrix(ids.to_vec(), config);
    let schedule = Schedule {
        initial: config.learning_rate,
        total: (pairs_per_epoch * config.epochs) as f64,
    };
    let mut report = TrainReport {
        pairs_per_epoch,
        epoch_mean_loss: Vec::with_capacity(config.epochs),
    };
    let workers = if config.deterministic { 1 } else { config.workers.max(1) };

    if workers == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
        for epoch in 0..config.epochs {
            let (loss, done) = train_walks(
                &mut matrix,
                &corpus.walks,
                config,
                &noise,
                &schedule,
                epoch * pairs_per_epoch,
                &mut rng,
            );
            report.epoch_mean_loss.push(loss / done as f64);
            log::debug!("epoch {epoch}: mean loss {:.5}", loss / done as f64);
        }
    } else {
        let shared = SharedParams::from_matrix(&matrix);
        let chunk = corpus.walks.len().div_ceil(workers);
        for epoch in 0..config.epochs {
            let results: Vec<(f64, usize)> = std::thread::scope(|scope| {
                let handles: Vec<_> = corpus
                    .walks
                    .chunks(chunk)
                    .enumerate()
                    .map(|(w, walks)| {
                        let (shared, noise, schedule) = (&shared, &noise, &schedule);
                        // each worker decays the rate as if it ran the whole epoch share
                        let offset = epoch * pairs_per_epoch;
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(
                                config.seed ^ ((epoch as u64) << 32 | w as u64),
                            );
                            let mut view = SharedView(shared);
                            train_walks(&mut view, walks, config, noise, schedule, offset, &mut rng)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            let (loss, done) = results
                .iter()
                .fold((0.0, 0), |(l, d), (wl, wd)| (l + wl, d + wd));
            report.epoch_mean_loss.push(loss / done as f64);
        }
        shared.store_into(&mut matrix);
    }

    if !matrix.is_finite() {
        return Err(Error::Validation(
            "training diverged to non-finite parameters; lower the learning rate".into(),
        ));
    }
    Ok((matrix, report))
}

/// Full-softmax probability of `v` given `u` over node features:
/// `exp(f(v)·f(u)) / Σ_t exp(f(t)·f(u))`.
pub fn softmax_prob(v: usize, u: usize, embedding: &EmbeddingMatrix) -> f64 {
    let fu = embedding.row(u);
    let scores: Vec<f64> = (0..embedding.node_count())
        .map(|t| dot(embedding.row(t), fu))
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    (scores[v] - max).exp() / z
}

/// ln Z_u = ln Σ_t exp(f(t)·f(u)).
pub fn log_partition(u: usize, embedding: &EmbeddingMatrix) -> f64 {
    let fu = embedding.row(u);
    let scores: Vec<f64> = (0..embedding.node_count())
        .map(|t| dot(embedding.row(t), fu))
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// Exact neighborhood log-likelihood `Σ_(u,t) [f(t)·f(u) - ln Z_u]` over
/// every context pair of the corpus.
pub fn exact_objective(corpus: &WalkCorpus, window: usize, embedding: &EmbeddingMatrix) -> f64 {
    let log_z: Vec<f64> = (0..embedding.node_count())
        .map(|u| log_partition(u, embedding))
        .collect();
    generate_contexts(corpus, window)
        .map(|(u, t)| dot(embedding.row(t), embedding.row(u)) - log_z[u])
        .sum()
}
