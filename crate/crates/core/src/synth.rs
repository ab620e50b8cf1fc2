//! Synthetic follower networks with planted spammer cohorts.
//!
//! Normal users grow by preferential attachment. Two spammer cohorts are
//! wired on top: follow-flood accounts follow many users and are rarely
//! followed back, vigilant accounts follow selectively and are mostly
//! followed back. Record counters are taken from the generated edges, so a
//! node's success rate is fixed by the wiring itself.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Binomial, Distribution, Normal, Zipf};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{write_edges, write_file, write_labels, write_users, GraphBuilder, SpamGraph, UserRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Normal,
    Vigilant,
    FollowFlood,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Normal => "normal",
            Role::Vigilant => "vigilant",
            Role::FollowFlood => "follow-flood",
        }
    }

    pub fn is_spammer(self) -> bool {
        self != Role::Normal
    }
}

/// Behavior of one spammer cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortParams {
    pub window_mean: f64,
    pub window_sd: f64,
    pub fraud_mean: f64,
    /// Mention uses per tweet.
    pub mention_rate: f64,
    /// Accounts followed at wiring time, drawn uniformly from this range.
    pub follows: (usize, usize),
    /// Share of follows aimed at the node's own cohort.
    pub cohort_follow_share: f64,
    /// Probability that a followed normal user follows back.
    pub normal_follow_back: f64,
    /// Probability that a followed cohort member follows back.
    pub cohort_follow_back: f64,
    /// Tweets posted, drawn uniformly from this range.
    pub tweets: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub nodes: usize,
    pub spam_fraction: f64,
    /// Share of spammers that are vigilant; the rest flood.
    pub vigilant_fraction: f64,
    pub seed: u64,
    /// Follows made by each arriving normal user, drawn from this range.
    pub normal_follows: (usize, usize),
    pub normal_follow_back: f64,
    pub normal_fraud_mean: f64,
    pub normal_mention_rate: f64,
    pub normal_tweets: (u64, u64),
    /// Per-day activity probability of normal users, drawn from this range.
    pub normal_activity: (f64, f64),
    pub vigilant: CohortParams,
    pub follow_flood: CohortParams,
    /// Probability that a spammer is active on a day inside its window.
    pub campaign_activity: f64,
    /// Spread of window starts around the cohort's campaign start, in days.
    pub campaign_jitter: u32,
    /// Larger values concentrate per-user fraudulence around its mean.
    pub fraud_concentration: f64,
    /// Length of the observation period in days.
    pub span_days: u32,
    /// General mention vocabulary; used with Zipf-distributed popularity.
    pub vocabulary: usize,
    pub zipf_exponent: f64,
    /// Tokens reserved for each spammer cohort.
    pub cohort_tokens: usize,
    /// Share of a spammer's mentions drawn from its cohort tokens.
    pub cohort_mention_share: f64,
    /// Nodes given a trust label, split evenly between classes when possible.
    pub trust_labels: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            nodes: 2000,
            spam_fraction: 0.05,
            vigilant_fraction: 0.5,
            seed: 0,
            normal_follows: (3, 12),
            normal_follow_back: 0.2,
            normal_fraud_mean: 0.02,
            normal_mention_rate: 0.3,
            normal_tweets: (20, 300),
            normal_activity: (0.05, 0.5),
            vigilant: CohortParams {
                window_mean: 138.0,
                window_sd: 19.0,
                fraud_mean: 0.34,
                mention_rate: 0.25,
                follows: (10, 25),
                cohort_follow_share: 0.3,
                normal_follow_back: 0.7,
                cohort_follow_back: 0.5,
                tweets: (100, 500),
            },
            follow_flood: CohortParams {
                window_mean: 35.0,
                window_sd: 12.0,
                fraud_mean: 0.86,
                mention_rate: 0.5,
                follows: (40, 80),
                cohort_follow_share: 0.15,
                normal_follow_back: 0.05,
                cohort_follow_back: 0.3,
                tweets: (200, 800),
            },
            campaign_activity: 0.6,
            campaign_jitter: 5,
            fraud_concentration: 10.0,
            span_days: 214,
            vocabulary: 1000,
            zipf_exponent: 1.1,
            cohort_tokens: 15,
            cohort_mention_share: 0.9,
            trust_labels: 400,
        }
    }
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")))
    }
}

fn check_range<T: PartialOrd + std::fmt::Debug>(name: &str, r: (T, T)) -> Result<()> {
    if r.0 <= r.1 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} range {r:?} is empty")))
    }
}

impl SynthConfig {
    /// `(normal, vigilant, follow_flood)` cohort sizes.
    pub fn cohort_sizes(&self) -> (usize, usize, usize) {
        let spam = (self.nodes as f64 * self.spam_fraction).round() as usize;
        let vigilant = (spam as f64 * self.vigilant_fraction).round() as usize;
        (self.nodes - spam, vigilant, spam - vigilant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 10 {
            return Err(Error::Config(format!("need at least 10 nodes, got {}", self.nodes)));
        }
        check_prob("spam fraction", self.spam_fraction)?;
        check_prob("vigilant fraction", self.vigilant_fraction)?;
        check_prob("normal follow-back", self.normal_follow_back)?;
        check_prob("normal fraud mean", self.normal_fraud_mean)?;
        check_prob("campaign activity", self.campaign_activity)?;
        check_prob("cohort mention share", self.cohort_mention_share)?;
        check_range("normal follows", self.normal_follows)?;
        check_range("normal tweets", self.normal_tweets)?;
        check_range("normal activity", self.normal_activity)?;
        check_prob("normal activity", self.normal_activity.0)?;
        check_prob("normal activity", self.normal_activity.1)?;
        for (name, c) in [("vigilant", &self.vigilant), ("follow-flood", &self.follow_flood)] {
            check_prob(&format!("{name} fraud mean"), c.fraud_mean)?;
            check_prob(&format!("{name} cohort follow share"), c.cohort_follow_share)?;
            check_prob(&format!("{name} normal follow-back"), c.normal_follow_back)?;
            check_prob(&format!("{name} cohort follow-back"), c.cohort_follow_back)?;
            check_range(&format!("{name} follows"), c.follows)?;
            check_range(&format!("{name} tweets"), c.tweets)?;
            if !(c.window_mean > 0.0 && c.window_sd >= 0.0 && c.mention_rate >= 0.0) {
                return Err(Error::Config(format!("{name} window and mention rate must be non-negative")));
            }
        }
        if self.span_days == 0 || self.vocabulary == 0 || self.cohort_tokens == 0 {
            return Err(Error::Config("span, vocabulary and cohort tokens must be positive".into()));
        }
        if !(self.fraud_concentration > 0.0 && self.zipf_exponent >= 0.0) {
            return Err(Error::Config("fraud concentration must be positive".into()));
        }
        let (normal, vigilant, flood) = self.cohort_sizes();
        if self.spam_fraction > 0.0 && vigilant + flood == 0 {
            return Err(Error::Config(format!(
                "spam fraction {} of {} nodes plants no spammer",
                self.spam_fraction, self.nodes
            )));
        }
        if normal < 2 {
            return Err(Error::Config("at least two normal users are required".into()));
        }
        Ok(())
    }
}

/// A generated network with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthNetwork {
    /// Records carry `suspended = Some(is_spammer)`.
    pub graph: SpamGraph,
    /// Role of every node, in graph index order.
    pub roles: Vec<Role>,
    /// `(node, trust score)` pairs for fitting the trust model.
    pub trust_labels: Vec<(String, f64)>,
}

impl SynthNetwork {
    pub fn labels(&self) -> Vec<bool> {
        self.roles.iter().map(|r| r.is_spammer()).collect()
    }

    /// Writes `edges.tsv`, `users.jsonl`, `labels.tsv`, `trust_labels.tsv`
    /// and `roles.tsv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_edges(&self.graph, &dir.join("edges.tsv"))?;
        write_users(&self.graph, &dir.join("users.jsonl"))?;
        write_labels(&self.graph, &dir.join("labels.tsv"))?;
        write_file(&dir.join("trust_labels.tsv"), |w| {
            for (id, t) in &self.trust_labels {
                writeln!(w, "{id}\t{t:.6}")?;
            }
            Ok(())
        })?;
        write_file(&dir.join("roles.tsv"), |w| {
            for (id, role) in self.graph.ids().iter().zip(&self.roles) {
                writeln!(w, "{id}\t{}", role.name())?;
            }
            Ok(())
        })
    }
}

/// Edge set under construction.
struct Wiring {
    edges: Vec<(usize, usize)>,
    present: HashSet<(usize, usize)>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
}

impl Wiring {
    fn new(n: usize) -> Self {
        Wiring {
            edges: Vec::new(),
            present: HashSet::new(),
            out_deg: vec![0; n],
            in_deg: vec![0; n],
        }
    }

    fn add(&mut self, s: usize, d: usize) -> bool {
        if s == d || !self.present.insert((s, d)) {
            return false;
        }
        self.edges.push((s, d));
        self.out_deg[s] += 1;
        self.in_deg[d] += 1;
        true
    }

    fn has(&self, s: usize, d: usize) -> bool {
        self.present.contains(&(s, d))
    }
}

fn beta_with_mean(mean: f64, concentration: f64) -> Result<Option<Beta<f64>>> {
    if mean <= 0.0 || mean >= 1.0 {
        return Ok(None);
    }
    Beta::new(mean * concentration, (1.0 - mean) * concentration)
        .map(Some)
        .map_err(|e| Error::Config(format!("fraudulence distribution: {e}")))
}

fn draw_fraud(dist: &Option<Beta<f64>>, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    match dist {
        Some(b) => b.sample(rng),
        None => mean,
    }
}

/// Picks a normal user not yet linked with `v` in the given direction.
fn fresh_normal(
    wiring: &Wiring,
    normals: &[usize],
    rng: &mut ChaCha8Rng,
    linked: impl Fn(&Wiring, usize) -> bool,
) -> Option<usize> {
    for _ in 0..64 {
        let &x = normals.choose(rng)?;
        if !linked(wiring, x) {
            return Some(x);
        }
    }
    let free: Vec<usize> = normals.iter().copied().filter(|&x| !linked(wiring, x)).collect();
    free.choose(rng).copied()
}

pub fn generate(config: &SynthConfig) -> Result<SynthNetwork> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.nodes;
    let (n_normal, n_vig, n_flood) = config.cohort_sizes();

    // roles scattered over node ids
    let mut roles: Vec<Role> = std::iter::repeat_n(Role::Normal, n_normal)
        .chain(std::iter::repeat_n(Role::Vigilant, n_vig))
        .chain(std::iter::repeat_n(Role::FollowFlood, n_flood))
        .collect();
    roles.shuffle(&mut rng);
    let members = |role: Role| -> Vec<usize> { (0..n).filter(|&i| roles[i] == role).collect() };
    let normals = members(Role::Normal);
    let vigilant = members(Role::Vigilant);
    let flood = members(Role::FollowFlood);

    let mut wiring = Wiring::new(n);

    // normal users: preferential attachment on in-degree, in a random arrival order
    let mut arrival = normals.clone();
    arrival.shuffle(&mut rng);
    // one entry per node plus one per received follow
    let mut urn: Vec<usize> = Vec::with_capacity(n * 8);
    for (k, &v) in arrival.iter().enumerate() {
        if k > 0 {
            let want = rng.random_range(config.normal_follows.0..=config.normal_follows.1).min(k);
            let mut made = 0;
            let mut attempts = 0;
            while made < want && attempts < 50 * want {
                attempts += 1;
                let x = urn[rng.random_range(0..urn.len())];
                if wiring.add(v, x) {
                    urn.push(x);
                    made += 1;
                    if rng.random_bool(config.normal_follow_back) && wiring.add(x, v) {
                        urn.push(v);
                    }
                }
            }
        }
        urn.push(v);
    }

    let cohorts = [
        (&vigilant, &config.vigilant, false),
        (&flood, &config.follow_flood, true),
    ];
    for (cohort, params, popular_targets) in cohorts {
        for &v in cohort.iter() {
            let want = rng.random_range(params.follows.0..=params.follows.1);
            let mut made = 0;
            let mut attempts = 0;
            while made < want && attempts < 50 * want {
                attempts += 1;
                let (x, follow_back) = if cohort.len() > 1 && rng.random_bool(params.cohort_follow_share) {
                    (*cohort.choose(&mut rng).expect("non-empty"), params.cohort_follow_back)
                } else if popular_targets {
                    // flooding aims at well-followed accounts
                    let x = urn[rng.random_range(0..urn.len())];
                    (x, params.normal_follow_back)
                } else {
                    (*normals.choose(&mut rng).expect("normals exist"), params.normal_follow_back)
                };
                if wiring.add(v, x) {
                    made += 1;
                    if rng.random_bool(follow_back) {
                        wiring.add(x, v);
                    }
                }
            }
        }
    }

    // structural guarantees: floods follow more than they are followed,
    // vigilant accounts are followed at least as much as they follow
    for &v in &flood {
        while wiring.out_deg[v] <= wiring.in_deg[v] {
            let x = fresh_normal(&wiring, &normals, &mut rng, |w, x| w.has(v, x)).ok_or_else(|| {
                Error::Config("too few normal users to keep follow-flood success rate below 1".into())
            })?;
            wiring.add(v, x);
        }
    }
    for &v in &vigilant {
        while wiring.in_deg[v] < wiring.out_deg[v] {
            let x = fresh_normal(&wiring, &normals, &mut rng, |w, x| w.has(x, v)).ok_or_else(|| {
                Error::Config("too few normal users to keep vigilant success rate at least 1".into())
            })?;
            wiring.add(x, v);
        }
    }

    // behavioral records
    let span = config.span_days;
    let window_len = |params: &CohortParams, rng: &mut ChaCha8Rng| -> Result<u32> {
        let d = Normal::new(params.window_mean, params.window_sd)
            .map_err(|e| Error::Config(format!("activity window distribution: {e}")))?;
        Ok(d.sample(rng).round().clamp(1.0, f64::from(span)) as u32)
    };
    let campaign_start = |params: &CohortParams, rng: &mut ChaCha8Rng| -> u32 {
        let typical = (params.window_mean.round() as u32).clamp(1, span);
        rng.random_range(0..=span - typical)
    };
    let vig_start = campaign_start(&config.vigilant, &mut rng);
    let flood_start = campaign_start(&config.follow_flood, &mut rng);
    let zipf = Zipf::new(config.vocabulary as f64, config.zipf_exponent)
        .map_err(|e| Error::Config(format!("mention vocabulary: {e}")))?;
    let beta_normal = beta_with_mean(config.normal_fraud_mean, config.fraud_concentration * 5.0)?;
    let beta_vig = beta_with_mean(config.vigilant.fraud_mean, config.fraud_concentration)?;
    let beta_flood = beta_with_mean(config.follow_flood.fraud_mean, config.fraud_concentration)?;

    let width = (n - 1).to_string().len();
    let ids: Vec<String> = (0..n).map(|i| format!("u{i:0width$}")).collect();
    let mut records = Vec::with_capacity(n);
    for v in 0..n {
        let role = roles[v];
        let (tweets, fraud, mention_rate, days, pool) = match role {
            Role::Normal => {
                let rate = rng.random_range(config.normal_activity.0..=config.normal_activity.1);
                let mut days: BTreeSet<u32> = (0..span).filter(|_| rng.random_bool(rate)).collect();
                if days.is_empty() {
                    days.insert(rng.random_range(0..span));
                }
                let tweets = rng.random_range(config.normal_tweets.0..=config.normal_tweets.1);
                let fr = draw_fraud(&beta_normal, config.normal_fraud_mean, &mut rng);
                (tweets, fr, config.normal_mention_rate, days, None)
            }
            Role::Vigilant | Role::FollowFlood => {
                let (params, start, beta, tag) = if role == Role::Vigilant {
                    (&config.vigilant, vig_start, &beta_vig, 'v')
                } else {
                    (&config.follow_flood, flood_start, &beta_flood, 'f')
                };
                let len = window_len(params, &mut rng)?;
                let jitter = rng.random_range(0..=2 * config.campaign_jitter) as i64 - i64::from(config.campaign_jitter);
                let lo = (i64::from(start) + jitter).clamp(0, i64::from(span - len)) as u32;
                let hi = lo + len - 1;
                let mut days: BTreeSet<u32> = (lo..=hi).filter(|_| rng.random_bool(config.campaign_activity)).collect();
                days.insert(lo);
                days.insert(hi);
                let tweets = rng.random_range(params.tweets.0..=params.tweets.1);
                let fr = draw_fraud(beta, params.fraud_mean, &mut rng);
                (tweets, fr, params.mention_rate, days, Some(tag))
            }
        };
        let fraud_tweets = ((fraud.clamp(0.0, 1.0) * tweets as f64).round() as u64).min(tweets);
        let uses = Binomial::new(tweets, mention_rate.min(1.0))
            .map_err(|e| Error::Config(format!("mention rate: {e}")))?
            .sample(&mut rng);
        let mut mentions: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..uses {
            let token = match pool {
                Some(tag) if rng.random_bool(config.cohort_mention_share) => {
                    format!("#{tag}{}", rng.random_range(0..config.cohort_tokens))
                }
                _ => format!("@h{}", zipf.sample(&mut rng) as u64),
            };
            *mentions.entry(token).or_insert(0) += 1;
        }
        let fr = fraud_tweets as f64 / tweets.max(1) as f64;
        let binom = |p: f64, rng: &mut ChaCha8Rng| -> u64 {
            Binomial::new(tweets, p.clamp(0.0, 1.0)).map(|b| b.sample(rng)).unwrap_or(0)
        };
        let trust_features = [
            binom(0.4 * fr, &mut rng) as f64,
            tweets as f64,
            uses as f64,
            binom(0.02 + 0.3 * fr, &mut rng) as f64,
            binom(0.1 * fr, &mut rng) as f64,
            binom(0.05 * fr, &mut rng) as f64,
            binom(0.01 + 0.3 * fr, &mut rng) as f64,
            days.len() as f64,
        ];
        records.push(UserRecord {
            followers: wiring.in_deg[v] as u64,
            followings: wiring.out_deg[v] as u64,
            active_days: days,
            fraud_tweets,
            total_tweets: tweets,
            mentions,
            trust_features,
            suspended: Some(role.is_spammer()),
        });
    }

    // trust labels: high for normal users, low for spammers, with noise
    let noise = Normal::new(0.0, 0.08).expect("valid normal");
    let mut spam_ids: Vec<usize> = vigilant.iter().chain(&flood).copied().collect();
    spam_ids.sort_unstable();
    spam_ids.shuffle(&mut rng);
    let mut normal_ids = normals.clone();
    normal_ids.shuffle(&mut rng);
    let take_spam = spam_ids.len().min(config.trust_labels / 2);
    let take_normal = normal_ids.len().min(config.trust_labels - take_spam);
    let mut labeled: Vec<usize> = spam_ids[..take_spam].iter().chain(&normal_ids[..take_normal]).copied().collect();
    labeled.sort_unstable();
    let trust_labels = labeled
        .into_iter()
        .map(|v| {
            let r = &records[v];
            let fr = r.fraud_tweets as f64 / r.total_tweets.max(1) as f64;
            let base = if roles[v].is_spammer() { 0.35 } else { 0.85 };
            (ids[v].clone(), (base - 0.3 * fr + noise.sample(&mut rng)).clamp(0.0, 1.0))
        })
        .collect();

    let mut builder = GraphBuilder::new();
    for (id, record) in ids.iter().zip(records) {
        builder.add_user(id, record)?;
    }
    for &(s, d) in &wiring.edges {
        builder.add_edge(&ids[s], &ids[d], 1.0)?;
    }
    Ok(SynthNetwork {
        graph: builder.build(),
        roles,
        trust_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::node_stats;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            nodes: 400,
            spam_fraction: 0.1,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn success_rate_typology_holds_for_every_spammer() {
        let net = generate(&small(3)).unwrap();
        let g = &net.graph;
        for v in 0..g.node_count() {
            let r = g.record(v);
            assert_eq!(r.followers as usize, g.in_adjacency().degree(v));
            assert_eq!(r.followings as usize, g.out_adjacency().degree(v));
            match net.roles[v] {
                Role::FollowFlood => assert!(r.followings > r.followers),
                Role::Vigilant => assert!(r.followers >= r.followings),
                Role::Normal => {}
            }
        }
    }

    #[test]
    fn cohort_sizes_and_labels() {
        let net = generate(&small(1)).unwrap();
        let count = |role| net.roles.iter().filter(|&&r| r == role).count();
        assert_eq!(count(Role::Vigilant), 20);
        assert_eq!(count(Role::FollowFlood), 20);
        let labels = net.graph.labels();
        for (l, role) in labels.iter().zip(&net.roles) {
            assert_eq!(*l, Some(role.is_spammer()));
        }
        assert!(net.graph.stats().defaulted_records == 0);
    }

    #[test]
    fn no_spam_means_normal_baseline() {
        let net = generate(&SynthConfig {
            nodes: 300,
            spam_fraction: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!(net.roles.iter().all(|r| *r == Role::Normal));
        let mean: f64 =
            net.graph.records().iter().map(|r| node_stats(r).fraudulence).sum::<f64>() / 300.0;
        assert!(mean < 0.05, "{mean}");
    }

    #[test]
    fn seeded_determinism() {
        let a = generate(&small(9)).unwrap();
        let b = generate(&small(9)).unwrap();
        assert_eq!(a.graph.records(), b.graph.records());
        assert_eq!(a.graph.edges().collect::<Vec<_>>(), b.graph.edges().collect::<Vec<_>>());
        assert_eq!(a.roles, b.roles);
        assert_eq!(a.trust_labels, b.trust_labels);
        let c = generate(&small(10)).unwrap();
        assert_ne!(a.graph.records(), c.graph.records());
    }

    #[test]
    fn infeasible_configs_rejected() {
        let tiny_spam = SynthConfig {
            nodes: 20,
            spam_fraction: 0.01,
            ..Default::default()
        };
        assert!(matches!(generate(&tiny_spam), Err(Error::Config(_))));
        assert!(generate(&SynthConfig { nodes: 9, ..Default::default() }).is_err());
        assert!(generate(&SynthConfig { spam_fraction: 1.5, ..Default::default() }).is_err());
    }

    #[test]
    fn cohort_mentions_are_shared() {
        let net = generate(&small(4)).unwrap();
        let g = &net.graph;
        for v in 0..g.node_count() {
            let tag = match net.roles[v] {
                Role::Vigilant => "#v",
                Role::FollowFlood => "#f",
                Role::Normal => {
                    assert!(g.record(v).mentions.keys().all(|t| t.starts_with("@h")));
                    continue;
                }
            };
            let r = g.record(v);
            assert!(r.mentions.keys().any(|t| t.starts_with(tag)));
        }
    }

    #[test]
    fn files_reload() {
        let net = generate(&small(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        net.write(dir.path()).unwrap();
        let mut g = crate::graph::load_graph(&dir.path().join("edges.tsv"), &dir.path().join("users.jsonl")).unwrap();
        let labels = crate::graph::read_labels(&dir.path().join("labels.tsv")).unwrap();
        g.apply_labels(&labels).unwrap();
        assert_eq!(g.records(), net.graph.records());
        assert_eq!(g.edge_count(), net.graph.edge_count());
        let trust = crate::baselines::read_trust_labels(&g, &dir.path().join("trust_labels.tsv")).unwrap();
        assert_eq!(trust.len(), 400.min(net.trust_labels.len()));
    }
}
