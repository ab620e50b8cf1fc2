//! Directed follower graph with per-node behavioral records.
//!
//! An edge `u -> v` means "u follows v". Nodes are indexed densely in
//! insertion order: first every record of the users file, then any node that
//! only shows up in the edge list.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trust features attached to every user.
pub const TRUST_FEATURES: usize = 8;

/// Names of the trust features, in storage order.
pub const TRUST_FEATURE_NAMES: [&str; TRUST_FEATURES] = [
    "blacklist_urls",
    "tweets",
    "mentions",
    "duplicate_tweets",
    "adult_word_tweets",
    "violent_word_tweets",
    "promotional_word_tweets",
    "activity_days",
];

/// Behavioral counters of a single user.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub followers: u64,
    pub followings: u64,
    /// Day indices (since dataset epoch) on which the user posted.
    pub active_days: BTreeSet<u32>,
    pub fraud_tweets: u64,
    pub total_tweets: u64,
    /// Mention token (handle or hashtag) to number of uses.
    pub mentions: BTreeMap<String, u64>,
    #[serde(default)]
    pub trust_features: [f64; TRUST_FEATURES],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspended: Option<bool>,
}

impl UserRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.fraud_tweets > self.total_tweets {
            return Err(format!(
                "fraud_tweets ({}) exceeds total_tweets ({})",
                self.fraud_tweets, self.total_tweets
            ));
        }
        if let Some((token, _)) = self.mentions.iter().find(|(_, &c)| c == 0) {
            return Err(format!("mention `{token}` has a zero count"));
        }
        if let Some(x) = self
            .trust_features
            .iter()
            .find(|x| !x.is_finite() || **x < 0.0)
        {
            return Err(format!("trust feature {x} is not a finite non-negative number"));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct UserLine {
    id: String,
    #[serde(flatten)]
    record: UserRecord,
}

/// Which adjacency the consumers of the graph traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum View {
    /// Follow `u -> v` edges forward only.
    #[default]
    Out,
    /// Treat every follow edge as symmetric; reciprocal pairs merge and
    /// their weights add up.
    Undirected,
}

impl std::str::FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out" => Ok(View::Out),
            "undirected" => Ok(View::Undirected),
            other => Err(Error::Config(format!(
                "unknown direction `{other}` (expected out|undirected)"
            ))),
        }
    }
}

/// Compressed adjacency: neighbors of `v` are `targets[offsets[v]..offsets[v+1]]`,
/// sorted ascending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Adjacency {
    fn from_sorted(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(s, _, _) in edges {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency {
            offsets,
            targets: edges.iter().map(|e| e.1).collect(),
            weights: edges.iter().map(|e| e.2).collect(),
        }
    }

    #[inline]
    pub fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.range(v)]
    }

    #[inline]
    pub fn weights(&self, v: usize) -> &[f64] {
        &self.weights[self.range(v)]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Global slot of edge `v -> x`, if present.
    pub fn position(&self, v: usize, x: usize) -> Option<usize> {
        self.neighbors(v)
            .binary_search(&x)
            .ok()
            .map(|i| self.offsets[v] + i)
    }

    #[inline]
    pub fn contains(&self, v: usize, x: usize) -> bool {
        self.neighbors(v).binary_search(&x).is_ok()
    }

    /// Total number of stored (directed) entries.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn target_at(&self, slot: usize) -> usize {
        self.targets[slot]
    }
}

/// Counters reported while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub self_loops_dropped: usize,
    pub duplicate_edges_merged: usize,
    pub defaulted_records: usize,
}

/// Immutable follower graph with behavioral data attached to every node.
#[derive(Debug, Clone)]
pub struct SpamGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    records: Vec<UserRecord>,
    defaulted: Vec<bool>,
    out: Adjacency,
    inc: Adjacency,
    undirected: Adjacency,
    stats: LoadStats,
}

impl SpamGraph {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of distinct directed edges.
    pub fn edge_count(&self) -> usize {
        self.out.len()
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Inverse of [`SpamGraph::node_index`].
    pub fn node_id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn record(&self, v: usize) -> &UserRecord {
        &self.records[v]
    }

    pub fn records(&self) -> &[UserRecord] {
        &self.records
    }

    /// True when the node appeared only in the edge list.
    pub fn is_defaulted(&self, v: usize) -> bool {
        self.defaulted[v]
    }

    pub fn stats(&self) -> LoadStats {
        self.stats
    }

    pub fn out_adjacency(&self) -> &Adjacency {
        &self.out
    }

    pub fn in_adjacency(&self) -> &Adjacency {
        &self.inc
    }

    pub fn adjacency(&self, view: View) -> &Adjacency {
        match view {
            View::Out => &self.out,
            View::Undirected => &self.undirected,
        }
    }

    /// All directed edges `(src, dst, weight)` ordered by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |v| {
            self.out
                .neighbors(v)
                .iter()
                .zip(self.out.weights(v))
                .map(move |(&x, &w)| (v, x, w))
        })
    }

    /// Per-node suspended labels as stored in the records.
    pub fn labels(&self) -> Vec<Option<bool>> {
        self.records.iter().map(|r| r.suspended).collect()
    }

    /// Overrides the `suspended` flag of the listed nodes.
    pub fn apply_labels(&mut self, labels: &[(String, bool)]) -> Result<()> {
        for (id, label) in labels {
            let v = self.node_index(id)?;
            self.records[v].suspended = Some(*label);
        }
        Ok(())
    }
}

/// Incremental construction of a [`SpamGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    records: Vec<Option<UserRecord>>,
    edges: HashMap<(usize, usize), f64>,
    edge_order: Vec<(usize, usize)>,
    stats: LoadStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.records.push(None);
        i
    }

    /// Registers a user record. A second record for the same id replaces the first.
    pub fn add_user(&mut self, id: &str, record: UserRecord) -> Result<usize> {
        record
            .validate()
            .map_err(|m| Error::Validation(format!("user `{id}`: {m}")))?;
        let i = self.intern(id);
        self.records[i] = Some(record);
        Ok(i)
    }

    /// Adds a follow edge; self-loops are dropped and duplicates merged by
    /// summing weights.
    pub fn add_edge(&mut self, src: &str, dst: &str, weight: f64) -> Result<()> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Validation(format!(
                "edge {src} -> {dst} has non-positive weight {weight}"
            )));
        }
        let s = self.intern(src);
        let d = self.intern(dst);
        if s == d {
            self.stats.self_loops_dropped += 1;
            return Ok(());
        }
        match self.edges.get_mut(&(s, d)) {
            Some(w) => {
                *w += weight;
                self.stats.duplicate_edges_merged += 1;
            }
            None => {
                self.edges.insert((s, d), weight);
                self.edge_order.push((s, d));
            }
        }
        Ok(())
    }

    pub fn build(self) -> SpamGraph {
        let n = self.ids.len();
        let mut stats = self.stats;
        let defaulted: Vec<bool> = self.records.iter().map(Option::is_none).collect();
        stats.defaulted_records = defaulted.iter().filter(|&&d| d).count();
        let records: Vec<UserRecord> = self
            .records
            .into_iter()
            .map(Option::unwrap_or_default)
            .collect();

        let mut forward: Vec<(usize, usize, f64)> = self
            .edge_order
            .iter()
            .map(|&(s, d)| (s, d, self.edges[&(s, d)]))
            .collect();
        forward.sort_unstable_by_key(|e| (e.0, e.1));
        let mut backward: Vec<(usize, usize, f64)> =
            forward.iter().map(|&(s, d, w)| (d, s, w)).collect();
        backward.sort_unstable_by_key(|e| (e.0, e.1));

        let mut both: Vec<(usize, usize, f64)> = forward.iter().chain(&backward).copied().collect();
        both.sort_unstable_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(both.len());
        for (s, d, w) in both {
            match merged.last_mut() {
                Some(last) if last.0 == s && last.1 == d => last.2 += w,
                _ => merged.push((s, d, w)),
            }
        }

        SpamGraph {
            out: Adjacency::from_sorted(n, &forward),
            inc: Adjacency::from_sorted(n, &backward),
            undirected: Adjacency::from_sorted(n, &merged),
            ids: self.ids,
            index: self.index,
            records,
            defaulted,
            stats,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Iterates the non-blank, non-comment lines of a text file with 1-based line numbers.
pub(crate) fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.to_string()));
    }
    Ok(out)
}

pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Reads `users.jsonl` records into the builder, in file order.
pub fn read_users(builder: &mut GraphBuilder, path: &Path) -> Result<()> {
    for (line_no, line) in data_lines(path)? {
        let parsed: UserLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        parsed
            .record
            .validate()
            .map_err(|m| Error::parse(path, line_no, m))?;
        builder.add_user(&parsed.id, parsed.record)?;
    }
    Ok(())
}

/// Reads `src<TAB>dst[<TAB>weight]` lines into the builder.
pub fn read_edges(builder: &mut GraphBuilder, path: &Path) -> Result<()> {
    for (line_no, line) in data_lines(path)? {
        let fields: Vec<&str> = line.split('\t').collect();
        let (src, dst, weight) = match fields.as_slice() {
            [s, d] => (*s, *d, 1.0),
            [s, d, w] => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("bad weight `{w}`")))?;
                (*s, *d, w)
            }
            _ => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
                ))
            }
        };
        if src.is_empty() || dst.is_empty() {
            return Err(Error::parse(path, line_no, "empty node id"));
        }
        builder.add_edge(src, dst, weight).map_err(|e| match e {
            Error::Validation(m) => Error::parse(path, line_no, m),
            other => other,
        })?;
    }
    Ok(())
}

/// Loads a graph from an edge list and a users file.
pub fn load_graph(edges_path: &Path, users_path: &Path) -> Result<SpamGraph> {
    let mut builder = GraphBuilder::new();
    read_users(&mut builder, users_path)?;
    read_edges(&mut builder, edges_path)?;
    let graph = builder.build();
    let s = graph.stats();
    if s.self_loops_dropped + s.duplicate_edges_merged + s.defaulted_records > 0 {
        log::warn!(
            "ingest: dropped {} self-loops, merged {} duplicate edges, defaulted {} records",
            s.self_loops_dropped,
            s.duplicate_edges_merged,
            s.defaulted_records
        );
    }
    Ok(graph)
}

/// Reads `node<TAB>0|1` lines.
pub fn read_labels(path: &Path) -> Result<Vec<(String, bool)>> {
    data_lines(path)?
        .into_iter()
        .map(|(line_no, line)| {
            let (id, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected `node<TAB>0|1`"))?;
            let label = match value.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::parse(path, line_no, format!("label must be 0 or 1, got `{other}`")))
                }
            };
            Ok((id.to_string(), label))
        })
        .collect()
}

pub fn write_edges(graph: &SpamGraph, path: &Path) -> Result<()> {
    write_file(path, |w| {
        for (s, d, weight) in graph.edges() {
            writeln!(w, "{}\t{}\t{}", graph.node_id(s), graph.node_id(d), weight)?;
        }
        Ok(())
    })
}

/// Writes every node's record, defaulted ones included, in index order.
pub fn write_users(graph: &SpamGraph, path: &Path) -> Result<()> {
    write_file(path, |w| {
        for (id, record) in graph.ids().iter().zip(graph.records()) {
            let line = serde_json::to_string(&UserLine {
                id: id.clone(),
                record: record.clone(),
            })
            .map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

pub fn write_labels(graph: &SpamGraph, path: &Path) -> Result<()> {
    write_file(path, |w| {
        for (id, record) in graph.ids().iter().zip(graph.records()) {
            if let Some(label) = record.suspended {
                writeln!(w, "{}\t{}", id, u8::from(label))?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(id: &str) -> String {
        format!(
            r#"{{"id":"{id}","followers":1,"followings":1,"active_days":[1],"fraud_tweets":0,"total_tweets":2,"mentions":{{}}}}"#
        )
    }

    fn load(edges: &str, users: &[String]) -> Result<SpamGraph> {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("edges.tsv");
        let u = dir.path().join("users.jsonl");
        std::fs::write(&e, edges).unwrap();
        std::fs::write(&u, users.join("\n")).unwrap();
        load_graph(&e, &u)
    }

    #[test]
    fn minimal_graph() {
        let g = load("a\tb\nb\ta\n", &[user("a"), user("b")]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.stats(), LoadStats::default());
    }

    #[test]
    fn self_loop_dropped() {
        let g = load("a\ta\na\tb\n", &[user("a"), user("b")]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.stats().self_loops_dropped, 1);
    }

    #[test]
    fn edge_only_node_defaults() {
        let g = load("a\tb\n", &[user("a")]).unwrap();
        let b = g.node_index("b").unwrap();
        assert!(g.is_defaulted(b));
        assert_eq!(g.record(b), &UserRecord::default());
        assert_eq!(g.stats().defaulted_records, 1);
    }

    #[test]
    fn duplicates_sum_weights() {
        let g = load("# header\na\tb\t2.5\na\tb\n", &[user("a"), user("b")]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 3.5)]);
        assert_eq!(g.stats().duplicate_edges_merged, 1);
    }

    #[test]
    fn indexing_is_insertion_order() {
        let g = load("z\ty\n", &[user("b"), user("a")]).unwrap();
        assert_eq!(g.node_index("b").unwrap(), 0);
        assert_eq!(g.node_index("a").unwrap(), 1);
        assert_eq!(g.node_index("z").unwrap(), 2);
        assert_eq!(g.node_id(g.node_index("a").unwrap()), "a");
        assert!(matches!(g.node_index("never-seen"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn malformed_line_names_line_number() {
        let err = load("a\tb\nbogus\n", &[user("a")]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load("a\tb\t-1\n", &[user("a")]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = load("a\tb\n", &["{not json".to_string()]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn fraud_exceeding_total_rejected() {
        let bad = r#"{"id":"a","followers":0,"followings":0,"active_days":[],"fraud_tweets":3,"total_tweets":2,"mentions":{}}"#;
        assert!(load("", &[bad.to_string()]).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_graph(Path::new("/nonexistent/e"), Path::new("/nonexistent/u")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn undirected_view_merges_reciprocal_edges() {
        let g = load("a\tb\nb\ta\t2\nb\tc\n", &[user("a"), user("b"), user("c")]).unwrap();
        let und = g.adjacency(View::Undirected);
        assert_eq!(und.neighbors(0), &[1]);
        assert_eq!(und.weights(0), &[3.0]);
        assert_eq!(und.neighbors(1), &[0, 2]);
        assert_eq!(g.in_adjacency().neighbors(2), &[1]);
    }

    #[test]
    fn labels_override() {
        let mut g = load("a\tb\n", &[user("a"), user("b")]).unwrap();
        g.apply_labels(&[("b".into(), true)]).unwrap();
        assert_eq!(g.labels(), vec![None, Some(true)]);
    }
}
