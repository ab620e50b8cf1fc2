use std::collections::{BTreeMap, BTreeSet};

use enwalk::graph::{load_graph, read_labels, write_edges, write_labels, write_users, GraphBuilder, UserRecord, View};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = UserRecord> {
    (
        0u64..500,
        0u64..500,
        prop::collection::btree_set(0u32..300, 0..20),
        (0u64..200, 0u64..200),
        prop::collection::btree_map("[a-z@#]{1,6}", 1u64..9, 0..5),
        prop::array::uniform8(0.0f64..1e4),
        prop::option::of(any::<bool>()),
    )
        .prop_map(|(followers, followings, active_days, (a, b), mentions, trust_features, suspended)| UserRecord {
            followers,
            followings,
            active_days,
            fraud_tweets: a.min(b),
            total_tweets: a.max(b),
            mentions,
            trust_features,
            suspended,
        })
}

fn network() -> impl Strategy<Value = (Vec<UserRecord>, Vec<(usize, usize, f64)>)> {
    prop::collection::vec(record(), 1..25).prop_flat_map(|records| {
        let n = records.len();
        let edges = prop::collection::vec((0..n, 0..n, 0.01f64..10.0), 0..60);
        (Just(records), edges)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn files_round_trip((records, edges) in network()) {
        let mut builder = GraphBuilder::new();
        for (i, r) in records.iter().enumerate() {
            builder.add_user(&format!("user{i}"), r.clone()).unwrap();
        }
        for &(s, d, w) in &edges {
            builder.add_edge(&format!("user{s}"), &format!("user{d}"), w).unwrap();
        }
        let graph = builder.build();

        // builder invariants: no self-loops, sorted unique neighbors, symmetric undirected view
        let loops = edges.iter().filter(|(s, d, _)| s == d).count();
        prop_assert_eq!(graph.stats().self_loops_dropped, loops);
        let distinct: BTreeSet<(usize, usize)> = edges.iter().filter(|(s, d, _)| s != d).map(|&(s, d, _)| (s, d)).collect();
        prop_assert_eq!(graph.edge_count(), distinct.len());
        let und = graph.adjacency(View::Undirected);
        for v in 0..graph.node_count() {
            let nb = graph.out_adjacency().neighbors(v);
            prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(!nb.contains(&v));
            for &x in und.neighbors(v) {
                prop_assert!(und.contains(x, v));
            }
        }

        let dir = tempfile::tempdir().unwrap();
        let (e, u, l) = (dir.path().join("e.tsv"), dir.path().join("u.jsonl"), dir.path().join("l.tsv"));
        write_edges(&graph, &e).unwrap();
        write_users(&graph, &u).unwrap();
        write_labels(&graph, &l).unwrap();
        let mut back = load_graph(&e, &u).unwrap();
        back.apply_labels(&read_labels(&l).unwrap()).unwrap();

        prop_assert_eq!(back.ids(), graph.ids());
        prop_assert_eq!(back.records(), graph.records());
        let as_map = |g: &enwalk::graph::SpamGraph| -> BTreeMap<(usize, usize), u64> {
            g.edges().map(|(s, d, w)| ((s, d), w.to_bits())).collect()
        };
        prop_assert_eq!(as_map(&back), as_map(&graph));
        prop_assert_eq!(back.stats().duplicate_edges_merged, 0);
    }
}
