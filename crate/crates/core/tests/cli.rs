use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn enwalk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enwalk"))
        .args(args)
        .current_dir(dir)
        .env_remove("ENWALK_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = enwalk(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

const GRAPH: [&str; 4] = ["--edges", "d/edges.tsv", "--users", "d/users.jsonl"];

fn with_graph<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&GRAPH);
    v
}

fn synth_small(dir: &Path) {
    ok(&["synth", "--n", "200", "--spam-frac", "0.1", "--seed", "3", "--out-dir", "d"], dir);
}

#[test]
fn synth_contract() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--n", "2000", "--spam-frac", "0.05", "--seed", "7", "--out-dir", "d"], dir.path());
    let d = dir.path().join("d");
    for f in ["edges.tsv", "users.jsonl", "labels.tsv", "trust_labels.tsv", "synth.config"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    let labels = std::fs::read_to_string(d.join("labels.tsv")).unwrap();
    assert_eq!(labels.lines().count(), 2000);
    assert_eq!(labels.lines().filter(|l| l.ends_with("\t1")).count(), 100);
    assert_eq!(lines(&d.join("users.jsonl")), 2000);
}

#[test]
fn walk_emits_one_line_per_walk() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    ok(
        &with_graph(&[
            "walk", "--strategy", "enwalk", "--p", "0.25", "--q", "0.25", "--r", "0.25", "--s", "0.25", "--walks", "10",
            "--length", "80", "--out", "walks.txt",
        ]),
        dir.path(),
    );
    assert_eq!(lines(&dir.path().join("walks.txt")), 10 * 200);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = enwalk(&["walk", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = enwalk(&["walk", "--edges", "missing.tsv", "--users", "missing.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = enwalk(&with_graph(&["walk", "--p", "-1"]), dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = enwalk(&["synth", "--n", "5", "--out-dir", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    std::fs::write(dir.path().join("bad.tsv"), "a\tb\tnot-a-number\n").unwrap();
    let out = enwalk(&["walk", "--edges", "bad.tsv", "--users", "d/users.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    for sub in ["synth", "ingest", "dynamics", "walk", "embed", "pagerank", "mrf", "trust-fit", "eval", "compare"] {
        assert_eq!(enwalk(&[sub, "--help"], dir.path()).status.code(), Some(0), "{sub} --help");
    }
}

#[test]
fn config_file_flags_lose_to_command_line() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    std::fs::write(
        dir.path().join("run.conf"),
        "# walk settings\nwalks=2\nlength=3\nstrategy=uniform\nedges=d/edges.tsv\nusers=d/users.jsonl\n",
    )
    .unwrap();
    ok(&["walk", "--config", "run.conf", "--out", "a.txt"], dir.path());
    assert_eq!(lines(&dir.path().join("a.txt")), 2 * 200);
    ok(&["walk", "--config", "run.conf", "--walks", "4", "--out", "b.txt"], dir.path());
    assert_eq!(lines(&dir.path().join("b.txt")), 4 * 200);

    // the echo is itself a valid config and reproduces the run
    let echo = std::fs::read_to_string(dir.path().join("b.txt.config")).unwrap();
    assert!(echo.contains("walks=4") && echo.contains("strategy=uniform"));
    ok(&["walk", "--config", "b.txt.config", "--out", "c.txt"], dir.path());
    assert_eq!(
        std::fs::read(dir.path().join("b.txt")).unwrap(),
        std::fs::read(dir.path().join("c.txt")).unwrap()
    );
}

#[test]
fn worker_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_enwalk"))
        .args(with_graph(&["walk", "--walks", "1", "--length", "2", "--out", "w.txt"]))
        .current_dir(dir.path())
        .env("ENWALK_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let echo = std::fs::read_to_string(dir.path().join("w.txt.config")).unwrap();
    assert!(echo.contains("workers=3"));
}

#[test]
fn inputs_are_never_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let edges = dir.path().join("d/edges.tsv");
    let before = std::fs::read(&edges).unwrap();
    let out = enwalk(&with_graph(&["walk", "--out", "d/edges.tsv"]), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = enwalk(&with_graph(&["ingest", "--out-dir", "d"]), dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read(&edges).unwrap(), before);

    ok(&with_graph(&["ingest", "--out-dir", "clean"]), dir.path());
    assert_eq!(std::fs::read(dir.path().join("clean/edges.tsv")).unwrap(), before);
    assert_eq!(std::fs::read(&edges).unwrap(), before);
}

#[test]
fn subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    synth_small(p);
    ok(&with_graph(&["dynamics", "--out", "pairs.tsv"]), p);
    assert_eq!(lines(&p.join("pairs.tsv")), std::fs::read_to_string(p.join("d/edges.tsv")).unwrap().lines().count());
    ok(&with_graph(&["trust-fit", "--trust-labels", "d/trust_labels.tsv", "--out", "trust.json"]), p);
    ok(&with_graph(&["pagerank", "--out", "pr.tsv"]), p);
    ok(&with_graph(&["pagerank", "--variant", "trust", "--trust-model", "trust.json", "--out", "prt.tsv"]), p);
    assert_eq!(
        enwalk(&with_graph(&["pagerank", "--variant", "trust", "--out", "x.tsv"]), p).status.code(),
        Some(1)
    );
    ok(&with_graph(&["mrf", "--trust-model", "trust.json", "--out", "mrf.tsv", "--beliefs", "b.tsv"]), p);
    assert_eq!(lines(&p.join("b.tsv")), 200);
    ok(&with_graph(&["walk", "--walks", "2", "--length", "10", "--out", "w.txt"]), p);
    ok(
        &with_graph(&["embed", "--walks", "w.txt", "--dim", "8", "--window", "3", "--epochs", "1", "--out", "e.txt"]),
        p,
    );
    assert_eq!(lines(&p.join("e.txt")), 201);
    ok(
        &with_graph(&["eval", "--embeddings", "e.txt", "--folds", "5", "--out", "eval.json", "--scores-out", "emb.tsv"]),
        p,
    );
    ok(&with_graph(&["eval", "--scores", "pr.tsv", "--n", "10,20", "--out", "eval-pr.json"]), p);
    let out = ok(
        &with_graph(&["compare", "--model", "PR-T=pr.tsv", "--model", "ENWalk=emb.tsv", "--out", "report.json"]),
        p,
    );
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.starts_with("Model\tAUC\tP@100"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(lines(&p.join("cdf.tsv")), 1 + 2 * 100);
}

fn script() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/pipeline.sh")
}

#[test]
fn pipeline_script_reports_six_models() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new("bash")
        .arg(script())
        .arg(dir.path().join("run"))
        .env("ENWALK", env!("CARGO_BIN_EXE_enwalk"))
        .envs([("N", "300"), ("SPAM_FRAC", "0.1"), ("WALKS", "2"), ("LENGTH", "10"), ("DIM", "8"), ("WINDOW", "3"), ("EPOCHS", "1"), ("FOLDS", "5")])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run/report.json")).unwrap()).unwrap();
    let names: Vec<&str> = report["rows"].as_array().unwrap().iter().map(|r| r["model"].as_str().unwrap()).collect();
    assert_eq!(names, ["PR-T", "PR-TITP", "MRF", "DeepWalk", "node2vec", "ENWalk"]);
}
