mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::toy_path;

const BIN: &str = env!("CARGO_BIN_EXE_searchlearn");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Runs the full pipeline into `dir` and returns the eval JSON of the pseudo corpus.
fn pipeline(dir: &Path) -> serde_json::Value {
    let cfg = toy_path("toy.cfg");
    let (cfg, train, unl) = (p(&cfg).to_string(), toy_path("train.tsv"), toy_path("unlabeled.txt"));
    let (train, unl) = (p(&train).to_string(), p(&unl).to_string());
    let f = |n: &str| dir.join(n).to_str().unwrap().to_string();
    ok(&["--config", &cfg, "--seed", "7", "train", "--corpus", &train, "--model-out", &f("s1.json")]);
    ok(&["--config", &cfg, "augment", "--corpus", &train, "-n", "50", "--out", &f("aug.txt")]);
    ok(&["--config", &cfg, "search", "--model", &f("s1.json"), "--tables", &unl, "--out", &f("pseudo.tsv"), "--trace", &f("trace.jsonl")]);
    ok(&["--config", &cfg, "retrain", "--corpus", &train, "--pseudo", &f("pseudo.tsv"), "--model-out", &f("s2.json")]);
    ok(&["--config", &cfg, "selftrain", "--model", &f("s1.json"), "--corpus", &train, "--tables", &f("aug.txt"), "--model-out", &f("st.json"), "--pseudo-out", &f("st.tsv")]);
    ok(&["--config", &cfg, "infer", "--model", &f("s2.json"), "--tables", &unl, "--out", &f("out.tsv")]);
    let table = ok(&["eval", "--input", &f("pseudo.tsv"), "--out", &f("report.json")]);
    assert!(table.contains("HardCov") && table.contains("100.00%"), "{table}");
    ok(&["eval", "--input", &f("out.tsv"), "--out", &f("out_report.json")]);
    serde_json::from_str(&std::fs::read_to_string(f("report.json")).unwrap()).unwrap()
}

#[test]
fn full_pipeline_is_feasible_and_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let report = pipeline(a.path());
    assert_eq!(report["hard_coverage"]["exact"], "1");
    assert_eq!(report["n_samples"], 400);
    let trace = std::fs::read_to_string(a.path().join("trace.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    for key in ["sample", "slot", "phrase", "position", "score", "candidates"] {
        assert!(first.get(key).is_some(), "trace line lacks {key}");
    }
    pipeline(b.path());
    for f in ["s1.json", "aug.txt", "pseudo.tsv", "trace.jsonl", "s2.json", "st.json", "st.tsv", "out.tsv", "report.json", "out_report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs between runs"
        );
    }
}

#[test]
fn seed_changes_augmentation() {
    let d = tempfile::tempdir().unwrap();
    let train = toy_path("train.tsv");
    let out = |seed: &str, name: &str| {
        let path = d.path().join(name);
        ok(&["--seed", seed, "augment", "--corpus", p(&train), "-n", "20", "--out", p(&path)]);
        std::fs::read_to_string(path).unwrap()
    };
    assert_eq!(out("1", "a"), out("1", "b"));
    assert_ne!(out("1", "c"), out("2", "d"));
}

#[test]
fn exit_codes() {
    let out = run(&["train", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.tsv");
    std::fs::write(&bad, "name[Aromi\tAromi is a pub.\n").unwrap();
    let out = run(&["train", "--corpus", p(&bad), "--model-out", p(&d.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.tsv:1"));
    let out = run(&["train", "--corpus", "/nonexistent/file.tsv", "--model-out", p(&d.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = d.path().join("bad.cfg");
    std::fs::write(&cfg, "colour=red\n").unwrap();
    assert_eq!(run(&["--config", p(&cfg), "train", "--corpus", p(&bad), "--model-out", "x"]).status.code(), Some(2));

    let out = run(&["--scorer", "tcp://127.0.0.1:1", "serve-check"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stdio_scorer_drives_search_and_serve_check() {
    let d = tempfile::tempdir().unwrap();
    let model = d.path().join("m.json");
    ok(&["train", "--corpus", p(&toy_path("train.tsv")), "--model-out", p(&model)]);
    let endpoint = format!("cmd:{BIN} serve --model {}", p(&model));

    let check = ok(&["--scorer", &endpoint, "serve-check"]);
    assert!(check.starts_with("ok"), "{check}");

    let tables = d.path().join("t.txt");
    let unl = std::fs::read_to_string(toy_path("unlabeled.txt")).unwrap();
    std::fs::write(&tables, unl.lines().filter(|l| !l.starts_with('#')).take(10).collect::<Vec<_>>().join("\n")).unwrap();
    let (remote, local) = (d.path().join("r.tsv"), d.path().join("l.tsv"));
    ok(&["--scorer", &endpoint, "search", "--tables", p(&tables), "--out", p(&remote)]);
    ok(&["search", "--model", p(&model), "--tables", p(&tables), "--out", p(&local)]);
    // scores cross the wire as JSON floats, the chosen texts must still agree
    assert_eq!(std::fs::read_to_string(&remote).unwrap(), std::fs::read_to_string(&local).unwrap());
    let report = ok(&["eval", "--input", p(&remote)]);
    assert!(report.contains("100.00%"), "{report}");
}
