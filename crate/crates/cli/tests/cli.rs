use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn segsum(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segsum"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = segsum(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// A small synthetic corpus with gold boundaries and hooks.
fn corpus(cases: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    let n = cases.to_string();
    ok(
        dir.path(),
        &["gen-synthetic", "--cases", &n, "--out", "c.jsonl", "--gold", "g.jsonl", "--lexicon", "h.json"],
    );
    dir
}

fn lines(path: PathBuf) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn fullstop_segmentation_emits_jsonl_boundaries() {
    let dir = corpus(4);
    ok(dir.path(), &["segment", "--input", "c.jsonl", "--method", "fullstop", "--out", "b.jsonl"]);
    let records = lines(dir.path().join("b.jsonl"));
    let sentences = lines(dir.path().join("g.jsonl"));
    assert_eq!(records.len(), sentences.len());
    for r in &records {
        assert!(r["id"].is_string());
        assert!(r["sentence_index"].is_u64());
        assert!(r["boundaries"].is_array());
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = segsum(dir.path(), &["stats", "--no-such-flag"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&segsum(dir.path(), &["no-such-command"])), 1);
}

#[test]
fn help_exits_cleanly() {
    let dir = TempDir::new().unwrap();
    let out = segsum(dir.path(), &["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "gen-synthetic",
        "split-sentences",
        "segment",
        "train-segmenter",
        "eval-segmenter",
        "make-oracle",
        "train-summarizer",
        "summarize",
        "eval-rouge",
        "analyze-relations",
        "stats",
        "run-experiment",
    ] {
        assert!(text.contains(cmd), "help lists {cmd}");
    }
}

#[test]
fn identical_candidates_and_references_score_one() {
    let dir = corpus(5);
    ok(dir.path(), &["eval-rouge", "--candidates", "c.jsonl", "--references", "c.jsonl", "--out", "r.json"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["cases"], 5);
    for metric in ["rouge1", "rouge2", "rougeL"] {
        for field in ["precision", "recall", "f1"] {
            assert_eq!(report["mean"][metric][field], 1.0, "{metric} {field}");
        }
    }
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let out = segsum(dir.path(), &["stats", "--input", "absent.jsonl", "--out", "s.tsv"]);
    assert_eq!(code(&out), 2);
    fs::write(dir.path().join("bad.jsonl"), "{\"id\": \"a\"}\n").unwrap();
    let out = segsum(dir.path(), &["stats", "--input", "bad.jsonl", "--out", "s.tsv"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn missing_required_companion_is_a_usage_error() {
    let dir = corpus(3);
    let out = segsum(dir.path(), &["segment", "--input", "c.jsonl", "--method", "pointer", "--out", "b.jsonl"]);
    assert_eq!(code(&out), 1);
    let out = segsum(dir.path(), &["make-oracle", "--input", "c.jsonl", "--kind", "segment", "--out", "o.jsonl"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn diverging_training_is_a_numeric_error() {
    let dir = corpus(6);
    fs::write(dir.path().join("bad.json"), r#"{"adam": {"lr": 1e300, "clip_norm": null}, "epochs": 2}"#).unwrap();
    let out = segsum(
        dir.path(),
        &[
            "train-summarizer", "--input", "c.jsonl", "--hooks", "h.json", "--kind", "sentence", "--config",
            "bad.json", "--out", "m.ckpt",
        ],
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_flag_changes_generation_and_repeats_exactly() {
    let dir = TempDir::new().unwrap();
    let gen = |name: &str, seed: &str| {
        ok(dir.path(), &["gen-synthetic", "--cases", "3", "--seed", seed, "--out", name]);
        fs::read(dir.path().join(name)).unwrap()
    };
    let a = gen("a.jsonl", "5");
    let b = gen("b.jsonl", "5");
    let c = gen("c.jsonl", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn segmenter_and_summarizer_round_trip_through_files() {
    let dir = corpus(12);
    let d = dir.path();
    fs::write(d.join("seg.json"), r#"{"epochs": 2, "embed_dim": 8, "hidden": 8, "attention_dim": 8}"#).unwrap();
    ok(
        d,
        &[
            "train-segmenter", "--input", "c.jsonl", "--hooks", "h.json", "--gold", "g.jsonl", "--config", "seg.json",
            "--out", "seg.ckpt", "--log", "seg-log.json",
        ],
    );
    ok(d, &["segment", "--input", "c.jsonl", "--hooks", "h.json", "--model", "seg.ckpt", "--out", "pred.jsonl"]);
    ok(
        d,
        &["eval-segmenter", "--input", "c.jsonl", "--hooks", "h.json", "--gold", "g.jsonl", "--predicted", "pred.jsonl", "--out", "eval.json"],
    );
    let eval: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("eval.json")).unwrap()).unwrap();
    assert!(eval["micro"]["f1"].as_f64().unwrap() >= 0.0);
    assert!(eval["fullstop_micro"]["f1"].is_number());

    ok(
        d,
        &[
            "make-oracle", "--input", "c.jsonl", "--hooks", "h.json", "--kind", "segment", "--boundaries", "pred.jsonl",
            "--budget", "300", "--out", "oracle.jsonl",
        ],
    );
    let labels = lines(d.join("oracle.jsonl"));
    assert!(labels.iter().any(|l| l["gold"] == true));
    assert!(labels.iter().all(|l| l["kind"] == "segment"));

    fs::write(d.join("sum.json"), r#"{"epochs": 1, "embed_dim": 8, "hidden": 4, "ff_dim": 8}"#).unwrap();
    ok(
        d,
        &[
            "train-summarizer", "--input", "c.jsonl", "--hooks", "h.json", "--kind", "segment", "--boundaries",
            "pred.jsonl", "--config", "sum.json", "--out", "sum.ckpt", "--log", "sum-log.json",
        ],
    );
    ok(
        d,
        &[
            "summarize", "--input", "c.jsonl", "--hooks", "h.json", "--model", "sum.ckpt", "--boundaries", "pred.jsonl",
            "--budget", "200", "--out", "out.jsonl",
        ],
    );
    let outputs = lines(d.join("out.jsonl"));
    assert_eq!(outputs.len(), 12);
    assert!(outputs.iter().all(|o| !o["selected_units"].as_array().unwrap().is_empty()));
    ok(d, &["eval-rouge", "--candidates", "out.jsonl", "--references", "c.jsonl", "--out", "rouge.json"]);
    let out = segsum(d, &["summarize", "--input", "c.jsonl", "--model", "seg.ckpt", "--out", "x.jsonl"]);
    assert_eq!(code(&out), 2, "a segmenter checkpoint is not a summarizer");
}

#[test]
fn analysis_commands_write_tables() {
    let dir = corpus(4);
    let d = dir.path();
    ok(d, &["split-sentences", "--input", "c.jsonl", "--hooks", "h.json", "--out", "s.jsonl"]);
    let sentences = lines(d.join("s.jsonl"));
    assert_eq!(sentences.len(), lines(d.join("g.jsonl")).len());
    assert!(sentences[0]["tokens"].as_array().is_some_and(|t| !t.is_empty()));

    ok(d, &["analyze-relations", "--input", "c.jsonl", "--hooks", "h.json", "--segments", "g.jsonl", "--out", "rel.tsv", "--json", "rel.json"]);
    let tsv = fs::read_to_string(d.join("rel.tsv")).unwrap();
    for row in ["Equal", "Inclusive", "Included", "Overlap", "Total"] {
        assert!(tsv.contains(row));
    }

    ok(d, &["stats", "--input", "c.jsonl", "--hooks", "h.json", "--segments", "g.jsonl", "--out", "st.tsv", "--json", "st.json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(d.join("st.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["units_per_sentence"], 1.0);
}

#[test]
fn run_experiment_is_byte_identical_and_seeded() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let config = r#"{
        "corpus": {"type": "synthetic", "spec": {"case_count": 12, "sentences_per_record": [4, 6], "summary_chunks": [3, 5]}},
        "splits": {"train": 0.5, "dev": 0.25, "test": 0.25},
        "segmenter": {"epochs": 1, "embed_dim": 4, "hidden": 3, "attention_dim": 3},
        "summarizer": {"epochs": 1, "embed_dim": 4, "hidden": 3, "ff_dim": 6}
    }"#;
    fs::write(d.join("cfg.json"), config).unwrap();
    ok(d, &["run-experiment", "--config", "cfg.json", "--out", "a", "--seed", "9"]);
    ok(d, &["run-experiment", "--config", "cfg.json", "--out", "b", "--seed", "9"]);
    for name in ["report.json", "report.tsv", "segmenter.ckpt", "summarizer-sentence.ckpt", "summarizer-segment.ckpt", "summarizer-clause.ckpt"] {
        assert_eq!(fs::read(d.join("a").join(name)).unwrap(), fs::read(d.join("b").join(name)).unwrap(), "{name}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 9);
    assert_eq!(report["kinds"].as_array().unwrap().len(), 3);

    fs::write(d.join("bad-config.json"), "{\"splits\": {\"train\": 0.9, \"dev\": 0.9, \"test\": 0.1}}").unwrap();
    let out = segsum(d, &["run-experiment", "--config", "bad-config.json", "--out", "c"]);
    assert_eq!(code(&out), 2);
}
