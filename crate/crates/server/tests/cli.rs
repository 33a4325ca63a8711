use std::path::Path;

use clap::Parser;
use clickwise::corpus::{read_dataset, read_jsonl, PrefixExample, Split};
use clickwise_server::cli::{run, Cli};

fn exec(args: &[&str]) {
    let mut argv = vec!["clickwise"];
    argv.extend_from_slice(args);
    run(Cli::try_parse_from(&argv).unwrap()).unwrap_or_else(|e| panic!("{args:?}: {e:#}"));
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn every_stage_runs_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let art = p(d, "artifacts");

    exec(&["sample-corpus", "--n", "500", "--seed", "2", "--out", &p(d, "wire.csv")]);
    exec(&["ingest", "--input", &p(d, "wire.csv"), "--limit", "400", "--out", &p(d, "neutral.jsonl")]);
    exec(&["split", "--input", &p(d, "neutral.jsonl"), "--out", &p(d, "split.jsonl")]);
    exec(&["synth", "--input", &p(d, "split.jsonl"), "--out", &p(d, "labeled.jsonl")]);

    let labeled = read_dataset(&d.join("labeled.jsonl")).unwrap();
    assert_eq!(labeled.len(), 800);
    assert_eq!(labeled.iter().filter(|r| r.clickbait).count(), 400);
    assert!(labeled.iter().all(|r| r.split.is_some()));

    exec(&["report", "--input", &p(d, "labeled.jsonl"), "--csv", &p(d, "composition.csv")]);
    let composition = std::fs::read_to_string(d.join("composition.csv")).unwrap();
    assert!(composition.starts_with("active_tactics,count\n0,400\n"));

    exec(&["expand", "--input", &p(d, "labeled.jsonl"), "--split", "test", "--out", &p(d, "test_px.jsonl")]);
    let px: Vec<PrefixExample> = read_jsonl(&d.join("test_px.jsonl")).unwrap();
    assert!(!px.is_empty());
    assert!(px.iter().all(|e| e.split == Some(Split::Test)));

    exec(&["train-lm", "--input", &p(d, "labeled.jsonl"), "--artifacts", &art]);
    exec(&["train-guides", "--input", &p(d, "labeled.jsonl"), "--artifacts", &art]);
    exec(&["eval-guides", "--input", &p(d, "labeled.jsonl"), "--artifacts", &art, "--out-dir", &p(d, "reports")]);
    let confusion = std::fs::read_to_string(d.join("reports/confusion.csv")).unwrap();
    assert_eq!(confusion.lines().count(), 11);
    assert!(d.join("reports/tactic_means.csv").exists());

    exec(&[
        "rewrite",
        "--artifacts",
        &art,
        "--headline",
        &labeled[0].text,
        "--targets",
        "emphasis_intensity",
        "--lambda-pos",
        "0.5",
        "--lambda-neg",
        "1",
    ]);
    exec(&[
        "sweep",
        "--artifacts",
        &art,
        "--dataset",
        &p(d, "labeled.jsonl"),
        "--limit",
        "5",
        "--grid",
        "0,1x0,1",
        "--targets",
        "narrative_structure",
        "--out",
        &p(d, "sweep.csv"),
    ]);
    let sweep = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.ends_with(",5,0")), "{sweep}");
}

#[test]
fn missing_artifacts_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cli = Cli::try_parse_from([
        "clickwise",
        "rewrite",
        "--artifacts",
        tmp.path().to_str().unwrap(),
        "--headline",
        "Senate passes budget",
    ])
    .unwrap();
    let err = run(cli).unwrap_err();
    assert!(format!("{err:#}").contains("loading models"), "{err:#}");
}
