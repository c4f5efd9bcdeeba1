mod common;

use std::fs;

use clap::Parser;
use kgrec::explain::ExplanationBundle;
use kgrec::graph::{KnowledgeGraph, NodeKind};
use kgrec::Model;
use kgrec_service::cli::{Cli, Command};
use serde_json::Value;

#[test]
fn ingest_and_train_artifacts() {
    let f = common::fixture();
    let stats: Value = serde_json::from_str(&fs::read_to_string(f.file("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["userCount"], 12);
    assert_eq!(stats["itemCount"], 4);
    assert_eq!(stats["ratingCount"], 24);

    let log = fs::read_to_string(f.file("train.jsonl")).unwrap();
    let epochs: Vec<Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(epochs.len(), 3);
    for (i, e) in epochs.iter().enumerate() {
        assert_eq!(e["epoch"], i + 1);
        assert!(e["meanLoss"].as_f64().unwrap().is_finite());
        assert!(e["wallMillis"].is_number());
    }

    let graph = KnowledgeGraph::load(&f.file("graph.kg")).unwrap();
    let model = Model::load(f.file("model.bin")).unwrap();
    assert_eq!(model.entity_count(NodeKind::User), graph.node_count(NodeKind::User));
    assert_eq!(model.dimension(), 8);
}

#[test]
fn training_twice_gives_identical_bytes() {
    let f = common::fixture();
    f.kgrec(&[
        "train", "--graph", &f.path("graph.kg"), "--dim", "8", "--epochs", "3", "--negatives", "2",
        "--seed", "5", "--out", &f.path("again.bin"), "--log", &f.path("again.jsonl"),
    ]);
    assert_eq!(fs::read(f.file("model.bin")).unwrap(), fs::read(f.file("again.bin")).unwrap());
}

#[test]
fn explain_then_stats() {
    let f = common::fixture();
    let dir = f.file("bundles");
    fs::create_dir(&dir).unwrap();
    for user in ["g0", "g7"] {
        f.kgrec(&[
            "explain", "--model", &f.path("model.bin"), "--graph", &f.path("graph.kg"), "--user", user,
            "--cutoff", "4", "--neighbors", "5", "--include-seen", "--out",
            &dir.join(format!("{user}.json")).display().to_string(),
        ]);
    }
    let bundle: ExplanationBundle =
        serde_json::from_str(&fs::read_to_string(dir.join("g0.json")).unwrap()).unwrap();
    assert_eq!(bundle.subject, "g0");
    assert_eq!(bundle.recommended.len(), 4);
    assert_eq!(bundle.neighbors.len(), 5);

    let stats: Value = serde_json::from_str(&f.kgrec(&["explain-stats", "--bundles", &dir.display().to_string()])).unwrap();
    assert_eq!(stats["bundles"], 2);
    assert_eq!(stats["cutoff"], 4);
    let coverage = stats["coverage"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&coverage));

    let explicit = f.kgrec(&[
        "explain", "--model", &f.path("model.bin"), "--graph", &f.path("graph.kg"), "--user", "g0",
        "--neighbor-users", "g1,g2", "--cutoff", "2",
    ]);
    let b: ExplanationBundle = serde_json::from_str(&explicit).unwrap();
    let mut names: Vec<_> = b.neighbors.iter().map(|n| n.key.as_str()).collect();
    names.sort();
    assert_eq!(names, ["g1", "g2"]);
}

#[test]
fn evaluate_writes_report() {
    let f = common::fixture();
    f.kgrec(&[
        "evaluate", "--ratings", &f.path("ratings.tsv"), "--opinions", &f.path("opinions.tsv"), "--folds", "2",
        "--ks", "1,2", "--models", "rdm,pop,gera", "--dim", "4", "--epochs", "1", "--negatives", "2", "--out",
        &f.path("report.json"),
    ]);
    let report: Value = serde_json::from_str(&fs::read_to_string(f.file("report.json")).unwrap()).unwrap();
    let names: Vec<&str> = report["models"].as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["RDM", "POP", "GERA"]);
}

#[test]
fn environment_supplies_paths() {
    std::env::set_var("KGREC_MODEL", "/env/model.bin");
    std::env::set_var("KGREC_GRAPH", "/env/graph.kg");
    let cli = Cli::try_parse_from(["kgrec", "recommend", "--user", "u1"]).unwrap();
    match cli.command {
        Command::Recommend(a) => {
            assert_eq!(a.model.to_str(), Some("/env/model.bin"));
            assert_eq!(a.graph.to_str(), Some("/env/graph.kg"));
            assert_eq!(a.n, 10);
        }
        other => panic!("parsed {other:?}"),
    }
    let cli = Cli::try_parse_from(["kgrec", "recommend", "--user", "u1", "--model", "m"]).unwrap();
    let Command::Recommend(a) = cli.command else { unreachable!() };
    assert_eq!(a.model.to_str(), Some("m"));
}

#[test]
fn unknown_model_name_fails() {
    let f = common::fixture();
    let cli = Cli::try_parse_from([
        "kgrec", "evaluate", "--ratings", &f.path("ratings.tsv"), "--opinions", &f.path("opinions.tsv"), "--models",
        "mf",
    ])
    .unwrap();
    let err = kgrec_service::cli::run(cli, &mut Vec::new()).unwrap_err();
    assert!(err.to_string().contains("mf"), "{err}");
}
