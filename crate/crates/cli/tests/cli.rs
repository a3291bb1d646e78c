use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jrme::persist::save_model;
use jrme::{EmbeddingTable, ModelConfig, Vocabulary};

const TRAIN: &str = "\
a\tborn_in\tx\twas born in
b\tborn_in\ty\tborn in the city of
c\tworks_for\tx\tworks for
d\tworks_for\ty\tis employed and works for
";

fn jrme(args: &[&str]) -> Output {
    jrme_env(args, None)
}

fn jrme_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jrme"));
    cmd.args(args).env_remove("JRME_SEED");
    if let Some(s) = seed {
        cmd.env("JRME_SEED", s);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("train.tsv", TRAIN);
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn train(&self, out: &str, extra: &[&str]) -> Output {
        let train = self.arg("train.tsv");
        let out = self.arg(out);
        let mut args = vec!["train", "--train", &train, "--out", &out, "--dim", "8"];
        if !extra.contains(&"--epochs") {
            args.extend_from_slice(&["--epochs", "50"]);
        }
        args.extend_from_slice(extra);
        jrme(&args)
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&jrme(&["--help"])), 0);
    assert_eq!(code(&jrme(&["--version"])), 0);
    assert_eq!(code(&jrme(&["train", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one_without_writing() {
    let f = Fixture::new();
    for extra in [
        &["--neg", "sample:0"][..],
        &["--variant", "transe"],
        &["--lr", "-1"],
        &["--threads", "2"],
        &["--threads", "0"],
    ] {
        let o = f.train("m.bin", extra);
        assert_eq!(code(&o), 1, "{extra:?}");
        assert!(!f.path("m.bin").exists(), "{extra:?}");
    }
    assert_eq!(code(&jrme(&["train", "--train", &f.arg("train.tsv")])), 1);
    let o = jrme_env(
        &["train", "--train", &f.arg("train.tsv"), "--out", &f.arg("m.bin")],
        Some("x"),
    );
    assert_eq!(code(&o), 1);
    assert!(!f.path("m.bin").exists());
}

#[test]
fn zero_epochs_writes_initial_model_and_manifest() {
    let f = Fixture::new();
    let o = f.train("m.bin", &["--epochs", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(f.path("m.bin").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(f.path("m.bin.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["epochs"], 0);
    assert_eq!(manifest["config"]["gamma"], 2.0);
    assert_eq!(manifest["variant"], "jrme");
    assert_eq!(manifest["inputs"][0]["role"], "train");
    assert_eq!(manifest["fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let f = Fixture::new();
    assert_eq!(code(&f.train("a.bin", &["--neg", "sample:1"])), 0);
    assert_eq!(code(&f.train("b.bin", &["--neg", "sample:1"])), 0);
    assert_eq!(fs::read(f.path("a.bin")).unwrap(), fs::read(f.path("b.bin")).unwrap());
    let strip = |name: &str| {
        fs::read_to_string(f.path(name))
            .unwrap()
            .replace(name.trim_end_matches(".manifest.json"), "")
    };
    assert_eq!(strip("a.bin.manifest.json"), strip("b.bin.manifest.json"));
}

#[test]
fn seed_env_overrides_flag() {
    let f = Fixture::new();
    let train = f.arg("train.tsv");
    let run = |out: &str, seed: Option<&str>| {
        let out = f.arg(out);
        let o = jrme_env(
            &[
                "train", "--train", &train, "--out", &out, "--dim", "4", "--epochs", "2", "--seed", "1",
            ],
            seed,
        );
        assert_eq!(code(&o), 0);
        fs::read(out).unwrap()
    };
    let flag = run("a.bin", None);
    let env = run("b.bin", Some("77"));
    assert_ne!(flag, env);
    let manifest = fs::read_to_string(f.path("b.bin.manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 77"));
}

#[test]
fn kre_trains_on_empty_mentions() {
    let f = Fixture::new();
    f.write("train.tsv", "a\tr1\tb\t\nb\tr2\tc\t\n");
    assert_eq!(code(&f.train("m.bin", &["--variant", "kre"])), 0);
}

#[test]
fn eval_reports_metrics() {
    let f = Fixture::new();
    assert_eq!(code(&f.train("m.bin", &["--variant", "tme"])), 0);
    let ranks = f.arg("ranks.tsv");
    let o = jrme(&[
        "eval",
        "--model",
        &f.arg("m.bin"),
        "--test",
        &f.arg("train.tsv"),
        "--variant",
        "tme",
        "--ranks",
        &ranks,
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("| TME "));
    assert!(out.contains("hit_at_1=1\n"), "{out}");
    assert!(out.contains("avg_rank=1\n"));
    assert_eq!(fs::read_to_string(&ranks).unwrap().lines().count(), 5);
}

#[test]
fn eval_with_only_unknown_relations_fails() {
    let f = Fixture::new();
    assert_eq!(code(&f.train("m.bin", &[])), 0);
    f.write("test.tsv", "a\tnope\tx\tborn in\nb\talso_nope\ty\t\n");
    let o = jrme(&["eval", "--model", &f.arg("m.bin"), "--test", &f.arg("test.tsv")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rejected 2 lines"));
}

#[test]
fn malformed_file_is_a_data_error() {
    let f = Fixture::new();
    f.write("bad.tsv", "a\tb\n");
    let o = jrme(&["stats", "--train", &f.arg("bad.tsv")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
}

#[test]
fn divergence_exits_three() {
    let f = Fixture::new();
    let o = f.train("m.bin", &["--lr", "1.7e308"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!f.path("m.bin").exists());
}

#[test]
fn stats_layout() {
    let f = Fixture::new();
    f.write("test.tsv", "e\tborn_in\tz\tborn\n");
    let o = jrme(&["stats", "--train", &f.arg("train.tsv"), "--test", &f.arg("test.tsv")]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let count = |label: &str| {
        out.lines()
            .find(|l| l.starts_with(label))
            .and_then(|l| l.split_whitespace().last())
            .unwrap()
            .to_owned()
    };
    assert_eq!(count("#(ENTITIES)"), "8");
    assert_eq!(count("#(RELATIONS)"), "2");
    assert_eq!(count("#(TRAINING EX.)"), "4");
    assert_eq!(count("#(TESTING EX.)"), "1");
}

fn grid(f: &Fixture, extra: &[&str]) -> Output {
    let (train, valid) = (f.arg("train.tsv"), f.arg("train.tsv"));
    let mut args = vec!["grid", "--train", &train, "--valid", &valid, "--epochs", "5"];
    args.extend_from_slice(extra);
    jrme(&args)
}

#[test]
fn grid_single_point_is_best() {
    let f = Fixture::new();
    let out = f.arg("best.json");
    let o = grid(
        &f,
        &[
            "--dims", "4", "--alphas", "1", "--betas", "1", "--gammas", "2", "--out", &out,
        ],
    );
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("best: dim=4 alpha=1 beta=1 gamma=2"));
    let best: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(best["dim"], 4);
    assert!(f.path("best.json.manifest.json").exists());
}

#[test]
fn grid_tie_prefers_smaller_configuration() {
    // Alpha only enters the KRE loss, so under TME both points train identically.
    let f = Fixture::new();
    let o = grid(
        &f,
        &[
            "--variant",
            "tme",
            "--dims",
            "4",
            "--alphas",
            "1.0,0.1",
            "--betas",
            "1",
            "--gammas",
            "2",
        ],
    );
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let metrics = |l: &str| l.split_once("avg_rank").unwrap().1.to_owned();
    assert_eq!(metrics(lines[0]), metrics(lines[1]));
    assert!(lines[2].starts_with("best: dim=4 alpha=0.1 "), "{}", lines[2]);
}

#[test]
fn empty_grid_is_a_usage_error() {
    let f = Fixture::new();
    assert_eq!(code(&grid(&f, &["--dims", ""])), 1);
}

/// Two relations on a 2-d table. Entities sit at the origin, so the triple
/// part prefers the shorter relation `near`; the word `far_word` points along
/// `far` strongly enough to flip the joint ranking.
fn hand_model(f: &Fixture) -> String {
    let mut vocab = Vocabulary::new();
    vocab.intern_entity("h");
    vocab.intern_entity("t");
    vocab.intern_relation("near");
    vocab.intern_relation("far");
    vocab.intern_word("far_word");
    let table = EmbeddingTable::from_rows(
        &[&[0.0, 0.0], &[0.0, 0.0]],
        &[&[0.5, 0.0], &[0.0, 1.0]],
        &[&[0.0, 10.0]],
    )
    .unwrap();
    let path = f.path("hand.bin");
    save_model(
        &table,
        &vocab,
        &ModelConfig {
            dim: 2,
            ..ModelConfig::default()
        },
        &path,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

fn predict(model: &str, input: &Path, extra: &[&str]) -> Vec<Vec<String>> {
    let input = input.to_str().unwrap();
    let mut args = vec!["predict", "--model", model, "--input", input];
    args.extend_from_slice(extra);
    let o = jrme(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
        .lines()
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect()
}

#[test]
fn predict_flips_with_dominant_mention() {
    let f = Fixture::new();
    let model = hand_model(&f);
    f.write("in.tsv", "h\tt\t\nh\tt\tfar_word\n");
    let rows = predict(&model, &f.path("in.tsv"), &["--topk", "1"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[1][1], "near");
    assert_eq!(rows[3][1], "far");
    assert_eq!(rows[3][2], "-9.000000");
}

#[test]
fn predict_empty_mention_matches_kre() {
    let f = Fixture::new();
    assert_eq!(code(&f.train("m.bin", &[])), 0);
    f.write("in.tsv", "a\tx\t\nc\ty\n");
    let model = f.arg("m.bin");
    let joint = predict(&model, &f.path("in.tsv"), &["--topk", "2"]);
    let kre = predict(&model, &f.path("in.tsv"), &["--topk", "2", "--variant", "kre"]);
    assert_eq!(joint, kre);
    // top-k covering every relation lists all of them in nondecreasing order
    let scores: Vec<f64> = joint[1..3].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(scores[0] <= scores[1]);
}

#[test]
fn predict_marks_unknown_entities_and_continues() {
    let f = Fixture::new();
    let model = hand_model(&f);
    f.write("in.tsv", "ghost\tt\tfar_word\nh\tt\tfar_word\n");
    let rows = predict(&model, &f.path("in.tsv"), &[]);
    assert_eq!(rows[0], ["#1", "ERROR", "unknown entity 'ghost'"]);
    assert_eq!(rows[1][0], "#2");
    assert_eq!(rows.len(), 4);

    f.write("all_bad.tsv", "ghost\tt\t\n");
    let o = jrme(&["predict", "--model", &model, "--input", &f.arg("all_bad.tsv")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn parallel_training_needs_acknowledgement() {
    let f = Fixture::new();
    assert_eq!(code(&f.train("m.bin", &["--threads", "2", "--nondeterministic-ok"])), 0);
    let manifest = fs::read_to_string(f.path("m.bin.manifest.json")).unwrap();
    assert!(manifest.contains("\"threads\": 2"));
}
