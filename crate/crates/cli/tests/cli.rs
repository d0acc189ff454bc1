use std::path::Path;
use std::process::{Command, Output};

use blockmod_cli::config::ExperimentConfig;
use blockmod_cli::karate::run_karate;

fn blockmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockmod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn classes(stdout: &[u8]) -> Vec<usize> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn detect_separates_two_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.txt", "1 2\n2 3\n1 3\n4 5\n5 6\n4 6\n");
    for objective in ["bayes", "ml"] {
        let out = blockmod(&[
            "detect",
            "--input",
            &input,
            "--objective",
            objective,
            "--restarts",
            "4",
        ]);
        assert!(out.status.success());
        let c = classes(&out.stdout);
        assert_eq!(c.len(), 6);
        assert!(c[0] == c[1] && c[1] == c[2] && c[3] == c[4] && c[4] == c[5] && c[0] != c[3]);
    }
}

#[test]
fn detect_writes_sidecar_and_handles_zero_indexing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.txt", "0 1\n1 2\n");
    let out_path = dir.path().join("labels.txt");
    let out = blockmod(&[
        "detect",
        "--input",
        &input,
        "--zero-indexed",
        "--k",
        "1",
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read_to_string(&out_path).unwrap(),
        "0 1\n1 1\n2 1\n"
    );
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("labels.txt.json")).unwrap())
            .unwrap();
    assert_eq!(meta["k"], 1);
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["objective"], "bayes");
}

#[test]
fn karate_detect_agrees_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "karate.txt", blockmod::io::KARATE_EDGE_LIST);
    let mut cfg = ExperimentConfig::default();
    cfg.tabu.restarts = 10;
    cfg.karate.ks = vec![2];
    let report = run_karate(&cfg).unwrap();
    let seed = blockmod::derive_seed(cfg.seed, &[2]).to_string();
    let out = blockmod(&[
        "detect",
        "--input",
        &input,
        "--k",
        "2",
        "--restarts",
        "10",
        "--seed",
        &seed,
    ]);
    assert!(out.status.success());
    assert_eq!(
        classes(&out.stdout),
        report.partition(2, "bayes").unwrap().labels
    );
}

#[test]
fn theory_json_and_fault_injection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "[theory]\nchecks = [\"gradient\"]\n");
    let ok = blockmod(&["theory", "--config", &cfg]);
    assert!(ok.status.success());
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"][0]["name"], "gradient");

    let bad = blockmod(&["theory", "--config", &cfg, "--inject-fault", "tau"]);
    assert_eq!(bad.status.code(), Some(1));

    let empty = write(dir.path(), "e.toml", "[theory]\nchecks = []\n");
    let none = blockmod(&["theory", "--config", &empty]);
    assert!(none.status.success());
    let report: serde_json::Value = serde_json::from_slice(&none.stdout).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "sed = 3\n");
    assert_eq!(
        blockmod(&["karate", "--config", &bad]).status.code(),
        Some(2)
    );
    assert_eq!(
        blockmod(&["sweep", "--restarts", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(blockmod(&["detect"]).status.code(), Some(2));
    assert_eq!(blockmod(&["nonsense"]).status.code(), Some(2));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        blockmod(&["detect", "--input", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_csv_plots_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "seed = 4\n[tabu]\nrestarts = 2\n[sweep]\nn = [16, 24]\nreplications = 3\n",
    );
    let csv_path = dir.path().join("out.csv");
    let csv = csv_path.to_str().unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_blockmod"))
            .env("BLOCKMOD_THREADS", threads)
            .args(["sweep", "--config", &cfg, "--out", csv])
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(csv).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert!(dir.path().join("out.csv.timings.json").exists());
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 1 + 2 * 3);

    let svg = blockmod(&["plot", "--input", csv]);
    assert!(svg.status.success());
    assert!(String::from_utf8(svg.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_blockmod"))
        .env("BLOCKMOD_THREADS", "zero")
        .arg("theory")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
