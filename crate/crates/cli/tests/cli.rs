use std::path::Path;
use std::process::{Command, Output};

fn pbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbe"))
        .args(args)
        .output()
        .expect("run pbe")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn fixture(dir: &Path, name: &str, extra: &[&str]) -> (String, String) {
    let game = path(dir, &format!("{name}.json"));
    let assessment = path(dir, &format!("{name}-a.json"));
    let mut args = vec![
        "gen",
        "fixture",
        "--name",
        name,
        "--out",
        &game,
        "--assessment",
        &assessment,
    ];
    args.extend(extra);
    assert!(pbe(&args).status.success());
    (game, assessment)
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (g, a) = fixture(dir.path(), "figure1", &[]);
    let out = pbe(&["verify", "--game", &g, "--assessment", &a]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let (g, a) = fixture(dir.path(), "figure3", &["--mu-be", "0.5"]);
    let out = pbe(&["verify", "--game", &g, "--assessment", &a]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["agm"]["pass"], false);
    assert_eq!(report["agm"]["certificate"]["infoset"], "I3b");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pbe(&[]).status.code(), Some(2));
    assert_eq!(pbe(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        pbe(&["solve", "--game", "x.json", "--iters", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        pbe(&["gen", "fixture", "--name", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(pbe(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_file_is_a_runtime_error() {
    let out = pbe(&["solve", "--game", "/nonexistent/game.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_solve_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "g.json");
    let a = path(dir.path(), "a.json");
    let log = path(dir.path(), "log.csv");
    assert!(pbe(&[
        "gen",
        "private-gengoof",
        "--k",
        "3",
        "--seed",
        "2",
        "--out",
        &g
    ])
    .status
    .success());
    let out = pbe(&[
        "solve",
        "--game",
        &g,
        "--iters",
        "200",
        "--checkpoint-every",
        "50",
        "--out",
        &a,
        "--log",
        &log,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,wall_ms,worst_case_local_regret,lemma2_bound")
    );
    assert_eq!(lines.count(), 4);
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(body["meta"]["algorithm"], "pbe-cfr");
    // Bayes and AGM hold; rationality holds at a tolerance the regret allows.
    let out = pbe(&["verify", "--game", &g, "--assessment", &a, "--tol", "1.0"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn solve_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "g.json");
    assert!(pbe(&[
        "gen",
        "random",
        "--max-nodes",
        "200",
        "--seed",
        "4",
        "--out",
        &g
    ])
    .status
    .success());
    let run = |name: &str| {
        let a = path(dir.path(), name);
        assert!(pbe(&["solve", "--game", &g, "--iters", "300", "--out", &a])
            .status
            .success());
        std::fs::read(&a).unwrap()
    };
    assert_eq!(run("a1.json"), run("a2.json"));
}

#[test]
fn bench_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let csv = path(dir.path(), name);
        let report = path(dir.path(), &format!("{name}.report.json"));
        let out = pbe(&[
            "bench",
            "--generator",
            "private-gengoof",
            "--k",
            "3",
            "--instances",
            "10",
            "--iters",
            "500",
            "--out",
            &csv,
            "--report",
            &report,
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let mut r = csv::Reader::from_path(&csv).unwrap();
        let headers = r.headers().unwrap().clone();
        let wall = headers.iter().position(|h| h == "wall_ms").unwrap();
        let rows: Vec<Vec<String>> = r
            .records()
            .map(|rec| {
                let rec = rec.unwrap();
                rec.iter()
                    .enumerate()
                    .filter(|(i, _)| *i != wall)
                    .map(|(_, v)| v.to_string())
                    .collect()
            })
            .collect();
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        (rows, report)
    };
    let (rows, report) = run("a.csv");
    assert_eq!(rows.len(), 20);
    assert_eq!(report["means"].as_array().unwrap().len(), 2);
    assert_eq!(report["config"]["suite"]["instances"], 10);
    let (again, _) = run("b.csv");
    assert_eq!(rows, again);
}

#[test]
fn psro_runs_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let log = path(dir.path(), "psro.csv");
    let out = pbe(&[
        "psro",
        "--true-game",
        "gengoof:3",
        "--epochs",
        "3",
        "--iters",
        "50",
        "--growth",
        "2",
        "--log",
        &log,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Epoch 0 is the initial empirical game.
    assert_eq!(summary["epochs"].as_array().unwrap().len(), 4);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 5);
    assert_eq!(
        pbe(&["psro", "--true-game", "nope:3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pbe(&["psro", "--true-game", "gengoof:3", "--estimation", "mc:0"])
            .status
            .code(),
        Some(2)
    );
}
