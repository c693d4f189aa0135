use std::process::{Command, Output};

fn rog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rog")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn generate_writes_the_lower_bound_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m7.json");
    let out = rog(&["generate", "paper", "--m", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let inst = rog_core::instances::load_instance(&path).unwrap();
    let counts: Vec<usize> = (0..3)
        .map(|i| inst.valuation(i).as_vertex_cover().unwrap().graph().edge_count())
        .collect();
    assert_eq!(counts, [6, 3, 2]);
}

#[test]
fn generate_rejects_even_m() {
    let out = rog(&["generate", "paper", "--m", "4"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn random_generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let path = dir.path().join(name);
            let args = ["generate", "random", "--n", "3", "--m", "6", "--p", "0.5", "--seed", "1", "--out", path.to_str().unwrap()];
            assert_eq!(code(&rog(&args)), 0);
            std::fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
}

#[test]
fn run_reports_welfare_for_fixed_orders() {
    let out = rog(&["run", "--family", "paper", "--m", "7", "--perm", "1,2,3,4,5,6,7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["allocation"]["welfare"], 6);

    let out = rog(&["run", "--family", "paper", "--m", "7", "--perm", "7,1,2,3,4,5,6"]);
    assert!(stdout(&out).contains("welfare  11"));
}

#[test]
fn run_rejects_a_repeated_item() {
    let out = rog(&["run", "--family", "paper", "--m", "5", "--perm", "1,1,2,3,4"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a permutation"));
}

#[test]
fn trace_needs_opt_within_budget() {
    let out = rog(&["run", "--family", "paper", "--m", "7", "--seed", "3", "--trace", "--opt-budget", "10"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget exceeded"));

    let out = rog(&["run", "--family", "paper", "--m", "7", "--seed", "3", "--trace", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().count(), 8);
}

#[test]
fn exact_expectation_prints_rationals() {
    let out = rog(&["expect", "--family", "paper", "--m", "5", "--mode", "exact"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("E[v2] = 4/3 ≈ 1.3333"));
}

#[test]
fn monte_carlo_is_reproducible_and_needs_two_samples() {
    let args = ["expect", "--family", "paper", "--m", "21", "--mode", "mc", "--samples", "20000", "--seed", "7", "--format", "json"];
    let a = rog(&args);
    let b = rog(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let out = rog(&["expect", "--family", "paper", "--m", "5", "--mode", "mc", "--samples", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_exit_codes() {
    let out = rog(&["verify", "--family", "paper", "--m", "5"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    for seed in 1..=20 {
        let s = seed.to_string();
        let out = rog(&["verify", "--family", "random", "--n", "3", "--m", "5", "--graph-seed", &s]);
        assert_eq!(code(&out), 0, "seed {seed}: {}", stdout(&out));
    }

    let args = ["verify", "--family", "paper", "--m", "7", "--perm-budget", "100", "--samples", "200"];
    assert_eq!(code(&rog(&args)), 0);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&rog(&strict)), 3);

    let out = rog(&["verify", "--family", "paper", "--m", "5", "--claims", "pos,bogus"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_single_player_marks_competitor_claims() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solo.json");
    std::fs::write(&path, r#"{"m": 3, "players": [{"kind": "vertex_cover", "edges": [[1, 2], [2, 3]]}]}"#).unwrap();
    let out = rog(&["verify", "--instance", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let pos = text.lines().find(|l| l.starts_with("pos,")).unwrap();
    assert!(pos.contains("not applicable"), "{pos}");
}

#[test]
fn sweep_writes_csv() {
    let out = rog(&["sweep", "--family", "paper", "--m-list", "5,7", "--mode", "auto"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("m,mode,e_rog,e_rog_stderr,opt,ratio,samples,seed"));
    assert!(lines.next().unwrap().starts_with("5,exact,5.616667,"));

    let out = rog(&["sweep", "--family", "paper", "--m-list", ""]);
    assert_eq!(code(&out), 2);
}

#[test]
fn instance_source_is_required_and_exclusive() {
    assert_eq!(code(&rog(&["expect", "--m", "5"])), 2);
    assert_eq!(code(&rog(&["expect", "--family", "paper", "--instance", "x.json", "--m", "5"])), 2);
    assert_eq!(code(&rog(&["expect", "--family", "paper"])), 2);
}

#[test]
fn missing_file_is_reported() {
    let out = rog(&["expect", "--instance", "/nonexistent/instance.json"]);
    assert_ne!(code(&out), 0);
    assert!(!out.stderr.is_empty());
}
