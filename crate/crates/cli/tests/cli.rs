use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rado(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rado"))
        .args(args)
        .env_remove("RADO_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn gen(dir: &TempDir, name: &str, n: usize, r: usize, seed: u64) -> PathBuf {
    let out = path(dir, name);
    let o = rado(&["gen", "--n", &n.to_string(), "--r", &r.to_string(), "--seed", &seed.to_string(), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn verify_accepts_a_matching_pair() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.json", 9, 2, 4);
    let d = path(&dir, "d.json");
    assert_eq!(rado(&["decompose", "--algo", "gg", "--in", s(&c), "--out", s(&d)]).status.code(), Some(0));
    let o = rado(&["verify", "--coloring", s(&c), "--decomp", s(&d)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid"));
}

#[test]
fn verify_reports_a_hand_edited_overlap() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.json", 6, 2, 1);
    let d = path(&dir, "d.json");
    std::fs::write(&d, r#"{"v":1,"r":2,"paths":[[0,1,2,3],[3,4,5]]}"#).unwrap();
    let o = rado(&["verify", "--coloring", s(&c), "--decomp", s(&d)]);
    assert_eq!(o.status.code(), Some(1));
    // Either the overlap or an earlier bad edge is the first defect found;
    // an all-BLUE coloring makes the overlap the only one.
    let blue = path(&dir, "blue.json");
    assert_eq!(rado(&["gen", "--kind", "constant", "--n", "6", "--out", s(&blue)]).status.code(), Some(0));
    std::fs::write(&d, r#"{"v":1,"r":2,"paths":[[0,1,2,3,4,5],[3]]}"#).unwrap();
    let o = rado(&["verify", "--coloring", s(&blue), "--decomp", s(&d)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overlap(3)"), "{}", stdout(&o));
}

#[test]
fn verify_reports_missing_and_bad_edges() {
    let dir = TempDir::new().unwrap();
    let blue = path(&dir, "blue.json");
    assert_eq!(rado(&["gen", "--kind", "constant", "--n", "4", "--out", s(&blue)]).status.code(), Some(0));
    let d = path(&dir, "d.json");
    std::fs::write(&d, r#"{"v":1,"r":2,"paths":[[0,1,2],[]]}"#).unwrap();
    let o = rado(&["verify", "--coloring", s(&blue), "--decomp", s(&d)]);
    assert_eq!((o.status.code(), stdout(&o).contains("missing(3)")), (Some(1), true));
    std::fs::write(&d, r#"{"v":1,"r":2,"paths":[[0,1],[2,3]]}"#).unwrap();
    let o = rado(&["verify", "--coloring", s(&blue), "--decomp", s(&d)]);
    assert_eq!((o.status.code(), stdout(&o).contains("bad-edge(1,1)")), (Some(1), true));
}

#[test]
fn truncated_triangle_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "c.json");
    std::fs::write(&c, r#"{"v":1,"n":4,"r":2,"triangle":[0,1,0]}"#).unwrap();
    let d = path(&dir, "d.json");
    std::fs::write(&d, r#"{"v":1,"r":2,"paths":[[0,1,2,3],[]]}"#).unwrap();
    let o = rado(&["verify", "--coloring", s(&c), "--decomp", s(&d)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));
    std::fs::write(&c, "{\"n\":4,").unwrap();
    assert_eq!(rado(&["verify", "--coloring", s(&c), "--decomp", s(&d)]).status.code(), Some(2));
}

#[test]
fn gg_refuses_three_colors() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.json", 5, 3, 2);
    let o = rado(&["decompose", "--algo", "gg", "--in", s(&c), "--out", s(&path(&dir, "d.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let d = path(&dir, "d.json");
    let o = rado(&["decompose", "--algo", "brute", "--in", s(&c), "--out", s(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(rado(&["verify", "--coloring", s(&c), "--decomp", s(&d)]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rado(&["decompose", "--bogus"]).status.code(), Some(2));
    assert_eq!(rado(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rado(&["harness", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(rado(&["gen", "--n", "5", "--out", "/dev/null", "--depth", "0"]).status.code(), Some(2));
    assert_eq!(rado(&["gen", "--n", "1", "--out", "/dev/null"]).status.code(), Some(2));
    assert_eq!(rado(&["--help"]).status.code(), Some(0));
}

#[test]
fn round_trip_for_one_hundred_seeds() {
    let dir = TempDir::new().unwrap();
    let (c, d) = (path(&dir, "c.json"), path(&dir, "d.json"));
    for seed in 0..100u64 {
        let n = (2 + seed % 30).to_string();
        let seed = seed.to_string();
        assert_eq!(rado_cli::run(["rado", "gen", "--n", &n, "--seed", &seed, "--out", s(&c)]), 0);
        assert_eq!(rado_cli::run(["rado", "decompose", "--algo", "gg", "--in", s(&c), "--out", s(&d)]), 0);
        assert_eq!(rado_cli::run(["rado", "verify", "--coloring", s(&c), "--decomp", s(&d)]), 0, "seed {seed}");
    }
}

#[test]
fn outputs_embed_config_and_digests_and_reproduce() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.json", 12, 2, 7);
    let (d1, d2, t1) = (path(&dir, "d1.json"), path(&dir, "d2.json"), path(&dir, "t1.json"));
    for d in [&d1, &d2] {
        let o = rado(&["decompose", "--algo", "gg", "--in", s(&c), "--out", s(d), "--trace", s(&t1)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&d1).unwrap(), std::fs::read(&d2).unwrap());
    let v = read_json(&d1);
    assert_eq!(v["config"]["seed"], 0);
    let digest = v["inputs"]["coloring"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(read_json(&c)["config"]["seed"], 7);
    let o = rado(&["verify", "--coloring", s(&c), "--decomp", s(&d1), "--trace", s(&t1)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn rado_jobs_overrides_the_flag() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "h.json");
    let run = |jobs_env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_rado"));
        cmd.args(["hunt", "--r", "2", "--n", "4", "--jobs", "3", "--out", s(&out)]);
        match jobs_env {
            Some(j) => cmd.env("RADO_JOBS", j),
            None => cmd.env_remove("RADO_JOBS"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(None).status.code(), Some(0));
    assert_eq!(read_json(&out)["config"]["jobs"], 3);
    assert_eq!(run(Some("2")).status.code(), Some(0));
    assert_eq!(read_json(&out)["config"]["jobs"], 2);
    assert_eq!(read_json(&out)["counterexamples"], serde_json::json!([]));
    assert_eq!(run(Some("many")).status.code(), Some(2));
}

#[test]
fn largeness_constructions_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "s.json");
    let o = rado(&["gen", "--kind", "stable", "--n", "40", "--r", "3", "--max-threshold", "8", "--seed", "5", "--out", s(&c)]);
    assert_eq!(o.status.code(), Some(0));
    let (d, t) = (path(&dir, "d.json"), path(&dir, "t.json"));
    for algo in ["stable", "ultra"] {
        let o = rado(&["decompose", "--algo", algo, "--in", s(&c), "--out", s(&d), "--trace", s(&t)]);
        assert_eq!(o.status.code(), Some(0), "{algo}: {}", stderr(&o));
        let end = &read_json(&t)["end"]["marker"];
        assert!(end == "complete" || end == "truncated", "{end}");
        let o = rado(&["verify", "--coloring", s(&c), "--trace", s(&t)]);
        assert_eq!(o.status.code(), Some(0), "{algo}: {}", stdout(&o));
    }
    let o = rado(&["decompose", "--algo", "generic", "--theta", "4", "--in", s(&c), "--out", s(&d), "--trace", s(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_json(&t)["config"]["theta"], 4);
    // A random coloring has no stable presentation.
    let r = gen(&dir, "r.json", 10, 2, 1);
    assert_eq!(rado(&["decompose", "--algo", "stable", "--in", s(&r), "--out", s(&d)]).status.code(), Some(2));
}

#[test]
fn simulate_writes_verifiable_traces() {
    let dir = TempDir::new().unwrap();
    let c = gen(&dir, "c.json", 5, 2, 3);
    let (t, d) = (path(&dir, "t.json"), path(&dir, "d.json"));
    let o = rado(&["simulate", "--algo", "uniform", "--in", s(&c), "--trace", s(&t), "--out", s(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(read_json(&t)["outcome"]["outcome"].is_string());
    let o = rado(&["verify", "--coloring", s(&c), "--decomp", s(&d), "--trace", s(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = rado(&["simulate", "--algo", "always", "--in", s(&c), "--trace", s(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn tampered_trace_is_rejected() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "c.json");
    assert_eq!(rado(&["gen", "--kind", "constant", "--n", "5", "--out", s(&c)]).status.code(), Some(0));
    let t = path(&dir, "t.json");
    let mut file = serde_json::to_value(rado_cli::harness::faulty_trace().to_file()).unwrap();
    file["config"] = serde_json::json!({});
    std::fs::write(&t, file.to_string()).unwrap();
    let o = rado(&["verify", "--coloring", s(&c), "--trace", s(&t)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("strong switch of 0"), "{}", stdout(&o));
}

#[test]
fn halting_adversary_builds_and_decodes() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "m.json");
    std::fs::write(
        &m,
        r#"[{"e":0,"halts_at":null},{"e":1,"halts_at":3},{"e":2,"halts_at":null},{"e":3,"halts_at":5}]"#,
    )
    .unwrap();
    let c = path(&dir, "c.json");
    let o = rado(&["adversary", "halting", "--machines", s(&m), "--stages", "60", "--out", s(&c), "--decode"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("halting [1, 3]"), "{}", stdout(&o));
    let v = read_json(&c);
    assert_eq!(v["n"], 61);
    assert_eq!(v["markers"].as_array().unwrap().len(), 4);
    std::fs::write(&m, r#"[{"e":0,"halts_at":"soon"}]"#).unwrap();
    assert_eq!(rado(&["adversary", "halting", "--machines", s(&m)]).status.code(), Some(2));
}

#[test]
fn diagonal_adversary_reports_verdicts() {
    let dir = TempDir::new().unwrap();
    let r = path(&dir, "r.json");
    let o = rado(&["adversary", "diag", "--stages", "300", "--report", s(&r)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&r);
    assert_eq!(v["monotone"]["holds"], true);
    assert_eq!(v["candidates"].as_array().unwrap().len(), 3);
    let cands = path(&dir, "cands.json");
    std::fs::write(&cands, r#"[{"id":"x","kind":"explicit","blue":[0,1,2],"red":[3]}]"#).unwrap();
    let o = rado(&["adversary", "diag", "--candidates", s(&cands), "--stages", "100", "--report", s(&r)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_json(&r)["candidates"][0]["id"], "x");
}

#[test]
fn harness_negative_control_fails() {
    assert_eq!(rado(&["harness", "lemma-strong"]).status.code(), Some(0));
    let o = rado(&["harness", "lemma-strong", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL lemma-strong"));
}
