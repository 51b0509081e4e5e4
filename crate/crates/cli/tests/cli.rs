use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hidden() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hidden"));
    cmd.env_remove("HIDDEN_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    hidden().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(out).trim()).expect("stdout is JSON")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn simulate(config: &Path, transcript: &Path, seed: &str) -> Output {
    hidden()
        .args(["--seed", seed, "simulate", "--config"])
        .arg(config)
        .arg("--transcript")
        .arg(transcript)
        .output()
        .unwrap()
}

const THREE_SENSORS: &str = r#"{"protocol":"aggp","paillier_bits":128,"N":3,"B":4,
    "data":{"inline":[[5,8,17]]},"lambda":"3+2i","watermarks":[4]}"#;

#[test]
fn embed_prints_gaussian_json() {
    let out = run(&["embed", "--lambda", "3+2i", "--data", "5", "--watermark", "4"]);
    assert!(out.status.success());
    assert_eq!(json(&out), serde_json::json!({"re": "7", "im": "22"}));

    let out = run(&["embed", "--lambda", "3 - 2i", "--data", "-5", "--watermark", "4"]);
    assert_eq!(json(&out), serde_json::json!({"re": "-7", "im": "22"}));
}

#[test]
fn extract_inverts_embed() {
    let out = run(&["extract", "--lambda", "3+2i", "--value", "7+22i"]);
    assert!(out.status.success());
    assert_eq!(json(&out), serde_json::json!({"data": "5", "watermark": "4"}));

    let out = run(&["extract", "--lambda", "3+2i", "--value", "66+96i", "--n", "3"]);
    assert_eq!(json(&out), serde_json::json!({"data": "30", "watermark": "4"}));
}

#[test]
fn extract_of_non_multiple_exits_2() {
    let out = run(&["extract", "--lambda", "3+2i", "--value", "7+23i"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrity"));
}

#[test]
fn bad_watermark_key_exits_1() {
    let out = run(&["embed", "--lambda", "3", "--data", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn keygen_eg_reproduces_worked_example() {
    let dir = TempDir::new().unwrap();
    let out = hidden()
        .args(["keygen", "--scheme", "eg", "--p", "23", "--gamma", "1+2i", "--a", "7", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let public: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eg_public.json")).unwrap()).unwrap();
    assert_eq!(public["K"], serde_json::json!({"re": "6", "im": "2"}));
    assert_eq!(public["p"], "23");
    let private: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eg_private.json")).unwrap()).unwrap();
    assert_eq!(private["a"], "7");
    assert!(String::from_utf8_lossy(&out.stderr).contains("largest prime factor of p^2 - 1: 11"));
}

#[test]
fn keygen_eg_rejects_non_generator() {
    let out = run(&["keygen", "--scheme", "eg", "--p", "23", "--gamma", "1", "--a", "7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn keygen_paillier_from_primes() {
    let out = run(&["keygen", "--scheme", "paillier", "--p", "5", "--q", "7"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["public"]["n"], "35");
}

#[test]
fn keygen_is_reproducible_with_seed() {
    let a = run(&["--seed", "k", "keygen", "--scheme", "paillier", "--bits", "64"]);
    let b = hidden()
        .env("HIDDEN_SEED", "k")
        .args(["keygen", "--scheme", "paillier", "--bits", "64"])
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_flags_are_usage_errors() {
    assert_eq!(run(&["keygen"]).status.code(), Some(1));
    assert_eq!(run(&["keygen", "--scheme", "eg"]).status.code(), Some(1));
    assert_eq!(run(&["keygen", "--scheme", "paillier", "--p", "5"]).status.code(), Some(1));
    assert_eq!(run(&["embed", "--data", "5"]).status.code(), Some(1));
}

#[test]
fn simulate_three_sensor_example_accepts() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.json", THREE_SENSORS);
    let transcript = dir.path().join("t.jsonl");
    let out = simulate(&config, &transcript, "three-sensors");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("round 1: accepted data=30 watermark=4"));
    let last: serde_json::Value =
        serde_json::from_str(fs::read_to_string(&transcript).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!(last["verdict"]["status"], "accepted");
    assert_eq!(last["counters"]["messages_total"], 6);
}

#[test]
fn simulate_replay_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "c.json",
        r#"{"protocol":"eg","p_bits":64,"B":16,"M":2,"lambda":"3+2i",
            "data":{"uniform":{"min":-100,"max":100}},"attack":{"replay":{"from":1,"at":2}}}"#,
    );
    let out = simulate(&config, &dir.path().join("t.jsonl"), "replay");
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("round 1: accepted"));
    assert!(text.contains("round 2: rejected"));
}

#[test]
fn single_sensor_aggp_uses_two_messages() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "c.json",
        r#"{"protocol":"aggp","paillier_bits":128,"N":1,"data":{"inline":[[42]]}}"#,
    );
    let transcript = dir.path().join("t.jsonl");
    assert!(simulate(&config, &transcript, "one").status.success());
    let last: serde_json::Value =
        serde_json::from_str(fs::read_to_string(&transcript).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!(last["counters"]["messages_total"], 2);
}

#[test]
fn simulate_config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let t = dir.path().join("t.jsonl");
    let unknown = write_config(&dir, "a.json", r#"{"protocol":"nope","data":{"inline":[[1]]}}"#);
    assert_eq!(simulate(&unknown, &t, "x").status.code(), Some(1));
    let malformed = write_config(&dir, "b.json", "{");
    assert_eq!(simulate(&malformed, &t, "x").status.code(), Some(1));
    let eg_many = write_config(
        &dir,
        "c.json",
        r#"{"protocol":"eg","p_bits":64,"N":2,"data":{"inline":[[1,2]]}}"#,
    );
    assert_eq!(simulate(&eg_many, &t, "x").status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(simulate(&missing, &t, "x").status.code(), Some(1));
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = TempDir::new().unwrap();
    let base = r#""protocol":"aggp","paillier_bits":128,"N":2,"data":{"uniform":{"min":0,"max":9}}"#;
    let with_seed = write_config(&dir, "a.json", &format!(r#"{{{base},"seed":"in-file"}}"#));
    let without = write_config(&dir, "b.json", &format!("{{{base}}}"));
    let (ta, tb) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    assert!(simulate(&with_seed, &ta, "flag").status.success());
    assert!(simulate(&without, &tb, "flag").status.success());
    assert_eq!(fs::read(&ta).unwrap(), fs::read(&tb).unwrap());

    let out = hidden()
        .args(["simulate", "--config"])
        .arg(&with_seed)
        .arg("--transcript")
        .arg(&tb)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stderr.is_empty(), "config seed used, nothing drawn");
    assert_ne!(fs::read(&ta).unwrap(), fs::read(&tb).unwrap());
}

#[test]
fn random_seed_is_reported() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "c.json", r#"{"protocol":"aggp","paillier_bits":128,"data":{"inline":[[1]]}}"#);
    let out = hidden().args(["simulate", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("seed: "));
}

#[test]
fn counters_match_cost_model() {
    let dir = TempDir::new().unwrap();
    let eg = write_config(
        &dir,
        "eg.json",
        r#"{"protocol":"eg","p_bits":64,"B":16,"M":2,"data":{"uniform":{"min":-100,"max":100}}}"#,
    );
    let aggp = write_config(
        &dir,
        "aggp.json",
        r#"{"protocol":"aggp","paillier_bits":128,"N":5,"B":16,"data":{"uniform":{"min":-100,"max":100}}}"#,
    );
    for (config, needles) in [
        (eg, vec!["equivalent_int_modexp          8         8  ok", "equivalent_int_modexp         13        13  ok"]),
        (aggp, vec!["sensor   modexp_n2                      4         4  ok", "messages_total                10        10  ok"]),
    ] {
        let t = dir.path().join("t.jsonl");
        assert!(simulate(&config, &t, "counters").status.success());
        let out = hidden().args(["counters", "--transcript"]).arg(&t).output().unwrap();
        assert!(out.status.success());
        let table = stdout(&out);
        assert!(!table.contains("MISMATCH"), "{table}");
        for needle in needles {
            assert!(table.contains(needle), "{needle:?} missing from\n{table}");
        }
    }
}

#[test]
fn counters_on_empty_transcript_fail() {
    let dir = TempDir::new().unwrap();
    let t = dir.path().join("empty.jsonl");
    fs::write(&t, "").unwrap();
    let out = hidden().args(["counters", "--transcript"]).arg(&t).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
