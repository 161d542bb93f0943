use std::process::Command;

use boxworld::cli::run_args;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    run_args(std::iter::once("boxworld").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn chsh_at_infinity_wins_always() {
    let v = json(&["chsh", "--p", "inf"]);
    assert_eq!(v["win_probability"], 1.0);
    assert_eq!(v["gbit_box"], 1.0);
}

#[test]
fn table1_rows() {
    let v = json(&["table1", "--p", "2"]);
    let rows = v["rows"].as_array().unwrap();
    let row = |name: &str| rows.iter().find(|r| r["property"] == name).unwrap()["cells"].clone();
    let chsh = row("CHSH win probability");
    for i in 0..4 {
        assert!((chsh[i]["value"].as_f64().unwrap() - 0.8535533905932737).abs() < 1e-9);
        assert_eq!(chsh[i]["source"], "computed");
    }
    assert_eq!(chsh[4]["value"], 0.75);
    let rac = row("RAC bits to encode N bits");
    let values: Vec<&str> = (0..5).map(|i| rac[i]["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["O(polylog(N))", "O(polylog(N))", "?", "Ω(N)", "Ω(N)"]);
    assert!((0..5).all(|i| rac[i]["source"] == "claimed"));
    let sim = row("simultaneous measurements");
    let values: Vec<&str> = (0..5).map(|i| sim[i]["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["no", "local", "commuting", "commuting", "all"]);
}

#[test]
fn psphere_csv() {
    let (code, out, _) = run(&["psphere", "--p", "10000", "--samples", "40", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("p,x,y"));
    let mut count = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let m = f[1].abs().max(f[2].abs());
        assert!((1.0 - 1e-3..=1.0).contains(&m), "{line}");
        count += 1;
    }
    assert_eq!(count, 40);
}

#[test]
fn rac_verify_perfect_at_infinity() {
    let v = json(&["rac", "verify", "--n", "2", "--p", "inf", "--trials", "200"]);
    assert_eq!(v["perfect_strings"], 512);
    assert_eq!(v["strings_checked"], 512);
    let (code, out, _) = run(&["rac", "verify", "--n", "1", "--p", "2", "--trials", "500", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("index,exact_q,empirical_q,trials\n"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn encode_decode_round_trip() {
    let dir = std::env::temp_dir().join(format!("boxworld-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.json");
    let (code, out, _) = run(&["rac", "encode", "--n", "1", "--p", "inf", "--theory", "gnst", "--bits", "101"]);
    assert_eq!(code, 0);
    std::fs::write(&path, out).unwrap();
    let file = path.to_str().unwrap();
    for (j, bit) in [1u64, 0, 1].into_iter().enumerate() {
        let v = json(&["rac", "decode", "--file", file, "--index", &j.to_string()]);
        assert_eq!(v["decoded"]["bit"], bit);
        assert_eq!(v["decoded"]["probability"], 1.0);
    }
    let v = json(&["validate", "--file", file, "--p", "inf"]);
    assert_eq!(v["kind"], "gnst");
    // a perfect code breaks every finite uncertainty relation
    assert_eq!(run(&["validate", "--file", file, "--p", "2"]).0, 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn validate_prints_the_chain_and_flags_invalid_states() {
    let dir = std::env::temp_dir().join(format!("boxworld-validate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.json");
    let bad = dir.join("bad.json");
    std::fs::write(&good, r#"{"kind":"coeff","n":1,"terms":[{"pauli":"Z","coeff":0.5}]}"#).unwrap();
    std::fs::write(&bad, r#"{"kind":"coeff","n":1,"terms":[{"pauli":"X","coeff":1},{"pauli":"Z","coeff":1}]}"#)
        .unwrap();
    let v = json(&["validate", "--file", good.to_str().unwrap(), "--p", "2"]);
    assert_eq!(v["classification"]["level"], "quantum-consistent");
    assert_eq!(v["classification"]["reports"].as_array().unwrap().len(), 4);
    let (code, out, _) = run(&["validate", "--file", bad.to_str().unwrap(), "--p", "2"]);
    assert_eq!(code, 1);
    assert!(out.contains("\"invalid\""));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nonsense"]).0, 2);
    assert_eq!(run(&["chsh", "--p", "abc"]).0, 2);
    assert_eq!(run(&["oracle", "verify"]).0, 2);
    assert_eq!(run(&["oracle", "verify", "--claim", "made-up"]).0, 2);
    assert_eq!(run(&["oracle", "verify", "--claim", "pgnstRAC", "--n", "1"]).0, 0);
}

#[test]
fn json_output_is_deterministic() {
    let args = ["pir", "--n", "27", "--p", "2", "--trials", "2000", "--seed", "4"];
    assert_eq!(run(&args).1, run(&args).1);
    let args = ["oracle", "verify", "--claim", "tensor", "--trials", "30", "--seed", "8"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn comm_and_learn() {
    let v = json(&["comm", "ip", "--n", "4", "--p", "inf"]);
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["exhaustive"], true);
    assert_eq!(v["cost"]["carriers"], 3);
    let v = json(&["learn", "--n-hat", "100", "--p", "2"]);
    assert_eq!(v["threshold"]["n"], 3);
    assert!((v["threshold"]["bound"]["value"].as_f64().unwrap() - 46.051701859880914).abs() < 1e-9);
}

#[test]
fn binary_reads_seed_from_environment() {
    let exe = env!("CARGO_BIN_EXE_boxworld");
    let out = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(exe);
        c.args(["pir", "--n", "9", "--p", "inf"]).args(extra).env_remove("BOXWORLD_SEED");
        if let Some(seed) = env {
            c.env("BOXWORLD_SEED", seed);
        }
        let o = c.output().unwrap();
        assert!(o.status.success());
        String::from_utf8(o.stdout).unwrap()
    };
    assert_eq!(out(Some("17"), &[]), out(None, &["--seed", "17"]));
    assert_eq!(out(None, &[]), out(None, &["--seed", "0"]));
    let status = Command::new(exe).arg("frobnicate").output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}
