use std::path::PathBuf;
use std::process::Command;

fn data(file: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../core/data");
    p.push(file);
    p.to_string_lossy().into_owned()
}

fn dmn(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_dmn"))
        .args(args)
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

fn tmp(name: &str, contents: &str) -> String {
    let p = std::env::temp_dir().join(format!("dmn-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_caps(out: &str) -> Vec<f64> {
    out.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn validate_exit_codes() {
    let (out, _, code) = dmn(&["validate", "--spec", &data("bscfb.json")]);
    assert_eq!((out.as_str(), code), ("ok\n", 0));

    let text = std::fs::read_to_string(data("bscfb.json")).unwrap();
    let truncated = tmp("trunc.json", &text[..text.len() / 2]);
    assert_eq!(dmn(&["validate", "--spec", &truncated]).2, 2);

    let skewed = tmp("skew.json", &text.replacen("0.89", "0.7", 1));
    let (out, _, code) = dmn(&["validate", "--spec", &skewed]);
    assert_eq!(code, 1);
    assert!(out.contains("not stochastic"), "{out}");

    assert_eq!(dmn(&["validate", "--spec", "/nonexistent/spec.json"]).2, 2);
}

#[test]
fn feasibility_queries() {
    let bscfb = data("bscfb.json");
    assert_eq!(dmn(&["feasible", "--spec", &bscfb, "--profile", "1,0"]).0, "1,0: feasible\n");
    assert_eq!(dmn(&["feasible", "--spec", &bscfb, "--profile", "0,0"]).0, "0,0: infeasible\n");
    let (out, _, _) = dmn(&["feasible", "--spec", &data("classical_bsc.json"), "--all", "--format", "csv"]);
    assert_eq!(out, "profile,feasible\n\"1,1\",true\n");
    assert_eq!(dmn(&["feasible", "--spec", &bscfb, "--profile", "1,x"]).2, 1);
    assert_eq!(dmn(&["feasible", "--spec", &bscfb]).2, 2);
}

#[test]
fn bound_examples() {
    let bscfb = data("bscfb.json");
    let (out, _, code) = dmn(&["bound", "--spec", &bscfb, "--grid", "8", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("cut,term_1,term_2,cap\n"));
    let caps = csv_caps(&out);
    assert!((caps[0] - 0.5001).abs() < 1e-3 && (caps[1] - 1.0).abs() < 1e-3);

    let (out, _, _) = dmn(&["bound", "--spec", &bscfb, "--grid", "8", "--mode", "positive-delay", "--format", "csv"]);
    assert!(csv_caps(&out).iter().all(|&c| c <= 0.5101));

    for mode in ["capacity", "positive-delay"] {
        let (out, _, _) = dmn(&["bound", "--spec", &data("classical_bsc.json"), "--grid", "16", "--mode", mode, "--cut", "1", "--format", "csv"]);
        let caps = csv_caps(&out);
        assert_eq!(caps.len(), 1);
        assert!((caps[0] - 0.1887).abs() < 1e-4);
    }

    let (_, err, code) = dmn(&["bound", "--spec", &bscfb, "--grid", "40"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn region_verdicts() {
    let bscfb = data("bscfb.json");
    let (out, _, _) = dmn(&["region", "--spec", &bscfb, "--rates", "1,2=0.45;2,1=0.95"]);
    assert!(out.contains(": inside"), "{out}");
    let (out, _, _) = dmn(&["region", "--spec", &bscfb, "--rates", "1,2=0.6"]);
    assert!(out.contains("not-found-at-this-resolution"), "{out}");
}

#[test]
fn gaussian_report() {
    let (out, _, code) = dmn(&["gaussian", "--power", "5", "--report-only"]);
    assert_eq!(code, 0);
    assert!(out.contains("1.160964") && out.contains("1.729716") && out.contains("separated=true"));
    let (out, _, _) = dmn(&["gaussian", "--power", "1", "--report-only"]);
    assert!(out.contains("separated=false"));
    let (out, _, _) = dmn(&["gaussian", "--power", "5", "--n", "4", "--trace", "0"]);
    assert_eq!(out.lines().next(), Some("slot,x1,z2,y2,x2,z3,y3"));
    assert_eq!(out.lines().count(), 5);
    assert_eq!(dmn(&["gaussian", "--power", "5", "--delta", "6"]).2, 1);
    assert_eq!(dmn(&["gaussian", "--power", "5", "--explicit", "--codebook-n", "24"]).2, 3);
}

#[test]
fn bscfb_command() {
    let (out, _, code) = dmn(&["bscfb", "--eps", "0.11", "--n", "400", "--rate", "0.3", "--trials", "20", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let pairs = v["errors"]["pairs"].as_array().unwrap();
    assert_eq!(pairs[1]["from"], 2);
    assert_eq!(pairs[1]["errors"], 0);
    assert_eq!(dmn(&["bscfb", "--eps", "0.11", "--rate", "0.6"]).2, 1);
}

#[test]
fn simulate_and_check_bundled_code() {
    let (spec, code) = (data("bscfb.json"), data("bscfb_code.json"));
    let (out, _, _) = dmn(&["simulate", "--spec", &spec, "--code", &code, "--trials", "200", "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "from,to,trials,errors,estimate,half_width");
    assert!(lines[2].starts_with("2,1,200,0,"));
    let (out, _, _) = dmn(&["simulate", "--spec", &spec, "--code", &code, "--trace", "0"]);
    assert_eq!(out.lines().next(), Some("slot,node,X,Y"));
    let (out, _, code_) = dmn(&["check", "--spec", &spec, "--code", &code, "--format", "json"]);
    assert_eq!(code_, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["memoryless"].as_array().unwrap().iter().all(|m| m["mi"].as_f64().unwrap() <= 1e-9));
}

#[test]
fn generate_matches_bundled_files() {
    for (name, file) in [
        ("bscfb", "bscfb.json"),
        ("classical-bsc", "classical_bsc.json"),
        ("deterministic", "deterministic.json"),
        ("causal-relay", "causal_relay.json"),
        ("sample-code", "bscfb_code.json"),
    ] {
        assert_eq!(dmn(&["generate", name]).0, std::fs::read_to_string(data(file)).unwrap());
    }
    assert_eq!(
        dmn(&["generate", "bscfb", "--eps", "0.11"]).0,
        std::fs::read_to_string(data("bscfb.json")).unwrap()
    );
    assert_eq!(dmn(&["generate", "nope"]).2, 1);
}
