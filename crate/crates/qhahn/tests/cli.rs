//! The `qhahn` binary: exit statuses, output formats and determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qhahn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhahn"))
        .args(args)
        .env("QHAHN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qhahn-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_trio_passes() {
    let out = qhahn(&[
        "verify",
        "--family",
        "al_salam_carlitz_1",
        "--q",
        "1/2",
        "--a",
        "2",
        "--N",
        "10",
        "--relations",
        "classical_trio",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["relation"], "CLASSICAL_TRIO");
    assert_eq!(reports[0]["pass"], true);
    assert!(reports[0]["witness"].is_null());
    assert_eq!(doc["config"]["a"], "2");
}

#[test]
fn freud_emits_everything() {
    let out = qhahn(&[
        "freud", "--c1", "1/2", "--c2", "1/3", "--K", "4", "--q", "1/2", "--N", "12",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    for key in ["c", "a", "moments", "psi", "reports", "class"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["c"][3], "1/128");
    assert_eq!(doc["class"], 2);
    let moments = doc["moments"].as_array().unwrap();
    assert!(moments.iter().skip(1).step_by(2).all(|m| m == "0"));
    assert!(doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["pass"] == true));
}

#[test]
fn malformed_rational_exits_2_naming_the_flag() {
    let out = qhahn(&["verify", "--family", "q_laguerre", "--q", "1/0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--q"), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(qhahn(&["verify", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(qhahn(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failing_relation_exits_1_and_still_writes() {
    let path = scratch("fail.json");
    let out = qhahn(&[
        "verify",
        "--family",
        "q_charlier",
        "--q",
        "1/2",
        "--N",
        "8",
        "--relations",
        "diagonal",
        "--sigma",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let r = &doc["reports"][0];
    assert_eq!(r["pass"], false);
    assert!(r["witness"]["n"].is_number());
}

#[test]
fn csv_layout_and_order() {
    let out = qhahn(&[
        "verify",
        "--family",
        "q_laguerre",
        "--q",
        "2/3",
        "--N",
        "6",
        "--relations",
        "second_struct_classical,first_struct",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("relation,n,nu,value"));
    let keys: Vec<(String, usize, usize)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].split('.').next().unwrap().to_string(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert!(keys.first().unwrap().0 == "FIRST_STRUCT");
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| {
        let rank = |s: &str| if s == "FIRST_STRUCT" { 0 } else { 1 };
        (rank(&a.0), a.1, a.2).cmp(&(rank(&b.0), b.1, b.2))
    });
    assert_eq!(keys, sorted);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = [
        "verify",
        "--family",
        "big_q_jacobi",
        "--q",
        "3/2",
        "--N",
        "7",
    ];
    let a = qhahn(&args);
    let b = qhahn(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_config_file() {
    let path = scratch("cfg.json");
    fs::write(
        &path,
        r#"{"family": "q_laguerre", "q": "1/2", "a": "2/5", "N": 5}"#,
    )
    .unwrap();
    let out = qhahn(&["ttrr", "--config", path.to_str().unwrap(), "--N", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["config"]["N"], 4);
    assert_eq!(doc["config"]["q"], "1/2");
    assert_eq!(doc["polys"].as_array().unwrap().len(), 5);
}

#[test]
fn class1_and_reduce() {
    let out = qhahn(&[
        "class1",
        "--psi",
        r#"["1","2","3"]"#,
        "--m1",
        "1/5",
        "--q",
        "1/2",
        "--N",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class"], 1);
    let out = qhahn(&[
        "reduce",
        "--family",
        "big_q_jacobi",
        "--q",
        "1/2",
        "--N",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["class"], 0);
}

#[test]
fn uniform_pearson_source() {
    let out = qhahn(&[
        "verify",
        "--psi",
        r#"["0","1","0","-4"]"#,
        "--q",
        "1",
        "--free",
        r#"["0","1/2"]"#,
        "--N",
        "8",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(doc["source"], "pearson");
    assert_eq!(doc["reports"].as_array().unwrap().len(), 6);
}

#[test]
fn moments_match_family_normalization() {
    let out = qhahn(&[
        "moments",
        "--family",
        "q_charlier",
        "--q",
        "1/2",
        "--N",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("relation,n,nu,value\nmoment,0,0,1\n"));
}
