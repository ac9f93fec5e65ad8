use std::process::Command;

use serde_json::Value;
use siegel_bounds::cli::run;
use siegel_bounds::numeric::ExpSumValue;

const M1: &str = r#"{"g":1,"twice_m":[[2]]}"#;
const A2: &str = r#"{"g":2,"twice_m":[[2,1],[1,2]]}"#;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("siegel-bounds").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).expect("output is JSON")
}

#[test]
fn gauss_both_methods() {
    let v = json(&["gauss", "--a", "1", "--b", "0", "--c", "3", "--method", "both"]);
    assert!(v["diff"].as_f64().unwrap() <= 1e-9);
    assert!((v["brute"]["im"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
    assert!(v["closed"]["re"].as_f64().unwrap().abs() < 1e-12);
    let only = json(&["gauss", "--a", "-3", "--b", "-5", "--c", "11", "--method", "closed"]);
    assert!(only.get("brute").is_none());
}

#[test]
fn exponents_are_exact_strings() {
    let v = json(&["exponents", "--g", "5", "--k", "4"]);
    assert_eq!(v["alpha"], "7/170");
    assert_eq!(v["theorem1"], "2423/1275");
    assert_eq!(v["tk"], "836/425");
    assert_eq!(v["tk_in_range"], false);
    assert_eq!(v["improvement"], "-1/15");
    let g_only = json(&["exponents", "--g", "2"]);
    assert_eq!(g_only["c_g"], "13/36");
}

#[test]
fn kloosterman_example_and_round_trip() {
    let (code, out, _) =
        invoke(&["kloosterman", "--m", M1, "--c", "3", "--n", "1", "--r", "0", "--n2", "1", "--r2", "0"]);
    assert_eq!(code, 0);
    let h: ExpSumValue = serde_json::from_str(&out).unwrap();
    assert!((h.re() - 3.0).abs() <= 1e-12 + h.abs_error);
    assert!(h.im().abs() <= 1e-12 + h.abs_error);
}

#[test]
fn methods_agree_within_printed_error() {
    let cases: [&[&str]; 3] = [
        &["--m", A2, "--c", "12", "--n", "2", "--r", "1,-1", "--n2", "2", "--r2", "-1,0"],
        &["--m", M1, "--c", "45", "--n", "3", "--r", "1", "--n2", "5", "--r2", "-1"],
        &["--m", r#"{"g":2,"twice_m":[[2,0],[0,6]]}"#, "--c", "75", "--n", "1", "--r", "1,1", "--n2", "2", "--r2", "0,1"],
    ];
    for case in cases {
        let values: Vec<ExpSumValue> = ["brute", "crt", "fast"]
            .iter()
            .map(|m| {
                let mut args = vec!["kloosterman"];
                args.extend_from_slice(case);
                args.extend_from_slice(&["--method", m]);
                let (code, out, err) = invoke(&args);
                assert_eq!(code, 0, "{err}");
                serde_json::from_str(&out).unwrap()
            })
            .collect();
        for v in &values[1..] {
            assert!(values[0].agrees_with(v, 0.0), "{values:?}");
        }
    }
}

#[test]
fn exit_codes() {
    let (code, _, err) = invoke(&["kloosterman", "--m", "{not json", "--c", "3", "--n", "1", "--r", "0", "--n2", "1", "--r2", "0"]);
    assert_eq!(code, 2);
    assert!(err.contains("matrix JSON"));
    // Odd diagonal: not half-integral.
    let (code, _, _) = invoke(&["delta", "--m", r#"{"g":1,"twice_m":[[3]]}"#, "--n", "1", "--r", "0", "--n2", "1", "--r2", "0"]);
    assert_eq!(code, 2);
    assert_eq!(invoke(&["exponents", "--g", "4", "--k", "3"]).0, 2);
    assert_eq!(invoke(&["exponents", "--g", "5", "--k", "4", "--bogus"]).0, 2);
    assert_eq!(invoke(&["frobnicate"]).0, 2);
    assert_eq!(invoke(&["bessel", "--nu", "1", "--t", "0"]).0, 2);
    let (code, _, err) = invoke(&[
        "kloosterman", "--m", r#"{"g":3,"twice_m":[[2,0,0],[0,2,0],[0,0,2]]}"#, "--c", "997", "--n", "1",
        "--r", "0,0,0", "--n2", "1", "--r2", "0,0,0", "--method", "brute", "--work-limit", "1000",
    ]);
    assert_eq!(code, 3, "{err}");
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("kloosterman"));
}

#[test]
fn output_is_independent_of_thread_count() {
    let base = ["poincare", "--k", "12", "--m", A2, "--n", "1", "--r", "1,0", "--c-max", "40", "--pm"];
    let outputs: Vec<String> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let mut args = base.to_vec();
            args.extend_from_slice(&["--threads", t]);
            let (code, out, err) = invoke(&args);
            assert_eq!(code, 0, "{err}");
            out
        })
        .collect();
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn poincare_pm_is_real() {
    let v = json(&["poincare", "--k", "11", "--m", M1, "--n", "2", "--r", "1", "--c-max", "60", "--pm"]);
    let value = &v["value"];
    assert!(value["im"].as_f64().unwrap().abs() <= value["abs_error"].as_f64().unwrap());
    assert_eq!(v["tail_is_heuristic"], true);
    let delta_only = json(&["poincare", "--k", "12", "--m", M1, "--n", "1", "--r", "0", "--c-max", "0"]);
    assert_eq!(delta_only["value"]["re"], 1.0);
    assert_eq!(invoke(&["poincare", "--k", "2", "--m", M1, "--n", "1", "--r", "0"]).0, 2);
    let permissive = json(&["poincare", "--k", "2", "--m", M1, "--n", "1", "--r", "0", "--c-max", "5", "--permissive"]);
    assert!(!permissive["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn delta_bessel_forms_bcheck() {
    assert_eq!(json(&["delta", "--m", M1, "--n", "1", "--r", "1", "--n2", "1", "--r2", "-1"])["delta"], 1);
    assert_eq!(json(&["delta", "--m", M1, "--n", "1", "--r", "1", "--n2", "2", "--r2", "-1"])["delta"], 0);

    let b = json(&["bessel", "--nu", "0.5", "--t", &std::f64::consts::FRAC_PI_2.to_string()]);
    assert!((b["value"].as_f64().unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-14);

    let f = json(&["forms", "--m", A2, "--n", "1", "--r", "1,0"]);
    assert_eq!(f["discriminant"], f["discriminant_split"]);
    assert_eq!(f["det2m"], "3");

    let c = json(&["bcheck", "--g", "7", "--k", "6"]);
    assert_eq!(c["optimal_b"]["equal"], true);
    assert_eq!(c["dominance"]["last_term_dominates"], true);
    assert_eq!(c["pipeline"]["matches"], true);
    assert_eq!(invoke(&["bcheck", "--g", "4", "--k", "2"]).0, 2);
}

#[test]
fn csv_and_plain_formats() {
    let (code, out, _) = invoke(&["gauss", "--a", "1", "--b", "0", "--c", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(!out.contains('\r'));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("a,b,brute.abs_error"));

    let (code, out, _) = invoke(&["exponents", "--g", "5", "--k", "4", "--format", "plain"]);
    assert_eq!(code, 0);
    assert!(out.contains("theorem1: 2423/1275"));
}

#[test]
fn sweep_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    std::fs::write(
        &path,
        r#"{"g":1,"k":12,"m":{"g":1,"twice_m":[[2]]},"n_range":[1,2],"r_values":[[0],[1]],"c_range":[1,10]}"#,
    )
    .unwrap();
    let path = path.to_str().unwrap();
    let (code, out, err) = invoke(&["sweep", "--spec", path, "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[7..], ["magnitude", "bound", "ratio"]);
    assert_eq!(reader.records().count(), 40);

    let summary = json(&["sweep", "--spec", path]);
    for key in ["slope", "intercept", "r_squared", "max_ratio"] {
        assert!(summary[key].is_number(), "{key}");
    }
    assert_eq!(invoke(&["sweep", "--spec", "/nonexistent/spec.json"]).0, 2);
}

#[test]
fn binary_entry_point() {
    let out = Command::new(env!("CARGO_BIN_EXE_siegel-bounds"))
        .args(["exponents", "--g", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["alpha"], "3/49");
    let bad = Command::new(env!("CARGO_BIN_EXE_siegel-bounds")).args(["exponents", "--g", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
