use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilationkit"))
        .args(args)
        .env_remove("DILATIONKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn run_fixture(sub: &str, name: &str, extra: &[&str]) -> Output {
    let path = fixture(name);
    let mut args = vec![sub, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn mercedes_frame_is_tight() {
    let out = run_fixture("frame-analyze", "mercedes.json", &["--dual", "--dilate"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "frame-analyze");
    assert_eq!(r["artifacts"]["tight"], true);
    assert_eq!(r["artifacts"]["parseval"], false);
    let b = &r["artifacts"]["bounds"];
    assert!((b["lower"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((b["upper"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(r["artifacts"]["dilation"]["kind"], "riesz");
    assert_eq!(check(&r, "dual_pairing_residual")["pass"], true);
}

#[test]
fn complex_basis_dilates_to_an_orthonormal_basis() {
    let out = run_fixture("frame-analyze", "basis.json", &["--dilate"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["artifacts"]["parseval"], true);
    assert_eq!(r["artifacts"]["dilation"]["kind"], "orthonormal");
    assert_eq!(check(&r, "onb_orthonormality_residual")["pass"], true);
}

#[test]
fn rank_deficient_family_fails() {
    let out = run_fixture("frame-analyze", "rank_deficient.json", &[]);
    assert_eq!(code(&out), 1);
    assert_eq!(check(&report(&out), "frame_lower_bound")["pass"], false);
    assert_eq!(code(&run_fixture("frame-analyze", "rank_deficient.json", &["--dual"])), 1);
}

#[test]
fn naimark_dilation_of_a_povm() {
    let dir = tempfile::tempdir().unwrap();
    let triple = dir.path().join("triple.json");
    let out = run_fixture("ovm-dilate", "povm.json", &["--naimark", "--out", triple.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["artifacts"]["classification"]["probability"], true);
    assert_eq!(r["artifacts"]["classification"]["positive"], true);
    for name in ["isometry_residual", "dilation_residual", "spectrality_residual", "identity_residual"] {
        assert_eq!(check(&r, name)["pass"], true, "{name}");
    }
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&triple).unwrap()).unwrap();
    assert_eq!(t["method"], "naimark");
    assert_eq!(t["total_dim"], 3);
    assert_eq!(t["f_atoms"].as_array().unwrap().len(), 3);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(names.len(), 1, "no temporary files left behind");
}

#[test]
fn block_dilation_of_a_nonsquare_measure() {
    let out = run_fixture("ovm-dilate", "nonsquare.json", &["--block"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["artifacts"]["dilation"]["block_ranks"], serde_json::json!([2, 2, 1]));
    assert_eq!(check(&r, "rank_mismatches")["value"], 0.0);
    assert_eq!(check(&r, "identity_residual")["value"], 0.0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["name"] != "idempotent_residual"));
}

#[test]
fn block_dilation_of_a_framing_measure() {
    assert_eq!(code(&run_fixture("ovm-dilate", "framing_ovm.json", &["--block"])), 0);
}

#[test]
fn naimark_rejects_indefinite_atoms() {
    let out = run_fixture("ovm-dilate", "indefinite.json", &["--naimark"]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&run_fixture("ovm-dilate", "indefinite.json", &["--block"])), 0);
}

#[test]
fn naimark_rejects_nonsquare_atoms() {
    assert_eq!(code(&run_fixture("ovm-dilate", "nonsquare.json", &["--naimark"])), 1);
}

#[test]
fn ovm_dilate_needs_exactly_one_method() {
    assert_eq!(code(&run_fixture("ovm-dilate", "povm.json", &[])), 2);
    assert_eq!(code(&run_fixture("ovm-dilate", "povm.json", &["--naimark", "--block"])), 2);
}

#[test]
fn max_atoms_guard_is_a_usage_error() {
    assert_eq!(code(&run_fixture("ovm-dilate", "povm.json", &["--block", "--max-atoms", "2"])), 2);
}

#[test]
fn harmonic_framing_rescales_to_parseval() {
    let out = run_fixture("framing-rescale", "e11.json", &[]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["artifacts"]["parseval"], true);
    assert_eq!(r["artifacts"]["identity_plan"], false);
    let alphas = r["artifacts"]["alphas"].as_array().unwrap();
    assert_eq!(alphas.len(), 10);
    assert!((alphas[9].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn dual_pair_needs_no_rescaling() {
    let out = run_fixture("framing-rescale", "dualpair.json", &[]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["artifacts"]["identity_plan"], true);
}

#[test]
fn zero_pair_is_a_domain_error() {
    assert_eq!(code(&run_fixture("framing-rescale", "zero_pair.json", &[])), 1);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "vectors": [[1, 0], [0]]}"#).unwrap();
    assert_eq!(code(&run(&["frame-analyze", bad.to_str().unwrap()])), 2);
    std::fs::write(&bad, r#"{"dim": 2, "vectors": [[1, 0]], "extra": 1}"#).unwrap();
    assert_eq!(code(&run(&["frame-analyze", bad.to_str().unwrap()])), 2);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&run(&["frame-analyze", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["frame-analyze", "/nonexistent/input.json"])), 2);
}

#[test]
fn chl5_rejects_bad_exponents() {
    for p in ["2", "1", "0.5", "inf", "nan", "x"] {
        assert_eq!(code(&run(&["chl5", "--p", p])), 2, "p = {p}");
    }
    assert_eq!(code(&run(&["chl5", "--p", "4", "--nmax", "12"])), 2);
    assert_eq!(code(&run(&["chl5", "--p", "4", "--trials", "99"])), 2);
}

#[test]
fn chl5_report_is_sorted_and_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["--report", path.to_str().unwrap(), "chl5", "--p", "4", "--nmax", "4", "--trials", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    let r = report(&out);
    // Parsing sorts keys, so a byte-equal round trip means the output was sorted.
    let canonical = serde_json::to_string_pretty(&r).unwrap() + "\n";
    assert_eq!(String::from_utf8(out.stdout.clone()).unwrap(), canonical);
    assert_eq!(r["artifacts"]["assembled"]["dim"], 10);
    assert_eq!(r["artifacts"]["assembled"]["pairs"], 30);
    assert_eq!(r["inputs_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["chl5", "--p", "1.5", "--nmax", "5", "--trials", "200", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_dilationkit"))
        .args(args)
        .env("DILATIONKIT_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_dilationkit"))
        .args(args)
        .env("DILATIONKIT_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_dilationkit"))
        .args(args)
        .env("DILATIONKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}
