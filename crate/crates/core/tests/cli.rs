use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use unitaylor::cli::DEMOS;
use unitaylor::poly::Poly;
use unitaylor::scenario::Scenario;
use unitaylor::universal::{run_construction, Certificate};
use unitaylor::verify::Catalog;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unitaylor")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_cert(dir: &Path) -> Certificate {
    Certificate::from_json(&std::fs::read_to_string(dir.join("certificate.json")).unwrap()).unwrap()
}

#[test]
fn construct_then_verify() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = run(&["construct", s(&scenarios().join("one-stage.json")), "--out-dir", s(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["stream.json", "certificate.json", "errors.csv", "fit_stage0.json", "fit_stage0.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let cert = read_cert(&out);
    assert!(cert.body.passed);
    assert!(cert.body.stages.iter().all(|st| st.e_side_error < 1e-3));
    let csv = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("stage,lambda,e_side_error,f_side_error,max_degree"));
    assert_eq!(csv.lines().count(), 2);

    let res = run(&["verify", s(&out.join("stream.json")), s(&out.join("certificate.json"))]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));

    let mut forged = cert.clone();
    forged.body.stages[0].e_side_error /= 2.0;
    let bad = tmp.path().join("forged.json");
    std::fs::write(&bad, forged.to_json()).unwrap();
    assert_eq!(code(&run(&["verify", s(&out.join("stream.json")), s(&bad)])), 1);

    assert_eq!(code(&run(&["verify", s(&out.join("missing.json")), s(&out.join("certificate.json"))])), 2);
}

#[test]
fn malformed_json_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"domains\": [,\n").unwrap();
    let res = run(&["construct", s(&bad), "--out-dir", s(&tmp.path().join("o"))]);
    assert_eq!(code(&res), 2);
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn schema_violations_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let base: serde_json::Value = serde_json::from_str(DEMOS[0].1).unwrap();
    type Edit = fn(&mut serde_json::Value);
    let edits: [(&str, Edit); 4] = [
        ("non-graded enumeration", |v| {
            v["domains"] = serde_json::json!([{"type": "disk", "center": [0, 0], "radius": 1}, {"type": "disk", "center": [0, 0], "radius": 1}]);
            v["enumeration"] = "diagonal-cantor".into();
        }),
        ("unknown mu tag", |v| v["mu"] = "mu:primes".into()),
        ("negative tolerance", |v| v["schedule"][0]["tolerance"] = (-1.0).into()),
        ("outer compact inside the domain", |v| {
            v["schedule"][0]["outer"] = serde_json::json!([{"type": "disk", "center": [0.2, 0], "radius": 0.1}])
        }),
    ];
    for (what, edit) in edits {
        let mut sc = base.clone();
        edit(&mut sc);
        let path = tmp.path().join("bad.json");
        std::fs::write(&path, sc.to_string()).unwrap();
        assert_eq!(code(&run(&["construct", s(&path), "--out-dir", s(&tmp.path().join("o"))])), 2, "{what}");
    }
}

#[test]
fn infeasible_stage_writes_partial_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut sc = Scenario::from_json(DEMOS[0].1).unwrap();
    sc.schedule[0].tolerance = Some(1e-15);
    sc.options.degree_budget = 5;
    let path = tmp.path().join("hard.json");
    std::fs::write(&path, sc.to_json()).unwrap();
    let out = tmp.path().join("o");
    let res = run(&["construct", s(&path), "--out-dir", s(&out)]);
    assert_eq!(code(&res), 1);
    let cert = read_cert(&out);
    assert!(!cert.body.passed);
    assert_eq!(cert.body.stages.len(), 1);
    assert!(cert.body.stages[0].failure.is_some());
    // an untampered failed run is reported as failed, without mismatches
    let res = run(&["verify", s(&out.join("stream.json")), s(&out.join("certificate.json"))]);
    assert_eq!(code(&res), 1);
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let issues: Vec<String> = report["issues"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    assert!(issues.iter().all(|i| !i.contains("hash") && !i.contains("recomputed")), "{issues:?}");
}

#[test]
fn identical_runs_give_identical_bodies() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let path = scenarios().join("two-stage.json");
    for dir in [&a, &b] {
        assert_eq!(code(&run(&["construct", s(&path), "--out-dir", s(dir), "--seed", "7"])), 0);
    }
    let (ca, cb) = (read_cert(&a), read_cert(&b));
    assert_eq!(serde_json::to_vec(&ca.body).unwrap(), serde_json::to_vec(&cb.body).unwrap());
    assert_eq!(ca.body_sha256, cb.body_sha256);
    assert_eq!(ca.body.seed, 7);
    assert_eq!(std::fs::read(a.join("stream.json")).unwrap(), std::fs::read(b.join("stream.json")).unwrap());
}

#[test]
fn flags_override_the_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let path = scenarios().join("one-stage.json");
    let res = run(&[
        "construct",
        s(&path),
        "--out-dir",
        s(&out),
        "--fixed-center",
        "0,0",
        "--variant",
        "infty:1",
        "--density",
        "0.03",
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let cert = read_cert(&out);
    assert_eq!(cert.body.variant, "infty:1");
    assert_eq!(cert.body.density, 0.03);
    assert_eq!(cert.body.reference_center, vec![[0.0, 0.0]]);
    assert_eq!(code(&run(&["verify", s(&out.join("stream.json")), s(&out.join("certificate.json"))])), 0);
    assert_eq!(code(&run(&["construct", s(&path), "--variant", "bogus"])), 2);
}

#[test]
fn log_level_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_unitaylor"))
        .args(["demo", "one-stage", "--out-dir", s(&tmp.path().join("o"))])
        .env("UNITAYLOR_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stderr).contains("stage 0"));
    let quiet = run(&["demo", "one-stage", "--out-dir", s(&tmp.path().join("q"))]);
    assert!(!String::from_utf8_lossy(&quiet.stderr).contains("stage 0"));
}

#[test]
fn demo_listing_and_runs() {
    let res = run(&["demo"]);
    assert_eq!(code(&res), 0);
    let listed = String::from_utf8_lossy(&res.stdout);
    for (name, _) in DEMOS {
        assert!(listed.lines().any(|l| l == *name));
    }
}

#[test]
fn demo_fits_hold_up_on_the_denser_grid() {
    for (name, text) in DEMOS {
        let built = run_construction(&Scenario::from_json(text).unwrap().plan().unwrap()).unwrap();
        assert!(built.passed(), "{name}");
        for fit in &built.fits {
            for (op, e) in &fit.achieved_errors {
                let on_fit = fit.fit_grid_errors[op];
                assert!(*e <= 2.0 * on_fit.max(1e-14), "{name} {op}: verify {e:e} fit {on_fit:e}");
            }
        }
    }
}

fn write_specs(dir: &Path, specs: &serde_json::Value) -> PathBuf {
    let p = dir.join("specs.json");
    std::fs::write(&p, specs.to_string()).unwrap();
    p
}

#[test]
fn predicates_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cand = scenarios().join("candidate.json");
    let empty = write_specs(tmp.path(), &serde_json::json!([]));
    let res = run(&["predicates", s(&cand), s(&empty)]);
    assert_eq!(code(&res), 0);
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 0);

    let res = run(&["predicates", s(&cand), s(&scenarios().join("predicate-specs.json"))]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 4);

    // candidate = f_j itself, n past its capture index: every E-check passes
    let j = 4321;
    let fj = Catalog::new(0, 1).resolve(j).unwrap();
    let fj_path = tmp.path().join("fj.json");
    std::fs::write(&fj_path, Poly::to_json(&fj)).unwrap();
    let specs: Vec<serde_json::Value> =
        (1..=5).map(|m| serde_json::json!({"tau": 1, "p": m, "m": m, "j": j, "s": 1_000_000, "n": 500})).collect();
    let batch = serde_json::json!({"domains": [{"type": "disk", "center": [0, 0], "radius": 1}], "specs": specs});
    let res = run(&["predicates", s(&fj_path), s(&write_specs(tmp.path(), &batch))]);
    assert_eq!(code(&res), 0);
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    for rec in report["records"].as_array().unwrap() {
        assert_eq!(rec["e"]["pass"], true, "{rec}");
    }

    let bad_index = write_specs(tmp.path(), &serde_json::json!([{"tau": 1, "p": 1, "m": 1, "j": 0, "s": 1, "n": 1}]));
    assert_eq!(code(&run(&["predicates", s(&cand), s(&bad_index)])), 2);
}

#[test]
fn hundred_predicates_within_a_minute() {
    let tmp = tempfile::tempdir().unwrap();
    let cand = scenarios().join("candidate.json");
    let specs: Vec<serde_json::Value> = (0..100u64)
        .map(|i| {
            let variant = ["plain", "strong:1", "infty:1", "infty:2"][(i % 4) as usize];
            serde_json::json!({"tau": 1, "p": 1 + i % 4, "m": 1 + i % 9, "j": 1 + 37 * i, "s": 1 + i, "n": i % 12, "variant": variant})
        })
        .collect();
    let path = write_specs(tmp.path(), &serde_json::Value::Array(specs));
    let start = Instant::now();
    let res = run(&["predicates", s(&cand), s(&path)]);
    let took = start.elapsed().as_secs_f64();
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 100);
    assert!(took < 60.0, "{took} s");
}
