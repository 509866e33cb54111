use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn sgl(args: &[&str], spec: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgl"))
        .args(args)
        .arg("--spec")
        .arg(spec)
        .env_remove("SGL_SEED")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str], spec: &Path) -> Value {
    let out = sgl(args, spec);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn spec_file(dir: &tempfile::TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

#[test]
fn rays_of_linear_and_quadratic_exponents() {
    let v = ok_json(&["rays"], &fixture("exp_solution.json"));
    let angles = floats(&v["partition"]["critical_angles"]);
    assert_eq!(angles.len(), 2);
    assert!(
        (angles[0] - 1.5707963).abs() < 1e-7 && (angles[1] - 4.7123890).abs() < 1e-7,
        "{angles:?}"
    );

    let v = ok_json(&["rays"], &fixture("rays_z2.json"));
    assert_eq!(v["p"], "z^2");
    assert_eq!(floats(&v["partition"]["critical_angles"]).len(), 4);
    let signs: Vec<i64> = v["partition"]["sectors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["sign"].as_i64().unwrap())
        .collect();
    assert_eq!(signs, [-1, 1, -1, 1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str], spec: &Path| sgl(args, spec).status.code();

    let out = sgl(&["rays"], &fixture("bad_parse.json"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("position"));
    assert_eq!(code(&["rays"], &dir.path().join("missing.json")), Some(2));
    assert_eq!(
        code(
            &["rays"],
            &spec_file(&dir, "extra.json", r#"{"A":"1","B":"1","colour":2}"#)
        ),
        Some(2)
    );

    assert_eq!(code(&["rays"], &fixture("rays_const.json")), Some(3));
    let no_p = spec_file(&dir, "no_p.json", r#"{"A":"z+1","B":"1"}"#);
    assert_eq!(
        code(&["rays"], &no_p),
        Some(3),
        "no P and A is not a single exponential"
    );
    assert_eq!(
        code(
            &["solve"],
            &spec_file(&dir, "short.json", r#"{"A":"0","B":"0","truncation":50}"#)
        ),
        Some(3)
    );
    assert_eq!(
        code(
            &["solve"],
            &spec_file(&dir, "rmax.json", r#"{"A":"0","B":"0","r_max":5}"#)
        ),
        Some(3)
    );
    let mismatch = r#"{"A":"e^{z}","B":"1","decomposition":{"d":"2","P":"z"}}"#;
    assert_eq!(
        code(&["classify"], &spec_file(&dir, "mismatch.json", mismatch)),
        Some(3)
    );

    // f = e^{z^60}: a single nonzero coefficient in the upper half of 100 terms
    let sparse = r#"{"A":"0","B":"-(3540*z^58+3600*z^118)","truncation":100}"#;
    let out = sgl(&["solve"], &spec_file(&dir, "sparse.json", sparse));
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn solve_reports_running_orders() {
    let v = ok_json(&["solve"], &fixture("exp_solution.json"));
    let sol = &v["solutions"][0];
    let rho = sol["order"]["order"].as_f64().unwrap();
    assert!((0.98..=1.02).contains(&rho), "{rho}");

    let out = sgl(&["solve", "--format", "csv"], &fixture("zero.json"));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ic,k,log_abs_c,rho_k,flag"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 301);
    // f = 1 + 2z: windows [k/2, k] past k = 3 hold only zeros
    assert!(rows
        .iter()
        .filter(|r| r[1].parse::<usize>().unwrap() >= 4)
        .all(|r| r[4] == "polynomial"));
    assert_eq!(rows[1][4], "insufficient");
}

#[test]
fn frei_running_order_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(
        &dir,
        "frei.json",
        r#"{"A":"e^{-z}","B":"-2","initial_conditions":[[1,0,1,0],[-1,0,1,0]],"truncation":2000}"#,
    );
    let out = sgl(&["solve", "--format", "csv"], &spec);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for ic in ["0", "1"] {
        let rho: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|r| r[0] == ic && r[1].parse::<usize>().unwrap() > 500)
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(rho.len(), 1500);
        assert!(rho.windows(2).all(|w| w[1] >= w[0]), "ic {ic}");
    }
}

#[test]
fn classify_verdicts() {
    let rule = |name: &str| {
        ok_json(&["classify"], &fixture(name))["verdict"]["rule_applied"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(rule("case2.json"), "THEOREM_B_CASE_2");
    assert_eq!(rule("forced.json"), "THEOREM_A_FORCED");
    assert_eq!(rule("case_inconclusive.json"), "INCONCLUSIVE");
    assert_eq!(rule("frei_finite.json"), "FREI_FINITE");

    let v = ok_json(&["classify"], &fixture("hypothesis.json"));
    assert_eq!(v["hypothesis"]["reading"], "respective");
    assert!(v["hypothesis"]["rays"].as_array().unwrap().len() > 0);
}

#[test]
fn out_directory_receives_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("report");
    let spec = fixture("decaying_exp_solution.json");
    for (format, files) in [
        ("json", vec!["trace.json"]),
        ("csv", vec!["trace_rays.csv", "trace_modulus.csv"]),
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_sgl"))
            .args(["trace", "--format", format, "--out"])
            .arg(&out_dir)
            .arg("--spec")
            .arg(&spec)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
        for f in files {
            let text = std::fs::read_to_string(out_dir.join(f)).unwrap();
            assert!(text.ends_with('\n') && text.len() > 100, "{f}");
        }
    }
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("trace.json")).unwrap())
            .unwrap();
    assert_eq!(v["reports"][0]["consistency"], "CONSISTENT");
}

#[test]
fn seed_moves_only_the_sweep() {
    let spec = fixture("decaying_exp_solution.json");
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_sgl"))
            .args(["trace", "--spec"])
            .arg(&spec)
            .env("SGL_SEED", seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        serde_json::from_slice::<Value>(&out.stdout).unwrap()
    };
    let (a, b, c) = (run("1"), run("1"), run("2"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let strip = |mut v: Value| {
        v["reports"][0]["log_derivative_sweep"] = Value::Null;
        v
    };
    assert_eq!(strip(a), strip(c));

    let out = Command::new(env!("CARGO_BIN_EXE_sgl"))
        .args(["trace", "--spec"])
        .arg(&spec)
        .env("SGL_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn witness_search_scores_candidates() {
    let v = ok_json(&["witness-search"], &fixture("witness.json"));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(
        v["passes"].as_u64().unwrap() as usize,
        results.iter().filter(|r| r["pass"] == true).count()
    );
}
