use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pmtb::theorems::schwarzschild_equality_constant;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pmtb(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmtb"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PMTB_OUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

/// Rows of a result table as column-name maps, skipping the `#` header.
fn table(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

#[test]
fn schwarzschild_sharpness_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("schwarzschild-equality.toml");
    let out = pmtb(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = table(&dir.path().join("schwarzschild-equality_report.csv"));
    assert_eq!(rows.len(), 30);
    for r in &rows {
        assert_eq!(r["status"], "ok");
        assert!(num(r, "conclusion_margin").abs() <= 1e-6, "{r:?}");
        assert!(num(r, "condition_margin").abs() <= 1e-6, "{r:?}");
        assert_eq!(r["hypothesis_equality"], "true");
        assert_eq!(r["conclusion_equality"], "true");
    }
}

#[test]
fn flat_single_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("flat-check.toml");
    let out = pmtb(&["check", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let rows = table(&dir.path().join("check_report.csv"));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r["theorem"], "conformal-green");
    assert!(num(r, "condition_margin").abs() < 1e-12);
    assert_eq!(num(r, "mass"), 0.0);
    assert!(num(r, "rigidity_residual").abs() < 1e-12);
    let profiles = std::fs::read_to_string(dir.path().join("check_profiles.csv")).unwrap();
    assert!(profiles.starts_with("metric_index,r,u,v,c,phi"));
}

#[test]
fn c_sweep_margin_crosses_zero_at_the_equality_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("c-sweep.toml");
    let out = pmtb(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let rows = table(&dir.path().join("c-sweep_sweep.csv"));
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (num(r, "c"), num(r, "condition_margin"))).collect();
    let c_eq = schwarzschild_equality_constant(3, 1.0, 1.0).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].1 > w[0].1, "margin increases with c on this range");
        if w[0].1 < 0.0 && w[1].1 >= 0.0 {
            assert!(w[0].0 < c_eq && c_eq <= w[1].0, "{w:?}");
        }
    }
    let at = pts.iter().find(|p| (p.0 - c_eq).abs() < 1e-15).unwrap();
    assert!(at.1.abs() < 1e-10);
}

#[test]
fn mass_and_radius_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[metric]\nfamily = \"schwarzschild\"\nn = 4\nm = 1.0\nr0 = 1.0\n\
         [experiment]\ntheorem = \"capacity\"\n[grid]\nm = [-0.5, 0.0, 0.5, 1.0, 3.0]\n",
    );
    assert!(pmtb(&["sweep", "--config", cfg.to_str().unwrap()], dir.path()).status.success());
    for r in table(&dir.path().join("sweep_sweep.csv")) {
        assert!((num(&r, "mass") - num(&r, "m")).abs() < 1e-12);
    }

    let radii: Vec<String> = (0..21).map(|k| format!("{}", 1.0 + 0.05 * k as f64)).collect();
    let cfg = write_config(
        dir.path(),
        &format!(
            "[metric]\nfamily = \"schwarzschild\"\nn = 3\nm = 1.0\nr0 = 1.0\n\
             [experiment]\ntheorem = \"mass-capacity\"\n[grid]\nr0 = [{}]\nc = [0.5]\n",
            radii.join(", ")
        ),
    );
    assert!(pmtb(&["sweep", "--config", cfg.to_str().unwrap()], dir.path()).status.success());
    let rows = table(&dir.path().join("sweep_sweep.csv"));
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (num(r, "r0"), num(r, "conclusion_margin"))).collect();
    assert_eq!(pts.len(), 21);
    let jumps: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let largest = jumps.iter().cloned().fold(0.0, f64::max);
    assert!(largest < 0.1, "{jumps:?}");
    // no kinks: second differences stay small
    let second: Vec<f64> = pts.windows(3).map(|w| (w[2].1 - 2.0 * w[1].1 + w[0].1).abs()).collect();
    assert!(second.iter().all(|d| *d < 0.01), "{second:?}");
}

#[test]
fn equality_flags_are_recomputable_from_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("c-sweep.toml");
    let out = pmtb(
        &["sweep", "--config", cfg.to_str().unwrap(), "--tol-override", "equality=0.03"],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = table(&dir.path().join("c-sweep_report.csv"));
    let mut some_true = false;
    for r in &rows {
        let h = num(r, "condition_margin").abs() <= 0.03;
        let c = num(r, "conclusion_margin").abs() <= 0.03;
        assert_eq!(r["hypothesis_equality"], h.to_string());
        assert_eq!(r["conclusion_equality"], c.to_string());
        some_true |= h && num(r, "condition_margin").abs() > 1e-6;
    }
    assert!(some_true, "override widened the equality band");
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("flat-check.toml");
    let env_dir = dir.path().join("from-env");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_pmtb"))
            .args(["check", "--config", cfg.to_str().unwrap()])
            .args(extra)
            .env("PMTB_OUT_DIR", &env_dir)
            .output()
            .unwrap()
    };
    assert!(run(&[]).status.success());
    assert!(env_dir.join("check_report.csv").exists());
    let flag_dir = dir.path().join("from-flag");
    assert!(run(&["--out", flag_dir.to_str().unwrap()]).status.success());
    assert!(flag_dir.join("check_report.csv").exists());

    let cfg_dir = dir.path().join("from-config");
    let with_dir = write_config(
        dir.path(),
        &format!(
            "[metric]\nfamily = \"flat\"\nn = 3\nr0 = 1.0\n[output]\ndir = \"{}\"\nprefix = \"x\"\n",
            cfg_dir.display()
        ),
    );
    let out = Command::new(env!("CARGO_BIN_EXE_pmtb"))
        .args(["check", "--config", with_dir.to_str().unwrap()])
        .env("PMTB_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(cfg_dir.join("x_report.csv").exists());
}

#[test]
fn exit_status_tracks_solver_health_only() {
    let dir = tempfile::tempdir().unwrap();
    // R < 0: the input is rejected, which is a result
    let cfg = write_config(
        dir.path(),
        "[metric]\nfamily = \"power-sum\"\nn = 3\nr0 = 1.0\nterms = [[0.5, 3.0]]\n",
    );
    let out = pmtb(&["check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = table(&dir.path().join("check_report.csv"));
    assert_eq!(rows[0]["status"], "rejected");
    assert!(rows[0]["detail"].contains("negative"));

    // a residual tolerance below roundoff marks every row unhealthy
    let cfg = configs().join("flat-check.toml");
    let out = pmtb(
        &["check", "--config", cfg.to_str().unwrap(), "--tol-override", "residual=1e-30"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(table(&dir.path().join("check_report.csv"))[0]["status"], "solver-failure");
}

#[test]
fn configuration_errors_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[metric]\nfamily = \"flat\"\nn = 3\nr0 = 1.0\n[grid]\nc = \"x\"\n");
    let out = pmtb(&["check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6") && err.contains("cfg.toml"), "{err}");

    let cfg = configs().join("flat-check.toml");
    let out = pmtb(
        &["check", "--config", cfg.to_str().unwrap(), "--tol-override", "speed=1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown tolerance"));

    let out = pmtb(&["sweep"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_validation_and_fill_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmtb(&["validate-oracles", "--jobs", "2"], dir.path());
    assert!(out.status.success());
    let rows = table(&dir.path().join("oracles_report.csv"));
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r["passed"] == "true"));
    let flat = rows.iter().find(|r| r["check"] == "flat-space").unwrap();
    assert!(num(flat, "max_deviation") <= 1e-13);

    let cfg = configs().join("fill-in.toml");
    let out = pmtb(&["fill-in", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = table(&dir.path().join("fill-in_report.csv"));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r["corner_holds"], "true");
        assert!(num(r, "interior_residual") <= 1e-8);
        assert!(num(r, "deviation_exponent") >= num(r, "claimed_deviation_order") - 0.1);
    }
    assert!(dir.path().join("fill-in_kelvin.csv").exists());
}

#[test]
fn generated_sweep_is_sound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("soundness.toml");
    let out = pmtb(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let rows = table(&dir.path().join("soundness_report.csv"));
    assert_eq!(rows.len(), 4500);
    let bad = rows
        .iter()
        .filter(|r| num(r, "condition_margin") >= 0.0 && num(r, "conclusion_margin") < -1e-6)
        .count();
    assert_eq!(bad, 0);
    assert!(rows.iter().all(|r| r["status"] == "ok"));
}
