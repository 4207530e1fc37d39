use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vexnorm::verify::{Symbol, TheoremParams};
use vexnorm::{Engine, ExponentFunction, GridSpec};

const GRID: &str = "[grid]\nn = 1\nk_min = -4\nk_max = 3\nL = 9\n";

fn write_config(dir: &Path, name: &str, checks: &str, extra: &str) -> PathBuf {
    let text =
        format!("version = 1\nchecks = [{checks}]\n{GRID}{extra}[output]\ndir = \"{name}\"\n");
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn vexnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vexnorm"))
        .args(args)
        .env("VEXNORM_THREADS", "2")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn holder_run_writes_one_row_per_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "holder",
        "\"holder\"",
        "[holder]\ntrials = 1000\n",
    );
    let out = vexnorm(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("holder");
    let rows = csv_rows(&dir.join("holder.csv"));
    assert_eq!(rows.len(), 1000);
    let header = csv::Reader::from_path(dir.join("holder.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    for col in ["n", "k_min", "k_max", "level"] {
        assert!(header.iter().any(|h| h == col), "missing column {col}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checks"][0]["metrics"]["violations"], 0);
}

#[test]
fn beta_outside_range_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad", "\"hls\"", "[operator]\nbeta = 1.5\n");
    let out = vexnorm(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("operator.beta") && err.contains("(0, 1)"),
        "{err}"
    );
    assert!(
        !tmp.path().join("bad").exists(),
        "nothing is computed before validation"
    );
}

#[test]
fn parse_error_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("broken.toml");
    std::fs::write(&path, "version = 1\n[grid]\nn = 1\nk_min = = -4\n").unwrap();
    let out = vexnorm(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn empty_check_list_succeeds_with_note() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "empty", "", "");
    let out = vexnorm(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("empty/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["note"], "no checks requested");
    assert_eq!(summary["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn grid_over_budget_is_a_resource_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("version = 1\nchecks = [\"lemma2\"]\n{GRID}cell_budget = 600\n");
    let path = tmp.path().join("budget.toml");
    std::fs::write(&path, text).unwrap();
    let out = vexnorm(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn failed_check_gives_nonzero_exit_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "strict",
        "\"lemma4\"",
        "[operator]\nm = 1\n[thresholds]\nlemma_constant = 1e-9\n",
    );
    let out = vexnorm(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("check lemma4 failed"),
        "{}",
        stderr(&out)
    );
    let summary = std::fs::read_to_string(tmp.path().join("strict/summary.json")).unwrap();
    assert!(summary.contains("\"lemma4\""));
}

#[test]
fn identical_configs_give_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let checks = "\"holder\", \"lemma2\", \"hls\"";
    let extra =
        "[holder]\ntrials = 50\n[family]\nkind = \"random_piecewise\"\nsize = 8\nseed = 11\n";
    for name in ["a", "b"] {
        let cfg = write_config(tmp.path(), name, checks, extra);
        let out = vexnorm(&["run", cfg.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for file in ["holder.csv", "lemma2.csv", "hls.csv", "summary.json"] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn sweep_over_empty_list_is_an_argument_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sweep", "", "");
    let out = vexnorm(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "alpha",
        "--values=",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let out = vexnorm(&["sweep", cfg.to_str().unwrap(), "--param", "alpha"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("at least one value"),
        "{}",
        stderr(&out)
    );
    let out = vexnorm(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "gamma",
        "--values",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("unknown sweep parameter"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn alpha_sweep_across_window_gives_one_row_per_value() {
    let spec = GridSpec::new(1, -4, 3, 9);
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let params = TheoremParams::new(
        &q1,
        0.25,
        0,
        1.0,
        1.0,
        0.1,
        None,
        Symbol::Log,
        Engine::Fft,
        spec,
    )
    .unwrap();
    let w = params.window.active_window();
    let (lo, hi) = (w.lo - 0.2 * (w.hi - w.lo), w.hi + 0.2 * (w.hi - w.lo));
    let values: Vec<String> = (0..9)
        .map(|i| format!("{}", lo + (hi - lo) * i as f64 / 8.0))
        .collect();

    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "alpha",
        "",
        "[family]\nkind = \"shell_atoms\"\nshells = [-2, 0]\n",
    );
    let out = vexnorm(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "alpha",
        "--values",
        &values.join(","),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&tmp.path().join("alpha/sweep_alpha.csv"));
    assert_eq!(rows.len(), 9);
    let inside: Vec<bool> = rows.iter().map(|r| &r[5] == "true").collect();
    assert!(!inside[0] && !inside[8] && inside[4], "{inside:?}");
    for r in &rows {
        let sup: f64 = r[2].parse().unwrap();
        assert!(sup.is_finite() && sup > 0.0);
    }
}

#[test]
fn level_sweep_gives_refinement_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "level",
        "",
        "[family]\nkind = \"shell_atoms\"\nshells = [-2, 0]\n",
    );
    let out = vexnorm(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "L",
        "--values",
        "7,8,9",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&tmp.path().join("level/sweep_L.csv"));
    let levels: Vec<&str> = rows.iter().map(|r| &r[10]).collect();
    assert_eq!(levels, ["7", "8", "9"]);
    assert!(
        rows.iter().all(|r| !r[3].is_empty()),
        "every row carries a refinement delta"
    );
}
