use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cryoshield::report::{self, ReportEnvelope};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cryoshield"));
    c.env_remove(cryoshield_cli::MATERIALS_ENV);
    c
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn thermal_defaults_write_eight_rows_and_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["thermal", "--configs", "A..H"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("builtin.thermal.csv")).unwrap();
    let rows = report::read_thermal_csv(&csv).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(report::write_thermal_rows(&rows), csv);
    let json = std::fs::read_to_string(dir.path().join("thermal.json")).unwrap();
    let env = ReportEnvelope::from_json(&json).unwrap();
    assert_eq!(env.payload.thermal[0].ranking.solutions.len(), 8);
    assert_eq!(env.to_json(), json);
}

#[test]
fn format_flag_selects_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["thermal", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("thermal.json").exists());
    assert!(!dir.path().join("builtin.thermal.csv").exists());
    let o = run(&["thermal", "--format", "csv", "--configs", "A,C"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows = report::read_thermal_csv(&std::fs::read_to_string(dir.path().join("builtin.thermal.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
}

#[test]
fn negative_area_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["thermal", "--scenario", data("negative_area.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("shields[0].surface_area_m2"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0, "no partial output");
}

#[test]
fn overlapping_shells_are_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["magnetic", "--scenario", data("overlap.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("GeometryOverlap"), "{}", stderr(&o));
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["thermal", "--scenario", "/nonexistent/x.toml"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    let broken = run(&["thermal", "--scenario", data("broken.toml").to_str().unwrap()], dir.path());
    assert_eq!(broken.status.code(), Some(1));
    let wrong_kind = run(&["thermal", "--scenario", scenario("budget.toml").to_str().unwrap()], dir.path());
    assert_eq!(wrong_kind.status.code(), Some(1));
    let bad_flag = run(&["magnetic", "--mesh-size", "abc"], dir.path());
    assert_eq!(bad_flag.status.code(), Some(1));
    let unknown = bin().arg("frobnicate").output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));
    let no_design = run(&["recommend"], dir.path());
    assert_eq!(no_design.status.code(), Some(1));
    let bad_threshold = run(&["thermal", "--plateau-threshold", "-1"], dir.path());
    assert_eq!(bad_threshold.status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn unreachable_target_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["recommend", "--scenario", data("unreachable.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_materials_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("m.toml");
    std::fs::write(&bad, "[[material]]\nname = \"x\"\nabsorption = 2.0\n").unwrap();
    let o = bin()
        .args(["budget", "--out"])
        .arg(dir.path())
        .env(cryoshield_cli::MATERIALS_ENV, &bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let good = run(
        &["budget", "--materials", scenario("materials.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(good.status.code(), Some(0), "{}", stderr(&good));
}

#[test]
fn every_shipped_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file) in [
        ("thermal", "thermal_defaults.toml"),
        ("thermal", "thermal_custom.toml"),
        ("magnetic", "magnetic_cup.toml"),
        ("budget", "budget.toml"),
        ("recommend", "design_floating.toml"),
    ] {
        let o = run(&[cmd, "--scenario", scenario(file).to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(0), "{file}: {}", stderr(&o));
    }
    let o = run(
        &["magnetic", "--mesh-size", "8e-3", "--export-field", "--scenario", scenario("magnetic_cup.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let grid = std::fs::read_to_string(dir.path().join("magnetic_cup.field.mu-metal-cup.grid")).unwrap();
    let g = report::format::read_grid(&grid).unwrap();
    assert_eq!(report::format::grid_text(&g), grid);
    let (header, rows) =
        report::read_csv(&std::fs::read_to_string(dir.path().join("magnetic_cup.field.mu-metal-cup.csv")).unwrap()).unwrap();
    assert_eq!(header, report::format::FIELD_CSV_HEADER);
    assert_eq!(rows.len(), g.b_r.len());
}

#[test]
fn convergence_tolerance_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["magnetic", "--tolerance", "1e-9", "--scenario", scenario("magnetic_cup.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn report_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files: Vec<String> = ["thermal_defaults.toml", "magnetic_comparison.toml", "budget.toml", "design_floating.toml"]
        .iter()
        .map(|f| scenario(f).to_string_lossy().into_owned())
        .collect();
    let mut args = vec!["report", "--mesh-size", "4e-3"];
    for f in &files {
        args.push("--scenario");
        args.push(f);
    }
    let oa = run(&args, a.path());
    let ob = run(&args, b.path());
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0));
    let ea = ReportEnvelope::from_json(&std::fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    let eb = ReportEnvelope::from_json(&std::fs::read_to_string(b.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(ea.payload.payload_json(), eb.payload.payload_json());
    assert_eq!(ea.payload_sha256, eb.payload_sha256);
    for t in ["thermal_bars.csv", "mfs_table.csv", "axis_profiles.csv"] {
        let ta = std::fs::read(a.path().join(t)).unwrap();
        assert_eq!(ta, std::fs::read(b.path().join(t)).unwrap(), "{t}");
    }
    let (_, bars) = report::read_csv(&std::fs::read_to_string(a.path().join("thermal_bars.csv")).unwrap()).unwrap();
    assert_eq!(bars.len(), 8);
    let (_, mfs) = report::read_csv(&std::fs::read_to_string(a.path().join("mfs_table.csv")).unwrap()).unwrap();
    assert_eq!(mfs.len(), 5);
    assert_eq!(ea.payload.inputs.len(), 5, "four scenarios plus the curve file");
}

#[test]
fn report_without_plot_blocks_still_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["report", "--scenario", scenario("budget.toml").to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("report.json").exists());
    assert!(stderr(&o).contains("no plot tables"));
}
