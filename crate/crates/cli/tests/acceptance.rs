//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use cryoshield::budget::{self, cr110, filter_length, FilterSizing};
use cryoshield::constants::SUPERCONDUCTOR_MU_R_COARSE;
use cryoshield::magnetostatic::{
    compare_orderings, convergence_study, final_refinement_change, scenario_mfs, solve_field, spherical_shell_numeric,
    spherical_shell_oracle, stack_scenario, ShieldGeometry, COMPARISON_STACKS,
};
use cryoshield::model::{CylinderShell, MagneticScenario, MagneticShell};
use cryoshield::radiative::{
    self, default_configurations, reduced_absorption_chain, relative_improvements, ConfigurationGeometry, ShieldTerm,
    CONFIGURATION_LABELS, DEFAULT_PLATEAU_THRESHOLD,
};
use cryoshield::recommender::{self, context_grid, Architecture, IrConfig, LayerKind, LineKind, LineSpec, StageKind};
use cryoshield::report::ReportEnvelope;
use cryoshield::{SurfaceCoating, ThermalScenario};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn skin_depth() -> Outcome {
    let d = budget::skin_depth(1.68e-8, 1.0, 100e3).map_err(|e| e.to_string())?;
    let oracle = (1.68e-8 / (std::f64::consts::PI * 100e3 * 4e-7 * std::f64::consts::PI)).sqrt();
    ensure(rel(d, oracle) < 1e-12, || format!("{d} vs {oracle}"))?;
    ensure(rel(d, 2.06e-4) < 0.005, || format!("{d} is not 2.06e-4 m"))?;
    ensure(rel(d, 200e-6) < 0.05, || format!("{d} not within 5% of 200 um"))?;
    Ok(format!("copper at 100 kHz: {d:.4e} m"))
}

fn flux_threshold() -> Outcome {
    let b = budget::flux_field_threshold(30e-12).map_err(|e| e.to_string())?;
    ensure(rel(b, 69e-6) < 0.01, || format!("{b} T not within 1% of 69 uT"))?;
    let mfs = budget::required_mfs(30e-12, b, 1e-3).map_err(|e| e.to_string())?;
    ensure((mfs - 60.0).abs() < 1e-9, || format!("required MFS {mfs} dB"))?;
    Ok(format!("threshold {:.3} uT, required MFS {mfs:.6} dB", b * 1e6))
}

fn filter_sizing() -> Outcome {
    let c = cr110();
    let insertion = c.attenuation_db_per_m(5e9).map_err(|e| e.to_string())? * 0.020;
    ensure((insertion - 0.5).abs() < 1e-12, || format!("20 mm gives {insertion} dB at 5 GHz"))?;
    let s = filter_length(&c, 100e9, 20.0, 5e9, 1.0).map_err(|e| e.to_string())?;
    let FilterSizing::Feasible { length_m, .. } = s else {
        return Err(format!("sizing infeasible: {s:?}"));
    };
    let cm = length_m * 100.0;
    ensure(rel(cm, 20.0 / 5.4) < 1e-9, || format!("{cm} cm vs 20/5.4"))?;
    ensure(rel(cm, 3.71) < 0.01, || format!("{cm} cm not within 1% of 3.71"))?;
    Ok(format!("0.5 dB insertion at 5 GHz, {cm:.4} cm for 20 dB at 100 GHz"))
}

/// `A_eff` rebuilt from the raw coatings and areas.
fn oracle_absorption(s: &ThermalScenario) -> f64 {
    let f1 = s.sample.surface_area_m2;
    let mut inv = 1.0 / s.sample.absorption.absorption_outer
        + f1 / s.environment.surface_area_m2 * (1.0 / s.environment.absorption - 1.0);
    for sh in &s.shields {
        let c = sh.coating;
        inv += f1 / sh.surface_area_m2 * (1.0 / c.absorption_inner + 1.0 / c.absorption_outer - 1.0);
    }
    1.0 / inv
}

/// Bisection on `sigma A F1 (T^4 - T_env^4) = P`.
fn oracle_temperature(s: &ThermalScenario) -> f64 {
    let sigma = 5.67e-8;
    let a = oracle_absorption(s);
    let f1 = s.sample.surface_area_m2;
    let p = s.sample.dissipated_power_w.unwrap();
    let te = s.environment.temperature_k;
    let (mut lo, mut hi) = (te, 100.0);
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if sigma * a * f1 * (mid.powi(4) - te.powi(4)) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn radiative_suite() -> Outcome {
    let configs = default_configurations(&ConfigurationGeometry::default());
    ensure(configs.len() == 8, || format!("{} configurations", configs.len()))?;
    for s in &configs {
        ensure(s.sample.dissipated_power_w == Some(1e-14), || format!("{:?}: power", s.label))?;
        ensure(s.environment.temperature_k == 0.01, || format!("{:?}: T_env", s.label))?;
    }
    let mut t = Vec::new();
    let mut worst = 0.0f64;
    for s in &configs {
        let sol = radiative::steady_state(s).map_err(|e| e.to_string())?;
        let oracle = oracle_temperature(s);
        worst = worst.max((sol.sample_temperature_k - oracle).abs());
        t.push(sol.sample_temperature_k);
    }
    let min = t.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(min > 0.26, || format!("coldest sample {min} K"))?;
    ensure(t[2] < t[0], || format!("C {} K vs A {} K", t[2], t[0]))?;
    let gains = relative_improvements(&t);
    let after_e = &gains[5..];
    ensure(after_e.iter().all(|&g| g < DEFAULT_PLATEAU_THRESHOLD), || format!("gains after E: {after_e:?}"))?;
    ensure(worst < 1e-9, || format!("oracle mismatch {worst:e} K"))?;
    let ranking = radiative::rank_configurations(&configs, radiative::SourceMode::Sample, DEFAULT_PLATEAU_THRESHOLD)
        .map_err(|e| e.to_string())?;
    let plateau = ranking.plateau_label.clone().unwrap_or_default();
    let at = CONFIGURATION_LABELS.iter().position(|l| *l == plateau);
    ensure(at.is_some_and(|i| i <= 4), || format!("plateau at {plateau:?}"))?;
    Ok(format!(
        "min {min:.6} K, C {:.6} < A {:.6} K, plateau {plateau}, oracle {worst:.1e} K",
        t[2], t[0]
    ))
}

fn magnetic_suite() -> Outcome {
    let exact = spherical_shell_oracle(7e4, 0.034, 0.035).map_err(|e| e.to_string())?;
    let numeric = spherical_shell_numeric(7e4, 0.034, 0.035, 1e-3).map_err(|e| e.to_string())?;
    ensure(rel(numeric, exact) < 0.10, || format!("sphere {numeric} vs {exact}"))?;

    let empty = MagneticScenario::new("empty", 50e-6, Vec::new(), 0.01);
    let f = solve_field(&empty).map_err(|e| e.to_string())?;
    let dev = (0..f.nodes.len())
        .map(|i| f.b_r[i].abs().max((f.b_z[i] - 50e-6).abs()) / 50e-6)
        .fold(0.0, f64::max);
    ensure(dev < 1e-6, || format!("empty domain deviation {dev}"))?;
    let unit = MagneticScenario::new(
        "unit",
        50e-6,
        vec![MagneticShell {
            name: "cup".into(),
            material: "air".into(),
            cylinder: CylinderShell::new(0.066, 0.18, 0.001, false),
            bottom_z_m: 0.0,
            relative_permeability: 1.0,
        }],
        4e-3,
    );
    let (_, u) = scenario_mfs(&unit).map_err(|e| e.to_string())?;
    ensure(u.mfs_db.abs() < 0.01, || format!("mu_r = 1 gives {} dB", u.mfs_db))?;

    let geometry = ShieldGeometry::default();
    let db: Vec<f64> = compare_orderings(&geometry, 2e-3)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| r.mfs_db)
        .collect();
    ensure(db[3] > db[4], || format!("Al inside mu {} <= mu inside Al {}", db[3], db[4]))?;
    ensure(db[2] > db[0], || format!("double mu {} <= single mu {}", db[2], db[0]))?;
    ensure(db[1] > db[0], || format!("single Al {} <= single mu {}", db[1], db[0]))?;

    let mut worst = 0.0f64;
    for (label, stack) in COMPARISON_STACKS {
        let s = stack_scenario(label, stack, &geometry, 2e-3).map_err(|e| e.to_string())?;
        let r = convergence_study(&s, &[4e-3, 2e-3]).map_err(|e| e.to_string())?;
        let change = final_refinement_change(&r.mesh_convergence).ok_or("no convergence points")?;
        ensure(change < 0.02, || format!("{label}: finest meshes differ by {:.2}%", change * 100.0))?;
        worst = worst.max(change);
    }
    Ok(format!(
        "sphere {:.2}% off, MFS dB {:?}, finest-mesh change {:.2}%",
        rel(numeric, exact) * 100.0,
        db.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>(),
        worst * 100.0
    ))
}

fn algebra_suite() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let t1 = (0.0f64..1.0, 1e-8f64..1.0, 1e6f64..1e11, 0.0f64..1e4);
    runner
        .run(&t1, |(p, tan, f, g)| {
            let b = budget::t1_bound(p, tan, f, g).unwrap();
            let rate = 2.0 * std::f64::consts::PI * f * p * tan + g;
            let t = b.t1.seconds();
            if rate > 0.0 {
                let t = t.unwrap();
                prop_assert!((t * rate - 1.0).abs() < 1e-12, "T1 {} rate {}", t, rate);
            } else {
                prop_assert!(t.is_none());
            }
            Ok(())
        })
        .map_err(|e| format!("t1 reciprocal: {e}"))?;

    let chain = (
        1e-4f64..1.0,
        1e-4f64..1.0,
        prop::collection::vec((1.0f64..100.0, 1e-3f64..1.0), 1..6),
    );
    runner
        .run(&chain, |(a12, f1, layers)| {
            let sym: Vec<ShieldTerm> = layers
                .iter()
                .map(|&(ratio, a)| ShieldTerm {
                    area_m2: f1 * ratio,
                    coating: SurfaceCoating::uniform(a),
                })
                .collect();
            let got = reduced_absorption_chain(a12, f1, &sym).unwrap().value();
            let mut inv = 1.0 / a12;
            for &(ratio, a) in &layers {
                inv += f1 / (f1 * ratio) * (1.0 / a + 1.0 / a - 1.0);
            }
            prop_assert!((got - 1.0 / inv).abs() <= 1e-14 * got, "{} vs {}", got, 1.0 / inv);
            Ok(())
        })
        .map_err(|e| format!("symmetric/asymmetric coincidence: {e}"))?;

    let growth = (
        1e-4f64..1.0,
        1e-4f64..1.0,
        prop::collection::vec((1.0f64..100.0, 1e-3f64..1.0, 1e-3f64..1.0), 0..5),
        (1.0f64..100.0, 1e-3f64..1.0, 1e-3f64..1.0),
    );
    runner
        .run(&growth, |(a12, f1, layers, extra)| {
            let term = |&(ratio, ai, ao): &(f64, f64, f64)| ShieldTerm {
                area_m2: f1 * ratio,
                coating: SurfaceCoating::new(ai, ao),
            };
            let mut shields: Vec<ShieldTerm> = layers.iter().map(term).collect();
            let before = reduced_absorption_chain(a12, f1, &shields).unwrap().value();
            shields.push(term(&extra));
            let after = reduced_absorption_chain(a12, f1, &shields).unwrap().value();
            prop_assert!(after <= before * (1.0 + 1e-12), "{} -> {}", before, after);
            Ok(())
        })
        .map_err(|e| format!("monotone shielding: {e}"))?;
    Ok("1000 cases each: T1 reciprocal, symmetric coincidence, monotone shielding".into())
}

fn expected_ir(arch: Architecture, filters: bool, warm: bool) -> IrConfig {
    match (arch, filters || warm) {
        (Architecture::Floating, true) => IrConfig::G,
        (Architecture::Floating, false) => IrConfig::C,
        (Architecture::Grounded, true) => IrConfig::F,
        (Architecture::Grounded, false) => IrConfig::A,
    }
}

fn recommender_suite() -> Outcome {
    let grid = context_grid();
    ensure(grid.len() == 8, || format!("{} contexts", grid.len()))?;
    let mut stacks = 0;
    for mut c in grid {
        let want = expected_ir(c.qubit_architecture, c.nearby_ir_filters, c.warm_components_nearby);
        c.lines = LineKind::ALL.iter().map(|k| LineSpec::new(*k)).collect();
        for (area, fraction) in [(None, None), (Some(30e-12), Some(1e-3)), (Some(30e-12), Some(0.5))] {
            c.squid_area_m2 = area;
            c.residual_fraction = fraction;
            let r = recommender::recommend(&c).map_err(|e| format!("{c:?}: {e}"))?;
            ensure(r.ir_config.config == want, || format!("{c:?}: {:?} vs {want:?}", r.ir_config.config))?;
            let kinds: Vec<LayerKind> = r.shield_stack.layers.iter().map(|l| l.kind).collect();
            let last_sc = kinds.iter().rposition(|k| *k == LayerKind::Superconductor);
            let first_mu = kinds.iter().position(|k| *k == LayerKind::MuMetal);
            if let (Some(s), Some(m)) = (last_sc, first_mu) {
                ensure(s < m, || format!("superconductor outside mu-metal: {kinds:?}"))?;
            }
            for p in r.line_plans.iter().filter(|p| p.kind == LineKind::Flux) {
                let lpf = p.stages.iter().position(|s| s.kind == StageKind::LowPass);
                let ir = p.stages.iter().rposition(|s| s.kind == StageKind::Infrared);
                ensure(matches!((lpf, ir), (Some(l), Some(i)) if l < i), || {
                    format!("flux plan lacks IR after LPF: {:?}", p.stages)
                })?;
            }
            stacks += 1;
        }
    }
    Ok(format!("8-row truth table matches G/C/F/A, {stacks} stacks pass both invariants"))
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cryoshield"));
    c.env_remove("CRYOSHIELD_MATERIALS");
    c
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cli_suite() -> Outcome {
    let scenarios = root().join("scenarios");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let mut payloads = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut cmd = bin();
        cmd.arg("report").arg("--out").arg(dir.path()).args(["--mesh-size", "4e-3"]);
        for f in ["thermal_defaults.toml", "magnetic_comparison.toml", "budget.toml", "design_floating.toml"] {
            cmd.arg("--scenario").arg(scenarios.join(f));
        }
        let o = cmd.output().map_err(|e| e.to_string())?;
        ensure(o.status.code() == Some(0), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        let text = std::fs::read_to_string(dir.path().join("report.json")).map_err(|e| e.to_string())?;
        let env = ReportEnvelope::from_json(&text).map_err(|e| e.to_string())?;
        payloads.push((env.payload.payload_json(), env.payload_sha256));
    }
    ensure(payloads[0] == payloads[1], || "report payloads differ".into())?;

    let cases: [(&[&str], PathBuf, i32); 7] = [
        (&["thermal", "--scenario"], data.join("negative_area.toml"), 1),
        (&["thermal", "--scenario"], data.join("broken.toml"), 1),
        (&["thermal", "--scenario"], PathBuf::from("/nonexistent/scenario.toml"), 1),
        (&["magnetic", "--mesh-size"], PathBuf::from("abc"), 1),
        (&["magnetic", "--scenario"], data.join("overlap.toml"), 2),
        (&["recommend", "--scenario"], data.join("unreachable.toml"), 2),
        (&["magnetic", "--tolerance", "1e-9", "--scenario"], scenarios.join("magnetic_cup.toml"), 2),
    ];
    for (args, path, code) in cases {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let o = bin()
            .args(args)
            .arg(&path)
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.code() == Some(code), || {
            format!("{args:?} {}: exit {:?}, expected {code}", path.display(), o.status.code())
        })?;
    }
    Ok(format!("payload sha256 {} twice, 7 error paths exit as expected", &payloads[0].1[..12]))
}

fn coarse_proxy_note() -> String {
    let geometry = ShieldGeometry {
        superconductor_mu_r: SUPERCONDUCTOR_MU_R_COARSE,
        ..Default::default()
    };
    match compare_orderings(&geometry, 2e-3) {
        Ok(r) => format!(
            "superconductor proxy mu_r = {SUPERCONDUCTOR_MU_R_COARSE:e}: {}",
            r.iter()
                .map(|x| format!("{} {:.2} dB", x.label.as_deref().unwrap_or("?"), x.mfs_db))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Err(e) => format!("superconductor proxy mu_r = {SUPERCONDUCTOR_MU_R_COARSE:e}: {e}"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("skin depth", skin_depth),
        ("flux threshold", flux_threshold),
        ("filter sizing", filter_sizing),
        ("radiative solver", radiative_suite),
        ("magnetostatic solver", magnetic_suite),
        ("equation algebra", algebra_suite),
        ("recommender", recommender_suite),
        ("cli determinism", cli_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.2} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("INFO {}", coarse_proxy_note());
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
