use proptest::prelude::*;

use super::*;
use crate::constants::SUPERCONDUCTOR_MU_R;
use crate::model::{CylinderShell, MagneticScenario, MagneticShell};

fn cup(mu: f64, has_lid: bool) -> MagneticShell {
    MagneticShell {
        name: "cup".into(),
        material: "test".into(),
        cylinder: CylinderShell::new(0.066, 0.18, 0.001, has_lid),
        bottom_z_m: 0.0,
        relative_permeability: mu,
    }
}

fn single(mu: f64, has_lid: bool, h: f64) -> MagneticScenario {
    MagneticScenario::new("cup", 50e-6, vec![cup(mu, has_lid)], h)
}

#[test]
fn empty_domain_is_uniform() {
    let s = MagneticScenario::new("empty", 50e-6, Vec::new(), 0.01);
    let f = solve_field(&s).unwrap();
    for i in 0..f.nodes.len() {
        assert!(f.b_r[i].abs() / 50e-6 < 1e-6);
        assert!((f.b_z[i] - 50e-6).abs() / 50e-6 < 1e-6);
    }
}

#[test]
fn unit_permeability_shell_does_nothing() {
    let (_, r) = scenario_mfs(&single(1.0, false, 4e-3)).unwrap();
    assert!(r.mfs_db.abs() < 0.01, "{}", r.mfs_db);
}

#[test]
fn closed_superconducting_cup_exceeds_80_db() {
    let (_, r) = scenario_mfs(&single(SUPERCONDUCTOR_MU_R, true, 2e-3)).unwrap();
    assert!(r.mfs_db > 80.0, "{}", r.mfs_db);
}

#[test]
fn field_is_linear_in_the_applied_field() {
    let base = single(7e4, false, 4e-3);
    let f1 = solve_field(&base).unwrap();
    let (_, m1) = scenario_mfs(&base).unwrap();
    for k in [2.0, 0.5] {
        let mut s = base.clone();
        s.applied_field_t *= k;
        let fk = solve_field(&s).unwrap();
        for i in (0..f1.nodes.len()).step_by(97) {
            let scale = 50e-6 * k;
            assert!((fk.b_z[i] - k * f1.b_z[i]).abs() <= 1e-9 * scale);
            assert!((fk.b_r[i] - k * f1.b_r[i]).abs() <= 1e-9 * scale);
        }
        let (_, mk) = scenario_mfs(&s).unwrap();
        assert!((mk.mfs_db - m1.mfs_db).abs() < 1e-6);
    }
}

#[test]
fn field_diagnostics() {
    let f = solve_field(&single(7e4, false, 4e-3)).unwrap();
    for i in 0..f.nodes.len() {
        assert_eq!(f.b_magnitude[i], f.b_r[i].hypot(f.b_z[i]));
    }
    assert!(f.axis_radial_ratio() < 1e-6);
    assert!(f.far_field_deviation() < 1e-3);
    assert!(f.relative_residual < 1e-10);
}

#[test]
fn open_cup_field_is_weakest_in_the_lower_half() {
    let s = single(7e4, false, 2e-3);
    let f = solve_field(&s).unwrap();
    let cavity = s.shells[0].cavity();
    let (z_min, _) = f
        .axis_profile()
        .into_iter()
        .filter(|(z, _)| *z > cavity.z_min && *z < s.shells[0].top_z())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(z_min < cavity.z_min + 0.5 * (s.shells[0].top_z() - cavity.z_min), "{z_min}");
}

#[test]
fn spherical_oracle_closed_form() {
    // mu = 1 is no shell at all; large mu approaches the thin-shell limit.
    assert!((spherical_shell_oracle(1.0, 0.034, 0.035).unwrap() - 1.0).abs() < 1e-15);
    let exact = spherical_shell_oracle(7e4, 0.034, 0.035).unwrap();
    let limit = spherical_shell_high_mu(7e4, 0.034, 0.035);
    assert!((exact - limit).abs() / exact < 1e-3);
    // (140001 * 70002 - 2 (34/35)^3 69999^2) / 630000, evaluated separately.
    let a3 = (34.0f64 / 35.0).powi(3);
    let hand = (140001.0 * 70002.0 - 2.0 * a3 * 69999.0f64.powi(2)) / 630000.0;
    assert!((exact - hand).abs() < 1e-9 * hand);
    assert!(spherical_shell_oracle(-1.0, 0.034, 0.035).is_err());
    assert!(spherical_shell_oracle(10.0, 0.035, 0.034).is_err());
}

#[test]
fn spherical_shell_numeric_matches_oracle() {
    let exact = spherical_shell_oracle(7e4, 0.034, 0.035).unwrap();
    let numeric = spherical_shell_numeric(7e4, 0.034, 0.035, 1e-3).unwrap();
    assert!((numeric - exact).abs() / exact < 0.10, "{numeric} vs {exact}");
    let weak = spherical_shell_oracle(10.0, 0.02, 0.035).unwrap();
    let weak_num = spherical_shell_numeric(10.0, 0.02, 0.035, 1e-3).unwrap();
    assert!((weak_num - weak).abs() / weak < 0.02, "{weak_num} vs {weak}");
}

#[test]
fn mesh_refinement_converges() {
    let s = single(7e4, false, 4e-3);
    let r = convergence_study(&s, &[4e-3, 2e-3]).unwrap();
    assert_eq!(r.mesh_convergence.len(), 2);
    assert!(r.mesh_convergence[1].element_count > r.mesh_convergence[0].element_count);
    assert!(final_refinement_change(&r.mesh_convergence).unwrap() < 0.02);
}

#[test]
fn mfs_examples() {
    assert_eq!(mfs_db(50e-6, 50e-6), 0.0);
    assert!((mfs_db(50e-9, 50e-6) - 60.0).abs() < 1e-12);
    assert!((mfs_db(50e-3, 50e-6) - 60.0).abs() < 1e-12);
}

#[test]
fn region_outside_domain() {
    let s = single(7e4, false, 8e-3);
    let f = solve_field(&s).unwrap();
    let far = Rect {
        r_min: 0.0,
        r_max: 10.0,
        z_min: 0.0,
        z_max: 0.01,
    };
    assert!(matches!(compute_mfs(&f, &far), Err(MagneticError::RegionOutsideDomain(_))));
}

#[test]
fn overlapping_shells_are_reported() {
    let mut a = cup(7e4, false);
    let mut b = cup(7e4, false);
    a.name = "a".into();
    b.name = "b".into();
    b.bottom_z_m = 0.0005;
    let s = MagneticScenario::new("x", 50e-6, vec![a, b], 4e-3);
    assert!(matches!(solve_field(&s), Err(MagneticError::GeometryOverlap(_))));
    let mut bad = single(7e4, false, 4e-3);
    bad.applied_field_t = -1.0;
    assert!(matches!(solve_field(&bad), Err(MagneticError::Invalid(_))));
}

#[test]
fn comparison_orderings_hold() {
    let r = compare_orderings(&ShieldGeometry::default(), 2e-3).unwrap();
    let db: Vec<f64> = r.iter().map(|x| x.mfs_db).collect();
    let labels: Vec<&str> = r.iter().map(|x| x.label.as_deref().unwrap()).collect();
    let expected: Vec<&str> = COMPARISON_STACKS.iter().map(|(l, _)| *l).collect();
    assert_eq!(labels, expected);
    assert!(db[3] > db[4], "{db:?}");
    assert!(db[2] > db[0], "{db:?}");
    assert!(db[1] > db[0], "{db:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mfs_is_scale_free(b in 1e-9f64..1e-3, k in 1e-3f64..1e3) {
        prop_assert!((mfs_db(b * k, b) - mfs_db(b, b * k)).abs() < 1e-9);
        prop_assert!(mfs_db(b, b * k) >= 0.0);
    }

    #[test]
    fn high_permeability_always_shields(mu in 10.0f64..1e5) {
        let (_, r) = scenario_mfs(&single(mu, false, 8e-3)).unwrap();
        prop_assert!(r.mfs_db > 0.0);
        let oracle = spherical_shell_oracle(mu, 0.034, 0.035).unwrap();
        prop_assert!(oracle >= 1.0);
    }
}
