//! Axisymmetric magnetostatics of nested cylindrical shields in a uniform
//! axial field, and the field-suppression metric
//! `MFS = |20 log10(B_avg / B_external)|` over the lower third of the
//! innermost shield.

pub mod band;
pub mod fem;
pub mod mesh;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::MU_0;
use crate::model::{nest_shells, CylinderShell, EvaluationRegion, MagneticScenario, MagneticShell, Rect};
use crate::validate::{Validate, ViolationKind, Violations};

pub use fem::FieldSample;
pub use mesh::{MeshStats, QuadMesh, StructuredGrid};

#[derive(Debug, thiserror::Error)]
pub enum MagneticError {
    #[error("mesh failure: {0}")]
    MeshFailure(String),
    #[error("solver divergence: {0}")]
    SolverDivergence(String),
    #[error("geometry overlap: {0}")]
    GeometryOverlap(String),
    #[error("region outside domain: {0}")]
    RegionOutsideDomain(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid scenario:\n{0}")]
    Invalid(Violations),
}

/// Solved field on the mesh nodes plus Gauss-point samples for integration.
#[derive(Debug, Clone)]
pub struct FieldMap {
    /// (r, z) node coordinates, m.
    pub nodes: Vec<[f64; 2]>,
    pub potential: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_z: Vec<f64>,
    pub b_magnitude: Vec<f64>,
    /// Four per element.
    pub samples: Vec<FieldSample>,
    pub boundary: Vec<bool>,
    pub applied_field_t: f64,
    pub mesh_stats: MeshStats,
    pub relative_residual: f64,
    pub grid: Option<StructuredGrid>,
}

impl FieldMap {
    fn from_solution(mesh: QuadMesh, applied_field_t: f64, h0: f64, z_ref: f64) -> Result<Self, MagneticError> {
        let solution = fem::solve_potential(&mesh, h0, z_ref)?;
        let samples = fem::gauss_samples(&mesh, &solution.potential);
        let (b_r, b_z) = fem::nodal_flux(&mesh, &solution.potential);
        let b_magnitude = b_r.iter().zip(&b_z).map(|(r, z)| r.hypot(*z)).collect();
        Ok(FieldMap {
            mesh_stats: mesh.stats(),
            nodes: mesh.nodes,
            potential: solution.potential,
            b_r,
            b_z,
            b_magnitude,
            samples,
            boundary: mesh.dirichlet,
            applied_field_t,
            relative_residual: solution.relative_residual,
            grid: mesh.grid,
        })
    }

    /// Largest `|B - B_applied| / B_applied` over the boundary nodes.
    pub fn far_field_deviation(&self) -> f64 {
        let b0 = self.applied_field_t;
        (0..self.nodes.len())
            .filter(|&i| self.boundary[i])
            .map(|i| self.b_r[i].hypot(self.b_z[i] - b0) / b0.abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|B_r|` on the axis relative to the applied field.
    pub fn axis_radial_ratio(&self) -> f64 {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i][0] == 0.0)
            .map(|i| self.b_r[i].abs() / self.applied_field_t.abs())
            .fold(0.0, f64::max)
    }

    /// `(z, |B|)` on the axis, ordered by z.
    pub fn axis_profile(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i][0] == 0.0)
            .map(|i| (self.nodes[i][1], self.b_magnitude[i]))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    /// Element centroids with the element-mean `|B|`, restricted to `rect`.
    pub fn element_means_in(&self, rect: &Rect) -> Vec<([f64; 2], f64)> {
        self.samples
            .chunks(4)
            .filter_map(|chunk| {
                let c = centroid(chunk);
                if rect.contains(c[0], c[1]) {
                    let b = chunk.iter().map(|s| s.b_r.hypot(s.b_z)).sum::<f64>() / 4.0;
                    Some((c, b))
                } else {
                    None
                }
            })
            .collect()
    }

    fn bounds(&self) -> Rect {
        let mut rect = Rect {
            r_min: f64::INFINITY,
            r_max: f64::NEG_INFINITY,
            z_min: f64::INFINITY,
            z_max: f64::NEG_INFINITY,
        };
        for p in &self.nodes {
            rect.r_min = rect.r_min.min(p[0]);
            rect.r_max = rect.r_max.max(p[0]);
            rect.z_min = rect.z_min.min(p[1]);
            rect.z_max = rect.z_max.max(p[1]);
        }
        rect
    }
}

fn centroid(chunk: &[FieldSample]) -> [f64; 2] {
    let n = chunk.len() as f64;
    [
        chunk.iter().map(|s| s.r).sum::<f64>() / n,
        chunk.iter().map(|s| s.z).sum::<f64>() / n,
    ]
}

/// Validates and solves a cylinder scenario.
pub fn solve_field(scenario: &MagneticScenario) -> Result<FieldMap, MagneticError> {
    solve_field_with_size(scenario, scenario.mesh_size_m)
}

pub fn solve_field_with_size(scenario: &MagneticScenario, element_size_m: f64) -> Result<FieldMap, MagneticError> {
    check(scenario)?;
    let mesh = mesh::cylinder_mesh_with_size(scenario, element_size_m)?;
    let h0 = scenario.applied_field_t / MU_0;
    let z_ref = 0.5 * (scenario.domain.z_min_m + scenario.domain.z_max_m);
    FieldMap::from_solution(mesh, scenario.applied_field_t, h0, z_ref)
}

fn check(scenario: &MagneticScenario) -> Result<(), MagneticError> {
    let found = scenario.violations();
    if found.is_empty() {
        return Ok(());
    }
    if found.contains(ViolationKind::GeometryOverlap) {
        let text = found
            .0
            .iter()
            .filter(|v| v.kind == ViolationKind::GeometryOverlap)
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(MagneticError::GeometryOverlap(text));
    }
    Err(MagneticError::Invalid(found))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub element_size_m: f64,
    pub element_count: usize,
    pub mfs_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfsResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub mfs_db: f64,
    #[serde(rename = "b_average_lower_third_T")]
    pub b_average_lower_third_t: f64,
    #[serde(rename = "b_external_T")]
    pub b_external_t: f64,
    pub region: EvaluationRegion,
    #[serde(default)]
    pub mesh_convergence: Vec<ConvergencePoint>,
}

/// `|20 log10(b_average / b_external)|`.
pub fn mfs_db(b_average: f64, b_external: f64) -> f64 {
    (20.0 * (b_average / b_external).log10()).abs()
}

/// Volume-weighted mean of `|B|` over the elements whose centroids lie in
/// `region`, converted to dB against the applied field.
pub fn compute_mfs(field: &FieldMap, region: &EvaluationRegion) -> Result<MfsResult, MagneticError> {
    let bounds = field.bounds();
    let inside_domain = region.r_min >= bounds.r_min
        && region.r_max <= bounds.r_max
        && region.z_min >= bounds.z_min
        && region.z_max <= bounds.z_max
        && region.r_max > region.r_min
        && region.z_max > region.z_min;
    if !inside_domain {
        return Err(MagneticError::RegionOutsideDomain(format!(
            "region r <= {} m, z in [{}, {}] m lies outside the solved domain",
            region.r_max, region.z_min, region.z_max
        )));
    }
    let (mut sum, mut weight) = (0.0, 0.0);
    for chunk in field.samples.chunks(4) {
        let c = centroid(chunk);
        if region.contains(c[0], c[1]) {
            for s in chunk {
                sum += s.b_r.hypot(s.b_z) * s.weight;
                weight += s.weight;
            }
        }
    }
    if weight <= 0.0 {
        return Err(MagneticError::RegionOutsideDomain(
            "no elements fall inside the evaluation region".into(),
        ));
    }
    let b_average = sum / weight;
    Ok(MfsResult {
        label: None,
        mfs_db: mfs_db(b_average, field.applied_field_t),
        b_average_lower_third_t: b_average,
        b_external_t: field.applied_field_t,
        region: *region,
        mesh_convergence: Vec::new(),
    })
}

/// Solves the scenario and evaluates its own lower-third region.
pub fn scenario_mfs(scenario: &MagneticScenario) -> Result<(FieldMap, MfsResult), MagneticError> {
    let region = scenario
        .evaluation_region()
        .ok_or_else(|| MagneticError::Domain("scenario has no shells to evaluate".into()))?;
    let field = solve_field(scenario)?;
    let mut result = compute_mfs(&field, &region)?;
    result.label = scenario.label.clone();
    result.mesh_convergence.push(ConvergencePoint {
        element_size_m: scenario.mesh_size_m,
        element_count: field.mesh_stats.element_count,
        mfs_db: result.mfs_db,
    });
    Ok((field, result))
}

/// MFS at each element size (coarse to fine); the returned result is the
/// finest one with the whole sequence in `mesh_convergence`.
pub fn convergence_study(scenario: &MagneticScenario, sizes: &[f64]) -> Result<MfsResult, MagneticError> {
    if sizes.is_empty() {
        return Err(MagneticError::Domain("at least one element size is required".into()));
    }
    let region = scenario
        .evaluation_region()
        .ok_or_else(|| MagneticError::Domain("scenario has no shells to evaluate".into()))?;
    let runs: Vec<Result<MfsResult, MagneticError>> = sizes
        .par_iter()
        .map(|&h| {
            let field = solve_field_with_size(scenario, h)?;
            let mut r = compute_mfs(&field, &region)?;
            r.mesh_convergence.push(ConvergencePoint {
                element_size_m: h,
                element_count: field.mesh_stats.element_count,
                mfs_db: r.mfs_db,
            });
            Ok(r)
        })
        .collect();
    let mut points = Vec::with_capacity(sizes.len());
    let mut last = None;
    for run in runs {
        let r = run?;
        points.push(r.mesh_convergence[0]);
        last = Some(r);
    }
    let mut result = last.expect("non-empty");
    result.label = scenario.label.clone();
    result.mesh_convergence = points;
    Ok(result)
}

/// Relative change of MFS between the two finest entries of a study.
pub fn final_refinement_change(points: &[ConvergencePoint]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let (a, b) = (points[n - 2].mfs_db, points[n - 1].mfs_db);
    Some((a - b).abs() / b.abs())
}

/// Default nested-cylinder geometry: 1 mm walls, 66 mm x 180 mm inner and
/// 70 mm x 190 mm outer shells, open at the top, 50 uT axial field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShieldGeometry {
    pub inner: CylinderShell,
    pub outer: CylinderShell,
    #[serde(rename = "applied_field_T")]
    pub applied_field_t: f64,
    pub mu_metal_mu_r: f64,
    pub superconductor_mu_r: f64,
}

impl Default for ShieldGeometry {
    fn default() -> Self {
        ShieldGeometry {
            inner: CylinderShell::new(0.066, 0.180, 0.001, false),
            outer: CylinderShell::new(0.070, 0.190, 0.001, false),
            applied_field_t: 50e-6,
            mu_metal_mu_r: 70_000.0,
            superconductor_mu_r: crate::constants::SUPERCONDUCTOR_MU_R,
        }
    }
}

/// One shell of a comparison configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShellKind {
    MuMetal,
    Superconductor,
}

impl ShellKind {
    fn material(&self, geometry: &ShieldGeometry) -> (&'static str, f64) {
        match self {
            ShellKind::MuMetal => ("mu-metal", geometry.mu_metal_mu_r),
            ShellKind::Superconductor => ("aluminum", geometry.superconductor_mu_r),
        }
    }
}

/// The five comparison stacks, innermost first, in display order.
pub const COMPARISON_STACKS: [(&str, &[ShellKind]); 5] = [
    ("single mu-metal", &[ShellKind::MuMetal]),
    ("single aluminum", &[ShellKind::Superconductor]),
    ("double mu-metal", &[ShellKind::MuMetal, ShellKind::MuMetal]),
    ("aluminum inside mu-metal", &[ShellKind::Superconductor, ShellKind::MuMetal]),
    ("mu-metal inside aluminum", &[ShellKind::MuMetal, ShellKind::Superconductor]),
];

/// Scenario for a stack of one or two shells. Single shells use the inner
/// geometry at the inner position, so every stack shares one evaluation
/// region.
pub fn stack_scenario(
    label: &str,
    stack: &[ShellKind],
    geometry: &ShieldGeometry,
    mesh_size_m: f64,
) -> Result<MagneticScenario, MagneticError> {
    let shell = |kind: &ShellKind, cylinder: CylinderShell, name: &str| {
        let (material, mu) = kind.material(geometry);
        MagneticShell {
            name: name.to_string(),
            material: material.to_string(),
            cylinder,
            bottom_z_m: 0.0,
            relative_permeability: mu,
        }
    };
    let (inner_kind, outer_kind) = match stack {
        [only] => (only, only),
        [inner, outer] => (inner, outer),
        _ => {
            return Err(MagneticError::Domain(format!(
                "stacks of {} shells are not supported",
                stack.len()
            )))
        }
    };
    let mut shells = vec![
        shell(inner_kind, geometry.inner, "inner"),
        shell(outer_kind, geometry.outer, "outer"),
    ];
    nest_shells(&mut shells);
    let domain = crate::model::default_domain(&shells, crate::model::DEFAULT_DOMAIN_MARGIN);
    if stack.len() == 1 {
        shells.truncate(1);
        shells[0].name = "shield".into();
    }
    let mut scenario = MagneticScenario::new(label, geometry.applied_field_t, shells, mesh_size_m);
    scenario.domain = domain;
    Ok(scenario)
}

/// MFS of the five comparison stacks, in [`COMPARISON_STACKS`] order.
pub fn compare_orderings(geometry: &ShieldGeometry, mesh_size_m: f64) -> Result<Vec<MfsResult>, MagneticError> {
    let scenarios: Vec<MagneticScenario> = COMPARISON_STACKS
        .iter()
        .map(|(label, stack)| stack_scenario(label, stack, geometry, mesh_size_m))
        .collect::<Result<_, _>>()?;
    scenarios
        .par_iter()
        .map(|s| scenario_mfs(s).map(|(_, r)| r))
        .collect()
}

/// Exact shielding factor `B_applied / B_inside` of a permeable spherical
/// shell with radii `inner < outer` in a uniform field.
pub fn spherical_shell_oracle(mu_r: f64, inner_radius: f64, outer_radius: f64) -> Result<f64, MagneticError> {
    if !(mu_r > 0.0 && mu_r.is_finite()) {
        return Err(MagneticError::Domain(format!("relative permeability {mu_r} must be positive")));
    }
    if !(inner_radius > 0.0 && outer_radius > inner_radius && outer_radius.is_finite()) {
        return Err(MagneticError::Domain(format!(
            "radii must satisfy 0 < inner < outer, got {inner_radius} and {outer_radius}"
        )));
    }
    let ratio3 = (inner_radius / outer_radius).powi(3);
    let m = mu_r;
    Ok(((2.0 * m + 1.0) * (m + 2.0) - 2.0 * ratio3 * (m - 1.0).powi(2)) / (9.0 * m))
}

/// High-permeability limit `1 + (2/9) mu_r (1 - (a/b)^3)`.
pub fn spherical_shell_high_mu(mu_r: f64, inner_radius: f64, outer_radius: f64) -> f64 {
    1.0 + 2.0 / 9.0 * mu_r * (1.0 - (inner_radius / outer_radius).powi(3))
}

/// Numerical shielding factor of the same spherical shell, from the mean
/// `|B|` inside 90% of the cavity radius.
pub fn spherical_shell_numeric(
    mu_r: f64,
    inner_radius: f64,
    outer_radius: f64,
    element_size_m: f64,
) -> Result<f64, MagneticError> {
    spherical_shell_oracle(mu_r, inner_radius, outer_radius)?;
    let b0 = 1.0;
    let mesh = mesh::spherical_shell_mesh(inner_radius, outer_radius, mu_r, 20.0 * outer_radius, element_size_m)?;
    let field = FieldMap::from_solution(mesh, b0, b0 / MU_0, 0.0)?;
    let limit = 0.9 * inner_radius;
    let (mut sum, mut weight) = (0.0, 0.0);
    for chunk in field.samples.chunks(4) {
        let c = centroid(chunk);
        if c[0].hypot(c[1]) < limit {
            for s in chunk {
                sum += s.b_r.hypot(s.b_z) * s.weight;
                weight += s.weight;
            }
        }
    }
    if weight <= 0.0 {
        return Err(MagneticError::MeshFailure("no elements inside the cavity".into()));
    }
    Ok(b0 / (sum / weight))
}

#[cfg(test)]
mod tests;
