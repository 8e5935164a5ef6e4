//! TOML scenario files.
//!
//! Every file carries a top-level `kind` key (`thermal`, `magnetic`,
//! `budget` or `design`); the remaining keys follow the structs below. All
//! quantities are SI and keys carry their unit as a suffix.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::budget::{self, AttenuationCurve, BudgetError, CoherenceBudget, DistanceSweep, FilterSizing, FluxQuantumPrecision};
use crate::magnetostatic::{self, ShieldGeometry, COMPARISON_STACKS};
use crate::materials::{MaterialDb, MaterialError};
use crate::model::{
    default_domain, CylinderShell, Domain, Environment, ExternalSource, MagneticScenario, MagneticShell, PairFormula,
    SampleBody, ShieldLayer, SurfaceCoating, ThermalScenario, DEFAULT_DOMAIN_MARGIN,
};
use crate::radiative::{default_configuration, ConfigurationGeometry, SourceMode, CONFIGURATION_LABELS};
use crate::recommender::DesignContext;
use crate::validate::{Validate, Violation, ViolationKind, Violations};

/// Element size used when neither the file nor the caller sets one, m.
pub const DEFAULT_MESH_SIZE_M: f64 = 2e-3;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown scenario kind `{0}` (expected thermal, magnetic, budget or design)")]
    UnknownKind(String),
    #[error("{0}")]
    Invalid(Violations),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioFile {
    Thermal(ThermalFile),
    Magnetic(MagneticFile),
    Budget(BudgetRequest),
    Design(DesignContext),
}

impl ScenarioFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioFile::Thermal(_) => "thermal",
            ScenarioFile::Magnetic(_) => "magnetic",
            ScenarioFile::Budget(_) => "budget",
            ScenarioFile::Design(_) => "design",
        }
    }
}

fn parse_err(e: toml::de::Error) -> ScenarioError {
    ScenarioError::Parse(e.to_string())
}

/// Reads any scenario file, dispatching on its `kind` key.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let mut table: toml::Table = toml::from_str(text).map_err(parse_err)?;
    let kind = match table.remove("kind") {
        Some(toml::Value::String(k)) => k,
        Some(other) => return Err(ScenarioError::Parse(format!("`kind` must be a string, got {other}"))),
        None => return Err(ScenarioError::Parse("missing top-level `kind` key".into())),
    };
    let value = toml::Value::Table(table);
    let out = match kind.as_str() {
        "thermal" => ScenarioFile::Thermal(value.try_into().map_err(parse_err)?),
        "magnetic" => ScenarioFile::Magnetic(value.try_into().map_err(parse_err)?),
        "budget" => ScenarioFile::Budget(value.try_into().map_err(parse_err)?),
        "design" => ScenarioFile::Design(value.try_into().map_err(parse_err)?),
        _ => return Err(ScenarioError::UnknownKind(kind)),
    };
    Ok(out)
}

/// Serializes a scenario back to TOML with its `kind` key.
pub fn to_toml(file: &ScenarioFile) -> String {
    let value = match file {
        ScenarioFile::Thermal(f) => toml::Value::try_from(f),
        ScenarioFile::Magnetic(f) => toml::Value::try_from(f),
        ScenarioFile::Budget(f) => toml::Value::try_from(f),
        ScenarioFile::Design(f) => toml::Value::try_from(f),
    }
    .expect("scenario types serialize");
    let table = match value {
        toml::Value::Table(t) => t,
        _ => unreachable!("structs serialize to tables"),
    };
    let mut out = toml::Table::new();
    out.insert("kind".into(), toml::Value::String(file.kind().into()));
    out.extend(table);
    toml::to_string(&out).expect("tables serialize")
}

/// Reads a standalone attenuation curve. A `kind = "attenuation_curve"` key
/// is accepted but not required.
pub fn parse_curve(text: &str) -> Result<AttenuationCurve, ScenarioError> {
    let mut table: toml::Table = toml::from_str(text).map_err(parse_err)?;
    match table.remove("kind") {
        None => {}
        Some(toml::Value::String(k)) if k == "attenuation_curve" => {}
        Some(other) => return Err(ScenarioError::UnknownKind(other.to_string())),
    }
    let curve: AttenuationCurve = toml::Value::Table(table).try_into().map_err(parse_err)?;
    curve.check()?;
    Ok(curve)
}

fn prefixed(prefix: &str, v: Violations) -> Violations {
    Violations(
        v.0.into_iter()
            .map(|x| Violation {
                field: format!("{prefix}.{}", x.field),
                ..x
            })
            .collect(),
    )
}

fn violation(kind: ViolationKind, field: String, message: String) -> Violation {
    Violation { kind, field, message }
}

/// Expands `"A..H"` style ranges in a label list.
pub fn expand_labels(items: &[String]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for item in items {
        for part in item.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if let Some((a, b)) = part.split_once("..") {
                let pos = |l: &str| CONFIGURATION_LABELS.iter().position(|x| *x == l.trim());
                match (pos(a), pos(b)) {
                    (Some(i), Some(j)) if i <= j => out.extend(CONFIGURATION_LABELS[i..=j].iter().map(|s| s.to_string())),
                    _ => return Err(format!("bad configuration range `{part}`")),
                }
            } else if CONFIGURATION_LABELS.contains(&part) {
                out.push(part.to_string());
            } else {
                return Err(format!("unknown configuration `{part}`"));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- thermal

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoatingSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption_outer: Option<f64>,
}

/// A thermal shield as written in a file: the area may come from the
/// cylinder and missing absorptions from the material table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShieldSpec {
    pub name: String,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder: Option<CylinderShell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_area_m2: Option<f64>,
    #[serde(default)]
    pub coating: CoatingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sample: SampleBody,
    #[serde(default, rename = "shield")]
    pub shields: Vec<ShieldSpec>,
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_source: Option<ExternalSource>,
    #[serde(default)]
    pub pair_formula: PairFormula,
}

impl ThermalScenarioSpec {
    pub fn resolve(&self, db: &MaterialDb) -> Result<ThermalScenario, Violations> {
        let mut found = Vec::new();
        let mut shields = Vec::with_capacity(self.shields.len());
        for (i, s) in self.shields.iter().enumerate() {
            let at = |f: &str| format!("shields[{i}].{f}");
            let base = match db.get(&s.material) {
                Ok(m) => m.absorption,
                Err(e) => {
                    found.push(violation(ViolationKind::InvalidQuantity, at("material"), e.to_string()));
                    None
                }
            };
            let side = |v: Option<f64>, f: &str, found: &mut Vec<Violation>| {
                v.or(base).unwrap_or_else(|| {
                    found.push(violation(
                        ViolationKind::InvalidQuantity,
                        at(f),
                        format!("not given and material `{}` has no absorption", s.material),
                    ));
                    f64::NAN
                })
            };
            let coating = SurfaceCoating::new(
                side(s.coating.absorption_inner, "coating.absorption_inner", &mut found),
                side(s.coating.absorption_outer, "coating.absorption_outer", &mut found),
            );
            let area = match (s.surface_area_m2, &s.cylinder) {
                (Some(a), _) => a,
                (None, Some(c)) => c.surface_area(),
                (None, None) => {
                    found.push(violation(
                        ViolationKind::InvalidQuantity,
                        at("surface_area_m2"),
                        "give surface_area_m2 or a cylinder".into(),
                    ));
                    f64::NAN
                }
            };
            shields.push(ShieldLayer {
                name: s.name.clone(),
                material: s.material.clone(),
                cylinder: s.cylinder,
                surface_area_m2: area,
                coating,
            });
        }
        let scenario = ThermalScenario {
            label: self.label.clone(),
            sample: self.sample.clone(),
            shields,
            environment: self.environment.clone(),
            external_source: self.external_source.clone(),
            pair_formula: self.pair_formula,
        };
        if !found.is_empty() {
            return Err(Violations(found));
        }
        scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalFile {
    /// Default configurations to include, e.g. `["A..H"]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub configs: Vec<String>,
    #[serde(default)]
    pub geometry: ConfigurationGeometry,
    #[serde(default)]
    pub source_mode: SourceMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_threshold: Option<f64>,
    #[serde(default, rename = "scenario", skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ThermalScenarioSpec>,
}

impl ThermalFile {
    /// Default configurations first, then explicit scenarios. A file naming
    /// neither gets all eight defaults.
    pub fn resolve(&self, db: &MaterialDb) -> Result<Vec<ThermalScenario>, ScenarioError> {
        let mut out = Vec::new();
        let mut bad = Vec::new();
        let labels = if self.configs.is_empty() && self.scenarios.is_empty() {
            CONFIGURATION_LABELS.iter().map(|s| s.to_string()).collect()
        } else {
            expand_labels(&self.configs)
                .map_err(|m| ScenarioError::Invalid(Violations(vec![violation(ViolationKind::InvalidQuantity, "configs".into(), m)])))?
        };
        for l in &labels {
            let s = default_configuration(l, &self.geometry).expect("labels were checked");
            match s.validate() {
                Ok(s) => out.push(s),
                Err(v) => bad.extend(prefixed("geometry", v).0),
            }
        }
        for (i, spec) in self.scenarios.iter().enumerate() {
            match spec.resolve(db) {
                Ok(mut s) => {
                    s.label.get_or_insert_with(|| format!("scenario[{i}]"));
                    out.push(s);
                }
                Err(v) => bad.extend(prefixed(&format!("scenario[{i}]"), v).0),
            }
        }
        if let Some(t) = self.plateau_threshold {
            if !(t > 0.0 && t.is_finite()) {
                bad.push(violation(
                    ViolationKind::InvalidQuantity,
                    "plateau_threshold".into(),
                    format!("must be positive, got {t}"),
                ));
            }
        }
        if bad.is_empty() {
            Ok(out)
        } else {
            Err(ScenarioError::Invalid(Violations(bad)))
        }
    }
}

// --------------------------------------------------------------- magnetic

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticShellSpec {
    pub name: String,
    pub material: String,
    pub outer_diameter_m: f64,
    pub height_m: f64,
    pub wall_thickness_m: f64,
    #[serde(default)]
    pub has_lid: bool,
    #[serde(default)]
    pub bottom_z_m: f64,
    /// Overrides the material table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_permeability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "applied_field_T")]
    pub applied_field_t: f64,
    /// Innermost first.
    #[serde(default, rename = "shell")]
    pub shells: Vec<MagneticShellSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_size_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_inset_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_size_m: Option<f64>,
    /// Replaces the permeability of every superconducting material.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superconductor_mu_r: Option<f64>,
    /// Also run the five standard comparison stacks.
    #[serde(default)]
    pub comparison: bool,
    #[serde(default)]
    pub geometry: ShieldGeometry,
    /// Element sizes for a convergence study, coarse to fine.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence_sizes_m: Vec<f64>,
    #[serde(default, rename = "scenario", skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<MagneticScenarioSpec>,
}

/// Overrides applied on top of a magnetic file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MagneticOverrides {
    pub mesh_size_m: Option<f64>,
    pub superconductor_mu_r: Option<f64>,
}

impl MagneticFile {
    /// Scenarios to solve: comparison stacks (when requested, or when the
    /// file lists no scenario) followed by the explicit ones. Geometry is
    /// not validated here; the solver reports overlaps itself.
    pub fn resolve(&self, db: &MaterialDb, over: MagneticOverrides) -> Result<Vec<MagneticScenario>, ScenarioError> {
        let sc_mu = over.superconductor_mu_r.or(self.superconductor_mu_r);
        let file_h = over.mesh_size_m.or(self.mesh_size_m);
        let mut bad = Vec::new();
        for (f, v) in [("mesh_size_m", file_h), ("superconductor_mu_r", sc_mu)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bad.push(violation(ViolationKind::InvalidQuantity, f.into(), format!("must be positive, got {v}")));
                }
            }
        }
        if !bad.is_empty() {
            return Err(ScenarioError::Invalid(Violations(bad)));
        }
        let mut out = Vec::new();
        if self.comparison || self.scenarios.is_empty() {
            let mut g = self.geometry.clone();
            if let Some(mu) = sc_mu {
                g.superconductor_mu_r = mu;
            }
            for (label, stack) in COMPARISON_STACKS {
                let s = magnetostatic::stack_scenario(label, stack, &g, file_h.unwrap_or(DEFAULT_MESH_SIZE_M))
                    .map_err(|e| ScenarioError::Parse(e.to_string()))?;
                out.push(s);
            }
        }
        for (i, spec) in self.scenarios.iter().enumerate() {
            let mut shells = Vec::new();
            for (j, s) in spec.shells.iter().enumerate() {
                let mu = match s.relative_permeability {
                    Some(mu) => Some(mu),
                    None => match db.get(&s.material) {
                        Ok(m) => m.magnetostatic_mu_r(sc_mu),
                        Err(e) => {
                            bad.push(violation(
                                ViolationKind::InvalidQuantity,
                                format!("scenario[{i}].shell[{j}].material"),
                                e.to_string(),
                            ));
                            continue;
                        }
                    },
                };
                let Some(mu) = mu else {
                    bad.push(violation(
                        ViolationKind::InvalidQuantity,
                        format!("scenario[{i}].shell[{j}].relative_permeability"),
                        format!("material `{}` has no permeability; set one", s.material),
                    ));
                    continue;
                };
                shells.push(MagneticShell {
                    name: s.name.clone(),
                    material: s.material.clone(),
                    cylinder: CylinderShell::new(s.outer_diameter_m, s.height_m, s.wall_thickness_m, s.has_lid),
                    bottom_z_m: s.bottom_z_m,
                    relative_permeability: mu,
                });
            }
            let domain = spec.domain.unwrap_or_else(|| default_domain(&shells, DEFAULT_DOMAIN_MARGIN));
            out.push(MagneticScenario {
                label: Some(spec.label.clone().unwrap_or_else(|| format!("scenario[{i}]"))),
                applied_field_t: spec.applied_field_t,
                shells,
                domain,
                mesh_size_m: over
                    .mesh_size_m
                    .or(spec.mesh_size_m)
                    .or(self.mesh_size_m)
                    .unwrap_or(DEFAULT_MESH_SIZE_M),
                region_inset_m: spec.region_inset_m,
            });
        }
        if bad.is_empty() {
            Ok(out)
        } else {
            Err(ScenarioError::Invalid(Violations(bad)))
        }
    }
}

// ----------------------------------------------------------------- budget

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkinDepthQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    #[serde(default, rename = "resistivity_ohm_m", skip_serializing_if = "Option::is_none")]
    pub resistivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_permeability: Option<f64>,
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxQuery {
    pub squid_area_m2: f64,
    #[serde(default, rename = "ambient_field_T", skip_serializing_if = "Option::is_none")]
    pub ambient_field_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_fraction: Option<f64>,
    #[serde(default)]
    pub precision: FluxQuantumPrecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterQuery {
    /// Built-in curve name (`CR-110`, `CR-124`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    /// Curve file, resolved by the caller before evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<AttenuationCurve>,
    #[serde(default)]
    pub allow_extrapolation: bool,
    #[serde(rename = "block_frequency_Hz")]
    pub block_frequency_hz: f64,
    #[serde(rename = "block_attenuation_dB")]
    pub block_attenuation_db: f64,
    #[serde(rename = "pass_frequency_Hz")]
    pub pass_frequency_hz: f64,
    #[serde(rename = "max_insertion_dB")]
    pub max_insertion_db: f64,
}

impl FilterQuery {
    pub fn curve(&self) -> Result<AttenuationCurve, BudgetError> {
        let curve = match (&self.custom, &self.curve) {
            (Some(c), _) => c.clone(),
            (None, Some(name)) => budget::builtin_curve(name)
                .ok_or_else(|| BudgetError::Domain(format!("unknown built-in curve `{name}`")))?,
            (None, None) => return Err(BudgetError::Domain("filter needs `curve`, `curve_file` or `custom`".into())),
        };
        let allow = self.allow_extrapolation || curve.allow_extrapolation;
        Ok(curve.with_extrapolation(allow))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct T1Query {
    pub participation: f64,
    pub loss_tangent: f64,
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: f64,
    #[serde(default, rename = "residual_rate_per_s")]
    pub residual_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepQuery {
    pub loss_tangent: f64,
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: f64,
    #[serde(default, rename = "residual_rate_per_s")]
    pub residual_rate: f64,
    #[serde(default, rename = "threshold_s", skip_serializing_if = "Option::is_none")]
    pub threshold_s: Option<f64>,
    /// `[distance_m, participation]` rows, increasing distance.
    pub table: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetRequest {
    #[serde(default, rename = "skin_depth", skip_serializing_if = "Vec::is_empty")]
    pub skin_depths: Vec<SkinDepthQuery>,
    #[serde(default, rename = "flux", skip_serializing_if = "Vec::is_empty")]
    pub flux: Vec<FluxQuery>,
    #[serde(default, rename = "filter", skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<FilterQuery>,
    #[serde(default, rename = "t1", skip_serializing_if = "Vec::is_empty")]
    pub t1: Vec<T1Query>,
    #[serde(default, rename = "t1_sweep", skip_serializing_if = "Vec::is_empty")]
    pub sweeps: Vec<SweepQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinDepthResult {
    pub query: SkinDepthQuery,
    pub skin_depth_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxResult {
    pub query: FluxQuery,
    #[serde(rename = "threshold_field_T")]
    pub threshold_field_t: f64,
    #[serde(default, rename = "required_mfs_dB", skip_serializing_if = "Option::is_none")]
    pub required_mfs_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub material: String,
    #[serde(rename = "block_attenuation_dB_per_m")]
    pub block_attenuation_db_per_m: f64,
    #[serde(rename = "pass_attenuation_dB_per_m")]
    pub pass_attenuation_db_per_m: f64,
    pub sizing: FilterSizing,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BudgetReport {
    pub skin_depths: Vec<SkinDepthResult>,
    pub flux: Vec<FluxResult>,
    pub filters: Vec<FilterResult>,
    pub t1: Vec<CoherenceBudget>,
    pub sweeps: Vec<DistanceSweep>,
}

impl BudgetRequest {
    /// Copper skin depth at 100 kHz, the 30 um^2 loop threshold and target,
    /// and a CR-110 block filter sized for 20 dB at 100 GHz.
    pub fn example() -> Self {
        BudgetRequest {
            skin_depths: vec![SkinDepthQuery {
                material: Some("copper".into()),
                resistivity: None,
                relative_permeability: None,
                frequency_hz: 100e3,
            }],
            flux: vec![FluxQuery {
                squid_area_m2: 30e-12,
                ambient_field_t: Some(50e-6),
                residual_fraction: Some(1e-3),
                precision: FluxQuantumPrecision::Rounded,
            }],
            filters: vec![FilterQuery {
                curve: Some("CR-110".into()),
                curve_file: None,
                custom: None,
                allow_extrapolation: false,
                block_frequency_hz: 100e9,
                block_attenuation_db: 20.0,
                pass_frequency_hz: 5e9,
                max_insertion_db: 1.0,
            }],
            t1: Vec::new(),
            sweeps: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.skin_depths.is_empty()
            && self.flux.is_empty()
            && self.filters.is_empty()
            && self.t1.is_empty()
            && self.sweeps.is_empty()
    }

    pub fn evaluate(&self, db: &MaterialDb) -> Result<BudgetReport, ScenarioError> {
        let mut report = BudgetReport::default();
        for q in &self.skin_depths {
            let record = q.material.as_deref().map(|m| db.get(m)).transpose()?;
            let rho = q
                .resistivity
                .or(record.and_then(|r| r.resistivity))
                .ok_or_else(|| BudgetError::Domain("skin depth needs a resistivity".into()))?;
            let mu = q
                .relative_permeability
                .or(record.and_then(|r| r.relative_permeability))
                .unwrap_or(1.0);
            report.skin_depths.push(SkinDepthResult {
                query: q.clone(),
                skin_depth_m: budget::skin_depth(rho, mu, q.frequency_hz)?,
            });
        }
        for q in &self.flux {
            let threshold = budget::flux_field_threshold_with(q.squid_area_m2, q.precision)?;
            let required = match q.ambient_field_t {
                Some(ambient) => Some(budget::required_mfs_with(
                    q.squid_area_m2,
                    ambient,
                    q.residual_fraction.unwrap_or(crate::recommender::DEFAULT_RESIDUAL_FRACTION),
                    q.precision,
                )?),
                None => None,
            };
            report.flux.push(FluxResult {
                query: q.clone(),
                threshold_field_t: threshold,
                required_mfs_db: required,
            });
        }
        for q in &self.filters {
            let curve = q.curve()?;
            let sizing = budget::filter_length(
                &curve,
                q.block_frequency_hz,
                q.block_attenuation_db,
                q.pass_frequency_hz,
                q.max_insertion_db,
            )?;
            report.filters.push(FilterResult {
                material: curve.material.clone(),
                block_attenuation_db_per_m: curve.attenuation_db_per_m(q.block_frequency_hz)?,
                pass_attenuation_db_per_m: curve.attenuation_db_per_m(q.pass_frequency_hz)?,
                sizing,
            });
        }
        for q in &self.t1 {
            report
                .t1
                .push(budget::t1_bound(q.participation, q.loss_tangent, q.frequency_hz, q.residual_rate)?);
        }
        for q in &self.sweeps {
            let table: Vec<(f64, f64)> = q.table.iter().map(|r| (r[0], r[1])).collect();
            report.sweeps.push(budget::t1_distance_sweep(
                &table,
                q.loss_tangent,
                q.frequency_hz,
                q.residual_rate,
                q.threshold_s.unwrap_or(budget::T1_THRESHOLD_S),
            )?);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommender::Architecture;

    const THERMAL: &str = r#"
kind = "thermal"
configs = ["A", "C..E"]
plateau_threshold = 0.02

[[scenario]]
label = "custom"
environment = { surface_area_m2 = 0.2, absorption = 0.005, temperature_K = 0.01 }
sample = { surface_area_m2 = 2.2e-4, absorption = { absorption_inner = 8e-5, absorption_outer = 8e-5 }, dissipated_power_W = 1e-14 }

[[scenario.shield]]
name = "holder"
material = "copper"
surface_area_m2 = 3.6e-3
coating = { absorption_inner = 0.9 }
"#;

    #[test]
    fn thermal_file_resolves() {
        let ScenarioFile::Thermal(f) = parse_scenario(THERMAL).unwrap() else { panic!() };
        let s = f.resolve(&MaterialDb::builtin()).unwrap();
        let labels: Vec<_> = s.iter().map(|s| s.label.clone().unwrap()).collect();
        assert_eq!(labels, ["A", "C", "D", "E", "custom"]);
        let custom = &s[4];
        assert_eq!(custom.shields[0].coating, SurfaceCoating::new(0.9, 0.005));
    }

    #[test]
    fn empty_thermal_file_means_all_defaults() {
        let ScenarioFile::Thermal(f) = parse_scenario("kind = \"thermal\"").unwrap() else { panic!() };
        assert_eq!(f.resolve(&MaterialDb::builtin()).unwrap().len(), 8);
    }

    #[test]
    fn negative_area_names_the_field() {
        let text = THERMAL.replace("surface_area_m2 = 3.6e-3", "surface_area_m2 = -1.0");
        let ScenarioFile::Thermal(f) = parse_scenario(&text).unwrap() else { panic!() };
        let Err(ScenarioError::Invalid(v)) = f.resolve(&MaterialDb::builtin()) else { panic!() };
        assert!(v.0.iter().any(|x| x.field == "scenario[0].shields[0].surface_area_m2"), "{v}");
    }

    #[test]
    fn unknown_keys_and_kinds_rejected() {
        assert!(matches!(parse_scenario("kind = \"thermal\"\nbogus = 1"), Err(ScenarioError::Parse(_))));
        assert!(matches!(parse_scenario("kind = \"optical\""), Err(ScenarioError::UnknownKind(_))));
        assert!(matches!(parse_scenario("x = 1"), Err(ScenarioError::Parse(_))));
        assert!(matches!(parse_scenario("kind = 3"), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn label_ranges() {
        assert_eq!(expand_labels(&["A..C".into(), "H".into()]).unwrap(), ["A", "B", "C", "H"]);
        assert!(expand_labels(&["C..A".into()]).is_err());
        assert!(expand_labels(&["Z".into()]).is_err());
    }

    #[test]
    fn magnetic_file_resolves_materials() {
        let text = r#"
kind = "magnetic"
mesh_size_m = 4e-3
superconductor_mu_r = 1e-6

[[scenario]]
label = "cup"
applied_field_T = 5e-5

[[scenario.shell]]
name = "cup"
material = "aluminum"
outer_diameter_m = 0.066
height_m = 0.18
wall_thickness_m = 0.001
"#;
        let ScenarioFile::Magnetic(f) = parse_scenario(text).unwrap() else { panic!() };
        let s = f.resolve(&MaterialDb::builtin(), MagneticOverrides::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].shells[0].relative_permeability, 1e-6);
        assert_eq!(s[0].mesh_size_m, 4e-3);
        let over = MagneticOverrides {
            mesh_size_m: Some(1e-3),
            superconductor_mu_r: Some(1e-9),
        };
        let s = f.resolve(&MaterialDb::builtin(), over).unwrap();
        assert_eq!(s[0].shells[0].relative_permeability, 1e-9);
        assert_eq!(s[0].mesh_size_m, 1e-3);

        let cryophy = text.replace("\"aluminum\"", "\"cryophy\"");
        let ScenarioFile::Magnetic(f) = parse_scenario(&cryophy).unwrap() else { panic!() };
        assert!(matches!(
            f.resolve(&MaterialDb::builtin(), MagneticOverrides::default()),
            Err(ScenarioError::Invalid(_))
        ));
    }

    #[test]
    fn empty_magnetic_file_is_the_comparison() {
        let ScenarioFile::Magnetic(f) = parse_scenario("kind = \"magnetic\"").unwrap() else { panic!() };
        let s = f.resolve(&MaterialDb::builtin(), MagneticOverrides::default()).unwrap();
        let labels: Vec<_> = s.iter().map(|s| s.label.clone().unwrap()).collect();
        let expected: Vec<_> = COMPARISON_STACKS.iter().map(|(l, _)| l.to_string()).collect();
        assert_eq!(labels, expected);
    }

    #[test]
    fn budget_example_evaluates() {
        let r = BudgetRequest::example().evaluate(&MaterialDb::builtin()).unwrap();
        assert!((r.skin_depths[0].skin_depth_m - 2.0629e-4).abs() < 1e-7);
        assert!((r.flux[0].threshold_field_t - 69e-6).abs() < 1e-9);
        let len = r.filters[0].sizing.length_m();
        assert!((len - 0.2 / 5.4).abs() / (0.2 / 5.4) < 1e-9);
    }

    #[test]
    fn curve_file() {
        let text = "kind = \"attenuation_curve\"\nmaterial = \"x\"\n[[anchor]]\nfrequency_Hz = 1e9\nattenuation_dB_per_m = 10.0\n[[anchor]]\nfrequency_Hz = 1e10\nattenuation_dB_per_m = 100.0\n";
        let c = parse_curve(text).unwrap();
        assert!((c.attenuation_db_per_m(3.1622776601683795e9).unwrap() - 31.622776601683793).abs() < 1e-9);
        assert!(parse_curve("material = \"x\"\nanchor = []").is_err());
    }

    #[test]
    fn files_round_trip() {
        let mut design = DesignContext::new(Architecture::Floating);
        design.squid_area_m2 = Some(30e-12);
        design.lines.push(crate::recommender::LineSpec::new(crate::recommender::LineKind::Flux));
        let files = [
            parse_scenario(THERMAL).unwrap(),
            parse_scenario("kind = \"magnetic\"\ncomparison = true").unwrap(),
            ScenarioFile::Budget(BudgetRequest::example()),
            ScenarioFile::Design(design),
        ];
        for f in files {
            let text = to_toml(&f);
            assert_eq!(parse_scenario(&text).unwrap(), f, "{text}");
        }
    }
}
