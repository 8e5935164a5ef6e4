//! Report bundle, artifact tables and plot data.
//!
//! A [`DesignReport`] is the hashed payload: it holds no timing and no
//! absolute paths, so identical inputs give identical bytes. Timing goes in
//! the [`ReportEnvelope`] next to the hash.

pub mod format;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::magnetostatic::{FieldMap, MfsResult, COMPARISON_STACKS};
use crate::radiative::{Ranking, ThermalSolution};
use crate::recommender::Recommendation;
use crate::scenario::BudgetReport;

pub use format::{csv_text, read_csv, sci, to_json};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("report has no {0} block")]
    MissingBlock(&'static str),
    #[error("malformed artifact: {0}")]
    Malformed(String),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    /// Path as given on the command line, or `builtin`.
    pub source: String,
    pub kind: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalBlock {
    pub source: String,
    /// Labels in the order they were given.
    pub input_order: Vec<String>,
    pub ranking: Ranking,
}

impl ThermalBlock {
    /// Solutions in input order.
    pub fn in_input_order(&self) -> Vec<&ThermalSolution> {
        self.input_order
            .iter()
            .filter_map(|l| {
                self.ranking
                    .solutions
                    .iter()
                    .find(|s| s.configuration_label.as_deref() == Some(l.as_str()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    pub label: String,
    pub element_count: usize,
    pub far_field_deviation: f64,
    pub axis_radial_ratio: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisProfile {
    pub label: String,
    pub z_m: Vec<f64>,
    #[serde(rename = "b_magnitude_T")]
    pub b_magnitude_t: Vec<f64>,
}

impl AxisProfile {
    pub fn from_field(label: &str, field: &FieldMap) -> Self {
        let (z_m, b_magnitude_t) = field.axis_profile().into_iter().unzip();
        AxisProfile {
            label: label.to_string(),
            z_m,
            b_magnitude_t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticBlock {
    pub source: String,
    pub results: Vec<MfsResult>,
    pub diagnostics: Vec<FieldDiagnostics>,
    pub axis_profiles: Vec<AxisProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetBlock {
    pub source: String,
    pub report: BudgetReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationBlock {
    pub source: String,
    pub recommendation: Recommendation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    #[serde(default)]
    pub thermal: Vec<ThermalBlock>,
    #[serde(default)]
    pub magnetic: Vec<MagneticBlock>,
    #[serde(default)]
    pub budget: Vec<BudgetBlock>,
    #[serde(default)]
    pub recommendations: Vec<RecommendationBlock>,
}

impl Default for DesignReport {
    fn default() -> Self {
        DesignReport {
            tool_version: TOOL_VERSION.to_string(),
            inputs: Vec::new(),
            thermal: Vec::new(),
            magnetic: Vec::new(),
            budget: Vec::new(),
            recommendations: Vec::new(),
        }
    }
}

impl DesignReport {
    /// The hashed payload text.
    pub fn payload_json(&self) -> String {
        to_json(self)
    }

    pub fn payload_sha256(&self) -> String {
        sha256_hex(self.payload_json().as_bytes())
    }

    pub fn is_empty(&self) -> bool {
        self.thermal.is_empty() && self.magnetic.is_empty() && self.budget.is_empty() && self.recommendations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_s: f64,
}

/// On-disk report: payload, its hash, and unhashed timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub payload: DesignReport,
    pub payload_sha256: String,
    pub timing: Timing,
}

impl ReportEnvelope {
    pub fn new(payload: DesignReport, elapsed_s: f64) -> Self {
        let payload_sha256 = payload.payload_sha256();
        ReportEnvelope {
            payload,
            payload_sha256,
            timing: Timing { elapsed_s },
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Parses an envelope and checks the stored hash.
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let env: ReportEnvelope = serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))?;
        let actual = env.payload.payload_sha256();
        if actual != env.payload_sha256 {
            return Err(ReportError::Malformed(format!(
                "payload hash {actual} does not match stored {}",
                env.payload_sha256
            )));
        }
        Ok(env)
    }
}

// ------------------------------------------------------------- CSV tables

pub const THERMAL_CSV_HEADER: [&str; 7] = [
    "label",
    "rank",
    "sample_temperature_K",
    "shield_temperatures_K",
    "environment_temperature_K",
    "reduced_absorption",
    "transferred_power_W",
];

/// One row per configuration in input order. Shield temperatures are
/// innermost first, separated by `;`.
pub fn thermal_csv(block: &ThermalBlock) -> String {
    let rows: Vec<Vec<String>> = block
        .in_input_order()
        .into_iter()
        .map(|s| {
            let rank = block.ranking.solutions.iter().position(|x| std::ptr::eq(x, s)).unwrap_or(0) + 1;
            vec![
                s.configuration_label.clone().unwrap_or_default(),
                rank.to_string(),
                sci(s.sample_temperature_k),
                s.shield_temperatures_k.iter().map(|t| sci(*t)).collect::<Vec<_>>().join(";"),
                sci(s.environment_temperature_k),
                sci(s.reduced_absorption),
                sci(s.transferred_power_w),
            ]
        })
        .collect();
    csv_text(&THERMAL_CSV_HEADER, &rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRow {
    pub label: String,
    pub rank: usize,
    pub sample_temperature_k: f64,
    pub shield_temperatures_k: Vec<f64>,
    pub environment_temperature_k: f64,
    pub reduced_absorption: f64,
    pub transferred_power_w: f64,
}

fn num(s: &str) -> Result<f64, ReportError> {
    s.trim().parse().map_err(|_| ReportError::Malformed(format!("`{s}` is not a number")))
}

fn check_header(got: &[String], want: &[&str]) -> Result<(), ReportError> {
    if got.iter().map(String::as_str).ne(want.iter().copied()) {
        return Err(ReportError::Malformed(format!("unexpected header {got:?}")));
    }
    Ok(())
}

pub fn read_thermal_csv(text: &str) -> Result<Vec<ThermalRow>, ReportError> {
    let (header, rows) = read_csv(text).map_err(|e| ReportError::Malformed(e.to_string()))?;
    check_header(&header, &THERMAL_CSV_HEADER)?;
    rows.iter()
        .map(|r| {
            Ok(ThermalRow {
                label: r[0].clone(),
                rank: r[1].parse().map_err(|_| ReportError::Malformed(format!("bad rank `{}`", r[1])))?,
                sample_temperature_k: num(&r[2])?,
                shield_temperatures_k: r[3]
                    .split(';')
                    .filter(|s| !s.is_empty())
                    .map(num)
                    .collect::<Result<_, _>>()?,
                environment_temperature_k: num(&r[4])?,
                reduced_absorption: num(&r[5])?,
                transferred_power_w: num(&r[6])?,
            })
        })
        .collect()
}

pub fn write_thermal_rows(rows: &[ThermalRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.rank.to_string(),
                sci(r.sample_temperature_k),
                r.shield_temperatures_k.iter().map(|t| sci(*t)).collect::<Vec<_>>().join(";"),
                sci(r.environment_temperature_k),
                sci(r.reduced_absorption),
                sci(r.transferred_power_w),
            ]
        })
        .collect();
    csv_text(&THERMAL_CSV_HEADER, &rows)
}

pub const MFS_CSV_HEADER: [&str; 5] = ["label", "mfs_dB", "b_average_lower_third_T", "b_external_T", "element_count"];

/// Comparison stacks first in their display order, then the rest as given.
pub fn mfs_display_order(results: &[MfsResult]) -> Vec<&MfsResult> {
    let rank = |r: &MfsResult| {
        r.label
            .as_deref()
            .and_then(|l| COMPARISON_STACKS.iter().position(|(name, _)| *name == l))
            .unwrap_or(COMPARISON_STACKS.len())
    };
    let mut out: Vec<&MfsResult> = results.iter().collect();
    out.sort_by_key(|r| rank(r));
    out
}

pub fn mfs_csv(results: &[MfsResult]) -> String {
    let rows: Vec<Vec<String>> = mfs_display_order(results)
        .into_iter()
        .map(|r| {
            vec![
                r.label.clone().unwrap_or_default(),
                sci(r.mfs_db),
                sci(r.b_average_lower_third_t),
                sci(r.b_external_t),
                r.mesh_convergence.last().map(|p| p.element_count).unwrap_or(0).to_string(),
            ]
        })
        .collect();
    csv_text(&MFS_CSV_HEADER, &rows)
}

// -------------------------------------------------------------- plot data

pub const BAR_CSV_HEADER: [&str; 4] = ["source", "label", "sample_temperature_K", "plateau"];
pub const AXIS_CSV_HEADER: [&str; 4] = ["source", "label", "z_m", "B_magnitude_T"];
pub const MFS_PLOT_HEADER: [&str; 4] = ["source", "label", "mfs_dB", "b_average_lower_third_T"];

/// Named plot-ready CSV tables.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub tables: Vec<(String, String)>,
}

impl PlotData {
    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }
}

/// Temperature bars (`thermal_bars.csv`), the MFS table (`mfs_table.csv`)
/// and on-axis field profiles (`axis_profiles.csv`).
pub fn emit_plot_data(report: &DesignReport) -> Result<PlotData, ReportError> {
    if report.thermal.is_empty() && report.magnetic.is_empty() {
        return Err(ReportError::MissingBlock("thermal or magnetic"));
    }
    let mut tables = Vec::new();
    if !report.thermal.is_empty() {
        let mut rows = Vec::new();
        for b in &report.thermal {
            for s in b.in_input_order() {
                let label = s.configuration_label.clone().unwrap_or_default();
                let plateau = b.ranking.plateau_label.as_deref() == Some(label.as_str());
                rows.push(vec![b.source.clone(), label, sci(s.sample_temperature_k), plateau.to_string()]);
            }
        }
        tables.push(("thermal_bars.csv".to_string(), csv_text(&BAR_CSV_HEADER, &rows)));
    }
    if !report.magnetic.is_empty() {
        let mut rows = Vec::new();
        let mut axis = Vec::new();
        for b in &report.magnetic {
            for r in mfs_display_order(&b.results) {
                rows.push(vec![
                    b.source.clone(),
                    r.label.clone().unwrap_or_default(),
                    sci(r.mfs_db),
                    sci(r.b_average_lower_third_t),
                ]);
            }
            for p in &b.axis_profiles {
                for (z, v) in p.z_m.iter().zip(&p.b_magnitude_t) {
                    axis.push(vec![b.source.clone(), p.label.clone(), sci(*z), sci(*v)]);
                }
            }
        }
        tables.push(("mfs_table.csv".to_string(), csv_text(&MFS_PLOT_HEADER, &rows)));
        tables.push(("axis_profiles.csv".to_string(), csv_text(&AXIS_CSV_HEADER, &axis)));
    }
    Ok(PlotData { tables })
}
