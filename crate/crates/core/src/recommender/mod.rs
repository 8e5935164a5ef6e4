//! Rule engine turning a design context into an IR configuration, a
//! magnetic shield stack and per-line filter chains.
//!
//! The rules live in `rules.toml` and the stack capabilities in
//! `capability.toml`; both are compiled in and can be replaced at run time.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::budget::{self, BudgetError};
use crate::magnetostatic::{self, MagneticError, ShellKind, ShieldGeometry};

pub const BUILTIN_RULES: &str = include_str!("rules.toml");
pub const BUILTIN_CAPABILITIES: &str = include_str!("capability.toml");

/// Ambient field assumed when a loop area is given without one, T.
pub const DEFAULT_AMBIENT_FIELD_T: f64 = 50e-6;
/// Residual fraction of the one-flux-quantum field targeted by default.
pub const DEFAULT_RESIDUAL_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecommendError {
    #[error("no stack reaches {target_db} dB (best available {best_db} dB from `{best_id}`)")]
    UnachievableTarget {
        target_db: f64,
        best_db: f64,
        best_id: String,
    },
    #[error("invalid design context: {0}")]
    Domain(String),
    #[error("rule table: {0}")]
    Rules(String),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Floating,
    Grounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrConfig {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    ReadoutIn,
    ReadoutOut,
    Drive,
    Flux,
}

impl LineKind {
    pub const ALL: [LineKind; 4] = [LineKind::ReadoutIn, LineKind::ReadoutOut, LineKind::Drive, LineKind::Flux];

    pub fn key(&self) -> &'static str {
        match self {
            LineKind::ReadoutIn => "readout_in",
            LineKind::ReadoutOut => "readout_out",
            LineKind::Drive => "drive",
            LineKind::Flux => "flux",
        }
    }

    /// Band used when a line gives none, Hz.
    pub fn default_band(&self) -> [f64; 2] {
        match self {
            LineKind::Flux => [0.0, 500e6],
            _ => [4e9, 8e9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub kind: LineKind,
    /// `[f_low, f_high]`, Hz.
    #[serde(default, rename = "band_Hz", skip_serializing_if = "Option::is_none")]
    pub band_hz: Option<[f64; 2]>,
    #[serde(default, rename = "nominal_power_dBm", skip_serializing_if = "Option::is_none")]
    pub nominal_power_dbm: Option<f64>,
}

impl LineSpec {
    pub fn new(kind: LineKind) -> Self {
        LineSpec {
            kind,
            band_hz: None,
            nominal_power_dbm: None,
        }
    }

    pub fn band(&self) -> [f64; 2] {
        self.band_hz.unwrap_or_else(|| self.kind.default_band())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignContext {
    pub qubit_architecture: Architecture,
    #[serde(default)]
    pub nearby_ir_filters: bool,
    #[serde(default)]
    pub warm_components_nearby: bool,
    #[serde(default, rename = "squid_area_m2", skip_serializing_if = "Option::is_none")]
    pub squid_area_m2: Option<f64>,
    #[serde(default, rename = "ambient_field_T", skip_serializing_if = "Option::is_none")]
    pub ambient_field_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_fraction: Option<f64>,
    /// Overrides the target derived from the loop area.
    #[serde(default, rename = "target_mfs_dB", skip_serializing_if = "Option::is_none")]
    pub target_mfs_db: Option<f64>,
    #[serde(default, rename = "absorber_distance_m", skip_serializing_if = "Option::is_none")]
    pub absorber_distance_m: Option<f64>,
    #[serde(default, rename = "line")]
    pub lines: Vec<LineSpec>,
}

impl DesignContext {
    pub fn new(architecture: Architecture) -> Self {
        DesignContext {
            qubit_architecture: architecture,
            nearby_ir_filters: false,
            warm_components_nearby: false,
            squid_area_m2: None,
            ambient_field_t: None,
            residual_fraction: None,
            target_mfs_db: None,
            absorber_distance_m: None,
            lines: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<(), RecommendError> {
        let bad = |m: String| Err(RecommendError::Domain(m));
        for (name, v) in [
            ("squid_area_m2", self.squid_area_m2),
            ("ambient_field_T", self.ambient_field_t),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} = {v} must be positive"));
                }
            }
        }
        if let Some(f) = self.residual_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("residual_fraction = {f} must lie in (0, 1]"));
            }
        }
        if let Some(t) = self.target_mfs_db {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("target_mfs_dB = {t} must be >= 0"));
            }
        }
        if let Some(d) = self.absorber_distance_m {
            if !(d >= 0.0 && d.is_finite()) {
                return bad(format!("absorber_distance_m = {d} must be >= 0"));
            }
        }
        for (i, line) in self.lines.iter().enumerate() {
            let [lo, hi] = line.band();
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return bad(format!("line[{i}] band [{lo}, {hi}] must satisfy 0 <= f_low < f_high"));
            }
        }
        Ok(())
    }

    /// Suppression this context asks for, dB.
    pub fn target_mfs(&self) -> Result<f64, RecommendError> {
        if let Some(t) = self.target_mfs_db {
            return Ok(t);
        }
        match self.squid_area_m2 {
            Some(area) => Ok(budget::required_mfs(
                area,
                self.ambient_field_t.unwrap_or(DEFAULT_AMBIENT_FIELD_T),
                self.residual_fraction.unwrap_or(DEFAULT_RESIDUAL_FRACTION),
            )?),
            None => Ok(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrRule {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub architecture: Option<Architecture>,
    /// Matches on `nearby_ir_filters || warm_components_nearby`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_sources_nearby: Option<bool>,
    pub config: IrConfig,
    pub rationale: String,
}

impl IrRule {
    pub fn matches(&self, ctx: &DesignContext) -> bool {
        self.architecture.is_none_or(|a| a == ctx.qubit_architecture)
            && self
                .heat_sources_nearby
                .is_none_or(|h| h == (ctx.nearby_ir_filters || ctx.warm_components_nearby))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Ir,
    Superconductor,
    MuMetal,
}

impl LayerKind {
    pub fn material(&self) -> &'static str {
        match self {
            LayerKind::Ir => "copper with absorptive coating",
            LayerKind::Superconductor => "aluminum",
            LayerKind::MuMetal => "mu-metal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackTemplate {
    pub id: String,
    /// Innermost first.
    pub layers: Vec<LayerKind>,
}

impl StackTemplate {
    /// No superconducting layer sits outside a mu-metal layer.
    pub fn ordering_ok(&self) -> bool {
        let last_sc = self.layers.iter().rposition(|l| *l == LayerKind::Superconductor);
        let first_mu = self.layers.iter().position(|l| *l == LayerKind::MuMetal);
        match (last_sc, first_mu) {
            (Some(s), Some(m)) => s < m,
            _ => true,
        }
    }

    fn magnetic(&self) -> Vec<ShellKind> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerKind::Ir => None,
                LayerKind::Superconductor => Some(ShellKind::Superconductor),
                LayerKind::MuMetal => Some(ShellKind::MuMetal),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRules {
    pub notes: Vec<String>,
    pub superconductor_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorberRule {
    pub min_distance_m: f64,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterStyle {
    BandOrLowPass,
    LowPass,
    NonDissipative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRule {
    pub filter: FilterStyle,
    pub ir_material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_cutoff_hz: Option<f64>,
    #[serde(default)]
    pub minimized_ir: bool,
    #[serde(default)]
    pub no_attenuator: bool,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningRules {
    pub always: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    pub version: u32,
    #[serde(rename = "ir_rule")]
    pub ir_rules: Vec<IrRule>,
    #[serde(default)]
    pub fallback_notes: BTreeMap<IrConfig, String>,
    #[serde(rename = "stack")]
    pub stacks: Vec<StackTemplate>,
    pub holder: HolderRules,
    pub absorber: AbsorberRule,
    pub lines: BTreeMap<LineKind, LineRule>,
    pub warnings: WarningRules,
}

impl RuleTable {
    /// Parses and checks a rule table.
    pub fn parse(text: &str) -> Result<Self, RecommendError> {
        let table: RuleTable = toml::from_str(text).map_err(|e| RecommendError::Rules(e.to_string()))?;
        table.check()?;
        Ok(table)
    }

    pub fn builtin() -> &'static RuleTable {
        static TABLE: OnceLock<RuleTable> = OnceLock::new();
        TABLE.get_or_init(|| RuleTable::parse(BUILTIN_RULES).expect("built-in rule table is valid"))
    }

    /// Every context maps to exactly one IR rule, stacks honour the layer
    /// ordering, the first stack is IR only, and every line kind has a
    /// template.
    pub fn check(&self) -> Result<(), RecommendError> {
        let err = |m: String| Err(RecommendError::Rules(m));
        for ctx in context_grid() {
            let hits: Vec<&str> = self.ir_rules.iter().filter(|r| r.matches(&ctx)).map(|r| r.id.as_str()).collect();
            if hits.len() != 1 {
                return err(format!(
                    "context ({:?}, filters {}, warm {}) matches {} IR rules {:?}",
                    ctx.qubit_architecture,
                    ctx.nearby_ir_filters,
                    ctx.warm_components_nearby,
                    hits.len(),
                    hits
                ));
            }
        }
        if self.stacks.is_empty() {
            return err("no stacks".into());
        }
        for s in &self.stacks {
            if s.layers.first() != Some(&LayerKind::Ir) {
                return err(format!("stack `{}` must start with the IR layer", s.id));
            }
            if !s.ordering_ok() {
                return err(format!("stack `{}` puts a superconductor outside mu-metal", s.id));
            }
            if s.magnetic().len() > 2 {
                return err(format!("stack `{}` has more than two magnetic layers", s.id));
            }
        }
        let mut ids: Vec<&str> = self.stacks.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return err("stack ids must be distinct".into());
        }
        for kind in LineKind::ALL {
            if !self.lines.contains_key(&kind) {
                return err(format!("no template for `{}` lines", kind.key()));
            }
        }
        if !(self.absorber.min_distance_m >= 0.0 && self.absorber.min_distance_m.is_finite()) {
            return err("absorber distance must be >= 0".into());
        }
        Ok(())
    }
}

/// All eight combinations of architecture and the two heat-source flags.
pub fn context_grid() -> Vec<DesignContext> {
    let mut out = Vec::with_capacity(8);
    for arch in [Architecture::Floating, Architecture::Grounded] {
        for filters in [false, true] {
            for warm in [false, true] {
                let mut c = DesignContext::new(arch);
                c.nearby_ir_filters = filters;
                c.warm_components_nearby = warm;
                out.push(c);
            }
        }
    }
    out
}

/// Suppression each stack reaches, dB, keyed by stack id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityTable {
    pub mesh_size_m: f64,
    pub superconductor_mu_r: f64,
    pub mu_metal_mu_r: f64,
    #[serde(rename = "mfs_dB")]
    pub mfs_db: BTreeMap<String, f64>,
}

impl CapabilityTable {
    pub fn parse(text: &str) -> Result<Self, RecommendError> {
        toml::from_str(text).map_err(|e| RecommendError::Rules(e.to_string()))
    }

    pub fn builtin() -> &'static CapabilityTable {
        static TABLE: OnceLock<CapabilityTable> = OnceLock::new();
        TABLE.get_or_init(|| CapabilityTable::parse(BUILTIN_CAPABILITIES).expect("built-in capability table is valid"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("capability table serializes")
    }
}

/// Re-runs the magnetostatic solver for every stack in `rules`.
pub fn regenerate_capabilities(
    rules: &RuleTable,
    geometry: &ShieldGeometry,
    mesh_size_m: f64,
) -> Result<CapabilityTable, MagneticError> {
    use rayon::prelude::*;
    let values: Vec<(String, f64)> = rules
        .stacks
        .par_iter()
        .map(|s| {
            let kinds = s.magnetic();
            if kinds.is_empty() {
                return Ok((s.id.clone(), 0.0));
            }
            let scenario = magnetostatic::stack_scenario(&s.id, &kinds, geometry, mesh_size_m)?;
            let (_, r) = magnetostatic::scenario_mfs(&scenario)?;
            Ok((s.id.clone(), r.mfs_db))
        })
        .collect::<Result<_, MagneticError>>()?;
    Ok(CapabilityTable {
        mesh_size_m,
        superconductor_mu_r: geometry.superconductor_mu_r,
        mu_metal_mu_r: geometry.mu_metal_mu_r,
        mfs_db: values.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrChoice {
    pub config: IrConfig,
    pub rule_id: String,
    pub rationale: String,
}

/// First matching IR rule.
pub fn recommend_ir_config(ctx: &DesignContext, rules: &RuleTable) -> Result<IrChoice, RecommendError> {
    rules
        .ir_rules
        .iter()
        .find(|r| r.matches(ctx))
        .map(|r| IrChoice {
            config: r.config,
            rule_id: r.id.clone(),
            rationale: r.rationale.clone(),
        })
        .ok_or_else(|| RecommendError::Rules("no IR rule matches the context".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedLayer {
    pub kind: LayerKind,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackPlan {
    pub id: String,
    /// Innermost first.
    pub layers: Vec<PlannedLayer>,
    #[serde(rename = "capability_dB")]
    pub capability_db: f64,
    #[serde(rename = "target_mfs_dB")]
    pub target_mfs_db: f64,
    pub notes: Vec<String>,
}

/// Simplest stack whose capability reaches `target_mfs_db`.
pub fn plan_shield_stack(
    target_mfs_db: f64,
    rules: &RuleTable,
    capabilities: &CapabilityTable,
) -> Result<StackPlan, RecommendError> {
    if !(target_mfs_db >= 0.0 && target_mfs_db.is_finite()) {
        return Err(RecommendError::Domain(format!("target {target_mfs_db} dB must be >= 0")));
    }
    let capability = |s: &StackTemplate| -> Result<f64, RecommendError> {
        if s.magnetic().is_empty() {
            return Ok(0.0);
        }
        capabilities
            .mfs_db
            .get(&s.id)
            .copied()
            .ok_or_else(|| RecommendError::Rules(format!("no capability recorded for stack `{}`", s.id)))
    };
    let mut best: Option<(&StackTemplate, f64)> = None;
    for s in &rules.stacks {
        let c = capability(s)?;
        if c >= target_mfs_db {
            let mut notes = Vec::new();
            if s.layers.contains(&LayerKind::Superconductor) && s.layers.contains(&LayerKind::MuMetal) {
                notes.push(rules.holder.superconductor_note.clone());
            }
            return Ok(StackPlan {
                id: s.id.clone(),
                layers: s
                    .layers
                    .iter()
                    .map(|&kind| PlannedLayer {
                        kind,
                        material: kind.material().to_string(),
                    })
                    .collect(),
                capability_db: c,
                target_mfs_db,
                notes,
            });
        }
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((s, c));
        }
    }
    let (s, c) = best.expect("table has stacks");
    Err(RecommendError::UnachievableTarget {
        target_db: target_mfs_db,
        best_db: c,
        best_id: s.id.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageKind {
    LowPass,
    BandPass,
    Infrared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterStage {
    pub kind: StageKind,
    /// Cutoff for low-pass, `[low, high]` for band-pass, Hz.
    #[serde(rename = "frequencies_Hz")]
    pub frequencies_hz: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    pub dissipative: bool,
    #[serde(default)]
    pub minimized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePlan {
    pub kind: LineKind,
    #[serde(rename = "band_Hz")]
    pub band_hz: [f64; 2],
    /// From the line entry toward the device.
    pub stages: Vec<FilterStage>,
    pub no_attenuator: bool,
    pub notes: Vec<String>,
}

impl LinePlan {
    pub fn ir_stage_count(&self) -> usize {
        self.stages.iter().filter(|s| s.kind == StageKind::Infrared).count()
    }
}

/// Filter chain for one line.
pub fn plan_line_filters(line: &LineSpec, rules: &RuleTable) -> Result<LinePlan, RecommendError> {
    let rule = rules
        .lines
        .get(&line.kind)
        .ok_or_else(|| RecommendError::Rules(format!("no template for `{}` lines", line.kind.key())))?;
    let [lo, hi] = line.band();
    let dissipative = rule.filter != FilterStyle::NonDissipative;
    let first = match rule.filter {
        FilterStyle::LowPass => FilterStage {
            kind: StageKind::LowPass,
            frequencies_hz: vec![match line.band_hz {
                Some(_) => hi,
                None => rule.default_cutoff_hz.unwrap_or(hi),
            }],
            material: None,
            dissipative,
            minimized: false,
        },
        FilterStyle::BandOrLowPass | FilterStyle::NonDissipative => {
            if lo > 0.0 {
                FilterStage {
                    kind: StageKind::BandPass,
                    frequencies_hz: vec![lo, hi],
                    material: None,
                    dissipative,
                    minimized: false,
                }
            } else {
                FilterStage {
                    kind: StageKind::LowPass,
                    frequencies_hz: vec![hi],
                    material: None,
                    dissipative,
                    minimized: false,
                }
            }
        }
    };
    let ir = FilterStage {
        kind: StageKind::Infrared,
        frequencies_hz: Vec::new(),
        material: Some(rule.ir_material.clone()),
        dissipative: true,
        minimized: rule.minimized_ir,
    };
    Ok(LinePlan {
        kind: line.kind,
        band_hz: [lo, hi],
        stages: vec![first, ir],
        no_attenuator: rule.no_attenuator,
        notes: rule.notes.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorberCheck {
    pub distance_m: f64,
    pub threshold_m: f64,
    pub pass: bool,
}

/// Passes only when `distance_m` exceeds the rule-table minimum.
pub fn absorber_distance_check(distance_m: f64, rules: &RuleTable) -> AbsorberCheck {
    AbsorberCheck {
        distance_m,
        threshold_m: rules.absorber.min_distance_m,
        pass: distance_m > rules.absorber.min_distance_m,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub rule_table_version: u32,
    pub ir_config: IrChoice,
    pub fallback_notes: BTreeMap<IrConfig, String>,
    pub shield_stack: StackPlan,
    pub holder_notes: Vec<String>,
    pub line_plans: Vec<LinePlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber_check: Option<AbsorberCheck>,
    pub warnings: Vec<String>,
}

/// Full recommendation with the built-in tables.
pub fn recommend(ctx: &DesignContext) -> Result<Recommendation, RecommendError> {
    recommend_with(ctx, RuleTable::builtin(), CapabilityTable::builtin())
}

pub fn recommend_with(
    ctx: &DesignContext,
    rules: &RuleTable,
    capabilities: &CapabilityTable,
) -> Result<Recommendation, RecommendError> {
    ctx.check()?;
    let ir_config = recommend_ir_config(ctx, rules)?;
    let shield_stack = plan_shield_stack(ctx.target_mfs()?, rules, capabilities)?;
    let line_plans = ctx
        .lines
        .iter()
        .map(|l| plan_line_filters(l, rules))
        .collect::<Result<_, _>>()?;
    let mut warnings = rules.warnings.always.clone();
    let absorber_check = ctx.absorber_distance_m.map(|d| absorber_distance_check(d, rules));
    if let Some(check) = &absorber_check {
        if !check.pass {
            warnings.push(format!(
                "Absorber at {} m is too close to the qubit. {}",
                check.distance_m, rules.absorber.note
            ));
        }
    }
    Ok(Recommendation {
        rule_table_version: rules.version,
        ir_config,
        fallback_notes: rules.fallback_notes.clone(),
        shield_stack,
        holder_notes: rules.holder.notes.clone(),
        line_plans,
        absorber_check,
        warnings,
    })
}

impl Recommendation {
    /// Plain-text rendering for terminals and text reports.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "IR configuration: {:?} ({})", self.ir_config.config, self.ir_config.rule_id);
        let _ = writeln!(s, "  {}", self.ir_config.rationale);
        let layers: Vec<&str> = self.shield_stack.layers.iter().map(|l| l.material.as_str()).collect();
        let _ = writeln!(
            s,
            "Shield stack `{}` (inside to outside): {}",
            self.shield_stack.id,
            layers.join(" / ")
        );
        let _ = writeln!(
            s,
            "  capability {:.1} dB for a target of {:.1} dB",
            self.shield_stack.capability_db, self.shield_stack.target_mfs_db
        );
        for n in self.shield_stack.notes.iter().chain(&self.holder_notes) {
            let _ = writeln!(s, "  - {n}");
        }
        for plan in &self.line_plans {
            let stages: Vec<String> = plan
                .stages
                .iter()
                .map(|st| match st.kind {
                    StageKind::LowPass => format!("LPF {:.3e} Hz", st.frequencies_hz[0]),
                    StageKind::BandPass => format!("BPF {:.3e}-{:.3e} Hz", st.frequencies_hz[0], st.frequencies_hz[1]),
                    StageKind::Infrared => format!("IR({})", st.material.as_deref().unwrap_or("?")),
                })
                .collect();
            let _ = writeln!(s, "Line {}: {}", plan.kind.key(), stages.join(" -> "));
            for n in &plan.notes {
                let _ = writeln!(s, "  - {n}");
            }
        }
        if let Some(c) = &self.absorber_check {
            let _ = writeln!(
                s,
                "Absorber distance {} m: {}",
                c.distance_m,
                if c.pass { "ok" } else { "too close" }
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "Warning: {w}");
        }
        s
    }
}
