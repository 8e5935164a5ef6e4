//! Command-line front end for the `cryoshield` calculators.
//!
//! Exit codes: 0 success, 1 invalid input (parse, validation, missing file),
//! 2 solver failure.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use cryoshield::budget::BudgetError;
use cryoshield::magnetostatic::{self, FieldMap, MagneticError};
use cryoshield::materials::MaterialDb;
use cryoshield::model::PairFormula;
use cryoshield::radiative::{self, RadiativeError, SourceMode, DEFAULT_PLATEAU_THRESHOLD};
use cryoshield::recommender::{self, CapabilityTable, DesignContext, RecommendError, RuleTable};
use cryoshield::report::{
    self, format, AxisProfile, BudgetBlock, DesignReport, FieldDiagnostics, InputDigest, MagneticBlock,
    RecommendationBlock, ReportEnvelope, ThermalBlock,
};
use cryoshield::scenario::{self, BudgetRequest, MagneticFile, MagneticOverrides, ScenarioError, ScenarioFile, ThermalFile};

pub const MATERIALS_ENV: &str = "CRYOSHIELD_MATERIALS";

/// Relative MFS change tolerated between the two finest meshes.
pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "cryoshield", version, about = "Shielding design calculators for cryogenic quantum circuits")]
pub struct Cli {
    /// Material table overriding the built-in constants
    #[arg(long, global = true, env = MATERIALS_ENV)]
    pub materials: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (repeatable)
    #[arg(long = "scenario")]
    pub scenarios: Vec<PathBuf>,

    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MagneticOpts {
    /// Element size in the shell walls, m
    #[arg(long)]
    pub mesh_size: Option<f64>,

    /// Relative permeability used for superconductors
    #[arg(long)]
    pub superconductor_mu_r: Option<f64>,

    /// Largest relative MFS change allowed between the two finest meshes
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sample,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    Standard,
    Printed,
}

#[derive(Debug, Clone, Args)]
pub struct ThermalOpts {
    /// Default configurations, e.g. `A..H` or `A,C,E`
    #[arg(long)]
    pub configs: Option<String>,

    #[arg(long, value_enum)]
    pub source_mode: Option<Mode>,

    /// Relative improvement below which configurations count as a plateau
    #[arg(long)]
    pub plateau_threshold: Option<f64>,

    #[arg(long, value_enum)]
    pub pair_formula: Option<Formula>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state temperatures and ranking of shielding configurations
    Thermal {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: ThermalOpts,
    },
    /// Field suppression of nested cylindrical shields
    Magnetic {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: MagneticOpts,
        /// Also write node fields (CSV) and the structured grid file
        #[arg(long)]
        export_field: bool,
    },
    /// Skin depth, flux threshold, filter length and T1 calculators
    Budget {
        #[command(flatten)]
        common: Common,
    },
    /// Shielding and filtering plan for a design context
    Recommend {
        #[command(flatten)]
        common: Common,
        /// Replacement rule table
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Run every scenario and bundle the results into one hashed report
    Report {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thermal: ThermalOpts,
        #[command(flatten)]
        magnetic: MagneticOpts,
    },
}

/// Error with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

fn solver(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn scenario_failure(e: ScenarioError) -> Failure {
    invalid(e)
}

fn radiative_failure(e: RadiativeError) -> Failure {
    match e {
        RadiativeError::NoConvergence { .. } => solver(e),
        _ => invalid(e),
    }
}

fn magnetic_failure(e: MagneticError) -> Failure {
    match e {
        MagneticError::Invalid(_) | MagneticError::Domain(_) => invalid(e),
        _ => solver(e),
    }
}

fn budget_failure(e: BudgetError) -> Failure {
    invalid(e)
}

fn recommend_failure(e: RecommendError) -> Failure {
    match e {
        RecommendError::UnachievableTarget { .. } => solver(e),
        _ => invalid(e),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

/// One artifact to write.
struct Artifact {
    name: String,
    contents: String,
}

fn artifact(name: impl Into<String>, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

struct Loaded {
    source: String,
    dir: PathBuf,
    digest: InputDigest,
    file: ScenarioFile,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(anyhow!(e).context(format!("cannot read `{}`", path.display()))))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read_text(path)?;
    let file = scenario::parse_scenario(&text)
        .map_err(|e| invalid(anyhow!(e).context(format!("in `{}`", path.display()))))?;
    Ok(Loaded {
        source: path.display().to_string(),
        dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        digest: InputDigest {
            source: path.display().to_string(),
            kind: file.kind().to_string(),
            sha256: report::sha256_hex(text.as_bytes()),
        },
        file,
    })
}

fn builtin(file: ScenarioFile) -> Loaded {
    let text = scenario::to_toml(&file);
    Loaded {
        source: "builtin".into(),
        dir: PathBuf::new(),
        digest: InputDigest {
            source: "builtin".into(),
            kind: file.kind().to_string(),
            sha256: report::sha256_hex(text.as_bytes()),
        },
        file,
    }
}

fn material_db(path: Option<&Path>) -> Result<(MaterialDb, Option<InputDigest>), Failure> {
    match path {
        None => Ok((MaterialDb::builtin(), None)),
        Some(p) => {
            let text = read_text(p)?;
            let db = MaterialDb::with_overrides(&text)
                .map_err(|e| invalid(anyhow!(e).context(format!("in `{}`", p.display()))))?;
            let digest = InputDigest {
                source: p.display().to_string(),
                kind: "materials".into(),
                sha256: report::sha256_hex(text.as_bytes()),
            };
            Ok((db, Some(digest)))
        }
    }
}

fn check_inputs(common: &Common) -> Result<(), Failure> {
    for p in &common.scenarios {
        if !p.is_file() {
            return Err(invalid(anyhow!("scenario file `{}` does not exist", p.display())));
        }
    }
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("cannot create output directory `{}`", common.out.display()))
        .map_err(invalid)?;
    Ok(())
}

/// Writes each artifact through a temporary file in the target directory,
/// so a failed run never leaves a half-written file behind.
fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), Failure> {
    for a in artifacts {
        let path = dir.join(&a.name);
        let io = |e: std::io::Error| invalid(anyhow!(e).context(format!("cannot write `{}`", path.display())));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(a.contents.as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
    }
    Ok(())
}

/// Artifact stems that stay distinct when two inputs share a file name.
fn stems(loaded: &[&Loaded]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    loaded
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let base = Path::new(&l.source)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| l.source.clone());
            if seen.insert(base.clone()) {
                base
            } else {
                format!("{base}-{i}")
            }
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let started = Instant::now();
    let (db, materials_digest) = material_db(cli.materials.as_deref())?;
    match &cli.command {
        Command::Thermal { common, opts } => {
            check_inputs(common)?;
            let inputs = thermal_inputs(common, opts)?;
            let mut report = DesignReport::default();
            report.inputs.extend(materials_digest);
            let mut artifacts = Vec::new();
            let mut summary = String::new();
            let refs: Vec<&Loaded> = inputs.iter().collect();
            for (l, stem) in inputs.iter().zip(stems(&refs)) {
                let ScenarioFile::Thermal(f) = &l.file else { unreachable!() };
                let block = thermal_block(&l.source, f, &db, opts)?;
                summary.push_str(&thermal_summary(&block));
                if common.format.csv() {
                    artifacts.push(artifact(format!("{stem}.thermal.csv"), report::thermal_csv(&block)));
                }
                report.inputs.push(l.digest.clone());
                report.thermal.push(block);
            }
            finish(common, report, artifacts, summary, started, "thermal.json")
        }
        Command::Magnetic {
            common,
            opts,
            export_field,
        } => {
            check_inputs(common)?;
            let inputs = magnetic_inputs(common)?;
            let mut report = DesignReport::default();
            report.inputs.extend(materials_digest);
            let mut artifacts = Vec::new();
            let mut summary = String::new();
            let refs: Vec<&Loaded> = inputs.iter().collect();
            for (l, stem) in inputs.iter().zip(stems(&refs)) {
                let ScenarioFile::Magnetic(f) = &l.file else { unreachable!() };
                let (block, fields) = magnetic_block(&l.source, f, &db, opts, *export_field)?;
                summary.push_str(&magnetic_summary(&block));
                if common.format.csv() {
                    artifacts.push(artifact(format!("{stem}.mfs.csv"), report::mfs_csv(&block.results)));
                }
                for (k, (label, field)) in fields.iter().enumerate() {
                    let slug = slug(label, k);
                    artifacts.push(artifact(format!("{stem}.field.{slug}.csv"), format::field_csv(field)));
                    if let Some(g) = format::GridField::from_field(field) {
                        artifacts.push(artifact(format!("{stem}.field.{slug}.grid"), format::grid_text(&g)));
                    }
                }
                report.inputs.push(l.digest.clone());
                report.magnetic.push(block);
            }
            finish(common, report, artifacts, summary, started, "magnetic.json")
        }
        Command::Budget { common } => {
            check_inputs(common)?;
            let mut inputs = Vec::new();
            for p in &common.scenarios {
                let l = load(p)?;
                expect_kind(&l, "budget")?;
                inputs.push(l);
            }
            if inputs.is_empty() {
                inputs.push(builtin(ScenarioFile::Budget(BudgetRequest::example())));
            }
            let mut report = DesignReport::default();
            report.inputs.extend(materials_digest);
            let mut artifacts = Vec::new();
            let mut summary = String::new();
            let refs: Vec<&Loaded> = inputs.iter().collect();
            for (l, stem) in inputs.iter().zip(stems(&refs)) {
                let ScenarioFile::Budget(req) = &l.file else { unreachable!() };
                let (block, digests) = budget_block(l, req, &db)?;
                summary.push_str(&budget_summary(&block));
                if common.format.csv() {
                    artifacts.push(artifact(format!("{stem}.budget.csv"), budget_csv(&block)));
                }
                report.inputs.push(l.digest.clone());
                report.inputs.extend(digests);
                report.budget.push(block);
            }
            finish(common, report, artifacts, summary, started, "budget.json")
        }
        Command::Recommend { common, rules } => {
            check_inputs(common)?;
            if common.scenarios.is_empty() {
                return Err(invalid(anyhow!("recommend needs --scenario with kind = \"design\"")));
            }
            let mut report = DesignReport::default();
            report.inputs.extend(materials_digest);
            let table = match rules {
                Some(p) => {
                    let text = read_text(p)?;
                    report.inputs.push(InputDigest {
                        source: p.display().to_string(),
                        kind: "rules".into(),
                        sha256: report::sha256_hex(text.as_bytes()),
                    });
                    RuleTable::parse(&text).map_err(recommend_failure)?
                }
                None => RuleTable::builtin().clone(),
            };
            let mut artifacts = Vec::new();
            let mut summary = String::new();
            let mut loaded = Vec::new();
            for p in &common.scenarios {
                let l = load(p)?;
                expect_kind(&l, "design")?;
                loaded.push(l);
            }
            let refs: Vec<&Loaded> = loaded.iter().collect();
            for (l, stem) in loaded.iter().zip(stems(&refs)) {
                let ScenarioFile::Design(ctx) = &l.file else { unreachable!() };
                let block = recommend_block(&l.source, ctx, &table)?;
                let text = block.recommendation.to_text();
                summary.push_str(&text);
                artifacts.push(artifact(format!("{stem}.recommendation.txt"), text));
                report.inputs.push(l.digest.clone());
                report.recommendations.push(block);
            }
            finish(common, report, artifacts, summary, started, "recommendation.json")
        }
        Command::Report {
            common,
            thermal,
            magnetic,
        } => {
            check_inputs(common)?;
            let mut inputs = Vec::new();
            for p in &common.scenarios {
                inputs.push(load(p)?);
            }
            if inputs.is_empty() {
                inputs.push(builtin(ScenarioFile::Thermal(default_thermal(thermal)?)));
                inputs.push(builtin(ScenarioFile::Magnetic(MagneticFile {
                    comparison: true,
                    ..Default::default()
                })));
                inputs.push(builtin(ScenarioFile::Budget(BudgetRequest::example())));
            }
            let mut report = DesignReport::default();
            report.inputs.extend(materials_digest);
            let mut summary = String::new();
            let table = RuleTable::builtin();
            for l in &inputs {
                report.inputs.push(l.digest.clone());
                match &l.file {
                    ScenarioFile::Thermal(f) => {
                        let f = apply_thermal_opts(f.clone(), thermal);
                        let block = thermal_block(&l.source, &f, &db, thermal)?;
                        summary.push_str(&thermal_summary(&block));
                        report.thermal.push(block);
                    }
                    ScenarioFile::Magnetic(f) => {
                        let (block, _) = magnetic_block(&l.source, f, &db, magnetic, false)?;
                        summary.push_str(&magnetic_summary(&block));
                        report.magnetic.push(block);
                    }
                    ScenarioFile::Budget(req) => {
                        let (block, digests) = budget_block(l, req, &db)?;
                        summary.push_str(&budget_summary(&block));
                        report.inputs.extend(digests);
                        report.budget.push(block);
                    }
                    ScenarioFile::Design(ctx) => {
                        let block = recommend_block(&l.source, ctx, table)?;
                        summary.push_str(&block.recommendation.to_text());
                        report.recommendations.push(block);
                    }
                }
            }
            let mut artifacts = Vec::new();
            if common.format.csv() {
                match report::emit_plot_data(&report) {
                    Ok(plot) => artifacts.extend(plot.tables.into_iter().map(|(n, t)| artifact(n, t))),
                    Err(e) => eprintln!("note: no plot tables written: {e}"),
                }
            }
            finish(common, report, artifacts, summary, started, "report.json")
        }
    }
}

fn finish(
    common: &Common,
    report: DesignReport,
    mut artifacts: Vec<Artifact>,
    mut summary: String,
    started: Instant,
    json_name: &str,
) -> Result<String, Failure> {
    let envelope = ReportEnvelope::new(report, started.elapsed().as_secs_f64());
    if common.format.json() {
        artifacts.push(artifact(json_name, envelope.to_json()));
    }
    write_all(&common.out, &artifacts)?;
    summary.push_str(&format!("payload sha256 {}\n", envelope.payload_sha256));
    for a in &artifacts {
        summary.push_str(&format!("wrote {}\n", common.out.join(&a.name).display()));
    }
    Ok(summary)
}

fn expect_kind(l: &Loaded, kind: &str) -> Result<(), Failure> {
    if l.file.kind() == kind {
        Ok(())
    } else {
        Err(invalid(anyhow!(
            "`{}` is a {} scenario; this command needs kind = \"{kind}\"",
            l.source,
            l.file.kind()
        )))
    }
}

fn slug(label: &str, k: usize) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect();
    if s.is_empty() {
        k.to_string()
    } else {
        s
    }
}

// ---------------------------------------------------------------- thermal

fn default_thermal(opts: &ThermalOpts) -> Result<ThermalFile, Failure> {
    let mut f = ThermalFile {
        configs: vec![opts.configs.clone().unwrap_or_else(|| "A..H".into())],
        ..Default::default()
    };
    scenario::expand_labels(&f.configs).map_err(|m| invalid(anyhow!(m)))?;
    if let Some(formula) = opts.pair_formula {
        f.geometry.pair_formula = pair_formula(formula);
    }
    Ok(f)
}

fn pair_formula(f: Formula) -> PairFormula {
    match f {
        Formula::Standard => PairFormula::Standard,
        Formula::Printed => PairFormula::Printed,
    }
}

fn apply_thermal_opts(mut f: ThermalFile, opts: &ThermalOpts) -> ThermalFile {
    if let Some(formula) = opts.pair_formula {
        f.geometry.pair_formula = pair_formula(formula);
        for s in &mut f.scenarios {
            s.pair_formula = pair_formula(formula);
        }
    }
    f
}

fn thermal_inputs(common: &Common, opts: &ThermalOpts) -> Result<Vec<Loaded>, Failure> {
    let mut out = Vec::new();
    for p in &common.scenarios {
        let mut l = load(p)?;
        expect_kind(&l, "thermal")?;
        if let ScenarioFile::Thermal(f) = l.file {
            l.file = ScenarioFile::Thermal(apply_thermal_opts(f, opts));
        }
        out.push(l);
    }
    if out.is_empty() {
        out.push(builtin(ScenarioFile::Thermal(default_thermal(opts)?)));
    }
    Ok(out)
}

fn thermal_block(source: &str, f: &ThermalFile, db: &MaterialDb, opts: &ThermalOpts) -> Result<ThermalBlock, Failure> {
    let scenarios = f.resolve(db).map_err(scenario_failure)?;
    let threshold = opts
        .plateau_threshold
        .or(f.plateau_threshold)
        .unwrap_or(DEFAULT_PLATEAU_THRESHOLD);
    let mode = match opts.source_mode {
        Some(Mode::Sample) => SourceMode::Sample,
        Some(Mode::External) => SourceMode::External,
        None => f.source_mode,
    };
    let ranking = radiative::rank_configurations(&scenarios, mode, threshold).map_err(radiative_failure)?;
    Ok(ThermalBlock {
        source: source.to_string(),
        input_order: scenarios.iter().filter_map(|s| s.label.clone()).collect(),
        ranking,
    })
}

fn thermal_summary(b: &ThermalBlock) -> String {
    let mut s = format!("thermal ({}), {:?} source:\n", b.source, b.ranking.source_mode);
    for sol in b.in_input_order() {
        s.push_str(&format!(
            "  {:<12} T_sample = {:.6} K\n",
            sol.configuration_label.as_deref().unwrap_or("?"),
            sol.sample_temperature_k
        ));
    }
    if let Some(p) = &b.ranking.plateau_label {
        s.push_str(&format!("  plateau from {p}\n"));
    }
    s
}

// --------------------------------------------------------------- magnetic

fn magnetic_inputs(common: &Common) -> Result<Vec<Loaded>, Failure> {
    let mut out = Vec::new();
    for p in &common.scenarios {
        let l = load(p)?;
        expect_kind(&l, "magnetic")?;
        out.push(l);
    }
    if out.is_empty() {
        out.push(builtin(ScenarioFile::Magnetic(MagneticFile {
            comparison: true,
            ..Default::default()
        })));
    }
    Ok(out)
}

type Solved = (MagneticBlock, Vec<(String, FieldMap)>);

fn magnetic_block(
    source: &str,
    f: &MagneticFile,
    db: &MaterialDb,
    opts: &MagneticOpts,
    keep_fields: bool,
) -> Result<Solved, Failure> {
    if let Some(t) = opts.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(anyhow!("--tolerance must be positive, got {t}")));
        }
    }
    let over = MagneticOverrides {
        mesh_size_m: opts.mesh_size,
        superconductor_mu_r: opts.superconductor_mu_r,
    };
    let scenarios = f.resolve(db, over).map_err(scenario_failure)?;
    let sizes = &f.convergence_sizes_m;
    let tolerance = opts.tolerance.unwrap_or(DEFAULT_CONVERGENCE_TOLERANCE);
    let solved: Vec<_> = scenarios
        .par_iter()
        .map(|s| -> Result<_, Failure> {
            let (field, mut r) = magnetostatic::scenario_mfs(s).map_err(magnetic_failure)?;
            if !sizes.is_empty() {
                let study = magnetostatic::convergence_study(s, sizes).map_err(magnetic_failure)?;
                r.mesh_convergence = study.mesh_convergence;
                if let Some(change) = magnetostatic::final_refinement_change(&r.mesh_convergence) {
                    if change > tolerance {
                        return Err(solver(anyhow!(
                            "`{}`: MFS changes by {:.3}% between the two finest meshes (tolerance {:.3}%)",
                            s.label.as_deref().unwrap_or("?"),
                            100.0 * change,
                            100.0 * tolerance
                        )));
                    }
                }
            }
            Ok((s.label.clone().unwrap_or_default(), field, r))
        })
        .collect::<Result<_, _>>()?;
    let mut block = MagneticBlock {
        source: source.to_string(),
        results: Vec::new(),
        diagnostics: Vec::new(),
        axis_profiles: Vec::new(),
    };
    let mut fields = Vec::new();
    for (label, field, r) in solved {
        block.diagnostics.push(FieldDiagnostics {
            label: label.clone(),
            element_count: field.mesh_stats.element_count,
            far_field_deviation: field.far_field_deviation(),
            axis_radial_ratio: field.axis_radial_ratio(),
            relative_residual: field.relative_residual,
        });
        block.axis_profiles.push(AxisProfile::from_field(&label, &field));
        block.results.push(r);
        if keep_fields {
            fields.push((label, field));
        }
    }
    Ok((block, fields))
}

fn magnetic_summary(b: &MagneticBlock) -> String {
    let mut s = format!("magnetic ({}):\n", b.source);
    for r in report::mfs_display_order(&b.results) {
        s.push_str(&format!("  {:<28} MFS = {:.2} dB\n", r.label.as_deref().unwrap_or("?"), r.mfs_db));
    }
    s
}

// ----------------------------------------------------------------- budget

fn budget_block(l: &Loaded, req: &BudgetRequest, db: &MaterialDb) -> Result<(BudgetBlock, Vec<InputDigest>), Failure> {
    let mut req = req.clone();
    let mut digests = Vec::new();
    for q in &mut req.filters {
        if let Some(rel) = q.curve_file.clone() {
            let path = l.dir.join(&rel);
            let text = read_text(&path)?;
            let curve = scenario::parse_curve(&text)
                .map_err(|e| invalid(anyhow!(e).context(format!("in `{}`", path.display()))))?;
            digests.push(InputDigest {
                source: path.display().to_string(),
                kind: "attenuation_curve".into(),
                sha256: report::sha256_hex(text.as_bytes()),
            });
            q.custom = Some(curve);
        }
    }
    let report = req.evaluate(db).map_err(|e| match e {
        ScenarioError::Budget(b) => budget_failure(b),
        other => scenario_failure(other),
    })?;
    Ok((
        BudgetBlock {
            source: l.source.clone(),
            report,
        },
        digests,
    ))
}

fn budget_rows(b: &BudgetBlock) -> Vec<Vec<String>> {
    let sci = report::sci;
    let mut rows = Vec::new();
    let mut row = |q: String, v: f64, unit: &str| rows.push(vec![q, sci(v), unit.to_string()]);
    for (i, r) in b.report.skin_depths.iter().enumerate() {
        row(format!("skin_depth[{i}]"), r.skin_depth_m, "m");
    }
    for (i, r) in b.report.flux.iter().enumerate() {
        row(format!("flux[{i}].threshold_field"), r.threshold_field_t, "T");
        if let Some(db) = r.required_mfs_db {
            row(format!("flux[{i}].required_mfs"), db, "dB");
        }
    }
    for (i, r) in b.report.filters.iter().enumerate() {
        match r.sizing {
            cryoshield::budget::FilterSizing::Feasible {
                length_m,
                achieved_block_db,
                insertion_db,
            } => {
                row(format!("filter[{i}].length"), length_m, "m");
                row(format!("filter[{i}].achieved_block"), achieved_block_db, "dB");
                row(format!("filter[{i}].insertion"), insertion_db, "dB");
            }
            cryoshield::budget::FilterSizing::Infeasible {
                required_length_m,
                insertion_db,
                ..
            } => {
                row(format!("filter[{i}].required_length_infeasible"), required_length_m, "m");
                row(format!("filter[{i}].insertion"), insertion_db, "dB");
            }
        }
    }
    for (i, t) in b.report.t1.iter().enumerate() {
        row(format!("t1[{i}]"), t.t1.as_f64(), "s");
    }
    for (i, s) in b.report.sweeps.iter().enumerate() {
        if let Some(d) = s.crossing_distance_m {
            row(format!("t1_sweep[{i}].crossing_distance"), d, "m");
        }
    }
    rows
}

fn budget_csv(b: &BudgetBlock) -> String {
    report::csv_text(&["quantity", "value", "unit"], &budget_rows(b))
}

fn budget_summary(b: &BudgetBlock) -> String {
    let mut s = format!("budget ({}):\n", b.source);
    for r in budget_rows(b) {
        s.push_str(&format!("  {:<36} {} {}\n", r[0], r[1], r[2]));
    }
    s
}

// -------------------------------------------------------------- recommend

fn recommend_block(source: &str, ctx: &DesignContext, table: &RuleTable) -> Result<RecommendationBlock, Failure> {
    let rec = recommender::recommend_with(ctx, table, CapabilityTable::builtin()).map_err(recommend_failure)?;
    Ok(RecommendationBlock {
        source: source.to_string(),
        recommendation: rec,
    })
}
