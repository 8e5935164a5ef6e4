//! Gray-body radiative exchange through nested closed enclosures.
//!
//! Heat flow between the sample (body 1) and the environment (body 2) is
//! `Q = sigma * A_sh * F1 * (T1^4 - T2^4)`, where the reduced absorption
//! `A_sh` folds in every intermediate shield. In `x = sigma T^4` the stack is
//! a series chain of resistances, one per gap, whose sum is
//! `1 / (F1 A_sh)`.

mod configs;

pub use configs::{default_configuration, default_configurations, ConfigurationGeometry, CONFIGURATION_LABELS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::STEFAN_BOLTZMANN;
use crate::model::{PairFormula, SurfaceCoating, ThermalScenario};
use crate::validate::{Validate, Violations};

/// Fixed-point damping for the external-source split.
pub const DAMPING: f64 = 0.5;
pub const MAX_ITERATIONS: usize = 10_000;
/// Convergence tolerance on temperatures, K.
pub const TEMPERATURE_TOLERANCE: f64 = 1e-12;
/// Default relative improvement below which configurations stop counting.
pub const DEFAULT_PLATEAU_THRESHOLD: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum RadiativeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence after {iterations} iterations (last change {last_change_k:e} K)")]
    NoConvergence { iterations: usize, last_change_k: f64 },
    #[error("invalid scenario:\n{0}")]
    Invalid(Violations),
}

/// Reduced absorption coefficient `A_(1,2)sh` of a stack, in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ReducedAbsorption(pub f64);

impl ReducedAbsorption {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_absorption(name: &str, a: f64) -> Result<(), RadiativeError> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(RadiativeError::Domain(format!("{name} = {a} must lie in (0, 1]")))
    }
}

fn check_area(name: &str, f: f64) -> Result<(), RadiativeError> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(RadiativeError::Domain(format!("{name} = {f} must be positive")))
    }
}

/// Two gray surfaces, body 1 enclosed by body 2:
/// `1 / (1/A1 + (F1/F2)(1/A2 - 1))`.
pub fn reduced_absorption_pair(a1: f64, a2: f64, f1: f64, f2: f64) -> Result<f64, RadiativeError> {
    check_absorption("A1", a1)?;
    check_absorption("A2", a2)?;
    check_area("F1", f1)?;
    check_area("F2", f2)?;
    Ok(1.0 / (1.0 / a1 + f1 / f2 * (1.0 / a2 - 1.0)))
}

/// Variant with `A1` in place of `A2` in the second term.
pub fn reduced_absorption_pair_printed(a1: f64, f1: f64, f2: f64) -> Result<f64, RadiativeError> {
    reduced_absorption_pair(a1, a1, f1, f2)
}

pub fn pair_absorption(formula: PairFormula, a1: f64, a2: f64, f1: f64, f2: f64) -> Result<f64, RadiativeError> {
    match formula {
        PairFormula::Standard => reduced_absorption_pair(a1, a2, f1, f2),
        PairFormula::Printed => {
            check_absorption("A2", a2)?;
            reduced_absorption_pair_printed(a1, f1, f2)
        }
    }
}

/// One intermediate shield as seen by the chain formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShieldTerm {
    pub area_m2: f64,
    pub coating: SurfaceCoating,
}

/// `(F1/F_sh)(2/A - 1)`
pub fn symmetric_term(area_ratio: f64, a: f64) -> f64 {
    area_ratio * (2.0 / a - 1.0)
}

/// `(F1/F_sh)(1/A_in + 1/A_out - 1)`
pub fn asymmetric_term(area_ratio: f64, a_inner: f64, a_outer: f64) -> f64 {
    area_ratio * (1.0 / a_inner + 1.0 / a_outer - 1.0)
}

/// `1 / (1/A12 + sum of shield terms)`.
pub fn reduced_absorption_chain(
    a12: f64,
    sample_area_m2: f64,
    shields: &[ShieldTerm],
) -> Result<ReducedAbsorption, RadiativeError> {
    check_absorption("A12", a12)?;
    check_area("sample area", sample_area_m2)?;
    let mut sum = 1.0 / a12;
    for (i, s) in shields.iter().enumerate() {
        check_area(&format!("shields[{i}] area"), s.area_m2)?;
        check_absorption(&format!("shields[{i}] inner absorption"), s.coating.absorption_inner)?;
        check_absorption(&format!("shields[{i}] outer absorption"), s.coating.absorption_outer)?;
        let ratio = sample_area_m2 / s.area_m2;
        sum += if s.coating.is_symmetric() {
            symmetric_term(ratio, s.coating.absorption_inner)
        } else {
            asymmetric_term(ratio, s.coating.absorption_inner, s.coating.absorption_outer)
        };
    }
    Ok(ReducedAbsorption(1.0 / sum))
}

/// Signed `sigma * A_eff * F1 * (T1^4 - T2^4)`, W.
pub fn radiative_power(a_eff: f64, f1: f64, t1: f64, t2: f64) -> f64 {
    STEFAN_BOLTZMANN * a_eff * f1 * (t1.powi(4) - t2.powi(4))
}

/// `A_(1,2)sh` of a scenario.
pub fn scenario_reduced_absorption(scenario: &ThermalScenario) -> Result<ReducedAbsorption, RadiativeError> {
    let a12 = pair_absorption(
        scenario.pair_formula,
        scenario.sample.emitting_absorption(),
        scenario.environment.absorption,
        scenario.sample.surface_area_m2,
        scenario.environment.surface_area_m2,
    )?;
    let shields: Vec<ShieldTerm> = scenario
        .shields
        .iter()
        .map(|s| ShieldTerm {
            area_m2: s.surface_area_m2,
            coating: s.coating,
        })
        .collect();
    reduced_absorption_chain(a12, scenario.sample.surface_area_m2, &shields)
}

/// Series resistance of every gap, 1/m^2, innermost first.
///
/// Gap k runs from the outer face of surface k to the inner face of
/// surface k + 1 (surface 0 is the sample, the last is the environment).
pub fn gap_resistances(scenario: &ThermalScenario) -> Vec<f64> {
    let (emitting, receiving) = gap_parts(scenario);
    emitting.iter().zip(&receiving).map(|(a, b)| a + b).collect()
}

/// Emitting-face and receiving-face halves of each gap resistance.
fn gap_parts(scenario: &ThermalScenario) -> (Vec<f64>, Vec<f64>) {
    let mut areas = vec![scenario.sample.surface_area_m2];
    let mut outer = vec![scenario.sample.emitting_absorption()];
    let mut inner = vec![];
    for s in &scenario.shields {
        areas.push(s.surface_area_m2);
        inner.push(s.coating.absorption_inner);
        outer.push(s.coating.absorption_outer);
    }
    areas.push(scenario.environment.surface_area_m2);
    inner.push(match scenario.pair_formula {
        PairFormula::Standard => scenario.environment.absorption,
        PairFormula::Printed => scenario.sample.emitting_absorption(),
    });
    let n = areas.len() - 1;
    let emitting = (0..n).map(|k| 1.0 / (areas[k] * outer[k])).collect();
    let receiving = (0..n).map(|k| (1.0 / inner[k] - 1.0) / areas[k + 1]).collect();
    (emitting, receiving)
}

/// Which body carries the heat source when ranking configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceMode {
    #[default]
    Sample,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSolution {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configuration_label: Option<String>,
    #[serde(rename = "sample_temperature_K")]
    pub sample_temperature_k: f64,
    /// Innermost first.
    #[serde(rename = "shield_temperatures_K")]
    pub shield_temperatures_k: Vec<f64>,
    #[serde(rename = "environment_temperature_K")]
    pub environment_temperature_k: f64,
    /// Net power leaving the sample, W.
    #[serde(rename = "transferred_power_W")]
    pub transferred_power_w: f64,
    pub reduced_absorption: f64,
    /// Net power crossing each gap, innermost first, W.
    #[serde(rename = "gap_powers_W")]
    pub gap_powers_w: Vec<f64>,
    /// Effective temperature of the external emitter node.
    #[serde(default, rename = "source_temperature_K", skip_serializing_if = "Option::is_none")]
    pub source_temperature_k: Option<f64>,
    /// Share of the external power sent toward the sample.
    #[serde(default, rename = "source_inward_power_W", skip_serializing_if = "Option::is_none")]
    pub source_inward_power_w: Option<f64>,
    pub iterations: usize,
}

fn fourth_root(x: f64) -> f64 {
    x.max(0.0).sqrt().sqrt()
}

fn invalid(scenario: &ThermalScenario) -> Result<(), RadiativeError> {
    let v = scenario.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(RadiativeError::Invalid(v))
    }
}

/// Steady state by closed-form inversion of the series chain, or by
/// damped fixed-point iteration when an external source splits a gap.
pub fn steady_state(scenario: &ThermalScenario) -> Result<ThermalSolution, RadiativeError> {
    invalid(scenario)?;
    if scenario.external_source.is_some() {
        return external_source_state(scenario);
    }
    let resistances = gap_resistances(scenario);
    let total: f64 = resistances.iter().sum();
    let x_env = STEFAN_BOLTZMANN * scenario.environment.temperature_k.powi(4);
    let (x_sample, power) = match (scenario.sample.dissipated_power_w, scenario.sample.fixed_temperature_k) {
        (Some(p), _) => (x_env + p * total, p),
        (None, Some(t)) => {
            let x = STEFAN_BOLTZMANN * t.powi(4);
            (x, (x - x_env) / total)
        }
        (None, None) => unreachable!("validation requires a source"),
    };
    let sample_temperature_k = match scenario.sample.fixed_temperature_k {
        Some(t) if scenario.sample.dissipated_power_w.is_none() => t,
        _ => fourth_root(x_sample / STEFAN_BOLTZMANN),
    };
    // Stage-wise from the environment inward.
    let n = scenario.shields.len();
    let mut shield_temperatures_k = vec![0.0; n];
    let mut x = x_env;
    for k in (1..=n).rev() {
        x += power * resistances[k];
        shield_temperatures_k[k - 1] = fourth_root(x / STEFAN_BOLTZMANN);
    }
    Ok(ThermalSolution {
        configuration_label: scenario.label.clone(),
        sample_temperature_k,
        shield_temperatures_k,
        environment_temperature_k: scenario.environment.temperature_k,
        transferred_power_w: power,
        reduced_absorption: scenario_reduced_absorption(scenario)?.value(),
        gap_powers_w: vec![power; n + 1],
        source_temperature_k: None,
        source_inward_power_w: None,
        iterations: 0,
    })
}

/// Same balance solved by damped Gauss-Seidel sweeps over the node
/// equations instead of the closed form. Internal sources only.
pub fn steady_state_iterative(scenario: &ThermalScenario) -> Result<ThermalSolution, RadiativeError> {
    invalid(scenario)?;
    if scenario.external_source.is_some() {
        return external_source_state(scenario);
    }
    let r = gap_resistances(scenario);
    let n = scenario.shields.len();
    let t_env = scenario.environment.temperature_k;
    let x_env = STEFAN_BOLTZMANN * t_env.powi(4);
    let fixed = match scenario.sample.dissipated_power_w {
        Some(_) => None,
        None => scenario.sample.fixed_temperature_k,
    };
    // Node 0 is the sample, n + 1 the environment.
    let mut t = vec![t_env; n + 2];
    if let Some(tf) = fixed {
        t[0] = tf;
    }
    let mut iterations = 0;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(RadiativeError::NoConvergence {
                iterations,
                last_change_k: f64::NAN,
            });
        }
        iterations += 1;
        let mut change: f64 = 0.0;
        for k in 0..=n {
            let target = if k == 0 {
                match (fixed, scenario.sample.dissipated_power_w) {
                    (Some(tf), _) => tf,
                    (None, Some(p)) => fourth_root(
                        (STEFAN_BOLTZMANN * t[1].powi(4) + p * r[0]) / STEFAN_BOLTZMANN,
                    ),
                    (None, None) => unreachable!("validation requires a source"),
                }
            } else {
                let x_in = STEFAN_BOLTZMANN * t[k - 1].powi(4);
                let x_out = if k == n { x_env } else { STEFAN_BOLTZMANN * t[k + 1].powi(4) };
                let g_in = 1.0 / r[k - 1];
                let g_out = 1.0 / r[k];
                fourth_root((g_in * x_in + g_out * x_out) / (g_in + g_out) / STEFAN_BOLTZMANN)
            };
            let next = t[k] + DAMPING * (target - t[k]);
            change = change.max((next - t[k]).abs());
            t[k] = next;
        }
        if change < TEMPERATURE_TOLERANCE {
            break;
        }
    }
    let x: Vec<f64> = t[..=n]
        .iter()
        .map(|v| STEFAN_BOLTZMANN * v.powi(4))
        .chain(std::iter::once(x_env))
        .collect();
    let gap_powers_w: Vec<f64> = (0..=n).map(|k| (x[k] - x[k + 1]) / r[k]).collect();
    Ok(ThermalSolution {
        configuration_label: scenario.label.clone(),
        sample_temperature_k: t[0],
        shield_temperatures_k: t[1..=n].to_vec(),
        environment_temperature_k: t_env,
        transferred_power_w: gap_powers_w[0],
        reduced_absorption: scenario_reduced_absorption(scenario)?.value(),
        gap_powers_w,
        source_temperature_k: None,
        source_inward_power_w: None,
        iterations,
    })
}

/// Resistances on either side of the external emitter: from the emitter
/// inward to the sample and outward to the environment.
pub fn source_split_resistances(scenario: &ThermalScenario) -> Option<(f64, f64)> {
    let g = scenario.source_gap()?;
    let (emitting, receiving) = gap_parts(scenario);
    if g >= emitting.len() {
        return None;
    }
    let r_in = emitting[g] + (0..g).map(|k| emitting[k] + receiving[k]).sum::<f64>();
    let r_out = receiving[g]
        + (g + 1..emitting.len())
            .map(|k| emitting[k] + receiving[k])
            .sum::<f64>();
    Some((r_in, r_out))
}

/// Secant conductance `Q / (Ta - Tb)` of a radiative link, W/K.
fn secant_conductance(ta: f64, tb: f64, resistance: f64) -> f64 {
    STEFAN_BOLTZMANN * (ta + tb) * (ta * ta + tb * tb) / resistance
}

fn external_source_state(scenario: &ThermalScenario) -> Result<ThermalSolution, RadiativeError> {
    let source = scenario.external_source.as_ref().expect("checked by caller");
    let g = scenario.source_gap().expect("checked by caller");
    let (r_in, r_out) = source_split_resistances(scenario)
        .ok_or_else(|| RadiativeError::Domain(format!("source gap {g} does not exist")))?;
    let r = gap_resistances(scenario);
    let r_tot: f64 = r.iter().sum();
    let n = scenario.shields.len();
    let p = source.power_w;
    let t_env = scenario.environment.temperature_k;
    let x_env = STEFAN_BOLTZMANN * t_env.powi(4);
    let fixed = match scenario.sample.dissipated_power_w {
        Some(_) => None,
        None => scenario.sample.fixed_temperature_k,
    };

    // Sample power for a given inward share; with a fixed sample
    // temperature it is whatever closes the balance.
    let sample_power = |p_in: f64| -> f64 {
        match (scenario.sample.dissipated_power_w, fixed) {
            (Some(ps), _) => ps,
            (None, Some(tf)) => {
                let x1 = STEFAN_BOLTZMANN * tf.powi(4);
                (x1 - x_env - (p - p_in) * r_out) / r_tot - p_in
            }
            (None, None) => unreachable!("validation requires a source"),
        }
    };
    let temperatures = |p_in: f64| -> (f64, f64, f64) {
        let ps = sample_power(p_in);
        let p_out = p - p_in;
        let x1 = x_env + (ps + p_in) * r_tot + p_out * r_out;
        let x_hs = x_env + (p + ps) * r_out;
        (
            fourth_root(x1 / STEFAN_BOLTZMANN),
            fourth_root(x_hs / STEFAN_BOLTZMANN),
            ps,
        )
    };

    let mut p_in = 0.5 * p;
    let (mut t1, mut t_hs, _) = temperatures(p_in);
    let mut iterations = 0;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(RadiativeError::NoConvergence {
                iterations,
                last_change_k: f64::NAN,
            });
        }
        iterations += 1;
        let g_in = secant_conductance(t_hs, t1, r_in);
        let g_out = secant_conductance(t_hs, t_env, r_out);
        let target = if g_in + g_out > 0.0 { p * g_in / (g_in + g_out) } else { 0.5 * p };
        p_in += DAMPING * (target - p_in);
        let (n1, nhs, _) = temperatures(p_in);
        let change = (n1 - t1).abs().max((nhs - t_hs).abs());
        t1 = n1;
        t_hs = nhs;
        if change < TEMPERATURE_TOLERANCE && (target - p_in).abs() <= 1e-12 * p.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let (_, _, ps) = temperatures(p_in);
    let gap_powers_w: Vec<f64> = (0..=n)
        .map(|k| if k < g { ps + p_in } else { ps + p })
        .collect();
    // Shields from the environment inward.
    let (emitting, _) = gap_parts(scenario);
    let mut shield_temperatures_k = vec![0.0; n];
    let mut x = x_env;
    for k in (1..=n).rev() {
        x += if k == g {
            (ps + p) * (r[k] - emitting[k]) + (ps + p_in) * emitting[k]
        } else {
            gap_powers_w[k] * r[k]
        };
        shield_temperatures_k[k - 1] = fourth_root(x / STEFAN_BOLTZMANN);
    }
    Ok(ThermalSolution {
        configuration_label: scenario.label.clone(),
        sample_temperature_k: fixed.unwrap_or(t1),
        shield_temperatures_k,
        environment_temperature_k: t_env,
        transferred_power_w: ps,
        reduced_absorption: scenario_reduced_absorption(scenario)?.value(),
        gap_powers_w,
        source_temperature_k: Some(t_hs),
        source_inward_power_w: Some(p_in),
        iterations,
    })
}

/// Solutions in ascending sample temperature plus the plateau label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub source_mode: SourceMode,
    pub plateau_threshold: f64,
    /// First label (in input order) after which no configuration improves on
    /// the best so far by the threshold or more.
    pub plateau_label: Option<String>,
    pub solutions: Vec<ThermalSolution>,
}

/// Relative improvement of each configuration over the best earlier one,
/// in input order. The first entry is zero.
pub fn relative_improvements(temperatures: &[f64]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    temperatures
        .iter()
        .map(|&t| {
            let gain = if best.is_finite() { ((best - t) / best).max(0.0) } else { 0.0 };
            best = best.min(t);
            gain
        })
        .collect()
}

/// Index after which every improvement stays below `threshold`.
pub fn plateau_index(temperatures: &[f64], threshold: f64) -> Option<usize> {
    let gains = relative_improvements(temperatures);
    (0..gains.len()).find(|&i| gains[i + 1..].iter().all(|&g| g < threshold))
}

/// Solves each configuration (in parallel) and ranks them. In external mode
/// a scenario without a source gets the sample's power as an emitter in the
/// outermost gap and a passive sample.
pub fn rank_configurations(
    configs: &[ThermalScenario],
    mode: SourceMode,
    plateau_threshold: f64,
) -> Result<Ranking, RadiativeError> {
    if !(plateau_threshold > 0.0 && plateau_threshold.is_finite()) {
        return Err(RadiativeError::Domain(format!(
            "plateau threshold {plateau_threshold} must be positive"
        )));
    }
    let mut labels: Vec<&str> = configs.iter().filter_map(|c| c.label.as_deref()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(RadiativeError::Domain("configuration labels must be distinct".into()));
    }
    let prepared: Vec<ThermalScenario> = configs
        .iter()
        .map(|c| match mode {
            SourceMode::Sample => c.clone(),
            SourceMode::External => to_external(c),
        })
        .collect();
    let solved: Vec<ThermalSolution> = prepared
        .par_iter()
        .map(steady_state)
        .collect::<Result<_, _>>()?;
    let temperatures: Vec<f64> = solved.iter().map(|s| s.sample_temperature_k).collect();
    let plateau_label = plateau_index(&temperatures, plateau_threshold)
        .map(|i| solved[i].configuration_label.clone().unwrap_or_else(|| i.to_string()));
    let mut solutions = solved;
    solutions.sort_by(|a, b| a.sample_temperature_k.total_cmp(&b.sample_temperature_k));
    Ok(Ranking {
        source_mode: mode,
        plateau_threshold,
        plateau_label,
        solutions,
    })
}

fn to_external(c: &ThermalScenario) -> ThermalScenario {
    let mut s = c.clone();
    if s.external_source.is_none() {
        let p = s.sample.dissipated_power_w.unwrap_or(0.0);
        s.external_source = Some(crate::model::ExternalSource {
            power_w: p,
            insertion_index: None,
        });
        if s.sample.dissipated_power_w.is_some() {
            s.sample.dissipated_power_w = Some(0.0);
        }
    }
    s
}

/// Which surfaces a sensitivity perturbation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Shield(usize),
    Environment,
}

/// Scales every absorption of one layer by `factor`, capped at 1.
pub fn perturb_layer(scenario: &ThermalScenario, layer: Layer, factor: f64) -> ThermalScenario {
    let mut s = scenario.clone();
    let scale = |a: f64| (a * factor).min(1.0);
    match layer {
        Layer::Shield(i) => {
            let c = &mut s.shields[i].coating;
            c.absorption_inner = scale(c.absorption_inner);
            c.absorption_outer = scale(c.absorption_outer);
        }
        Layer::Environment => s.environment.absorption = scale(s.environment.absorption),
    }
    s
}

/// Largest `|dT1|` over a +/- `fraction` perturbation of each shield and of
/// the environment, in that order.
pub fn layer_sensitivities(
    scenario: &ThermalScenario,
    fraction: f64,
) -> Result<Vec<(Layer, f64)>, RadiativeError> {
    let base = steady_state(scenario)?.sample_temperature_k;
    let mut layers: Vec<Layer> = (0..scenario.shields.len()).map(Layer::Shield).collect();
    layers.push(Layer::Environment);
    layers
        .into_iter()
        .map(|layer| {
            let mut worst: f64 = 0.0;
            for factor in [1.0 + fraction, 1.0 - fraction] {
                let t = steady_state(&perturb_layer(scenario, layer, factor))?.sample_temperature_k;
                worst = worst.max((t - base).abs());
            }
            Ok((layer, worst))
        })
        .collect()
}
