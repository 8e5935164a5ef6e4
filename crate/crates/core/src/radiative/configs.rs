//! The eight default shielding configurations A-H.

use serde::{Deserialize, Serialize};

use crate::model::{
    box_surface_area, CylinderShell, Environment, PairFormula, SampleBody, ShieldLayer, SurfaceCoating,
    ThermalScenario,
};

pub const CONFIGURATION_LABELS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

/// Dimensions and constants behind the default configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigurationGeometry {
    /// Chip edge lengths and thickness, m.
    pub chip_m: [f64; 3],
    pub chip_absorption: f64,
    /// Holder box edge lengths, m.
    pub holder_m: [f64; 3],
    pub shield_1: CylinderShell,
    pub shield_2: CylinderShell,
    pub can: CylinderShell,
    /// Bare copper.
    pub metal_absorption: f64,
    pub coating_absorption: f64,
    #[serde(rename = "environment_temperature_K")]
    pub environment_temperature_k: f64,
    #[serde(rename = "dissipated_power_W")]
    pub dissipated_power_w: f64,
    #[serde(default)]
    pub pair_formula: PairFormula,
}

impl Default for ConfigurationGeometry {
    fn default() -> Self {
        ConfigurationGeometry {
            chip_m: [0.010, 0.010, 0.0005],
            chip_absorption: 8e-5,
            holder_m: [0.030, 0.030, 0.015],
            shield_1: CylinderShell::new(0.066, 0.180, 0.001, true),
            shield_2: CylinderShell::new(0.070, 0.190, 0.001, true),
            can: CylinderShell::new(0.150, 0.300, 0.001, true),
            metal_absorption: 0.005,
            coating_absorption: 0.9,
            environment_temperature_k: 0.01,
            dissipated_power_w: 1e-14,
            pair_formula: PairFormula::Standard,
        }
    }
}

/// One configuration by label, or `None` for an unknown label.
pub fn default_configuration(label: &str, geometry: &ConfigurationGeometry) -> Option<ThermalScenario> {
    let g = geometry;
    let (metal, coat) = (g.metal_absorption, g.coating_absorption);
    let holder = |inner: f64, outer: f64| {
        ShieldLayer::from_area(
            "holder",
            "copper",
            box_surface_area(g.holder_m[0], g.holder_m[1], g.holder_m[2]),
            SurfaceCoating::new(inner, outer),
        )
    };
    let shield = |name: &str, cylinder: CylinderShell| {
        ShieldLayer::from_cylinder(name, "copper", cylinder, SurfaceCoating::new(coat, metal))
    };
    let (shields, environment_absorption) = match label {
        "A" => (vec![holder(metal, metal)], metal),
        "B" => (vec![holder(metal, metal)], coat),
        "C" => (vec![holder(coat, metal)], metal),
        "D" => (vec![holder(metal, coat)], metal),
        "E" => (vec![holder(coat, coat)], metal),
        "F" => (vec![holder(metal, metal), shield("shield 1", g.shield_1)], metal),
        "G" => (vec![holder(coat, metal), shield("shield 1", g.shield_1)], metal),
        "H" => (
            vec![holder(coat, metal), shield("shield 1", g.shield_1), shield("shield 2", g.shield_2)],
            metal,
        ),
        _ => return None,
    };
    Some(ThermalScenario {
        label: Some(label.to_string()),
        sample: SampleBody {
            surface_area_m2: box_surface_area(g.chip_m[0], g.chip_m[1], g.chip_m[2]),
            absorption: SurfaceCoating::uniform(g.chip_absorption),
            dissipated_power_w: Some(g.dissipated_power_w),
            fixed_temperature_k: None,
        },
        shields,
        environment: Environment {
            surface_area_m2: g.can.surface_area(),
            absorption: environment_absorption,
            temperature_k: g.environment_temperature_k,
        },
        external_source: None,
        pair_formula: g.pair_formula,
    })
}

/// All eight configurations in label order.
pub fn default_configurations(geometry: &ConfigurationGeometry) -> Vec<ThermalScenario> {
    CONFIGURATION_LABELS
        .iter()
        .map(|l| default_configuration(l, geometry).expect("known label"))
        .collect()
}
