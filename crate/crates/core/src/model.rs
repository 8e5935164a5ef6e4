//! Scenario types shared by the solvers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Absorption coefficients of the two faces of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCoating {
    pub absorption_inner: f64,
    pub absorption_outer: f64,
}

impl SurfaceCoating {
    pub fn uniform(absorption: f64) -> Self {
        SurfaceCoating {
            absorption_inner: absorption,
            absorption_outer: absorption,
        }
    }

    pub fn new(absorption_inner: f64, absorption_outer: f64) -> Self {
        SurfaceCoating {
            absorption_inner,
            absorption_outer,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.absorption_inner == self.absorption_outer
    }
}

/// Thin-walled cylinder closed at the bottom, optionally with a lid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderShell {
    pub outer_diameter_m: f64,
    pub height_m: f64,
    pub wall_thickness_m: f64,
    #[serde(default)]
    pub has_lid: bool,
}

impl CylinderShell {
    pub fn new(outer_diameter_m: f64, height_m: f64, wall_thickness_m: f64, has_lid: bool) -> Self {
        CylinderShell {
            outer_diameter_m,
            height_m,
            wall_thickness_m,
            has_lid,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        0.5 * self.outer_diameter_m
    }

    pub fn inner_radius(&self) -> f64 {
        self.outer_radius() - self.wall_thickness_m
    }

    /// Outer surface area: side wall plus bottom, plus the lid when present.
    pub fn surface_area(&self) -> f64 {
        let r = self.outer_radius();
        let ends = if self.has_lid { 2.0 } else { 1.0 };
        2.0 * PI * r * self.height_m + ends * PI * r * r
    }
}

/// Surface area of a closed rectangular box.
pub fn box_surface_area(length_m: f64, width_m: f64, height_m: f64) -> f64 {
    2.0 * (length_m * width_m + length_m * height_m + width_m * height_m)
}

/// One nested enclosure of a thermal scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShieldLayer {
    pub name: String,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder: Option<CylinderShell>,
    pub surface_area_m2: f64,
    pub coating: SurfaceCoating,
}

impl ShieldLayer {
    pub fn from_cylinder(
        name: &str,
        material: &str,
        cylinder: CylinderShell,
        coating: SurfaceCoating,
    ) -> Self {
        ShieldLayer {
            name: name.to_string(),
            material: material.to_string(),
            cylinder: Some(cylinder),
            surface_area_m2: cylinder.surface_area(),
            coating,
        }
    }

    pub fn from_area(name: &str, material: &str, area_m2: f64, coating: SurfaceCoating) -> Self {
        ShieldLayer {
            name: name.to_string(),
            material: material.to_string(),
            cylinder: None,
            surface_area_m2: area_m2,
            coating,
        }
    }
}

/// Which closed form is used for the sample/environment pair coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairFormula {
    /// Two gray surfaces: `1 / (1/A1 + F1/F2 (1/A2 - 1))`.
    #[default]
    Standard,
    /// Literal variant with the receiving absorption replaced by `A1`.
    Printed,
}

/// Body 1: the circuit chip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBody {
    pub surface_area_m2: f64,
    pub absorption: SurfaceCoating,
    #[serde(default, rename = "dissipated_power_W", skip_serializing_if = "Option::is_none")]
    pub dissipated_power_w: Option<f64>,
    #[serde(default, rename = "fixed_temperature_K", skip_serializing_if = "Option::is_none")]
    pub fixed_temperature_k: Option<f64>,
}

impl SampleBody {
    /// Absorption of the face that exchanges with the first enclosure.
    pub fn emitting_absorption(&self) -> f64 {
        self.absorption.absorption_outer
    }
}

/// Body 2: the cold can at the refrigerator stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub surface_area_m2: f64,
    pub absorption: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

/// A fixed-power emitter placed in one of the gaps of the stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSource {
    #[serde(rename = "power_W")]
    pub power_w: f64,
    /// Gap index: 0 is sample/first layer, `shields.len()` is last
    /// layer/environment. `None` selects the outermost gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub insertion_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sample: SampleBody,
    /// Innermost first.
    pub shields: Vec<ShieldLayer>,
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_source: Option<ExternalSource>,
    #[serde(default)]
    pub pair_formula: PairFormula,
}

impl ThermalScenario {
    /// Gap index of the external source, resolved against the stack.
    pub fn source_gap(&self) -> Option<usize> {
        self.external_source
            .as_ref()
            .map(|s| s.insertion_index.unwrap_or(self.shields.len()))
    }
}

/// Cylindrical shell of a magnetostatic scenario, positioned on the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticShell {
    pub name: String,
    pub material: String,
    pub cylinder: CylinderShell,
    pub bottom_z_m: f64,
    pub relative_permeability: f64,
}

/// Axis-aligned rectangle in the (r, z) half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Rect {
    pub fn contains(&self, r: f64, z: f64) -> bool {
        r >= self.r_min && r <= self.r_max && z >= self.z_min && z <= self.z_max
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.r_min < other.r_max
            && other.r_min < self.r_max
            && self.z_min < other.z_max
            && other.z_min < self.z_max
    }
}

impl MagneticShell {
    pub fn top_z(&self) -> f64 {
        self.bottom_z_m + self.cylinder.height_m
    }

    /// Wall, bottom and (optional) lid as (r, z) rectangles.
    pub fn solid_parts(&self) -> Vec<Rect> {
        let c = &self.cylinder;
        let (r_in, r_out, t) = (c.inner_radius(), c.outer_radius(), c.wall_thickness_m);
        let (z0, z1) = (self.bottom_z_m, self.top_z());
        let mut parts = vec![
            Rect {
                r_min: 0.0,
                r_max: r_out,
                z_min: z0,
                z_max: z0 + t,
            },
            Rect {
                r_min: r_in,
                r_max: r_out,
                z_min: z0 + t,
                z_max: if c.has_lid { z1 - t } else { z1 },
            },
        ];
        if c.has_lid {
            parts.push(Rect {
                r_min: 0.0,
                r_max: r_out,
                z_min: z1 - t,
                z_max: z1,
            });
        }
        parts
    }

    /// Interior cavity.
    pub fn cavity(&self) -> Rect {
        let c = &self.cylinder;
        let t = c.wall_thickness_m;
        Rect {
            r_min: 0.0,
            r_max: c.inner_radius(),
            z_min: self.bottom_z_m + t,
            z_max: if c.has_lid { self.top_z() - t } else { self.top_z() },
        }
    }

    pub fn outline(&self) -> Rect {
        Rect {
            r_min: 0.0,
            r_max: self.cylinder.outer_radius(),
            z_min: self.bottom_z_m,
            z_max: self.top_z(),
        }
    }
}

/// Places shells (innermost first) so that every gap, radial and at the
/// bottom, equals the radial clearance between each pair. The outermost
/// shell sits at z = 0.
pub fn nest_shells(shells: &mut [MagneticShell]) {
    let n = shells.len();
    if n == 0 {
        return;
    }
    shells[n - 1].bottom_z_m = 0.0;
    for i in (0..n - 1).rev() {
        let outer = shells[i + 1].clone();
        let clearance = outer.cylinder.inner_radius() - shells[i].cylinder.outer_radius();
        shells[i].bottom_z_m = outer.bottom_z_m + outer.cylinder.wall_thickness_m + clearance;
    }
}

/// Volume over which the field suppression is averaged.
pub type EvaluationRegion = Rect;

/// Cylindrical computational domain `[0, radius] x [z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub radius_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
}

/// Default domain margin as a multiple of the tallest shell height.
pub const DEFAULT_DOMAIN_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticScenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Uniform axial applied field, T.
    #[serde(rename = "applied_field_T")]
    pub applied_field_t: f64,
    /// Innermost first.
    pub shells: Vec<MagneticShell>,
    pub domain: Domain,
    pub mesh_size_m: f64,
    /// Radial inset of the evaluation region from the innermost wall.
    /// `None` means one wall thickness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_inset_m: Option<f64>,
}

impl MagneticScenario {
    /// Builds a scenario with the default domain around `shells`.
    pub fn new(label: &str, applied_field_t: f64, shells: Vec<MagneticShell>, mesh_size_m: f64) -> Self {
        let domain = default_domain(&shells, DEFAULT_DOMAIN_MARGIN);
        MagneticScenario {
            label: Some(label.to_string()),
            applied_field_t,
            shells,
            domain,
            mesh_size_m,
            region_inset_m: None,
        }
    }

    pub fn tallest_height(&self) -> f64 {
        self.shells
            .iter()
            .map(|s| s.cylinder.height_m)
            .fold(0.0, f64::max)
    }

    /// Lower third of the innermost cavity, radially inset.
    pub fn evaluation_region(&self) -> Option<EvaluationRegion> {
        let inner = self.shells.first()?;
        let inset = self
            .region_inset_m
            .unwrap_or(inner.cylinder.wall_thickness_m);
        let cavity = inner.cavity();
        Some(Rect {
            r_min: 0.0,
            r_max: cavity.r_max - inset,
            z_min: cavity.z_min,
            z_max: inner.bottom_z_m + inner.cylinder.height_m / 3.0,
        })
    }
}

/// Domain enclosing the shells with `margin_factor` times the tallest height
/// on every open side. An empty shell list gets a unit-scale box.
pub fn default_domain(shells: &[MagneticShell], margin_factor: f64) -> Domain {
    if shells.is_empty() {
        return Domain {
            radius_m: 0.1,
            z_min_m: -0.1,
            z_max_m: 0.1,
        };
    }
    let height = shells.iter().map(|s| s.cylinder.height_m).fold(0.0, f64::max);
    let r_max = shells
        .iter()
        .map(|s| s.cylinder.outer_radius())
        .fold(0.0, f64::max);
    let z_lo = shells.iter().map(|s| s.bottom_z_m).fold(f64::INFINITY, f64::min);
    let z_hi = shells.iter().map(|s| s.top_z()).fold(f64::NEG_INFINITY, f64::max);
    let margin = margin_factor * height;
    Domain {
        radius_m: r_max + margin,
        z_min_m: z_lo - margin,
        z_max_m: z_hi + margin,
    }
}
