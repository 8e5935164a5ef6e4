//! Scenario invariant checks.
//!
//! Validation collects every violation instead of stopping at the first one,
//! and a scenario that passes comes back unchanged.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{MagneticScenario, ThermalScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NestingViolation,
    AbsorptionOutOfRange,
    MissingSource,
    GeometryOverlap,
    InvalidQuantity,
    AreaMismatch,
    DomainTooSmall,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Dotted path of the offending field, e.g. `shields[1].surface_area_m2`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.kind, self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kinds(&self) -> Vec<ViolationKind> {
        self.0.iter().map(|v| v.kind).collect()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.0.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            kind,
            field: field.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: impl Into<String>, value: f64) {
        if !(value > 0.0 && value.is_finite()) {
            self.push(
                ViolationKind::InvalidQuantity,
                field,
                format!("must be positive and finite, got {value}"),
            );
        }
    }

    fn absorption(&mut self, field: impl Into<String>, value: f64) {
        if !(0.0..=1.0).contains(&value) {
            self.push(
                ViolationKind::AbsorptionOutOfRange,
                field,
                format!("absorption must lie in [0, 1], got {value}"),
            );
        }
    }

    fn into_result<T>(self, value: T) -> Result<T, Violations> {
        if self.is_empty() {
            Ok(value)
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

/// Scenario-level invariant check.
pub trait Validate: Sized {
    fn violations(&self) -> Violations;

    fn validate(self) -> Result<Self, Violations> {
        let found = self.violations();
        found.into_result(self)
    }
}

const AREA_MATCH_TOLERANCE: f64 = 1e-9;

impl Validate for ThermalScenario {
    fn violations(&self) -> Violations {
        let mut out = Violations::default();
        let sample = &self.sample;
        out.positive("sample.surface_area_m2", sample.surface_area_m2);
        out.absorption("sample.absorption_inner", sample.absorption.absorption_inner);
        out.absorption("sample.absorption_outer", sample.absorption.absorption_outer);
        match (sample.dissipated_power_w, sample.fixed_temperature_k) {
            (Some(_), Some(_)) => out.push(
                ViolationKind::MissingSource,
                "sample",
                "set exactly one of dissipated_power_W and fixed_temperature_K, not both",
            ),
            (None, None) => out.push(
                ViolationKind::MissingSource,
                "sample",
                "one of dissipated_power_W or fixed_temperature_K is required",
            ),
            (Some(p), None) => {
                if !(p >= 0.0 && p.is_finite()) {
                    out.push(
                        ViolationKind::InvalidQuantity,
                        "sample.dissipated_power_W",
                        format!("must be non-negative and finite, got {p}"),
                    );
                }
            }
            (None, Some(t)) => out.positive("sample.fixed_temperature_K", t),
        }

        for (i, shield) in self.shields.iter().enumerate() {
            let at = |f: &str| format!("shields[{i}].{f}");
            out.positive(at("surface_area_m2"), shield.surface_area_m2);
            out.absorption(at("absorption_inner"), shield.coating.absorption_inner);
            out.absorption(at("absorption_outer"), shield.coating.absorption_outer);
            if let Some(c) = &shield.cylinder {
                out.positive(at("cylinder.outer_diameter_m"), c.outer_diameter_m);
                out.positive(at("cylinder.height_m"), c.height_m);
                out.positive(at("cylinder.wall_thickness_m"), c.wall_thickness_m);
                let computed = c.surface_area();
                if computed.is_finite()
                    && (shield.surface_area_m2 - computed).abs()
                        > AREA_MATCH_TOLERANCE * computed.abs()
                {
                    out.push(
                        ViolationKind::AreaMismatch,
                        at("surface_area_m2"),
                        format!(
                            "stated area {} differs from cylinder area {computed}",
                            shield.surface_area_m2
                        ),
                    );
                }
            }
        }

        let env = &self.environment;
        out.positive("environment.surface_area_m2", env.surface_area_m2);
        out.absorption("environment.absorption", env.absorption);
        out.positive("environment.temperature_K", env.temperature_k);

        // Areas must not shrink going outward.
        let mut chain: Vec<(String, f64)> = vec![("sample".into(), sample.surface_area_m2)];
        chain.extend(
            self.shields
                .iter()
                .enumerate()
                .map(|(i, s)| (format!("shields[{i}]"), s.surface_area_m2)),
        );
        chain.push(("environment".into(), env.surface_area_m2));
        for pair in chain.windows(2) {
            let ((inner_name, inner), (outer_name, outer)) = (&pair[0], &pair[1]);
            if inner.is_finite() && outer.is_finite() && outer < inner {
                out.push(
                    ViolationKind::NestingViolation,
                    format!("{outer_name}.surface_area_m2"),
                    format!("area {outer} is smaller than enclosed {inner_name} area {inner}"),
                );
            }
        }

        if let Some(src) = &self.external_source {
            if !(src.power_w >= 0.0 && src.power_w.is_finite()) {
                out.push(
                    ViolationKind::InvalidQuantity,
                    "external_source.power_W",
                    format!("must be non-negative and finite, got {}", src.power_w),
                );
            }
            if let Some(idx) = src.insertion_index {
                if idx > self.shields.len() {
                    out.push(
                        ViolationKind::InvalidQuantity,
                        "external_source.insertion_index",
                        format!("gap {idx} does not exist; stack has {} gaps", self.shields.len() + 1),
                    );
                }
            }
        }
        out
    }
}

impl Validate for MagneticScenario {
    fn violations(&self) -> Violations {
        let mut out = Violations::default();
        out.positive("applied_field_T", self.applied_field_t);
        out.positive("mesh_size_m", self.mesh_size_m);

        let mut shapes_ok = true;
        for (i, shell) in self.shells.iter().enumerate() {
            let at = |f: &str| format!("shells[{i}].{f}");
            let c = &shell.cylinder;
            let before = out.0.len();
            out.positive(at("outer_diameter_m"), c.outer_diameter_m);
            out.positive(at("height_m"), c.height_m);
            out.positive(at("wall_thickness_m"), c.wall_thickness_m);
            out.positive(at("relative_permeability"), shell.relative_permeability);
            if !shell.bottom_z_m.is_finite() {
                out.push(ViolationKind::InvalidQuantity, at("bottom_z_m"), "must be finite");
            }
            if c.wall_thickness_m >= c.outer_radius() {
                out.push(
                    ViolationKind::InvalidQuantity,
                    at("wall_thickness_m"),
                    "wall is thicker than the shell radius",
                );
            }
            let ends = if c.has_lid { 2.0 } else { 1.0 };
            if ends * c.wall_thickness_m >= c.height_m {
                out.push(
                    ViolationKind::InvalidQuantity,
                    at("wall_thickness_m"),
                    "end plates leave no cavity",
                );
            }
            shapes_ok &= out.0.len() == before;
        }

        if shapes_ok {
            for (i, pair) in self.shells.windows(2).enumerate() {
                let (inner, outer) = (&pair[0], &pair[1]);
                let cavity = outer.cavity();
                let body = inner.outline();
                let inside = body.r_max < cavity.r_max
                    && body.z_min > cavity.z_min
                    && (!outer.cylinder.has_lid || body.z_max < cavity.z_max);
                if !inside {
                    out.push(
                        ViolationKind::GeometryOverlap,
                        format!("shells[{i}]"),
                        format!(
                            "`{}` is not strictly inside the cavity of `{}`",
                            inner.name, outer.name
                        ),
                    );
                }
            }
            // Non-adjacent pairs; catches unordered lists too.
            for i in 0..self.shells.len() {
                for j in i + 2..self.shells.len() {
                    let a = self.shells[i].solid_parts();
                    let b = self.shells[j].solid_parts();
                    if a.iter().any(|p| b.iter().any(|q| p.overlaps(q))) {
                        out.push(
                            ViolationKind::GeometryOverlap,
                            format!("shells[{i}]"),
                            format!("intersects shells[{j}]"),
                        );
                    }
                }
            }

            if !self.shells.is_empty() {
                let margin = self.tallest_height();
                let r_max = self.shells.iter().map(|s| s.cylinder.outer_radius()).fold(0.0, f64::max);
                let z_lo = self.shells.iter().map(|s| s.bottom_z_m).fold(f64::INFINITY, f64::min);
                let z_hi = self.shells.iter().map(|s| s.top_z()).fold(f64::NEG_INFINITY, f64::max);
                let d = &self.domain;
                if !(d.radius_m >= r_max + margin) {
                    out.push(
                        ViolationKind::DomainTooSmall,
                        "domain.radius_m",
                        format!("needs at least {} m", r_max + margin),
                    );
                }
                if !(d.z_min_m <= z_lo - margin) {
                    out.push(
                        ViolationKind::DomainTooSmall,
                        "domain.z_min_m",
                        format!("needs at most {} m", z_lo - margin),
                    );
                }
                if !(d.z_max_m >= z_hi + margin) {
                    out.push(
                        ViolationKind::DomainTooSmall,
                        "domain.z_max_m",
                        format!("needs at least {} m", z_hi + margin),
                    );
                }
                if let Some(inset) = self.region_inset_m {
                    let r_in = self.shells[0].cylinder.inner_radius();
                    if !(inset >= 0.0 && inset < r_in) {
                        out.push(
                            ViolationKind::InvalidQuantity,
                            "region_inset_m",
                            format!("must lie in [0, {r_in}) m"),
                        );
                    }
                }
            }
        }
        if self.shells.is_empty() {
            let d = &self.domain;
            out.positive("domain.radius_m", d.radius_m);
            if !(d.z_max_m > d.z_min_m) {
                out.push(ViolationKind::InvalidQuantity, "domain.z_max_m", "must exceed z_min_m");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn simple() -> ThermalScenario {
        ThermalScenario {
            label: None,
            sample: SampleBody {
                surface_area_m2: 1e-4,
                absorption: SurfaceCoating::uniform(0.1),
                dissipated_power_w: Some(1e-14),
                fixed_temperature_k: None,
            },
            shields: vec![
                ShieldLayer::from_area("a", "copper", 0.05, SurfaceCoating::uniform(0.005)),
                ShieldLayer::from_area("b", "copper", 0.1, SurfaceCoating::uniform(0.005)),
            ],
            environment: Environment {
                surface_area_m2: 0.2,
                absorption: 0.005,
                temperature_k: 0.01,
            },
            external_source: None,
            pair_formula: PairFormula::Standard,
        }
    }

    #[test]
    fn well_formed_passes_unchanged() {
        let s = simple();
        assert_eq!(s.clone().validate().unwrap(), s);
    }

    #[test]
    fn shrinking_shields_are_a_nesting_violation() {
        let mut s = simple();
        s.shields[0].surface_area_m2 = 0.1;
        s.shields[1].surface_area_m2 = 0.05;
        let err = s.validate().unwrap_err();
        assert_eq!(err.kinds(), vec![ViolationKind::NestingViolation]);
        assert_eq!(err.0[0].field, "shields[1].surface_area_m2");
    }

    #[test]
    fn absorption_range_and_all_errors_listed() {
        let mut s = simple();
        s.shields[0].coating.absorption_inner = 1.2;
        s.sample.fixed_temperature_k = Some(1.0);
        s.environment.temperature_k = 0.0;
        let err = s.validate().unwrap_err();
        assert!(err.contains(ViolationKind::AbsorptionOutOfRange));
        assert!(err.contains(ViolationKind::MissingSource));
        assert!(err.contains(ViolationKind::InvalidQuantity));
        assert_eq!(err.0.len(), 3);
    }

    #[test]
    fn negative_area_names_the_field() {
        let mut s = simple();
        s.shields[1].surface_area_m2 = -1.0;
        let err = s.validate().unwrap_err();
        assert!(err.0.iter().any(|v| v.field == "shields[1].surface_area_m2"
            && v.kind == ViolationKind::InvalidQuantity));
    }

    #[test]
    fn cylinder_area_must_match() {
        let mut s = simple();
        let cyl = CylinderShell::new(0.066, 0.18, 0.001, true);
        s.shields[0].surface_area_m2 = 0.01;
        s.shields[1] = ShieldLayer::from_cylinder("c", "copper", cyl, SurfaceCoating::uniform(0.005));
        assert!(s.clone().validate().is_ok());
        s.shields[1].surface_area_m2 *= 1.01;
        assert_eq!(s.validate().unwrap_err().kinds(), vec![ViolationKind::AreaMismatch]);
    }

    fn shell(od: f64, h: f64, z0: f64) -> MagneticShell {
        MagneticShell {
            name: format!("{od}"),
            material: "mu-metal".into(),
            cylinder: CylinderShell::new(od, h, 0.001, false),
            bottom_z_m: z0,
            relative_permeability: 7e4,
        }
    }

    #[test]
    fn magnetic_overlap_detected() {
        let good = MagneticScenario::new("ok", 5e-5, vec![shell(0.066, 0.18, 0.002), shell(0.07, 0.19, 0.0)], 2e-3);
        assert!(good.clone().validate().is_ok());
        let mut bad = good.clone();
        bad.shells[0].cylinder.outer_diameter_m = 0.069;
        assert!(bad.validate().unwrap_err().contains(ViolationKind::GeometryOverlap));
        let mut sunk = good;
        sunk.shells[0].bottom_z_m = 0.0;
        assert!(sunk.validate().unwrap_err().contains(ViolationKind::GeometryOverlap));
    }

    #[test]
    fn magnetic_domain_margin() {
        let mut s = MagneticScenario::new("ok", 5e-5, vec![shell(0.07, 0.19, 0.0)], 2e-3);
        s.domain.radius_m = 0.1;
        assert_eq!(s.validate().unwrap_err().kinds(), vec![ViolationKind::DomainTooSmall]);
    }

    #[test]
    fn validation_is_idempotent() {
        let mut s = simple();
        s.shields[0].coating.absorption_outer = -0.5;
        let first = s.violations();
        let second = s.clone().validate().err().unwrap();
        assert_eq!(first, second);
        let ok = simple().validate().unwrap();
        assert_eq!(ok.clone().validate().unwrap(), ok);
    }
}
