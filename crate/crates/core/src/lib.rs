//! Design calculators for cryogenic shielding of superconducting quantum circuits.
//!
//! The crate is split by concern:
//!
//! * [`materials`] and [`model`] hold the shared domain types and the built-in
//!   material constants; [`validate`] checks scenario invariants and
//!   [`scenario`] reads the TOML scenario files.
//! * [`radiative`] evaluates gray-body exchange through nested shields and
//!   solves steady-state temperatures.
//! * [`magnetostatic`] solves the axisymmetric scalar-potential problem for
//!   nested cylindrical shells and reports the field suppression in dB.
//! * [`budget`] contains the closed-form sizing calculators.
//! * [`recommender`] turns a design context into shielding and filtering plans.
//! * [`report`] bundles results into deterministic JSON/CSV artifacts.

pub mod budget;
pub mod constants;
pub mod magnetostatic;
pub mod materials;
pub mod model;
pub mod radiative;
pub mod recommender;
pub mod report;
pub mod scenario;
pub mod validate;

pub use materials::{builtin_materials, MaterialDb, MaterialRecord};
pub use model::{
    CylinderShell, Environment, ExternalSource, MagneticScenario, MagneticShell, SampleBody,
    ShieldLayer, SurfaceCoating, ThermalScenario,
};
pub use validate::{Validate, Violation, ViolationKind, Violations};
