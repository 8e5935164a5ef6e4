//! Physical constants at the precision used throughout the calculators.

use std::f64::consts::PI;

/// Stefan-Boltzmann constant, W m^-2 K^-4 (three significant digits).
pub const STEFAN_BOLTZMANN: f64 = 5.67e-8;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * PI;

/// Magnetic flux quantum at three significant digits, Wb.
pub const FLUX_QUANTUM: f64 = 2.07e-15;

/// Magnetic flux quantum h/2e (CODATA 2018, exact), Wb.
pub const FLUX_QUANTUM_CODATA: f64 = 2.067_833_848e-15;

/// Relative permeability used as a proxy for a superconductor in the
/// magnetostatic model. Small enough that leakage through millimetre walls
/// of decimetre-deep cups stays below the mouth-penetration field.
pub const SUPERCONDUCTOR_MU_R: f64 = 1e-9;

/// The customary coarser proxy. Through a 1 mm wall it lets about
/// `1e-6 * depth / thickness` of the applied field in, which caps a
/// 180 mm cup near 65-72 dB.
pub const SUPERCONDUCTOR_MU_R_COARSE: f64 = 1e-6;
