//! Closed-form sizing: skin depth, flux-quantum field threshold and the
//! suppression it demands, absorptive filter length and the
//! absorber-limited energy relaxation time.

pub mod curve;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{FLUX_QUANTUM, FLUX_QUANTUM_CODATA, MU_0};

pub use curve::{builtin_curve, cr110, cr124, filter_length, Anchor, AttenuationCurve, FilterSizing};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BudgetError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{frequency_hz} Hz is outside the `{material}` curve ({min_hz}..{max_hz} Hz) and extrapolation is off")]
    CurveRange {
        material: String,
        frequency_hz: f64,
        min_hz: f64,
        max_hz: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<(), BudgetError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(BudgetError::Domain(format!("{name} = {v} must be positive")))
    }
}

/// `sqrt(rho / (pi f mu0 mu_r))`, m.
pub fn skin_depth(resistivity_ohm_m: f64, mu_r: f64, frequency_hz: f64) -> Result<f64, BudgetError> {
    positive("resistivity", resistivity_ohm_m)?;
    positive("relative permeability", mu_r)?;
    positive("frequency", frequency_hz)?;
    Ok((resistivity_ohm_m / (PI * frequency_hz * MU_0 * mu_r)).sqrt())
}

/// Value of the flux quantum used by the threshold calculation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxQuantumPrecision {
    /// 2.07e-15 Wb.
    #[default]
    Rounded,
    Codata,
}

impl FluxQuantumPrecision {
    pub fn value(self) -> f64 {
        match self {
            FluxQuantumPrecision::Rounded => FLUX_QUANTUM,
            FluxQuantumPrecision::Codata => FLUX_QUANTUM_CODATA,
        }
    }
}

/// Field that threads one flux quantum through a loop of `area_m2`, T.
pub fn flux_field_threshold(area_m2: f64) -> Result<f64, BudgetError> {
    flux_field_threshold_with(area_m2, FluxQuantumPrecision::Rounded)
}

pub fn flux_field_threshold_with(area_m2: f64, precision: FluxQuantumPrecision) -> Result<f64, BudgetError> {
    positive("loop area", area_m2)?;
    Ok(precision.value() / area_m2)
}

/// Suppression, dB, that brings `ambient_t` down to `residual_fraction` of
/// the one-flux-quantum field. Never negative.
pub fn required_mfs(area_m2: f64, ambient_t: f64, residual_fraction: f64) -> Result<f64, BudgetError> {
    required_mfs_with(area_m2, ambient_t, residual_fraction, FluxQuantumPrecision::Rounded)
}

pub fn required_mfs_with(
    area_m2: f64,
    ambient_t: f64,
    residual_fraction: f64,
    precision: FluxQuantumPrecision,
) -> Result<f64, BudgetError> {
    positive("ambient field", ambient_t)?;
    if !(residual_fraction > 0.0 && residual_fraction <= 1.0) {
        return Err(BudgetError::Domain(format!(
            "residual fraction {residual_fraction} must lie in (0, 1]"
        )));
    }
    let b0 = flux_field_threshold_with(area_m2, precision)?;
    Ok((20.0 * (ambient_t / (residual_fraction * b0)).log10()).max(0.0))
}

/// Energy relaxation time, or the lossless sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum T1 {
    Finite {
        #[serde(rename = "seconds")]
        seconds: f64,
    },
    Unbounded,
}

impl T1 {
    pub fn seconds(&self) -> Option<f64> {
        match *self {
            T1::Finite { seconds } => Some(seconds),
            T1::Unbounded => None,
        }
    }

    /// Unbounded compares as infinite.
    pub fn as_f64(&self) -> f64 {
        self.seconds().unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceBudget {
    pub participation: f64,
    pub loss_tangent: f64,
    #[serde(rename = "angular_frequency_rad_per_s")]
    pub angular_frequency: f64,
    #[serde(rename = "residual_rate_per_s")]
    pub gamma0: f64,
    pub t1: T1,
}

/// `T1 = 1 / (omega p tan_delta + gamma0)` with `omega = 2 pi f`.
pub fn t1_bound(participation: f64, loss_tangent: f64, frequency_hz: f64, gamma0: f64) -> Result<CoherenceBudget, BudgetError> {
    if !(0.0..=1.0).contains(&participation) {
        return Err(BudgetError::Domain(format!("participation {participation} must lie in [0, 1]")));
    }
    if !(loss_tangent >= 0.0 && loss_tangent.is_finite()) {
        return Err(BudgetError::Domain(format!("loss tangent {loss_tangent} must be >= 0")));
    }
    positive("frequency", frequency_hz)?;
    if !(gamma0 >= 0.0 && gamma0.is_finite()) {
        return Err(BudgetError::Domain(format!("residual rate {gamma0} must be >= 0")));
    }
    let omega = 2.0 * PI * frequency_hz;
    let rate = omega * participation * loss_tangent + gamma0;
    let t1 = if rate > 0.0 {
        T1::Finite { seconds: 1.0 / rate }
    } else {
        T1::Unbounded
    };
    Ok(CoherenceBudget {
        participation,
        loss_tangent,
        angular_frequency: omega,
        gamma0,
        t1,
    })
}

/// Default T1 requirement for the absorber-distance sweep, s.
pub const T1_THRESHOLD_S: f64 = 10e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub distance_m: f64,
    pub participation: f64,
    pub t1: T1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSweep {
    pub points: Vec<DistancePoint>,
    #[serde(rename = "threshold_s")]
    pub threshold_s: f64,
    /// Smallest distance (interpolated between table rows) from which T1
    /// meets the threshold, if it ever does.
    pub crossing_distance_m: Option<f64>,
    pub monotone: bool,
}

/// T1 over a user-supplied `(distance, participation)` table.
pub fn t1_distance_sweep(
    table: &[(f64, f64)],
    loss_tangent: f64,
    frequency_hz: f64,
    gamma0: f64,
    threshold_s: f64,
) -> Result<DistanceSweep, BudgetError> {
    positive("threshold", threshold_s)?;
    if table.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(BudgetError::Domain("distances must strictly increase".into()));
    }
    let points: Vec<DistancePoint> = table
        .iter()
        .map(|&(d, p)| {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(BudgetError::Domain(format!("distance {d} must be >= 0")));
            }
            Ok(DistancePoint {
                distance_m: d,
                participation: p,
                t1: t1_bound(p, loss_tangent, frequency_hz, gamma0)?.t1,
            })
        })
        .collect::<Result<_, _>>()?;
    let monotone = points.windows(2).all(|w| w[1].t1.as_f64() >= w[0].t1.as_f64());
    let mut crossing = None;
    for (i, pt) in points.iter().enumerate() {
        if pt.t1.as_f64() >= threshold_s {
            crossing = Some(match i.checked_sub(1).map(|j| &points[j]) {
                Some(prev) if pt.t1.seconds().is_some() => {
                    let (t0, t1) = (prev.t1.as_f64(), pt.t1.as_f64());
                    let frac = (threshold_s - t0) / (t1 - t0);
                    prev.distance_m + frac * (pt.distance_m - prev.distance_m)
                }
                _ => pt.distance_m,
            });
            break;
        }
    }
    Ok(DistanceSweep {
        points,
        threshold_s,
        crossing_distance_m: crossing,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn copper_skin_depth() {
        let d = skin_depth(1.68e-8, 1.0, 100e3).unwrap();
        // sqrt(1.68e-8 / (pi * 1e5 * 4e-7 * pi)) evaluated by hand: 2.0629e-4.
        assert_relative_eq!(d, 2.0629e-4, max_relative = 1e-4);
        assert!((d - 200e-6).abs() / 200e-6 < 0.05);
        assert_relative_eq!(skin_depth(1.68e-8, 1.0, 400e3).unwrap(), d / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn mu_metal_skin_depth() {
        // 5.5e-7 / (4 pi^2 * 7) = 5.5e-7 / 276.35 = 1.9902e-9 -> 4.4612e-5 m
        let expected = (5.5e-7 / (PI * 1e3 * 4.0 * PI * 1e-7 * 7e4)).sqrt();
        let got = skin_depth(5.5e-7, 7e4, 1e3).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-14);
        assert_relative_eq!(got, 4.4612e-5, max_relative = 1e-4);
    }

    #[test]
    fn skin_depth_domain() {
        assert!(skin_depth(0.0, 1.0, 1.0).is_err());
        assert!(skin_depth(1.0, -1.0, 1.0).is_err());
        assert!(skin_depth(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn flux_threshold_examples() {
        let b = flux_field_threshold(30e-12).unwrap();
        assert!((b - 69e-6).abs() / 69e-6 < 0.01);
        assert_relative_eq!(flux_field_threshold(60e-12).unwrap(), b / 2.0, max_relative = 1e-15);
        assert_relative_eq!(flux_field_threshold(2.07e-12).unwrap(), 1e-3, max_relative = 1e-12);
        let codata = flux_field_threshold_with(30e-12, FluxQuantumPrecision::Codata).unwrap();
        assert!(codata < b);
        assert!(flux_field_threshold(0.0).is_err());
    }

    #[test]
    fn required_mfs_examples() {
        assert!((required_mfs(30e-12, 69e-6, 0.001).unwrap() - 60.0).abs() < 1e-9);
        assert!((required_mfs(30e-12, 69e-6, 0.01).unwrap() - 40.0).abs() < 1e-9);
        assert_eq!(required_mfs(30e-12, 1e-12, 0.01).unwrap(), 0.0);
        assert!(required_mfs(30e-12, 69e-6, 0.0).is_err());
    }

    #[test]
    fn t1_examples() {
        assert_eq!(t1_bound(0.0, 0.05, 5e9, 0.0).unwrap().t1, T1::Unbounded);
        // omega p tan = 100 /s
        let f = 5e9;
        let p = 100.0 / (2.0 * PI * f * 0.05);
        let b = t1_bound(p, 0.05, f, 0.0).unwrap();
        assert_relative_eq!(b.t1.seconds().unwrap(), 0.01, max_relative = 1e-12);
        assert!(t1_bound(1.5, 0.05, f, 0.0).is_err());
    }

    #[test]
    fn distance_sweep_crossing() {
        let f = 5e9;
        let tan = 0.05;
        // participation giving T1 = 2.5, 5, 10, 20 ms
        let p = |t1: f64| 1.0 / (t1 * 2.0 * PI * f * tan);
        let table = [(1e-3, p(2.5e-3)), (2e-3, p(5e-3)), (4e-3, p(10e-3)), (6e-3, p(20e-3))];
        let s = t1_distance_sweep(&table, tan, f, 0.0, T1_THRESHOLD_S).unwrap();
        assert!(s.monotone);
        assert_relative_eq!(s.crossing_distance_m.unwrap(), 4e-3, max_relative = 1e-9);
        let never = t1_distance_sweep(&table[..2], tan, f, 0.0, T1_THRESHOLD_S).unwrap();
        assert_eq!(never.crossing_distance_m, None);
    }

    proptest! {
        #[test]
        fn skin_depth_scaling(rho in 1e-9f64..1e-5, mu in 1e-2f64..1e5, f in 1.0f64..1e10, k in 1.1f64..100.0) {
            let d = skin_depth(rho, mu, f).unwrap();
            let tol = 1e-12;
            prop_assert!((skin_depth(rho, mu, f * k).unwrap() * k.sqrt() / d - 1.0).abs() < tol);
            prop_assert!((skin_depth(rho, mu * k, f).unwrap() * k.sqrt() / d - 1.0).abs() < tol);
            prop_assert!((skin_depth(rho * k, mu, f).unwrap() / k.sqrt() / d - 1.0).abs() < tol);
        }

        #[test]
        fn threshold_target_needs_no_suppression(area in 1e-14f64..1e-6) {
            let b0 = flux_field_threshold(area).unwrap();
            prop_assert!(required_mfs(area, b0, 1.0).unwrap().abs() < 1e-9);
        }

        #[test]
        fn t1_reciprocal(p in 0.0f64..1.0, tan in 0.0f64..1.0, f in 1e6f64..1e11, g in 0.0f64..1e4) {
            let b = t1_bound(p, tan, f, g).unwrap();
            if let Some(t) = b.t1.seconds() {
                let rate = b.angular_frequency * p * tan + g;
                prop_assert!((t * rate - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(p * tan == 0.0 && g == 0.0);
            }
        }
    }
}
