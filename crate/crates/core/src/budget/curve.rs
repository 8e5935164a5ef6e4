//! Tabulated attenuation of absorptive filter materials and filter sizing.

use serde::{Deserialize, Serialize};

use super::BudgetError;

/// One tabulated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    #[serde(rename = "frequency_Hz")]
    pub frequency_hz: f64,
    #[serde(rename = "attenuation_dB_per_m")]
    pub attenuation_db_per_m: f64,
}

/// Attenuation per unit length, interpolated linearly in log-log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationCurve {
    pub material: String,
    #[serde(rename = "anchor")]
    pub anchors: Vec<Anchor>,
    /// Extend the end segments beyond the anchors instead of refusing.
    #[serde(default)]
    pub allow_extrapolation: bool,
}

impl AttenuationCurve {
    /// Checks that frequencies strictly increase and attenuations are positive.
    pub fn new(material: &str, anchors: Vec<Anchor>) -> Result<Self, BudgetError> {
        let curve = AttenuationCurve {
            material: material.to_string(),
            anchors,
            allow_extrapolation: false,
        };
        curve.check()?;
        Ok(curve)
    }

    /// Convenience for anchors given in dB/cm.
    pub fn from_db_per_cm(material: &str, points: &[(f64, f64)]) -> Result<Self, BudgetError> {
        Self::new(
            material,
            points
                .iter()
                .map(|&(f, a)| Anchor {
                    frequency_hz: f,
                    attenuation_db_per_m: 100.0 * a,
                })
                .collect(),
        )
    }

    pub fn with_extrapolation(mut self, allow: bool) -> Self {
        self.allow_extrapolation = allow;
        self
    }

    pub fn check(&self) -> Result<(), BudgetError> {
        if self.anchors.is_empty() {
            return Err(BudgetError::Domain(format!("curve `{}` has no anchors", self.material)));
        }
        for (i, a) in self.anchors.iter().enumerate() {
            if !(a.frequency_hz > 0.0 && a.frequency_hz.is_finite()) {
                return Err(BudgetError::Domain(format!(
                    "curve `{}` anchor {i}: frequency {} must be positive",
                    self.material, a.frequency_hz
                )));
            }
            if !(a.attenuation_db_per_m > 0.0 && a.attenuation_db_per_m.is_finite()) {
                return Err(BudgetError::Domain(format!(
                    "curve `{}` anchor {i}: attenuation {} must be positive",
                    self.material, a.attenuation_db_per_m
                )));
            }
        }
        if self.anchors.windows(2).any(|w| w[1].frequency_hz <= w[0].frequency_hz) {
            return Err(BudgetError::Domain(format!(
                "curve `{}`: frequencies must strictly increase",
                self.material
            )));
        }
        Ok(())
    }

    pub fn frequency_range(&self) -> (f64, f64) {
        (
            self.anchors[0].frequency_hz,
            self.anchors[self.anchors.len() - 1].frequency_hz,
        )
    }

    /// Attenuation at `frequency_hz`, dB/m.
    pub fn attenuation_db_per_m(&self, frequency_hz: f64) -> Result<f64, BudgetError> {
        let (lo, hi) = self.frequency_range();
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(BudgetError::Domain(format!("frequency {frequency_hz} must be positive")));
        }
        if (frequency_hz < lo || frequency_hz > hi) && !self.allow_extrapolation {
            return Err(BudgetError::CurveRange {
                material: self.material.clone(),
                frequency_hz,
                min_hz: lo,
                max_hz: hi,
            });
        }
        if let Some(a) = self.anchors.iter().find(|a| a.frequency_hz == frequency_hz) {
            return Ok(a.attenuation_db_per_m);
        }
        if self.anchors.len() == 1 {
            return Ok(self.anchors[0].attenuation_db_per_m);
        }
        let k = self
            .anchors
            .windows(2)
            .position(|w| frequency_hz < w[1].frequency_hz)
            .unwrap_or(self.anchors.len() - 2);
        let (a, b) = (self.anchors[k], self.anchors[k + 1]);
        let t = (frequency_hz.ln() - a.frequency_hz.ln()) / (b.frequency_hz.ln() - a.frequency_hz.ln());
        let ln = a.attenuation_db_per_m.ln() + t * (b.attenuation_db_per_m.ln() - a.attenuation_db_per_m.ln());
        Ok(ln.exp())
    }

    /// Attenuation at `frequency_hz`, dB/cm.
    pub fn attenuation_db_per_cm(&self, frequency_hz: f64) -> Result<f64, BudgetError> {
        Ok(self.attenuation_db_per_m(frequency_hz)? / 100.0)
    }
}

/// Eccosorb CR-110 type material.
pub fn cr110() -> AttenuationCurve {
    // Pass-band anchor: 0.5 dB over 20 mm at 5 GHz.
    AttenuationCurve::from_db_per_cm("CR-110", &[(5e9, 0.25), (100e9, 5.4), (1e12, 90.0)])
        .expect("valid anchors")
}

/// Eccosorb CR-124 type material: low loss up to 500 MHz, high in the
/// qubit band.
pub fn cr124() -> AttenuationCurve {
    AttenuationCurve::from_db_per_cm("CR-124", &[(500e6, 0.5), (5e9, 40.0)]).expect("valid anchors")
}

/// Built-in curve by (case-insensitive) name.
pub fn builtin_curve(name: &str) -> Option<AttenuationCurve> {
    match name.trim().to_ascii_uppercase().replace(['_', ' '], "-").as_str() {
        "CR-110" | "CR110" => Some(cr110()),
        "CR-124" | "CR124" => Some(cr124()),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FilterSizing {
    Feasible {
        length_m: f64,
        #[serde(rename = "achieved_block_dB")]
        achieved_block_db: f64,
        #[serde(rename = "insertion_dB")]
        insertion_db: f64,
    },
    Infeasible {
        required_length_m: f64,
        #[serde(rename = "insertion_dB")]
        insertion_db: f64,
        #[serde(rename = "max_insertion_dB")]
        max_insertion_db: f64,
    },
}

impl FilterSizing {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FilterSizing::Feasible { .. })
    }

    pub fn length_m(&self) -> f64 {
        match *self {
            FilterSizing::Feasible { length_m, .. } => length_m,
            FilterSizing::Infeasible { required_length_m, .. } => required_length_m,
        }
    }
}

/// Shortest filter reaching `block_atten_db` at `block_freq_hz`, checked
/// against the insertion-loss cap at `pass_freq_hz`.
pub fn filter_length(
    curve: &AttenuationCurve,
    block_freq_hz: f64,
    block_atten_db: f64,
    pass_freq_hz: f64,
    max_insertion_db: f64,
) -> Result<FilterSizing, BudgetError> {
    curve.check()?;
    if !(block_freq_hz > pass_freq_hz) {
        return Err(BudgetError::Domain(format!(
            "block frequency {block_freq_hz} Hz must exceed pass frequency {pass_freq_hz} Hz"
        )));
    }
    if !(block_atten_db >= 0.0 && block_atten_db.is_finite()) {
        return Err(BudgetError::Domain(format!("block attenuation {block_atten_db} dB must be >= 0")));
    }
    if !(max_insertion_db >= 0.0) {
        return Err(BudgetError::Domain(format!("insertion cap {max_insertion_db} dB must be >= 0")));
    }
    let alpha_block = curve.attenuation_db_per_m(block_freq_hz)?;
    let alpha_pass = curve.attenuation_db_per_m(pass_freq_hz)?;
    let mut length = block_atten_db / alpha_block;
    while alpha_block * length < block_atten_db {
        length = length.next_up();
    }
    let insertion = alpha_pass * length;
    if insertion > max_insertion_db {
        return Ok(FilterSizing::Infeasible {
            required_length_m: length,
            insertion_db: insertion,
            max_insertion_db,
        });
    }
    Ok(FilterSizing::Feasible {
        length_m: length,
        achieved_block_db: alpha_block * length,
        insertion_db: insertion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn anchors_are_exact() {
        let c = cr110();
        assert_eq!(c.attenuation_db_per_cm(100e9).unwrap(), 5.4);
        assert_eq!(c.attenuation_db_per_cm(1e12).unwrap(), 90.0);
        assert_eq!(c.attenuation_db_per_cm(5e9).unwrap(), 0.25);
    }

    #[test]
    fn pass_band_datum() {
        // 20 mm at 5 GHz.
        assert_relative_eq!(cr110().attenuation_db_per_m(5e9).unwrap() * 0.02, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn log_log_midpoint() {
        let c = cr110();
        let f = (100e9f64 * 1e12).sqrt();
        assert_relative_eq!(c.attenuation_db_per_cm(f).unwrap(), (5.4f64 * 90.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn extrapolation_needs_opt_in() {
        let c = cr110();
        assert!(matches!(c.attenuation_db_per_m(2e12), Err(BudgetError::CurveRange { .. })));
        assert!(matches!(c.attenuation_db_per_m(1e9), Err(BudgetError::CurveRange { .. })));
        let open = c.with_extrapolation(true);
        let above = open.attenuation_db_per_cm(2e12).unwrap();
        assert!(above > 90.0);
    }

    #[test]
    fn bad_anchors_rejected() {
        assert!(AttenuationCurve::from_db_per_cm("x", &[(2.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(AttenuationCurve::from_db_per_cm("x", &[(1.0, 0.0)]).is_err());
        assert!(AttenuationCurve::from_db_per_cm("x", &[]).is_err());
    }

    #[test]
    fn sizing_examples() {
        let c = cr110();
        let s = filter_length(&c, 100e9, 20.0, 5e9, 1.0).unwrap();
        let FilterSizing::Feasible { length_m, insertion_db, achieved_block_db } = s else {
            panic!("expected feasible, got {s:?}");
        };
        // 20 / 5.4 cm, and 0.25 dB/cm over it.
        assert_relative_eq!(length_m, 0.20 / 5.4 * 1.0, max_relative = 1e-12);
        assert_relative_eq!(insertion_db, 0.25 * 20.0 / 5.4, max_relative = 1e-12);
        assert!(achieved_block_db >= 20.0);
        assert!((length_m * 100.0 - 3.71).abs() < 0.01);
        assert!((insertion_db - 0.93).abs() < 0.01);

        let zero = filter_length(&c, 100e9, 0.0, 5e9, 1.0).unwrap();
        assert_eq!(zero, FilterSizing::Feasible { length_m: 0.0, achieved_block_db: 0.0, insertion_db: 0.0 });

        let tight = filter_length(&c, 100e9, 20.0, 5e9, 0.1).unwrap();
        assert!(!tight.is_feasible());
    }

    #[test]
    fn sizing_rejects_inverted_bands() {
        assert!(filter_length(&cr110(), 5e9, 20.0, 100e9, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn sizing_monotone_and_sufficient(a in 0.0f64..200.0, b in 0.0f64..200.0, f in 5.0e9f64..1e12) {
            let c = cr110();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s1 = filter_length(&c, f.max(5.1e9), lo, 5e9, f64::INFINITY).unwrap();
            let s2 = filter_length(&c, f.max(5.1e9), hi, 5e9, f64::INFINITY).unwrap();
            prop_assert!(s1.length_m() <= s2.length_m());
            if let FilterSizing::Feasible { achieved_block_db, .. } = s2 {
                prop_assert!(achieved_block_db >= hi);
            }
        }

        #[test]
        fn interpolation_monotone_between_monotone_anchors(f1 in 5e9f64..1e12, f2 in 5e9f64..1e12) {
            let c = cr110();
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            prop_assert!(c.attenuation_db_per_m(lo).unwrap() <= c.attenuation_db_per_m(hi).unwrap());
        }
    }
}
