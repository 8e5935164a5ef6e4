//! Material records and the built-in constant table.
//!
//! Properties are single fixed values; there is no temperature dependence.
//! Values the source literature leaves blank are stored as `None` rather
//! than guessed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::{SUPERCONDUCTOR_MU_R, SUPERCONDUCTOR_MU_R_COARSE};

/// Physical constants of one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub name: String,
    /// Electrical resistivity, ohm m.
    #[serde(default, rename = "resistivity_ohm_m", skip_serializing_if = "Option::is_none")]
    pub resistivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_permeability: Option<f64>,
    /// Infrared absorption coefficient A in [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption: Option<f64>,
    #[serde(default)]
    pub superconducting: bool,
    /// Informational only, W m^-1 K^-1 at 4 K.
    #[serde(
        default,
        rename = "thermal_conductivity_W_per_m_K",
        skip_serializing_if = "Option::is_none"
    )]
    pub thermal_conductivity: Option<f64>,
}

impl MaterialRecord {
    fn new(name: &str) -> Self {
        MaterialRecord {
            name: name.to_string(),
            resistivity: None,
            relative_permeability: None,
            absorption: None,
            superconducting: false,
            thermal_conductivity: None,
        }
    }

    /// Relative permeability seen by the magnetostatic solver.
    ///
    /// Superconductors are replaced by `superconductor_mu_r`, or by
    /// [`SUPERCONDUCTOR_MU_R`] when none is given, whatever the table says.
    pub fn magnetostatic_mu_r(&self, superconductor_mu_r: Option<f64>) -> Option<f64> {
        if self.superconducting {
            Some(superconductor_mu_r.unwrap_or(SUPERCONDUCTOR_MU_R))
        } else {
            self.relative_permeability
        }
    }
}

/// The built-in material table.
pub fn builtin_materials() -> Vec<MaterialRecord> {
    vec![
        MaterialRecord {
            absorption: Some(0.00008),
            relative_permeability: Some(1.0),
            ..MaterialRecord::new("silicon")
        },
        MaterialRecord {
            absorption: Some(0.0012),
            relative_permeability: Some(1.0),
            superconducting: true,
            thermal_conductivity: Some(3000.0),
            ..MaterialRecord::new("aluminum")
        },
        MaterialRecord {
            absorption: Some(0.005),
            resistivity: Some(1.68e-8),
            relative_permeability: Some(1.0),
            thermal_conductivity: Some(15000.0),
            ..MaterialRecord::new("copper")
        },
        MaterialRecord {
            absorption: Some(0.9),
            ..MaterialRecord::new("absorptive-coating")
        },
        MaterialRecord {
            relative_permeability: Some(70_000.0),
            ..MaterialRecord::new("mu-metal")
        },
        MaterialRecord {
            relative_permeability: Some(SUPERCONDUCTOR_MU_R_COARSE),
            superconducting: true,
            ..MaterialRecord::new("superconductor")
        },
        // Permeability not published.
        MaterialRecord::new("cryophy"),
    ]
}

fn normalize(name: &str) -> String {
    name.trim()
        .to_ascii_lowercase()
        .replace(['_', ' '], "-")
        .replace("μ", "mu")
}

#[derive(Debug, thiserror::Error)]
pub enum MaterialError {
    #[error("unknown material `{0}`")]
    Unknown(String),
    #[error("material file: {0}")]
    Parse(String),
    #[error("material `{name}`: {problem}")]
    Invalid { name: String, problem: String },
}

#[derive(Debug, Deserialize, Serialize)]
struct MaterialFile {
    #[serde(default)]
    material: Vec<MaterialRecord>,
}

/// Name-indexed material lookup. Names are matched case-insensitively with
/// `_` and spaces treated as `-`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDb {
    records: BTreeMap<String, MaterialRecord>,
}

impl Default for MaterialDb {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MaterialDb {
    pub fn builtin() -> Self {
        let mut db = MaterialDb {
            records: BTreeMap::new(),
        };
        for record in builtin_materials() {
            db.insert(record);
        }
        db
    }

    pub fn insert(&mut self, record: MaterialRecord) {
        self.records.insert(normalize(&record.name), record);
    }

    pub fn get(&self, name: &str) -> Result<&MaterialRecord, MaterialError> {
        self.records
            .get(&normalize(name))
            .ok_or_else(|| MaterialError::Unknown(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialRecord> {
        self.records.values()
    }

    /// Parses a `[[material]]` TOML table list.
    pub fn parse_records(text: &str) -> Result<Vec<MaterialRecord>, MaterialError> {
        let file: MaterialFile =
            toml::from_str(text).map_err(|e| MaterialError::Parse(e.message().to_string()))?;
        for record in &file.material {
            check_record(record)?;
        }
        Ok(file.material)
    }

    /// Built-in table overlaid with the records in `text`; entries with the
    /// same name replace the built-in ones.
    pub fn with_overrides(text: &str) -> Result<Self, MaterialError> {
        let mut db = Self::builtin();
        for record in Self::parse_records(text)? {
            db.insert(record);
        }
        Ok(db)
    }

    pub fn to_toml(&self) -> String {
        let file = MaterialFile {
            material: self.records.values().cloned().collect(),
        };
        toml::to_string(&file).expect("material table is always serializable")
    }
}

fn check_record(record: &MaterialRecord) -> Result<(), MaterialError> {
    let invalid = |problem: &str| MaterialError::Invalid {
        name: record.name.clone(),
        problem: problem.to_string(),
    };
    if record.name.trim().is_empty() {
        return Err(invalid("empty name"));
    }
    if let Some(a) = record.absorption {
        if !(0.0..=1.0).contains(&a) {
            return Err(invalid("absorption outside [0, 1]"));
        }
    }
    if let Some(mu) = record.relative_permeability {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("relative permeability must be positive"));
        }
    }
    if let Some(rho) = record.resistivity {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid("resistivity must be positive"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_constants() {
        let db = MaterialDb::builtin();
        assert_eq!(db.get("silicon").unwrap().absorption, Some(0.00008));
        assert_eq!(db.get("aluminum").unwrap().absorption, Some(0.0012));
        assert_eq!(db.get("copper").unwrap().absorption, Some(0.005));
        assert_eq!(db.get("copper").unwrap().resistivity, Some(1.68e-8));
        assert_eq!(db.get("absorptive coating").unwrap().absorption, Some(0.9));
        assert_eq!(
            db.get("mu-metal").unwrap().relative_permeability,
            Some(70_000.0)
        );
        assert_eq!(db.get("μ-metal").unwrap().relative_permeability, Some(70_000.0));
        assert_eq!(
            db.get("superconductor").unwrap().relative_permeability,
            Some(1e-6)
        );
        assert_eq!(db.get("Cryophy").unwrap().relative_permeability, None);
        assert!(matches!(db.get("unobtainium"), Err(MaterialError::Unknown(_))));
    }

    #[test]
    fn superconductor_proxy_and_override() {
        let db = MaterialDb::builtin();
        let al = db.get("aluminum").unwrap();
        assert_eq!(al.magnetostatic_mu_r(None), Some(1e-9));
        let sc = db.get("superconductor").unwrap();
        assert_eq!(sc.magnetostatic_mu_r(None), Some(1e-9));
        assert_eq!(al.magnetostatic_mu_r(Some(1e-3)), Some(1e-3));
        let cu = db.get("copper").unwrap();
        assert_eq!(cu.magnetostatic_mu_r(Some(1e-3)), Some(1.0));
    }

    #[test]
    fn table_round_trips_through_toml() {
        let db = MaterialDb::builtin();
        let text = db.to_toml();
        let back = MaterialDb::with_overrides(&text).unwrap();
        assert_eq!(back, db);
        for record in builtin_materials() {
            let one = toml::to_string(&record).unwrap();
            let parsed: MaterialRecord = toml::from_str(&one).unwrap();
            assert_eq!(parsed, record);
        }
    }

    #[test]
    fn overrides_replace_by_name() {
        let db = MaterialDb::with_overrides(
            "[[material]]\nname = \"Mu_Metal\"\nrelative_permeability = 100000.0\n",
        )
        .unwrap();
        assert_eq!(
            db.get("mu-metal").unwrap().relative_permeability,
            Some(100_000.0)
        );
        let bad = MaterialDb::with_overrides("[[material]]\nname = \"x\"\nabsorption = 1.5\n");
        assert!(matches!(bad, Err(MaterialError::Invalid { .. })));
    }
}
