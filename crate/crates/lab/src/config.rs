//! Experiment configuration files.
//!
//! Configs are JSON. Unknown keys are rejected and every diagnostic names
//! the offending path, e.g. `modules.carlitz.phi_t[0]`.

use std::collections::BTreeMap;
use std::path::Path;

use drinfeld_core::{DrinfeldModule, FiniteField, Poly, PrimeIdeal};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub field: FieldConfig,
    pub modules: BTreeMap<String, ModuleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PointsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_density: Option<TorsionDensityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportConfig>,
    #[serde(default)]
    pub options: OptionsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u64,
    #[serde(default = "one")]
    pub m: usize,
    /// Monic irreducible in `u` over `F_p`, e.g. `"u^2+u+1"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleConfig {
    /// Coefficients of `phi_t` in ascending powers of `tau`.
    pub phi_t: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub module: String,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub components: Vec<Component>,
    pub point: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<Vec<String>>,
}

/// Points of a single module, for `order` and `detect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsConfig {
    pub module: String,
    pub points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub prime: String,
    pub families: Vec<PointsConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionDensityConfig {
    pub module: String,
    pub point: String,
    pub torsion: String,
    pub prime: String,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    pub w: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub module: String,
    pub p: String,
    pub q: String,
    pub w1: String,
    pub w2: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Largest extension degree tried by `torsion-density`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<String>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A config with its field and modules built.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: Config,
    pub field: FiniteField,
    pub modules: BTreeMap<String, DrinfeldModule>,
}

impl Context {
    pub fn new(config: Config) -> Result<Self, LabError> {
        let field = build_field(&config.field)?;
        if config.modules.is_empty() {
            return Err(LabError::config("modules", "at least one module is required"));
        }
        let mut modules = BTreeMap::new();
        for (name, m) in &config.modules {
            let path = format!("modules.{name}.phi_t");
            let coeffs: Vec<&str> = m.phi_t.iter().map(String::as_str).collect();
            let module = DrinfeldModule::parse(&field, &coeffs).map_err(|e| LabError::config(path, e.to_string()))?;
            modules.insert(name.clone(), module);
        }
        Ok(Context { config, field, modules })
    }

    pub fn module(&self, path: &str, name: &str) -> Result<&DrinfeldModule, LabError> {
        self.modules
            .get(name)
            .ok_or_else(|| LabError::config(path, format!("unknown module {name:?}")))
    }

    pub fn poly(&self, path: &str, s: &str) -> Result<Poly, LabError> {
        Poly::parse(&self.field, s).map_err(|e| LabError::config(path, e.to_string()))
    }

    pub fn polys(&self, path: &str, s: &[String]) -> Result<Vec<Poly>, LabError> {
        s.iter()
            .enumerate()
            .map(|(i, x)| self.poly(&format!("{path}[{i}]"), x))
            .collect()
    }

    pub fn prime(&self, path: &str, s: &str) -> Result<PrimeIdeal, LabError> {
        PrimeIdeal::parse(&self.field, s).map_err(|e| LabError::config(path, e.to_string()))
    }
}

pub fn build_field(fc: &FieldConfig) -> Result<FiniteField, LabError> {
    let field = match &fc.modulus {
        None => FiniteField::new(fc.p, fc.m).map_err(|e| LabError::config("field", e.to_string()))?,
        Some(text) => {
            let fp = FiniteField::prime(fc.p).map_err(|e| LabError::config("field.p", e.to_string()))?;
            let poly = Poly::parse(&fp, &text.replace('u', "t"))
                .map_err(|e| LabError::config("field.modulus", e.to_string()))?;
            let coeffs: Vec<u64> = poly.coeffs().iter().map(|c| c.index()).collect();
            FiniteField::with_modulus(fc.p, &coeffs).map_err(|e| LabError::config("field.modulus", e.to_string()))?
        }
    };
    if field.degree() != fc.m {
        return Err(LabError::config(
            "field.m",
            format!("modulus has degree {}, expected {}", field.degree(), fc.m),
        ));
    }
    Ok(field)
}
