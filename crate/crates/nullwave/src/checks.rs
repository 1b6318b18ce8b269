//! File front ends of the null and admissible-boundary checkers.

use std::path::Path;

use nullwave_core::nullform::{check_admissible, check_null, ConditionVerdict, Witness, DEFAULT_SAMPLES, DEFAULT_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::config::{NonlinearityConfig, ObstacleConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub condition: String,
    pub holds: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessReport {
    /// Covector on the light cone where a symbol does not vanish.
    NullCone { omega: [f64; 4], residual: f64 },
    /// Surface point with tangential `p`, `q` where `Q(p) nu q` does not
    /// vanish.
    Tangent { point: [f64; 3], normal: [f64; 3], p: [f64; 4], q: [f64; 4], residual: f64 },
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        match *w {
            Witness::NullCone { omega, residual } => WitnessReport::NullCone { omega, residual },
            Witness::Tangent { point, normal, p, q, residual } => WitnessReport::Tangent { point, normal, p, q, residual },
        }
    }
}

fn report(condition: &str, v: &ConditionVerdict) -> CheckReport {
    CheckReport {
        condition: condition.to_owned(),
        holds: v.holds,
        max_residual: v.max_residual,
        tolerance: DEFAULT_TOLERANCE,
        samples: v.samples,
        witness: v.witness.as_ref().map(WitnessReport::from),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, field: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { field.to_owned() } else { format!("{field}.{path}") };
        CliError::config(field, format!("is malformed: {}", e.inner()))
    })
}

pub fn read_nonlinearity(path: &Path) -> Result<NonlinearityConfig> {
    read_json(path, "nonlinearity")
}

pub fn read_obstacle(path: &Path) -> Result<ObstacleConfig> {
    read_json(path, "obstacle")
}

pub fn null_check(spec: &NonlinearityConfig) -> Result<CheckReport> {
    Ok(report("null", &check_null(&spec.spec()?, DEFAULT_TOLERANCE, DEFAULT_SAMPLES)))
}

pub fn admissible_check(spec: &NonlinearityConfig, obstacle: &ObstacleConfig) -> Result<CheckReport> {
    let shape = obstacle.shape()?;
    Ok(report("admissible", &check_admissible(&spec.spec()?, &shape, DEFAULT_TOLERANCE, DEFAULT_SAMPLES)))
}
