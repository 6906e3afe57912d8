//! JSON formats for instances and solutions. Every file carries
//! `"schemaVersion": 1`; readers accept a missing version as 1.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cvrp::{HvrpSolution, Trip};
use crate::error::InputError;
use crate::instance::{Fleet, HvrpInstance, Metric, Vertex};
use crate::pipeline::HtspSolution;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk instance: exactly one of `points` (Euclidean, depot first) or
/// `matrix`, plus speeds and optional capacity data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub speeds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<u64>>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A validated instance; `hvrp` is present when the file has a capacity.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub metric: Metric,
    pub fleet: Fleet,
    pub hvrp: Option<HvrpInstance>,
}

impl InstanceFile {
    pub fn load(&self) -> Result<LoadedInstance, InputError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(InputError::SchemaVersion(self.schema_version));
        }
        let metric = match (&self.points, &self.matrix) {
            (Some(p), None) => Metric::from_points(p)?,
            (None, Some(m)) => Metric::validate(m)?,
            _ => return Err(InputError::MetricSource),
        };
        let fleet = Fleet::round(&self.speeds)?;
        let hvrp = match (self.capacity, &self.demands) {
            (Some(q), demands) => {
                let demands = demands.clone().unwrap_or_else(|| vec![0; metric.n()]);
                Some(HvrpInstance::new(metric.clone(), fleet.clone(), q, demands)?)
            }
            (None, Some(_)) => return Err(InputError::MissingCapacity),
            (None, None) => None,
        };
        Ok(LoadedInstance { metric, fleet, hvrp })
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        to_pretty(&serde_json::to_value(self).expect("instance serializes"))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn htsp_solution_json(sol: &HtspSolution) -> Value {
    json!({
        "schemaVersion": SCHEMA_VERSION,
        "makespan": sol.makespan,
        "acceptedM": sol.accepted_m,
        "tours": sol.tours,
        "diagnostics": sol.diagnostics,
    })
}

pub fn hvrp_solution_json(sol: &HvrpSolution) -> Value {
    let trips: Vec<&Vec<Trip>> = sol.vehicles.iter().map(|v| &v.trips).collect();
    let ratios: Vec<f64> = sol.vehicles.iter().map(|v| v.conversion_ratio()).collect();
    json!({
        "schemaVersion": SCHEMA_VERSION,
        "makespan": sol.makespan,
        "acceptedM": sol.accepted_m,
        "tours": sol.tours,
        "trips": trips,
        "htspMakespan": sol.htsp.makespan,
        "conversionRatios": ratios,
        "diagnostics": sol.htsp.diagnostics,
    })
}

/// The parts of a solution file the verifier reads.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub makespan: f64,
    pub tours: Vec<Vec<Vertex>>,
    #[serde(default)]
    pub trips: Option<Vec<Vec<Trip>>>,
}

impl SolutionFile {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        let file: Self = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(InputError::SchemaVersion(file.schema_version));
        }
        Ok(file)
    }
}
