use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One named, unit-tagged column of an array output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Self { name: name.to_string(), unit: unit.to_string(), values }
    }
}

/// Table of equally long columns; the first column is the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayOutput {
    pub name: String,
    pub columns: Vec<Column>,
}

impl ArrayOutput {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        debug_assert!(columns.windows(2).all(|w| w[0].values.len() == w[1].values.len()));
        Self { name: name.to_string(), columns }
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginRecord {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub good: bool,
}

/// Event of a classical trajectory, flattened for export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: String,
    pub param: f64,
    /// Location of the crossed point or reflecting jump.
    pub at: Option<f64>,
    /// +1 for a rightward crossing, −1 for leftward.
    pub direction: Option<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub axis: String,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact_version: String,
    pub kind: String,
    pub grids: Vec<GridRecord>,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub conventions: Vec<String>,
    pub warnings: Vec<String>,
    /// The validated scenario, defaults filled in.
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub id: String,
    pub summary: BTreeMap<String, f64>,
    pub margins: Vec<MarginRecord>,
    pub arrays: Vec<ArrayOutput>,
    pub events: Vec<EventRecord>,
    pub provenance: Provenance,
}

impl RunResult {
    pub fn array(&self, name: &str) -> Option<&ArrayOutput> {
        self.arrays.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    /// `None` where a member run did not report that summary entry.
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub id: String,
    pub parameters: Vec<String>,
    pub runs: Vec<RunResult>,
    pub table: SweepTable,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.table.columns.iter().position(|c| c == name)?;
        Some(self.table.rows.iter().map(|r| r[i]).collect())
    }
}
