//! Cartesian-product sweeps over scenario parameters.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde_json::Value;

use crate::config::{ScenarioConfig, SweepConfig};
use crate::error::{ReportError, Result};
use crate::result::{SweepResult, SweepTable};
use crate::run::run_scenario;

/// One point of the sweep: axis values and the scenario they produce.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub config: ScenarioConfig,
}

fn set_path(doc: &mut Value, path: &str, value: f64) -> std::result::Result<(), String> {
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => match map.get_mut(*part) {
                Some(next) => next,
                None => return Err(format!("unknown parameter `{path}`")),
            },
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| format!("`{part}` in `{path}` is not an index"))?;
                items.get_mut(idx).ok_or_else(|| format!("index {idx} out of range in `{path}`"))?
            }
            _ => return Err(format!("`{path}` descends into a scalar")),
        };
        if last {
            if !(node.is_number() || node.is_null()) {
                return Err(format!("`{path}` is not a numeric parameter"));
            }
            *node = serde_json::Number::from_f64(value)
                .map(Value::Number)
                .ok_or_else(|| format!("non-finite value for `{path}`"))?;
        }
    }
    Ok(())
}

/// Expands a sweep into its member scenarios, ordered by axis values.
pub fn expand(sweep: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if sweep.axes.is_empty() {
        return Err(ReportError::config("axes", "a sweep needs at least one axis"));
    }
    let mut seen = BTreeSet::new();
    for axis in &sweep.axes {
        if !seen.insert(axis.parameter.as_str()) {
            return Err(ReportError::config("axes", format!("parameter `{}` appears twice", axis.parameter)));
        }
        if axis.values.is_empty() {
            return Err(ReportError::config("axes", format!("axis `{}` has no values", axis.parameter)));
        }
    }
    let base = serde_json::to_value(&*sweep.base).expect("scenario configs serialize");
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &sweep.axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    combos.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    let id = sweep.id.clone().unwrap_or_else(|| "sweep".to_string());
    combos
        .into_iter()
        .enumerate()
        .map(|(k, values)| {
            let mut doc = base.clone();
            for (axis, &v) in sweep.axes.iter().zip(&values) {
                set_path(&mut doc, &axis.parameter, v).map_err(|reason| ReportError::config("axes", reason))?;
            }
            let mut config: ScenarioConfig = serde_json::from_value(doc).map_err(|e| {
                let inner = ReportError::from_json(&e);
                ReportError::config("axes", format!("swept scenario is invalid: {inner}"))
            })?;
            config.set_id(format!("{id}_{k:03}"));
            config.validate()?;
            Ok(SweepPoint { values, config })
        })
        .collect()
}

/// Runs every member concurrently and assembles the combined table, whose
/// leading columns are the swept parameters.
pub fn sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    let ScenarioConfig::Sweep(s) = config else {
        return Err(ReportError::config("kind", format!("expected a sweep, got `{}`", config.kind())));
    };
    config.validate()?;
    let points = expand(s)?;
    let runs = points.par_iter().map(|p| run_scenario(&p.config)).collect::<Result<Vec<_>>>()?;
    let parameters: Vec<String> = s.axes.iter().map(|a| a.parameter.clone()).collect();
    let keys: BTreeSet<&String> =
        runs.iter().flat_map(|r| r.summary.keys()).filter(|k| !parameters.contains(k)).collect();
    let mut columns = parameters.clone();
    columns.extend(keys.iter().map(|k| k.to_string()));
    let rows = points
        .iter()
        .zip(&runs)
        .map(|(p, r)| {
            let mut row: Vec<Option<f64>> = p.values.iter().copied().map(Some).collect();
            row.extend(keys.iter().map(|k| r.summary.get(*k).copied()));
            row
        })
        .collect();
    Ok(SweepResult { id: config.id(), parameters, runs, table: SweepTable { columns, rows } })
}
