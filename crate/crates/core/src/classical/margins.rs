use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default cut below which a `≪ 1` condition counts as satisfied.
pub const DEFAULT_GOOD_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub good: bool,
}

/// Inputs for the good-measurement conditions. Each margin is evaluated when
/// all of its inputs are present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginInputs {
    /// `g·ΔP_y0/(m·C1)`.
    pub approximate: Option<ApproximateInputs>,
    /// `A·P_y0·g/(m·C)`.
    pub observable: Option<ObservableInputs>,
    /// `Δy·ΔP_y0 / (√C·m·x0·ΔA/A)`.
    pub pointer_product: Option<PointerProductInputs>,
    /// `g·z0`.
    pub coupling_position: Option<CouplingPositionInputs>,
    /// `Δz·ΔP_z / (x0·H)`.
    pub energy_duration: Option<EnergyDurationInputs>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximateInputs {
    pub g: f64,
    pub delta_p_y0: f64,
    pub mass: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableInputs {
    pub a: f64,
    pub p_y0: f64,
    pub g: f64,
    pub mass: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerProductInputs {
    pub delta_y: f64,
    pub delta_p_y0: f64,
    /// `√C·m·x0·ΔA/A`.
    pub resolution_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingPositionInputs {
    pub g: f64,
    pub z0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyDurationInputs {
    pub delta_z: f64,
    pub delta_p_z: f64,
    pub x0: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementReport {
    pub record: Option<f64>,
    pub margins: Vec<Margin>,
    pub conventions: Vec<String>,
}

impl MeasurementReport {
    pub fn all_good(&self) -> bool {
        self.margins.iter().all(|m| m.good)
    }
}

fn ratio(name: &'static str, num: f64, den: f64, threshold: f64) -> Result<Margin> {
    if den == 0.0 {
        return Err(LabError::UndefinedMargin { name });
    }
    if !num.is_finite() || !den.is_finite() {
        return Err(LabError::config("margins", format!("non-finite input to `{name}`")));
    }
    let value = (num / den).abs();
    Ok(Margin { name, value, threshold, good: value < threshold })
}

pub fn approximate_margin(i: &ApproximateInputs, threshold: f64) -> Result<Margin> {
    ratio("approximately_good", i.g * i.delta_p_y0, i.mass * i.c1, threshold)
}

pub fn observable_margin(i: &ObservableInputs, threshold: f64) -> Result<Margin> {
    ratio("observable_good", i.a * i.p_y0 * i.g, i.mass * i.c, threshold)
}

pub fn pointer_product_margin(i: &PointerProductInputs, threshold: f64) -> Result<Margin> {
    ratio("pointer_uncertainty", i.delta_y * i.delta_p_y0, i.resolution_scale, threshold)
}

pub fn coupling_position_margin(i: &CouplingPositionInputs, threshold: f64) -> Result<Margin> {
    ratio("coupling_position", i.g * i.z0, 1.0, threshold)
}

pub fn energy_duration_margin(i: &EnergyDurationInputs, threshold: f64) -> Result<Margin> {
    ratio("energy_duration", i.delta_z * i.delta_p_z, i.x0 * i.energy, threshold)
}

/// Evaluates every margin whose inputs are present.
pub fn measurement_margins(inputs: &MarginInputs, threshold: f64) -> Result<Vec<Margin>> {
    if !(threshold > 0.0) {
        return Err(LabError::config("threshold", format!("must be positive, got {threshold}")));
    }
    let mut out = Vec::new();
    if let Some(i) = &inputs.approximate {
        out.push(approximate_margin(i, threshold)?);
    }
    if let Some(i) = &inputs.observable {
        out.push(observable_margin(i, threshold)?);
    }
    if let Some(i) = &inputs.pointer_product {
        out.push(pointer_product_margin(i, threshold)?);
    }
    if let Some(i) = &inputs.coupling_position {
        out.push(coupling_position_margin(i, threshold)?);
    }
    if let Some(i) = &inputs.energy_duration {
        out.push(energy_duration_margin(i, threshold)?);
    }
    Ok(out)
}
