//! Scenario files: one JSON object with a top-level `kind`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use timelab_core::classical::{
    CouplingFunction, MarginInputs, Method, PairLabel, ScenarioModel, SystemHamiltonian, DEFAULT_GOOD_THRESHOLD,
};
use timelab_core::quantum::KickObservable;

use crate::error::{ReportError, Result};

pub const DEFAULT_N_POINTS: usize = 4096;
pub const DEFAULT_N_T: usize = 2048;
pub const DEFAULT_CURVE_SAMPLES: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Gaussian `exp(−(x−x0)²/(4σ²) + i p0 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerConfig {
    #[serde(default)]
    pub z0: f64,
    pub width: f64,
}

fn default_n_points() -> usize {
    DEFAULT_N_POINTS
}

fn default_n_t() -> usize {
    DEFAULT_N_T
}

fn default_threshold() -> f64 {
    DEFAULT_GOOD_THRESHOLD
}

fn default_curve_samples() -> usize {
    DEFAULT_CURVE_SAMPLES
}

fn default_method() -> Method {
    Method::EventRk4
}

/// Fields every kind accepts.
macro_rules! common_fields {
    ($(#[$meta:meta])* pub struct $name:ident { $($body:tt)* }) => {
        $(#[$meta])*
        pub struct $name {
            /// Scenario id; defaults to the kind name.
            #[serde(default)]
            pub id: Option<String>,
            #[serde(default)]
            pub output: OutputConfig,
            /// Extra good-measurement conditions to evaluate.
            #[serde(default)]
            pub margins: MarginInputs,
            /// Cut below which a margin counts as good.
            #[serde(default = "default_threshold")]
            pub threshold: f64,
            $($body)*
        }
    };
}

common_fields! {
    /// POVM arrival-time density of a Gaussian.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ArrivalPovmConfig {
        pub m: f64,
        pub particle: PacketConfig,
        pub grid: GridConfig,
        /// Defaults to the classical estimate ± 10 spreads.
        #[serde(default)]
        pub t_range: Option<(f64, f64)>,
        #[serde(default = "default_n_t")]
        pub n_t: usize,
        /// Reference time of the second moment; defaults to the mean.
        #[serde(default)]
        pub t_ref: Option<f64>,
    }
}

common_fields! {
    /// Two-body Θ(−x) clock with a Gaussian pointer.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ThetaQuantumConfig {
        pub m: f64,
        pub particle: PacketConfig,
        pub pointer_width: f64,
        #[serde(default)]
        pub pointer_z0: f64,
        #[serde(default)]
        pub pointer_mass: Option<f64>,
        pub grid_x: GridConfig,
        pub grid_z: GridConfig,
        /// Defaults to half the kinetic step limit of `grid_x`.
        #[serde(default)]
        pub dt: Option<f64>,
        pub t_final: f64,
    }
}

common_fields! {
    /// Free packet absorbed by `−iVΘ(x)`.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct AllcockConfig {
        pub m: f64,
        pub particle: PacketConfig,
        pub grid: GridConfig,
        pub v: f64,
        #[serde(default)]
        pub dt: Option<f64>,
        pub t_final: f64,
    }
}

common_fields! {
    /// Impulsive von Neumann measurement on a superposition of packets.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct KickConfig {
        /// Packets superposed with equal amplitudes, then normalized.
        pub system: Vec<PacketConfig>,
        pub pointer: PointerConfig,
        pub grid_x: GridConfig,
        pub grid_z: GridConfig,
        pub lambda: f64,
        pub observable: KickObservable,
    }
}

common_fields! {
    /// Integration of one of the classical clock models.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ClassicalConfig {
        pub model: ScenarioModel,
        /// Initial `[coordinate, momentum]` per canonical pair.
        pub start: std::collections::BTreeMap<PairLabel, [f64; 2]>,
        pub span: (f64, f64),
        pub dt: f64,
        #[serde(default = "default_method")]
        pub method: Method,
    }
}

common_fields! {
    /// Θ-clock pointer record.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ThetaRecordConfig {
        pub m: f64,
        pub x0: f64,
        pub p_x0: f64,
        #[serde(default)]
        pub p_y0: f64,
        #[serde(default)]
        pub pointer_mass: Option<f64>,
        /// Pointer momentum spread, enabling the approximate-goodness margin.
        #[serde(default)]
        pub delta_p_y0: Option<f64>,
    }
}

common_fields! {
    /// Pointer momentum transfer of the linear energy clock.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct TotalEnergyIdealConfig {
        pub h_box: f64,
        pub p_x: f64,
        pub coupling: CouplingFunction,
        pub z0: f64,
        pub x_range: (f64, f64),
    }
}

common_fields! {
    /// Pointer momentum transfer of the quadratic energy clock.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct TotalEnergyRealConfig {
        pub m: f64,
        pub h_box: f64,
        pub p_x: f64,
        pub coupling: CouplingFunction,
        pub z0: f64,
        pub x_range: (f64, f64),
    }
}

common_fields! {
    /// Internal-time map and pointer curve of the general coupling.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct InternalTimeConfig {
        pub m: f64,
        pub coupling: CouplingFunction,
        /// Momentum outside the coupling; fixes `C1 = (p_x0/m)²`.
        pub p_x0: f64,
        #[serde(default)]
        pub p_y0: f64,
        #[serde(default)]
        pub pointer_mass: Option<f64>,
        pub x_range: (f64, f64),
        #[serde(default = "default_curve_samples")]
        pub n: usize,
    }
}

common_fields! {
    /// External-time versus internal-time integration of `p_t + H1`.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ArnoldCheckConfig {
        pub h1: SystemHamiltonian,
        /// `[x, P]` at the start of the segment.
        pub start: (f64, f64),
        pub segment: (f64, f64),
        #[serde(default = "default_curve_samples")]
        pub n: usize,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the base scenario, e.g. `z0` or `particle.x0`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub output: OutputConfig,
    pub base: Box<ScenarioConfig>,
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioConfig {
    ArrivalPovm(ArrivalPovmConfig),
    ThetaClockQuantum(ThetaQuantumConfig),
    Allcock(AllcockConfig),
    ImpulsiveKick(KickConfig),
    Classical(ClassicalConfig),
    ThetaRecord(ThetaRecordConfig),
    TotalEnergyIdeal(TotalEnergyIdealConfig),
    TotalEnergyReal(TotalEnergyRealConfig),
    InternalTime(InternalTimeConfig),
    ArnoldCheck(ArnoldCheckConfig),
    Sweep(SweepConfig),
}

macro_rules! each_kind {
    ($self:expr, $c:ident => $e:expr, sweep $s:ident => $se:expr) => {
        match $self {
            ScenarioConfig::ArrivalPovm($c) => $e,
            ScenarioConfig::ThetaClockQuantum($c) => $e,
            ScenarioConfig::Allcock($c) => $e,
            ScenarioConfig::ImpulsiveKick($c) => $e,
            ScenarioConfig::Classical($c) => $e,
            ScenarioConfig::ThetaRecord($c) => $e,
            ScenarioConfig::TotalEnergyIdeal($c) => $e,
            ScenarioConfig::TotalEnergyReal($c) => $e,
            ScenarioConfig::InternalTime($c) => $e,
            ScenarioConfig::ArnoldCheck($c) => $e,
            ScenarioConfig::Sweep($s) => $se,
        }
    };
}

impl ScenarioConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioConfig::ArrivalPovm(_) => "arrival_povm",
            ScenarioConfig::ThetaClockQuantum(_) => "theta_clock_quantum",
            ScenarioConfig::Allcock(_) => "allcock",
            ScenarioConfig::ImpulsiveKick(_) => "impulsive_kick",
            ScenarioConfig::Classical(_) => "classical",
            ScenarioConfig::ThetaRecord(_) => "theta_record",
            ScenarioConfig::TotalEnergyIdeal(_) => "total_energy_ideal",
            ScenarioConfig::TotalEnergyReal(_) => "total_energy_real",
            ScenarioConfig::InternalTime(_) => "internal_time",
            ScenarioConfig::ArnoldCheck(_) => "arnold_check",
            ScenarioConfig::Sweep(_) => "sweep",
        }
    }

    pub fn id(&self) -> String {
        each_kind!(self, c => c.id.clone(), sweep s => s.id.clone()).unwrap_or_else(|| self.kind().to_string())
    }

    pub fn output(&self) -> &OutputConfig {
        each_kind!(self, c => &c.output, sweep s => &s.output)
    }

    pub(crate) fn set_id(&mut self, id: String) {
        each_kind!(self, c => c.id = Some(id), sweep s => s.id = Some(id))
    }

    pub(crate) fn margin_settings(&self) -> Option<(&MarginInputs, f64)> {
        each_kind!(self, c => Some((&c.margins, c.threshold)), sweep _s => None)
    }

    /// Checks every parameter, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if let Some((_, threshold)) = self.margin_settings() {
            positive("threshold", threshold)?;
        }
        match self {
            ScenarioConfig::ArrivalPovm(c) => {
                positive("m", c.m)?;
                packet("particle", &c.particle)?;
                grid("grid", &c.grid)?;
                if let Some(r) = c.t_range {
                    range("t_range", r)?;
                }
                if c.n_t < 2 {
                    return Err(ReportError::config("n_t", "need at least 2 samples"));
                }
                if let Some(t) = c.t_ref {
                    finite("t_ref", t)?;
                }
            }
            ScenarioConfig::ThetaClockQuantum(c) => {
                positive("m", c.m)?;
                packet("particle", &c.particle)?;
                positive("pointer_width", c.pointer_width)?;
                finite("pointer_z0", c.pointer_z0)?;
                if let Some(m) = c.pointer_mass {
                    positive("pointer_mass", m)?;
                }
                grid("grid_x", &c.grid_x)?;
                grid("grid_z", &c.grid_z)?;
                if let Some(dt) = c.dt {
                    positive("dt", dt)?;
                }
                positive("t_final", c.t_final)?;
            }
            ScenarioConfig::Allcock(c) => {
                positive("m", c.m)?;
                packet("particle", &c.particle)?;
                grid("grid", &c.grid)?;
                positive("v", c.v)?;
                if let Some(dt) = c.dt {
                    positive("dt", dt)?;
                }
                positive("t_final", c.t_final)?;
            }
            ScenarioConfig::ImpulsiveKick(c) => {
                if c.system.is_empty() {
                    return Err(ReportError::config("system", "need at least one packet"));
                }
                for p in &c.system {
                    packet("system", p)?;
                }
                finite("pointer.z0", c.pointer.z0)?;
                positive("pointer.width", c.pointer.width)?;
                grid("grid_x", &c.grid_x)?;
                grid("grid_z", &c.grid_z)?;
                finite("lambda", c.lambda)?;
            }
            ScenarioConfig::Classical(c) => {
                c.model.validate().map_err(|e| lab_config("model", e))?;
                for (label, v) in &c.start {
                    finite("start", v[0])?;
                    finite("start", v[1]).map_err(|_| {
                        ReportError::config("start", format!("non-finite momentum for pair {label:?}"))
                    })?;
                }
                range("span", c.span)?;
                positive("dt", c.dt)?;
            }
            ScenarioConfig::ThetaRecord(c) => {
                positive("m", c.m)?;
                if !(c.x0 < 0.0) {
                    return Err(ReportError::config("x0", format!("must be negative, got {}", c.x0)));
                }
                finite("p_x0", c.p_x0)?;
                finite("p_y0", c.p_y0)?;
                if let Some(m) = c.pointer_mass {
                    positive("pointer_mass", m)?;
                }
                if let Some(d) = c.delta_p_y0 {
                    finite("delta_p_y0", d)?;
                }
            }
            ScenarioConfig::TotalEnergyIdeal(c) => {
                finite("h_box", c.h_box)?;
                finite("p_x", c.p_x)?;
                c.coupling.validate().map_err(|e| lab_config("coupling", e))?;
                finite("z0", c.z0)?;
                range("x_range", c.x_range)?;
            }
            ScenarioConfig::TotalEnergyReal(c) => {
                positive("m", c.m)?;
                finite("h_box", c.h_box)?;
                finite("p_x", c.p_x)?;
                c.coupling.validate().map_err(|e| lab_config("coupling", e))?;
                finite("z0", c.z0)?;
                range("x_range", c.x_range)?;
            }
            ScenarioConfig::InternalTime(c) => {
                positive("m", c.m)?;
                c.coupling.validate().map_err(|e| lab_config("coupling", e))?;
                finite("p_x0", c.p_x0)?;
                if c.p_x0 == 0.0 {
                    return Err(ReportError::config("p_x0", "must be nonzero"));
                }
                finite("p_y0", c.p_y0)?;
                if let Some(m) = c.pointer_mass {
                    positive("pointer_mass", m)?;
                }
                if !(c.x_range.0.is_finite() && c.x_range.1.is_finite() && c.x_range.0 != c.x_range.1) {
                    return Err(ReportError::config("x_range", "need two distinct finite end points"));
                }
                if c.n < 2 {
                    return Err(ReportError::config("n", "need at least 2 samples"));
                }
            }
            ScenarioConfig::ArnoldCheck(c) => {
                c.h1.validate().map_err(|e| lab_config("h1", e))?;
                finite("start", c.start.0)?;
                finite("start", c.start.1)?;
                finite("segment", c.segment.0)?;
                finite("segment", c.segment.1)?;
                if c.n < 2 {
                    return Err(ReportError::config("n", "need at least 2 samples"));
                }
            }
            ScenarioConfig::Sweep(s) => {
                if matches!(*s.base, ScenarioConfig::Sweep(_)) {
                    return Err(ReportError::config("base", "a sweep cannot nest another sweep"));
                }
                s.base.validate()?;
                if s.axes.is_empty() {
                    return Err(ReportError::config("axes", "a sweep needs at least one axis"));
                }
                for axis in &s.axes {
                    if axis.values.is_empty() {
                        return Err(ReportError::config(
                            "axes",
                            format!("axis `{}` has no values", axis.parameter),
                        ));
                    }
                    if axis.values.iter().any(|v| !v.is_finite()) {
                        return Err(ReportError::config(
                            "axes",
                            format!("axis `{}` has non-finite values", axis.parameter),
                        ));
                    }
                }
                crate::sweep::expand(s)?;
            }
        }
        Ok(())
    }
}

fn lab_config(field: &str, err: timelab_core::LabError) -> ReportError {
    match err {
        timelab_core::LabError::Config { field: inner, reason } => {
            ReportError::config(format!("{field}.{inner}"), reason)
        }
        other => ReportError::config(field, other.to_string()),
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ReportError::config(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ReportError::config(field, format!("must be positive, got {v}")))
    }
}

fn range(field: &str, r: (f64, f64)) -> Result<()> {
    if r.0.is_finite() && r.1.is_finite() && r.0 < r.1 {
        Ok(())
    } else {
        Err(ReportError::config(field, format!("need a finite increasing range, got {r:?}")))
    }
}

fn packet(field: &str, p: &PacketConfig) -> Result<()> {
    finite(&format!("{field}.x0"), p.x0)?;
    finite(&format!("{field}.p0"), p.p0)?;
    positive(&format!("{field}.sigma"), p.sigma)
}

fn grid(field: &str, g: &GridConfig) -> Result<()> {
    if g.n_points < 8 || !g.n_points.is_power_of_two() {
        return Err(ReportError::config(
            format!("{field}.n_points"),
            format!("must be a power of two >= 8, got {}", g.n_points),
        ));
    }
    range(&format!("{field}.x_max"), (g.x_min, g.x_max))
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| ReportError::from_json(&e))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    parse_config(&text)
}
