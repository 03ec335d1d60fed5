use serde::{Deserialize, Serialize};

use super::coupling::CouplingFunction;
use crate::error::{LabError, Result};

/// Label of a canonical pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    /// Clock particle `(x, P_x)`.
    X,
    /// Pointer `(y, P_y)`.
    Y,
    /// Energy-clock pointer `(z, P_z)`.
    Z,
    /// Measured system `(q, p)`.
    Q,
    /// Extended time pair `(t, p_t)`.
    T,
}

impl PairLabel {
    pub fn names(self) -> (&'static str, &'static str) {
        match self {
            PairLabel::X => ("x", "P_x"),
            PairLabel::Y => ("y", "P_y"),
            PairLabel::Z => ("z", "P_z"),
            PairLabel::Q => ("q", "p"),
            PairLabel::T => ("t", "p_t"),
        }
    }
}

/// Point of a phase space built from labeled canonical pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    labels: Vec<PairLabel>,
    /// `values[2i]` is the coordinate and `values[2i + 1]` the momentum of `labels[i]`.
    values: Vec<f64>,
}

impl PhasePoint {
    pub fn new(pairs: &[(PairLabel, f64, f64)]) -> Result<Self> {
        let mut labels = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(2 * pairs.len());
        for &(label, q, p) in pairs {
            if labels.contains(&label) {
                return Err(LabError::config("pairs", format!("duplicate label {label:?}")));
            }
            labels.push(label);
            values.push(q);
            values.push(p);
        }
        Ok(Self { labels, values })
    }

    pub(crate) fn from_parts(labels: Vec<PairLabel>, values: Vec<f64>) -> Self {
        debug_assert_eq!(2 * labels.len(), values.len());
        Self { labels, values }
    }

    pub fn labels(&self) -> &[PairLabel] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has(&self, label: PairLabel) -> bool {
        self.labels.contains(&label)
    }

    pub fn get(&self, label: PairLabel) -> Option<(f64, f64)> {
        let i = self.labels.iter().position(|&l| l == label)?;
        Some((self.values[2 * i], self.values[2 * i + 1]))
    }

    pub fn coord(&self, label: PairLabel) -> Option<f64> {
        self.get(label).map(|v| v.0)
    }

    pub fn momentum(&self, label: PairLabel) -> Option<f64> {
        self.get(label).map(|v| v.1)
    }

    pub fn set(&mut self, label: PairLabel, q: f64, p: f64) -> Result<()> {
        let i = self
            .labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| LabError::config("pairs", format!("missing label {label:?}")))?;
        self.values[2 * i] = q;
        self.values[2 * i + 1] = p;
        Ok(())
    }

    /// Values ordered by `order`; every label must be present and no others.
    pub(crate) fn ordered(&self, order: &[PairLabel]) -> Result<Vec<f64>> {
        if order.len() != self.labels.len() {
            return Err(LabError::config(
                "start",
                format!("expected pairs {order:?}, got {:?}", self.labels),
            ));
        }
        let mut out = Vec::with_capacity(2 * order.len());
        for &label in order {
            let (q, p) = self.get(label).ok_or_else(|| {
                LabError::config("start", format!("expected pairs {order:?}, got {:?}", self.labels))
            })?;
            out.push(q);
            out.push(p);
        }
        Ok(out)
    }
}

/// Unperturbed Hamiltonian of the measured system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SystemHamiltonian {
    Free { mass: f64 },
    Harmonic { mass: f64, omega: f64 },
}

impl SystemHamiltonian {
    pub fn validate(&self) -> Result<()> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(LabError::config("mass", format!("must be positive, got {mass}")));
        }
        if let SystemHamiltonian::Harmonic { omega, .. } = self {
            if !omega.is_finite() {
                return Err(LabError::config("omega", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        match *self {
            SystemHamiltonian::Free { mass } | SystemHamiltonian::Harmonic { mass, .. } => mass,
        }
    }

    pub fn potential(&self, q: f64) -> f64 {
        match *self {
            SystemHamiltonian::Free { .. } => 0.0,
            SystemHamiltonian::Harmonic { mass, omega } => 0.5 * mass * omega * omega * q * q,
        }
    }

    pub fn value(&self, q: f64, p: f64) -> f64 {
        p * p / (2.0 * self.mass()) + self.potential(q)
    }

    pub fn dh_dq(&self, q: f64) -> f64 {
        match *self {
            SystemHamiltonian::Free { .. } => 0.0,
            SystemHamiltonian::Harmonic { mass, omega } => mass * omega * omega * q,
        }
    }

    pub fn dh_dp(&self, p: f64) -> f64 {
        p / self.mass()
    }
}

/// Observable `A(q, p)` of the measured system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PhaseObservable {
    Position,
    Momentum,
    Energy { hamiltonian: SystemHamiltonian },
    /// `(q − x0)·m/p`, the time at which free motion reaches `x0`, measured
    /// backwards from now.
    ArrivalTime { x0: f64, mass: f64 },
}

impl PhaseObservable {
    pub fn value(&self, q: f64, p: f64) -> f64 {
        match *self {
            PhaseObservable::Position => q,
            PhaseObservable::Momentum => p,
            PhaseObservable::Energy { hamiltonian } => hamiltonian.value(q, p),
            PhaseObservable::ArrivalTime { x0, mass } => (q - x0) * mass / p,
        }
    }

    /// `(∂A/∂q, ∂A/∂p)`.
    pub fn gradient(&self, q: f64, p: f64) -> (f64, f64) {
        match *self {
            PhaseObservable::Position => (1.0, 0.0),
            PhaseObservable::Momentum => (0.0, 1.0),
            PhaseObservable::Energy { hamiltonian } => (hamiltonian.dh_dq(q), hamiltonian.dh_dp(p)),
            PhaseObservable::ArrivalTime { x0, mass } => (mass / p, -(q - x0) * mass / (p * p)),
        }
    }
}

/// Classical clock and pointer Hamiltonians.
///
/// A `pointer_mass` of `None` drops the pointer kinetic term (infinitely
/// heavy pointer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ScenarioModel {
    /// `H0(q, p)` alone.
    System { h0: SystemHamiltonian },
    /// `H0 + P_y²/2M + δ(t − t0)·λ·A(q, p)·P_y`.
    InstantKick {
        h0: SystemHamiltonian,
        observable: PhaseObservable,
        t0: f64,
        lambda: f64,
        #[serde(default)]
        pointer_mass: Option<f64>,
    },
    /// `P_x²/2m + P_y²/2M + Θ(−x)·P_y`.
    ThetaClock {
        mass: f64,
        #[serde(default)]
        pointer_mass: Option<f64>,
    },
    /// `P_x²/2m + P_y²/2M + g(x)·P_y`.
    GeneralCoupling {
        mass: f64,
        #[serde(default)]
        pointer_mass: Option<f64>,
        coupling: CouplingFunction,
    },
    /// `H0(q, p) + P_x²/2m + P_y²/2M + g(x)·A(q, p)·P_y`.
    InternalObservable {
        h0: SystemHamiltonian,
        observable: PhaseObservable,
        coupling: CouplingFunction,
        mass: f64,
        #[serde(default)]
        pointer_mass: Option<f64>,
    },
    /// `(H_box0 + P_x)(1 + g(x)·z)` with a linear clock.
    TotalEnergyIdeal { h_box: f64, coupling: CouplingFunction, z0: f64 },
    /// `(H_box0 + P_x²/2m)(1 + g(x)·z)`.
    TotalEnergyReal { mass: f64, h_box: f64, coupling: CouplingFunction, z0: f64 },
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(field, format!("must be positive, got {v}")))
    }
}

fn inverse_mass(m: Option<f64>) -> f64 {
    m.map_or(0.0, |m| 1.0 / m)
}

impl ScenarioModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioModel::System { h0 } => h0.validate(),
            ScenarioModel::InstantKick { h0, pointer_mass, t0, lambda, .. } => {
                h0.validate()?;
                if let Some(m) = pointer_mass {
                    positive("pointer_mass", *m)?;
                }
                if !t0.is_finite() || !lambda.is_finite() {
                    return Err(LabError::config("t0", "t0 and lambda must be finite"));
                }
                Ok(())
            }
            ScenarioModel::ThetaClock { mass, pointer_mass } => {
                positive("mass", *mass)?;
                pointer_mass.map_or(Ok(()), |m| positive("pointer_mass", m))
            }
            ScenarioModel::GeneralCoupling { mass, pointer_mass, coupling } => {
                positive("mass", *mass)?;
                coupling.validate()?;
                pointer_mass.map_or(Ok(()), |m| positive("pointer_mass", m))
            }
            ScenarioModel::InternalObservable { h0, coupling, mass, pointer_mass, .. } => {
                h0.validate()?;
                positive("mass", *mass)?;
                coupling.validate()?;
                pointer_mass.map_or(Ok(()), |m| positive("pointer_mass", m))
            }
            ScenarioModel::TotalEnergyIdeal { coupling, z0, h_box } => {
                coupling.validate()?;
                if !z0.is_finite() || !h_box.is_finite() {
                    return Err(LabError::config("z0", "z0 and h_box must be finite"));
                }
                Ok(())
            }
            ScenarioModel::TotalEnergyReal { mass, coupling, z0, h_box } => {
                positive("mass", *mass)?;
                coupling.validate()?;
                if !z0.is_finite() || !h_box.is_finite() {
                    return Err(LabError::config("z0", "z0 and h_box must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Canonical pairs in state-vector order.
    pub fn pairs(&self) -> Vec<PairLabel> {
        use PairLabel::*;
        match self {
            ScenarioModel::System { .. } => vec![Q],
            ScenarioModel::InstantKick { .. } => vec![Q, Y],
            ScenarioModel::ThetaClock { .. } | ScenarioModel::GeneralCoupling { .. } => vec![X, Y],
            ScenarioModel::InternalObservable { .. } => vec![Q, X, Y],
            ScenarioModel::TotalEnergyIdeal { .. } | ScenarioModel::TotalEnergyReal { .. } => vec![X, Z],
        }
    }

    pub fn coupling(&self) -> Option<CouplingFunction> {
        match self {
            ScenarioModel::ThetaClock { .. } => Some(CouplingFunction::Step),
            ScenarioModel::GeneralCoupling { coupling, .. }
            | ScenarioModel::InternalObservable { coupling, .. }
            | ScenarioModel::TotalEnergyIdeal { coupling, .. }
            | ScenarioModel::TotalEnergyReal { coupling, .. } => Some(coupling.clone()),
            _ => None,
        }
    }

    /// Index of `x` in the state vector.
    pub(crate) fn x_index(&self) -> Option<usize> {
        match self {
            ScenarioModel::System { .. } | ScenarioModel::InstantKick { .. } => None,
            ScenarioModel::InternalObservable { .. } => Some(2),
            _ => Some(0),
        }
    }

    /// `H = T(p) + V(q)` with no coupling between pairs.
    pub fn is_separable(&self) -> bool {
        matches!(self, ScenarioModel::System { .. } | ScenarioModel::InstantKick { .. })
    }

    /// Hamiltonian with `g` evaluated by `g_at`.
    fn hamiltonian_with(&self, s: &[f64], g_at: impl Fn(f64) -> f64) -> f64 {
        match self {
            ScenarioModel::System { h0 } => h0.value(s[0], s[1]),
            ScenarioModel::InstantKick { h0, pointer_mass, .. } => {
                h0.value(s[0], s[1]) + 0.5 * s[3] * s[3] * inverse_mass(*pointer_mass)
            }
            ScenarioModel::ThetaClock { mass, pointer_mass }
            | ScenarioModel::GeneralCoupling { mass, pointer_mass, .. } => {
                s[1] * s[1] / (2.0 * mass) + 0.5 * s[3] * s[3] * inverse_mass(*pointer_mass) + g_at(s[0]) * s[3]
            }
            ScenarioModel::InternalObservable { h0, observable, mass, pointer_mass, .. } => {
                h0.value(s[0], s[1])
                    + s[3] * s[3] / (2.0 * mass)
                    + 0.5 * s[5] * s[5] * inverse_mass(*pointer_mass)
                    + g_at(s[2]) * observable.value(s[0], s[1]) * s[5]
            }
            ScenarioModel::TotalEnergyIdeal { h_box, .. } => (h_box + s[1]) * (1.0 + g_at(s[0]) * s[2]),
            ScenarioModel::TotalEnergyReal { mass, h_box, .. } => {
                (h_box + s[1] * s[1] / (2.0 * mass)) * (1.0 + g_at(s[0]) * s[2])
            }
        }
    }

    pub fn hamiltonian(&self, point: &PhasePoint) -> Result<f64> {
        let s = point.ordered(&self.pairs())?;
        let g = self.coupling();
        Ok(self.hamiltonian_with(&s, |x| g.as_ref().map_or(0.0, |g| g.value(x))))
    }

    pub(crate) fn hamiltonian_in_region(&self, s: &[f64], g: Option<&CouplingFunction>, region: usize) -> f64 {
        self.hamiltonian_with(s, |x| g.map_or(0.0, |g| g.value_in_region(x, region)))
    }

    /// Canonical equations inside `region` of the coupling partition.
    pub(crate) fn rhs(&self, s: &[f64], g: Option<&CouplingFunction>, region: usize, out: &mut [f64]) {
        let gv = |x: f64| g.map_or(0.0, |g| g.value_in_region(x, region));
        let dg = |x: f64| g.map_or(0.0, |g| g.derivative(x));
        match self {
            ScenarioModel::System { h0 } => {
                out[0] = h0.dh_dp(s[1]);
                out[1] = -h0.dh_dq(s[0]);
            }
            ScenarioModel::InstantKick { h0, pointer_mass, .. } => {
                out[0] = h0.dh_dp(s[1]);
                out[1] = -h0.dh_dq(s[0]);
                out[2] = s[3] * inverse_mass(*pointer_mass);
                out[3] = 0.0;
            }
            ScenarioModel::ThetaClock { mass, pointer_mass }
            | ScenarioModel::GeneralCoupling { mass, pointer_mass, .. } => {
                out[0] = s[1] / mass;
                out[1] = -dg(s[0]) * s[3];
                out[2] = s[3] * inverse_mass(*pointer_mass) + gv(s[0]);
                out[3] = 0.0;
            }
            ScenarioModel::InternalObservable { h0, observable, mass, pointer_mass, .. } => {
                let (q, p, x, py) = (s[0], s[1], s[2], s[5]);
                let a = observable.value(q, p);
                let (a_q, a_p) = observable.gradient(q, p);
                let g = gv(x);
                out[0] = h0.dh_dp(p) + g * a_p * py;
                out[1] = -h0.dh_dq(q) - g * a_q * py;
                out[2] = s[3] / mass;
                out[3] = -dg(x) * a * py;
                out[4] = py * inverse_mass(*pointer_mass) + g * a;
                out[5] = 0.0;
            }
            ScenarioModel::TotalEnergyIdeal { h_box, .. } => {
                let (x, px, z) = (s[0], s[1], s[2]);
                out[0] = 1.0 + gv(x) * z;
                out[1] = -dg(x) * (h_box + px) * z;
                out[2] = 0.0;
                out[3] = -gv(x) * (h_box + px);
            }
            ScenarioModel::TotalEnergyReal { mass, h_box, .. } => {
                let (x, px, z) = (s[0], s[1], s[2]);
                let e = h_box + px * px / (2.0 * mass);
                out[0] = px / mass * (1.0 + gv(x) * z);
                out[1] = -dg(x) * e * z;
                out[2] = 0.0;
                out[3] = -gv(x) * e;
            }
        }
    }

    /// Momentum `P_x` after crossing a jump of `g` from `g_from` to `g_to`
    /// with all other variables fixed and `H` conserved. `None` means the
    /// barrier reflects.
    pub(crate) fn jump_momentum(&self, s: &[f64], g_from: f64, g_to: f64) -> Option<f64> {
        let reflect_or = |px: f64, radicand: f64| {
            if radicand > 0.0 {
                Some(px.signum() * radicand.sqrt())
            } else {
                None
            }
        };
        match self {
            ScenarioModel::ThetaClock { mass, .. } | ScenarioModel::GeneralCoupling { mass, .. } => {
                reflect_or(s[1], s[1] * s[1] - 2.0 * mass * (g_to - g_from) * s[3])
            }
            ScenarioModel::InternalObservable { observable, mass, .. } => {
                let a = observable.value(s[0], s[1]);
                reflect_or(s[3], s[3] * s[3] - 2.0 * mass * (g_to - g_from) * a * s[5])
            }
            ScenarioModel::TotalEnergyIdeal { h_box, .. } => {
                let z = s[2];
                Some((h_box + s[1]) * (1.0 + g_from * z) / (1.0 + g_to * z) - h_box)
            }
            ScenarioModel::TotalEnergyReal { mass, h_box, .. } => {
                let z = s[2];
                let e = (h_box + s[1] * s[1] / (2.0 * mass)) * (1.0 + g_from * z) / (1.0 + g_to * z);
                reflect_or(s[1], 2.0 * mass * (e - h_box))
            }
            ScenarioModel::System { .. } | ScenarioModel::InstantKick { .. } => Some(s[1]),
        }
    }

    /// Model parameters a start point must agree with.
    pub(crate) fn check_start(&self, s: &[f64]) -> Result<()> {
        match self {
            ScenarioModel::TotalEnergyIdeal { z0, .. } | ScenarioModel::TotalEnergyReal { z0, .. } => {
                if s[2] != *z0 {
                    return Err(LabError::config("z0", format!("start has z = {}, model has z0 = {z0}", s[2])));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
