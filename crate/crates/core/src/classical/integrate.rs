use serde::{Deserialize, Serialize};

use super::coupling::CouplingFunction;
use super::kick::kick_flow;
use super::model::{PairLabel, PhasePoint, ScenarioModel};
use crate::error::{LabError, Result};

/// Bisection tolerance on the parameter when locating events.
pub const EVENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    Verlet,
    EventRk4,
}

/// What the trajectory is parametrized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    ExternalTime,
    InternalX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// `x` passed the point `at`; `direction` is +1 for rightwards motion.
    Crossing { at: f64, direction: i8 },
    /// The particle bounced off the jump of `g` at `at`.
    Reflection { at: f64 },
    Kick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub parameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub parameter: Parameter,
    pub labels: Vec<PairLabel>,
    pub params: Vec<f64>,
    pub points: Vec<PhasePoint>,
    pub energies: Vec<f64>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory has at least the start point")
    }

    /// Series of the coordinate (`momentum = false`) or momentum of `label`.
    pub fn column(&self, label: PairLabel, momentum: bool) -> Option<Vec<f64>> {
        let i = self.labels.iter().position(|&l| l == label)?;
        Some(self.points.iter().map(|p| p.values()[2 * i + usize::from(momentum)]).collect())
    }

    /// `|H(end) − H(start)| / max(1, |H(start)|)`.
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.energies[0];
        (self.energies[self.energies.len() - 1] - h0).abs() / h0.abs().max(1.0)
    }

    /// Largest `|H − H(start)| / max(1, |H(start)|)` along the samples.
    pub fn max_energy_deviation(&self) -> f64 {
        let h0 = self.energies[0];
        self.energies.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max) / h0.abs().max(1.0)
    }

    pub fn crossings(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| matches!(e.kind, EventKind::Crossing { .. }))
    }
}

pub(crate) fn rk4_step(f: &impl Fn(&[f64], &mut [f64]), s: &[f64], h: f64) -> Vec<f64> {
    let n = s.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(s, &mut k1);
    for i in 0..n {
        tmp[i] = s[i] + 0.5 * h * k1[i];
    }
    f(&tmp, &mut k2);
    for i in 0..n {
        tmp[i] = s[i] + 0.5 * h * k2[i];
    }
    f(&tmp, &mut k3);
    for i in 0..n {
        tmp[i] = s[i] + h * k3[i];
    }
    f(&tmp, &mut k4);
    (0..n).map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

struct Stepper<'a> {
    model: &'a ScenarioModel,
    coupling: Option<CouplingFunction>,
    x_index: Option<usize>,
}

impl Stepper<'_> {
    fn rk4(&self, s: &[f64], h: f64, region: usize) -> Vec<f64> {
        let f = |y: &[f64], out: &mut [f64]| self.model.rhs(y, self.coupling.as_ref(), region, out);
        rk4_step(&f, s, h)
    }

    fn verlet(&self, s: &[f64], h: f64) -> Vec<f64> {
        let h0 = match self.model {
            ScenarioModel::System { h0 } | ScenarioModel::InstantKick { h0, .. } => h0,
            _ => unreachable!("verlet is only dispatched for separable models"),
        };
        let mut out = s.to_vec();
        out[1] -= 0.5 * h * h0.dh_dq(out[0]);
        out[0] += h * h0.dh_dp(out[1]);
        out[1] -= 0.5 * h * h0.dh_dq(out[0]);
        if out.len() == 4 {
            let mut d = [0.0; 4];
            self.model.rhs(s, None, 0, &mut d);
            out[2] += h * d[2];
        }
        out
    }

    fn velocity(&self, s: &[f64], region: usize) -> f64 {
        let mut d = vec![0.0; s.len()];
        self.model.rhs(s, self.coupling.as_ref(), region, &mut d);
        d[self.x_index.unwrap()]
    }

    fn energy(&self, s: &[f64], region: usize) -> f64 {
        self.model.hamiltonian_in_region(s, self.coupling.as_ref(), region)
    }
}

/// Integrates `model` from `start` over the parameter interval `span`.
///
/// `rk4` and `verlet` take fixed steps (the last one shortened to land on
/// `span.1`); `event_rk4` additionally locates every crossing of `x = 0` and
/// of each jump of `g` by bisection, applies the energy-conserving momentum
/// jump there and restarts from the event. Kicks of `InstantKick` models are
/// applied as exact canonical maps at `t0` by every method.
pub fn integrate(
    model: &ScenarioModel,
    start: &PhasePoint,
    span: (f64, f64),
    dt: f64,
    method: Method,
) -> Result<Trajectory> {
    model.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::config("dt", format!("must be positive, got {dt}")));
    }
    if !(span.1 > span.0) || !span.0.is_finite() || !span.1.is_finite() {
        return Err(LabError::config("span", format!("need start < end, got {span:?}")));
    }
    let labels = model.pairs();
    let mut state = start.ordered(&labels)?;
    model.check_start(&state)?;
    let coupling = model.coupling();
    let has_jumps = coupling.as_ref().is_some_and(|g| !g.discontinuities().is_empty());
    match method {
        Method::Verlet if !model.is_separable() => {
            return Err(LabError::Method {
                method: "verlet",
                reason: "Hamiltonian is not of the form T(p) + V(q)".into(),
            })
        }
        Method::Rk4 | Method::Verlet if has_jumps => {
            return Err(LabError::Method {
                method: if method == Method::Rk4 { "rk4" } else { "verlet" },
                reason: "coupling has jumps; use event_rk4".into(),
            })
        }
        _ => {}
    }
    let stepper = Stepper { model, coupling, x_index: model.x_index() };

    // event points: x = 0 and every jump of g
    let mut marks: Vec<f64> = stepper.coupling.as_ref().map_or(Vec::new(), |g| g.discontinuities());
    if stepper.x_index.is_some() {
        marks.push(0.0);
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let jumps: Vec<f64> = stepper.coupling.as_ref().map_or(Vec::new(), |g| g.discontinuities());
    let detect = method == Method::EventRk4 && stepper.x_index.is_some();

    let mut region = 0;
    let mut sides: Vec<i8> = Vec::new();
    if let (Some(xi), Some(g)) = (stepper.x_index, stepper.coupling.as_ref()) {
        let v = stepper.velocity(&state, g.region_of(state[xi], true));
        region = g.region_of(state[xi], v > 0.0);
    }
    if let Some(xi) = stepper.x_index {
        let v = stepper.velocity(&state, region);
        sides = marks
            .iter()
            .map(|&c| match state[xi].partial_cmp(&c) {
                Some(std::cmp::Ordering::Less) => -1,
                Some(std::cmp::Ordering::Greater) => 1,
                _ => {
                    if v >= 0.0 {
                        1
                    } else {
                        -1
                    }
                }
            })
            .collect();
    }

    let mut kick = match model {
        ScenarioModel::InstantKick { observable, t0, lambda, .. } if *t0 >= span.0 && *t0 <= span.1 => {
            Some((*observable, *t0, *lambda))
        }
        _ => None,
    };

    let mut traj = Trajectory {
        parameter: Parameter::ExternalTime,
        labels: labels.clone(),
        params: vec![span.0],
        points: vec![PhasePoint::from_parts(labels.clone(), state.clone())],
        energies: vec![stepper.energy(&state, region)],
        events: Vec::new(),
    };

    let apply_kick = |state: &mut Vec<f64>, obs, lambda| -> Result<()> {
        let (q, p, y) = kick_flow(&obs, lambda, state[0], state[1], state[2], state[3])?;
        state[0] = q;
        state[1] = p;
        state[2] = y;
        Ok(())
    };

    let mut t = span.0;
    if let Some((obs, t0, lambda)) = kick {
        if t0 == span.0 {
            apply_kick(&mut state, obs, lambda)?;
            traj.events.push(Event { kind: EventKind::Kick, parameter: t0 });
            kick = None;
        }
    }

    let mut step_index: u64 = 0;
    while t < span.1 {
        let mut stop = span.1;
        if let Some((_, t0, _)) = kick {
            stop = stop.min(t0);
        }
        // steps are anchored to the start so event restarts do not shift the grid
        step_index += 1;
        let mut grid_target = span.0 + step_index as f64 * dt;
        if (span.1 - grid_target).abs() < 1e-9 * dt {
            grid_target = span.1;
        }
        let mut target = grid_target.min(stop);
        if target <= t {
            target = (t + dt).min(stop);
        }
        let h = target - t;
        let trial = match method {
            Method::Verlet => stepper.verlet(&state, h),
            _ => stepper.rk4(&state, h, region),
        };

        let mut event: Option<(usize, f64, Vec<f64>)> = None;
        if detect {
            let xi = stepper.x_index.unwrap();
            for (k, &c) in marks.iter().enumerate() {
                let side = f64::from(sides[k]);
                if (trial[xi] - c) * side > 0.0 {
                    continue;
                }
                let (mut lo, mut hi) = (0.0, h);
                while hi - lo > EVENT_TOLERANCE {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if (stepper.rk4(&state, mid, region)[xi] - c) * side > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if event.as_ref().is_none_or(|e| hi < e.1) {
                    let mut s = stepper.rk4(&state, hi, region);
                    s[xi] = c;
                    event = Some((k, hi, s));
                }
            }
        }

        match event {
            Some((k, tau, mut s)) => {
                let c = marks[k];
                let te = t + tau;
                let v = stepper.velocity(&s, region);
                let direction: i8 = if v >= 0.0 { 1 } else { -1 };
                let mut kind = EventKind::Crossing { at: c, direction };
                sides[k] = direction;
                if jumps.contains(&c) {
                    let g = stepper.coupling.as_ref().unwrap();
                    let to = if direction > 0 { region + 1 } else { region.wrapping_sub(1) };
                    let xi = stepper.x_index.unwrap();
                    let pi = xi + 1;
                    match model.jump_momentum(&s, g.region_value(region), g.region_value(to)) {
                        Some(p) => {
                            s[pi] = p;
                            region = to;
                        }
                        None => {
                            s[pi] = -s[pi];
                            sides[k] = -direction;
                            kind = EventKind::Reflection { at: c };
                        }
                    }
                }
                traj.events.push(Event { kind, parameter: te });
                state = s;
                t = if target - te > EVENT_TOLERANCE { te } else { target };
            }
            None => {
                state = trial;
                t = target;
            }
        }
        // an interrupted step resumes towards the same grid point
        if t < grid_target {
            step_index -= 1;
        }

        if let Some((obs, t0, lambda)) = kick {
            if t == t0 {
                apply_kick(&mut state, obs, lambda)?;
                traj.events.push(Event { kind: EventKind::Kick, parameter: t0 });
                kick = None;
            }
        }

        if t > *traj.params.last().unwrap() {
            traj.params.push(t);
            traj.points.push(PhasePoint::from_parts(labels.clone(), state.clone()));
            traj.energies.push(stepper.energy(&state, region));
        } else {
            // an event landed on the previous sample; keep the latest state
            let last = traj.points.len() - 1;
            traj.points[last] = PhasePoint::from_parts(labels.clone(), state.clone());
            traj.energies[last] = stepper.energy(&state, region);
        }
    }
    Ok(traj)
}
