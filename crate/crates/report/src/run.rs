//! Dispatch of a validated scenario to the numerical modules.

use std::collections::BTreeMap;

use num_complex::Complex64;
use timelab_core::arrival::{arrival_density, default_t_window, moments, wigner_margin, COVERAGE_THRESHOLD};
use timelab_core::classical::{
    approximate_margin, arnold_compare, integrate, internal_pointer_curve, internal_time_map, measurement_margins,
    theta_arrival_record, total_energy_ideal, total_energy_real, ApproximateInputs, EnergyRecord, EventKind,
    Margin, PairLabel, PhasePoint, PointerCurveModel, EVENT_TOLERANCE, THETA_CONVENTION,
};
use timelab_core::quantum::{
    absorb_evolve, evolve_theta_clock, free_evolve, impulsive_kick, max_kinetic_step, pointer_marginal,
    probability_current, AbsorbingPotential, KickObservable, KickSpec, ThetaClock, TwoBodyState,
};
use timelab_core::spectral::{expectation, make_grid, Basis, Grid1D, Observable, WaveState};
use timelab_core::states::{gaussian_packet, Direction};

use crate::config::*;
use crate::error::{Context, ReportError, Result};
use crate::result::*;

/// Fraction of the kinetic step limit used when `dt` is not given.
pub const DEFAULT_STEP_FRACTION: f64 = 0.5;

const LENGTH: &str = "length";
const TIME: &str = "time";
const MOMENTUM: &str = "momentum";

/// Builds the result skeleton shared by every kind.
struct Builder {
    id: String,
    summary: BTreeMap<String, f64>,
    margins: Vec<MarginRecord>,
    arrays: Vec<ArrayOutput>,
    events: Vec<EventRecord>,
    provenance: Provenance,
}

impl Builder {
    fn new(config: &ScenarioConfig) -> Self {
        Self {
            id: config.id(),
            summary: BTreeMap::new(),
            margins: Vec::new(),
            arrays: Vec::new(),
            events: Vec::new(),
            provenance: Provenance {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                kind: config.kind().to_string(),
                grids: Vec::new(),
                dt: None,
                n_steps: None,
                tolerances: BTreeMap::new(),
                conventions: vec!["hbar = 1; all quantities dimensionless".to_string()],
                warnings: Vec::new(),
                config: serde_json::to_value(config).expect("scenario configs serialize"),
            },
        }
    }

    fn put(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    fn grid(&mut self, axis: &str, g: &Grid1D) {
        self.provenance.grids.push(GridRecord {
            axis: axis.to_string(),
            n_points: g.len(),
            x_min: g.x_min(),
            x_max: g.x_max(),
        });
    }

    fn tolerance(&mut self, name: &str, value: f64) {
        self.provenance.tolerances.insert(name.to_string(), value);
    }

    fn convention(&mut self, text: &str) {
        self.provenance.conventions.push(text.to_string());
    }

    fn margin(&mut self, m: Margin) {
        self.put(&format!("margin_{}", m.name), m.value);
        self.margins.push(MarginRecord { name: m.name.to_string(), value: m.value, threshold: m.threshold, good: m.good });
    }

    fn finish(mut self, config: &ScenarioConfig) -> Result<RunResult> {
        if let Some((inputs, threshold)) = config.margin_settings() {
            self.tolerance("good_threshold", threshold);
            for m in measurement_margins(inputs, threshold).ctx(&self.id)? {
                self.margin(m);
            }
        }
        if let Some((key, _)) = self.summary.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ReportError::Lab {
                scenario: self.id.clone(),
                source: timelab_core::LabError::Shape(format!("summary entry `{key}` is not finite")),
            });
        }
        Ok(RunResult {
            id: self.id,
            summary: self.summary,
            margins: self.margins,
            arrays: self.arrays,
            events: self.events,
            provenance: self.provenance,
        })
    }
}

fn make(g: &GridConfig, id: &str) -> Result<Grid1D> {
    make_grid(g.n_points, g.x_min, g.x_max).ctx(id)
}

fn packet(grid: &Grid1D, p: &PacketConfig, id: &str) -> Result<WaveState> {
    gaussian_packet(grid, p.x0, p.p0, p.sigma).ctx(id)
}

/// Step count and step size covering `t_final` with steps no longer than `dt`.
fn steps(t_final: f64, dt: f64) -> (usize, f64) {
    let n = (t_final / dt).ceil().max(1.0) as usize;
    (n, t_final / n as f64)
}

/// Runs one scenario. Sweeps go through [`crate::sweep::sweep`].
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult> {
    config.validate()?;
    let mut b = Builder::new(config);
    let id = b.id.clone();
    match config {
        ScenarioConfig::ArrivalPovm(c) => run_arrival(c, &mut b, &id)?,
        ScenarioConfig::ThetaClockQuantum(c) => run_theta_quantum(c, &mut b, &id)?,
        ScenarioConfig::Allcock(c) => run_allcock(c, &mut b, &id)?,
        ScenarioConfig::ImpulsiveKick(c) => run_kick(c, &mut b, &id)?,
        ScenarioConfig::Classical(c) => run_classical(c, &mut b, &id)?,
        ScenarioConfig::ThetaRecord(c) => run_theta_record(c, &mut b, &id)?,
        ScenarioConfig::TotalEnergyIdeal(c) => {
            let r = total_energy_ideal(c.h_box, c.p_x, &c.coupling, c.z0, c.x_range).ctx(&id)?;
            energy_summary(&mut b, &r, c.threshold);
        }
        ScenarioConfig::TotalEnergyReal(c) => {
            let r = total_energy_real(c.m, c.h_box, c.p_x, &c.coupling, c.z0, c.x_range).ctx(&id)?;
            energy_summary(&mut b, &r, c.threshold);
        }
        ScenarioConfig::InternalTime(c) => run_internal_time(c, &mut b, &id)?,
        ScenarioConfig::ArnoldCheck(c) => {
            let r = arnold_compare(&c.h1, c.start, c.segment, c.n).ctx(&id)?;
            b.put("max_deviation", r.max_deviation);
            b.put("elapsed_time", *r.t.last().expect("at least two samples"));
            b.arrays.push(ArrayOutput::new(
                "comparison",
                vec![
                    Column::new("x", LENGTH, r.x),
                    Column::new("t", TIME, r.t),
                    Column::new("P_reduced", MOMENTUM, r.p_reduced),
                    Column::new("x_time", LENGTH, r.x_time),
                    Column::new("P_time", MOMENTUM, r.p_time),
                ],
            ));
        }
        ScenarioConfig::Sweep(_) => {
            return Err(ReportError::config("kind", "sweep scenarios run through `sweep`"));
        }
    }
    b.finish(config)
}

fn run_arrival(c: &ArrivalPovmConfig, b: &mut Builder, id: &str) -> Result<()> {
    let grid = make(&c.grid, id)?;
    b.grid("x", &grid);
    let phi = packet(&grid, &c.particle, id)?;
    let t_range = match c.t_range {
        Some(r) => r,
        None => default_t_window(&phi, c.m).ctx(id)?,
    };
    let dist = arrival_density(&phi, c.m, t_range, c.n_t).ctx(id)?;
    let mean = moments(&dist, 0.0).ctx(id)?.mean;
    let t_ref = c.t_ref.unwrap_or(mean);
    let mom = moments(&dist, t_ref).ctx(id)?;
    let energy = expectation(&phi, Observable::Kinetic { mass: c.m }).ctx(id)?;
    let wigner = wigner_margin(&phi, &dist, t_ref, c.m).ctx(id)?;
    b.put("mean_arrival", mom.mean);
    b.put("tau", mom.tau);
    b.put("t_ref", t_ref);
    b.put("captured_mass", dist.captured_mass);
    b.put("sector_plus_mass", dist.sector_mass(Direction::Right));
    b.put("sector_minus_mass", dist.sector_mass(Direction::Left));
    b.put("energy", energy);
    b.put("classical_arrival", -c.m * c.particle.x0 / c.particle.p0);
    // τ⟨E⟩ > 1 is the Wigner relation; it is a lower bound, so "good" means
    // the margin exceeds one.
    b.put("margin_wigner", wigner);
    b.margins.push(MarginRecord { name: "wigner".into(), value: wigner, threshold: 1.0, good: wigner > 1.0 });
    if let Some(w) = dist.coverage_warning() {
        b.provenance.warnings.push(w);
    }
    b.tolerance("coverage_threshold", COVERAGE_THRESHOLD);
    b.convention("Pi(T) sums both direction sectors; amplitudes carry (2 pi)^(-1/2)");
    b.arrays.push(ArrayOutput::new(
        "distribution",
        vec![Column::new("T", TIME, dist.t_samples), Column::new("density", "1/time", dist.density)],
    ));
    Ok(())
}

fn run_theta_quantum(c: &ThetaQuantumConfig, b: &mut Builder, id: &str) -> Result<()> {
    let gx = make(&c.grid_x, id)?;
    let gz = make(&c.grid_z, id)?;
    b.grid("x", &gx);
    b.grid("z", &gz);
    let dt_max = c.dt.unwrap_or(DEFAULT_STEP_FRACTION * max_kinetic_step(&gx, c.m));
    let (n_steps, dt) = steps(c.t_final, dt_max);
    b.provenance.dt = Some(dt);
    b.provenance.n_steps = Some(n_steps);
    b.tolerance("kinetic_step_limit", max_kinetic_step(&gx, c.m));
    let particle = packet(&gx, &c.particle, id)?;
    let pointer = gaussian_packet(&gz, c.pointer_z0, 0.0, c.pointer_width).ctx(id)?;
    let state = TwoBodyState::product(&particle, &pointer).ctx(id)?;
    let clock = ThetaClock { mass: c.m, pointer_mass: c.pointer_mass, coupling: 1.0 };
    let out = evolve_theta_clock(&state, &clock, dt, n_steps).ctx(id)?;
    let before = pointer_marginal(&state);
    let after = pointer_marginal(&out);
    let PacketConfig { x0, p0, sigma } = c.particle;
    let energy = p0 * p0 / (2.0 * c.m);
    let sigma_p = 1.0 / (2.0 * sigma);
    b.put("record_mean", after.mean - before.mean);
    b.put("record_spread", after.spread);
    b.put("initial_spread", before.spread);
    b.put("excess_spread", (after.spread.powi(2) - before.spread.powi(2)).max(0.0).sqrt());
    b.put("classical_time", -c.m * x0 / p0);
    b.put("classical_spread", c.m * sigma.hypot(x0 * sigma_p / p0) / p0.abs());
    b.put("energy", energy);
    b.put("energy_width_product", energy * c.pointer_width);
    b.put("norm_error", (out.norm_sqr() - state.norm_sqr()).abs());
    b.convention("H = p^2/2m + Theta(-x) pi_z; the pointer mean shift is the record");
    b.arrays.push(ArrayOutput::new(
        "pointer",
        vec![
            Column::new("z", LENGTH, after.z),
            Column::new("density_initial", "1/length", before.density),
            Column::new("density", "1/length", after.density),
        ],
    ));
    Ok(())
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, .., last] => h * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

fn run_allcock(c: &AllcockConfig, b: &mut Builder, id: &str) -> Result<()> {
    let grid = make(&c.grid, id)?;
    b.grid("x", &grid);
    let dt_max = c.dt.unwrap_or(DEFAULT_STEP_FRACTION * max_kinetic_step(&grid, c.m));
    let (n_steps, dt) = steps(c.t_final, dt_max);
    b.provenance.dt = Some(dt);
    b.provenance.n_steps = Some(n_steps);
    let psi = packet(&grid, &c.particle, id)?;
    let potential = AbsorbingPotential::new(c.v).ctx(id)?;
    let run = absorb_evolve(&psi, &potential, c.m, dt, n_steps).ctx(id)?;
    // Free-evolution flux through x = 0, the oracle for the absorbed fraction.
    let flux: Vec<f64> = run
        .times
        .iter()
        .map(|&t| free_evolve(&psi, t, c.m).and_then(|s| probability_current(&s, 0.0, c.m)))
        .collect::<std::result::Result<_, _>>()
        .ctx(id)?;
    let mut cumulative = Vec::with_capacity(flux.len());
    let mut acc = 0.0;
    for (k, f) in flux.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (flux[k - 1] + f);
        }
        cumulative.push(acc);
    }
    let absorbed = *run.absorbed.last().expect("times include t = 0");
    let oracle = trapezoid(&flux, dt);
    b.put("absorbed_fraction", absorbed);
    b.put("flux_integral", oracle);
    b.put("relative_difference", (absorbed - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE));
    b.put("final_norm", 1.0 - absorbed);
    b.convention("absorber exp(-V dt Theta(x)) per step: the decaying sign of the complex potential");
    b.arrays.push(ArrayOutput::new(
        "absorption",
        vec![
            Column::new("t", TIME, run.times),
            Column::new("absorbed", "probability", run.absorbed),
            Column::new("flux", "1/time", flux),
            Column::new("flux_integral", "probability", cumulative),
        ],
    ));
    Ok(())
}

fn superpose(grid: &Grid1D, packets: &[PacketConfig], id: &str) -> Result<WaveState> {
    let mut sum = vec![Complex64::new(0.0, 0.0); grid.len()];
    for p in packets {
        let psi = packet(grid, p, id)?.to_basis(Basis::Position);
        sum.iter_mut().zip(psi.amplitudes()).for_each(|(s, a)| *s += a);
    }
    WaveState::new(*grid, Basis::Position, sum).and_then(WaveState::normalize).ctx(id)
}

/// `⟨A⟩` of a grid-diagonal observable.
fn observable_mean(psi: &WaveState, obs: &KickObservable, id: &str) -> Result<f64> {
    match obs {
        KickObservable::Position => expectation(psi, Observable::Position).ctx(id),
        KickObservable::Momentum => expectation(psi, Observable::Momentum).ctx(id),
        KickObservable::Kinetic { mass } => expectation(psi, Observable::Kinetic { mass: *mass }).ctx(id),
        KickObservable::Table { basis, values } => {
            let s = psi.to_basis(*basis);
            let w = s.grid().measure(*basis);
            Ok(s.density().iter().zip(values).map(|(d, v)| d * v).sum::<f64>() * w / s.norm_sqr())
        }
        KickObservable::ArrivalTime { .. } => Err(ReportError::config(
            "observable",
            "the arrival-time operator is not diagonal on the grid",
        )),
    }
}

fn run_kick(c: &KickConfig, b: &mut Builder, id: &str) -> Result<()> {
    let gx = make(&c.grid_x, id)?;
    let gz = make(&c.grid_z, id)?;
    b.grid("x", &gx);
    b.grid("z", &gz);
    let system = superpose(&gx, &c.system, id)?;
    let pointer = gaussian_packet(&gz, c.pointer.z0, 0.0, c.pointer.width).ctx(id)?;
    let state = TwoBodyState::product(&system, &pointer).ctx(id)?;
    let kicked = impulsive_kick(&state, &KickSpec { lambda: c.lambda, observable: c.observable.clone() }).ctx(id)?;
    let before = pointer_marginal(&state);
    let after = pointer_marginal(&kicked);
    b.put("pointer_mean", after.mean);
    b.put("pointer_shift", after.mean - before.mean);
    b.put("pointer_spread", after.spread);
    b.put("initial_spread", before.spread);
    b.put("expected_shift", c.lambda * observable_mean(&system, &c.observable, id)?);
    b.put("norm_error", (kicked.norm_sqr() - state.norm_sqr()).abs());
    b.convention("kick exp(-i lambda A pi_z) moves the pointer by +lambda a on the branch A = a");
    b.arrays.push(ArrayOutput::new(
        "pointer",
        vec![
            Column::new("z", LENGTH, after.z),
            Column::new("density_initial", "1/length", before.density),
            Column::new("density", "1/length", after.density),
        ],
    ));
    Ok(())
}

fn run_classical(c: &ClassicalConfig, b: &mut Builder, id: &str) -> Result<()> {
    let pairs: Vec<(PairLabel, f64, f64)> = c.start.iter().map(|(&l, v)| (l, v[0], v[1])).collect();
    let start = PhasePoint::new(&pairs).map_err(|e| ReportError::config("start", e.to_string()))?;
    let traj = integrate(&c.model, &start, c.span, c.dt, c.method).ctx(id)?;
    b.provenance.dt = Some(c.dt);
    b.provenance.n_steps = Some(traj.len() - 1);
    b.tolerance("event_tolerance", EVENT_TOLERANCE);
    b.put("energy_drift", traj.energy_drift());
    b.put("max_energy_deviation", traj.max_energy_deviation());
    b.put("initial_energy", traj.energies[0]);
    b.put("n_events", traj.events.len() as f64);
    if let Some(e) = traj.crossings().next() {
        b.put("first_crossing", e.parameter);
    }
    let mut columns = vec![Column::new("param", TIME, traj.params.clone())];
    for &label in &traj.labels {
        let (q, p) = label.names();
        let qs = traj.column(label, false).expect("label comes from the trajectory");
        let ps = traj.column(label, true).expect("label comes from the trajectory");
        b.put(&format!("final_{q}"), *qs.last().expect("nonempty"));
        b.put(&format!("final_{p}"), *ps.last().expect("nonempty"));
        if label == PairLabel::Y {
            b.put("pointer_shift", qs.last().expect("nonempty") - qs[0]);
        }
        if label == PairLabel::Z {
            b.put("delta_P_z", ps.last().expect("nonempty") - ps[0]);
        }
        columns.push(Column::new(q, "phase space", qs));
        columns.push(Column::new(p, "phase space", ps));
    }
    b.arrays.push(ArrayOutput::new("trajectory", columns));
    b.events = traj
        .events
        .iter()
        .map(|e| match e.kind {
            EventKind::Crossing { at, direction } => EventRecord {
                kind: "crossing".into(),
                param: e.parameter,
                at: Some(at),
                direction: Some(direction),
            },
            EventKind::Reflection { at } => {
                EventRecord { kind: "reflection".into(), param: e.parameter, at: Some(at), direction: None }
            }
            EventKind::Kick => EventRecord { kind: "kick".into(), param: e.parameter, at: None, direction: None },
        })
        .collect();
    Ok(())
}

fn run_theta_record(c: &ThetaRecordConfig, b: &mut Builder, id: &str) -> Result<()> {
    let r = theta_arrival_record(c.m, c.x0, c.p_x0, c.p_y0, c.pointer_mass).ctx(id)?;
    b.put("record", r.record);
    b.put("relative_error_estimate", r.relative_error_estimate);
    b.put("crossing_time", r.crossing_time);
    b.put("c1", r.c1);
    b.put("classical_arrival", c.m * (-c.x0) / c.p_x0);
    b.tolerance("event_tolerance", EVENT_TOLERANCE);
    b.convention(THETA_CONVENTION);
    if let Some(d) = c.delta_p_y0 {
        let inputs = ApproximateInputs { g: 1.0, delta_p_y0: d, mass: c.m, c1: r.c1 };
        b.margin(approximate_margin(&inputs, c.threshold).ctx(id)?);
    }
    Ok(())
}

fn energy_summary(b: &mut Builder, r: &EnergyRecord, threshold: f64) {
    b.put("delta_pz", r.delta_pz);
    b.put("hamiltonian", r.hamiltonian);
    b.put("relative_error", (r.delta_pz + r.hamiltonian).abs() / r.hamiltonian.abs().max(f64::MIN_POSITIVE));
    if let Some(v) = r.velocity_condition {
        b.put("velocity_condition", v);
    }
    b.margin(Margin { name: "coupling_position", value: r.margin, threshold, good: r.margin < threshold });
}

fn run_internal_time(c: &InternalTimeConfig, b: &mut Builder, id: &str) -> Result<()> {
    let c1 = (c.p_x0 / c.m).powi(2);
    let map = internal_time_map(&c.coupling, c.m, c.p_y0, c1, c.x_range, c.n).ctx(id)?;
    let model =
        PointerCurveModel::GeneralCoupling { coupling: c.coupling.clone(), mass: c.m, pointer_mass: c.pointer_mass };
    let curve = internal_pointer_curve(&model, c1, c.p_y0, c.x_range, c.n).ctx(id)?;
    b.put("c1", c1);
    b.put("elapsed_time", *map.t.last().expect("n >= 2"));
    b.put("pointer_shift", *curve.y.last().expect("n >= 2"));
    b.convention("C1 = (P_x0/m)^2 from the momentum outside the coupling; t and y vanish at x_range.0");
    b.arrays.push(ArrayOutput::new(
        "internal_time",
        vec![
            Column::new("x", LENGTH, map.x),
            Column::new("t", TIME, map.t),
            Column::new("dydx", "1", curve.dydx),
            Column::new("y", LENGTH, curve.y),
        ],
    ));
    Ok(())
}
