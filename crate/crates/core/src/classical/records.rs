use serde::{Deserialize, Serialize};

use super::coupling::{piecewise_integral, CouplingFunction};
use super::integrate::{integrate, EventKind, Method};
use super::model::{PairLabel, PhasePoint, ScenarioModel};
use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRecord {
    /// Pointer shift produced by the coupling, `∫Θ(−x)dt`.
    pub record: f64,
    /// First-order multiplicative error `P_y0/(m·C1)`.
    pub relative_error_estimate: f64,
    /// Instant at which `x` crosses 0.
    pub crossing_time: f64,
    /// `C1 = (P_x0/m)²`.
    pub c1: f64,
    pub convention: String,
}

pub const THETA_CONVENTION: &str = "P_x0 is the momentum outside the coupling region (x > 0); \
C1 = (P_x0/m)^2; the start momentum inside x < 0 is sqrt(P_x0^2 - 2 m P_y0); \
record = y(t_f) - y(0) - (P_y0/M) t_f";

/// Pointer record of the Θ-clock for a particle released at `x0 < 0`.
pub fn theta_arrival_record(
    mass: f64,
    x0: f64,
    p_x0: f64,
    p_y0: f64,
    pointer_mass: Option<f64>,
) -> Result<ThetaRecord> {
    if !(x0 < 0.0) {
        return Err(LabError::config("x0", format!("must be negative, got {x0}")));
    }
    if !(p_x0 > 0.0) {
        return Err(LabError::NoArrival(format!("P_x0 = {p_x0} never carries the particle to x = 0")));
    }
    let radicand = p_x0 * p_x0 - 2.0 * mass * p_y0;
    if !(radicand > 0.0) {
        return Err(LabError::NoArrival(format!(
            "P_x0² − 2mP_y0 = {radicand}: no motion is possible inside the coupling region"
        )));
    }
    let model = ScenarioModel::ThetaClock { mass, pointer_mass };
    let p_in = radicand.sqrt();
    let t_est = mass * (-x0) / p_in;
    let dt = t_est / 64.0;
    let start = PhasePoint::new(&[(PairLabel::X, x0, p_in), (PairLabel::Y, 0.0, p_y0)])?;
    let traj = integrate(&model, &start, (0.0, 1.25 * t_est + dt), dt, Method::EventRk4)?;
    let crossing_time = traj
        .events
        .iter()
        .find(|e| matches!(e.kind, EventKind::Crossing { at, direction: 1 } if at == 0.0))
        .map(|e| e.parameter)
        .ok_or_else(|| LabError::NoArrival("no crossing of x = 0 within the integration span".into()))?;
    let t_final = *traj.params.last().unwrap();
    let y_final = traj.last().coord(PairLabel::Y).unwrap();
    let drift = pointer_mass.map_or(0.0, |m| p_y0 / m);
    let c1 = (p_x0 / mass).powi(2);
    Ok(ThetaRecord {
        record: y_final - drift * t_final,
        relative_error_estimate: p_y0 / (mass * c1),
        crossing_time,
        c1,
        convention: THETA_CONVENTION.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub delta_pz: f64,
    /// `max g(x)·|z0|` over the range.
    pub margin: f64,
    /// Conserved total Hamiltonian.
    pub hamiltonian: f64,
    /// `P_x/m`; only for the quadratic clock.
    pub velocity_condition: Option<f64>,
}

const PIECES: usize = 64;

/// Quadrature over `PIECES` equal pieces, each also split at the breakpoints.
fn fine_integral(range: (f64, f64), breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let h = (range.1 - range.0) / PIECES as f64;
    (0..PIECES)
        .map(|i| {
            let a = range.0 + i as f64 * h;
            let b = if i == PIECES - 1 { range.1 } else { a + h };
            piecewise_integral(a, b, breaks, &f)
        })
        .sum()
}

fn probe_values(g: &CouplingFunction, range: (f64, f64)) -> Vec<f64> {
    let n = 4001;
    let mut v: Vec<f64> = (0..n)
        .map(|i| g.value(range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64))
        .collect();
    let regions = g.discontinuities().len() + 1;
    let (lo, hi) = (range.0.min(range.1), range.0.max(range.1));
    let jumps = g.discontinuities();
    for r in 0..regions {
        // only regions that intersect the range
        let left = if r == 0 { f64::NEG_INFINITY } else { jumps[r - 1] };
        let right = if r == jumps.len() { f64::INFINITY } else { jumps[r] };
        if right > lo && left < hi {
            v.push(g.region_value(r));
        }
    }
    v
}

fn check_normalized(g: &CouplingFunction, range: (f64, f64)) -> Result<()> {
    g.validate()?;
    if !(range.1 > range.0) {
        return Err(LabError::config("x_range", format!("need start < end, got {range:?}")));
    }
    let total = fine_integral(range, &g.breakpoints(), |x| g.value(x));
    if total == 0.0 {
        return Ok(());
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(LabError::config("coupling", format!("∫g over the range is {total}, expected 1")));
    }
    Ok(())
}

/// Pointer momentum transferred by the linear (ideal) clock,
/// `∫ −g(x)·H/(1 + g(x)z0)² dx` with `H = (H_box0 + P_x)(1 + g(x_start)z0)`.
///
/// A profile identically zero on the range is accepted and gives zero.
pub fn total_energy_ideal(
    h_box: f64,
    p_x: f64,
    g: &CouplingFunction,
    z0: f64,
    x_range: (f64, f64),
) -> Result<EnergyRecord> {
    check_normalized(g, x_range)?;
    let values = probe_values(g, x_range);
    if values.iter().any(|&gv| 1.0 + gv * z0 <= 0.0) {
        return Err(LabError::config("z0", "1 + g(x)·z0 must stay positive"));
    }
    let hamiltonian = (h_box + p_x) * (1.0 + g.value(x_range.0) * z0);
    let delta_pz = fine_integral(x_range, &g.breakpoints(), |x| {
        let gv = g.value(x);
        -gv * hamiltonian / (1.0 + gv * z0).powi(2)
    });
    let margin = values.iter().map(|gv| gv * z0.abs()).fold(0.0, f64::max);
    Ok(EnergyRecord { delta_pz, margin, hamiltonian, velocity_condition: None })
}

/// Pointer momentum transferred by the quadratic clock,
/// `∫ −g/(1 + gz0)^{3/2}·(C + 2mH_box0)/(2√(C − 2mH_box0·z0·g)) dx` with
/// `C = 2m(H − H_box0)`.
pub fn total_energy_real(
    mass: f64,
    h_box: f64,
    p_x: f64,
    g: &CouplingFunction,
    z0: f64,
    x_range: (f64, f64),
) -> Result<EnergyRecord> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(LabError::config("mass", format!("must be positive, got {mass}")));
    }
    check_normalized(g, x_range)?;
    let values = probe_values(g, x_range);
    if values.iter().any(|&gv| 1.0 + gv * z0 <= 0.0) {
        return Err(LabError::config("z0", "1 + g(x)·z0 must stay positive"));
    }
    let hamiltonian = (h_box + p_x * p_x / (2.0 * mass)) * (1.0 + g.value(x_range.0) * z0);
    let c = 2.0 * mass * (hamiltonian - h_box);
    let n = 4001;
    for i in 0..n {
        let x = x_range.0 + (x_range.1 - x_range.0) * i as f64 / (n - 1) as f64;
        let r = c - 2.0 * mass * h_box * z0 * g.value(x);
        if !(r > 0.0) {
            return Err(LabError::TurningPoint { x, radicand: r });
        }
    }
    let delta_pz = fine_integral(x_range, &g.breakpoints(), |x| {
        let gv = g.value(x);
        -gv / (1.0 + gv * z0).powf(1.5) * (c + 2.0 * mass * h_box) / (2.0 * (c - 2.0 * mass * h_box * z0 * gv).sqrt())
    });
    let margin = values.iter().map(|gv| gv * z0.abs()).fold(0.0, f64::max);
    Ok(EnergyRecord { delta_pz, margin, hamiltonian, velocity_condition: Some(p_x / mass) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theta_record_at_idle_pointer() {
        for m in [None, Some(1.0), Some(1e6)] {
            let r = theta_arrival_record(1.0, -2.0, 1.0, 0.0, m).unwrap();
            assert_abs_diff_eq!(r.record, 2.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.crossing_time, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn theta_record_first_order_error() {
        let eps = 0.01;
        let r = theta_arrival_record(1.0, -2.0, 1.0, eps, Some(1e6)).unwrap();
        assert_abs_diff_eq!(r.relative_error_estimate, eps);
        let rel = (r.record - 2.0) / 2.0;
        // exact: (1 − 2ε)^(−1/2) − 1 = ε + 3ε²/2 + …
        assert_abs_diff_eq!(rel, (1.0 - 2.0 * eps).powf(-0.5) - 1.0, epsilon = 1e-9);
        assert!((rel - eps).abs() < 2.0 * eps * eps);
    }

    #[test]
    fn theta_record_requires_arrival() {
        assert!(matches!(theta_arrival_record(1.0, -2.0, -1.0, 0.0, None), Err(LabError::NoArrival(_))));
        assert!(matches!(theta_arrival_record(1.0, -2.0, 0.1, 1.0, None), Err(LabError::NoArrival(_))));
        assert!(matches!(theta_arrival_record(1.0, 2.0, 1.0, 0.0, None), Err(LabError::Config { field: "x0", .. })));
    }

    #[test]
    fn ideal_clock_transfers_minus_h() {
        let g = CouplingFunction::Box { width: 1.0 };
        let r = total_energy_ideal(0.5, 1.0, &g, 0.0, (-1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(r.hamiltonian, 1.5);
        assert_abs_diff_eq!(r.delta_pz, -1.5, epsilon = 1e-9);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn ideal_clock_error_series() {
        // uniform g·z0 = ε on a box: ΔP_z = −H/(1 + ε)²
        let g = CouplingFunction::Box { width: 2.0 };
        for eps in [0.05, 0.1, 0.2] {
            let r = total_energy_ideal(0.5, 1.0, &g, 2.0 * eps, (-1.0, 3.0)).unwrap();
            let rel = (r.delta_pz + r.hamiltonian).abs() / r.hamiltonian;
            assert_abs_diff_eq!(rel, 1.0 - (1.0 + eps).powi(-2), epsilon = 1e-12);
            assert_abs_diff_eq!(r.margin, eps, epsilon = 1e-15);
        }
    }

    #[test]
    fn ideal_clock_rejects_nonpositive_denominator() {
        let g = CouplingFunction::Box { width: 0.5 };
        assert!(matches!(
            total_energy_ideal(0.5, 1.0, &g, -0.5, (-1.0, 1.0)),
            Err(LabError::Config { field: "z0", .. })
        ));
    }

    #[test]
    fn real_clock_needs_unit_velocity() {
        let g = CouplingFunction::Bump { start: 0.0, width: 1.0 };
        let r = total_energy_real(1.0, 0.5, 1.0, &g, 0.0, (-1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(r.delta_pz, -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.hamiltonian, 1.0);
        let r = total_energy_real(1.0, 0.5, 2.0, &g, 0.0, (-1.0, 2.0)).unwrap();
        assert_abs_diff_eq!(r.delta_pz, -1.25, epsilon = 1e-9);
        assert_eq!(r.velocity_condition, Some(2.0));
    }

    #[test]
    fn zero_profile_transfers_nothing() {
        let g = CouplingFunction::Tabulated { x_start: 0.0, dx: 1.0, values: vec![0.0, 0.0, 0.0] };
        assert_eq!(total_energy_ideal(0.5, 1.0, &g, 0.3, (-1.0, 3.0)).unwrap().delta_pz, 0.0);
        assert_eq!(total_energy_real(1.0, 0.5, 1.0, &g, 0.3, (-1.0, 3.0)).unwrap().delta_pz, 0.0);
    }

    #[test]
    fn real_clock_turning_point() {
        // C − 2mH0·z0·g ≤ 0 inside a narrow tall box
        let g = CouplingFunction::Box { width: 0.1 };
        let err = total_energy_real(1.0, 1.0, 0.5, &g, 1.0, (-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, LabError::TurningPoint { .. }));
    }
}
