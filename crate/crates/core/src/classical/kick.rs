use super::model::{PairLabel, PhaseObservable, PhasePoint, SystemHamiltonian};
use crate::error::{LabError, Result};

/// Exact time-1 flow of the generator `λ·A(q, p)·P_y`.
///
/// The pointer coordinate jumps by `λ·A`, `P_y` is unchanged and `(q, p)`
/// follow the flow of `A` for a duration `λ·P_y`. With `P_y ≠ 0` the measured
/// system is disturbed, a back-reaction that vanishes in the `P_y = 0` regime.
///
/// The measured system is the `(q, p)` pair, or `(x, P_x)` if no `(q, p)` pair
/// exists. If the point carries a `(t, p_t)` pair, `t` must equal `t0`.
pub fn classical_kick(state: &PhasePoint, observable: &PhaseObservable, lambda: f64, t0: f64) -> Result<PhasePoint> {
    if let Some(t) = state.coord(PairLabel::T) {
        if (t - t0).abs() > 1e-12 * t0.abs().max(1.0) {
            return Err(LabError::config("t0", format!("state is at t = {t}, kick at t0 = {t0}")));
        }
    }
    let system = if state.has(PairLabel::Q) { PairLabel::Q } else { PairLabel::X };
    let (q, p) = state
        .get(system)
        .ok_or_else(|| LabError::config("state", "needs a (q, p) or (x, P_x) pair"))?;
    let (y, py) = state
        .get(PairLabel::Y)
        .ok_or_else(|| LabError::config("state", "needs a pointer pair (y, P_y)"))?;
    let (q, p, y) = kick_flow(observable, lambda, q, p, y, py)?;
    let mut out = state.clone();
    out.set(system, q, p)?;
    out.set(PairLabel::Y, y, py)?;
    Ok(out)
}

/// `(q, p, y)` after the kick.
pub(crate) fn kick_flow(
    observable: &PhaseObservable,
    lambda: f64,
    q: f64,
    p: f64,
    y: f64,
    py: f64,
) -> Result<(f64, f64, f64)> {
    if lambda == 0.0 {
        return Ok((q, p, y));
    }
    let a = observable.value(q, p);
    if !a.is_finite() {
        return Err(LabError::UnsupportedObservable(format!("{observable:?} undefined at q = {q}, p = {p}")));
    }
    let s = lambda * py;
    let (q1, p1) = match *observable {
        PhaseObservable::Position => (q, p - s),
        PhaseObservable::Momentum => (q + s, p),
        PhaseObservable::Energy { hamiltonian } => match hamiltonian {
            SystemHamiltonian::Free { mass } => (q + s * p / mass, p),
            SystemHamiltonian::Harmonic { mass, omega } => {
                let (sn, cs) = (omega * s).sin_cos();
                let q1 = if omega == 0.0 { q + s * p / mass } else { q * cs + p / (mass * omega) * sn };
                (q1, p * cs - mass * omega * q * sn)
            }
        },
        PhaseObservable::ArrivalTime { x0, mass } => {
            // A is conserved and d(p²)/ds = −2m along the flow.
            let radicand = p * p - 2.0 * mass * s;
            if radicand <= 0.0 {
                return Err(LabError::UnsupportedObservable(format!(
                    "arrival-time flow reaches p = 0 (p² − 2mλP_y = {radicand})"
                )));
            }
            let p1 = p.signum() * radicand.sqrt();
            (x0 + a * p1 / mass, p1)
        }
    };
    Ok((q1, p1, y + lambda * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn point(q: f64, p: f64, y: f64, py: f64) -> PhasePoint {
        PhasePoint::new(&[(PairLabel::Q, q, p), (PairLabel::Y, y, py)]).unwrap()
    }

    #[test]
    fn zero_coupling_is_identity() {
        let s = point(1.0, 2.0, 3.0, 4.0);
        let out = classical_kick(&s, &PhaseObservable::Momentum, 0.0, 0.0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn position_kick_with_idle_pointer() {
        let out = classical_kick(&point(3.0, 0.7, 0.0, 0.0), &PhaseObservable::Position, 1.0, 0.0).unwrap();
        assert_eq!(out.get(PairLabel::Y), Some((3.0, 0.0)));
        assert_eq!(out.get(PairLabel::Q), Some((3.0, 0.7)));
    }

    #[test]
    fn arrival_time_kick_records_the_kick_instant() {
        // free particle released from x0 at t = 0; at t0 the travel time equals t0
        let (m, x0, p) = (1.0, -2.0, 0.8);
        let obs = PhaseObservable::ArrivalTime { x0, mass: m };
        for t0 in [0.5, 2.0, 7.25] {
            let q = x0 + p / m * t0;
            let out = classical_kick(&point(q, p, 0.4, 0.0), &obs, 1.0, t0).unwrap();
            assert_abs_diff_eq!(out.coord(PairLabel::Y).unwrap(), 0.4 + t0, epsilon = 1e-13);
        }
    }

    #[test]
    fn kick_flow_preserves_observable() {
        let h = SystemHamiltonian::Harmonic { mass: 1.5, omega: 0.8 };
        let obs = [
            PhaseObservable::Energy { hamiltonian: h },
            PhaseObservable::ArrivalTime { x0: 1.0, mass: 2.0 },
        ];
        for o in obs {
            let (q, p) = (0.4, 1.9);
            let (q1, p1, _) = kick_flow(&o, 0.7, q, p, 0.0, 0.3).unwrap();
            assert_abs_diff_eq!(o.value(q1, p1), o.value(q, p), epsilon = 1e-13);
        }
    }

    #[test]
    fn time_pair_must_match_kick_instant() {
        let s = PhasePoint::new(&[(PairLabel::Q, 0.0, 1.0), (PairLabel::Y, 0.0, 0.0), (PairLabel::T, 1.0, 0.0)]).unwrap();
        assert!(classical_kick(&s, &PhaseObservable::Position, 1.0, 2.0).is_err());
        assert!(classical_kick(&s, &PhaseObservable::Position, 1.0, 1.0).is_ok());
    }
}
