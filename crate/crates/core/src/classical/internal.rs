use serde::{Deserialize, Serialize};

use super::coupling::{piecewise_integral, CouplingFunction};
use super::integrate::rk4_step;
use super::model::SystemHamiltonian;
use crate::error::{LabError, Result};

/// Samples of a map from the clock coordinate `x` to a second quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalTimeMap {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerCurve {
    pub x: Vec<f64>,
    pub dydx: Vec<f64>,
    pub y: Vec<f64>,
}

/// Coupled model whose pointer curve is evaluated in the internal time `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PointerCurveModel {
    GeneralCoupling {
        coupling: CouplingFunction,
        mass: f64,
        #[serde(default)]
        pointer_mass: Option<f64>,
    },
    /// The measured observable is conserved along the motion, so its value
    /// enters as a constant.
    InternalObservable { coupling: CouplingFunction, mass: f64, observable_value: f64 },
}

fn sample_range(x_range: (f64, f64), n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(LabError::config("n", "need at least two samples"));
    }
    if !(x_range.0.is_finite() && x_range.1.is_finite()) || x_range.0 == x_range.1 {
        return Err(LabError::config("x_range", format!("need two distinct finite ends, got {x_range:?}")));
    }
    let step = (x_range.1 - x_range.0) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { x_range.1 } else { x_range.0 + i as f64 * step })
        .collect())
}

/// First point on the range where `radicand` is not positive. Checks every
/// sample, a refined grid and both sides of each breakpoint.
fn find_turning_point(x: &[f64], breaks: &[f64], radicand: &impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let (lo, hi) = (x[0].min(x[x.len() - 1]), x[0].max(x[x.len() - 1]));
    let refine = 8;
    let mut probes = Vec::with_capacity(x.len() * refine + 2 * breaks.len());
    for w in x.windows(2) {
        for k in 0..refine {
            probes.push(w[0] + (w[1] - w[0]) * k as f64 / refine as f64);
        }
    }
    probes.push(x[x.len() - 1]);
    let eps = 1e-12 * (hi - lo).max(1.0);
    for &b in breaks {
        for c in [b - eps, b + eps] {
            if c >= lo && c <= hi {
                probes.push(c);
            }
        }
    }
    probes
        .into_iter()
        .filter_map(|xp| {
            let r = radicand(xp);
            (!(r > 0.0)).then_some((xp, r))
        })
        .min_by(|a, b| ((a.0 - x[0]).abs()).total_cmp(&(b.0 - x[0]).abs()))
}

fn cumulative(x: &[f64], breaks: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in x.windows(2) {
        acc += piecewise_integral(w[0], w[1], breaks, &f);
        out.push(acc);
    }
    out
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(field, format!("must be positive, got {v}")))
    }
}

/// Elapsed time `t(x) = |∫ dx'/√(C1 − 2P_y0·g(x')/m)|` from `x_range.0`,
/// sampled at `n` equally spaced points. The particle moves from
/// `x_range.0` towards `x_range.1`.
pub fn internal_time_map(
    g: &CouplingFunction,
    mass: f64,
    p_y0: f64,
    c1: f64,
    x_range: (f64, f64),
    n: usize,
) -> Result<InternalTimeMap> {
    g.validate()?;
    positive("mass", mass)?;
    let x = sample_range(x_range, n)?;
    let radicand = |xv: f64| c1 - 2.0 * p_y0 * g.value(xv) / mass;
    let breaks = g.breakpoints();
    if let Some((xt, r)) = find_turning_point(&x, &breaks, &radicand) {
        return Err(LabError::TurningPoint { x: xt, radicand: r });
    }
    let sign = (x_range.1 - x_range.0).signum();
    let t = cumulative(&x, &breaks, |xv| sign / radicand(xv).sqrt());
    Ok(InternalTimeMap { x, t })
}

/// Pointer slope `dy/dx` and position `y(x)` (with `y(x_range.0) = 0`).
///
/// The branch of the square root follows the direction of motion, taken from
/// the orientation of `x_range`. `c` is `C1` for the general coupling and `C`
/// for the internal-observable model.
pub fn internal_pointer_curve(
    model: &PointerCurveModel,
    c: f64,
    p_y0: f64,
    x_range: (f64, f64),
    n: usize,
) -> Result<PointerCurve> {
    let x = sample_range(x_range, n)?;
    let sign = (x_range.1 - x_range.0).signum();
    let (g, mass, drift, a) = match model {
        PointerCurveModel::GeneralCoupling { coupling, mass, pointer_mass } => {
            if let Some(m) = pointer_mass {
                positive("pointer_mass", *m)?;
            }
            (coupling, *mass, pointer_mass.map_or(0.0, |m| p_y0 / m), 1.0)
        }
        PointerCurveModel::InternalObservable { coupling, mass, observable_value } => {
            (coupling, *mass, 0.0, *observable_value)
        }
    };
    g.validate()?;
    positive("mass", mass)?;
    let radicand = |xv: f64| c - 2.0 * a * p_y0 * g.value(xv) / mass;
    let breaks = g.breakpoints();
    if let Some((xt, r)) = find_turning_point(&x, &breaks, &radicand) {
        return Err(LabError::TurningPoint { x: xt, radicand: r });
    }
    let slope = |xv: f64| (drift + a * g.value(xv)) / (sign * radicand(xv).sqrt());
    let dydx = x.iter().map(|&xv| slope(xv)).collect();
    let y = cumulative(&x, &breaks, slope);
    Ok(PointerCurve { x, dydx, y })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArnoldComparison {
    pub max_deviation: f64,
    /// Reduced route: `x` as the parameter, with `t(x)` and `P_x(x)`.
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub p_reduced: Vec<f64>,
    /// Time route sampled at the reduced `t(x)`.
    pub x_time: Vec<f64>,
    pub p_time: Vec<f64>,
}

/// Integrates `H2 = p_t + H1(x, P)` twice, once in the external time and once
/// with `x` as the parameter (`P = K(x, p_t)`, `dt/dx = m/K`), and compares
/// the phase-space points after aligning the parameters.
///
/// `start = (x, P)` must sit at `segment.0` and move towards `segment.1`.
pub fn arnold_compare(
    h1: &SystemHamiltonian,
    start: (f64, f64),
    segment: (f64, f64),
    n: usize,
) -> Result<ArnoldComparison> {
    h1.validate()?;
    if start.0 != segment.0 {
        return Err(LabError::config("start", format!("start x = {} must equal segment start {}", start.0, segment.0)));
    }
    let x = sample_range(segment, n.max(2))?;
    let sigma = (segment.1 - segment.0).signum();
    if start.1 * sigma <= 0.0 {
        return Err(LabError::Monotonicity(format!(
            "momentum {} does not move the particle towards {}",
            start.1, segment.1
        )));
    }
    let m = h1.mass();
    let energy = h1.value(start.0, start.1);
    let radicand = |xv: f64| 2.0 * m * (energy - h1.potential(xv));
    if let Some((xt, r)) = find_turning_point(&x, &[], &radicand) {
        return Err(LabError::Monotonicity(format!("turning point near x = {xt} (P² = {r})")));
    }
    let k = |xv: f64| sigma * radicand(xv).sqrt();

    // reduced route: t(x) by RK4 in x, P from the constraint
    let substeps = 8;
    let mut t = vec![0.0];
    let mut state = [0.0];
    for w in x.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for j in 0..substeps {
            let x0 = w[0] + j as f64 * h;
            // the parameter enters the right-hand side, so carry it as a state
            let f = |s: &[f64], out: &mut [f64]| {
                out[0] = m / k(s[1]);
                out[1] = 1.0;
            };
            let next = rk4_step(&f, &[state[0], x0], h);
            state[0] = next[0];
        }
        t.push(state[0]);
    }
    let p_reduced: Vec<f64> = x.iter().map(|&xv| k(xv)).collect();

    // time route sampled at the reduced times
    let t_total = t[t.len() - 1];
    let h_max = t_total / (substeps * (n.max(2) - 1)) as f64;
    let rhs = |s: &[f64], out: &mut [f64]| {
        out[0] = h1.dh_dp(s[1]);
        out[1] = -h1.dh_dq(s[0]);
    };
    let mut s = vec![start.0, start.1];
    let mut x_time = vec![start.0];
    let mut p_time = vec![start.1];
    for w in t.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / h_max).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            s = rk4_step(&rhs, &s, h);
        }
        x_time.push(s[0]);
        p_time.push(s[1]);
    }
    let max_deviation = (0..x.len())
        .map(|i| (x_time[i] - x[i]).abs().max((p_time[i] - p_reduced[i]).abs()))
        .fold(0.0, f64::max);
    Ok(ArnoldComparison { max_deviation, x, t, p_reduced, x_time, p_time })
}
