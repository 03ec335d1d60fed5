use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Interaction profile `g(x)` between the clock particle and the pointer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CouplingFunction {
    /// `Θ(−x)`.
    Step,
    /// Height `1/width` on `[0, width]`.
    Box { width: f64 },
    /// `(8/3w) sin⁴(π(x − start)/w)` on `[start, start + w]`; C³ with unit integral.
    Bump { start: f64, width: f64 },
    /// Piecewise-linear interpolation of `values` on `x_start + i·dx`, zero
    /// outside. End values must vanish so the profile is continuous.
    Tabulated { x_start: f64, dx: f64, values: Vec<f64> },
}

impl CouplingFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            CouplingFunction::Step => Ok(()),
            CouplingFunction::Box { width } | CouplingFunction::Bump { width, .. } => {
                if *width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(LabError::config("width", format!("must be positive, got {width}")))
                }
            }
            CouplingFunction::Tabulated { dx, values, .. } => {
                if !(*dx > 0.0) || values.len() < 2 {
                    return Err(LabError::config("values", "need dx > 0 and at least two samples"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(LabError::config("values", "non-finite sample"));
                }
                if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
                    return Err(LabError::config("values", "end samples must be zero"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            CouplingFunction::Step => {
                if x < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingFunction::Box { width } => {
                if (0.0..=*width).contains(&x) {
                    1.0 / width
                } else {
                    0.0
                }
            }
            CouplingFunction::Bump { start, width } => {
                let u = (x - start) / width;
                if (0.0..=1.0).contains(&u) {
                    8.0 / (3.0 * width) * (PI * u).sin().powi(4)
                } else {
                    0.0
                }
            }
            CouplingFunction::Tabulated { x_start, dx, values } => {
                let u = (x - x_start) / dx;
                if u < 0.0 || u >= (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = u.floor() as usize;
                let f = u - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// `dg/dx` away from discontinuities.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            CouplingFunction::Step | CouplingFunction::Box { .. } => 0.0,
            CouplingFunction::Bump { start, width } => {
                let u = (x - start) / width;
                if (0.0..=1.0).contains(&u) {
                    let (s, c) = (PI * u).sin_cos();
                    8.0 / (3.0 * width) * 4.0 * s.powi(3) * c * PI / width
                } else {
                    0.0
                }
            }
            CouplingFunction::Tabulated { x_start, dx, values } => {
                let u = (x - x_start) / dx;
                if u < 0.0 || u >= (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = u.floor() as usize;
                (values[i + 1] - values[i]) / dx
            }
        }
    }

    /// Points where `g` jumps, ascending.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            CouplingFunction::Step => vec![0.0],
            CouplingFunction::Box { width } => vec![0.0, *width],
            _ => Vec::new(),
        }
    }

    /// Points where `g` or its derivative changes form; quadrature splits there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            CouplingFunction::Step => vec![0.0],
            CouplingFunction::Box { width } => vec![0.0, *width],
            CouplingFunction::Bump { start, width } => vec![*start, start + width],
            CouplingFunction::Tabulated { x_start, dx, values } => {
                (0..values.len()).map(|i| x_start + i as f64 * dx).collect()
            }
        }
    }

    /// Value of `g` inside the open interval `region` of the partition by
    /// [`discontinuities`](Self::discontinuities); continuous profiles ignore
    /// the region.
    pub fn value_in_region(&self, x: f64, region: usize) -> f64 {
        match self {
            CouplingFunction::Step => {
                if region == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            CouplingFunction::Box { width } => {
                if region == 1 {
                    1.0 / width
                } else {
                    0.0
                }
            }
            _ => self.value(x),
        }
    }

    /// Region index of `x` given the direction of motion (used when `x` sits
    /// exactly on a discontinuity).
    pub fn region_of(&self, x: f64, moving_right: bool) -> usize {
        self.discontinuities()
            .iter()
            .filter(|&&d| d < x || (d == x && moving_right))
            .count()
    }

    pub fn region_value(&self, region: usize) -> f64 {
        self.value_in_region(f64::NAN, region)
    }
}

/// Gauss–Legendre quadrature of `f` over `[a, b]`, split at `breaks`.
pub(crate) fn piecewise_integral(a: f64, b: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&c| c > lo && c < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let rule = gauss_rule();
    let mut total = 0.0;
    let mut left = lo;
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        if right > left {
            total += rule.integrate(left, right, &f);
        }
        left = right;
    }
    sign * total
}

fn gauss_rule() -> &'static gauss_quad::GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<gauss_quad::GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| gauss_quad::GaussLegendre::new(24.try_into().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalized_profiles_integrate_to_one() {
        for g in [
            CouplingFunction::Box { width: 0.7 },
            CouplingFunction::Bump { start: -1.0, width: 2.5 },
        ] {
            let mut total = 0.0;
            // fine subdivision so the sum does not rely on piece boundaries
            let n = 64;
            for i in 0..n {
                let a = -3.0 + 6.0 * i as f64 / n as f64;
                let b = a + 6.0 / n as f64;
                total += piecewise_integral(a, b, &g.breakpoints(), |x| g.value(x));
            }
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn step_is_zero_one_valued() {
        let g = CouplingFunction::Step;
        for x in [-5.0, -1e-12, 1e-12, 3.0] {
            let v = g.value(x);
            assert!(v == 0.0 || v == 1.0);
        }
        assert_eq!(g.region_of(-1.0, true), 0);
        assert_eq!(g.region_of(0.0, true), 1);
        assert_eq!(g.region_of(0.0, false), 0);
    }

    #[test]
    fn bump_derivative_matches_differences() {
        let g = CouplingFunction::Bump { start: 0.0, width: 2.0 };
        for x in [0.1, 0.5, 1.0, 1.7] {
            let h = 1e-6;
            let fd = (g.value(x + h) - g.value(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(g.derivative(x), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn tabulated_validation_and_interpolation() {
        let g = CouplingFunction::Tabulated { x_start: 0.0, dx: 0.5, values: vec![0.0, 1.0, 2.0, 0.0] };
        g.validate().unwrap();
        assert_abs_diff_eq!(g.value(0.75), 1.5);
        assert_abs_diff_eq!(g.derivative(0.75), 2.0);
        let bad = CouplingFunction::Tabulated { x_start: 0.0, dx: 0.5, values: vec![1.0, 0.0] };
        assert!(bad.validate().is_err());
    }
}
