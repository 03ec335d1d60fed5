//! Ideal (indirect) arrival-time statistics from the Aharonov–Bohm POVM.
//!
//! For a normalized state φ the density of arrival at x = 0 is
//!
//! ```text
//! Π(T) = Σ_α |⟨φ|Tα⟩|²,   ⟨φ|Tα⟩ = (2π)^{-1/2} ∫ dp φ*(p) Φ_{Tα}(p)
//! ```
//!
//! with `Φ_{Tα}` sampled on the momentum grid. The `(2π)^{-1/2}` makes
//! `∫ Π dT = 1` for states without a `p = 0` component.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quantum::free_evolve;
use crate::spectral::{expectation, Basis, Observable, WaveState};
use crate::states::{ArrivalEigenfunction, Direction};

/// Captured mass below which a distribution is flagged as under-covering.
pub const COVERAGE_THRESHOLD: f64 = 0.99;
/// Default number of T samples.
pub const DEFAULT_T_SAMPLES: usize = 2048;

/// Sampled arrival-time density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalDistribution {
    pub t_samples: Vec<f64>,
    pub density: Vec<f64>,
    /// Density per direction sector, `[α = +1, α = −1]`.
    pub sector_density: [Vec<f64>; 2],
    pub mass: f64,
    pub source: String,
    pub n_points: usize,
    pub t_range: (f64, f64),
    pub captured_mass: f64,
}

impl ArrivalDistribution {
    pub fn dt(&self) -> f64 {
        self.t_samples[1] - self.t_samples[0]
    }

    pub fn coverage_warning(&self) -> Option<String> {
        (self.captured_mass < COVERAGE_THRESHOLD).then(|| {
            format!(
                "captured mass {:.6} < {COVERAGE_THRESHOLD} on T in [{}, {}]",
                self.captured_mass, self.t_range.0, self.t_range.1
            )
        })
    }

    /// Integral of one sector's density.
    pub fn sector_mass(&self, direction: Direction) -> f64 {
        trapezoid(&self.sector_density[sector_index(direction)], self.dt())
    }
}

fn sector_index(direction: Direction) -> usize {
    match direction {
        Direction::Right => 0,
        Direction::Left => 1,
    }
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])) * h,
    }
}

/// Uniform samples `t0, t0 + h, ...` with `n` entries spanning `range`.
pub fn uniform_samples(range: (f64, f64), n: usize) -> Vec<f64> {
    let h = (range.1 - range.0) / (n - 1) as f64;
    (0..n).map(|i| range.0 + i as f64 * h).collect()
}

// Re-anchor the phase recursion with a direct evaluation this often.
const REANCHOR: usize = 128;

/// Arrival-time density `Π(T)` on `n_t` uniform samples of `t_range`.
pub fn arrival_density(
    phi: &WaveState,
    mass: f64,
    t_range: (f64, f64),
    n_t: usize,
) -> Result<ArrivalDistribution> {
    phi.require_normalizable()?;
    if !(mass > 0.0) {
        return Err(LabError::config("m", format!("mass must be positive, got {mass}")));
    }
    if n_t < 2 || !(t_range.0 < t_range.1) {
        return Err(LabError::config("t_range", "need n_t >= 2 and an increasing T range"));
    }
    let psi = phi.to_basis(Basis::Momentum);
    let grid = *psi.grid();
    let dp = grid.dp();
    let momenta = grid.momenta();
    let t_samples = uniform_samples(t_range, n_t);
    let h = t_samples[1] - t_samples[0];

    let amp_max = psi.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
    let cutoff = amp_max * 1e-15;

    let mut sector_density = [vec![0.0; n_t], vec![0.0; n_t]];
    for direction in Direction::BOTH {
        // coefficients c_k = φ*(p_k) Φ_{0α}(p_k) dp / sqrt(2π) and energies E_k
        let eig = ArrivalEigenfunction::new(0.0, direction, mass)?;
        let (coeffs, energies): (Vec<Complex64>, Vec<f64>) = psi
            .amplitudes()
            .iter()
            .zip(&momenta)
            .filter(|(a, &p)| direction.contains(p) && a.norm() > cutoff)
            .map(|(a, &p)| {
                (
                    a.conj() * eig.amplitude(p) * dp / (2.0 * PI).sqrt(),
                    p * p / (2.0 * mass),
                )
            })
            .unzip();
        if coeffs.is_empty() {
            continue;
        }
        let rotors: Vec<Complex64> = energies.iter().map(|&e| Complex64::from_polar(1.0, h * e)).collect();
        let mut current = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        let out = &mut sector_density[sector_index(direction)];
        for (i, &t) in t_samples.iter().enumerate() {
            if i % REANCHOR == 0 {
                for ((z, c), &e) in current.iter_mut().zip(&coeffs).zip(&energies) {
                    *z = c * Complex64::from_polar(1.0, t * e);
                }
            }
            let amp: Complex64 = current.iter().sum();
            out[i] = amp.norm_sqr();
            for (z, r) in current.iter_mut().zip(&rotors) {
                *z *= r;
            }
        }
    }

    let density: Vec<f64> = sector_density[0]
        .iter()
        .zip(&sector_density[1])
        .map(|(a, b)| a + b)
        .collect();
    let captured_mass = trapezoid(&density, h);
    Ok(ArrivalDistribution {
        t_samples,
        density,
        sector_density,
        mass,
        source: format!("state on {} points, x in [{}, {}]", grid.len(), grid.x_min(), grid.x_max()),
        n_points: grid.len(),
        t_range,
        captured_mass,
    })
}

/// Default T window: mean ± 10 spreads of a quasi-classical estimate built from
/// the state's position and momentum moments.
pub fn default_t_window(phi: &WaveState, mass: f64) -> Result<(f64, f64)> {
    let x = expectation(phi, Observable::Position)?;
    let p = expectation(phi, Observable::Momentum)?;
    if p.abs() < f64::EPSILON {
        return Err(LabError::UndefinedMoments("zero mean momentum: no classical arrival".into()));
    }
    let sx = crate::spectral::position_spread(phi)?;
    let p2 = 2.0 * expectation(phi, Observable::Kinetic { mass: 1.0 })?;
    let sp = (p2 - p * p).max(0.0).sqrt();
    let mean = -mass * x / p;
    let spread = (mass * sx / p.abs()).hypot(mass * x.abs() * sp / (p * p));
    Ok((mean - 10.0 * spread, mean + 10.0 * spread))
}

/// Overlap `⟨Tα|T'α'⟩` smeared in `T'` by a normalized Gaussian of width `w`,
/// evaluated by quadrature over the momentum grid.
///
/// In closed form the unsmeared kernel is
/// `δ_{αα'} (1/2)(δ(T−T') + i P 1/(π(T'−T)))`; smearing turns the delta into a
/// Gaussian and the principal value into a Dawson function.
pub fn smeared_overlap(
    grid: &crate::spectral::Grid1D,
    mass: f64,
    t: f64,
    t_prime: f64,
    alpha: Direction,
    alpha_prime: Direction,
    w: f64,
) -> Result<Complex64> {
    if !(w > 0.0) {
        return Err(LabError::config("w", format!("test width must be positive, got {w}")));
    }
    let bra = ArrivalEigenfunction::new(t, alpha, mass)?;
    let ket = ArrivalEigenfunction::new(t_prime, alpha_prime, mass)?;
    let sum: Complex64 = grid
        .momenta()
        .into_iter()
        .map(|p| {
            let e = p * p / (2.0 * mass);
            bra.amplitude(p).conj() * ket.amplitude(p) * (-0.5 * w * w * e * e).exp()
        })
        .sum();
    Ok(sum * grid.dp() / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub tau: f64,
    pub mass: f64,
}

/// Mean and second moment about `t_ref`, both normalized by the captured mass.
pub fn moments(dist: &ArrivalDistribution, t_ref: f64) -> Result<Moments> {
    let h = dist.dt();
    let mass = trapezoid(&dist.density, h);
    if !(mass > 0.0) {
        return Err(LabError::UndefinedMoments("distribution has zero mass".into()));
    }
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        let vals: Vec<f64> = dist
            .t_samples
            .iter()
            .zip(&dist.density)
            .map(|(&t, &d)| f(t) * d)
            .collect();
        trapezoid(&vals, h) / mass
    };
    let mean = weighted(&|t| t);
    let tau = weighted(&|t| (t - t_ref).powi(2)).sqrt();
    Ok(Moments { mean, tau, mass })
}

/// `τ·⟨E⟩` with ħ = 1. The Wigner relation holds when this exceeds 1.
pub fn wigner_margin(phi: &WaveState, dist: &ArrivalDistribution, t_ref: f64, mass: f64) -> Result<f64> {
    let energy = expectation(phi, Observable::Kinetic { mass })?;
    if !(energy > 0.0) {
        return Err(LabError::UndefinedMoments("zero mean energy".into()));
    }
    Ok(moments(dist, t_ref)?.tau * energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceResidual {
    /// `max_T |Π_{φ(t)}(T) − Π_{φ(0)}(T+t)|`.
    pub absolute: f64,
    /// `absolute / max_T Π_{φ(0)}`.
    pub relative: f64,
    pub coverage_warning: bool,
}

/// Time-covariance check of the POVM under free evolution by `t`.
pub fn covariance_residual(
    phi: &WaveState,
    t: f64,
    mass: f64,
    t_range: (f64, f64),
    n_t: usize,
) -> Result<CovarianceResidual> {
    let evolved = free_evolve(phi, t, mass)?;
    let moved = arrival_density(&evolved, mass, t_range, n_t)?;
    let reference = arrival_density(phi, mass, (t_range.0 + t, t_range.1 + t), n_t)?;
    let absolute = moved
        .density
        .iter()
        .zip(&reference.density)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = reference.density.iter().copied().fold(0.0, f64::max);
    Ok(CovarianceResidual {
        absolute,
        relative: if peak > 0.0 { absolute / peak } else { absolute },
        coverage_warning: moved.coverage_warning().is_some() || reference.coverage_warning().is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use crate::states::gaussian_packet;
    use approx::assert_abs_diff_eq;

    fn flat(range: (f64, f64), n: usize, f: impl Fn(f64) -> f64) -> ArrivalDistribution {
        let t_samples = uniform_samples(range, n);
        let density: Vec<f64> = t_samples.iter().map(|&t| f(t)).collect();
        ArrivalDistribution {
            sector_density: [density.clone(), vec![0.0; n]],
            captured_mass: trapezoid(&density, t_samples[1] - t_samples[0]),
            t_samples,
            density,
            mass: 1.0,
            source: "test".into(),
            n_points: 0,
            t_range: range,
        }
    }

    #[test]
    fn moments_of_simple_densities() {
        let uniform = flat((0.0, 1.0), 1001, |_| 1.0);
        let m = moments(&uniform, 0.5).unwrap();
        assert_abs_diff_eq!(m.tau, (1.0f64 / 12.0).sqrt(), epsilon = 1e-6);

        let sym = flat((0.0, 6.0), 601, |t| (-(t - 3.0).powi(2)).exp());
        assert_abs_diff_eq!(moments(&sym, 0.0).unwrap().mean, 3.0, epsilon = 1e-12);

        let s = 0.7;
        let gauss = flat((-10.0, 10.0), 4001, |t| (-(t * t) / (2.0 * s * s)).exp());
        assert_abs_diff_eq!(moments(&gauss, 0.0).unwrap().tau, s, epsilon = 1e-10);

        let empty = flat((0.0, 1.0), 11, |_| 0.0);
        assert!(matches!(moments(&empty, 0.0), Err(LabError::UndefinedMoments(_))));
    }

    #[test]
    fn reference_packet_statistics() {
        // x0 = −10, p0 = 2: classical arrival at 5.
        let g = make_grid(4096, -200.0, 200.0).unwrap();
        let phi = gaussian_packet(&g, -10.0, 2.0, 1.0).unwrap();
        let dist = arrival_density(&phi, 1.0, (-40.0, 60.0), 4001).unwrap();
        assert!(dist.density.iter().all(|&d| d >= 0.0));
        assert!((dist.captured_mass - 1.0).abs() < 1e-3, "{}", dist.captured_mass);
        let m = moments(&dist, 0.0).unwrap();
        // the first moment equals −m·x0·⟨1/p⟩ over the Gaussian momentum law
        // (σ_p = 0.5), restricted to momenta whose arrival lies in the window
        let (mut num, mut den, mut total, mut left) = (0.0, 0.0, 0.0, 0.0);
        let dp = 1e-4;
        for k in -100_000..100_000 {
            let p = (k as f64 + 0.5) * dp;
            let w = (-(p - 2.0).powi(2) / 0.5).exp();
            total += w;
            if p < 0.0 {
                left += w;
            }
            let t = 10.0 / p;
            if (-40.0..=60.0).contains(&t) {
                num += w * t;
                den += w;
            }
        }
        assert!((m.mean - num / den).abs() < 5e-3, "mean {} vs {}", m.mean, num / den);
        // each sector integrates to the weight of its momenta over all T, so a
        // window can only hold part of the left-moving weight
        let sector = dist.sector_mass(Direction::Left);
        assert!(sector > 0.0 && sector < left / total, "left sector {sector} vs {}", left / total);
        assert!(dist.coverage_warning().is_none());

        let margin = wigner_margin(&phi, &dist, m.mean, 1.0).unwrap();
        assert!(margin > 1.0);
        let lo = wigner_margin(&phi, &dist, m.mean - 10.0, 1.0).unwrap();
        let hi = wigner_margin(&phi, &dist, m.mean + 10.0, 1.0).unwrap();
        assert!(lo > margin && hi > margin);
    }

    #[test]
    fn narrow_window_warns() {
        let g = make_grid(2048, -100.0, 100.0).unwrap();
        let phi = gaussian_packet(&g, -10.0, 2.0, 1.0).unwrap();
        let dist = arrival_density(&phi, 1.0, (4.0, 6.0), 64).unwrap();
        assert!(dist.coverage_warning().is_some());
    }

    #[test]
    fn rejects_generalized_input() {
        let g = make_grid(64, -10.0, 10.0).unwrap();
        let eig = crate::states::ab_eigenfunction(
            &ArrivalEigenfunction::new(0.0, Direction::Right, 1.0).unwrap(),
            &g,
        );
        assert_eq!(
            arrival_density(&eig, 1.0, (0.0, 1.0), 8).unwrap_err(),
            LabError::GeneralizedState
        );
    }

    #[test]
    fn covariance_identity_at_zero_shift() {
        let g = make_grid(2048, -100.0, 100.0).unwrap();
        let phi = gaussian_packet(&g, -10.0, 2.0, 1.0).unwrap();
        let r = covariance_residual(&phi, 0.0, 1.0, (-10.0, 30.0), 401).unwrap();
        assert!(r.absolute < 1e-14);
        for t in [1.0, -2.0] {
            let r = covariance_residual(&phi, t, 1.0, (-10.0, 30.0), 401).unwrap();
            assert!(r.relative < 1e-6, "t = {t}: {}", r.relative);
        }
    }

    // Dawson-function values D(u) from an independent table (scipy.special.dawsn).
    const DAWSON: [(f64, f64); 4] = [
        (0.25, 0.23983916356290),
        (0.5, 0.42443638350202),
        (1.0, 0.53807950691277),
        (2.0, 0.30134038892379),
    ];

    #[test]
    fn smeared_overlap_matches_closed_form() {
        let g = make_grid(8192, -400.0, 400.0).unwrap();
        let (m, w) = (1.0, 1.0);
        for narrow in [1.0, 0.5, 0.2] {
            let c = smeared_overlap(&g, m, 0.0, 0.0, Direction::Right, Direction::Right, narrow).unwrap();
            let half_gauss = 0.5 / ((2.0 * PI).sqrt() * narrow);
            assert!((c.re - half_gauss).abs() < 0.02 * half_gauss);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
        }
        let half_gauss = 0.5 / ((2.0 * PI).sqrt() * w);

        for (u, d) in DAWSON {
            let tau = u * 2f64.sqrt() * w;
            let c = smeared_overlap(&g, m, 0.0, tau, Direction::Right, Direction::Right, w).unwrap();
            let im = 2f64.sqrt() / w * d / (2.0 * PI);
            assert_abs_diff_eq!(c.im, im, epsilon = 1e-6);
            let re = (-tau * tau / (2.0 * w * w)).exp() * half_gauss;
            assert_abs_diff_eq!(c.re, re, epsilon = 1e-6);
            let flipped = smeared_overlap(&g, m, tau, 0.0, Direction::Right, Direction::Right, w).unwrap();
            assert_abs_diff_eq!(flipped.im, -c.im, epsilon = 1e-12);
        }

        for (t, tp) in [(0.0, 0.0), (1.0, -2.0), (3.0, 3.5)] {
            let x = smeared_overlap(&g, m, t, tp, Direction::Right, Direction::Left, w).unwrap();
            assert!(x.norm() < 1e-10);
        }
    }
}
