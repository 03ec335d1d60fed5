//! Uniform grids, position/momentum transforms and quadrature.
//!
//! Momentum samples sit half a bin off the usual FFT lattice,
//! `p_k = (k - n/2 + 1/2) dp`, so `p = 0` is never sampled. Position samples are
//! `x_j = x_min + j dx` for `j = 0..n` (the right end point is the periodic image
//! of the left one). With these conventions the discrete transform
//!
//! ```text
//! ψ(p_k) = dx / sqrt(2π) Σ_j ψ(x_j) exp(-i p_k x_j)
//! ```
//!
//! is unitary between the `dx`- and `dp`-weighted inner products.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(LabError::config(
                "n_points",
                format!("{n_points} is not a power of two >= 8"),
            ));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(LabError::config(
                "x_range",
                format!("degenerate extent [{x_min}, {x_max}]"),
            ));
        }
        Ok(Self {
            n_points,
            x_min,
            x_max,
        })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn extent(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.extent() / self.n_points as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dx())
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64 + 0.5) * self.dp()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// Largest sampled |p|.
    pub fn p_max(&self) -> f64 {
        self.p(self.n_points - 1)
    }

    /// Quadrature weight of the given basis.
    pub fn measure(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Position => self.dx(),
            Basis::Momentum => self.dp(),
        }
    }

    /// Sample coordinates of the given basis.
    pub fn samples(&self, basis: Basis) -> Vec<f64> {
        match basis {
            Basis::Position => self.positions(),
            Basis::Momentum => self.momenta(),
        }
    }

    /// Index of the position sample closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

pub fn make_grid(n_points: usize, x_min: f64, x_max: f64) -> Result<Grid1D> {
    Grid1D::new(n_points, x_min, x_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Position,
    Momentum,
}

/// Complex amplitudes of a one-particle state on a [`Grid1D`].
///
/// Generalized states (non-normalizable eigenfunctions) carry `generalized =
/// true` and are rejected by operations that need a probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub(crate) grid: Grid1D,
    pub(crate) basis: Basis,
    pub(crate) amplitudes: Vec<Complex64>,
    pub(crate) generalized: bool,
}

impl WaveState {
    pub fn new(grid: Grid1D, basis: Basis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(LabError::Shape(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            basis,
            amplitudes,
            generalized: false,
        })
    }

    pub(crate) fn generalized(grid: Grid1D, basis: Basis, amplitudes: Vec<Complex64>) -> Self {
        Self {
            grid,
            basis,
            amplitudes,
            generalized: true,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_generalized(&self) -> bool {
        self.generalized
    }

    pub fn norm_sqr(&self) -> f64 {
        let w = self.grid.measure(self.basis);
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * w
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(LabError::Shape(format!("cannot normalize state of norm {n}")));
        }
        let s = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        self.generalized = false;
        Ok(self)
    }

    /// Probability density |ψ|² in the current basis.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_basis(&self, target: Basis) -> WaveState {
        transform(self, target)
    }

    pub(crate) fn require_normalizable(&self) -> Result<()> {
        if self.generalized {
            Err(LabError::GeneralizedState)
        } else {
            Ok(())
        }
    }
}

/// Planned transforms for one grid; reusable across time steps.
pub struct Fourier {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fourier {
    pub fn new(grid: Grid1D) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        // (-1)^j exp(-iπ j / n)
        let pre = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::from_polar(sign, -PI * j as f64 / n as f64)
            })
            .collect();
        let post = (0..n)
            .map(|k| Complex64::from_polar(1.0, -grid.p(k) * grid.x_min()))
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            grid,
            forward,
            inverse,
            pre,
            post,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Position amplitudes to momentum amplitudes, in place.
    pub fn to_momentum(&mut self, data: &mut [Complex64]) {
        for (a, w) in data.iter_mut().zip(&self.pre) {
            *a *= w;
        }
        self.forward
            .process_with_scratch(data, &mut self.scratch);
        let scale = self.grid.dx() / (2.0 * PI).sqrt();
        for (a, w) in data.iter_mut().zip(&self.post) {
            *a *= w * scale;
        }
    }

    /// Momentum amplitudes to position amplitudes, in place.
    pub fn to_position(&mut self, data: &mut [Complex64]) {
        for (a, w) in data.iter_mut().zip(&self.post) {
            *a *= w.conj();
        }
        self.inverse
            .process_with_scratch(data, &mut self.scratch);
        let scale = self.grid.dp() / (2.0 * PI).sqrt();
        for (a, w) in data.iter_mut().zip(&self.pre) {
            *a *= w.conj() * scale;
        }
    }

    pub fn apply(&mut self, data: &mut [Complex64], from: Basis, to: Basis) {
        match (from, to) {
            (Basis::Position, Basis::Momentum) => self.to_momentum(data),
            (Basis::Momentum, Basis::Position) => self.to_position(data),
            _ => {}
        }
    }
}

/// Change of representation. Same-basis calls return a copy.
pub fn transform(psi: &WaveState, target: Basis) -> WaveState {
    let mut out = psi.clone();
    if psi.basis != target {
        Fourier::new(psi.grid).apply(&mut out.amplitudes, psi.basis, target);
        out.basis = target;
    }
    out
}

/// `⟨φ|ψ⟩`, conjugate-linear in `phi`. `psi` is brought to `phi`'s basis first.
pub fn inner_product(phi: &WaveState, psi: &WaveState) -> Result<Complex64> {
    if phi.grid != psi.grid {
        return Err(LabError::Shape("inner product of states on different grids".into()));
    }
    let psi = if psi.basis == phi.basis {
        std::borrow::Cow::Borrowed(psi)
    } else {
        std::borrow::Cow::Owned(transform(psi, phi.basis))
    };
    let w = phi.grid.measure(phi.basis);
    let sum: Complex64 = phi
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Position,
    Momentum,
    Kinetic { mass: f64 },
}

/// Complex `⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩`, each observable evaluated in its diagonal basis.
pub fn expectation_value(psi: &WaveState, observable: Observable) -> Result<Complex64> {
    psi.require_normalizable()?;
    let (basis, f): (Basis, Box<dyn Fn(f64) -> f64>) = match observable {
        Observable::Position => (Basis::Position, Box::new(|x| x)),
        Observable::Momentum => (Basis::Momentum, Box::new(|p| p)),
        Observable::Kinetic { mass } => {
            if !(mass > 0.0) {
                return Err(LabError::config("m", format!("mass must be positive, got {mass}")));
            }
            (Basis::Momentum, Box::new(move |p| p * p / (2.0 * mass)))
        }
    };
    let psi = psi.to_basis(basis);
    let samples = psi.grid.samples(basis);
    let w = psi.grid.measure(basis);
    let num: Complex64 = psi
        .amplitudes
        .iter()
        .zip(&samples)
        .map(|(a, &s)| a.conj() * (*a * f(s)))
        .sum::<Complex64>()
        * w;
    let norm = psi.norm_sqr();
    Ok(num / norm)
}

pub fn expectation(psi: &WaveState, observable: Observable) -> Result<f64> {
    Ok(expectation_value(psi, observable)?.re)
}

/// Standard deviation of the position density.
pub fn position_spread(psi: &WaveState) -> Result<f64> {
    let mean = expectation(psi, Observable::Position)?;
    let psi = psi.to_basis(Basis::Position);
    let xs = psi.grid.positions();
    let var = psi
        .amplitudes
        .iter()
        .zip(&xs)
        .map(|(a, &x)| a.norm_sqr() * (x - mean).powi(2))
        .sum::<f64>()
        * psi.grid.dx()
        / psi.norm_sqr();
    Ok(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian(grid: Grid1D, x0: f64, p0: f64, sigma: f64) -> WaveState {
        let amps = grid
            .positions()
            .into_iter()
            .map(|x| {
                Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x)
            })
            .collect();
        WaveState::new(grid, Basis::Position, amps).unwrap().normalize().unwrap()
    }

    #[test]
    fn small_grid_spacings() {
        let g = make_grid(8, 0.0, 8.0).unwrap();
        assert_abs_diff_eq!(g.dx(), 1.0);
        assert_abs_diff_eq!(g.dp(), PI / 4.0, epsilon = 1e-15);
        for (k, p) in g.momenta().iter().enumerate() {
            let expected = PI / 8.0 * (2.0 * k as f64 - 7.0);
            assert_abs_diff_eq!(*p, expected, epsilon = 1e-14);
            assert!(p.abs() > 0.0);
        }
        assert_abs_diff_eq!(g.dp() * g.dx() * 8.0, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn large_grid_spacing() {
        let g = make_grid(4096, -200.0, 200.0).unwrap();
        assert_abs_diff_eq!(g.dx(), 0.09765625, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            make_grid(10, 0.0, 1.0),
            Err(LabError::Config { field: "n_points", .. })
        ));
        assert!(make_grid(4, 0.0, 1.0).is_err());
        assert!(make_grid(16, 1.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_transforms_to_gaussian() {
        let g = make_grid(1024, -40.0, 40.0).unwrap();
        let psi = gaussian(g, 0.0, 0.0, 1.0);
        let phi = transform(&psi, Basis::Momentum);
        assert_abs_diff_eq!(expectation(&phi, Observable::Momentum).unwrap(), 0.0, epsilon = 1e-10);
        // Analytic: |ψ(p)|² ∝ exp(-p²/(2·0.5²)).
        let var = phi
            .amplitudes()
            .iter()
            .zip(g.momenta())
            .map(|(a, p)| a.norm_sqr() * p * p)
            .sum::<f64>()
            * g.dp();
        assert_abs_diff_eq!(var.sqrt(), 0.5, epsilon = 1e-10);
        // Shape, not only width.
        let peak = phi.amplitudes()[512].norm();
        for (k, p) in g.momenta().iter().enumerate().step_by(37) {
            let expected = peak * (-(p * p - g.p(512).powi(2))).exp();
            assert_abs_diff_eq!(phi.amplitudes()[k].norm(), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn kinetic_and_moments() {
        let g = make_grid(2048, -50.0, 50.0).unwrap();
        let psi = gaussian(g, 3.0, 0.0, 1.0);
        assert_abs_diff_eq!(expectation(&psi, Observable::Position).unwrap(), 3.0, epsilon = 1e-8);
        let psi = gaussian(g, 0.0, 2.0, 1.0);
        assert_abs_diff_eq!(
            expectation(&psi, Observable::Kinetic { mass: 1.0 }).unwrap(),
            2.125,
            epsilon = 1e-8
        );
        let psi = gaussian(g, 0.0, -1.0, 1.0);
        assert_abs_diff_eq!(expectation(&psi, Observable::Momentum).unwrap(), -1.0, epsilon = 1e-8);
        assert!(matches!(
            expectation(&psi, Observable::Kinetic { mass: 0.0 }),
            Err(LabError::Config { field: "m", .. })
        ));
    }

    #[test]
    fn inner_products() {
        let g = make_grid(2048, -100.0, 100.0).unwrap();
        let a = gaussian(g, -20.0, 0.5, 1.0);
        let b = gaussian(g, 20.0, -0.3, 1.0);
        assert_abs_diff_eq!(inner_product(&a, &a).unwrap().re, 1.0, epsilon = 1e-12);
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-10);
        let c = gaussian(g, 0.5, 0.7, 1.3);
        let bm = transform(&c, Basis::Momentum);
        let ab = inner_product(&a, &bm).unwrap();
        let ba = inner_product(&bm, &a).unwrap();
        assert_abs_diff_eq!(ab.re, ba.re, epsilon = 1e-13);
        assert_abs_diff_eq!(ab.im, -ba.im, epsilon = 1e-13);

        let other = make_grid(1024, -100.0, 100.0).unwrap();
        let d = gaussian(other, 0.0, 0.0, 1.0);
        assert!(matches!(inner_product(&a, &d), Err(LabError::Shape(_))));
    }

    #[test]
    fn same_basis_transform_is_identity() {
        let g = make_grid(64, -10.0, 10.0).unwrap();
        let psi = gaussian(g, 0.0, 1.0, 1.0);
        assert_eq!(transform(&psi, Basis::Position), psi);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_state(g: Grid1D, re: &[f64], im: &[f64]) -> WaveState {
            let amps = re
                .iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect();
            WaveState::new(g, Basis::Position, amps).unwrap().normalize().unwrap()
        }

        proptest! {
            #[test]
            fn round_trip_and_parseval(
                re in prop::collection::vec(-1.0f64..1.0, 128),
                im in prop::collection::vec(-1.0f64..1.0, 128),
                lo in -50.0f64..0.0,
                width in 1.0f64..100.0,
            ) {
                let g = make_grid(128, lo, lo + width).unwrap();
                let psi = random_state(g, &re, &im);
                let phi = transform(&psi, Basis::Momentum);
                prop_assert!((phi.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
                let back = transform(&phi, Basis::Position);
                for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
                    prop_assert!((a - b).norm() < 1e-12);
                }
            }

            #[test]
            fn translation_covariance(shift in 1usize..100, x0 in -5.0f64..5.0) {
                let g = make_grid(256, -30.0, 30.0).unwrap();
                let psi = gaussian(g, x0, 0.4, 1.0);
                let n = g.len();
                let mut shifted = vec![Complex64::new(0.0, 0.0); n];
                for (j, a) in psi.amplitudes().iter().enumerate() {
                    shifted[(j + shift) % n] = *a;
                }
                let argmax = |d: &[f64]| {
                    d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0
                };
                let before = argmax(&psi.density());
                let moved = WaveState::new(g, Basis::Position, shifted).unwrap();
                prop_assert_eq!(argmax(&moved.density()), (before + shift) % n);
            }

            #[test]
            fn expectations_are_real(
                re in prop::collection::vec(-1.0f64..1.0, 64),
                im in prop::collection::vec(-1.0f64..1.0, 64),
            ) {
                let g = make_grid(64, -8.0, 8.0).unwrap();
                let psi = random_state(g, &re, &im);
                for obs in [Observable::Position, Observable::Momentum, Observable::Kinetic { mass: 2.0 }] {
                    prop_assert!(expectation_value(&psi, obs).unwrap().im.abs() < 1e-10);
                }
                let kinetic = expectation(&psi, Observable::Kinetic { mass: 2.0 }).unwrap();
                prop_assert!(kinetic >= 0.0);
            }
        }
    }
}
