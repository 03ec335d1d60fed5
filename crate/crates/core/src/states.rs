//! State constructors: Gaussian packets and Aharonov–Bohm arrival-time
//! eigenfunctions.
//!
//! Gaussian convention: `ψ(x) ∝ exp(-(x-x0)²/(4σ²) + i p0 x)`, so `Δx = σ` and
//! `Δp = 1/(2σ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{Basis, Fourier, Grid1D, WaveState};

/// Direction sector α of the arrival-time eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// α = +1, particles arriving from the left (p > 0).
    Right,
    /// α = −1, particles arriving from the right (p < 0).
    Left,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Right, Direction::Left];

    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }

    pub fn contains(self, p: f64) -> bool {
        self.sign() * p > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalEigenfunction {
    pub arrival_time: f64,
    pub direction: Direction,
    pub mass: f64,
}

impl ArrivalEigenfunction {
    pub fn new(arrival_time: f64, direction: Direction, mass: f64) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(LabError::config("m", format!("mass must be positive, got {mass}")));
        }
        Ok(Self {
            arrival_time,
            direction,
            mass,
        })
    }

    /// `Θ(αp) sqrt(|p|/m) exp(i T p²/2m)`.
    pub fn amplitude(&self, p: f64) -> Complex64 {
        if !self.direction.contains(p) {
            return Complex64::new(0.0, 0.0);
        }
        let e = p * p / (2.0 * self.mass);
        Complex64::from_polar((p.abs() / self.mass).sqrt(), self.arrival_time * e)
    }
}

/// Normalized Gaussian packet. Fails if `x0 ± 6σ` leaves the grid or the
/// momentum content `p0 ± 6/(2σ)` exceeds the sampled momenta.
pub fn gaussian_packet(grid: &Grid1D, x0: f64, p0: f64, sigma: f64) -> Result<WaveState> {
    if !(sigma > 0.0) {
        return Err(LabError::config("sigma", format!("width must be positive, got {sigma}")));
    }
    let reach = 6.0 * sigma;
    if x0 - reach < grid.x_min() || x0 + reach > grid.x_max() {
        return Err(LabError::Truncation(format!(
            "packet support [{}, {}] exceeds grid [{}, {}]",
            x0 - reach,
            x0 + reach,
            grid.x_min(),
            grid.x_max()
        )));
    }
    let p_reach = 6.0 / (2.0 * sigma);
    if (p0.abs() + p_reach) > grid.p_max() {
        return Err(LabError::Truncation(format!(
            "momentum content |p0| + 6Δp = {} exceeds grid momentum {}",
            p0.abs() + p_reach,
            grid.p_max()
        )));
    }
    let amps = grid
        .positions()
        .into_iter()
        .map(|x| Complex64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x))
        .collect();
    WaveState::new(*grid, Basis::Position, amps)?.normalize()
}

/// Samples of an arrival-time eigenfunction on the momentum grid. The result is
/// flagged generalized.
pub fn ab_eigenfunction(spec: &ArrivalEigenfunction, grid: &Grid1D) -> WaveState {
    let amps = grid.momenta().into_iter().map(|p| spec.amplitude(p)).collect();
    WaveState::generalized(*grid, Basis::Momentum, amps)
}

/// Minimum number of nodes of the T' quadrature used by [`ab_packet`].
pub const AB_PACKET_MIN_NODES: usize = 201;
/// Half-width of the T' window in units of the packet width.
pub const AB_PACKET_HALF_WIDTH: f64 = 4.0;

/// Normalized Gaussian superposition `∫ dT' G(T') Φ_{T'α}` of arrival-time
/// eigenfunctions, returned in the momentum basis.
///
/// The weight is `G(T') ∝ exp(-(T' - T_c)²/(2 δT²))` sampled on a uniform
/// T'-grid over `T_c ± 4δT`. A uniform T' sum is periodic in energy with period
/// `2π/h`; the node count is raised above 201 when needed so that period exceeds
/// the largest energy on the momentum grid.
pub fn ab_packet(
    grid: &Grid1D,
    t_center: f64,
    delta_t: f64,
    direction: Direction,
    mass: f64,
) -> Result<WaveState> {
    if !(delta_t > 0.0) {
        return Err(LabError::config("delta_t", format!("width must be positive, got {delta_t}")));
    }
    if !(mass > 0.0) {
        return Err(LabError::config("m", format!("mass must be positive, got {mass}")));
    }
    let half = AB_PACKET_HALF_WIDTH * delta_t;
    let e_max = grid.p_max().powi(2) / (2.0 * mass);
    // The cut window has a spectrum decaying like e^{-8}/(δT·E), so the alias
    // images at multiples of 2π/h must sit ~4000/δT beyond e_max.
    let period = e_max + 4000.0 / delta_t;
    let needed = (2.0 * half * period / (2.0 * PI)).ceil() as usize + 1;
    let nodes = needed.max(AB_PACKET_MIN_NODES) | 1;
    let h = 2.0 * half / (nodes - 1) as f64;

    let weights: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let offset = -half + i as f64 * h;
            let w = (-offset * offset / (2.0 * delta_t * delta_t)).exp();
            let trap = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            (offset, w * trap * h / ((2.0 * PI).sqrt() * delta_t))
        })
        .collect();

    let amps: Vec<Complex64> = grid
        .momenta()
        .into_iter()
        .map(|p| {
            if !direction.contains(p) {
                return Complex64::new(0.0, 0.0);
            }
            let e = p * p / (2.0 * mass);
            let sum: Complex64 = weights
                .iter()
                .map(|&(offset, w)| Complex64::from_polar(w, offset * e))
                .sum();
            sum * Complex64::from_polar((p.abs() / mass).sqrt(), t_center * e)
        })
        .collect();

    // The window cut at ±4δT leaves a small non-Gaussian floor in the energy
    // profile, so the check uses the Gaussian envelope at the grid edge.
    let envelope = (-0.5 * (delta_t * e_max).powi(2)).exp();
    let peak = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) || envelope > 1e-8 {
        return Err(LabError::Truncation(format!(
            "eigenfunction packet with δT = {delta_t} has momentum support beyond the grid \
             (envelope at p_max = {envelope:.3e})"
        )));
    }
    WaveState::new(*grid, Basis::Momentum, amps)?.normalize()
}

/// Full width at half maximum of the position density, with linear
/// interpolation at the half-maximum crossings.
pub fn density_fwhm(psi: &WaveState) -> f64 {
    let mut fourier = Fourier::new(*psi.grid());
    let mut amps = psi.amplitudes().to_vec();
    fourier.apply(&mut amps, psi.basis(), Basis::Position);
    let density: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let grid = psi.grid();
    let (imax, &dmax) = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    let half = 0.5 * dmax;
    let crossing = |step: isize| -> f64 {
        let mut j = imax as isize;
        loop {
            let next = j + step;
            if next < 0 || next >= density.len() as isize {
                return grid.x(j as usize);
            }
            let (a, b) = (density[j as usize], density[next as usize]);
            if b < half {
                let frac = (a - half) / (a - b);
                return grid.x(j as usize) + step as f64 * frac * grid.dx();
            }
            j = next;
        }
    };
    crossing(1) - crossing(-1)
}
