//! Direct quantum measurement: free evolution, impulsive von Neumann kicks, the
//! two-body clock–pointer model `H = p²/2m + Θ(−x) π_z` and the Allcock
//! absorber.
//!
//! Every evolution uses symmetric (Strang) splitting with exact diagonal
//! factors. The pointer carries no kinetic energy unless a finite pointer mass
//! is given, in which case `π_z` stays conserved and its kinetic phase is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{Basis, Fourier, Grid1D, WaveState};
use crate::states::gaussian_packet;

fn check_mass(mass: f64) -> Result<()> {
    if mass > 0.0 {
        Ok(())
    } else {
        Err(LabError::config("m", format!("mass must be positive, got {mass}")))
    }
}

/// Exact free propagation: momentum amplitudes times `exp(-i p² t / 2m)`.
/// The result is returned in the input basis.
pub fn free_evolve(psi: &WaveState, t: f64, mass: f64) -> Result<WaveState> {
    check_mass(mass)?;
    let mut out = psi.to_basis(Basis::Momentum);
    let grid = *out.grid();
    for (a, p) in out.amplitudes.iter_mut().zip(grid.momenta()) {
        *a *= Complex64::from_polar(1.0, -p * p * t / (2.0 * mass));
    }
    Ok(out.to_basis(psi.basis()))
}

/// Largest time step allowed for a kinetic factor on `grid`: the phase
/// `dt · p_max² / 2m` must stay below π.
pub fn max_kinetic_step(grid: &Grid1D, mass: f64) -> f64 {
    std::f64::consts::PI * 2.0 * mass / grid.p_max().powi(2)
}

fn check_step(grid: &Grid1D, mass: f64, dt: f64) -> Result<()> {
    let limit = max_kinetic_step(grid, mass);
    if dt.abs() < limit {
        Ok(())
    } else {
        Err(LabError::StepSize { dt, limit })
    }
}

/// Particle ⊗ pointer amplitudes, row-major with x fastest:
/// `amplitudes[iz * n_x + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyState {
    grid_x: Grid1D,
    grid_z: Grid1D,
    basis_x: Basis,
    basis_z: Basis,
    amplitudes: Vec<Complex64>,
}

impl TwoBodyState {
    pub fn new(
        grid_x: Grid1D,
        grid_z: Grid1D,
        basis_x: Basis,
        basis_z: Basis,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if amplitudes.len() != grid_x.len() * grid_z.len() {
            return Err(LabError::Shape(format!(
                "{} amplitudes for a {}x{} product grid",
                amplitudes.len(),
                grid_x.len(),
                grid_z.len()
            )));
        }
        Ok(Self {
            grid_x,
            grid_z,
            basis_x,
            basis_z,
            amplitudes,
        })
    }

    pub fn product(particle: &WaveState, pointer: &WaveState) -> Result<Self> {
        particle.require_normalizable()?;
        pointer.require_normalizable()?;
        let mut amplitudes = Vec::with_capacity(particle.grid().len() * pointer.grid().len());
        for b in pointer.amplitudes() {
            amplitudes.extend(particle.amplitudes().iter().map(|a| a * b));
        }
        Self::new(
            *particle.grid(),
            *pointer.grid(),
            particle.basis(),
            pointer.basis(),
            amplitudes,
        )
    }

    pub fn grid_x(&self) -> &Grid1D {
        &self.grid_x
    }

    pub fn grid_z(&self) -> &Grid1D {
        &self.grid_z
    }

    pub fn bases(&self) -> (Basis, Basis) {
        (self.basis_x, self.basis_z)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid_x.measure(self.basis_x)
            * self.grid_z.measure(self.basis_z)
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(LabError::Shape(format!("cannot normalize state of norm {n}")));
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    pub fn to_bases(&self, basis_x: Basis, basis_z: Basis) -> TwoBodyState {
        let mut out = self.clone();
        out.set_x_basis(basis_x);
        out.set_z_basis(basis_z);
        out
    }

    fn set_x_basis(&mut self, target: Basis) {
        if self.basis_x == target {
            return;
        }
        let mut f = Fourier::new(self.grid_x);
        for row in self.amplitudes.chunks_mut(self.grid_x.len()) {
            f.apply(row, self.basis_x, target);
        }
        self.basis_x = target;
    }

    fn set_z_basis(&mut self, target: Basis) {
        if self.basis_z == target {
            return;
        }
        let (nx, nz) = (self.grid_x.len(), self.grid_z.len());
        let mut f = Fourier::new(self.grid_z);
        let mut column = vec![Complex64::new(0.0, 0.0); nz];
        for ix in 0..nx {
            for (iz, c) in column.iter_mut().enumerate() {
                *c = self.amplitudes[iz * nx + ix];
            }
            f.apply(&mut column, self.basis_z, target);
            for (iz, c) in column.iter().enumerate() {
                self.amplitudes[iz * nx + ix] = *c;
            }
        }
        self.basis_z = target;
    }
}

/// Observable coupled to the pointer momentum by an impulsive kick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KickObservable {
    Position,
    Momentum,
    Kinetic { mass: f64 },
    /// Values `A` sampled on the particle grid in the given basis.
    Table { basis: Basis, values: Vec<f64> },
    /// `−m(q p⁻¹ + p⁻¹ q)/2`: not diagonal in either grid basis.
    ArrivalTime { mass: f64 },
}

impl KickObservable {
    fn table(&self, grid: &Grid1D) -> Result<(Basis, Vec<f64>)> {
        match self {
            KickObservable::Position => Ok((Basis::Position, grid.positions())),
            KickObservable::Momentum => Ok((Basis::Momentum, grid.momenta())),
            KickObservable::Kinetic { mass } => {
                check_mass(*mass)?;
                Ok((
                    Basis::Momentum,
                    grid.momenta().iter().map(|p| p * p / (2.0 * mass)).collect(),
                ))
            }
            KickObservable::Table { basis, values } => {
                if values.len() != grid.len() {
                    return Err(LabError::Shape(format!(
                        "observable table has {} values for {} grid points",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(LabError::config("values", "observable table has non-finite entries"));
                }
                Ok((*basis, values.clone()))
            }
            KickObservable::ArrivalTime { .. } => Err(LabError::UnsupportedObservable(
                "arrival-time operator is not diagonal in position or momentum".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickSpec {
    pub lambda: f64,
    pub observable: KickObservable,
}

/// Impulsive measurement `U = exp(iλA⊗B)` with `B` chosen so the pointer
/// wavepacket moves by `+λa` on the branch where the system has value `a`:
/// in the standard convention `π_z = −i∂_z` this is the phase
/// `exp(−iλ A π_z)` on the (A-diagonal ⊗ z-momentum) representation.
pub fn impulsive_kick(state: &TwoBodyState, kick: &KickSpec) -> Result<TwoBodyState> {
    let (basis, values) = kick.observable.table(&state.grid_x)?;
    let mut work = state.to_bases(basis, Basis::Momentum);
    let nx = work.grid_x.len();
    let momenta = work.grid_z.momenta();
    for (row, &pz) in work.amplitudes.chunks_mut(nx).zip(&momenta) {
        for (a, &v) in row.iter_mut().zip(&values) {
            *a *= Complex64::from_polar(1.0, -kick.lambda * v * pz);
        }
    }
    Ok(work.to_bases(state.basis_x, state.basis_z))
}

/// Clock–pointer model `H = p²/2m + c·Θ(−x) π_z [+ π_z²/2M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaClock {
    pub mass: f64,
    /// `None` is the infinitely massive pointer.
    pub pointer_mass: Option<f64>,
    /// Coupling strength `c`; 1 for the clock model, 0 to switch it off.
    pub coupling: f64,
}

impl ThetaClock {
    pub fn new(mass: f64) -> Self {
        Self {
            mass,
            pointer_mass: None,
            coupling: 1.0,
        }
    }
}

// Pointer-momentum rows whose weight is below this fraction of the total are
// left untouched by the time stepper.
const ROW_SKIP: f64 = 1e-32;

/// Strang-split evolution of the clock–pointer model.
///
/// The pointer momentum is conserved, so each `π_z` row is an independent 1-D
/// problem with potential `c·Θ(−x) π_z`; rows are evolved one at a time with
/// the two kinetic half steps of neighbouring steps merged.
pub fn evolve_theta_clock(
    state: &TwoBodyState,
    clock: &ThetaClock,
    dt: f64,
    n_steps: usize,
) -> Result<TwoBodyState> {
    check_mass(clock.mass)?;
    check_step(&state.grid_x, clock.mass, dt)?;
    if let Some(m) = clock.pointer_mass {
        if !(m > 0.0) {
            return Err(LabError::config("pointer_mass", format!("must be positive, got {m}")));
        }
    }
    let mut work = state.to_bases(Basis::Momentum, Basis::Momentum);
    if n_steps == 0 {
        return Ok(work.to_bases(state.basis_x, state.basis_z));
    }
    let grid_x = work.grid_x;
    let nx = grid_x.len();
    let half_kick: Vec<Complex64> = grid_x
        .momenta()
        .iter()
        .map(|p| Complex64::from_polar(1.0, -0.5 * dt * p * p / (2.0 * clock.mass)))
        .collect();
    let full_kick: Vec<Complex64> = half_kick.iter().map(|h| h * h).collect();
    let left: Vec<bool> = grid_x.positions().iter().map(|&x| x < 0.0).collect();
    let total: f64 = work.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let mut fourier = Fourier::new(grid_x);
    let t_total = dt * n_steps as f64;

    for (row, pz) in work
        .amplitudes
        .chunks_mut(nx)
        .zip(work.grid_z.momenta())
    {
        let weight: f64 = row.iter().map(|a| a.norm_sqr()).sum();
        if weight <= ROW_SKIP * total {
            continue;
        }
        let coupling = Complex64::from_polar(1.0, -dt * clock.coupling * pz);
        for (a, k) in row.iter_mut().zip(&half_kick) {
            *a *= k;
        }
        for step in 0..n_steps {
            fourier.to_position(row);
            for (a, &l) in row.iter_mut().zip(&left) {
                if l {
                    *a *= coupling;
                }
            }
            fourier.to_momentum(row);
            let kinetic = if step + 1 == n_steps { &half_kick } else { &full_kick };
            for (a, k) in row.iter_mut().zip(kinetic) {
                *a *= k;
            }
        }
        if let Some(m) = clock.pointer_mass {
            let phase = Complex64::from_polar(1.0, -t_total * pz * pz / (2.0 * m));
            row.iter_mut().for_each(|a| *a *= phase);
        }
    }
    Ok(work.to_bases(state.basis_x, state.basis_z))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointerMarginal {
    pub z: Vec<f64>,
    pub density: Vec<f64>,
    pub mass: f64,
    pub mean: f64,
    pub spread: f64,
}

/// Pointer position density `∫ |Ψ(x, z)|² dx`.
pub fn pointer_marginal(state: &TwoBodyState) -> PointerMarginal {
    let work = state.to_bases(state.basis_x, Basis::Position);
    let nx = work.grid_x.len();
    let wx = work.grid_x.measure(work.basis_x);
    let density: Vec<f64> = work
        .amplitudes
        .chunks(nx)
        .map(|row| row.iter().map(|a| a.norm_sqr()).sum::<f64>() * wx)
        .collect();
    let z = work.grid_z.positions();
    let dz = work.grid_z.dx();
    let mass: f64 = density.iter().sum::<f64>() * dz;
    let mean = z.iter().zip(&density).map(|(z, d)| z * d).sum::<f64>() * dz / mass;
    let var = z
        .iter()
        .zip(&density)
        .map(|(z, d)| (z - mean).powi(2) * d)
        .sum::<f64>()
        * dz
        / mass;
    PointerMarginal {
        z,
        density,
        mass,
        mean,
        spread: var.sqrt(),
    }
}

/// Particle position density `∫ |Ψ(x, z)|² dz`.
pub fn particle_marginal(state: &TwoBodyState) -> Vec<f64> {
    let work = state.to_bases(Basis::Position, state.basis_z);
    let nx = work.grid_x.len();
    let wz = work.grid_z.measure(work.basis_z);
    let mut out = vec![0.0; nx];
    for row in work.amplitudes.chunks(nx) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a.norm_sqr() * wz;
        }
    }
    out
}

/// Allcock complex potential, absorbing on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingPotential {
    pub strength: f64,
}

impl AbsorbingPotential {
    pub fn new(strength: f64) -> Result<Self> {
        if strength > 0.0 {
            Ok(Self { strength })
        } else {
            Err(LabError::config("v", format!("absorber strength must be positive, got {strength}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionRun {
    pub state: WaveState,
    /// `t_0 = 0, dt, 2dt, ...` (n_steps + 1 entries).
    pub times: Vec<f64>,
    /// `1 − ‖ψ(t)‖²` at each time, accumulated from the per-step losses.
    pub absorbed: Vec<f64>,
}

/// Strang splitting with the contracting factor `exp(−V dt Θ(x))`.
pub fn absorb_evolve(
    psi: &WaveState,
    potential: &AbsorbingPotential,
    mass: f64,
    dt: f64,
    n_steps: usize,
) -> Result<AbsorptionRun> {
    psi.require_normalizable()?;
    check_mass(mass)?;
    let grid = *psi.grid();
    check_step(&grid, mass, dt)?;
    let norm0 = psi.norm_sqr();
    let mut amps = psi.to_basis(Basis::Momentum).amplitudes;
    let half_kick: Vec<Complex64> = grid
        .momenta()
        .iter()
        .map(|p| Complex64::from_polar(1.0, -0.5 * dt * p * p / (2.0 * mass)))
        .collect();
    let damping = (-potential.strength * dt).exp();
    let loss = 1.0 - damping * damping;
    let right: Vec<bool> = grid.positions().iter().map(|&x| x > 0.0).collect();
    let mut fourier = Fourier::new(grid);
    let dx = grid.dx();

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut absorbed = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    absorbed.push(0.0);
    for step in 1..=n_steps {
        amps.iter_mut().zip(&half_kick).for_each(|(a, k)| *a *= k);
        fourier.to_position(&mut amps);
        let mut inside = 0.0;
        for (a, &r) in amps.iter_mut().zip(&right) {
            if r {
                inside += a.norm_sqr();
                *a *= damping;
            }
        }
        fourier.to_momentum(&mut amps);
        amps.iter_mut().zip(&half_kick).for_each(|(a, k)| *a *= k);
        // The kinetic factors are unitary, so the damping is the only loss.
        // Summing the per-step losses keeps the series monotone under
        // round-off.
        let previous = absorbed[absorbed.len() - 1];
        times.push(step as f64 * dt);
        absorbed.push(previous + loss * inside * dx / norm0);
    }
    let mut state = WaveState::new(grid, Basis::Momentum, amps)?;
    state = state.to_basis(psi.basis());
    Ok(AbsorptionRun {
        state,
        times,
        absorbed,
    })
}

/// Probability current `Im(ψ* ∂_x ψ)/m` at the grid point nearest `x`.
pub fn probability_current(psi: &WaveState, x: f64, mass: f64) -> Result<f64> {
    check_mass(mass)?;
    let grid = *psi.grid();
    let mut fourier = Fourier::new(grid);
    let mom = psi.to_basis(Basis::Momentum);
    let mut value = mom.amplitudes.clone();
    fourier.to_position(&mut value);
    let mut deriv: Vec<Complex64> = mom
        .amplitudes
        .iter()
        .zip(grid.momenta())
        .map(|(a, p)| a * Complex64::new(0.0, p))
        .collect();
    fourier.to_position(&mut deriv);
    let j = grid.nearest_index(x);
    Ok((value[j].conj() * deriv[j]).im / mass)
}

/// Settings shared by every row of a [`resolution_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionParams {
    pub mass: f64,
    /// Classical arrival time fixing `x0 = −t0 p0/m` for every energy.
    pub arrival_time: f64,
    /// Particle packet width σ (position).
    pub packet_width: f64,
    pub grid_x: Grid1D,
    pub grid_z: Grid1D,
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionRow {
    pub energy: f64,
    pub pointer_width: f64,
    /// `E·Δz` with the pointer width standing in for the time resolution.
    pub energy_width_product: f64,
    pub classical_time: f64,
    pub record_mean: f64,
    pub record_spread: f64,
    /// `sqrt(max(0, spread² − Δz²))`: spread added on top of the initial pointer.
    pub excess_spread: f64,
    /// Classical arrival-time spread of the packet, `m sqrt(σ² + (x0 Δp/p0)²)/p0`.
    pub classical_spread: f64,
    pub norm_error: f64,
}

/// Runs the clock–pointer model for every (energy, pointer width) pair and
/// reports the pointer record against the classical arrival time.
pub fn resolution_sweep(
    energies: &[f64],
    pointer_widths: &[f64],
    params: &ResolutionParams,
) -> Result<Vec<ResolutionRow>> {
    let mut rows = Vec::with_capacity(energies.len() * pointer_widths.len());
    for &energy in energies {
        for &width in pointer_widths {
            rows.push(resolution_row(energy, width, params)?);
        }
    }
    Ok(rows)
}

pub fn resolution_row(energy: f64, pointer_width: f64, params: &ResolutionParams) -> Result<ResolutionRow> {
    if !(energy > 0.0) {
        return Err(LabError::config("energy", format!("must be positive, got {energy}")));
    }
    check_mass(params.mass)?;
    let m = params.mass;
    let p0 = (2.0 * m * energy).sqrt();
    let x0 = -params.arrival_time * p0 / m;
    let particle = gaussian_packet(&params.grid_x, x0, p0, params.packet_width)?;
    let pointer = gaussian_packet(&params.grid_z, 0.0, 0.0, pointer_width)?;
    let state = TwoBodyState::product(&particle, &pointer)?;
    let initial = pointer_marginal(&state);
    let n_steps = (params.t_final / params.dt).round() as usize;
    let out = evolve_theta_clock(&state, &ThetaClock::new(m), params.dt, n_steps)?;
    let marginal = pointer_marginal(&out);
    let sigma_p = 1.0 / (2.0 * params.packet_width);
    Ok(ResolutionRow {
        energy,
        pointer_width,
        energy_width_product: energy * pointer_width,
        classical_time: params.arrival_time,
        record_mean: marginal.mean - initial.mean,
        record_spread: marginal.spread,
        excess_spread: (marginal.spread.powi(2) - initial.spread.powi(2)).max(0.0).sqrt(),
        classical_spread: m * params.packet_width.hypot(x0 * sigma_p / p0) / p0,
        norm_error: (out.norm_sqr() - state.norm_sqr()).abs(),
    })
}
