//! Numerical laboratory for time-of-arrival measurement.
//!
//! Two pictures are implemented side by side and checked against each other:
//!
//! * indirect (ideal) measurement, where arrival-time statistics follow from the
//!   Aharonov–Bohm POVM evaluated on a free wavepacket ([`arrival`]);
//! * direct measurement, where a pointer degree of freedom is coupled to the
//!   particle and its final position (or momentum) is the record, either
//!   quantum-mechanically ([`quantum`]) or classically ([`classical`]).
//!
//! Units: ħ = 1 and all quantities are dimensionless.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrival;
pub mod classical;
pub mod error;
pub mod quantum;
pub mod spectral;
pub mod states;

pub use error::{LabError, Result};
pub use spectral::{Basis, Grid1D, WaveState};
