//! Quantum reference frame (QRF) transformations on finite-dimensional state
//! spaces, together with the noncommutative-value calculus `{f, V, M}` that
//! tracks how the state-specific value of each observable changes under a
//! change of frame.
//!
//! The crate is organised bottom-up:
//!
//! * [`statekit`] – basis layouts with subsystem roles, states, structured operators.
//! * [`ncvalue`] – expectation values, the `V` covector, star products, `k̃`, factor ranks.
//! * [`qubit`] – the two-qubit frame change and its worked cases.
//! * [`grid`] – a cyclic position lattice, DFT momentum and the spatial translation.
//! * [`report`], [`config`], [`runner`], [`verify`] – scenario execution and property suites.

pub mod config;
pub mod error;
pub mod grid;
pub mod ncvalue;
pub mod qubit;
pub mod report;
pub mod runner;
pub mod statekit;
pub mod verify;

pub use error::{QrfError, Result};
pub use ncvalue::{KTilde, NcValue};
pub use statekit::{BasisId, BasisLayout, Factor, Operator, Role, State};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Largest component-wise `|a_i − b_i|`; infinite on length mismatch.
pub(crate) fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest `|a_i|`.
pub(crate) fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
