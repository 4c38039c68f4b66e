//! Simulation and analysis library for two-qubit trapped-ion CNOT gates.
//!
//! The crate covers the full pipeline from laser-pulse sequences to
//! reconstructed process matrices:
//!
//! * [`pauli`], [`states`], [`process`], [`haar`] — complex-matrix
//!   foundations: the two-qubit Pauli-product basis, density operators,
//!   the χ (process-matrix) representation of quantum maps and its
//!   Choi/superoperator conversions, and Haar sampling.
//! * [`pulse`], [`evolve`] — carrier/blue-sideband pulse sequences on the
//!   two-ion ⊗ vibrational-mode space, with ideal matrix-exponential
//!   evolution, addressing crosstalk, quasi-static detuning, and a
//!   fixed-step integrator for square/ramped pulse envelopes.
//! * [`tomography`], [`inversion`], [`mle`] — the 16-input × 9-setting
//!   tomography protocol, projection-noise dataset synthesis, linear
//!   inversion, and iterative maximum-likelihood reconstruction of CPTP
//!   maps.
//! * [`metrics`] — process fidelity, Monte-Carlo and closed-form mean
//!   fidelity, normalized linear entropy, and Wootters concurrence.
//! * [`experiments`] — the orchestrated studies: single-gate tomography,
//!   shaped-vs-square pulses, concatenated double gates and their
//!   composed-map prediction, noise calibration, and bootstrap error bars.
//!
//! All randomness flows from explicit `u64` seeds through per-purpose
//! [`haar::substream_rng`] streams, so every result is reproducible
//! bit-for-bit regardless of thread count.

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod haar;
pub mod inversion;
pub mod linalg;
pub mod metrics;
pub mod mle;
pub mod pauli;
pub mod process;
pub mod pulse;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
