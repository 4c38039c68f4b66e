//! Pulse and sequence definitions for the two gate implementations.
//!
//! Each gate is a fixed list of carrier and blue-sideband rotations
//! addressed at one of the two ions. Variant A sandwiches a four-pulse
//! composite phase block between mode-swap and Ramsey pulses; variant B
//! uses a three-pulse phase block and absorbs its leftover single-qubit
//! Z rotations into a phase shift of every subsequent pulse (the frame
//! shift recorded on the sequence).

use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Which of the two gate pulse sequences to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::A => write!(f, "A"),
            Variant::B => write!(f, "B"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            other => Err(Error::Config(format!(
                "unknown sequence variant {other:?}; expected \"A\" or \"B\""
            ))),
        }
    }
}

/// Transition driven by a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// Qubit rotation leaving the mode untouched.
    Carrier,
    /// |S,n⟩ ↔ |D,n+1⟩ rotation; Rabi rate scales as √(n+1).
    BlueSideband,
}

/// Temporal envelope of a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// Idealized delta pulse: a pure matrix exponential of the rotation,
    /// no off-resonant companion term.
    Instantaneous,
    /// Constant amplitude for the full duration θ/Ω.
    Square,
    /// sin²-shaped rise and fall of `ramp_time` at both ends.
    Ramped,
}

/// A single laser pulse addressed at one ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// Addressed ion, 1 (target) or 2 (control).
    pub ion: u8,
    pub kind: PulseKind,
    /// Pulse area θ = Ω·t in radians, referenced to the resonant Rabi
    /// frequency of `kind` (sideband areas use the n=0→1 rate).
    pub theta: f64,
    /// Optical phase in radians, stored in [0, 2π).
    pub phi: f64,
    pub shape: PulseShape,
}

/// Wrap an angle into [0, 2π).
pub fn wrap_phase(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut p = phi % two_pi;
    if p < 0.0 {
        p += two_pi;
    }
    // The remainder can land exactly on 2π after the fixup when phi is a
    // tiny negative number.
    if p >= two_pi {
        p = 0.0;
    }
    p
}

impl Pulse {
    pub fn new(ion: u8, kind: PulseKind, theta: f64, phi: f64) -> Self {
        assert!(ion == 1 || ion == 2, "ion index must be 1 or 2");
        assert!(theta >= 0.0, "pulse area must be non-negative");
        Self {
            ion,
            kind,
            theta,
            phi: wrap_phase(phi),
            shape: PulseShape::Instantaneous,
        }
    }

    pub fn with_shape(mut self, shape: PulseShape) -> Self {
        self.shape = shape;
        self
    }

    /// The same pulse with its phase offset by the per-ion shift.
    pub fn phase_shifted(mut self, dphi_ion1: f64, dphi_ion2: f64) -> Self {
        let d = if self.ion == 1 { dphi_ion1 } else { dphi_ion2 };
        self.phi = wrap_phase(self.phi + d);
        self
    }

    /// Nominal duration θ/Ω at the resonant Rabi frequency of this kind.
    pub fn nominal_duration(&self, params: &TrapParams) -> f64 {
        let omega = match self.kind {
            PulseKind::Carrier => params.carrier_rabi(),
            PulseKind::BlueSideband => params.omega_bsb,
        };
        self.theta / omega
    }
}

/// Accumulated per-ion phase offsets that later pulses must carry so the
/// gate's leftover single-qubit Z rotations need never be executed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameShifts {
    pub ion1: f64,
    pub ion2: f64,
}

/// An ordered gate pulse list plus its frame-shift bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub variant: Variant,
    pub pulses: Vec<Pulse>,
    pub frame_shifts: FrameShifts,
}

/// Build the pulse list of the requested gate variant.
///
/// Both open with a sideband π pulse on ion 2 that moves the control
/// qubit into the mode, close with the inverse swap, and wrap a composite
/// phase block on ion 1 between two carrier Ramsey pulses. All pulses are
/// `Instantaneous` — callers select square/ramped envelopes via
/// [`PulseSequence::with_shape`] when running the time-resolved model.
pub fn build_sequence(variant: Variant) -> PulseSequence {
    use PulseKind::{BlueSideband as Sb, Carrier as Car};
    let p = |ion, kind, theta, phi| Pulse::new(ion, kind, theta, phi);
    match variant {
        Variant::A => PulseSequence {
            variant,
            pulses: vec![
                p(2, Sb, PI, 0.0),
                p(1, Car, PI / 2.0, 0.0),
                p(1, Sb, PI, PI / 2.0),
                p(1, Sb, PI / SQRT_2, 0.0),
                p(1, Sb, PI, PI / 2.0),
                p(1, Sb, PI / SQRT_2, 0.0),
                p(1, Car, PI / 2.0, PI),
                p(2, Sb, PI, PI),
            ],
            frame_shifts: FrameShifts::default(),
        },
        Variant::B => PulseSequence {
            variant,
            pulses: vec![
                p(2, Sb, PI, 0.0),
                p(1, Car, PI / 2.0, 0.0),
                p(1, Sb, PI / 2.0, PI),
                p(1, Sb, SQRT_2 * PI, PI / 2.0),
                p(1, Sb, PI / 2.0, 0.0),
                p(1, Car, PI / 2.0, (1.0 / SQRT_2 - 1.0) * PI),
                p(2, Sb, PI, PI),
            ],
            frame_shifts: FrameShifts {
                ion1: PI / SQRT_2,
                ion2: -PI / SQRT_2,
            },
        },
    }
}

impl PulseSequence {
    /// The sequence with every pulse switched to the given envelope.
    pub fn with_shape(&self, shape: PulseShape) -> Self {
        Self {
            variant: self.variant,
            pulses: self.pulses.iter().map(|p| p.with_shape(shape)).collect(),
            frame_shifts: self.frame_shifts,
        }
    }

    /// The sequence with all pulse phases offset per ion, as required when
    /// this gate runs after `k` earlier executions that each left the
    /// frame shifted. The frame-shift record itself is unchanged.
    pub fn shifted_by(&self, dphi_ion1: f64, dphi_ion2: f64) -> Self {
        Self {
            variant: self.variant,
            pulses: self
                .pulses
                .iter()
                .map(|p| p.phase_shifted(dphi_ion1, dphi_ion2))
                .collect(),
            frame_shifts: self.frame_shifts,
        }
    }

    /// Diagonal two-qubit correction that maps the bare induced unitary of
    /// `k` consecutive executions into the target frame:
    /// C = diag(e^{−ik·Δφ₂}, 1) ⊗ diag(e^{−ik·Δφ₁}, 1).
    /// Identity for variant A (no leftover Z rotations).
    pub fn frame_correction(&self, k: u32) -> CMat {
        let kf = k as f64;
        let d = |dphi: f64| {
            CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![
                Complex64::from_polar(1.0, -kf * dphi),
                Complex64::new(1.0, 0.0),
            ]))
        };
        d(self.frame_shifts.ion2).kronecker(&d(self.frame_shifts.ion1))
    }

    /// The pulse lists for `repetitions` back-to-back executions: gate g
    /// carries g accumulated frame shifts on all its pulses.
    pub fn concatenated(&self, repetitions: u8) -> Vec<PulseSequence> {
        (0..repetitions)
            .map(|g| {
                let gf = g as f64;
                self.shifted_by(gf * self.frame_shifts.ion1, gf * self.frame_shifts.ion2)
            })
            .collect()
    }

    /// Total nominal duration: sum of per-pulse θ/Ω at the resonant Rabi
    /// frequency of each pulse's transition.
    pub fn duration(&self, params: &TrapParams) -> f64 {
        self.pulses.iter().map(|p| p.nominal_duration(params)).sum()
    }
}

fn default_omega_z() -> f64 {
    2.0 * PI * 1.36e6
}
fn default_omega_bsb() -> f64 {
    2.0 * PI * 4.4e3
}
fn default_eta() -> f64 {
    0.05
}
fn default_ramp_time() -> f64 {
    5e-6
}
fn default_n_max() -> usize {
    3
}

/// Trap and laser parameters of the two-ion register (SI units, rad/s, s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapParams {
    /// Angular frequency of the addressed motional mode.
    pub omega_z: f64,
    /// Blue-sideband Rabi angular frequency for the n=0→1 transition.
    pub omega_bsb: f64,
    /// Lamb–Dicke parameter; sets the carrier Rabi rate Ω_car = Ω_BSB/η.
    pub eta: f64,
    /// Rise/fall time of the shaped envelope.
    pub ramp_time: f64,
    /// Highest retained Fock level (dimension n_max+1 per mode).
    pub n_max: usize,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            omega_z: default_omega_z(),
            omega_bsb: default_omega_bsb(),
            eta: default_eta(),
            ramp_time: default_ramp_time(),
            n_max: default_n_max(),
        }
    }
}

impl TrapParams {
    /// Carrier Rabi angular frequency implied by the sideband rate and
    /// the Lamb–Dicke parameter.
    pub fn carrier_rabi(&self) -> f64 {
        self.omega_bsb / self.eta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_z > 0.0 && self.omega_bsb > 0.0 && self.eta > 0.0) {
            return Err(Error::Config(
                "trap parameters omega_z, omega_bsb, eta must be positive".into(),
            ));
        }
        if self.ramp_time <= 0.0 {
            return Err(Error::Config("ramp_time must be positive".into()));
        }
        if self.n_max < 2 {
            return Err(Error::Config(
                "n_max must be at least 2 (the composite phase block drives n ≤ 2)".into(),
            ));
        }
        Ok(())
    }
}

fn default_addressing_ratio() -> f64 {
    0.025
}

/// Error-model knobs for noisy gate runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    /// Residual Rabi-frequency ratio ε on the non-addressed ion.
    pub addressing_ratio: f64,
    /// Standard deviation (rad/s) of the per-shot quasi-static detuning.
    pub detuning_sigma: f64,
    /// Integrate the time-dependent Hamiltonian including the off-resonant
    /// carrier companion of sideband pulses instead of the exponential path.
    pub include_offresonant_carrier: bool,
    /// Use a single detuning draw per shot across concatenated gates.
    pub correlate_across_gates: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            addressing_ratio: default_addressing_ratio(),
            detuning_sigma: 0.0,
            include_offresonant_carrier: false,
            correlate_across_gates: false,
        }
    }
}

impl NoiseModel {
    /// Noise-free model (ε = 0, σ = 0, exponential path).
    pub fn none() -> Self {
        Self {
            addressing_ratio: 0.0,
            detuning_sigma: 0.0,
            include_offresonant_carrier: false,
            correlate_across_gates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.addressing_ratio) {
            return Err(Error::Config(format!(
                "addressing_ratio must lie in [0, 1], got {}",
                self.addressing_ratio
            )));
        }
        if self.detuning_sigma < 0.0 || !self.detuning_sigma.is_finite() {
            return Err(Error::Config(format!(
                "detuning_sigma must be a non-negative finite value, got {}",
                self.detuning_sigma
            )));
        }
        Ok(())
    }
}
