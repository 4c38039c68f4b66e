//! The 16-input × 9-setting process tomography protocol.
//!
//! Inputs are products of four single-qubit kets (|S⟩, |D⟩, the +Y and +X
//! superpositions); measurements rotate each ion into the Z, X or Y basis
//! and record joint fluorescence outcomes in the order (DD, DS, SD, SS).
//! A dataset holds all 144 (input, setting) records either as integer
//! counts from multinomial sampling or as exact real-valued frequencies.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::pulse::NoiseModel;
use crate::states::{DensityMatrix, QUBIT_BASIS_LABELS};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Tolerance below zero an outcome probability may carry before the
/// channel evaluation is considered broken.
pub const PROBABILITY_NEG_TOL: f64 = -1e-9;
/// Tolerance on the deviation of a probability quadruple's sum from 1.
pub const PROBABILITY_SUM_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Input states.
// ---------------------------------------------------------------------------

/// The four single-qubit preparation kets, 1-indexed in file records:
/// ψ₁=|S⟩, ψ₂=|D⟩, ψ₃=(|D⟩+i|S⟩)/√2, ψ₄=(|D⟩+|S⟩)/√2.
pub fn single_input_kets() -> [CVec; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        CVec::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
        CVec::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]),
        CVec::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]),
    ]
}

/// Kronecker product of two column vectors (left factor varies slowest).
pub fn kron_vec(left: &CVec, right: &CVec) -> CVec {
    let mut out = CVec::zeros(left.len() * right.len());
    for (i, a) in left.iter().enumerate() {
        for (j, b) in right.iter().enumerate() {
            out[i * right.len() + j] = a * b;
        }
    }
    out
}

/// The 16 two-qubit product inputs, ordered with the ion-2 index outer:
/// entry (i, j) is ψ_i on ion 2 ⊗ ψ_j on ion 1, both 1-indexed.
#[derive(Debug, Clone)]
pub struct InputStateSet {
    states: Vec<CVec>,
}

impl InputStateSet {
    pub fn states(&self) -> &[CVec] {
        &self.states
    }

    /// Linear index of input (i, j), both in 1..=4.
    pub fn linear_index(i: u8, j: u8) -> usize {
        (i as usize - 1) * 4 + (j as usize - 1)
    }

    /// The (i, j) pair of a linear index.
    pub fn pair(linear: usize) -> (u8, u8) {
        ((linear / 4) as u8 + 1, (linear % 4) as u8 + 1)
    }

    pub fn state(&self, i: u8, j: u8) -> &CVec {
        &self.states[Self::linear_index(i, j)]
    }
}

/// Build the canonical input set.
pub fn tomography_input_states() -> InputStateSet {
    let kets = single_input_kets();
    let mut states = Vec::with_capacity(16);
    for ion2 in &kets {
        for ion1 in &kets {
            states.push(kron_vec(ion2, ion1));
        }
    }
    InputStateSet { states }
}

// ---------------------------------------------------------------------------
// Measurement settings.
// ---------------------------------------------------------------------------

/// Measurement basis on one ion, 1-indexed Z, X, Y in file records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasurementBasis {
    Z,
    X,
    Y,
}

pub const BASIS_ORDER: [MeasurementBasis; 3] =
    [MeasurementBasis::Z, MeasurementBasis::X, MeasurementBasis::Y];

impl MeasurementBasis {
    /// Single-qubit rotation applied before the D/S readout: the basis
    /// eigenstate with +1 eigenvalue lands on |D⟩.
    pub fn rotation(&self) -> CMat {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            MeasurementBasis::Z => CMat::identity(2, 2),
            MeasurementBasis::X => CMat::from_row_slice(2, 2, &[h, h, h, -h]),
            MeasurementBasis::Y => {
                CMat::from_row_slice(2, 2, &[h, h * Complex64::new(0.0, -1.0), h, h * Complex64::i()])
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MeasurementBasis::Z => "Z",
            MeasurementBasis::X => "X",
            MeasurementBasis::Y => "Y",
        }
    }
}

/// One of the 9 joint measurement settings.
#[derive(Debug, Clone)]
pub struct MeasurementSetting {
    /// Basis on (ion 2, ion 1).
    pub bases: (MeasurementBasis, MeasurementBasis),
    /// Joint rotation U = U_ion2 ⊗ U_ion1 applied before readout.
    pub unitary: CMat,
}

impl MeasurementSetting {
    pub fn new(ion2: MeasurementBasis, ion1: MeasurementBasis) -> Self {
        let unitary = ion2.rotation().kronecker(&ion1.rotation());
        Self {
            bases: (ion2, ion1),
            unitary,
        }
    }

    /// Projector ket of outcome k ∈ 0..4 (ordering DD, DS, SD, SS):
    /// |φ_k⟩ = U†|k⟩, so p_k = ⟨φ_k|ρ|φ_k⟩.
    pub fn outcome_ket(&self, k: usize) -> CVec {
        CVec::from_fn(4, |c, _| self.unitary[(k, c)].conj())
    }

    /// Outcome probabilities of a two-qubit density matrix, clamped and
    /// renormalized within the documented tolerances.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<[f64; 4]> {
        let rotated = &self.unitary * rho.data() * self.unitary.adjoint();
        let mut p = [0.0; 4];
        let mut sum = 0.0;
        for k in 0..4 {
            let val = rotated[(k, k)].re;
            if val < PROBABILITY_NEG_TOL {
                return Err(Error::Numerical(format!(
                    "outcome probability {val:.3e} below tolerance in setting ({}, {})",
                    self.bases.0.label(),
                    self.bases.1.label()
                )));
            }
            p[k] = val.max(0.0);
            sum += p[k];
        }
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::Numerical(format!(
                "outcome probabilities sum to {sum} in setting ({}, {})",
                self.bases.0.label(),
                self.bases.1.label()
            )));
        }
        for v in &mut p {
            *v /= sum;
        }
        Ok(p)
    }
}

/// All 9 settings, ion-2 basis outer: linear index 3·(a−1) + (b−1) for
/// 1-indexed basis pair (a, b).
pub fn measurement_settings() -> Vec<MeasurementSetting> {
    let mut out = Vec::with_capacity(9);
    for b2 in BASIS_ORDER {
        for b1 in BASIS_ORDER {
            out.push(MeasurementSetting::new(b2, b1));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Datasets.
// ---------------------------------------------------------------------------

/// Whether a dataset carries sampled counts or exact frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetMode {
    Sampled,
    Exact,
}

/// Per-record measurement results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordValues {
    Counts([u64; 4]),
    Frequencies([f64; 4]),
}

/// One (input, setting) cell of the 144-record protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    /// 1-indexed (ion-2 ket, ion-1 ket).
    pub input: [u8; 2],
    /// 1-indexed (ion-2 basis, ion-1 basis) into the Z, X, Y order.
    pub setting: [u8; 2],
    /// Counts (sampled mode) or frequencies (exact mode), outcome order
    /// DD, DS, SD, SS.
    pub counts: RecordValues,
}

/// A complete tomography dataset with provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyDataset {
    pub mode: DatasetMode,
    /// Shots behind every record; absent in exact mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_per_setting: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Noise configuration the generating run used, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    /// Free-form description of the generating channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Outcome ordering, fixed to DD, DS, SD, SS.
    pub outcome_order: Vec<String>,
    /// Measurement-basis ordering behind setting indices, fixed to Z, X, Y.
    pub setting_bases: Vec<String>,
    pub records: Vec<DatasetRecord>,
}

fn canonical_outcome_order() -> Vec<String> {
    QUBIT_BASIS_LABELS.iter().map(|s| s.to_string()).collect()
}

fn canonical_setting_bases() -> Vec<String> {
    BASIS_ORDER.iter().map(|b| b.label().to_string()).collect()
}

impl TomographyDataset {
    /// Validate the full 144-record canonical layout and per-record sums.
    pub fn validate(&self) -> Result<()> {
        if self.outcome_order != canonical_outcome_order() {
            return Err(Error::Protocol(
                "dataset outcome_order does not match the canonical DD, DS, SD, SS".into(),
            ));
        }
        if self.setting_bases != canonical_setting_bases() {
            return Err(Error::Protocol(
                "dataset setting_bases does not match the canonical Z, X, Y".into(),
            ));
        }
        if self.records.len() != 144 {
            return Err(Error::Protocol(format!(
                "dataset must contain 144 records, found {}",
                self.records.len()
            )));
        }
        for (r, record) in self.records.iter().enumerate() {
            let input_lin = r / 9;
            let setting_lin = r % 9;
            let (i, j) = InputStateSet::pair(input_lin);
            let (a, b) = ((setting_lin / 3) as u8 + 1, (setting_lin % 3) as u8 + 1);
            if record.input != [i, j] || record.setting != [a, b] {
                return Err(Error::Protocol(format!(
                    "record {r} is out of canonical order: input {:?} setting {:?}, \
                     expected input [{i}, {j}] setting [{a}, {b}]",
                    record.input, record.setting
                )));
            }
            match (&record.counts, self.mode) {
                (RecordValues::Counts(c), DatasetMode::Sampled) => {
                    let shots = self.shots_per_setting.ok_or_else(|| {
                        Error::Protocol("sampled dataset is missing shots_per_setting".into())
                    })?;
                    let total: u64 = c.iter().sum();
                    if total != shots {
                        return Err(Error::Protocol(format!(
                            "record {r} counts sum to {total}, expected {shots}"
                        )));
                    }
                }
                (RecordValues::Frequencies(f), DatasetMode::Exact) => {
                    if f.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                        return Err(Error::Protocol(format!(
                            "record {r} has a negative or non-finite frequency"
                        )));
                    }
                    let total: f64 = f.iter().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::Protocol(format!(
                            "record {r} frequencies sum to {total}, expected 1"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Protocol(format!(
                        "record {r} value type does not match the dataset mode"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-record outcome frequencies (counts normalized by shots, or the
    /// stored exact values).
    pub fn frequencies(&self) -> Vec<[f64; 4]> {
        self.records
            .iter()
            .map(|r| match &r.counts {
                RecordValues::Counts(c) => {
                    let total: u64 = c.iter().sum();
                    let t = (total as f64).max(1.0);
                    [
                        c[0] as f64 / t,
                        c[1] as f64 / t,
                        c[2] as f64 / t,
                        c[3] as f64 / t,
                    ]
                }
                RecordValues::Frequencies(f) => *f,
            })
            .collect()
    }
}

/// Exact outcome probabilities of a channel across the full protocol,
/// in canonical record order.
pub fn protocol_probabilities<F>(mut gate: F) -> Result<Vec<[f64; 4]>>
where
    F: FnMut(&DensityMatrix) -> Result<DensityMatrix>,
{
    let inputs = tomography_input_states();
    let settings = measurement_settings();
    let mut probs = Vec::with_capacity(144);
    for psi in inputs.states() {
        let rho_in = DensityMatrix::from_pure(psi)?;
        let rho_out = gate(&rho_in)?;
        for setting in &settings {
            probs.push(setting.outcome_probabilities(&rho_out)?);
        }
    }
    Ok(probs)
}

fn assemble_dataset(mode: DatasetMode, values: Vec<RecordValues>) -> TomographyDataset {
    let records = values
        .into_iter()
        .enumerate()
        .map(|(r, counts)| {
            let (i, j) = InputStateSet::pair(r / 9);
            let s = r % 9;
            DatasetRecord {
                input: [i, j],
                setting: [(s / 3) as u8 + 1, (s % 3) as u8 + 1],
                counts,
            }
        })
        .collect();
    TomographyDataset {
        mode,
        shots_per_setting: None,
        seed: None,
        noise: None,
        label: None,
        outcome_order: canonical_outcome_order(),
        setting_bases: canonical_setting_bases(),
        records,
    }
}

/// Draw a multinomial sample over 4 outcomes by a cascade of binomials.
pub fn sample_multinomial(probs: &[f64; 4], shots: u64, rng: &mut impl Rng) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for k in 0..3 {
        if remaining == 0 {
            break;
        }
        let p = if mass_left > 1e-300 {
            (probs[k] / mass_left).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = Binomial::new(remaining, p)
            .expect("clamped probability is valid")
            .sample(rng);
        out[k] = n;
        remaining -= n;
        mass_left = (mass_left - probs[k]).max(0.0);
    }
    out[3] = remaining;
    out
}

/// Draw a finite-shot dataset from per-record outcome probabilities in
/// canonical order. Also the resampling primitive for parametric
/// bootstrap replicas.
pub fn sample_dataset_from_probabilities(
    probs: &[[f64; 4]],
    shots: u64,
    rng: &mut impl Rng,
) -> Result<TomographyDataset> {
    if shots == 0 {
        return Err(Error::Invalid("shots must be at least 1".into()));
    }
    if probs.len() != 144 {
        return Err(Error::Invalid(format!(
            "need 144 per-record probability rows, got {}",
            probs.len()
        )));
    }
    let values = probs
        .iter()
        .map(|p| RecordValues::Counts(sample_multinomial(p, shots, rng)))
        .collect();
    let mut ds = assemble_dataset(DatasetMode::Sampled, values);
    ds.shots_per_setting = Some(shots);
    Ok(ds)
}

/// Synthesize a finite-shot dataset: for each of the 144 records, draw
/// the 4 outcome counts multinomially from the channel's probabilities.
/// Deterministic given the rng state.
pub fn simulate_dataset<F>(
    gate: F,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<TomographyDataset>
where
    F: FnMut(&DensityMatrix) -> Result<DensityMatrix>,
{
    let probs = protocol_probabilities(gate)?;
    sample_dataset_from_probabilities(&probs, shots, rng)
}

/// The infinite-statistics dataset: exact probabilities stored as
/// frequencies.
pub fn exact_probabilities<F>(gate: F) -> Result<TomographyDataset>
where
    F: FnMut(&DensityMatrix) -> Result<DensityMatrix>,
{
    let probs = protocol_probabilities(gate)?;
    let values = probs.into_iter().map(RecordValues::Frequencies).collect();
    Ok(assemble_dataset(DatasetMode::Exact, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{apply_chi, unitary_to_chi};
    use rand::SeedableRng;

    fn identity_channel(rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(rho.clone())
    }

    #[test]
    fn input_corners_match_their_definitions() {
        let inputs = tomography_input_states();
        // (1,1) = |SS⟩, the last basis vector.
        let ss = inputs.state(1, 1);
        assert!((ss[3] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(ss.iter().take(3).all(|a| a.norm() < 1e-15));
        // (4,4): all four amplitudes 1/2.
        let pp = inputs.state(4, 4);
        assert!(pp.iter().all(|a| (a - Complex64::new(0.5, 0.0)).norm() < 1e-15));
        for s in inputs.states() {
            assert!((s.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn input_projectors_span_the_operator_space() {
        // Gram matrix of the vectorized projectors must have full rank 16
        // for the protocol to be informationally complete on inputs.
        let inputs = tomography_input_states();
        let mut gram = CMat::zeros(16, 16);
        for (r, a) in inputs.states().iter().enumerate() {
            let pa = a * a.adjoint();
            for (c, b) in inputs.states().iter().enumerate() {
                gram[(r, c)] = (pa.adjoint() * (b * b.adjoint())).trace();
            }
        }
        let svd = gram.svd(false, false);
        let min_sv = svd.singular_values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(min_sv > 1e-6, "smallest singular value {min_sv:.3e}");
    }

    #[test]
    fn z_basis_readout_of_ss_is_deterministic() {
        let settings = measurement_settings();
        let rho = DensityMatrix::from_pure(tomography_input_states().state(1, 1)).unwrap();
        let p = settings[0].outcome_probabilities(&rho).unwrap();
        assert_eq!(settings[0].bases, (MeasurementBasis::Z, MeasurementBasis::Z));
        assert!((p[3] - 1.0).abs() < 1e-12);
        assert!(p[0] + p[1] + p[2] < 1e-12);
    }

    #[test]
    fn x_basis_readout_of_ss_is_uniform() {
        let settings = measurement_settings();
        // (X, X) is linear index 3·1 + 1 = 4.
        let rho = DensityMatrix::from_pure(tomography_input_states().state(1, 1)).unwrap();
        let p = settings[4].outcome_probabilities(&rho).unwrap();
        for v in p {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn y_basis_readout_of_psi3_is_deterministic_on_ion2() {
        // Setting (Y, Z) = linear index 6 on ψ₃⊗ψ₁: ion 2 deterministically
        // reads D (its +Y state), ion 1 reads S, so outcome DS has
        // probability 1.
        let settings = measurement_settings();
        let rho = DensityMatrix::from_pure(tomography_input_states().state(3, 1)).unwrap();
        let p = settings[6].outcome_probabilities(&rho).unwrap();
        assert_eq!(
            settings[6].bases,
            (MeasurementBasis::Y, MeasurementBasis::Z)
        );
        assert!((p[1] - 1.0).abs() < 1e-12, "p = {p:?}");
    }

    #[test]
    fn settings_resolve_probability_one_partitions() {
        let settings = measurement_settings();
        assert_eq!(settings.len(), 9);
        let rho = DensityMatrix::from_pure(tomography_input_states().state(3, 4)).unwrap();
        for s in &settings {
            let p = s.outcome_probabilities(&rho).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_gate_z_readout_counts_are_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ds = simulate_dataset(identity_channel, 100, &mut rng).unwrap();
        ds.validate().unwrap();
        // Record 0: input (1,1) = |SS⟩, setting (Z,Z).
        match &ds.records[0].counts {
            RecordValues::Counts(c) => assert_eq!(*c, [0, 0, 0, 100]),
            _ => panic!("sampled dataset must carry counts"),
        }
        assert_eq!(ds.records.len(), 144);
        assert_eq!(ds.shots_per_setting, Some(100));
    }

    #[test]
    fn exact_dataset_matches_analytic_probabilities() {
        let chi = unitary_to_chi(&crate::process::cnot_a_unitary()).unwrap();
        let ds = exact_probabilities(|rho| apply_chi(&chi, rho)).unwrap();
        ds.validate().unwrap();
        // Spot check: input (2,1) = |SD⟩… control ion 2 in |D⟩ flips the
        // target, so |DS⟩ → |DD⟩ under the gate: record (input (1,2)) —
        // ψ₁⊗ψ₂ = |SD⟩ stays in the S-control block.
        let inputs = tomography_input_states();
        let settings = measurement_settings();
        let rho_in = DensityMatrix::from_pure(inputs.state(2, 2)).unwrap();
        let rho_out = apply_chi(&chi, &rho_in).unwrap();
        let expect = settings[0].outcome_probabilities(&rho_out).unwrap();
        let idx = InputStateSet::linear_index(2, 2) * 9;
        match &ds.records[idx].counts {
            RecordValues::Frequencies(f) => {
                for k in 0..4 {
                    assert!((f[k] - expect[k]).abs() < 1e-12);
                }
            }
            _ => panic!("exact dataset must carry frequencies"),
        }
    }

    #[test]
    fn multinomial_counts_sum_to_shots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let probs = [0.1, 0.2, 0.3, 0.4];
        for shots in [1u64, 7, 100, 2500] {
            let c = sample_multinomial(&probs, shots, &mut rng);
            assert_eq!(c.iter().sum::<u64>(), shots);
        }
        // Degenerate distribution.
        let c = sample_multinomial(&[0.0, 1.0, 0.0, 0.0], 50, &mut rng);
        assert_eq!(c, [0, 50, 0, 0]);
    }

    #[test]
    fn multinomial_mean_tracks_probabilities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let probs = [0.05, 0.45, 0.3, 0.2];
        let shots = 250u64;
        let reps = 400;
        let mut mean = [0.0f64; 4];
        for _ in 0..reps {
            let c = sample_multinomial(&probs, shots, &mut rng);
            for k in 0..4 {
                mean[k] += c[k] as f64 / shots as f64;
            }
        }
        for k in 0..4 {
            mean[k] /= reps as f64;
            let se = (probs[k] * (1.0 - probs[k]) / (shots as f64 * reps as f64)).sqrt();
            assert!(
                (mean[k] - probs[k]).abs() < 5.0 * se + 1e-9,
                "outcome {k}: mean {} vs {}",
                mean[k],
                probs[k]
            );
        }
    }

    #[test]
    fn dataset_json_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut ds = simulate_dataset(identity_channel, 250, &mut rng).unwrap();
        ds.seed = Some(23);
        ds.label = Some("identity".into());
        let json = serde_json::to_string_pretty(&ds).unwrap();
        let back: TomographyDataset = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back, ds);

        let exact = exact_probabilities(identity_channel).unwrap();
        let json = serde_json::to_string(&exact).unwrap();
        let back: TomographyDataset = serde_json::from_str(&json).unwrap();
        assert_eq!(back.mode, DatasetMode::Exact);
        back.validate().unwrap();
    }

    #[test]
    fn validation_rejects_corrupted_datasets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let ds = simulate_dataset(identity_channel, 100, &mut rng).unwrap();

        let mut wrong_sum = ds.clone();
        if let RecordValues::Counts(c) = &mut wrong_sum.records[7].counts {
            c[0] += 1;
        }
        assert!(wrong_sum.validate().is_err());

        let mut wrong_order = ds.clone();
        wrong_order.records.swap(0, 9);
        assert!(wrong_order.validate().is_err());

        let mut wrong_labels = ds;
        wrong_labels.outcome_order.swap(0, 1);
        assert!(wrong_labels.validate().is_err());
    }
}
