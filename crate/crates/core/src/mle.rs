//! Iterative maximum-likelihood reconstruction of a CPTP process matrix.
//!
//! The map is represented by its Choi operator S on H_in ⊗ H_out, where
//! every measured outcome is a rank-1 probe: p_j = ⟨w_j|S|w_j⟩ with
//! w_j = ψ_j* ⊗ φ_j built from the input ket and the outcome projector.
//! The fixed-point iteration conjugates S by the weighted probe operator
//! K = Σ_j (f_j/p_j)|w_j⟩⟨w_j| and restores trace preservation with the
//! Lagrange factor Λ^{−1/2} ⊗ I, Λ = Tr_out(KSK). Positivity and the TP
//! constraint therefore hold at every iterate by construction.
//!
//! A dilution parameter blends K toward the identity, K_α = (1−α)I + αK̂;
//! whenever a step would lower the likelihood, α is halved and the step
//! recomputed, making the recorded log-likelihood sequence nondecreasing.

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, hermitize, CMat, CVec};
use crate::process::{choi_to_chi, tp_residual, ProcessMatrix, TP_RESIDUAL_TOL};
use crate::tomography::{
    kron_vec, measurement_settings, tomography_input_states, TomographyDataset,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Floor applied to predicted probabilities inside the likelihood.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

fn default_max_iters() -> usize {
    5000
}
fn default_tol() -> f64 {
    1e-10
}
fn default_dilution() -> f64 {
    1.0
}

/// Stopping and damping controls of the likelihood iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MleOptions {
    pub max_iters: usize,
    /// Relative log-likelihood increase below which iteration stops.
    pub tol: f64,
    /// Initial mixing weight of the probe operator, in (0, 1].
    pub dilution: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iters: default_max_iters(),
            tol: default_tol(),
            dilution: default_dilution(),
        }
    }
}

impl MleOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("mle max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config("mle tol must be positive".into()));
        }
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::Config("mle dilution must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Outcome of a likelihood reconstruction.
#[derive(Debug, Clone)]
pub struct MleResult {
    pub chi: ProcessMatrix,
    /// Accepted log-likelihood value per iteration, starting with the
    /// initial maximally mixed map. Nondecreasing.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// The probe matrix: column j is w_j = ψ* ⊗ φ for the canonical 576
/// (input, setting, outcome) rows. Constant across datasets, built once.
fn probe_matrix() -> &'static CMat {
    static PROBES: OnceLock<CMat> = OnceLock::new();
    PROBES.get_or_init(|| {
        let inputs = tomography_input_states();
        let settings = measurement_settings();
        let mut w = CMat::zeros(16, 576);
        let mut col = 0;
        for psi in inputs.states() {
            let psi_conj = CVec::from_fn(4, |k, _| psi[k].conj());
            for setting in &settings {
                for k in 0..4 {
                    let probe = kron_vec(&psi_conj, &setting.outcome_ket(k));
                    w.set_column(col, &probe);
                    col += 1;
                }
            }
        }
        w
    })
}

/// Predicted probabilities p_j = ⟨w_j|S|w_j⟩ for all probes.
fn predicted_probabilities(s: &CMat, probes: &CMat) -> Vec<f64> {
    let t = s * probes; // 16×576
    (0..probes.ncols())
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..16 {
                acc += probes[(k, j)].conj() * t[(k, j)];
            }
            acc.re
        })
        .collect()
}

fn log_likelihood(freqs: &[f64], probs: &[f64]) -> f64 {
    freqs
        .iter()
        .zip(probs)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, p)| f * p.max(PROBABILITY_CLAMP).ln())
        .sum()
}

/// Partial trace over the output (right) factor: 16×16 → 4×4.
fn trace_out(x: &CMat) -> CMat {
    CMat::from_fn(4, 4, |i, j| {
        (0..4).map(|o| x[(4 * i + o, 4 * j + o)]).sum()
    })
}

/// Inverse square root of a PSD Hermitian matrix (eigenvalues clamped).
fn inv_sqrt_psd(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, lam) in vals.iter().enumerate() {
        let col = vecs.column(k);
        let w = Complex64::new(1.0 / lam.max(1e-300).sqrt(), 0.0);
        out += (col * col.adjoint()) * w;
    }
    out
}

/// Maximum-likelihood CPTP reconstruction from a full dataset.
pub fn mle_reconstruct(ds: &TomographyDataset, opts: &MleOptions) -> Result<MleResult> {
    ds.validate()?;
    opts.validate()?;
    let probes = probe_matrix();
    let freqs: Vec<f64> = ds.frequencies().iter().flatten().copied().collect();

    // Maximally mixed CPTP start: Choi I/4, i.e. χ = diag(1/16).
    let mut s = CMat::identity(16, 16) / Complex64::new(4.0, 0.0);
    let identity = CMat::identity(16, 16);
    let mut warnings: Vec<String> = Vec::new();
    let mut clamp_warned = false;

    let mut probs = predicted_probabilities(&s, probes);
    let mut ll = log_likelihood(&freqs, &probs);
    let mut ll_trace = vec![ll];
    let mut alpha = opts.dilution;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        iterations += 1;
        // K = Σ_j (f_j/p_j) |w_j⟩⟨w_j|, skipping zero-frequency probes.
        let mut scaled = probes.clone();
        for j in 0..probes.ncols() {
            let f = freqs[j];
            let weight = if f > 0.0 {
                let p = probs[j];
                if p < PROBABILITY_CLAMP && !clamp_warned {
                    warnings.push(format!(
                        "predicted probability clamped at {PROBABILITY_CLAMP:.0e} for a \
                         nonzero-frequency outcome (probe {j}); data may be inconsistent"
                    ));
                    clamp_warned = true;
                }
                f / p.max(PROBABILITY_CLAMP)
            } else {
                0.0
            };
            let w = Complex64::new(weight, 0.0);
            for k in 0..16 {
                scaled[(k, j)] *= w;
            }
        }
        let k_op = hermitize(&(&scaled * probes.adjoint()));

        // Diluted step, halving α until the likelihood does not decrease.
        let k_hat = &k_op * Complex64::new(16.0 / k_op.trace().re, 0.0);
        let mut accepted = false;
        for _ in 0..60 {
            let k_alpha = &identity * Complex64::new(1.0 - alpha, 0.0)
                + &k_hat * Complex64::new(alpha, 0.0);
            let x = &k_alpha * &s * &k_alpha;
            let lam_inv_sqrt = inv_sqrt_psd(&trace_out(&x));
            let proj = lam_inv_sqrt.kronecker(&CMat::identity(4, 4));
            let s_new = hermitize(&(&proj * x * &proj));
            let probs_new = predicted_probabilities(&s_new, probes);
            let ll_new = log_likelihood(&freqs, &probs_new);
            if ll_new + 1e-12 * ll.abs() >= ll {
                let rel = (ll_new - ll) / ll.abs().max(1e-300);
                s = s_new;
                probs = probs_new;
                ll = ll_new;
                ll_trace.push(ll);
                accepted = true;
                if rel < opts.tol {
                    converged = true;
                }
                break;
            }
            alpha /= 2.0;
        }
        if !accepted {
            warnings.push(format!(
                "likelihood step rejected at iteration {iterations} even at minimal dilution"
            ));
            break;
        }
        if converged {
            break;
        }
    }

    if !converged {
        warnings.push(format!(
            "likelihood iteration did not converge within {} iterations \
             (relative tolerance {:.1e}); returning the best iterate",
            opts.max_iters, opts.tol
        ));
    }

    let chi = ProcessMatrix::new(choi_to_chi(&s))?;
    let residual = tp_residual(chi.chi());
    if residual > TP_RESIDUAL_TOL {
        warnings.push(format!(
            "trace-preservation residual {residual:.3e} exceeds {TP_RESIDUAL_TOL:.0e}"
        ));
    }
    Ok(MleResult {
        chi,
        log_likelihood: ll_trace,
        iterations,
        converged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{apply_chi, cnot_b_unitary, unitary_to_chi};
    use crate::tomography::{exact_probabilities, simulate_dataset};
    use rand::SeedableRng;

    #[test]
    fn exact_identity_data_reconstructs_the_identity_map() {
        let ds = exact_probabilities(|rho| Ok(rho.clone())).unwrap();
        let result = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
        assert!(result.converged, "did not converge: {:?}", result.warnings);
        let f_p = result.chi.chi()[(0, 0)].re;
        assert!(f_p > 0.999, "F_p = {f_p}");
        for pair in result.log_likelihood.windows(2) {
            assert!(pair[1] + 1e-9 >= pair[0], "log-likelihood decreased");
        }
    }

    #[test]
    fn exact_gate_data_reconstructs_above_threshold() {
        let target = unitary_to_chi(&cnot_b_unitary()).unwrap();
        let ds = exact_probabilities(|rho| apply_chi(&target, rho)).unwrap();
        let result = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
        let f_p = (target.chi() * result.chi.chi()).trace().re;
        assert!(f_p > 0.999, "F_p = {f_p} after {} iterations", result.iterations);
    }

    #[test]
    fn noisy_data_yields_a_physical_map_with_higher_likelihood_than_start() {
        let target = unitary_to_chi(&cnot_b_unitary()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        let ds = simulate_dataset(|rho| apply_chi(&target, rho), 250, &mut rng).unwrap();
        let result = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
        // ProcessMatrix validation already guarantees Hermiticity, trace
        // and positivity; check TP and likelihood improvement explicitly.
        assert!(result.chi.tp_residual() < TP_RESIDUAL_TOL);
        let first = result.log_likelihood.first().unwrap();
        let last = result.log_likelihood.last().unwrap();
        assert!(last > first);
    }

    #[test]
    fn options_validation() {
        assert!(MleOptions::default().validate().is_ok());
        assert!(MleOptions {
            dilution: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(MleOptions {
            tol: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(MleOptions {
            max_iters: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
