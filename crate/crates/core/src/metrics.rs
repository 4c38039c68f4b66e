//! Gate-quality metrics computed from a process matrix.
//!
//! Alongside the process fidelity tr(χ_id·χ), a Monte-Carlo ensemble of
//! Haar-random pure inputs yields the mean state fidelity against the
//! ideal unitary's output, the mean normalized linear entropy, and the
//! largest observed gain in concurrence. The closed-form relation
//! F_mean = (4·F_p + 1)/5 serves as an independent cross-check on the
//! sampled mean.
//!
//! One reading note on the entropy: it is computed as
//! S_lin = (4/3)·(1 − tr[E(ρ)²]), which is the normalization that maps
//! pure outputs to 0 and the maximally mixed output to 1.

use crate::error::{Error, Result};
use crate::haar::{haar_random_pure_state, substream_rng, StreamPurpose};
use crate::linalg::{herm_eigen, sqrt_psd, unitarity_deviation, CMat, CVec};
use crate::process::ProcessMatrix;
use crate::states::DensityMatrix;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Haar draws per deterministic substream chunk.
const CHUNK: usize = 1024;

/// Bootstrap standard deviations attached to a report by resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricErrors {
    pub f_p: f64,
    pub f_mean: f64,
    pub s_lin_mean: f64,
    pub max_delta_c: f64,
}

/// The full metric row for one reconstructed process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Process fidelity tr(χ_id·χ).
    pub f_p: f64,
    /// Monte-Carlo mean state fidelity over Haar inputs.
    pub f_mean: f64,
    /// (4·F_p + 1)/5, the closed-form cross-check on f_mean.
    pub f_mean_closed_form: f64,
    /// Mean normalized linear entropy of the outputs.
    pub s_lin_mean: f64,
    /// Largest sampled concurrence gain C(E(ρ)) − C(ρ).
    pub max_delta_c: f64,
    /// Haar ensemble size behind the Monte-Carlo values.
    pub n_samples: usize,
    /// Bootstrap standard deviations, when computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<MetricErrors>,
}

/// Process fidelity tr(χ_id·χ) against a rank-1 (unitary) target.
pub fn process_fidelity(chi: &ProcessMatrix, chi_ideal: &ProcessMatrix) -> f64 {
    (chi_ideal.chi() * chi.chi()).trace().re
}

/// The average-fidelity identity F_mean = (d·F_p + 1)/(d + 1) at d = 4.
pub fn mean_fidelity_closed_form(f_p: f64) -> f64 {
    (4.0 * f_p + 1.0) / 5.0
}

/// Monte-Carlo ensemble statistics with standard errors of the means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledMetrics {
    pub f_mean: f64,
    pub f_mean_se: f64,
    pub s_lin_mean: f64,
    pub s_lin_se: f64,
    pub max_delta_c: f64,
}

/// Run the shared Haar ensemble: for each of `n` random pure inputs,
/// compute the state fidelity to the ideal output, the output's linear
/// entropy, and the concurrence change. Deterministic given `seed` and
/// independent of thread count (fixed-size substream chunks, ordered
/// reduction).
pub fn haar_ensemble_metrics(
    chi: &ProcessMatrix,
    u_ideal: &CMat,
    n: usize,
    seed: u64,
) -> Result<SampledMetrics> {
    if n == 0 {
        return Err(Error::Invalid("ensemble size must be at least 1".into()));
    }
    let dev = unitarity_deviation(u_ideal);
    if u_ideal.nrows() != 4 || u_ideal.ncols() != 4 || dev > 1e-8 {
        return Err(Error::Invalid(format!(
            "ideal target must be a 4×4 unitary (deviation {dev:.3e})"
        )));
    }
    let kraus = chi.kraus_operators();

    let n_chunks = n.div_ceil(CHUNK);
    struct ChunkStats {
        sum_f: f64,
        sum_f2: f64,
        sum_s: f64,
        sum_s2: f64,
        max_dc: f64,
    }
    let per_chunk: Vec<ChunkStats> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream_rng(seed, StreamPurpose::HaarStates, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut stats = ChunkStats {
                sum_f: 0.0,
                sum_f2: 0.0,
                sum_s: 0.0,
                sum_s2: 0.0,
                max_dc: f64::NEG_INFINITY,
            };
            for _ in 0..len {
                let psi = haar_random_pure_state(4, &mut rng);
                let branches: Vec<CVec> = kraus.iter().map(|k| k * &psi).collect();

                let ideal_out = u_ideal * &psi;
                let f: f64 = branches.iter().map(|v| ideal_out.dotc(v).norm_sqr()).sum();

                // tr[E(ρ)²] = Σ_kl |v_k†v_l|² for E(ρ) = Σ v v†.
                let mut purity = 0.0;
                for a in &branches {
                    for b in &branches {
                        purity += a.dotc(b).norm_sqr();
                    }
                }
                let s_lin = (4.0 / 3.0) * (1.0 - purity);

                let mut rho_out = CMat::zeros(4, 4);
                for v in &branches {
                    rho_out += v * v.adjoint();
                }
                let dc = concurrence_raw(&rho_out) - pure_concurrence(&psi);

                stats.sum_f += f;
                stats.sum_f2 += f * f;
                stats.sum_s += s_lin;
                stats.sum_s2 += s_lin * s_lin;
                stats.max_dc = stats.max_dc.max(dc);
            }
            stats
        })
        .collect();

    let (mut sum_f, mut sum_f2, mut sum_s, mut sum_s2) = (0.0, 0.0, 0.0, 0.0);
    let mut max_dc = f64::NEG_INFINITY;
    for c in &per_chunk {
        sum_f += c.sum_f;
        sum_f2 += c.sum_f2;
        sum_s += c.sum_s;
        sum_s2 += c.sum_s2;
        max_dc = max_dc.max(c.max_dc);
    }
    let nf = n as f64;
    let f_mean = sum_f / nf;
    let s_mean = sum_s / nf;
    let var_f = (sum_f2 / nf - f_mean * f_mean).max(0.0);
    let var_s = (sum_s2 / nf - s_mean * s_mean).max(0.0);
    Ok(SampledMetrics {
        f_mean,
        f_mean_se: (var_f / nf).sqrt(),
        s_lin_mean: s_mean,
        s_lin_se: (var_s / nf).sqrt(),
        max_delta_c: max_dc,
    })
}

/// Monte-Carlo mean fidelity over `n` Haar inputs.
pub fn mean_fidelity_mc(chi: &ProcessMatrix, u_ideal: &CMat, n: usize, seed: u64) -> Result<f64> {
    Ok(haar_ensemble_metrics(chi, u_ideal, n, seed)?.f_mean)
}

/// Monte-Carlo mean normalized linear entropy over `n` Haar inputs.
pub fn mean_linear_entropy(chi: &ProcessMatrix, n: usize, seed: u64) -> Result<f64> {
    Ok(haar_ensemble_metrics(chi, &CMat::identity(4, 4), n, seed)?.s_lin_mean)
}

/// Largest sampled concurrence gain over `n` Haar inputs.
pub fn max_delta_concurrence(chi: &ProcessMatrix, n: usize, seed: u64) -> Result<f64> {
    Ok(haar_ensemble_metrics(chi, &CMat::identity(4, 4), n, seed)?.max_delta_c)
}

/// Aggregate all metrics for one χ against its ideal target.
pub fn metric_report(
    chi: &ProcessMatrix,
    u_ideal: &CMat,
    n: usize,
    seed: u64,
) -> Result<MetricReport> {
    let chi_ideal = crate::process::unitary_to_chi(u_ideal)?;
    let f_p = process_fidelity(chi, &chi_ideal);
    let sampled = haar_ensemble_metrics(chi, u_ideal, n, seed)?;
    Ok(MetricReport {
        f_p,
        f_mean: sampled.f_mean,
        f_mean_closed_form: mean_fidelity_closed_form(f_p),
        s_lin_mean: sampled.s_lin_mean,
        max_delta_c: sampled.max_delta_c,
        n_samples: n,
        errors: None,
    })
}

// ---------------------------------------------------------------------------
// Concurrence.
// ---------------------------------------------------------------------------

/// The spin-flip conjugation (Y⊗Y)·ρ*·(Y⊗Y); Y⊗Y is the real
/// antidiagonal (−1, 1, 1, −1).
fn spin_flipped(rho: &CMat) -> CMat {
    let yy_signs = [-1.0, 1.0, 1.0, -1.0];
    // (YY·ρ*·YY)[i,j] = s_i·s_j·conj(ρ[3−i, 3−j]).
    CMat::from_fn(4, 4, |i, j| {
        rho[(3 - i, 3 - j)].conj() * (yy_signs[i] * yy_signs[j])
    })
}

/// Two-qubit concurrence via the Hermitian square-root route:
/// λ_k are the decreasing square roots of the eigenvalues of
/// √ρ·ρ̃·√ρ, and C = max(0, λ₁ − λ₂ − λ₃ − λ₄).
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    concurrence_raw(rho.data())
}

fn concurrence_raw(rho: &CMat) -> f64 {
    let root = sqrt_psd(rho);
    let m = &root * spin_flipped(rho) * &root;
    let (vals, _) = herm_eigen(&m);
    let scale = vals.iter().copied().fold(0.0_f64, f64::max);
    if scale <= 0.0 {
        return 0.0;
    }
    // Eigenvalues at the machine-noise floor relative to the largest are
    // numerical zeros; taking their square roots would inject ~1e-8 of
    // phantom concurrence into rank-deficient (e.g. pure) inputs.
    let floor = scale * 1e-14;
    let mut lambdas: Vec<f64> = vals
        .iter()
        .map(|&v| if v < floor { 0.0 } else { v.sqrt() })
        .collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Concurrence of a pure state: C = 2|a₀₀a₁₁ − a₀₁a₁₀|.
pub fn pure_concurrence(psi: &CVec) -> f64 {
    2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()
}
