//! Linear-inversion reconstruction of χ from a tomography dataset.
//!
//! Each record/outcome pair contributes one linear equation: with
//! g_m = ⟨φ_out|A_m|ψ_in⟩ and h = g*, the outcome probability is the
//! quadratic form p = h†χh, linear in the entries of χ. Parametrizing the
//! Hermitian χ by 256 reals (16 diagonal, 120 real and 120 imaginary
//! off-diagonal parts) turns the 576 outcome frequencies into an
//! overdetermined real least-squares problem solved by normal equations.
//!
//! The result is Hermitian and near trace-1 but **not** constrained to be
//! positive: finite-shot noise routinely produces negative eigenvalues,
//! which is exactly why the likelihood-based reconstruction exists.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::pauli::pauli_product_basis;
use crate::tomography::{
    measurement_settings, tomography_input_states, TomographyDataset,
};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use std::sync::OnceLock;

/// The h-vectors (conjugated transition amplitudes) of every
/// (record, outcome) row in canonical order: 576 vectors of length 16.
pub fn transition_vectors() -> Vec<CVec> {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    let inputs = tomography_input_states();
    let settings = measurement_settings();
    let mut rows = Vec::with_capacity(576);
    for psi in inputs.states() {
        // A_m|ψ⟩ reused across the 36 rows of this input.
        let moved: Vec<CVec> = basis.ops.iter().map(|a| a * psi).collect();
        for setting in &settings {
            for k in 0..4 {
                let phi = setting.outcome_ket(k);
                let h = CVec::from_fn(16, |m, _| phi.dotc(&moved[m]).conj());
                rows.push(h);
            }
        }
    }
    rows
}

/// Index maps for the 256-real-parameter encoding of a Hermitian 16×16
/// matrix: 16 diagonals, then Re and Im of the 120 upper-triangle entries.
fn offdiag_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(120);
    for m in 0..16 {
        for n in (m + 1)..16 {
            pairs.push((m, n));
        }
    }
    pairs
}

/// The real design matrix of the protocol and the Cholesky factor of its
/// Gram matrix. Both depend only on the canonical inputs/settings, so
/// they are built once per process.
fn design_system() -> Result<&'static (DMatrix<f64>, Cholesky<f64, Dyn>)> {
    static SYSTEM: OnceLock<Option<(DMatrix<f64>, Cholesky<f64, Dyn>)>> = OnceLock::new();
    SYSTEM
        .get_or_init(|| {
            let rows = transition_vectors();
            let pairs = offdiag_pairs();
            let n_params = 16 + 2 * pairs.len();
            let mut design = DMatrix::<f64>::zeros(rows.len(), n_params);
            for (r, h) in rows.iter().enumerate() {
                for m in 0..16 {
                    design[(r, m)] = h[m].norm_sqr();
                }
                for (p, (m, n)) in pairs.iter().enumerate() {
                    // Paired (m,n)+(n,m) terms: 2Re(c)·Reχ_mn − 2Im(c)·Imχ_mn
                    // with c = conj(h_m)·h_n.
                    let c = h[*m].conj() * h[*n];
                    design[(r, 16 + p)] = 2.0 * c.re;
                    design[(r, 16 + pairs.len() + p)] = -2.0 * c.im;
                }
            }
            let gram = design.transpose() * &design;
            Cholesky::new(gram).map(|chol| (design, chol))
        })
        .as_ref()
        .ok_or_else(|| {
            Error::Protocol(
                "tomography design matrix is rank-deficient; the dataset does not \
                 determine a unique process matrix"
                    .into(),
            )
        })
}

/// Least-squares estimate of χ from the dataset's outcome frequencies.
///
/// Returns a Hermitian 16×16 matrix; eigenvalues may be negative for
/// noisy data. Fails with a protocol error if the design matrix is
/// rank-deficient (impossible with the canonical inputs and settings, but
/// checked rather than assumed).
pub fn linear_inversion(ds: &TomographyDataset) -> Result<CMat> {
    ds.validate()?;
    let (design, chol) = design_system()?;
    let pairs = offdiag_pairs();
    let freqs = ds.frequencies();

    let mut target = DVector::<f64>::zeros(design.nrows());
    for r in 0..design.nrows() {
        target[r] = freqs[r / 4][r % 4];
    }
    let rhs = design.transpose() * target;
    let x = chol.solve(&rhs);

    let mut chi = CMat::zeros(16, 16);
    for m in 0..16 {
        chi[(m, m)] = Complex64::new(x[m], 0.0);
    }
    for (p, (m, n)) in pairs.iter().enumerate() {
        let v = Complex64::new(x[16 + p], x[16 + pairs.len() + p]);
        chi[(*m, *n)] = v;
        chi[(*n, *m)] = v.conj();
    }
    Ok(chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_deviation, max_abs_diff};
    use crate::process::{apply_chi, cnot_a_unitary, unitary_to_chi};
    use crate::tomography::{exact_probabilities, simulate_dataset};
    use rand::SeedableRng;

    #[test]
    fn exact_data_of_the_gate_inverts_to_its_chi() {
        let chi = unitary_to_chi(&cnot_a_unitary()).unwrap();
        let ds = exact_probabilities(|rho| apply_chi(&chi, rho)).unwrap();
        let rec = linear_inversion(&ds).unwrap();
        assert!(max_abs_diff(&rec, chi.chi()) < 1e-8);
    }

    #[test]
    fn exact_identity_data_inverts_to_a_delta() {
        let ds = exact_probabilities(|rho| Ok(rho.clone())).unwrap();
        let rec = linear_inversion(&ds).unwrap();
        assert!((rec[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!((rec.trace().re - 1.0).abs() < 1e-10);
        assert!(hermiticity_deviation(&rec) < 1e-12);
    }

    #[test]
    fn finite_shot_data_stays_hermitian_and_near_trace_one() {
        let chi = unitary_to_chi(&cnot_a_unitary()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let ds = simulate_dataset(|rho| apply_chi(&chi, rho), 250, &mut rng).unwrap();
        let rec = linear_inversion(&ds).unwrap();
        assert!(hermiticity_deviation(&rec) < 1e-9);
        assert!((rec.trace().re - 1.0).abs() < 0.05);
        // Projection noise at 250 shots generically drives some
        // eigenvalues negative — assert the reconstruction is at least
        // close to the truth rather than positive.
        assert!(max_abs_diff(&rec, chi.chi()) < 0.1);
    }

    #[test]
    fn transition_vector_count_and_normalization() {
        let rows = transition_vectors();
        assert_eq!(rows.len(), 576);
        // For the identity Pauli (m=0), h_0 = conj(⟨φ|ψ⟩); magnitude ≤ 1.
        for h in &rows {
            assert!(h[0].norm() <= 1.0 + 1e-12);
        }
    }
}
