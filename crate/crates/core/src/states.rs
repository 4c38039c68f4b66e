//! Quantum states: two-qubit density matrices and the pure state of the
//! two-ion ⊗ vibrational-mode register.
//!
//! Basis conventions, used identically everywhere in the crate:
//!
//! * each ion's internal basis is ordered {D, S} (D = 0, S = 1);
//! * two-qubit basis kets are |ion 2, ion 1⟩, i.e. {|DD⟩, |DS⟩, |SD⟩, |SS⟩}
//!   with ion 2 (the control) as the left tensor factor;
//! * the full register index is `(q₂·2 + q₁)·(n_max+1) + n` for Fock
//!   level n of the shared axial mode.

use crate::error::{Error, Result};
use crate::linalg::{herm_eigen, hermiticity_deviation, CMat, CVec};
use num_complex::Complex64;

/// Tolerance for Hermiticity and unit-trace checks on densities.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues may undershoot zero by at most this much.
pub const PSD_TOL: f64 = -1e-9;

/// Labels of the two-qubit basis kets, in index order.
pub const QUBIT_BASIS_LABELS: [&str; 4] = ["DD", "DS", "SD", "SS"];

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite (all within the documented tolerances).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMat,
}

impl DensityMatrix {
    /// Validate and wrap a density matrix.
    pub fn new(data: CMat) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Invalid(format!(
                "density matrix must be square, got {}×{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let herm = hermiticity_deviation(&data);
        if herm > DENSITY_TOL {
            return Err(Error::Numerical(format!(
                "density matrix not Hermitian: max |ρ - ρ†| = {herm:.3e}"
            )));
        }
        let tr = data.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::Numerical(format!(
                "density matrix trace {} deviates from 1",
                tr
            )));
        }
        let (vals, _) = herm_eigen(&data);
        if let Some(min) = vals.iter().copied().reduce(f64::min) {
            if min < PSD_TOL {
                return Err(Error::Numerical(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { data })
    }

    /// Rank-1 density |ψ⟩⟨ψ| from a normalized pure state.
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Invalid(format!("state norm {n} deviates from 1")));
        }
        Ok(Self {
            data: psi * psi.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_inner(self) -> CMat {
        self.data
    }

    /// tr ρ², in [1/dim, 1].
    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eigen(&self.data).0
    }

    /// Spectral decomposition as (weight, eigenvector) pairs, skipping
    /// weights below `cutoff`. Used to evolve mixed inputs as ensembles of
    /// pure states.
    pub fn pure_components(&self, cutoff: f64) -> Vec<(f64, CVec)> {
        let (vals, vecs) = herm_eigen(&self.data);
        let mut out = Vec::new();
        for (j, w) in vals.iter().enumerate() {
            if *w > cutoff {
                out.push((*w, CVec::from(vecs.column(j).into_owned())));
            }
        }
        out
    }
}

/// Overlap ⟨ψ|ρ|ψ⟩ of a pure reference state with a density.
pub fn fidelity_pure(psi: &CVec, rho: &DensityMatrix) -> f64 {
    assert_eq!(
        psi.len(),
        rho.dim(),
        "dimension mismatch between state and density"
    );
    (psi.adjoint() * rho.data() * psi)[(0, 0)].re
}

/// Pure state of the full register: 2 qubits ⊗ (n_max+1) Fock levels.
#[derive(Debug, Clone)]
pub struct SystemState {
    n_max: usize,
    amps: CVec,
}

impl SystemState {
    /// Dimension of the register for a given Fock cutoff.
    pub fn dim_for(n_max: usize) -> usize {
        4 * (n_max + 1)
    }

    /// Flat index of |q₂, q₁, n⟩.
    pub fn index(n_max: usize, q2: usize, q1: usize, n: usize) -> usize {
        (q2 * 2 + q1) * (n_max + 1) + n
    }

    /// Wrap an amplitude vector, checking dimension and normalization.
    pub fn new(amps: CVec, n_max: usize) -> Result<Self> {
        if amps.len() != Self::dim_for(n_max) {
            return Err(Error::Invalid(format!(
                "state dimension {} does not match n_max {}",
                amps.len(),
                n_max
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Invalid(format!("state norm {norm} deviates from 1")));
        }
        Ok(Self { n_max, amps })
    }

    /// Embed a normalized two-qubit state with the mode in its ground state.
    pub fn from_qubits(qubits: &CVec, n_max: usize) -> Result<Self> {
        if qubits.len() != 4 {
            return Err(Error::Invalid(format!(
                "expected a 4-component qubit state, got {}",
                qubits.len()
            )));
        }
        let mut amps = CVec::zeros(Self::dim_for(n_max));
        for q in 0..4 {
            amps[q * (n_max + 1)] = qubits[q];
        }
        Self::new(amps, n_max)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    /// Total population in Fock level `n`.
    pub fn mode_population(&self, n: usize) -> f64 {
        (0..4)
            .map(|q| self.amps[q * (self.n_max + 1) + n].norm_sqr())
            .sum()
    }

    /// Total population outside the motional ground state.
    pub fn mode_excited_population(&self) -> f64 {
        (1..=self.n_max).map(|n| self.mode_population(n)).sum()
    }

    /// Reduced two-qubit density operator (trace over the mode).
    pub fn qubit_density(&self) -> Result<DensityMatrix> {
        let nf = self.n_max + 1;
        let mut rho = CMat::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..nf {
                    acc += self.amps[r * nf + n] * self.amps[c * nf + n].conj();
                }
                rho[(r, c)] = acc;
            }
        }
        DensityMatrix::new(rho)
    }
}

/// Trace a full register density (dimension 4·(n_max+1)) over the Fock
/// index, returning the 4×4 two-qubit density.
pub fn partial_trace_mode(rho_full: &CMat, n_max: usize) -> Result<DensityMatrix> {
    let nf = n_max + 1;
    if rho_full.nrows() != 4 * nf || rho_full.ncols() != 4 * nf {
        return Err(Error::Invalid(format!(
            "expected a {}×{0} register density, got {}×{}",
            4 * nf,
            rho_full.nrows(),
            rho_full.ncols()
        )));
    }
    let mut rho = CMat::zeros(4, 4);
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..nf {
                acc += rho_full[(r * nf + n, c * nf + n)];
            }
            rho[(r, c)] = acc;
        }
    }
    DensityMatrix::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, C_ONE, C_ZERO};

    fn ket(idx: usize, dim: usize) -> CVec {
        let mut v = CVec::zeros(dim);
        v[idx] = C_ONE;
        v
    }

    #[test]
    fn basis_product_state_traces_to_projector() {
        // |SS⟩ ⊗ |0⟩ → |SS⟩⟨SS|
        let s = SystemState::from_qubits(&ket(3, 4), 3).unwrap();
        let rho = s.qubit_density().unwrap();
        let expected = &ket(3, 4) * ket(3, 4).adjoint();
        assert!(max_abs_diff(rho.data(), &expected) < 1e-14);
    }

    #[test]
    fn entangled_mode_state_traces_to_mixture() {
        // (|SS,0⟩ + |DD,1⟩)/√2 → ½(|SS⟩⟨SS| + |DD⟩⟨DD|)
        let n_max = 3;
        let mut amps = CVec::zeros(SystemState::dim_for(n_max));
        amps[SystemState::index(n_max, 1, 1, 0)] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        amps[SystemState::index(n_max, 0, 0, 1)] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let s = SystemState::new(amps, n_max).unwrap();
        let rho = s.qubit_density().unwrap();
        let mut expected = CMat::zeros(4, 4);
        expected[(3, 3)] = Complex64::new(0.5, 0.0);
        expected[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(max_abs_diff(rho.data(), &expected) < 1e-14);
        assert!((s.mode_excited_population() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn fidelity_pure_oracles() {
        let psi = ket(1, 4);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((fidelity_pure(&psi, &rho) - 1.0).abs() < 1e-14);
        let orth = ket(2, 4);
        assert!(fidelity_pure(&orth, &rho).abs() < 1e-14);
        let mixed = DensityMatrix::new(CMat::identity(4, 4) * Complex64::new(0.25, 0.0)).unwrap();
        assert!((fidelity_pure(&psi, &mixed) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn invalid_densities_rejected() {
        // trace != 1
        assert!(DensityMatrix::new(CMat::identity(4, 4)).is_err());
        // non-Hermitian
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = C_ONE;
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // negative eigenvalue
        let mut neg = CMat::zeros(2, 2);
        neg[(0, 0)] = Complex64::new(1.5, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(neg).is_err());
        let _ = C_ZERO;
    }

    #[test]
    fn pure_components_reassemble() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.75, 0.0);
        m[(1, 1)] = Complex64::new(0.25, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.05);
        m[(1, 0)] = Complex64::new(0.1, -0.05);
        let rho = DensityMatrix::new(m.clone()).unwrap();
        let mut rebuilt = CMat::zeros(2, 2);
        for (w, v) in rho.pure_components(1e-14) {
            rebuilt += (&v * v.adjoint()) * Complex64::new(w, 0.0);
        }
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
    }
}
