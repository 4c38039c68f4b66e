//! Pauli-product operator basis.
//!
//! The two-qubit basis is ordered lexicographically in (I, X, Y, Z) per
//! qubit with ion 2 (the control) as the left tensor factor, giving the
//! sixteen labels II, IX, IY, IZ, XI, …, ZZ. Elements are unnormalized
//! (A² = I), so trace preservation of a map forces tr χ = 1 and the II,II
//! element of a χ matrix reconstructed against a unitary target directly
//! gives the process fidelity.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C_I, C_ONE, C_ZERO};
use num_complex::Complex64;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// The four single-qubit Pauli matrices `[I, X, Y, Z]` in the {D, S} basis
/// (D = index 0), with Z = diag(1, −1) and Y = [[0, −i], [i, 0]].
pub fn single_paulis() -> [CMat; 4] {
    let i2 = CMat::identity(2, 2);
    let x = CMat::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO]);
    let y = CMat::from_row_slice(2, 2, &[C_ZERO, -C_I, C_I, C_ZERO]);
    let z = CMat::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE]);
    [i2, x, y, z]
}

/// An ordered Pauli-product operator basis on `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct PauliBasis {
    pub n_qubits: usize,
    /// 4^n matrices of size 2^n × 2^n; element 0 is the identity.
    pub ops: Vec<CMat>,
    /// Label per element, e.g. "ZY" = Z on ion 2 (left factor), Y on ion 1.
    pub labels: Vec<String>,
}

/// Build the Pauli-product basis for 1 or 2 qubits.
///
/// For two qubits the element index is `m = 4·a₂ + a₁` where `a₂` indexes
/// the ion-2 letter and `a₁` the ion-1 letter, both over (I, X, Y, Z).
pub fn pauli_product_basis(n_qubits: usize) -> Result<PauliBasis> {
    if n_qubits == 0 || n_qubits > 2 {
        return Err(Error::Invalid(format!(
            "pauli_product_basis supports 1 or 2 qubits, got {n_qubits}"
        )));
    }
    let singles = single_paulis();
    let (ops, labels) = match n_qubits {
        1 => (
            singles.to_vec(),
            LETTERS.iter().map(|c| c.to_string()).collect(),
        ),
        _ => {
            let mut ops = Vec::with_capacity(16);
            let mut labels = Vec::with_capacity(16);
            for a2 in 0..4 {
                for a1 in 0..4 {
                    ops.push(singles[a2].kronecker(&singles[a1]));
                    labels.push(format!("{}{}", LETTERS[a2], LETTERS[a1]));
                }
            }
            (ops, labels)
        }
    };
    Ok(PauliBasis { n_qubits, ops, labels })
}

impl PauliBasis {
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Expansion coefficients of `m` in this basis: c_k = tr(A_k† m) / 2^n.
    pub fn coefficients(&self, m: &CMat) -> Vec<Complex64> {
        let d = self.dim() as f64;
        self.ops
            .iter()
            .map(|a| (a.adjoint() * m).trace() / Complex64::new(d, 0.0))
            .collect()
    }
}

/// Canonical two-qubit labels II…ZZ, used by serialized χ files.
pub fn two_qubit_labels() -> Vec<String> {
    pauli_product_basis(2).expect("2 qubits supported").labels
}
