//! Process matrices: the χ representation of two-qubit quantum maps in the
//! Pauli-product basis, with conversions to superoperator and Choi forms.
//!
//! A map E acts in the operator-sum representation
//! `E(ρ) = Σ_mn χ_mn A_m ρ A_n†` over the unnormalized Pauli products A_m.
//! Trace preservation (`Σ_mn χ_mn A_n†A_m = I`) then forces tr χ = 1, so
//! the II,II element of a χ reconstructed against a unitary target reads
//! directly as the process fidelity.
//!
//! Conversions use column-stacked vectorization: `vec(AρB) = (Bᵀ⊗A)·vec(ρ)`.
//! The Choi operator lives on H_in ⊗ H_out with the input factor on the
//! left, so outcome probabilities are `p = ⟨w|S|w⟩` with `w = ψ* ⊗ φ`.

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eigen, hermitize, hermiticity_deviation, max_abs, sqrt_psd, unitarity_deviation, CMat,
    CVec,
};
use crate::pauli::{pauli_product_basis, two_qubit_labels};
use crate::states::DensityMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Hermiticity tolerance for χ matrices.
pub const CHI_HERM_TOL: f64 = 1e-10;
/// Trace-normalization tolerance for χ matrices.
pub const CHI_TRACE_TOL: f64 = 1e-8;
/// χ eigenvalues may undershoot zero by at most this much.
pub const CHI_PSD_TOL: f64 = -1e-9;
/// Tolerance on the trace-preservation residual of reconstructed maps.
pub const TP_RESIDUAL_TOL: f64 = 1e-6;

/// A validated 16×16 process matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    chi: CMat,
}

impl ProcessMatrix {
    /// Validate and wrap a χ matrix. The stored matrix is the Hermitian
    /// part of the input; the input's asymmetry must be within tolerance.
    pub fn new(chi: CMat) -> Result<Self> {
        if chi.nrows() != 16 || chi.ncols() != 16 {
            return Err(Error::Invalid(format!(
                "process matrix must be 16×16, got {}×{}",
                chi.nrows(),
                chi.ncols()
            )));
        }
        let asym = hermiticity_deviation(&chi);
        if asym > CHI_HERM_TOL {
            return Err(Error::Numerical(format!(
                "process matrix not Hermitian: max |χ - χ†| = {asym:.3e}"
            )));
        }
        let chi = hermitize(&chi);
        let tr = chi.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > CHI_TRACE_TOL {
            return Err(Error::Numerical(format!(
                "process matrix trace {tr} deviates from 1"
            )));
        }
        let (vals, _) = herm_eigen(&chi);
        if let Some(min) = vals.iter().copied().reduce(f64::min) {
            if min < CHI_PSD_TOL {
                return Err(Error::Numerical(format!(
                    "process matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { chi })
    }

    pub fn chi(&self) -> &CMat {
        &self.chi
    }

    pub fn into_inner(self) -> CMat {
        self.chi
    }

    /// Deviation of Σ_mn χ_mn A_n†A_m from the identity.
    pub fn tp_residual(&self) -> f64 {
        tp_residual(&self.chi)
    }

    /// Kraus operators K_k = √λ_k Σ_m V_mk A_m from the eigendecomposition
    /// of χ; eigenvalues are clamped at zero. The Kraus form reproduces
    /// `apply_chi` exactly for PSD χ and is the fast path for Monte-Carlo
    /// metric sampling.
    pub fn kraus_operators(&self) -> Vec<CMat> {
        let basis = pauli_product_basis(2).expect("2 qubits supported");
        let (vals, vecs) = herm_eigen(&self.chi);
        let mut out = Vec::new();
        for (k, lam) in vals.iter().enumerate() {
            if *lam <= 1e-14 {
                continue;
            }
            let s = Complex64::new(lam.sqrt(), 0.0);
            let mut kop = CMat::zeros(4, 4);
            for m in 0..16 {
                kop += &basis.ops[m] * (vecs[(m, k)] * s);
            }
            out.push(kop);
        }
        out
    }
}

/// Trace-preservation residual max |Σ_mn χ_mn A_n†A_m − I| of a raw χ.
pub fn tp_residual(chi: &CMat) -> f64 {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    let mut acc = CMat::zeros(4, 4);
    for m in 0..16 {
        for n in 0..16 {
            acc += (&basis.ops[n].adjoint() * &basis.ops[m]) * chi[(m, n)];
        }
    }
    crate::linalg::max_abs_diff(&acc, &CMat::identity(4, 4))
}

/// χ of the unitary map ρ ↦ UρU†: a rank-1 matrix χ = c c† with
/// c_m = tr(A_m† U)/4.
pub fn unitary_to_chi(u: &CMat) -> Result<ProcessMatrix> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::Invalid(format!(
            "expected a 4×4 unitary, got {}×{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let dev = unitarity_deviation(u);
    if dev > 1e-8 {
        return Err(Error::Invalid(format!(
            "matrix is not unitary: max |U†U - I| = {dev:.3e}"
        )));
    }
    let basis = pauli_product_basis(2)?;
    let c = basis.coefficients(u);
    let mut chi = CMat::zeros(16, 16);
    for m in 0..16 {
        for n in 0..16 {
            chi[(m, n)] = c[m] * c[n].conj();
        }
    }
    ProcessMatrix::new(chi)
}

/// χ of the channel E(ρ) = Σ_k K_k ρ K_k† given its Kraus operators.
pub fn kraus_to_chi(kraus: &[CMat]) -> CMat {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    let mut chi = CMat::zeros(16, 16);
    for k in kraus {
        let c = basis.coefficients(k);
        for m in 0..16 {
            for n in 0..16 {
                chi[(m, n)] += c[m] * c[n].conj();
            }
        }
    }
    chi
}

/// Apply the operator-sum map: E(ρ) = Σ_mn χ_mn A_m ρ A_n†.
pub fn apply_chi(chi: &ProcessMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        let d = rho.dim();
        return Err(Error::Invalid(format!(
            "apply_chi expects a 4×4 density, got {d}×{d}"
        )));
    }
    DensityMatrix::new(apply_chi_raw(chi.chi(), rho.data()))
}

/// `apply_chi` on raw matrices, without validity checks on the result.
pub fn apply_chi_raw(chi: &CMat, rho: &CMat) -> CMat {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    // E(ρ) = Σ_n (Σ_m χ_mn A_m ρ) A_n†
    let products: Vec<CMat> = basis.ops.iter().map(|a| a * rho).collect();
    let mut out = CMat::zeros(4, 4);
    for n in 0..16 {
        let mut inner = CMat::zeros(4, 4);
        for m in 0..16 {
            let w = chi[(m, n)];
            if w.norm_sqr() > 0.0 {
                inner += &products[m] * w;
            }
        }
        out += inner * basis.ops[n].adjoint();
    }
    out
}

/// Superoperator (Liouville) matrix of the map in column-stacked
/// vectorization: L = Σ_mn χ_mn (A_n)* ⊗ A_m, so vec(E(ρ)) = L·vec(ρ).
pub fn chi_to_superoperator(chi: &CMat) -> CMat {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    let mut l = CMat::zeros(16, 16);
    for m in 0..16 {
        for n in 0..16 {
            let w = chi[(m, n)];
            if w.norm_sqr() > 0.0 {
                l += basis.ops[n].conjugate().kronecker(&basis.ops[m]) * w;
            }
        }
    }
    l
}

/// Choi operator on H_in ⊗ H_out (input factor on the left) of the map
/// with superoperator `l`: S = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|).
pub fn superoperator_to_choi(l: &CMat) -> CMat {
    let mut s = CMat::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            // vec(|i⟩⟨j|) has a single 1 at column-stacked index j·4+i.
            let col = l.column(j * 4 + i);
            for o1 in 0..4 {
                for o2 in 0..4 {
                    // E(|i⟩⟨j|)[o1,o2] = vec index o2·4+o1.
                    s[(i * 4 + o1, j * 4 + o2)] = col[o2 * 4 + o1];
                }
            }
        }
    }
    s
}

/// χ matrix from a Choi operator: χ_pq = ⟨v_p|S|v_q⟩/16 with
/// v_p = (I ⊗ A_p)|Ω⟩ and |Ω⟩ = Σ_i |i⟩|i⟩ (unnormalized).
pub fn choi_to_chi(s: &CMat) -> CMat {
    let basis = pauli_product_basis(2).expect("2 qubits supported");
    let v: Vec<CVec> = basis
        .ops
        .iter()
        .map(|a| {
            let mut vp = CVec::zeros(16);
            for i in 0..4 {
                for o in 0..4 {
                    vp[i * 4 + o] = a[(o, i)];
                }
            }
            vp
        })
        .collect();
    let mut chi = CMat::zeros(16, 16);
    for p in 0..16 {
        for q in 0..16 {
            chi[(p, q)] = (v[p].adjoint() * s * &v[q])[(0, 0)] / Complex64::new(16.0, 0.0);
        }
    }
    hermitize(&chi)
}

/// Choi operator of the map given by χ.
pub fn chi_to_choi(chi: &CMat) -> CMat {
    superoperator_to_choi(&chi_to_superoperator(chi))
}

/// χ of the sequential map E₂ ∘ E₁ (second applied after first), via the
/// superoperator product and conversion back through the Choi form.
pub fn compose_chi(second: &ProcessMatrix, first: &ProcessMatrix) -> Result<ProcessMatrix> {
    let l = chi_to_superoperator(second.chi()) * chi_to_superoperator(first.chi());
    ProcessMatrix::new(choi_to_chi(&superoperator_to_choi(&l)))
}

/// `compose_chi` on raw χ matrices, skipping result validation.
pub fn compose_chi_raw(second: &CMat, first: &CMat) -> CMat {
    let l = chi_to_superoperator(second) * chi_to_superoperator(first);
    choi_to_chi(&superoperator_to_choi(&l))
}

/// Uhlmann fidelity of two maps through their Choi states (Choi operators
/// normalized to unit trace): F = (tr √(√S₁ S₂ √S₁))².
///
/// For a rank-1 (unitary-target) χ this coincides with tr(χ_id χ); for two
/// mixed maps it is the correct recovery measure, unlike the raw overlap.
pub fn choi_uhlmann_fidelity(chi_a: &CMat, chi_b: &CMat) -> f64 {
    let sa = chi_to_choi(chi_a) / Complex64::new(4.0, 0.0);
    let sb = chi_to_choi(chi_b) / Complex64::new(4.0, 0.0);
    let ra = sqrt_psd(&sa);
    let inner = &ra * sb * ra;
    let (vals, _) = herm_eigen(&inner);
    let total: f64 = vals.iter().map(|l| l.max(0.0).sqrt()).sum();
    total * total
}

// ---------------------------------------------------------------------------
// The ideal gate targets.
// ---------------------------------------------------------------------------

/// The CNOT realized by pulse sequence A, in the {|DD⟩,|DS⟩,|SD⟩,|SS⟩}
/// basis: it flips ion 1 (with phases) whenever ion 2 is in |D⟩, equal to
/// −½(II − ZI + IY + ZY).
pub fn cnot_a_unitary() -> CMat {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let neg1 = Complex64::new(-1.0, 0.0);
    CMat::from_row_slice(
        4,
        4,
        &[
            z, i, z, z, //
            -i, z, z, z, //
            z, z, neg1, z, //
            z, z, z, neg1,
        ],
    )
}

/// The CNOT realized by frame-corrected pulse sequence B: the identity on
/// the ion-2 |D⟩ block and a phase flip i·Y-like rotation on the |S⟩ block,
/// equal to ½(II + ZI − IY + ZY).
pub fn cnot_b_unitary() -> CMat {
    let i = Complex64::i();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    CMat::from_row_slice(
        4,
        4,
        &[
            one, z, z, z, //
            z, one, z, z, //
            z, z, z, i, //
            z, z, -i, z,
        ],
    )
}

/// Ideal 4×4 target for a gate variant applied `repetitions` times. Both
/// CNOTs are involutions, so two repetitions target the identity.
pub fn ideal_target_unitary(variant: crate::pulse::Variant, repetitions: u8) -> CMat {
    let single = match variant {
        crate::pulse::Variant::A => cnot_a_unitary(),
        crate::pulse::Variant::B => cnot_b_unitary(),
    };
    match repetitions {
        1 => single,
        2 => &single * &single,
        r => panic!("unsupported repetition count {r}"),
    }
}

// ---------------------------------------------------------------------------
// Serialization: {basis_order, re, im} JSON objects.
// ---------------------------------------------------------------------------

/// Serialized form of a 16×16 complex matrix in the Pauli-product basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiFile {
    pub basis_order: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ChiFile {
    pub fn from_matrix(chi: &CMat) -> Self {
        let re = (0..16)
            .map(|r| (0..16).map(|c| chi[(r, c)].re).collect())
            .collect();
        let im = (0..16)
            .map(|r| (0..16).map(|c| chi[(r, c)].im).collect())
            .collect();
        Self {
            basis_order: two_qubit_labels(),
            re,
            im,
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.basis_order != two_qubit_labels() {
            return Err(Error::Config(
                "chi file basis_order does not match the canonical II..ZZ ordering".into(),
            ));
        }
        if self.re.len() != 16 || self.im.len() != 16 {
            return Err(Error::Config("chi file must contain 16 rows".into()));
        }
        let mut m = CMat::zeros(16, 16);
        for r in 0..16 {
            if self.re[r].len() != 16 || self.im[r].len() != 16 {
                return Err(Error::Config(format!("chi file row {r} must have 16 columns")));
            }
            for c in 0..16 {
                m[(r, c)] = Complex64::new(self.re[r][c], self.im[r][c]);
            }
        }
        Ok(m)
    }
}

impl Serialize for ProcessMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ChiFile::from_matrix(&self.chi).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProcessMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = ChiFile::deserialize(deserializer)?;
        let m = file.to_matrix().map_err(D::Error::custom)?;
        ProcessMatrix::new(m).map_err(D::Error::custom)
    }
}

/// Generate a random CPTP map with `n_kraus` Kraus operators drawn from the
/// Ginibre ensemble and orthonormalized to satisfy Σ K†K = I. Used by tests
/// and Monte-Carlo validation.
pub fn random_cptp_chi(n_kraus: usize, rng: &mut impl rand::Rng) -> ProcessMatrix {
    use rand_distr::StandardNormal;
    let mut kraus: Vec<CMat> = (0..n_kraus.max(1))
        .map(|_| {
            CMat::from_fn(4, 4, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
        })
        .collect();
    // Normalize: S = Σ K†K, K ← K S^{-1/2}.
    let mut s = CMat::zeros(4, 4);
    for k in &kraus {
        s += k.adjoint() * k;
    }
    let (vals, vecs) = herm_eigen(&s);
    let mut inv_sqrt = CMat::zeros(4, 4);
    for (j, lam) in vals.iter().enumerate() {
        let col = vecs.column(j);
        let w = Complex64::new(1.0 / lam.max(1e-300).sqrt(), 0.0);
        inv_sqrt += (col * col.adjoint()) * w;
    }
    for k in &mut kraus {
        *k = &*k * &inv_sqrt;
    }
    let chi = kraus_to_chi(&kraus);
    ProcessMatrix::new(chi).expect("Kraus-built chi is CPTP by construction")
}

/// Max elementwise deviation between two χ matrices (diagnostic helper).
pub fn chi_distance(a: &CMat, b: &CMat) -> f64 {
    crate::linalg::max_abs_diff(a, b)
}

/// Largest |entry| of a χ matrix (used for chart scaling).
pub fn chi_max_abs(chi: &CMat) -> f64 {
    max_abs(chi)
}
