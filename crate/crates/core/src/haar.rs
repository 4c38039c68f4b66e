//! Deterministic random-number plumbing and Haar-distributed sampling.
//!
//! Every stochastic stage of the pipeline derives its generator from the
//! run seed plus a `StreamPurpose` tag and an index, so results are
//! reproducible bit-for-bit regardless of evaluation order or thread
//! count: parallel loops assign stream indices up front and each work item
//! owns an independent generator.

use crate::linalg::{CMat, CVec};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent consumers of randomness within one seeded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    /// Per-shot gate noise draws (quasi-static detuning).
    GateNoise = 1,
    /// Multinomial measurement sampling per tomography setting.
    Measurement = 2,
    /// Haar input states for Monte-Carlo metric estimates.
    HaarStates = 3,
    /// Bootstrap resampling of tomography datasets.
    Bootstrap = 4,
    /// Synthetic channels and miscellaneous test draws.
    Synthetic = 5,
}

/// Generator for stream `(purpose, index)` of the run with the given seed.
pub fn substream_rng(seed: u64, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    debug_assert!(index < 1u64 << 48, "stream index exceeds reserved bits");
    rng.set_stream(((purpose as u64) << 48) | index);
    rng
}

/// Complex standard-normal draw (Ginibre entry).
pub fn complex_normal(rng: &mut impl rand::Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Haar-random pure state of the given dimension: a normalized vector of
/// i.i.d. complex Gaussians.
pub fn haar_random_pure_state(dim: usize, rng: &mut impl rand::Rng) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| complex_normal(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase
/// convention fixed so R has a positive real diagonal.
pub fn haar_random_unitary(dim: usize, rng: &mut impl rand::Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 1e-300 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        // Multiply column j by phase* so that Q·diag(phase) has R with
        // positive diagonal; this removes the QR gauge freedom.
        let scale = phase.conj();
        for i in 0..dim {
            q[(i, j)] *= scale;
        }
    }
    q
}
