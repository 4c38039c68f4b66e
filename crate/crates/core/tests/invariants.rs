//! Property-based invariants of the process-matrix algebra, state metrics,
//! and phase bookkeeping, driven by seeded Haar sampling.

use ionsim_core::haar::{haar_random_pure_state, haar_random_unitary, substream_rng, StreamPurpose};
use ionsim_core::linalg::{kron, max_abs_diff, CMat, CVec};
use ionsim_core::metrics::{concurrence, mean_fidelity_closed_form, process_fidelity};
use ionsim_core::process::{
    apply_chi, compose_chi, random_cptp_chi, unitary_to_chi, ProcessMatrix,
};
use ionsim_core::pulse::wrap_phase;
use ionsim_core::states::{fidelity_pure, DensityMatrix};
use num_complex::Complex64;
use proptest::prelude::*;

fn rng_for(seed: u64) -> impl rand::Rng {
    substream_rng(seed, StreamPurpose::Synthetic, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// The χ representation of a unitary acts exactly as conjugation.
    #[test]
    fn chi_of_a_unitary_acts_by_conjugation(seed in 0u64..1u64 << 48) {
        let mut rng = rng_for(seed);
        let u = haar_random_unitary(4, &mut rng);
        let chi = unitary_to_chi(&u).unwrap();
        let psi = haar_random_pure_state(4, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let via_chi = apply_chi(&chi, &rho).unwrap();
        let direct = &u * rho.data() * u.adjoint();
        prop_assert!(max_abs_diff(via_chi.data(), &direct) < 1e-12);
    }

    /// Composition of process matrices is the composition of the maps.
    #[test]
    fn chi_composition_matches_sequential_application(seed in 0u64..1u64 << 48) {
        let mut rng = rng_for(seed);
        let first = random_cptp_chi(2, &mut rng);
        let second = random_cptp_chi(2, &mut rng);
        let composed = compose_chi(&second, &first).unwrap();
        let psi = haar_random_pure_state(4, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let sequential = apply_chi(&second, &apply_chi(&first, &rho).unwrap()).unwrap();
        let direct = apply_chi(&composed, &rho).unwrap();
        prop_assert!(max_abs_diff(sequential.data(), direct.data()) < 1e-10);
    }

    /// CPTP maps preserve trace and positivity on every input.
    #[test]
    fn cptp_maps_produce_physical_states(seed in 0u64..1u64 << 48) {
        let mut rng = rng_for(seed);
        let chi = random_cptp_chi(4, &mut rng);
        let psi = haar_random_pure_state(4, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        // The DensityMatrix constructor enforces trace 1, Hermiticity and
        // positivity; apply_chi returning Ok is the property.
        let out = apply_chi(&chi, &rho).unwrap();
        prop_assert!((out.data().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.purity() <= 1.0 + 1e-10);
    }

    /// Concurrence is invariant under local unitaries.
    #[test]
    fn concurrence_is_locally_invariant(seed in 0u64..1u64 << 48) {
        let mut rng = rng_for(seed);
        let psi = haar_random_pure_state(4, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let u1 = haar_random_unitary(2, &mut rng);
        let u2 = haar_random_unitary(2, &mut rng);
        let local = kron(&u2, &u1);
        let rotated = DensityMatrix::new(&local * rho.data() * local.adjoint()).unwrap();
        prop_assert!((concurrence(&rho) - concurrence(&rotated)).abs() < 1e-9);
    }

    /// Process fidelity against a unitary target lives in [0, 1] and the
    /// closed-form mean fidelity maps its endpoints correctly.
    #[test]
    fn process_fidelity_is_bounded(seed in 0u64..1u64 << 48) {
        let mut rng = rng_for(seed);
        let chi = random_cptp_chi(3, &mut rng);
        let target = unitary_to_chi(&haar_random_unitary(4, &mut rng)).unwrap();
        let f = process_fidelity(&chi, &target);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        let fm = mean_fidelity_closed_form(f);
        prop_assert!(fm >= f - 1e-12, "mean fidelity dominates process fidelity on [0,1]");
    }

    /// Phase wrapping stays in [0, 2π) and never changes the physics.
    #[test]
    fn wrapped_phases_are_canonical(phi in -50.0f64..50.0) {
        let w = wrap_phase(phi);
        prop_assert!((0.0..2.0 * std::f64::consts::PI).contains(&w));
        let z_orig = Complex64::from_polar(1.0, phi);
        let z_wrap = Complex64::from_polar(1.0, w);
        prop_assert!((z_orig - z_wrap).norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Statistical mixtures of product states are separable: C = 0.
    #[test]
    fn separable_mixtures_have_zero_concurrence(seed in 0u64..1u64 << 48, k in 2usize..6) {
        let mut rng = rng_for(seed);
        let mut rho = CMat::zeros(4, 4);
        let mut weights = Vec::new();
        for _ in 0..k {
            weights.push(rand::Rng::gen_range(&mut rng, 0.05..1.0));
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        for w in weights {
            let a = haar_random_pure_state(2, &mut rng);
            let b = haar_random_pure_state(2, &mut rng);
            let mut prod = CVec::zeros(4);
            for i in 0..2 {
                for j in 0..2 {
                    prod[i * 2 + j] = a[i] * b[j];
                }
            }
            let pure = DensityMatrix::from_pure(&prod).unwrap();
            rho += pure.data() * Complex64::new(w, 0.0);
        }
        let mixed = DensityMatrix::new(rho).unwrap();
        prop_assert!(concurrence(&mixed) < 1e-9);
    }

    /// Pure-state fidelity of a state with itself is 1 and is symmetric
    /// under global phase.
    #[test]
    fn pure_fidelity_is_phase_blind(seed in 0u64..1u64 << 48, phase in 0.0f64..6.28) {
        let mut rng = rng_for(seed);
        let psi = haar_random_pure_state(4, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let rotated = &psi * Complex64::from_polar(1.0, phase);
        prop_assert!((fidelity_pure(&rotated, &rho) - 1.0).abs() < 1e-12);
    }
}
