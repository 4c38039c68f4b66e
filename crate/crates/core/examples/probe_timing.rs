use ionsim_core::experiments::*;
use ionsim_core::metrics::process_fidelity;
use ionsim_core::process::{compose_chi, unitary_to_chi, ProcessMatrix};
use ionsim_core::pulse::{TrapParams, Variant};
use std::time::Instant;

fn main() {
    let trap = TrapParams::default();
    let cal = calibrate_detuning_sigma(&trap, 0.025).unwrap();
    println!(
        "calibration: sigma/2pi = {:.1} Hz  f_p = {:.4}",
        cal.detuning_sigma / (2.0 * std::f64::consts::PI),
        cal.f_p
    );
    let chi_single = ProcessMatrix::new(
        quadrature_chi(Variant::A, 1, &trap, 0.025, cal.detuning_sigma, QUADRATURE_NODES).unwrap(),
    )
    .unwrap();
    let chi_comp = compose_chi(&chi_single, &chi_single).unwrap();
    let target2 = unitary_to_chi(&ionsim_core::process::ideal_target_unitary(Variant::A, 2)).unwrap();
    println!("uncorrelated truth f_p = {:.4}", process_fidelity(&chi_comp, &target2));

    let noise = |corr: bool| NoiseSection {
        addressing_ratio: 0.025,
        detuning_sigma: cal.detuning_sigma,
        include_offresonant_carrier: false,
        correlate_across_gates: Some(corr),
    };
    let mut du = Vec::new();
    let mut dc = Vec::new();
    let mut vu = Vec::new();
    let mut vc = Vec::new();
    for seed in 201u64..=210 {
        let t0 = Instant::now();
        let cfg1 = ExperimentConfig {
            variant: Variant::A,
            repetitions: 1,
            shots: 250,
            seed,
            noise: noise(false),
            ensemble_n: 2000,
            ..ExperimentConfig::default()
        };
        let single = run_single_gate_tomography(&cfg1).unwrap();
        let pred = predict_concatenated_from_single(&single).unwrap();
        let mut cfg_u = cfg1.clone();
        cfg_u.repetitions = 2;
        let meas_u = run_concatenated_tomography(&cfg_u).unwrap();
        let mut cfg_c = cfg_u.clone();
        cfg_c.noise = noise(true);
        let meas_c = run_concatenated_tomography(&cfg_c).unwrap();
        let d_u = compare_reports(&meas_u, &pred);
        let d_c = compare_reports(&meas_c, &pred);
        let su = d_u.combined_sigma_f_p.unwrap();
        let sc = d_c.combined_sigma_f_p.unwrap();
        println!(
            "seed {seed}: {:>3.0} s  single = {:.4}  pred = {:.4}±{:.4}  \
             uncorr d = {:+.4} ({:+.2}σ)  corr d = {:+.4} ({:+.2}σ)",
            t0.elapsed().as_secs_f64(),
            single.metrics.f_p,
            pred.f_p,
            pred.errors.unwrap().f_p,
            d_u.delta_f_p,
            d_u.delta_f_p / su,
            d_c.delta_f_p,
            d_c.delta_f_p / sc,
        );
        du.push(d_u.delta_f_p);
        dc.push(d_c.delta_f_p);
        vu.push(su * su);
        vc.push(sc * sc);
    }
    let agg = |d: &[f64], v: &[f64]| {
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sigma = (v.iter().sum::<f64>()).sqrt() / n;
        (mean, sigma, mean / sigma)
    };
    let (mu, su, ru) = agg(&du, &vu);
    let (mc, sc, rc) = agg(&dc, &vc);
    println!("aggregate uncorr: mean d = {mu:+.4}  sigma = {su:.4}  ratio = {ru:+.2}");
    println!("aggregate corr:   mean d = {mc:+.4}  sigma = {sc:.4}  ratio = {rc:+.2}");
}
