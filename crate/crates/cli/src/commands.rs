//! The four subcommand implementations.

use crate::args::{AnalyzeArgs, CompareArgs, RunArgs, TargetArg};
use crate::manifest::ArtifactWriter;
use crate::svg::{chi_bar_chart, Component};
use crate::vlog;
use ionsim_core::error::{Error, Result};
use ionsim_core::evolve::Evolver;
use ionsim_core::experiments::{
    compare_reports, format_sig, predict_concatenated_from_single, run_concatenated_tomography,
    run_single_gate_tomography, ExperimentConfig, GateChannel, GateReport, NoiseSection,
};
use ionsim_core::inversion::linear_inversion;
use ionsim_core::linalg::CMat;
use ionsim_core::metrics::{metric_report, MetricReport};
use ionsim_core::process::{ideal_target_unitary, ChiFile, ProcessMatrix};
use ionsim_core::pulse::build_sequence;
use ionsim_core::states::DensityMatrix;
use ionsim_core::tomography::{tomography_input_states, InputStateSet};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parse a typed JSON artifact, prefixing errors with the file name.
/// serde reports unknown or missing keys by name with line/column.
fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{} is not a valid {what}: {e}", path.display())))
}

/// Load the experiment config (file or defaults) and fold in the flag
/// overrides.
fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => parse_json::<ExperimentConfig>(path, "experiment config")?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(shots) = args.shots {
        cfg.shots = shots;
    }
    if args.exact {
        cfg.exact_probabilities = true;
    }
    if let Some(sequence) = args.sequence {
        cfg.variant = sequence.into();
    }
    if let Some(repetitions) = args.repetitions {
        cfg.repetitions = repetitions;
    }
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// One output density matrix, 4×4 over {DD, DS, SD, SS}.
#[derive(Debug, Serialize, Deserialize)]
struct DensityRecord {
    /// Input preparation (i, j): ψ_i on ion 2, ψ_j on ion 1, 1-indexed.
    input: [u8; 2],
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Channel outputs for the full 16-state tomography input set.
#[derive(Debug, Serialize, Deserialize)]
struct DensitySet {
    label: String,
    variant: String,
    repetitions: u8,
    states: Vec<DensityRecord>,
}

fn density_record(input: [u8; 2], rho: &DensityMatrix) -> DensityRecord {
    let d = rho.data();
    let n = rho.dim();
    DensityRecord {
        input,
        re: (0..n).map(|r| (0..n).map(|c| d[(r, c)].re).collect()).collect(),
        im: (0..n).map(|r| (0..n).map(|c| d[(r, c)].im).collect()).collect(),
    }
}

pub fn cmd_simulate(args: &RunArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    vlog(&format!(
        "simulate: sequence {} ×{}, seed {}",
        cfg.variant, cfg.repetitions, cfg.seed
    ));
    let mut writer = ArtifactWriter::new(&args.out, "simulate", args.config.as_deref(), cfg.seed)?;

    let evolver = Evolver::new(cfg.trap)?;
    let base = build_sequence(cfg.variant).with_shape(cfg.pulse_shape);
    let mut ideal = GateChannel::new(
        &evolver,
        &base,
        cfg.repetitions,
        NoiseSection::none().resolve(cfg.repetitions)?,
        1,
        cfg.seed,
    )?;
    let mut noisy = GateChannel::new(
        &evolver,
        &base,
        cfg.repetitions,
        cfg.resolved_noise()?,
        cfg.shots,
        cfg.seed,
    )?;

    let inputs = tomography_input_states();
    let mut ideal_states = Vec::with_capacity(16);
    let mut noisy_states = Vec::with_capacity(16);
    for (idx, psi) in inputs.states().iter().enumerate() {
        let rho_in = DensityMatrix::from_pure(psi)?;
        let (i, j) = InputStateSet::pair(idx);
        ideal_states.push(density_record([i, j], &ideal.apply_next(&rho_in)?));
        noisy_states.push(density_record([i, j], &noisy.apply_next(&rho_in)?));
    }
    let label = |kind: &str| {
        format!(
            "{kind} outputs of sequence {} ×{} on the 16 tomography inputs",
            cfg.variant, cfg.repetitions
        )
    };
    writer.write_json(
        "densities_ideal.json",
        &DensitySet {
            label: label("noise-free"),
            variant: cfg.variant.to_string(),
            repetitions: cfg.repetitions,
            states: ideal_states,
        },
    )?;
    writer.write_json(
        "densities_noisy.json",
        &DensitySet {
            label: label("noise-model"),
            variant: cfg.variant.to_string(),
            repetitions: cfg.repetitions,
            states: noisy_states,
        },
    )?;
    writer.write_json("config_resolved.json", &cfg)?;
    writer.finish()?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// tomography
// ---------------------------------------------------------------------------

pub fn cmd_tomography(args: &RunArgs) -> Result<i32> {
    let cfg = load_config(args)?;
    vlog(&format!(
        "tomography: sequence {} ×{}, {} , seed {}",
        cfg.variant,
        cfg.repetitions,
        if cfg.exact_probabilities {
            "exact probabilities".to_string()
        } else {
            format!("{} shots", cfg.shots)
        },
        cfg.seed
    ));
    let mut writer =
        ArtifactWriter::new(&args.out, "tomography", args.config.as_deref(), cfg.seed)?;

    let report = match cfg.repetitions {
        1 => run_single_gate_tomography(&cfg)?,
        _ => run_concatenated_tomography(&cfg)?,
    };
    vlog(&format!(
        "reconstruction: {} iterations, converged = {}, F_p = {:.6}",
        report.mle_iterations, report.mle_converged, report.metrics.f_p
    ));

    let linear = linear_inversion(&report.dataset)?;
    writer.write_json("gate_report.json", &report)?;
    writer.write_json("dataset.json", &report.dataset)?;
    writer.write_json("chi_mle.json", &report.chi)?;
    writer.write_json("chi_linear.json", &ChiFile::from_matrix(&linear))?;
    let csv = format!("{}\n{}\n", GateReport::table_header(), report.table_row());
    writer.write_bytes("metrics.csv", csv.as_bytes())?;
    writer.finish()?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if !report.mle_converged {
        eprintln!(
            "error: non-convergence: likelihood fit stopped at the iteration cap \
             ({} iterations); artifacts were written",
            report.mle_iterations
        );
        return Ok(4);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn target_unitary(target: TargetArg) -> CMat {
    use ionsim_core::pulse::Variant;
    match target {
        TargetArg::A => ideal_target_unitary(Variant::A, 1),
        TargetArg::B => ideal_target_unitary(Variant::B, 1),
        TargetArg::Aa => ideal_target_unitary(Variant::A, 2),
        TargetArg::Bb => ideal_target_unitary(Variant::B, 2),
        TargetArg::Identity => CMat::identity(4, 4),
    }
}

fn target_name(target: TargetArg) -> &'static str {
    match target {
        TargetArg::A => "target: sequence A",
        TargetArg::B => "target: sequence B",
        TargetArg::Aa => "target: sequence A ×2",
        TargetArg::Bb => "target: sequence B ×2",
        TargetArg::Identity => "target: identity",
    }
}

fn metrics_csv(metrics: &MetricReport) -> String {
    let err = |f: fn(&ionsim_core::metrics::MetricErrors) -> f64| match &metrics.errors {
        Some(e) => format_sig(f(e), 6),
        None => String::new(),
    };
    format!(
        "f_p,f_p_err,f_mean,f_mean_err,f_mean_closed_form,s_lin_mean,s_lin_err,\
         max_delta_c,n_samples\n{},{},{},{},{},{},{},{},{}\n",
        format_sig(metrics.f_p, 6),
        err(|e| e.f_p),
        format_sig(metrics.f_mean, 6),
        err(|e| e.f_mean),
        format_sig(metrics.f_mean_closed_form, 6),
        format_sig(metrics.s_lin_mean, 6),
        err(|e| e.s_lin_mean),
        format_sig(metrics.max_delta_c, 6),
        metrics.n_samples,
    )
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32> {
    let chi: ProcessMatrix = parse_json(&args.chi, "process matrix")?;
    let target = target_unitary(args.target);
    vlog(&format!(
        "analyze: {} ({}), ensemble {}",
        args.chi.display(),
        target_name(args.target),
        args.ensemble
    ));
    let mut writer = ArtifactWriter::new(&args.out, "analyze", Some(&args.chi), args.seed)?;

    let metrics = metric_report(&chi, &target, args.ensemble, args.seed)?;
    writer.write_json("metrics.json", &metrics)?;
    writer.write_bytes("metrics.csv", metrics_csv(&metrics).as_bytes())?;
    let subtitle = target_name(args.target);
    for (name, component) in [
        ("chi_abs.svg", Component::Abs),
        ("chi_re.svg", Component::Re),
        ("chi_im.svg", Component::Im),
    ] {
        writer.write_bytes(name, chi_bar_chart(chi.chi(), component, subtitle).as_bytes())?;
    }
    writer.finish()?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    let single: GateReport = parse_json(&args.single, "gate report")?;
    let concat: GateReport = parse_json(&args.concat, "gate report")?;
    if single.config.repetitions != 1 {
        return Err(Error::Invalid(format!(
            "{} must be a single-gate report (repetitions = 1), got {}",
            args.single.display(),
            single.config.repetitions
        )));
    }
    if concat.config.repetitions != 2 {
        return Err(Error::Invalid(format!(
            "{} must be a double-gate report (repetitions = 2), got {}",
            args.concat.display(),
            concat.config.repetitions
        )));
    }
    if single.config.variant != concat.config.variant {
        return Err(Error::Invalid(format!(
            "reports use different sequences ({} vs {})",
            single.config.variant, concat.config.variant
        )));
    }
    vlog(&format!(
        "compare: sequence {}, measured ×2 vs composed prediction",
        concat.config.variant
    ));

    let predicted = predict_concatenated_from_single(&single)?;
    let discrepancy = compare_reports(&concat, &predicted);
    let mut writer = ArtifactWriter::new(&args.out, "compare", None, concat.config.seed)?;
    writer.write_json("predicted_metrics.json", &predicted)?;
    writer.write_json("measured_metrics.json", &concat.metrics)?;
    writer.write_json("discrepancy.json", &discrepancy)?;
    writer.finish()?;
    Ok(0)
}
