//! Experiment drivers: single-gate tomography, concatenated double-gate
//! tomography vs. the composed single-gate prediction, and the
//! shaped-vs-square pulse study.
//!
//! Everything here is glue over the physics and statistics modules, plus
//! two pieces of machinery of its own:
//!
//! * **Noise calibration** — the detuning spread σ is not a measured
//!   quantity; it is scanned on a coarse grid until the variant-A
//!   single-gate process fidelity lands in the 0.88–0.90 band, then
//!   frozen for all comparative studies. The scan is driven by a
//!   Gauss–Hermite quadrature over the detuning distribution, which gives
//!   the shot-averaged process matrix without sampling noise.
//! * **Parametric bootstrap** — error bars on the reported metrics come
//!   from refitting resampled datasets drawn from the reconstructed
//!   process itself.

use crate::error::{Error, Result};
use crate::evolve::{Evolver, RunDiagnostics};
use crate::haar::{substream_rng, StreamPurpose};
use crate::linalg::CMat;
use crate::metrics::{
    haar_ensemble_metrics, mean_fidelity_closed_form, metric_report, process_fidelity,
    MetricErrors, MetricReport,
};
use crate::mle::{mle_reconstruct, MleOptions};
use crate::process::{
    apply_chi, compose_chi, ideal_target_unitary, kraus_to_chi, unitary_to_chi, ProcessMatrix,
};
use crate::pulse::{build_sequence, NoiseModel, PulseSequence, PulseShape, TrapParams, Variant};
use crate::states::{DensityMatrix, SystemState};
use crate::tomography::{
    exact_probabilities, protocol_probabilities, sample_dataset_from_probabilities,
    simulate_dataset, TomographyDataset,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Number of parametric bootstrap refits behind every error bar.
pub const BOOTSTRAP_REPLICAS: usize = 50;
/// Haar-ensemble size used inside bootstrap replicas (the headline
/// metrics use the configured `ensemble_n`; replicas only need enough
/// samples to resolve the replica-to-replica spread).
pub const BOOTSTRAP_ENSEMBLE_N: usize = 2000;
/// Reference total durations of one gate at the default trap parameters.
pub const EXPECTED_DURATION_A: f64 = 615e-6;
pub const EXPECTED_DURATION_B: f64 = 502e-6;
/// Relative tolerance on the duration references (the carrier share
/// depends on the η-derived carrier Rabi frequency).
pub const DURATION_TOLERANCE: f64 = 0.20;
/// Calibration target band for the variant-A single-gate process
/// fidelity.
pub const CALIBRATION_BAND: (f64, f64) = (0.88, 0.90);
/// Gauss–Hermite node count for detuning averages.
pub const QUADRATURE_NODES: usize = 33;

/// Noise block of an experiment config. Field-for-field identical to
/// [`NoiseModel`] except that `correlate_across_gates` is optional:
/// two-gate runs must state it explicitly because the whole
/// concatenation study hinges on that switch, while single-gate runs may
/// omit it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub addressing_ratio: f64,
    pub detuning_sigma: f64,
    pub include_offresonant_carrier: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlate_across_gates: Option<bool>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let base = NoiseModel::default();
        Self {
            addressing_ratio: base.addressing_ratio,
            detuning_sigma: base.detuning_sigma,
            include_offresonant_carrier: base.include_offresonant_carrier,
            correlate_across_gates: None,
        }
    }
}

impl From<NoiseModel> for NoiseSection {
    fn from(model: NoiseModel) -> Self {
        Self {
            addressing_ratio: model.addressing_ratio,
            detuning_sigma: model.detuning_sigma,
            include_offresonant_carrier: model.include_offresonant_carrier,
            correlate_across_gates: Some(model.correlate_across_gates),
        }
    }
}

impl NoiseSection {
    /// All noise sources off.
    pub fn none() -> Self {
        Self {
            addressing_ratio: 0.0,
            detuning_sigma: 0.0,
            include_offresonant_carrier: false,
            correlate_across_gates: Some(false),
        }
    }

    /// Concrete noise model for a run of `repetitions` gates.
    pub fn resolve(&self, repetitions: u8) -> Result<NoiseModel> {
        if repetitions == 2 && self.correlate_across_gates.is_none() {
            return Err(Error::Config(
                "two-gate runs must set noise.correlate_across_gates explicitly; \
                 the concatenated-vs-composed comparison hinges on it"
                    .into(),
            ));
        }
        let model = NoiseModel {
            addressing_ratio: self.addressing_ratio,
            detuning_sigma: self.detuning_sigma,
            include_offresonant_carrier: self.include_offresonant_carrier,
            correlate_across_gates: self.correlate_across_gates.unwrap_or(false),
        };
        model.validate()?;
        Ok(model)
    }
}

fn default_repetitions() -> u8 {
    1
}
fn default_shots() -> u64 {
    250
}
fn default_seed() -> u64 {
    1
}
fn default_ensemble_n() -> usize {
    50_000
}

/// Full description of one tomography experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Gate variant to execute.
    pub variant: Variant,
    /// Consecutive executions of the gate (1 or 2).
    pub repetitions: u8,
    pub trap: TrapParams,
    pub noise: NoiseSection,
    /// Envelope applied to every pulse. Must be square or ramped when the
    /// off-resonant carrier term is enabled (that term is meaningless for
    /// instantaneous pulses); irrelevant to the dynamics otherwise.
    pub pulse_shape: PulseShape,
    /// Measurement repetitions per (input, setting) record.
    pub shots: u64,
    /// Record exact outcome probabilities instead of sampled counts.
    pub exact_probabilities: bool,
    /// Root seed; all randomness in the run derives from it.
    pub seed: u64,
    pub mle: MleOptions,
    /// Haar-ensemble size for the Monte-Carlo metrics.
    pub ensemble_n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            variant: Variant::A,
            repetitions: default_repetitions(),
            trap: TrapParams::default(),
            noise: NoiseSection::default(),
            pulse_shape: PulseShape::Instantaneous,
            shots: default_shots(),
            exact_probabilities: false,
            seed: default_seed(),
            mle: MleOptions::default(),
            ensemble_n: default_ensemble_n(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.repetitions == 1 || self.repetitions == 2) {
            return Err(Error::Config(format!(
                "repetitions must be 1 or 2, got {}",
                self.repetitions
            )));
        }
        self.trap.validate()?;
        self.noise.resolve(self.repetitions)?;
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.ensemble_n == 0 {
            return Err(Error::Config("ensemble_n must be at least 1".into()));
        }
        self.mle.validate()?;
        if self.noise.include_offresonant_carrier && self.pulse_shape == PulseShape::Instantaneous
        {
            return Err(Error::Config(
                "include_offresonant_carrier needs finite-duration pulses; \
                 set pulse_shape to \"square\" or \"ramped\""
                    .into(),
            ));
        }
        Ok(())
    }

    /// The concrete noise model this config resolves to.
    pub fn resolved_noise(&self) -> Result<NoiseModel> {
        self.noise.resolve(self.repetitions)
    }
}

/// Bootstrap replica means of the self-composed metrics. Composing a
/// finite-shot reconstruction with itself is nonlinear, so the plug-in
/// estimate of the double-gate metrics sits an O(σ²) offset below the
/// true composition; the replica mean measures that offset and lets the
/// prediction subtract it (θ_corrected = 2θ̂ − mean of replica θ̂_b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComposedReplicaMeans {
    pub f_p: f64,
    pub s_lin_mean: f64,
}

/// Everything one tomography run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// The configuration that produced this report.
    pub config: ExperimentConfig,
    /// Total nominal pulse time of the executed program, seconds.
    pub t_gate: f64,
    /// The synthesized measurement record the reconstruction consumed.
    pub dataset: TomographyDataset,
    /// Maximum-likelihood process matrix.
    pub chi: ProcessMatrix,
    pub metrics: MetricReport,
    /// Bootstrap spread of the metrics of the self-composed process;
    /// present on sampled single-gate reports so the composed prediction
    /// can carry error bars.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composed_errors: Option<MetricErrors>,
    /// Replica means over the same self-composed bootstrap fits, consumed
    /// by the composed prediction's bias correction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composed_replica_means: Option<ComposedReplicaMeans>,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    pub diagnostics: RunDiagnostics,
    pub warnings: Vec<String>,
}

impl GateReport {
    /// The II,II element of the reconstructed process — the headline
    /// number of a double-gate run, where the target is the identity.
    pub fn chi_identity_element(&self) -> f64 {
        self.chi.chi()[(0, 0)].re
    }

    /// CSV header matching [`GateReport::table_row`].
    pub fn table_header() -> &'static str {
        "variant,repetitions,pulse_shape,shots,f_p,f_p_err,f_mean,f_mean_err,\
         f_mean_closed_form,s_lin_mean,s_lin_err,max_delta_c,chi_00,t_gate_us"
    }

    /// One summary-table row (see [`GateReport::table_header`]).
    pub fn table_row(&self) -> String {
        let e = self.metrics.errors;
        let err = |f: fn(&MetricErrors) -> f64| match &e {
            Some(e) => format_sig(f(e), 6),
            None => String::new(),
        };
        format!(
            "{},{},{:?},{},{},{},{},{},{},{},{},{},{},{}",
            self.config.variant,
            self.config.repetitions,
            self.config.pulse_shape,
            if self.config.exact_probabilities {
                "exact".to_string()
            } else {
                self.config.shots.to_string()
            },
            format_sig(self.metrics.f_p, 6),
            err(|e| e.f_p),
            format_sig(self.metrics.f_mean, 6),
            err(|e| e.f_mean),
            format_sig(self.metrics.f_mean_closed_form, 6),
            format_sig(self.metrics.s_lin_mean, 6),
            err(|e| e.s_lin_mean),
            format_sig(self.metrics.max_delta_c, 6),
            format_sig(self.chi_identity_element(), 6),
            format_sig(self.t_gate * 1e6, 6),
        )
    }
}

/// Format with a fixed number of significant digits, '.' separator.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// The simulated gate program as a channel over two-qubit inputs.
///
/// Consecutive calls consume per-input noise substreams in order, so the
/// 16 tomography preparations see independent, reproducible detuning
/// draws. The frame correction for the executed repetition count is
/// folded into every output. When σ = 0 the propagators are
/// input-independent and computed once.
pub struct GateChannel<'a> {
    evolver: &'a Evolver,
    seqs: Vec<PulseSequence>,
    correction: CMat,
    noise: NoiseModel,
    shots: usize,
    seed: u64,
    fixed_props: Option<Vec<CMat>>,
    next_input: u64,
    diagnostics: RunDiagnostics,
}

impl<'a> GateChannel<'a> {
    pub fn new(
        evolver: &'a Evolver,
        base: &PulseSequence,
        repetitions: u8,
        noise: NoiseModel,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        noise.validate()?;
        if shots == 0 {
            return Err(Error::Invalid("shots must be at least 1".into()));
        }
        let seqs = base.concatenated(repetitions);
        let correction = base.frame_correction(u32::from(repetitions));
        let fixed_props = if noise.detuning_sigma == 0.0 {
            let mut rng = substream_rng(seed, StreamPurpose::GateNoise, 0);
            let detunings = Evolver::shot_detunings(&noise, &mut rng, 1, seqs.len());
            Some(evolver.shot_propagators(&seqs, &noise, &detunings)?)
        } else {
            None
        };
        Ok(Self {
            evolver,
            seqs,
            correction,
            noise,
            shots: shots as usize,
            seed,
            fixed_props,
            next_input: 0,
            diagnostics: RunDiagnostics::default(),
        })
    }

    /// Channel action on the next tomography input.
    pub fn apply_next(&mut self, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
        let index = self.next_input;
        self.next_input += 1;
        let (rho, diag) = match &self.fixed_props {
            Some(props) => self.evolver.channel_with_propagators(props, rho_in)?,
            None => {
                let mut rng = substream_rng(self.seed, StreamPurpose::GateNoise, index);
                let detunings =
                    Evolver::shot_detunings(&self.noise, &mut rng, self.shots, self.seqs.len());
                let props = self
                    .evolver
                    .shot_propagators(&self.seqs, &self.noise, &detunings)?;
                self.evolver.channel_with_propagators(&props, rho_in)?
            }
        };
        self.diagnostics.absorb(&diag);
        DensityMatrix::new(&self.correction * rho.data() * self.correction.adjoint())
    }

    pub fn diagnostics(&self) -> RunDiagnostics {
        self.diagnostics
    }

    /// Total nominal pulse time of the program, seconds.
    pub fn t_gate(&self, params: &TrapParams) -> f64 {
        self.seqs.iter().map(|s| s.duration(params)).sum()
    }
}

/// Shared tomography pipeline: synthesize the dataset, reconstruct, and
/// attach metrics with bootstrap error bars.
fn run_tomography(cfg: &ExperimentConfig) -> Result<GateReport> {
    cfg.validate()?;
    let noise = cfg.resolved_noise()?;
    let evolver = Evolver::new(cfg.trap)?;
    let base = build_sequence(cfg.variant).with_shape(cfg.pulse_shape);
    let mut channel = GateChannel::new(&evolver, &base, cfg.repetitions, noise, cfg.shots, cfg.seed)?;
    let t_gate = channel.t_gate(&cfg.trap);

    let mut dataset = if cfg.exact_probabilities {
        exact_probabilities(|rho| channel.apply_next(rho))?
    } else {
        let mut rng = substream_rng(cfg.seed, StreamPurpose::Measurement, 0);
        let mut ds = simulate_dataset(|rho| channel.apply_next(rho), cfg.shots, &mut rng)?;
        ds.seed = Some(cfg.seed);
        ds
    };
    dataset.noise = Some(noise);
    dataset.label = Some(format!(
        "sequence {} ×{}, {:?} pulses",
        cfg.variant, cfg.repetitions, cfg.pulse_shape
    ));

    let fit = mle_reconstruct(&dataset, &cfg.mle)?;
    let target = ideal_target_unitary(cfg.variant, cfg.repetitions);
    let mut metrics = metric_report(&fit.chi, &target, cfg.ensemble_n, cfg.seed)?;

    let mut composed_errors = None;
    let mut composed_replica_means = None;
    if !cfg.exact_probabilities {
        let (errors, composed) = bootstrap_errors(&fit.chi, &target, cfg)?;
        metrics.errors = Some(errors);
        if let Some((spread, means)) = composed {
            composed_errors = Some(spread);
            composed_replica_means = Some(means);
        }
    }

    let diagnostics = channel.diagnostics();
    let mut warnings = fit.warnings.clone();
    if diagnostics.cutoff_flagged() {
        warnings.push(format!(
            "population {:.3e} reached the highest retained Fock level; \
             results may depend on the n_max cutoff",
            diagnostics.max_top_level_population
        ));
    }

    Ok(GateReport {
        config: cfg.clone(),
        t_gate,
        dataset,
        chi: fit.chi,
        metrics,
        composed_errors,
        composed_replica_means,
        mle_iterations: fit.iterations,
        mle_converged: fit.converged,
        diagnostics,
        warnings,
    })
}

/// Full tomography of a single gate execution.
pub fn run_single_gate_tomography(cfg: &ExperimentConfig) -> Result<GateReport> {
    if cfg.repetitions != 1 {
        return Err(Error::Invalid(format!(
            "single-gate tomography needs repetitions = 1, got {}",
            cfg.repetitions
        )));
    }
    run_tomography(cfg)
}

/// Full tomography of two back-to-back gate executions; the ideal target
/// is the identity.
pub fn run_concatenated_tomography(cfg: &ExperimentConfig) -> Result<GateReport> {
    if cfg.repetitions != 2 {
        return Err(Error::Invalid(format!(
            "concatenated tomography needs repetitions = 2, got {}",
            cfg.repetitions
        )));
    }
    run_tomography(cfg)
}

/// Metrics of the double gate predicted by composing the single-gate
/// reconstruction with itself, evaluated against the identity target.
/// Error bars come from the single report's composed-replica spread.
///
/// On sampled reports the fidelity and entropy predictions are bootstrap
/// bias-corrected (θ_bc = 2θ̂ − replica mean): self-composition is
/// quadratic in the reconstruction, so the raw plug-in values sit a
/// systematic O(σ²) offset away from the composition of the true
/// channel, and the replicas — refits of resampled counts composed the
/// same way — measure exactly that offset. The concurrence extreme is
/// left as the plug-in value; replica means of a maximum estimate its
/// spread, not a removable offset.
pub fn predict_concatenated_from_single(single: &GateReport) -> Result<MetricReport> {
    if single.config.repetitions != 1 {
        return Err(Error::Invalid(
            "the composed prediction needs a repetitions = 1 report".into(),
        ));
    }
    let composed = compose_chi(&single.chi, &single.chi)?;
    let target = ideal_target_unitary(single.config.variant, 2);
    let mut report = metric_report(&composed, &target, single.config.ensemble_n, single.config.seed)?;
    if let Some(means) = single.composed_replica_means {
        let f_p_shift = report.f_p - means.f_p;
        report.f_p += f_p_shift;
        // F_mean is affine in F_p, so it shifts by 4/5 of the same amount.
        report.f_mean += 0.8 * f_p_shift;
        report.f_mean_closed_form = mean_fidelity_closed_form(report.f_p);
        report.s_lin_mean += report.s_lin_mean - means.s_lin_mean;
    }
    report.errors = single.composed_errors;
    Ok(report)
}

/// Two full tomography runs differing only in pulse shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapedVsSquareStudy {
    pub shaped: GateReport,
    pub square: GateReport,
    /// shaped F_p − square F_p.
    pub delta_f_p: f64,
}

/// Compare ramped against square pulses under the off-resonant carrier
/// term; everything else in the config is shared.
pub fn shaped_vs_square_study(cfg: &ExperimentConfig) -> Result<ShapedVsSquareStudy> {
    if !cfg.noise.include_offresonant_carrier {
        return Err(Error::Config(
            "the pulse-shape study compares envelopes under the off-resonant \
             carrier term; set noise.include_offresonant_carrier = true"
                .into(),
        ));
    }
    if cfg.repetitions != 1 {
        return Err(Error::Invalid(
            "the pulse-shape study runs single gates (repetitions = 1)".into(),
        ));
    }
    let shaped_cfg = ExperimentConfig {
        pulse_shape: PulseShape::Ramped,
        ..cfg.clone()
    };
    let square_cfg = ExperimentConfig {
        pulse_shape: PulseShape::Square,
        ..cfg.clone()
    };
    let shaped = run_single_gate_tomography(&shaped_cfg)?;
    let square = run_single_gate_tomography(&square_cfg)?;
    let delta_f_p = shaped.metrics.f_p - square.metrics.f_p;
    Ok(ShapedVsSquareStudy {
        shaped,
        square,
        delta_f_p,
    })
}

/// Differences between a measured double-gate run and the prediction
/// composed from a single-gate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// measured F_p − predicted F_p.
    pub delta_f_p: f64,
    pub delta_f_mean: f64,
    pub delta_s_lin_mean: f64,
    /// √(σ_measured² + σ_predicted²) on F_p; absent without error bars.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_sigma_f_p: Option<f64>,
    /// Whether |ΔF_p| exceeds the combined error bar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceeds_error_bars: Option<bool>,
}

/// Compare a concatenated-run report against the composed prediction.
pub fn compare_reports(concat: &GateReport, predicted: &MetricReport) -> Discrepancy {
    let measured = &concat.metrics;
    let delta_f_p = measured.f_p - predicted.f_p;
    let combined_sigma_f_p = match (&measured.errors, &predicted.errors) {
        (Some(a), Some(b)) => Some((a.f_p.powi(2) + b.f_p.powi(2)).sqrt()),
        _ => None,
    };
    Discrepancy {
        delta_f_p,
        delta_f_mean: measured.f_mean - predicted.f_mean,
        delta_s_lin_mean: measured.s_lin_mean - predicted.s_lin_mean,
        combined_sigma_f_p,
        exceeds_error_bars: combined_sigma_f_p.map(|s| delta_f_p.abs() > s),
    }
}

/// Parametric bootstrap: resample counts from the reconstructed process,
/// refit, and report the replica spread of every metric. For single-gate
/// runs the spread and mean of the self-composed replicas are returned
/// as well.
fn bootstrap_errors(
    chi_hat: &ProcessMatrix,
    target: &CMat,
    cfg: &ExperimentConfig,
) -> Result<(MetricErrors, Option<(MetricErrors, ComposedReplicaMeans)>)> {
    let probs = protocol_probabilities(|rho| apply_chi(chi_hat, rho))?;
    let chi_target = unitary_to_chi(target)?;
    let want_composed = cfg.repetitions == 1;
    let composed_target = unitary_to_chi(&ideal_target_unitary(cfg.variant, 2))?;
    let identity = CMat::identity(4, 4);

    struct Replica {
        f_p: f64,
        s_lin: f64,
        max_dc: f64,
        composed: Option<(f64, f64, f64)>,
    }

    let replicas: Vec<Replica> = (0..BOOTSTRAP_REPLICAS)
        .into_par_iter()
        .map(|r| -> Result<Replica> {
            let mut rng = substream_rng(cfg.seed, StreamPurpose::Bootstrap, r as u64);
            let ds = sample_dataset_from_probabilities(&probs, cfg.shots, &mut rng)?;
            let fit = mle_reconstruct(&ds, &cfg.mle)?;
            let f_p = process_fidelity(&fit.chi, &chi_target);
            // The ensemble target is irrelevant for s_lin and ΔC; the
            // shared seed makes the Haar states common across replicas,
            // so their spread reflects the refit alone.
            let sampled =
                haar_ensemble_metrics(&fit.chi, &identity, BOOTSTRAP_ENSEMBLE_N, cfg.seed)?;
            let composed = if want_composed {
                let cc = compose_chi(&fit.chi, &fit.chi)?;
                let cf_p = process_fidelity(&cc, &composed_target);
                let cs = haar_ensemble_metrics(&cc, &identity, BOOTSTRAP_ENSEMBLE_N, cfg.seed)?;
                Some((cf_p, cs.s_lin_mean, cs.max_delta_c))
            } else {
                None
            };
            Ok(Replica {
                f_p,
                s_lin: sampled.s_lin_mean,
                max_dc: sampled.max_delta_c,
                composed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let collect = |f: &dyn Fn(&Replica) -> f64| -> Vec<f64> { replicas.iter().map(f).collect() };
    let f_ps = collect(&|r| r.f_p);
    let errors = MetricErrors {
        f_p: sample_std(&f_ps),
        f_mean: sample_std(&f_ps.iter().map(|&f| mean_fidelity_closed_form(f)).collect::<Vec<_>>()),
        s_lin_mean: sample_std(&collect(&|r| r.s_lin)),
        max_delta_c: sample_std(&collect(&|r| r.max_dc)),
    };
    let composed = if want_composed {
        let cf_ps: Vec<f64> = replicas
            .iter()
            .map(|r| r.composed.expect("composed replicas requested").0)
            .collect();
        let cs_lins: Vec<f64> = replicas.iter().map(|r| r.composed.unwrap().1).collect();
        let spread = MetricErrors {
            f_p: sample_std(&cf_ps),
            f_mean: sample_std(
                &cf_ps.iter().map(|&f| mean_fidelity_closed_form(f)).collect::<Vec<_>>(),
            ),
            s_lin_mean: sample_std(&cs_lins),
            max_delta_c: sample_std(
                &replicas.iter().map(|r| r.composed.unwrap().2).collect::<Vec<_>>(),
            ),
        };
        let means = ComposedReplicaMeans {
            f_p: cf_ps.iter().sum::<f64>() / cf_ps.len() as f64,
            s_lin_mean: cs_lins.iter().sum::<f64>() / cs_lins.len() as f64,
        };
        Some((spread, means))
    } else {
        None
    };
    Ok((errors, composed))
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Nodes and weights of n-point Gauss–Hermite quadrature (weight
/// function e^{−x²}), via the symmetric tridiagonal Jacobi matrix.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let weight = PI.sqrt() * eig.eigenvectors[(0, i)].powi(2);
            (node, weight)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Shot-averaged process matrix of the noisy gate program, computed by
/// Gauss–Hermite quadrature over the Gaussian detuning instead of
/// sampling. Instantaneous pulses; double runs share one detuning draw
/// (the quasi-static, correlated case). The Kraus family of each fixed
/// detuning comes from slicing the full-register propagator at the mode
/// ground input.
pub fn quadrature_chi(
    variant: Variant,
    repetitions: u8,
    trap: &TrapParams,
    epsilon: f64,
    sigma: f64,
    nodes: usize,
) -> Result<CMat> {
    if !(repetitions == 1 || repetitions == 2) {
        return Err(Error::Invalid(format!(
            "repetitions must be 1 or 2, got {repetitions}"
        )));
    }
    if !(sigma >= 0.0) || !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Invalid(
            "need sigma ≥ 0 and addressing ratio in [0, 1]".into(),
        ));
    }
    let evolver = Evolver::new(*trap)?;
    let base = build_sequence(variant);
    let seqs = base.concatenated(repetitions);
    let correction = base.frame_correction(u32::from(repetitions));

    let grid: Vec<(f64, f64)> = if sigma == 0.0 {
        vec![(0.0, 1.0)]
    } else {
        let (xs, ws) = gauss_hermite(nodes);
        let norm: f64 = ws.iter().sum();
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| (SQRT_2 * sigma * x, w / norm))
            .collect()
    };

    let terms: Vec<CMat> = grid
        .par_iter()
        .map(|&(delta, weight)| -> Result<CMat> {
            let mut u = CMat::identity(evolver.dim(), evolver.dim());
            let mut elapsed = 0.0;
            for seq in &seqs {
                let (p, t) = evolver.sequence_propagator(seq, delta, epsilon, false, elapsed)?;
                u = p * u;
                elapsed += t;
            }
            let kraus = ground_input_kraus(&evolver, &u, &correction);
            Ok(kraus_to_chi(&kraus) * Complex64::new(weight, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut chi = CMat::zeros(16, 16);
    for t in &terms {
        chi += t;
    }
    Ok(chi)
}

/// Kraus family ⟨n|U|0⟩ of a full-register propagator restricted to the
/// mode ground input, with the frame correction folded in.
fn ground_input_kraus(evolver: &Evolver, u: &CMat, correction: &CMat) -> Vec<CMat> {
    let n_max = evolver.params().n_max;
    (0..=n_max)
        .map(|n| {
            let block = CMat::from_fn(4, 4, |r, c| {
                u[(
                    SystemState::index(n_max, r / 2, r % 2, n),
                    SystemState::index(n_max, c / 2, c % 2, 0),
                )]
            });
            correction * block
        })
        .collect()
}

/// Process fidelity of the quadrature-averaged gate program against its
/// ideal target.
pub fn quadrature_process_fidelity(
    variant: Variant,
    repetitions: u8,
    trap: &TrapParams,
    epsilon: f64,
    sigma: f64,
    nodes: usize,
) -> Result<f64> {
    let chi = quadrature_chi(variant, repetitions, trap, epsilon, sigma, nodes)?;
    let target = unitary_to_chi(&ideal_target_unitary(variant, repetitions))?;
    Ok((target.chi() * chi).trace().re)
}

/// Outcome of the detuning-spread calibration scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Frozen detuning spread, rad/s.
    pub detuning_sigma: f64,
    /// Variant-A single-gate process fidelity at that spread.
    pub f_p: f64,
    /// The coarse (σ, F_p) scan, 10 points.
    pub grid: Vec<(f64, f64)>,
}

/// Scan the detuning spread on a coarse 10-point grid until the
/// variant-A single-gate process fidelity lands in the 0.88–0.90 band;
/// bisect between the bracketing grid points if the grid steps over the
/// band. The returned spread is meant to be frozen for all comparative
/// studies. Deterministic; no sampling involved.
pub fn calibrate_detuning_sigma(trap: &TrapParams, addressing_ratio: f64) -> Result<CalibrationResult> {
    let (lo, hi) = CALIBRATION_BAND;
    let f_at = |sigma: f64| -> Result<f64> {
        quadrature_process_fidelity(Variant::A, 1, trap, addressing_ratio, sigma, QUADRATURE_NODES)
    };

    let grid_sigmas: Vec<f64> = (1..=10).map(|k| 2.0 * PI * 100.0 * k as f64).collect();
    let mut grid = Vec::with_capacity(grid_sigmas.len());
    for &sigma in &grid_sigmas {
        grid.push((sigma, f_at(sigma)?));
    }

    if let Some(&(sigma, f_p)) = grid.iter().find(|(_, f)| (lo..=hi).contains(f)) {
        return Ok(CalibrationResult {
            detuning_sigma: sigma,
            f_p,
            grid,
        });
    }

    // The grid stepped over the band: bisect inside the first bracket
    // where the fidelity crosses it (F_p decreases with σ).
    let mut left = (0.0, f_at(0.0)?);
    let mut right = None;
    for &(sigma, f) in &grid {
        if f > hi {
            left = (sigma, f);
        } else {
            right = Some((sigma, f));
            break;
        }
    }
    let Some(mut right) = right else {
        return Err(Error::NonConvergence(format!(
            "calibration never reached the F_p band [{lo}, {hi}]; \
             lowest grid fidelity {:.4}",
            grid.last().map(|g| g.1).unwrap_or(f64::NAN)
        )));
    };
    for _ in 0..60 {
        let mid = 0.5 * (left.0 + right.0);
        let f = f_at(mid)?;
        if (lo..=hi).contains(&f) {
            return Ok(CalibrationResult {
                detuning_sigma: mid,
                f_p: f,
                grid,
            });
        }
        if f > hi {
            left = (mid, f);
        } else {
            right = (mid, f);
        }
    }
    Err(Error::NonConvergence(
        "calibration bisection failed to land in the fidelity band".into(),
    ))
}
