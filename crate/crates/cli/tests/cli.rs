//! End-to-end tests of the `qpt` binary: flag handling, artifact layout,
//! error reporting, and reproducibility.

use ionsim_core::experiments::GateReport;
use ionsim_core::process::{unitary_to_chi, ideal_target_unitary, ProcessMatrix};
use ionsim_core::pulse::Variant;
use ionsim_core::states::DensityMatrix;
use ionsim_core::tomography::{tomography_input_states, TomographyDataset};
use ionsim_cli::manifest::RunManifest;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn qpt_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary should spawn")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

const ZERO_NOISE: &str = r#"{
  "noise": {
    "addressing_ratio": 0.0,
    "detuning_sigma": 0.0,
    "include_offresonant_carrier": false,
    "correlate_across_gates": false
  },
  "ensemble_n": 2000
}"#;

#[test]
fn unknown_config_key_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "cfg.json", r#"{"noise": {"detuning_sgima": 0.0}}"#);
    let out = qpt(&[
        "tomography",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("detuning_sgima"), "stderr should name the bad key: {err}");
    assert!(err.contains("cfg.json"), "stderr should name the file: {err}");
}

#[test]
fn invalid_repetition_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpt(&[
        "tomography",
        "--repetitions",
        "3",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("repetitions"));
}

#[test]
fn exact_zero_noise_reconstruction_is_nearly_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "cfg.json", ZERO_NOISE);
    let out_dir = dir.path().join("out");
    let out = qpt(&[
        "tomography",
        "--config",
        cfg.to_str().unwrap(),
        "--exact",
        "--sequence",
        "a",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let report: GateReport =
        serde_json::from_str(&fs::read_to_string(out_dir.join("gate_report.json")).unwrap())
            .unwrap();
    assert!(report.metrics.f_p > 0.999, "F_p = {}", report.metrics.f_p);
    assert!(report.mle_converged);
    let ds: TomographyDataset =
        serde_json::from_str(&fs::read_to_string(out_dir.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(ds.records.len(), 144);
    assert!(ds.shots_per_setting.is_none());
}

/// One sampled tomography run shared by the artifact-shape tests below.
fn sampled_fixture() -> &'static (tempfile::TempDir, PathBuf) {
    use std::sync::OnceLock;
    static FIXTURE: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out_dir = dir.path().join("run");
        let out = qpt(&[
            "tomography",
            "--seed",
            "5",
            "--shots",
            "250",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        (dir, out_dir)
    })
}

#[test]
fn sampled_run_writes_the_full_protocol() {
    let (_dir, out_dir) = sampled_fixture();
    let ds: TomographyDataset =
        serde_json::from_str(&fs::read_to_string(out_dir.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(ds.records.len(), 144);
    assert_eq!(ds.shots_per_setting, Some(250));
    ds.validate().unwrap();
    let raw: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("dataset.json")).unwrap()).unwrap();
    assert_eq!(raw["mode"], "sampled");
    for record in raw["records"].as_array().unwrap() {
        let total: u64 = record["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .sum();
        assert_eq!(total, 250);
    }
}

#[test]
fn manifest_digests_match_the_artifact_bytes() {
    let (_dir, out_dir) = sampled_fixture();
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.command, "tomography");
    assert_eq!(manifest.seed, 5);
    let names: Vec<&str> = manifest.outputs.iter().map(|o| o.path.as_str()).collect();
    assert_eq!(
        names,
        ["gate_report.json", "dataset.json", "chi_mle.json", "chi_linear.json", "metrics.csv"]
    );
    for output in &manifest.outputs {
        let bytes = fs::read(out_dir.join(&output.path)).unwrap();
        let digest = format!("{:x}", Sha256::digest(&bytes));
        assert_eq!(digest, output.sha256, "digest mismatch for {}", output.path);
    }
}

#[test]
fn emitted_json_artifacts_reparse_to_equal_values() {
    let (_dir, out_dir) = sampled_fixture();
    let report_text = fs::read_to_string(out_dir.join("gate_report.json")).unwrap();
    let report: GateReport = serde_json::from_str(&report_text).unwrap();
    let round: GateReport =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, round);

    let chi_text = fs::read_to_string(out_dir.join("chi_mle.json")).unwrap();
    let chi: ProcessMatrix = serde_json::from_str(&chi_text).unwrap();
    let chi_round: ProcessMatrix =
        serde_json::from_str(&serde_json::to_string(&chi).unwrap()).unwrap();
    assert_eq!(chi.chi(), chi_round.chi());
    assert_eq!(chi.chi(), report.chi.chi());
}

#[test]
fn metrics_csv_uses_the_stable_header_and_layout() {
    let (_dir, out_dir) = sampled_fixture();
    let csv = fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), GateReport::table_header());
    let row = lines.next().unwrap();
    assert_eq!(row.split(',').count(), GateReport::table_header().split(',').count());
    assert!(lines.next().is_none());
    assert!(row.starts_with("A,1,"));
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let (_dir, out_dir) = sampled_fixture();
    let dir2 = tempfile::tempdir().unwrap();
    let out_dir2 = dir2.path().join("run");
    let out = qpt(&[
        "tomography",
        "--seed",
        "5",
        "--shots",
        "250",
        "--out",
        out_dir2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["gate_report.json", "dataset.json", "chi_mle.json", "chi_linear.json", "metrics.csv"]
    {
        let a = fs::read(out_dir.join(name)).unwrap();
        let b = fs::read(out_dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn simulate_outputs_match_the_ideal_gate_action() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "cfg.json", ZERO_NOISE);
    let out_dir = dir.path().join("out");
    let out = qpt(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--sequence",
        "a",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let ideal: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("densities_ideal.json")).unwrap())
            .unwrap();
    let states = ideal["states"].as_array().unwrap();
    assert_eq!(states.len(), 16);

    let u = ideal_target_unitary(Variant::A, 1);
    let inputs = tomography_input_states();
    for (idx, entry) in states.iter().enumerate() {
        let psi = &inputs.states()[idx];
        let rho = DensityMatrix::from_pure(psi).unwrap();
        let expected = &u * rho.data() * u.adjoint();
        let re = entry["re"].as_array().unwrap();
        let im = entry["im"].as_array().unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let got_re = re[r].as_array().unwrap()[c].as_f64().unwrap();
                let got_im = im[r].as_array().unwrap()[c].as_f64().unwrap();
                assert!(
                    (got_re - expected[(r, c)].re).abs() < 1e-9
                        && (got_im - expected[(r, c)].im).abs() < 1e-9,
                    "input {idx} element ({r},{c}) deviates"
                );
            }
        }
    }

    // With every noise source off the simulated outputs equal the ideal ones.
    let noisy = fs::read_to_string(out_dir.join("densities_noisy.json")).unwrap();
    let ideal_text = fs::read_to_string(out_dir.join("densities_ideal.json")).unwrap();
    assert_eq!(
        serde_json::from_str::<Value>(&noisy).unwrap()["states"],
        serde_json::from_str::<Value>(&ideal_text).unwrap()["states"]
    );
}

#[test]
fn seeded_noisy_simulate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(
        dir.path(),
        "cfg.json",
        r#"{"noise": {"addressing_ratio": 0.03, "detuning_sigma": 1500.0,
             "include_offresonant_carrier": false, "correlate_across_gates": false}}"#,
    );
    let run = |out_dir: &Path| {
        let out = qpt(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        fs::read(out_dir.join("densities_noisy.json")).unwrap()
    };
    let a = run(&dir.path().join("out_a"));
    let b = run(&dir.path().join("out_b"));
    assert_eq!(a, b);
    // The noisy outputs genuinely differ from the ideal ones here.
    let ideal = fs::read(dir.path().join("out_a").join("densities_ideal.json")).unwrap();
    assert_ne!(a, ideal);
}

#[test]
fn analyze_scores_a_stored_ideal_gate_as_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let chi = unitary_to_chi(&ideal_target_unitary(Variant::A, 1)).unwrap();
    let chi_path = write_file(
        dir.path(),
        "chi.json",
        &serde_json::to_string_pretty(&chi).unwrap(),
    );
    let out_dir = dir.path().join("out");
    let out = qpt(&[
        "analyze",
        "--chi",
        chi_path.to_str().unwrap(),
        "--target",
        "a",
        "--ensemble",
        "2000",
        "--seed",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let metrics: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
    assert!((metrics["f_p"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((metrics["f_mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    // The gate decomposes over {II, IY, ZI, ZY}: the magnitude chart has
    // exactly 16 bars of height 1/4, so 16 annotated cells.
    let svg = fs::read_to_string(out_dir.join("chi_abs.svg")).unwrap();
    assert_eq!(svg.matches(">0.250<").count(), 16);
    for name in ["chi_re.svg", "chi_im.svg", "metrics.csv"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
}

#[test]
fn analyze_identity_chart_matches_the_golden_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let chi = unitary_to_chi(&nalgebra::DMatrix::identity(4, 4)).unwrap();
    let chi_path = write_file(
        dir.path(),
        "chi.json",
        &serde_json::to_string_pretty(&chi).unwrap(),
    );
    let out_dir = dir.path().join("out");
    let out = qpt(&[
        "analyze",
        "--chi",
        chi_path.to_str().unwrap(),
        "--target",
        "identity",
        "--ensemble",
        "500",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let svg = fs::read_to_string(out_dir.join("chi_abs.svg")).unwrap();
    assert_eq!(svg, include_str!("golden/identity_chi_abs.svg"));
}

#[test]
fn malformed_chi_files_exit_2_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");

    let truncated = write_file(dir.path(), "broken.json", r#"{"basis_order": ["II"#);
    let out = qpt(&[
        "analyze",
        "--chi",
        truncated.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("broken.json"));

    let scrambled = write_file(
        dir.path(),
        "scrambled.json",
        &serde_json::to_string(&serde_json::json!({
            "basis_order": vec!["XX"; 16],
            "re": vec![vec![0.0; 16]; 16],
            "im": vec![vec![0.0; 16]; 16],
        }))
        .unwrap(),
    );
    let out = qpt(&[
        "analyze",
        "--chi",
        scrambled.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("basis_order"));
}

#[test]
fn compare_checks_report_roles_and_writes_the_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let single_cfg = write_file(dir.path(), "single.json", ZERO_NOISE);
    let single_out = dir.path().join("single");
    let out = qpt(&[
        "tomography",
        "--config",
        single_cfg.to_str().unwrap(),
        "--exact",
        "--repetitions",
        "1",
        "--out",
        single_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let concat_out = dir.path().join("concat");
    let out = qpt(&[
        "tomography",
        "--config",
        single_cfg.to_str().unwrap(),
        "--exact",
        "--repetitions",
        "2",
        "--out",
        concat_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let single_report = single_out.join("gate_report.json");
    let concat_report = concat_out.join("gate_report.json");

    // Both roles filled by the same single-gate report: rejected.
    let out = qpt(&[
        "compare",
        "--single",
        single_report.to_str().unwrap(),
        "--concat",
        single_report.to_str().unwrap(),
        "--out",
        dir.path().join("bad").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("repetitions"));

    let cmp_out = dir.path().join("cmp");
    let out = qpt(&[
        "compare",
        "--single",
        single_report.to_str().unwrap(),
        "--concat",
        concat_report.to_str().unwrap(),
        "--out",
        cmp_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let discrepancy: Value =
        serde_json::from_str(&fs::read_to_string(cmp_out.join("discrepancy.json")).unwrap())
            .unwrap();
    // Noise-free exact runs compose almost perfectly.
    assert!(discrepancy["delta_f_p"].as_f64().unwrap().abs() < 1e-3);
    assert!(cmp_out.join("predicted_metrics.json").exists());
    assert!(cmp_out.join("measured_metrics.json").exists());
}

#[test]
fn hitting_the_iteration_cap_exits_4_after_writing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(
        dir.path(),
        "cfg.json",
        r#"{"mle": {"max_iters": 5, "tol": 1e-12, "dilution": 1.0}, "ensemble_n": 2000}"#,
    );
    let out_dir = dir.path().join("out");
    let out = qpt(&[
        "tomography",
        "--config",
        cfg.to_str().unwrap(),
        "--shots",
        "100",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("non-convergence"));
    let report: GateReport =
        serde_json::from_str(&fs::read_to_string(out_dir.join("gate_report.json")).unwrap())
            .unwrap();
    assert!(!report.mle_converged);
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn qpt_log_prints_progress_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "cfg.json", ZERO_NOISE);
    let out = dir.path().join("out");
    let args = [
        "tomography",
        "--config",
        cfg.to_str().unwrap(),
        "--exact",
        "--out",
        out.to_str().unwrap(),
    ];
    let quiet = qpt_env(&args, "QPT_LOG", "0");
    assert!(!stderr_of(&quiet).contains("[qpt]"));
    let loud = qpt_env(
        &[
            "tomography",
            "--config",
            cfg.to_str().unwrap(),
            "--exact",
            "--out",
            dir.path().join("out2").to_str().unwrap(),
        ],
        "QPT_LOG",
        "1",
    );
    assert!(stderr_of(&loud).contains("[qpt]"), "stderr: {}", stderr_of(&loud));
}
