use std::fs;
use std::process::Command;

use qdarwin::circuit::{theoretical_state, DarwinismConfig, Variant};
use qdarwin::info::{fragment_sweep, FragmentSpec};
use qdarwin::linalg::{DensityMatrix, EntropyMode};
use qdarwin::pipeline::{cmd_experiment, cmd_table, cmd_theory, run_experiment, OutputFormat, RunConfig};
use qdarwin::sampler::{
    derive_seed, enumerate_settings, exact_probabilities, sample_counts, CountsTable, MeasurementSetting,
    STREAM_TOMOGRAPHY,
};
use qdarwin::tomography::{calibrate_readout, reconstruct};
use qdarwin::Error;

const CASES: [(usize, Variant); 10] = [
    (2, Variant::A),
    (2, Variant::B),
    (3, Variant::A),
    (3, Variant::B),
    (4, Variant::A),
    (4, Variant::B),
    (5, Variant::A),
    (5, Variant::B),
    (6, Variant::A),
    (6, Variant::B),
];

fn exact_tables(rho_source: &DarwinismConfig) -> Vec<CountsTable> {
    let psi = theoretical_state(rho_source);
    enumerate_settings(psi.n_qubits())
        .into_iter()
        .map(|s| {
            let p = exact_probabilities(&psi, &s).unwrap();
            CountsTable::new(s, 1, p).unwrap()
        })
        .collect()
}

#[test]
fn sampled_frequencies_converge() {
    let shots = 1_000_000u64;
    for (q, v) in CASES {
        let psi = theoretical_state(&DarwinismConfig::standard(q, v).unwrap());
        let mut worst = 0.0f64;
        for (i, setting) in enumerate_settings(q).into_iter().enumerate() {
            let p = exact_probabilities(&psi, &setting).unwrap();
            let seed = derive_seed(2024, STREAM_TOMOGRAPHY, i as u64);
            let counts = sample_counts(&p, shots, seed, setting).unwrap();
            let tv: f64 = counts
                .probabilities()
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            worst = worst.max(tv);
        }
        assert!(worst < 0.005, "{q}{v}: worst TV {worst}");
    }
}

#[test]
fn holevo_monotone_along_any_ordering() {
    for (q, v) in CASES {
        let rho = theoretical_state(&DarwinismConfig::standard(q, v).unwrap()).density_matrix();
        let forward: Vec<usize> = (1..q).collect();
        let reverse: Vec<usize> = (1..q).rev().collect();
        let mut rotated = forward.clone();
        rotated.rotate_left(1);
        for ordering in [forward, reverse, rotated] {
            let rows = fragment_sweep(&rho, &ordering, EntropyMode::Physical).unwrap();
            for w in rows.windows(2) {
                assert!(w[1].holevo >= w[0].holevo - 1e-12, "{q}{v} {ordering:?}");
            }
        }
    }
}

#[test]
fn information_from_exact_tomography_matches_theory() {
    for (q, v) in CASES {
        let cfg = DarwinismConfig::standard(q, v).unwrap();
        let rho_t = theoretical_state(&cfg).density_matrix();
        let report = reconstruct(&exact_tables(&cfg), q, &rho_t, false, 0.0).unwrap();
        let ordering: Vec<usize> = (1..q).collect();
        let theory = fragment_sweep(&rho_t, &ordering, EntropyMode::Physical).unwrap();
        let recon = fragment_sweep(&report.rho_projected, &ordering, EntropyMode::Physical).unwrap();
        for (a, b) in theory.iter().zip(&recon) {
            assert!((a.mi - b.mi).abs() < 1e-7, "{q}{v}: {} vs {}", a.mi, b.mi);
            assert!((a.holevo - b.holevo).abs() < 1e-7);
            assert!((a.discord - b.discord).abs() < 1e-7);
        }
    }
}

#[test]
fn fragment_outside_environment_is_rejected() {
    assert!(FragmentSpec::new(vec![0], 3).is_err());
    assert!(FragmentSpec::new(vec![4], 3).is_err());
    assert!(FragmentSpec::new(vec![], 3).is_err());
}

#[test]
fn degenerate_calibration_is_a_numerical_error() {
    let z = MeasurementSetting::all_z(1);
    let both_half = CountsTable::new(z.clone(), 100, vec![50.0, 50.0]).unwrap();
    let err = calibrate_readout(&both_half, &both_half).unwrap_err();
    assert!(matches!(err, Error::SingularCalibration { .. }));
    assert!(!err.is_config_error());
}

#[test]
fn raw_mode_reports_use_raw_matrix() {
    let mut cfg = RunConfig::new(2, Variant::A, 11);
    cfg.shots = 1024;
    cfg.mode = EntropyMode::Raw;
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.info.len(), 3);
    assert!(out.info.iter().skip(1).all(|r| r.mode == EntropyMode::Raw));
    assert!(!out.unmitigated.rho_raw.is_physical());
    assert!(out.unmitigated.rho_projected.is_physical());
}

#[test]
fn files_and_manifest_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(3, Variant::B, 9);
    cfg.shots = 512;
    cfg.format = OutputFormat::Csv;
    let written = cmd_experiment(&cfg, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["rho_theory.json", "rho_experiment.json", "info_report.csv", "manifest.json"]);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "experiment");
    assert_eq!(manifest["configs"][0]["seed"], 9);
    for entry in manifest["files"].as_array().unwrap() {
        let body = fs::read(dir.path().join(entry["name"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(entry["sha256"].as_str().unwrap(), hex::encode(sha2::Sha256::digest(&body)));
    }

    let csv = fs::read_to_string(dir.path().join("info_report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "fragment_fraction,mi,holevo,discord,source,config,seed");
    // Two fragment sizes for each of theoretical, raw, mitigated.
    assert_eq!(lines.len(), 7);

    let exp: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rho_experiment.json")).unwrap()).unwrap();
    assert_eq!(exp["settings_processed"], 27);
    assert_eq!(exp["mitigated"]["mitigated"], true);
    assert_eq!(exp["unmitigated"]["rho_raw"]["physical"], false);
}

#[test]
fn theory_json_round_trips_density_matrix() {
    let dir = tempfile::tempdir().unwrap();
    cmd_theory(&RunConfig::new(2, Variant::A, 0), dir.path()).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rho_theory.json")).unwrap()).unwrap();
    let rho: DensityMatrix = serde_json::from_value(v["rho"].clone()).unwrap();
    assert!(rho.is_physical());
    assert!((rho.matrix()[(0, 3)].re - 0.5).abs() < 1e-12);
    assert_eq!(v["circuit"]["gates"].as_array().unwrap().len(), 2);
}

#[test]
fn empty_table_batch_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    cmd_table(&[], dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("case,"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdarwin"))
}

#[test]
fn cli_theory_and_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theory");
    let status = cli()
        .args(["theory", "--qubits", "3", "--variant", "B", "--ordering", "2,1", "--format", "csv", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let csv = fs::read_to_string(out.join("info_report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",theoretical,3B,"));

    let out = dir.path().join("exp");
    let status = cli()
        .args(["experiment", "--qubits", "2", "--seed", "3", "--shots", "256", "--noise", "none", "--mitigation", "off", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let exp: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("rho_experiment.json")).unwrap()).unwrap();
    assert!(exp["mitigated"].is_null());
    assert!(exp["config"]["noise"].is_null());
}

#[test]
fn cli_table_subset() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli()
        .args(["table", "--cases", "2A,3B", "--seed", "1", "--shots", "512", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("S-E1 (A),2,A,"));
    assert!(rows[2].starts_with("S-E2 (B),3,B,"));
}

#[test]
fn cli_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad: [&[&str]; 6] = [
        &["theory", "--qubits", "7"],
        &["theory", "--variant", "C"],
        &["theory", "--qubits", "3", "--ordering", "1,1"],
        &["experiment", "--seed", "1", "--noise", "0.7"],
        &["experiment", "--seed", "1", "--mitigation", "maybe"],
        &["experiment", "--qubits", "3"],
    ];
    for args in bad {
        let out = cli().args(args).arg("--out").arg(dir.path()).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none(), "no partial outputs");
}

#[test]
fn noiseless_million_shots_converges() {
    let mut cfg = RunConfig::new(2, Variant::A, 7);
    cfg.noise = None;
    cfg.shots = 1_000_000;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.unmitigated.fidelity_vs_theory >= 0.999, "{}", out.unmitigated.fidelity_vs_theory);
}

#[test]
fn six_qubits_process_all_settings() {
    let mut cfg = RunConfig::new(6, Variant::B, 3);
    cfg.shots = 1024;
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.settings_processed, 729);
    assert_eq!(out.info[0].rows.len(), 5);
}

#[test]
fn noiseless_table_of_all_cases() {
    let mut template = RunConfig::new(2, Variant::A, 5);
    template.noise = None;
    template.shots = 1_000_000;
    let rows = qdarwin::pipeline::run_table(&qdarwin::pipeline::all_cases(&template)).unwrap();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(r.fidelity >= 0.999, "{}: {}", r.case, r.fidelity);
        assert!(r.fidelity_mitigated.unwrap() >= 0.999, "{}", r.case);
    }
}
