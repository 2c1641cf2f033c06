//! End-to-end runs: theory, sampled experiment, and batch tables, plus the
//! files they emit.
//!
//! All outputs are computed in memory first and written only once every stage
//! has succeeded. Nothing written depends on wall-clock time or on the worker
//! count, so identical configurations give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::circuit::{build_darwinism_circuit, theoretical_state, Circuit, DarwinismConfig, Variant};
use crate::error::{Error, Result};
use crate::info::{fragment_sweep, InfoReport, Source};
use crate::linalg::{DensityMatrix, EntropyMode};
use crate::sampler::{
    apply_depolarizing, apply_readout_noise, derive_seed, enumerate_settings, exact_probabilities,
    sample_counts, CountsTable, MeasurementSetting, NoiseModel, DEFAULT_READOUT_FLIP, DEFAULT_SHOTS,
    STREAM_CALIBRATION, STREAM_TOMOGRAPHY,
};
use crate::tomography::{calibrate_readout, mitigate_counts, reconstruct, CalibrationData, ReconstructionReport};

pub const TOOL_NAME: &str = "qdarwin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown format \"{other}\""))),
        }
    }
}

/// One run of the pipeline. `jobs` controls parallelism only and is not
/// echoed into any output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub qubits: usize,
    pub variant: Variant,
    pub theta_system: Option<f64>,
    pub shots: u64,
    /// Symmetric readout flip probability; `None` for a noiseless readout.
    pub noise: Option<f64>,
    pub gate_depolarizing: f64,
    pub seed: u64,
    pub mitigation: bool,
    pub mode: EntropyMode,
    pub ordering: Option<Vec<usize>>,
    pub format: OutputFormat,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn new(qubits: usize, variant: Variant, seed: u64) -> Self {
        Self {
            qubits,
            variant,
            theta_system: None,
            shots: DEFAULT_SHOTS,
            noise: Some(DEFAULT_READOUT_FLIP),
            gate_depolarizing: 0.0,
            seed,
            mitigation: true,
            mode: EntropyMode::Physical,
            ordering: None,
            format: OutputFormat::Json,
            jobs: None,
        }
    }

    pub fn darwinism(&self) -> Result<DarwinismConfig> {
        let base = DarwinismConfig::standard(self.qubits, self.variant)?;
        match self.theta_system {
            Some(theta) => DarwinismConfig::new(theta, base.interaction_strengths),
            None => Ok(base),
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let base = match self.noise {
            Some(p) => NoiseModel::symmetric(self.qubits, p)?,
            None => NoiseModel::noiseless(self.qubits),
        };
        base.with_gate_depolarizing(self.gate_depolarizing)
    }

    /// Fragment order for sweeps; ascending environment index by default.
    pub fn sweep_ordering(&self) -> Vec<usize> {
        self.ordering
            .clone()
            .unwrap_or_else(|| (1..self.qubits).collect())
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.qubits, self.variant)
    }

    /// Row name in the style `S-E3 (B)`.
    pub fn case_name(&self) -> String {
        format!("S-E{} ({})", self.qubits - 1, self.variant)
    }

    pub fn validate(&self) -> Result<()> {
        self.darwinism()?;
        self.noise_model()?;
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        if let Some(order) = &self.ordering {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (1..self.qubits).collect::<Vec<_>>() {
                return Err(Error::InvalidConfig(format!(
                    "ordering {order:?} is not a permutation of 1..={}",
                    self.qubits - 1
                )));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidConfig("jobs must be positive".into()));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            builder = builder.num_threads(j);
        }
        builder
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryOutput {
    pub config: RunConfig,
    pub circuit: Circuit,
    pub rho: DensityMatrix,
    pub info: InfoReport,
}

pub fn run_theory(cfg: &RunConfig) -> Result<TheoryOutput> {
    cfg.validate()?;
    let darwinism = cfg.darwinism()?;
    let rho = theoretical_state(&darwinism).density_matrix();
    let rows = fragment_sweep(&rho, &cfg.sweep_ordering(), EntropyMode::Physical)?;
    let info = InfoReport {
        source: Source::Theoretical,
        mode: EntropyMode::Physical,
        config: cfg.label(),
        seed: None,
        ordering: cfg.sweep_ordering(),
        rows,
        fidelity: Some(1.0),
        purity: Some(crate::linalg::purity(&rho)),
        clipped_mass: None,
        has_negative_mi: false,
    };
    Ok(TheoryOutput {
        config: cfg.clone(),
        circuit: build_darwinism_circuit(&darwinism),
        rho,
        info,
    })
}

/// Sampled counts for every tomography setting, plus calibration tables when
/// requested.
#[derive(Debug, Clone)]
pub struct SampledData {
    pub tomography: Vec<CountsTable>,
    pub calibration: Option<(CountsTable, CountsTable)>,
}

/// Samples all `3^n` settings. Each setting uses the stream
/// `derive_seed(seed, STREAM_TOMOGRAPHY, index)`.
pub fn sample_experiment(cfg: &RunConfig) -> Result<SampledData> {
    cfg.validate()?;
    let darwinism = cfg.darwinism()?;
    let psi = theoretical_state(&darwinism);
    let noise = cfg.noise_model()?;
    let n = cfg.qubits;
    let two_qubit_gates = build_darwinism_circuit(&darwinism).two_qubit_gate_count();

    let measured = |ideal: Vec<f64>| -> Result<Vec<f64>> {
        let dist = if noise.gate_depolarizing > 0.0 {
            apply_depolarizing(&ideal, noise.gate_depolarizing, two_qubit_gates)
        } else {
            ideal
        };
        apply_readout_noise(&dist, &noise)
    };

    let settings = enumerate_settings(n);
    let tomography = cfg.pool()?.install(|| {
        settings
            .into_par_iter()
            .enumerate()
            .map(|(i, setting)| {
                let dist = measured(exact_probabilities(&psi, &setting)?)?;
                sample_counts(&dist, cfg.shots, derive_seed(cfg.seed, STREAM_TOMOGRAPHY, i as u64), setting)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let calibration = if cfg.mitigation {
        let dim = 1usize << n;
        let prep = |index: usize, stream_index: u64| -> Result<CountsTable> {
            let mut ideal = vec![0.0; dim];
            ideal[index] = 1.0;
            let dist = apply_readout_noise(&ideal, &noise)?;
            sample_counts(
                &dist,
                cfg.shots,
                derive_seed(cfg.seed, STREAM_CALIBRATION, stream_index),
                MeasurementSetting::all_z(n),
            )
        };
        Some((prep(0, 0)?, prep(dim - 1, 1)?))
    } else {
        None
    };
    Ok(SampledData {
        tomography,
        calibration,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub config: RunConfig,
    pub settings_processed: usize,
    pub calibration: Option<CalibrationData>,
    pub unmitigated: ReconstructionReport,
    pub mitigated: Option<ReconstructionReport>,
    #[serde(skip)]
    pub theory: TheoryOutput,
    #[serde(skip)]
    pub info: Vec<InfoReport>,
}

pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let theory = run_theory(cfg)?;
    let data = sample_experiment(cfg)?;
    let n = cfg.qubits;
    let unmitigated = reconstruct(&data.tomography, n, &theory.rho, false, 0.0)?;

    let (calibration, mitigated) = match &data.calibration {
        Some((zero, one)) => {
            let calib = calibrate_readout(zero, one)?;
            let outcomes = cfg.pool()?.install(|| {
                data.tomography
                    .par_iter()
                    .map(|t| mitigate_counts(t, &calib))
                    .collect::<Result<Vec<_>>>()
            })?;
            let clipped = outcomes.iter().map(|m| m.clipped_mass).sum::<f64>() / outcomes.len() as f64;
            let tables: Vec<CountsTable> = outcomes.into_iter().map(|m| m.counts).collect();
            let report = reconstruct(&tables, n, &theory.rho, true, clipped)?;
            (Some(calib), Some(report))
        }
        None => (None, None),
    };

    let mut info = vec![theory.info.clone()];
    info.push(info_for(cfg, Source::Raw, &unmitigated)?);
    if let Some(m) = &mitigated {
        info.push(info_for(cfg, Source::Mitigated, m)?);
    }

    Ok(ExperimentOutput {
        config: cfg.clone(),
        settings_processed: data.tomography.len(),
        calibration,
        unmitigated,
        mitigated,
        theory,
        info,
    })
}

fn info_for(cfg: &RunConfig, source: Source, report: &ReconstructionReport) -> Result<InfoReport> {
    let (rho, purity) = match cfg.mode {
        EntropyMode::Physical => (&report.rho_projected, report.purity_projected),
        EntropyMode::Raw => (&report.rho_raw, report.purity_raw),
    };
    let rows = fragment_sweep(rho, &cfg.sweep_ordering(), cfg.mode)?;
    Ok(InfoReport {
        source,
        mode: cfg.mode,
        config: cfg.label(),
        seed: Some(cfg.seed),
        ordering: cfg.sweep_ordering(),
        has_negative_mi: rows.iter().any(|r| r.mi < 0.0),
        rows,
        fidelity: Some(report.fidelity_vs_theory),
        purity: Some(purity),
        clipped_mass: Some(report.clipped_mass),
    })
}

/// One line of the fidelity/purity table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub case: String,
    pub qubits: usize,
    pub variant: Variant,
    pub fidelity: f64,
    pub fidelity_mitigated: Option<f64>,
    pub purity: f64,
    pub purity_mitigated: Option<f64>,
    pub purity_raw: f64,
    pub purity_raw_mitigated: Option<f64>,
}

pub fn run_table(configs: &[RunConfig]) -> Result<Vec<TableRow>> {
    configs
        .iter()
        .map(|cfg| {
            let out = run_experiment(cfg)?;
            let m = out.mitigated.as_ref();
            Ok(TableRow {
                case: cfg.case_name(),
                qubits: cfg.qubits,
                variant: cfg.variant,
                fidelity: out.unmitigated.fidelity_vs_theory,
                fidelity_mitigated: m.map(|r| r.fidelity_vs_theory),
                purity: out.unmitigated.purity_projected,
                purity_mitigated: m.map(|r| r.purity_projected),
                purity_raw: out.unmitigated.purity_raw,
                purity_raw_mitigated: m.map(|r| r.purity_raw),
            })
        })
        .collect()
}

pub const TABLE_HEADER: &str =
    "case,qubits,variant,fidelity,fidelity_mitigated,purity,purity_mitigated,purity_raw,purity_raw_mitigated";

pub fn table_csv(rows: &[TableRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.case,
            r.qubits,
            r.variant,
            r.fidelity,
            opt(r.fidelity_mitigated),
            r.purity,
            opt(r.purity_mitigated),
            r.purity_raw,
            opt(r.purity_raw_mitigated)
        );
    }
    out
}

pub const INFO_CSV_HEADER: &str = "fragment_fraction,mi,holevo,discord,source,config,seed";

pub fn info_csv(reports: &[InfoReport]) -> String {
    let mut out = String::from(INFO_CSV_HEADER);
    out.push('\n');
    for rep in reports {
        let seed = rep.seed.map(|s| s.to_string()).unwrap_or_default();
        for row in &rep.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.fragment_fraction, row.mi, row.holevo, row.discord, rep.source, rep.config, seed
            );
        }
    }
    out
}

#[derive(Serialize)]
struct InfoFile<'a> {
    config: &'a RunConfig,
    reports: &'a [InfoReport],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileChecksum {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub configs: Vec<RunConfig>,
    pub files: Vec<FileChecksum>,
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `files` and a manifest into `dir`. Returns every path written.
fn emit(dir: &Path, command: &str, configs: &[RunConfig], files: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let checksums = files
        .iter()
        .map(|(name, body)| FileChecksum {
            name: name.clone(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
        })
        .collect();
    let manifest = RunManifest {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        configs: configs.to_vec(),
        files: checksums,
    };
    let mut written = Vec::new();
    for (name, body) in files.iter().chain(std::iter::once(&("manifest.json".to_string(), to_json(&manifest)?))) {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

fn info_file(cfg: &RunConfig, reports: &[InfoReport]) -> Result<(String, String)> {
    Ok(match cfg.format {
        OutputFormat::Json => ("info_report.json".into(), to_json(&InfoFile { config: cfg, reports })?),
        OutputFormat::Csv => ("info_report.csv".into(), info_csv(reports)),
    })
}

pub fn cmd_theory(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let theory = run_theory(cfg)?;
    let files = vec![
        ("rho_theory.json".to_string(), to_json(&theory)?),
        info_file(cfg, std::slice::from_ref(&theory.info))?,
    ];
    emit(out_dir, "theory", std::slice::from_ref(cfg), files)
}

pub fn cmd_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let exp = run_experiment(cfg)?;
    let files = vec![
        ("rho_theory.json".to_string(), to_json(&exp.theory)?),
        ("rho_experiment.json".to_string(), to_json(&exp)?),
        info_file(cfg, &exp.info)?,
    ];
    emit(out_dir, "experiment", std::slice::from_ref(cfg), files)
}

pub fn cmd_table(configs: &[RunConfig], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = run_table(configs)?;
    emit(out_dir, "table", configs, vec![("table.csv".into(), table_csv(&rows))])
}

/// The ten tabulated cases (2–6 qubits, variants A and B) sharing `template`'s
/// sampling settings.
pub fn all_cases(template: &RunConfig) -> Vec<RunConfig> {
    (2..=6)
        .flat_map(|q| [Variant::A, Variant::B].map(|v| (q, v)))
        .map(|(qubits, variant)| RunConfig {
            qubits,
            variant,
            ordering: None,
            ..template.clone()
        })
        .collect()
}
