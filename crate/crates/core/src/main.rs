use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use qdarwin::pipeline::{all_cases, cmd_experiment, cmd_table, cmd_theory, OutputFormat, RunConfig};
use qdarwin::{EntropyMode, Error, Variant};

#[derive(Parser)]
#[command(name = "qdarwin", version, about = "Simulate, sample, and analyse system-environment states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact state and information curves.
    Theory(CommonArgs),
    /// Sampled tomography, reconstruction, and information curves.
    Experiment(SampledArgs),
    /// Fidelity and purity table over several cases.
    Table(TableArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 3)]
    qubits: usize,
    #[arg(long, default_value = "A")]
    variant: String,
    /// System rotation angle in radians.
    #[arg(long)]
    theta_system: Option<f64>,
    /// Comma-separated environment indices, e.g. 2,1,3.
    #[arg(long, value_delimiter = ',')]
    ordering: Option<Vec<usize>>,
    #[arg(long, default_value = "physical")]
    mode: String,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = qdarwin::sampler::DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long)]
    seed: u64,
    /// Readout flip probability, or `none`.
    #[arg(long, default_value = "0.02")]
    noise: String,
    /// Depolarizing probability per two-qubit gate.
    #[arg(long, default_value_t = 0.0)]
    depolarizing: f64,
    #[arg(long, default_value = "on")]
    mitigation: String,
    /// Worker threads; outputs do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SampledArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Cases such as 3A,4B; all ten when omitted.
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_noise(s: &str) -> qdarwin::Result<Option<f64>> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse(format!("noise \"{s}\" is neither a probability nor none")))
}

fn parse_switch(s: &str) -> qdarwin::Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(Error::Parse(format!("expected on|off, got \"{other}\""))),
    }
}

fn parse_case(s: &str) -> qdarwin::Result<(usize, Variant)> {
    let s = s.trim();
    let split = s.len().saturating_sub(1);
    let qubits = s[..split]
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("case \"{s}\" is not of the form 3A")))?;
    Ok((qubits, s[split..].parse()?))
}

fn base_config(common: &CommonArgs, seed: u64) -> qdarwin::Result<RunConfig> {
    let mut cfg = RunConfig::new(common.qubits, common.variant.parse()?, seed);
    cfg.theta_system = common.theta_system;
    cfg.ordering = common.ordering.clone();
    cfg.mode = common.mode.parse::<EntropyMode>()?;
    cfg.format = common.format.parse::<OutputFormat>()?;
    Ok(cfg)
}

fn apply_sampling(cfg: &mut RunConfig, s: &SamplingArgs) -> qdarwin::Result<()> {
    cfg.shots = s.shots;
    cfg.seed = s.seed;
    cfg.noise = parse_noise(&s.noise)?;
    cfg.gate_depolarizing = s.depolarizing;
    cfg.mitigation = parse_switch(&s.mitigation)?;
    cfg.jobs = s.jobs;
    Ok(())
}

fn run(cli: Cli) -> qdarwin::Result<Vec<PathBuf>> {
    match cli.command {
        Command::Theory(common) => {
            let cfg = base_config(&common, 0)?;
            cmd_theory(&cfg, &common.out)
        }
        Command::Experiment(args) => {
            let mut cfg = base_config(&args.common, args.sampling.seed)?;
            apply_sampling(&mut cfg, &args.sampling)?;
            cmd_experiment(&cfg, &args.common.out)
        }
        Command::Table(args) => {
            let mut template = RunConfig::new(2, Variant::A, args.sampling.seed);
            apply_sampling(&mut template, &args.sampling)?;
            let configs = match &args.cases {
                None => all_cases(&template),
                Some(cases) => cases
                    .iter()
                    .filter(|c| !c.trim().is_empty())
                    .map(|c| {
                        let (qubits, variant) = parse_case(c)?;
                        Ok(RunConfig {
                            qubits,
                            variant,
                            ..template.clone()
                        })
                    })
                    .collect::<qdarwin::Result<Vec<_>>>()?,
            };
            for cfg in &configs {
                cfg.validate()?;
            }
            cmd_table(&configs, &args.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                info!("wrote {}", p.display());
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                warn!("numerical failure");
                ExitCode::from(3)
            }
        }
    }
}
