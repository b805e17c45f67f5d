//! `canyonwave`: build rate maps and coverage statistics from a scene file.

use std::path::PathBuf;
use std::process::ExitCode;

use canyonwave_core::hybrid::{Baseband, Feedback, Structure};
use canyonwave_core::phy::max_codebook_bits_from_env;
use canyonwave_core::pipeline::{self, Mode, RunConfig};
use canyonwave_core::stats::DEFAULT_TARGETS;
use canyonwave_core::study::Placement;
use canyonwave_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "canyonwave", version, about = "Ray-traced mmWave rate maps for vehicular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build rate (and energy-efficiency) maps plus coverage statistics.
    Run(RunArgs),
    /// Evaluate two saved run configurations on the same grid and diff them.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Su,
    Mu,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Fc,
    Pc,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasebandArg {
    Zf,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Pseudorandom,
    Smart,
}

#[derive(Args)]
struct RunArgs {
    /// Scene description (JSON).
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Beam codebook oversampling factor.
    #[arg(long, default_value_t = 1)]
    rho: usize,
    /// RVQ feedback bits per user.
    #[arg(long, conflicts_with = "perfect_csit")]
    bits: Option<u32>,
    /// Skip feedback quantization.
    #[arg(long)]
    perfect_csit: bool,
    #[arg(long, value_enum, default_value = "fc")]
    structure: StructureArg,
    #[arg(long, value_enum, default_value = "zf")]
    baseband: BasebandArg,
    /// Users per slot (multiuser mode).
    #[arg(long)]
    users: Option<usize>,
    /// Scheduling realizations (multiuser mode).
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated target rates in bit/s.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// Write every traced ray to this CSV file.
    #[arg(long)]
    ray_dump: Option<PathBuf>,
    /// Use rays from this CSV file instead of tracing.
    #[arg(long)]
    ray_import: Option<PathBuf>,
    /// Also report (1 - epsilon) scaled throughput.
    #[arg(long)]
    throughput_scaling: bool,
    #[arg(long, default_value_t = 0.05)]
    outage_epsilon: f64,
    /// Serving BS for multiuser mode.
    #[arg(long, default_value_t = 0)]
    serving_bs: usize,
    #[arg(long, value_enum, default_value = "pseudorandom")]
    placement: PlacementArg,
    /// Trucks dropped per traffic realization (single-user mode).
    #[arg(long, default_value_t = 0)]
    trucks: usize,
    #[arg(long)]
    traffic_realizations: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// First run configuration (JSON).
    #[arg(long)]
    a: PathBuf,
    /// Second run configuration (JSON).
    #[arg(long)]
    b: PathBuf,
    /// Output file for the comparison table.
    #[arg(long, default_value = "comparison.json")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig, Failure> {
        let mode = match self.mode {
            ModeArg::Su => Mode::Su,
            ModeArg::Mu => Mode::Mu,
        };
        if let ModeArg::Mu = self.mode {
            if self.users.is_none() {
                return Err(Failure::Usage("--mode mu requires --users".into()));
            }
            if self.realizations.is_none() {
                return Err(Failure::Usage("--mode mu requires --realizations".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        let mut cfg = RunConfig::new(&self.scene, mode);
        cfg.rho = self.rho;
        if mode == Mode::Mu {
            cfg.feedback = Some(match self.bits {
                Some(b) => Feedback::Bits(b),
                None => Feedback::Perfect,
            });
            cfg.structure = Some(match self.structure {
                StructureArg::Fc => Structure::FullyConnected,
                StructureArg::Pc => Structure::PartiallyConnected,
            });
            cfg.baseband = match self.baseband {
                BasebandArg::Zf => Baseband::ZeroForcing,
                BasebandArg::Identity => Baseband::Identity,
            };
            cfg.users = self.users;
            cfg.realizations = self.realizations;
            cfg.serving_bs = self.serving_bs;
            cfg.max_codebook_bits = max_codebook_bits_from_env();
        }
        cfg.seed = self.seed;
        cfg.targets = self.targets.clone().unwrap_or_else(|| DEFAULT_TARGETS.to_vec());
        cfg.placement = match self.placement {
            PlacementArg::Pseudorandom => Placement::Pseudorandom,
            PlacementArg::Smart => Placement::Smart,
        };
        cfg.trucks = self.trucks;
        cfg.traffic_realizations = self.traffic_realizations;
        cfg.outage_epsilon = self.outage_epsilon;
        cfg.throughput_scaling = self.throughput_scaling;
        cfg.ray_dump = self.ray_dump.clone();
        cfg.ray_import = self.ray_import.clone();
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<serde_json::Value, Failure> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.to_config()?;
            let summary = pipeline::run(&cfg, &args.out, args.threads)?;
            Ok(json!({
                "config_hash": summary.config_hash,
                "artifacts": summary.artifacts,
            }))
        }
        Command::Compare(args) => {
            if args.threads == Some(0) {
                return Err(Failure::Usage("--threads must be >= 1".into()));
            }
            let a = pipeline::load_run_config(&args.a)?;
            let b = pipeline::load_run_config(&args.b)?;
            let cmp = pipeline::compare(&a, &b, args.threads)?;
            pipeline::write_comparison(&args.out, &cmp)?;
            Ok(json!({ "comparison": args.out, "delta": cmp.delta }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({"error": "usage", "message": e.to_string().trim()}));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(message)) => {
            eprintln!("{}", json!({"error": "usage", "message": message}));
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
