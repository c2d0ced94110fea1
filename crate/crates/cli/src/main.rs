use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coalsim::check::run_checks;
use coalsim::config::{ConfigError, ExperimentConfig, ExperimentKind};
use coalsim::experiments::{
    run_alpha_sweep, run_eight_sensor_game, run_gafi_vs_rho, run_gkld_vs_tau, ExperimentError,
    RunOptions,
};

/// Default output directory environment variable.
const OUT_DIR_ENV: &str = "COALSIM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "coalsim",
    version,
    about = "Copula-based coalition formation simulator for sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dependence-induced Fisher information of a sensor pair vs correlation.
    GafiCurve(RunArgs),
    /// Dependence-induced KLD of a sensor pair vs Kendall's tau per copula family.
    GkldCurve(RunArgs),
    /// Merge-and-split game on the configured (default eight-sensor) network.
    EightSensor(RunArgs),
    /// Budget sweep comparing the game against the random baseline.
    AlphaSweep(RunArgs),
    /// Run the invariant suite against a config's network.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's output_dir, then
    /// $COALSIM_OUT_DIR, then the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trial parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Skip SVG plot emission.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

fn resolve_options(cfg: &ExperimentConfig, args: &RunArgs) -> RunOptions {
    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    RunOptions {
        out_dir,
        seed_override: args.seed,
        threads: args.threads,
        write_svg: !args.no_svg,
    }
}

fn load_for(args: &RunArgs, kind: ExperimentKind) -> Result<ExperimentConfig, ConfigError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    cfg.expect_experiment(kind)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), (i32, String)> {
    let config_err = |e: ConfigError| (2, e.to_string());
    let experiment_err = |e: ExperimentError| (e.exit_code(), e.to_string());
    match cli.command {
        Command::GafiCurve(args) => {
            let cfg = load_for(&args, ExperimentKind::GafiVsRho).map_err(config_err)?;
            let opts = resolve_options(&cfg, &args);
            let out = run_gafi_vs_rho(&cfg, &opts).map_err(experiment_err)?;
            println!(
                "gafi-curve: {} rows -> {}",
                out.summary.rhos.len(),
                out.out_dir.display()
            );
        }
        Command::GkldCurve(args) => {
            let cfg = load_for(&args, ExperimentKind::GkldVsTau).map_err(config_err)?;
            let opts = resolve_options(&cfg, &args);
            let out = run_gkld_vs_tau(&cfg, &opts).map_err(experiment_err)?;
            for curve in &out.summary.curves {
                match curve.tau_star {
                    Some(t) => println!("gkld-curve: {} sign change near tau={t:.4}", curve.family),
                    None => println!("gkld-curve: {} has no sign change", curve.family),
                }
            }
            println!("gkld-curve: wrote {}", out.out_dir.display());
        }
        Command::EightSensor(args) => {
            let cfg = load_for(&args, ExperimentKind::EightSensorGame).map_err(config_err)?;
            let opts = resolve_options(&cfg, &args);
            let out = run_eight_sensor_game(&cfg, &opts).map_err(experiment_err)?;
            println!(
                "eight-sensor: {} operations, final sizes {:?}, stable = {}",
                out.summary.operations, out.summary.final_sizes, out.summary.dhp_stable
            );
            println!("eight-sensor: wrote {}", out.out_dir.display());
        }
        Command::AlphaSweep(args) => {
            let cfg = load_for(&args, ExperimentKind::AlphaSweep).map_err(config_err)?;
            let opts = resolve_options(&cfg, &args);
            let out = run_alpha_sweep(&cfg, &opts).map_err(experiment_err)?;
            println!(
                "alpha-sweep: {} trials ({} excluded) over {} budgets",
                out.summary.trials,
                out.summary.excluded_trials,
                out.summary.alphas.len()
            );
            println!("alpha-sweep: wrote {}", out.out_dir.display());
        }
        Command::Check(args) => {
            let cfg = ExperimentConfig::load(&args.config).map_err(config_err)?;
            let report = run_checks(&cfg, args.seed).map_err(experiment_err)?;
            for (name, ok, detail) in &report.lines {
                if *ok {
                    println!("ok   {name}");
                } else {
                    println!("FAIL {name}: {detail}");
                }
            }
            if !report.all_passed() {
                return Err((3, "invariant checks failed".to_string()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
