use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thz_irs::cli::{
    absorption_sweep, draw_ues, load_config, run_algorithm, run_experiment, Algorithm, SeedRange,
};
use thz_irs::Error;

#[derive(Parser)]
#[command(name = "plan", version, about = "Plan IRS placement, phases and sub-bands for a THz downlink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Absorption coefficient and cascaded gain over 200-400 GHz.
    AbsorptionSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and print the solution as JSON.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "bcs")]
        algo: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of UEs to draw; defaults to the first configured count.
        #[arg(long)]
        ues: Option<usize>,
    },
    /// Run every configured algorithm over a seed range.
    MonteCarlo {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive range such as `1..20`; defaults to the configured seeds.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Record per-run wall-clock time (makes the CSVs non-reproducible).
        #[arg(long)]
        wallclock: bool,
    },
    /// Print the sub-band plan the configuration resolves to.
    BandPlan {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::Numeric(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::AbsorptionSweep { config, out } => {
            let cfg = load_config(&config)?;
            absorption_sweep(&cfg, &out)
        }
        Command::Optimize { config, algo, seed, ues } => {
            let cfg = load_config(&config)?;
            let algo = Algorithm::parse(&algo)?;
            let positions = match (&cfg.ue_positions, ues) {
                (Some(p), None) => p.clone(),
                (_, Some(u)) if u > 0 => draw_ues(&cfg, seed, u),
                (_, Some(_)) => return Err(Error::Config("--ues must be positive".into())),
                (None, None) => draw_ues(&cfg, seed, cfg.ue_counts[0]),
            };
            let instance = cfg.instance(positions)?;
            let solution = run_algorithm(&cfg, &instance, algo, seed)?;
            let json = serde_json::to_string_pretty(&solution).map_err(|e| Error::Io(e.to_string()))?;
            println!("{json}");
            if solution.feasible {
                Ok(())
            } else {
                Err(Error::Infeasible("no placement meets every rate requirement".into()))
            }
        }
        Command::MonteCarlo { config, seeds, out, wallclock } => {
            let cfg = load_config(&config)?;
            let seeds = match seeds {
                Some(s) => SeedRange::parse(&s)?,
                None => cfg.seeds,
            };
            let report = run_experiment(&cfg, seeds, wallclock)?;
            report.write_all(&out)?;
            for a in &report.aggregates {
                eprintln!(
                    "{:8} U={} mean={:.6e} std={:.3e} feasible={}/{}",
                    a.algo.name(),
                    a.ue_count,
                    a.mean_sum_rate_bps,
                    a.std_sum_rate_bps,
                    a.feasible_runs,
                    a.runs
                );
            }
            Ok(())
        }
        Command::BandPlan { config } => {
            let cfg = load_config(&config)?;
            let medium = cfg.medium()?;
            println!("center_hz,bandwidth_hz,K_per_m");
            for b in cfg.sub_bands()? {
                println!("{},{},{}", b.center_hz, b.bandwidth_hz, medium.absorption(b.center_hz)?);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plan: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
