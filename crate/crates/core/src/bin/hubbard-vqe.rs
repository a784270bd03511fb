use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hubbard_vqe::experiment::{plot, run_noise_sweep, run_u_sweep, selftest, ExperimentConfig, SweepOutcome, SweepTable};
use hubbard_vqe::solve::{run_ed, Algorithm};
use hubbard_vqe::Error;

#[derive(Parser)]
#[command(version, about = "Variational ground states of the Hubbard model with broken symmetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML sweep configuration; defaults apply to anything left out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optimizer seed, overriding the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Noiseless sweep over the interaction.
    SweepU(Common),
    /// Sweep over the dephasing rate at fixed interaction.
    SweepNoise(Common),
    /// Exact ground states over the interaction grid.
    Ed(Common),
    /// Redraw the figures of an existing sweep table.
    Plot {
        /// CSV written by a sweep.
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quick consistency checks.
    Selftest,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(Error),
    Partial(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), Failure> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.optimizer.seed = seed;
    }
    config.validate()?;
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output));
    Ok((config, out))
}

fn finish(outcome: SweepOutcome, config: &ExperimentConfig, out: &Path, name: &str) -> Result<(), Failure> {
    let csv = out.join(format!("{name}.csv"));
    outcome.table.write(&csv)?;
    std::fs::write(out.join(format!("{name}.toml")), config.to_toml()?).map_err(Error::from)?;
    println!("wrote {}", csv.display());
    match plot::figures(&outcome.table, out) {
        Ok(paths) => paths.iter().for_each(|p| println!("wrote {}", p.display())),
        Err(e) => log::warn!("no figures: {e}"),
    }
    if outcome.failures > 0 {
        return Err(Failure::Partial(format!("{} of {} rows failed", outcome.failures, outcome.table.rows.len())));
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::SweepU(common) => {
            let (config, out) = load(&common)?;
            finish(run_u_sweep(&config)?, &config, &out, "u_sweep")
        }
        Command::SweepNoise(common) => {
            let (config, out) = load(&common)?;
            finish(run_noise_sweep(&config)?, &config, &out, "noise_sweep")
        }
        Command::Ed(common) => {
            let (mut config, out) = load(&common)?;
            config.algorithms = vec![Algorithm::Ed];
            println!("{:>8} {:>16} {:>10} {:>10}", "U", "energy", "m_af", "delta_s");
            for &u in &config.u_grid {
                let ed = run_ed(&config.lattice.spec(u, config.field_schedule))?;
                println!("{u:>8.3} {:>16.10} {:>10.5} {:>10.5}", ed.energy, ed.m_af, ed.delta_s);
            }
            finish(run_u_sweep(&config)?, &config, &out, "ed")
        }
        Command::Plot { csv, out } => {
            let table = SweepTable::read(&csv)?;
            let dir = out.unwrap_or_else(|| csv.parent().map(Path::to_path_buf).unwrap_or_default());
            for p in plot::figures(&table, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(Failure::Partial(format!("{n} checks failed"))),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
