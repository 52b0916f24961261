//! `smgee` command line.
//!
//! Exit status: 0 on success, 1 for usage, config or I/O errors, 2 when the
//! numerical machinery fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::SystemConfig;
use crate::error::Error;
use crate::experiments::{joint_rows, problem_from_config, run_fixed_k_sweep, ExperimentResult};
use crate::rate::{read_gain_cache, sample_gains, write_gain_cache, GainSampleSet};
use crate::solver::{algorithm1, algorithm2, grid_oracle, GeeSolution, ALGORITHM2_DEFAULT_EPSILON};

/// Environment variable naming the directory for outputs without `--out`.
pub const OUT_DIR_ENV: &str = "SMGEE_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

const DEFAULT_GRID_POINTS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "smgee", version, about = "Energy-efficiency optimization for mmWave MIMO with spatial modulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output CSV path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also run the brute-force grid oracle.
    #[arg(long, global = true)]
    oracle: bool,

    /// Power grid size of the oracle.
    #[arg(long, global = true)]
    grid_points: Option<usize>,

    /// Worker threads for gain sampling (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Reuse a gain cache written by `sample` instead of resampling.
    #[arg(long, global = true)]
    gains: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Algorithm1,
    Algorithm2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fixed-K sweep: optimal power versus full power for every K.
    Sweep,
    /// Joint (K, ρ) optimization with both algorithms and the max-rate baseline.
    Joint,
    /// Solve one problem and print the solution.
    Solve {
        #[arg(long, value_enum, default_value = "algorithm1")]
        solver: SolverChoice,
    },
    /// Brute-force grid search over K and ρ.
    Oracle,
    /// Draw the gain samples and write them to a cache file.
    Sample,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

fn default_out(name: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(name)
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn on_pool<R: Send>(pool: Option<&rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn load_gains(cli: &Cli, cfg: &SystemConfig, pool: Option<&rayon::ThreadPool>) -> Result<GainSampleSet<f64>, CliError> {
    Ok(match &cli.gains {
        Some(path) => read_gain_cache(path, cfg)?,
        None => on_pool(pool, || sample_gains(cfg))?,
    })
}

fn print_solution(stdout: &mut dyn Write, sol: &GeeSolution<f64>) -> std::io::Result<()> {
    writeln!(
        stdout,
        "{}: K* = {}, rho* = {:.9e} W, GEE = {:.12e} bits/J ({} iterations, {})",
        sol.solver_id,
        sol.k_star,
        sol.rho_star,
        sol.gee,
        sol.trace.len(),
        sol.status.as_str()
    )
}

fn write_solution(out: &Path, sol: &GeeSolution<f64>) -> Result<(), CliError> {
    let mut w = create(out)?;
    sol.write_trace_csv(&mut w)?;
    w.flush()?;
    let mut s = create(&summary_path(out))?;
    sol.write_summary_csv(&mut s)?;
    s.flush()?;
    Ok(())
}

fn execute(cli: &Cli, pool: Option<&rayon::ThreadPool>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => SystemConfig::from_file(path)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let grid_points = cli.grid_points.unwrap_or(DEFAULT_GRID_POINTS);

    match &cli.command {
        Command::Sample => {
            let out = cli.out.clone().unwrap_or_else(|| default_out("gains.csv"));
            let gains = on_pool(pool, || sample_gains::<f64>(&cfg))?;
            write_gain_cache(&gains, &out)?;
            writeln!(stdout, "wrote {} gain samples to {}", gains.len(), out.display())?;
        }
        Command::Solve { solver } => {
            let out = cli.out.clone().unwrap_or_else(|| default_out("solve.csv"));
            let prob = problem_from_config(&cfg, load_gains(cli, &cfg, pool)?)?;
            let sol = match solver {
                SolverChoice::Algorithm1 => algorithm1(&prob)?,
                SolverChoice::Algorithm2 => algorithm2(&prob, prob.rho_max / 2.0, ALGORITHM2_DEFAULT_EPSILON)?,
            };
            print_solution(stdout, &sol)?;
            if cli.oracle {
                let oracle = grid_oracle(&prob, grid_points)?;
                print_solution(stdout, &oracle)?;
                writeln!(stdout, "relative gap to oracle: {:.3e}", (sol.gee - oracle.gee) / oracle.gee)?;
            }
            write_solution(&out, &sol)?;
        }
        Command::Oracle => {
            let out = cli.out.clone().unwrap_or_else(|| default_out("oracle.csv"));
            let prob = problem_from_config(&cfg, load_gains(cli, &cfg, pool)?)?;
            let sol = grid_oracle(&prob, grid_points)?;
            print_solution(stdout, &sol)?;
            write_solution(&out, &sol)?;
        }
        Command::Sweep => {
            let out = cli.out.clone().unwrap_or_else(|| default_out("sweep.csv"));
            let res = on_pool(pool, || run_fixed_k_sweep(&cfg))?;
            let mut w = create(&out)?;
            res.write_csv(&mut w)?;
            w.flush()?;
            writeln!(stdout, "wrote {} rows to {}", res.rows.len(), out.display())?;
        }
        Command::Joint => {
            let out = cli.out.clone().unwrap_or_else(|| default_out("joint.csv"));
            let prob = problem_from_config(&cfg, load_gains(cli, &cfg, pool)?)?;
            let rows = joint_rows(&prob, cli.oracle.then_some(grid_points))?;
            let res = ExperimentResult { rows, config_hash: cfg.config_hash() };
            for r in &res.rows {
                writeln!(stdout, "{:>18}: K = {:>3}, rho = {:.6e} W, GEE = {:.12e} bits/J", r.solver_id, r.k, r.rho_watts, r.gee)?;
            }
            let mut w = create(&out)?;
            res.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn cli_main<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = if code == EXIT_OK { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let pool = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(None),
    };
    let result = pool.and_then(|pool| execute(&cli, pool.as_ref(), stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_VALIDATION
        }
        Err(CliError::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            }
        }
    }
}
