//! Assemble, verify and time the dense, H², distributed and shared variants
//! on the sphere.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 verification
//! failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use h2dist::config::{FanOutChoice, KernelChoice, RunConfig, Variant};
use h2dist::outline::{dump_json, dump_text, trees_for};
use h2dist::runner::{execute, sweep, verify, Axis};
use h2dist::BenchError;

#[derive(Parser)]
#[command(name = "bench", version, about = "H²-matrix compression of Galerkin BEM matrices on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its report as JSON.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Report path; stdout when absent.
        #[arg(long, env = "H2DIST_OUT")]
        out: Option<PathBuf>,
    },
    /// Run a configuration for several values of one parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
        /// Path stem; writes `<out>.csv` and `<out>.json`. The CSV table goes
        /// to stdout when absent.
        #[arg(long, env = "H2DIST_OUT")]
        out: Option<PathBuf>,
    },
    /// Print the cluster trees of a configuration.
    DumpTrees {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, env = "H2DIST_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Every setting may come from a flag, an `H2DIST_*` variable or the config
/// file, in that order of precedence.
#[derive(Args)]
struct ConfigArgs {
    /// TOML file with any of the settings below (kebab-case keys).
    #[arg(long, env = "H2DIST_CONFIG")]
    config: Option<PathBuf>,
    /// Sphere refinement level; the mesh has 8·4^level triangles.
    #[arg(long, env = "H2DIST_LEVEL")]
    level: Option<u32>,
    #[arg(long, env = "H2DIST_KERNEL", value_enum)]
    kernel: Option<KernelChoice>,
    /// Helmholtz wavenumber.
    #[arg(long, env = "H2DIST_KAPPA")]
    kappa: Option<f64>,
    /// Interpolation order per direction.
    #[arg(long, env = "H2DIST_M")]
    m: Option<usize>,
    /// Admissibility parameter.
    #[arg(long, env = "H2DIST_ETA")]
    eta: Option<f64>,
    #[arg(long, env = "H2DIST_LEAF_LIMIT")]
    leaf_limit: Option<usize>,
    /// Simulated nodes.
    #[arg(long, env = "H2DIST_P")]
    p: Option<usize>,
    #[arg(long, env = "H2DIST_VARIANT", value_enum)]
    variant: Option<Variant>,
    /// How the shared variant forwards children within shareholder sets.
    #[arg(long, env = "H2DIST_FAN_OUT", value_enum)]
    fan_out: Option<FanOutChoice>,
    #[arg(long, env = "H2DIST_SEED")]
    seed: Option<u64>,
    /// Random vectors to multiply.
    #[arg(long, env = "H2DIST_VECTORS")]
    vectors: Option<usize>,
    /// Timed repetitions (at least 3).
    #[arg(long, env = "H2DIST_REPEATS")]
    repeats: Option<usize>,
    #[arg(long, env = "H2DIST_VERIFY_DENSE", action = ArgAction::SetTrue)]
    verify_dense: bool,
    #[arg(long, env = "H2DIST_VERIFY_SEQUENTIAL", action = ArgAction::SetTrue)]
    verify_sequential: bool,
    /// Bound on the relative error against the dense matrix.
    #[arg(long, env = "H2DIST_DENSE_TOL")]
    dense_tol: Option<f64>,
    /// Bound on the relative error against the sequential H²-matrix.
    #[arg(long, env = "H2DIST_SEQUENTIAL_TOL")]
    sequential_tol: Option<f64>,
    /// Threads for matrix assembly.
    #[arg(long, env = "H2DIST_THREADS")]
    threads: Option<usize>,
    /// Lift the size guards on meshes and dense matrices.
    #[arg(long, env = "H2DIST_ALLOW_LARGE", action = ArgAction::SetTrue)]
    allow_large: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, BenchError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        take!(level, kernel, kappa, m, eta, leaf_limit, p, variant, fan_out, seed, vectors, repeats, dense_tol, sequential_tol);
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.verify_dense |= self.verify_dense;
        c.verify_sequential |= self.verify_sequential;
        c.allow_large |= self.allow_large;
        c.validate()?;
        Ok(c)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), BenchError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn main_inner(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = config.resolve()?;
            let report = execute(&cfg)?;
            emit(out.as_deref(), &report.to_json())?;
            verify(&report)
        }
        Command::Sweep { config, axis, values, out } => {
            let cfg = config.resolve()?;
            let table = sweep(&cfg, axis, &values)?;
            match out {
                Some(stem) => {
                    std::fs::write(with_extension(&stem, "csv"), table.to_csv())?;
                    std::fs::write(with_extension(&stem, "json"), table.to_json())?;
                }
                None => emit(None, &table.to_csv())?,
            }
            Ok(())
        }
        Command::DumpTrees { config, format, out } => {
            let trees = trees_for(&config.resolve()?)?;
            let text = match format {
                Format::Text => dump_text(&trees),
                Format::Json => dump_json(&trees),
            };
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
