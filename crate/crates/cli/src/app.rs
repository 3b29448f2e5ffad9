use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gravclock::model::{build_blocks, Constants};
use gravclock::observables::{analytic_redshift, analytic_visibility};
use gravclock::quantum::eigensolve_fd;
use gravclock::scenarios::run_scenario;

use crate::output::{emit_result, emit_spectra, RunManifest};
use crate::{config_hash, parse_config, parse_units, read_input, selftest, CliError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "gravclock", version, about = "Quantum clocks in uniform gravity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Lowest bound states of every level block.
    Eigen {
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Closed-form predictions.
    Analytic {
        #[command(subcommand)]
        which: Analytic,
    },
    /// Fast run of the invariant suite.
    Selftest,
}

#[derive(Debug, Subcommand)]
enum Analytic {
    /// Fractional clock shift g·h/c².
    Redshift {
        #[arg(long, allow_hyphen_values = true)]
        height: f64,
        #[command(flatten)]
        units: UnitArgs,
    },
    /// |cos(g·dx·dE·t / 2ħc²)|.
    Visibility {
        #[arg(long)]
        de: f64,
        #[arg(long, allow_hyphen_values = true)]
        dx: f64,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        units: UnitArgs,
    },
}

#[derive(Debug, Args)]
struct UnitArgs {
    /// Neutron in Earth gravity, SI units.
    #[arg(long, conflicts_with_all = ["constants", "c", "g", "hbar", "m"])]
    si: bool,
    /// File with a [units] section.
    #[arg(long, conflicts_with_all = ["c", "g", "hbar", "m"])]
    constants: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Significant digits after the leading one.
    #[arg(long, default_value_t = 4)]
    precision: usize,
}

impl UnitArgs {
    fn resolve(&self) -> Result<Constants, CliError> {
        if self.si {
            return Ok(Constants::si_neutron());
        }
        match &self.constants {
            Some(path) => parse_units(&read_input(path)?),
            None => Ok(Constants::new(self.c, self.g, self.hbar, self.m)?),
        }
    }
}

/// Parses `argv` (program name first), runs the command and maps the outcome
/// to an exit code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gravclock: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Simulate { config, out } => simulate(&config, &out),
        Command::Eigen { config, n, out } => eigen(&config, n, &out),
        Command::Analytic { which } => {
            let (value, precision) = match which {
                Analytic::Redshift { height, units } => (analytic_redshift(height, &units.resolve()?), units.precision),
                Analytic::Visibility { de, dx, t, units } => {
                    (analytic_visibility(de, dx, t, &units.resolve()?), units.precision)
                }
            };
            println!("{value:.precision$e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => Ok(if selftest::run_all() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }),
    }
}

fn simulate(config: &Path, out: &Path) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let cfg = parse_config(&read_input(config)?)?;
    let result = run_scenario(&cfg)?;
    let files = emit_result(&result, cfg.clock.len(), out)?;
    for c in &result.checks {
        println!(
            "[{}] {}: measured {:e}, expected {:e}, deviation {:.3e} (tol {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.expected,
            c.deviation(),
            c.tolerance
        );
    }
    finish(config, out, files, &cfg, started)
}

fn eigen(config: &Path, n: usize, out: &Path) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let cfg = parse_config(&read_input(config)?)?;
    let blocks = build_blocks(&cfg.clock, &cfg.potential, &cfg.constants, &cfg.grid)?;
    let spectra = blocks
        .iter()
        .map(|b| eigensolve_fd(b, n))
        .collect::<gravclock::Result<Vec<_>>>()?;
    let files = emit_spectra(&spectra, &cfg.grid.points(), cfg.grid.dx(), out)?;
    finish(config, out, files, &cfg, started)
}

fn finish(
    config: &Path,
    out: &Path,
    files: Vec<String>,
    cfg: &gravclock::scenarios::ScenarioConfig,
    started: Instant,
) -> Result<ExitCode, CliError> {
    RunManifest {
        config_path: config.to_path_buf(),
        out_dir: out.to_path_buf(),
        files,
        duration_s: started.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
        config_hash: config_hash(cfg),
    }
    .write()?;
    Ok(ExitCode::SUCCESS)
}
