//! `bergman`: reports for the coherent-state quantization toolkit.
//!
//! Exit codes: 0 success, 1 invalid configuration or input, 2 a check
//! failed under `--strict` or a computation could not complete.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use bergman_core::qft::{FieldParams, Regulator};
use clap::{Args, Parser, Subcommand};

use crate::commands::*;
use crate::config::{check_range, ConfigError, FileConfig, Grid};
use crate::report::{Format, Report};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "BERGMAN_OUT_DIR";

#[derive(Parser)]
#[command(name = "bergman", version, about = "Quantized Bergman ball: checks and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report files (default: $BERGMAN_OUT_DIR, else stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long)]
    format: Option<Format>,
    /// RNG seed (default 42).
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with status 2 when any residual exceeds its bound.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Metric, curvature and measure normalisation on the ball.
    Geometry {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Cartan round-trips, Haar density and structure constants.
    Decompose {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        scale: Option<f64>,
        /// Comma-separated rapidities.
        #[arg(long)]
        t: Option<Grid>,
        #[command(flatten)]
        common: Common,
    },
    /// Oscillator representation: brackets, Bogolyubov, ω₀, su(2,2).
    RepCheck {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long = "P")]
        p: Option<usize>,
        #[arg(long)]
        t: Option<Grid>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Coherent-state symbols and the coordinate star product.
    Star {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        t: Option<f64>,
        /// Also fit the 1/N deformation coefficients over N = 4..40.
        #[arg(long)]
        fit: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Discrete spectrum of the invariant Laplacian (CSV by default).
    Spectrum {
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Regulated one-loop tadpole sum.
    Tadpole {
        #[arg(long)]
        mu2: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long = "lambda-c")]
        lambda_c: Option<f64>,
        #[arg(long = "Lambda")]
        cutoff: Option<u32>,
        #[arg(long)]
        eps: Option<f64>,
        /// lower_cutoff or mass_shift.
        #[arg(long)]
        regulator: Option<Regulator>,
        /// Run the cutoff and ε scans.
        #[arg(long)]
        scan: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Map from analytic statements to operations, with measured conventions.
    Concordance {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] bergman_core::Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    fn exit_code(&self) -> u8 {
        use bergman_core::Error as E;
        match self {
            RunError::Config(_) => 1,
            RunError::Core(
                E::InvalidInput(_)
                | E::OutsideDomain { .. }
                | E::CutoffTooLarge { .. }
                | E::DimensionMismatch { .. }
                | E::NormalizationUnknown { .. },
            ) => 1,
            RunError::Core(_) | RunError::Io(_) => 2,
        }
    }
}

struct Settings {
    file: FileConfig,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
    strict: bool,
}

impl Settings {
    fn resolve(c: &Common) -> Result<Self, ConfigError> {
        let file = match &c.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let out = match &c.out {
            Some(p) => Some(p.clone()),
            None => file.raw("out").map(PathBuf::from).or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)),
        };
        Ok(Self {
            seed: file.pick_or(c.seed, "seed", 42)?,
            format: file.pick(c.format, "format")?,
            strict: file.switch(c.strict, "strict")?,
            out,
            file,
        })
    }
}

fn default_grid() -> Vec<f64> {
    (1..=10).map(|k| 0.1 * k as f64).collect()
}

fn grid_in(key: &str, g: Vec<f64>, lo: f64, hi: f64) -> Result<Vec<f64>, ConfigError> {
    for &v in &g {
        check_range(key, v, lo, hi)?;
    }
    Ok(g)
}

fn run(command: Command) -> Result<(Report, Settings, Format), RunError> {
    let (report, settings, default_format) = match command {
        Command::Geometry { m, n, points, samples, common } => {
            let s = Settings::resolve(&common)?;
            let a = GeometryArgs {
                m: check_range("m", s.file.pick_or(m, "m", 2)?, 1, 3)?,
                n: check_range("N", s.file.pick_or(n, "N", 4)?, 3, 64)?,
                points: check_range("points", s.file.pick_or(points, "points", 50)?, 1, 100_000)?,
                samples: check_range("samples", s.file.pick_or(samples, "samples", 200_000)?, 1_000, 50_000_000)?,
            };
            (geometry(&a, s.seed)?, s, Format::Json)
        }
        Command::Decompose { count, scale, t, common } => {
            let s = Settings::resolve(&common)?;
            let t_grid =
                s.file.pick(t, "t")?.map(|g| g.0).unwrap_or_else(|| (0..=50).map(|k| 0.1 * k as f64).collect());
            let a = DecomposeArgs {
                count: check_range("count", s.file.pick_or(count, "count", 100)?, 1, 1_000_000)?,
                scale: check_range("scale", s.file.pick_or(scale, "scale", 1.0)?, 1e-6, 5.0)?,
                t_grid: grid_in("t", t_grid, 0.0, 20.0)?,
            };
            (decompose(&a, s.seed)?, s, Format::Json)
        }
        Command::RepCheck { n, p, t, tol, common } => {
            let s = Settings::resolve(&common)?;
            let t_grid = s.file.pick(t, "t")?.map(|g| g.0).unwrap_or_else(default_grid);
            let a = RepCheckArgs {
                n: check_range("N", s.file.pick_or(n, "N", 4)?, 3, 12)?,
                p: check_range("P", s.file.pick_or(p, "P", 8)?, 1, 12)?,
                t_grid: grid_in("t", t_grid, 0.0, 1.0)?,
                tol: check_range("tol", s.file.pick_or(tol, "tol", 1e-13)?, 1e-15, 1e-6)?,
            };
            (rep_check(&a)?, s, Format::Json)
        }
        Command::Star { n, t, fit, common } => {
            let s = Settings::resolve(&common)?;
            let a = StarArgs {
                n: check_range("N", s.file.pick_or(n, "N", 8)?, 3, 60)?,
                t: check_range("t", s.file.pick_or(t, "t", 0.3)?, 0.0, 1.0)?,
                fit: s.file.switch(fit, "fit")?,
            };
            (star(&a, s.seed)?, s, Format::Json)
        }
        Command::Spectrum { n, m, common } => {
            let s = Settings::resolve(&common)?;
            let a = SpectrumArgs {
                n: check_range("N", s.file.pick_or(n, "N", 10)?, 3, 200)?,
                m: check_range("m", s.file.pick_or(m, "m", 2)?, 1, 3)?,
            };
            (spectrum(&a)?, s, Format::Csv)
        }
        Command::Tadpole { mu2, xi, lambda_c, cutoff, eps, regulator, scan, common } => {
            let s = Settings::resolve(&common)?;
            let xi = s.file.pick_or(xi, "xi", 0.0)?;
            let params = FieldParams::new(
                s.file.pick_or(mu2, "mu2", 3.0 * xi)?,
                xi,
                s.file.pick_or(lambda_c, "lambda_c", 1.0)?,
                check_range("Lambda", s.file.pick_or(cutoff, "Lambda", 50)?, 3, 10_000_000)?,
                s.file.pick_or(eps, "eps", 0.1)?,
            )?;
            let a = TadpoleArgs {
                params,
                regulator: s.file.pick_or(regulator, "regulator", Regulator::LowerCutoff)?,
                scan: s.file.switch(scan, "scan")?,
            };
            (tadpole(&a)?, s, Format::Json)
        }
        Command::Concordance { common } => {
            let s = Settings::resolve(&common)?;
            (concordance()?, s, Format::Json)
        }
    };
    let format = settings.format.unwrap_or(default_format);
    Ok((report, settings, format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (report, settings, format) = match run(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Err(e) = report.emit(format, settings.seed, settings.out.as_deref()) {
        eprintln!("error: {}", RunError::from(e));
        return ExitCode::from(2);
    }
    let failed = report.failed_checks();
    for c in &failed {
        eprintln!("check failed: {} = {:.3e} (bound {:.1e})", c.name, c.value, c.bound);
    }
    if settings.strict && !failed.is_empty() {
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
