//! Command-line front end: monodromy and index queries, degeneracy curves,
//! trace-formula bounds, stability atlases and the Robe z-axis mapping,
//! with CSV/JSON datasets and standalone SVG plots.

pub mod commands;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use floquet_atlas::atlas::DEFAULT_SWEEP_E_MAX;
use floquet_atlas::hamiltonian::DEFAULT_ODE_TOL;
use floquet_atlas::spectral::{DEFAULT_HALF_BANDWIDTH, DEFAULT_ZERO_TOL};
use floquet_atlas::DEFAULT_E_MAX;
use num_complex::Complex64;

use crate::output::Format;

/// Process exit status classes.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Consistency(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Consistency(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 3,
        }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        Failure::Io(e.to_string())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Consistency(m) => write!(f, "consistency violation: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl From<floquet_atlas::Error> for Failure {
    fn from(e: floquet_atlas::Error) -> Self {
        use floquet_atlas::Error::*;
        match e {
            InvalidParameter(_)
            | EccOutOfRange(_)
            | NotOnUnitCircle { .. }
            | NearSingularity { .. }
            | CurveRangeExceeded { .. } => Failure::Usage(e.to_string()),
            ConsistencyViolation { .. } => Failure::Consistency(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "floquet-atlas", version, about = "Linear stability atlas of β/(1 + e cos t) Hill operators")]
pub struct Cli {
    /// ODE tolerance for monodromy computations.
    #[arg(long, global = true, default_value_t = DEFAULT_ODE_TOL)]
    pub tol: f64,
    /// Output file (or directory for verify-all); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Accepted for scripting; the pipeline has no random state.
    #[arg(long, global = true)]
    pub seedless: bool,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format.unwrap_or(Format::Csv)
        }
    }
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Monodromy matrix, normal form and stability verdict.
    #[command(allow_negative_numbers = true)]
    Monodromy {
        #[arg(long)]
        beta: f64,
        #[arg(long = "e")]
        e: f64,
    },
    /// ω-index and nullity with cross-checks against the monodromy.
    #[command(allow_negative_numbers = true)]
    Index {
        #[arg(long)]
        beta: f64,
        #[arg(long = "e")]
        e: f64,
        /// `1`, `-1`, `i`, `-i`, or an angle such as `1.2rad`.
        #[arg(long, default_value = "-1", value_parser = parse_omega, allow_hyphen_values = true)]
        omega: Complex64,
        #[arg(long, default_value_t = DEFAULT_HALF_BANDWIDTH)]
        modes: usize,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        zero_tol: f64,
    },
    /// The two −1-degeneracy curves and their tangents at e = 0.
    Curves {
        #[arg(long, env = "FLOQUET_ATLAS_EMAX", default_value_t = DEFAULT_E_MAX)]
        e_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Also write an SVG plot here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Eccentricity bounds certified elliptic by the trace formula.
    Bounds {
        #[arg(long, default_value_t = 200)]
        beta_steps: usize,
        /// One of thm13_low, thm13_high, thm33_low, thm33_high, conservative_min (default: all).
        #[arg(long)]
        variant: Option<String>,
        /// Check ellipticity of the monodromy below the conservative curve.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Verified stability atlas over [0, 1] × [0, e_max].
    Atlas {
        /// Grid as `<n_beta>x<n_e>`.
        #[arg(long, default_value = "101x50", value_parser = parse_resolution)]
        res: (usize, usize),
        #[arg(long, default_value_t = DEFAULT_SWEEP_E_MAX)]
        e_max: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Stability of the z-axis equilibrium of the Robe problem (β = 1 − μ).
    #[command(allow_negative_numbers = true)]
    Robe {
        #[arg(long)]
        mu: f64,
        #[arg(long = "e")]
        e: f64,
        #[arg(long, env = "FLOQUET_ATLAS_EMAX", default_value_t = DEFAULT_E_MAX)]
        e_max: f64,
    },
    /// Runs every check and writes all datasets and plots to `--out`.
    VerifyAll {
        #[arg(long, default_value = "101x50", value_parser = parse_resolution)]
        res: (usize, usize),
        #[arg(long, default_value_t = 50)]
        curve_steps: usize,
        #[arg(long, default_value_t = 100)]
        beta_steps: usize,
    },
}

pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected <n_beta>x<n_e>, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let res = (parse(a)?, parse(b)?);
    if res.0 < 2 || res.1 < 2 {
        return Err(format!("resolution {s} below 2x2"));
    }
    Ok(res)
}

pub fn parse_omega(s: &str) -> Result<Complex64, String> {
    match s.trim() {
        "1" | "+1" => Ok(Complex64::new(1.0, 0.0)),
        "-1" => Ok(Complex64::new(-1.0, 0.0)),
        "i" | "+i" => Ok(Complex64::new(0.0, 1.0)),
        "-i" => Ok(Complex64::new(0.0, -1.0)),
        other => other
            .strip_suffix("rad")
            .and_then(|a| a.trim().parse::<f64>().ok())
            .map(|a| Complex64::from_polar(1.0, a))
            .ok_or_else(|| format!("omega must be 1, -1, i, -i or <angle>rad, got {other:?}")),
    }
}


pub fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match &cli.command {
        Command::Monodromy { beta, e } => commands::monodromy(cli, *beta, *e),
        Command::Index { beta, e, omega, modes, zero_tol } => commands::index(cli, *beta, *e, *omega, *modes, *zero_tol),
        Command::Curves { e_max, steps, svg } => commands::curves(cli, *e_max, *steps, svg.as_deref()),
        Command::Bounds { beta_steps, variant, verify, svg } => {
            commands::bounds(cli, *beta_steps, variant.as_deref(), *verify, svg.as_deref())
        }
        Command::Atlas { res, e_max, svg } => commands::atlas(cli, *res, *e_max, svg.as_deref()),
        Command::Robe { mu, e, e_max } => commands::robe(cli, *mu, *e, *e_max),
        Command::VerifyAll { res, curve_steps, beta_steps } => commands::verify_all(cli, *res, *curve_steps, *beta_steps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_match_library() {
        assert_eq!(parse_resolution("101x50").unwrap(), floquet_atlas::atlas::DEFAULT_RESOLUTION);
        let cli = Cli::try_parse_from(["floquet-atlas", "atlas"]).unwrap();
        assert_eq!(cli.tol, DEFAULT_ODE_TOL);
        match cli.command {
            Command::Atlas { res, e_max, .. } => {
                assert_eq!(res, floquet_atlas::atlas::DEFAULT_RESOLUTION);
                assert_eq!(e_max, DEFAULT_SWEEP_E_MAX);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn omega_parsing() {
        assert_eq!(parse_omega("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_omega("i").unwrap(), Complex64::new(0.0, 1.0));
        assert!((parse_omega("3.141592653589793rad").unwrap() + 1.0).norm() < 1e-15);
        assert!(parse_omega("2").is_err());
        assert!(parse_resolution("1x5").is_err());
        assert!(parse_resolution("10by5").is_err());
    }
}
