//! Command-line front end for the quantum stochastic walk simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 light-cone truncation
//! guard violation, 4 numerical-accuracy failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigMap;

#[derive(Debug)]
pub enum CliError {
    /// Invalid or missing configuration; exit code 2.
    Config(String),
    /// Light-cone guard violation; exit code 3.
    Guard(String),
    /// Numerical accuracy or convergence failure; exit code 4.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Guard(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl From<qswalk_core::Error> for CliError {
    fn from(e: qswalk_core::Error) -> Self {
        match e {
            qswalk_core::Error::TruncationGuard { .. } => CliError::Guard(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qswalk",
    version,
    about = "Quantum stochastic walks on a line: evolution, closed forms, and scaling exponents"
)]
struct Cli {
    /// Flat TOML config file; command-line flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output CSV path (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (defaults to the available cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Reserved for future stochastic features; the dynamics here are
    /// deterministic and this flag is ignored.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonOverrides {
    /// Vertex count.
    #[arg(long)]
    n: Option<i64>,
    /// Initial vertex label.
    #[arg(long)]
    l: Option<i64>,
    /// Interpolation between coherent (0) and dissipative (1) dynamics.
    #[arg(long)]
    omega: Option<f64>,
    /// Dissipator kind: global | local.
    #[arg(long)]
    dissipator: Option<String>,
    /// Propagation route: auto | dense | eigen | taylor.
    #[arg(long)]
    method: Option<String>,
    /// First grid time.
    #[arg(long)]
    t_min: Option<f64>,
    /// Last grid time.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    t_steps: Option<i64>,
    /// Grid spacing: linear | log.
    #[arg(long)]
    t_spacing: Option<String>,
}

impl CommonOverrides {
    fn apply(&self, cfg: &mut ConfigMap) {
        cfg.set_i64("n", self.n);
        cfg.set_i64("l", self.l);
        cfg.set_f64("omega", self.omega);
        cfg.set_string("dissipator", self.dissipator.as_deref());
        cfg.set_string("method", self.method.as_deref());
        cfg.set_f64("t_min", self.t_min);
        cfg.set_f64("t_max", self.t_max);
        cfg.set_i64("t_steps", self.t_steps);
        cfg.set_string("t_spacing", self.t_spacing.as_deref());
    }
}

#[derive(Subcommand)]
enum Command {
    /// Numerically evolve the walker and emit site probabilities and purity.
    Evolve {
        #[command(flatten)]
        common: CommonOverrides,
        /// Graph family: segment | line.
        #[arg(long)]
        graph: Option<String>,
    },
    /// Closed-form distributions (segment, asymptotic, line).
    Analytic {
        #[command(flatten)]
        common: CommonOverrides,
        /// segment | segment_asymptotic | line_quadrature | line_series.
        #[arg(long)]
        mode: Option<String>,
        /// Largest |k| emitted for line modes.
        #[arg(long)]
        k_max: Option<i64>,
        /// Nodes per quadrature axis (defaults to a t-dependent rule).
        #[arg(long)]
        quadrature_nodes: Option<i64>,
        /// Relative series truncation tolerance.
        #[arg(long)]
        series_tol: Option<f64>,
        /// Series validity cutoff in t.
        #[arg(long)]
        series_max_t: Option<f64>,
    },
    /// Fit the asymptotic scaling exponent of the second moment per omega.
    Alpha {
        #[command(flatten)]
        common: CommonOverrides,
        /// Comma-separated omega list, e.g. 0.1,0.5,0.9.
        #[arg(long, value_delimiter = ',')]
        omegas: Option<Vec<f64>>,
        /// Fit window lower bound (defaults to the grid midpoint).
        #[arg(long)]
        window_lo: Option<f64>,
        /// Fit window upper bound (defaults to the last grid time).
        #[arg(long)]
        window_hi: Option<f64>,
        /// Half-width of the regime classification bands.
        #[arg(long)]
        regime_tol: Option<f64>,
    },
    /// Purity of the final state across an omega grid.
    PuritySweep {
        #[command(flatten)]
        common: CommonOverrides,
        /// Graph family: segment | line.
        #[arg(long)]
        graph: Option<String>,
        /// Evolution time.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        omega_steps: Option<i64>,
        /// Also write a line plot to this path.
        #[arg(long)]
        svg: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = ConfigMap::load(cli.config.as_deref())?;
    let out = cli.out.as_deref();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;

    pool.install(|| match cli.command {
        Command::Evolve { common, graph } => {
            common.apply(&mut cfg);
            cfg.set_string("graph", graph.as_deref());
            commands::cmd_evolve(cfg, out)
        }
        Command::Analytic {
            common,
            mode,
            k_max,
            quadrature_nodes,
            series_tol,
            series_max_t,
        } => {
            common.apply(&mut cfg);
            cfg.set_string("mode", mode.as_deref());
            cfg.set_i64("k_max", k_max);
            cfg.set_i64("quadrature_nodes", quadrature_nodes);
            cfg.set_f64("series_tol", series_tol);
            cfg.set_f64("series_max_t", series_max_t);
            commands::cmd_analytic(cfg, out)
        }
        Command::Alpha {
            common,
            omegas,
            window_lo,
            window_hi,
            regime_tol,
        } => {
            common.apply(&mut cfg);
            if let Some(list) = omegas {
                cfg.set(
                    "omegas",
                    toml::Value::Array(list.into_iter().map(toml::Value::Float).collect()),
                );
            }
            cfg.set_f64("window_lo", window_lo);
            cfg.set_f64("window_hi", window_hi);
            cfg.set_f64("regime_tol", regime_tol);
            commands::cmd_alpha(cfg, out)
        }
        Command::PuritySweep {
            common,
            graph,
            t,
            omega_min,
            omega_max,
            omega_steps,
            svg,
        } => {
            common.apply(&mut cfg);
            cfg.set_string("graph", graph.as_deref());
            cfg.set_f64("t", t);
            cfg.set_f64("omega_min", omega_min);
            cfg.set_f64("omega_max", omega_max);
            cfg.set_i64("omega_steps", omega_steps);
            cfg.set_string("svg", svg.as_deref());
            commands::cmd_purity_sweep(cfg, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = cli.seed; // reserved
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
