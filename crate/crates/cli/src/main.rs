//! Command-line front end for the rattling laboratory.
//!
//! Every run resolves into a single [`config::RunConfig`]: a command with
//! fully typed parameters plus an output directory. Parameters come from
//! command-line flags, an optional TOML config file, and built-in defaults,
//! in that order of precedence. The resolved configuration can be written
//! back out with `--dump-config`; feeding that dump to `--config` reproduces
//! the run exactly, and identical configurations produce byte-identical
//! artifacts.
//!
//! Exit codes: 0 on success, 2 for validation and usage errors, 3 for
//! numerical failures (no convergence, blow-up), 4 when a simulation's
//! comparison window touches the truncated boundary, 1 for I/O errors.

mod commands;
mod config;
mod figures;
mod output;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{
    AnalyzeSection, AnySection, GreenSection, RelaySection, ReproduceSection, Simulate1dSection,
    Simulate2dSection, SlowfastSection, SolveASection, TransverseSection, VerifySection,
};

/// Unified error type for the binary: usage/validation problems, I/O
/// failures, and errors bubbled up from the core library.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config keys, or missing required parameters.
    Usage(String),
    /// Filesystem trouble reading inputs or writing artifacts.
    Io(String),
    /// An error from the core library; keeps its exit-code classification.
    Core(rattling::Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => e.exit_code(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<rattling::Error> for CliError {
    fn from(e: rattling::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "rattling",
    version,
    about = "Numerical laboratory for relay-lattice dynamics: rattling \
             coefficient, switching laws, lattice simulations, slow-fast \
             regularization, and the transverse free-boundary problem.",
    after_help = "Parameters resolve as: command-line flag, then the config \
                  file section named after the command, then the built-in \
                  default. The output directory resolves as: --output-dir, \
                  then $RATTLING_OUTPUT_DIR, then `output-dir` in the config \
                  file, then the current directory."
)]
struct Cli {
    /// Directory for emitted artifacts (CSV/SVG/reports)
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// TOML config file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the fully resolved configuration to this TOML file, then run
    #[arg(long, global = true, value_name = "FILE")]
    dump_config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the balance equation for the rattling coefficient a(c, h1)
    #[command(
        name = "solve-a",
        after_help = "Writes solve_a.txt: `key = value` lines for c, h1, a, \
                      the balance-equation residual, and the final bracket. \
                      Requires h1 > 2c."
    )]
    SolveA {
        /// Concavity of the quadratic initial profile (c > 0)
        #[arg(long)]
        c: Option<f64>,
        /// Source strength on switched sites (h1 > 2c)
        #[arg(long)]
        h1: Option<f64>,
    },

    /// Tabulate the lattice heat kernel y_n(t)
    #[command(after_help = "Writes green.csv with columns t,n,y: the kernel \
                            value at each requested time for 0 <= n <= n-max.")]
    Green {
        /// Evaluation times, comma separated, strictly increasing
        #[arg(long = "t", value_name = "T1,T2,...", value_delimiter = ',')]
        t: Option<Vec<f64>>,
        /// Largest site index to tabulate
        #[arg(long)]
        n_max: Option<usize>,
    },

    /// Check the quadratic switching law against a fresh simulation
    #[command(after_help = "Writes verify.txt (a, minimal admissible bound \
                            E_min, verdict) and verify.csv with columns \
                            n,t_switch,q,normalized where q = t_switch - a n^2 \
                            and normalized = |q| / sqrt(n).")]
    Verify {
        /// Concavity of the quadratic initial profile (c > 0)
        #[arg(long)]
        c: Option<f64>,
        /// Source strength on switched sites (h1 > 2c)
        #[arg(long)]
        h1: Option<f64>,
        /// Source strength on never-switched sites (h-m1 <= 0)
        #[arg(long, allow_negative_numbers = true)]
        h_m1: Option<f64>,
        /// Check switch times for 1 <= n <= n0
        #[arg(long)]
        n0: Option<usize>,
        /// Residual bound E in |t_n - a n^2| <= E sqrt(n) [default: 1.0]
        #[arg(long)]
        e_bound: Option<f64>,
        /// Reporting half-width of the simulation [default: n0 + 5]
        #[arg(long)]
        n: Option<usize>,
        /// Simulation horizon [default: 1.05 a n0^2]
        #[arg(long)]
        t_end: Option<f64>,
    },

    /// Simulate the relay lattice on a line
    #[command(after_help = "Writes switch_times.csv with columns n,t_switch \
                            (inf for sites that never switch) and, when \
                            --snapshots is given, snapshots.csv with columns \
                            t,n,u,xi.")]
    Simulate1d {
        /// Concavity of the quadratic initial profile (c > 0)
        #[arg(long)]
        c: Option<f64>,
        /// Source strength on switched sites (h1 >= 0)
        #[arg(long)]
        h1: Option<f64>,
        /// Source strength on never-switched sites (h-m1 <= 0)
        #[arg(long, allow_negative_numbers = true)]
        h_m1: Option<f64>,
        /// Reporting half-width: switch times recorded for |n| <= N
        #[arg(long)]
        n: Option<usize>,
        /// Simulation horizon
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of equally spaced state snapshots to record
        #[arg(long)]
        snapshots: Option<usize>,
    },

    /// Simulate the relay lattice on a planar graph
    #[command(after_help = "Writes lattice2d.csv with columns \
                            a,b,ring,x,y,t_switch,xi,u (lattice coordinates, \
                            graph distance from the origin, plane position, \
                            switch time, relay state, final value) and \
                            switch_map.svg, the switched-region map.")]
    Simulate2d {
        /// Concavity of the radial initial profile (c > 0)
        #[arg(long)]
        c: Option<f64>,
        /// Source strength on switched sites (h1 >= 0)
        #[arg(long)]
        h1: Option<f64>,
        /// Source strength on never-switched sites (h-m1 <= 0)
        #[arg(long, allow_negative_numbers = true)]
        h_m1: Option<f64>,
        /// Lattice kind: square or triangular
        #[arg(long)]
        kind: Option<String>,
        /// Graph radius of the simulated patch
        #[arg(long)]
        radius: Option<usize>,
        /// Simulation horizon
        #[arg(long)]
        t_end: Option<f64>,
        /// Time at which to render the switch map [default: t-end]
        #[arg(long)]
        map_time: Option<f64>,
    },

    /// Integrate the slow-fast regularization of the relay PDE
    #[command(after_help = "Writes slowfast.csv with columns t,x,u,v (state \
                            at each snapshot time) and branches.csv with \
                            columns x,branch,defect,nearest classifying the \
                            final snapshot against the slow manifold.")]
    Slowfast {
        /// Fast time-scale parameter (0 < delta <= 1)
        #[arg(long)]
        delta: Option<f64>,
        /// Concavity of the quadratic initial profile (c > 0)
        #[arg(long)]
        c: Option<f64>,
        /// Half-length of the spatial interval [-l, l]
        #[arg(long)]
        l: Option<f64>,
        /// Spatial step of the finite-difference grid
        #[arg(long)]
        dx: Option<f64>,
        /// Integration horizon
        #[arg(long)]
        t_end: Option<f64>,
        /// Fast-variable nonlinearity: cubic or reflected-cubic [default: cubic]
        #[arg(long)]
        nonlinearity: Option<String>,
        /// Initial fast-variable level [default: nonlinearity-specific]
        #[arg(long, allow_negative_numbers = true)]
        v0: Option<f64>,
        /// Amplitude of the symmetry-breaking perturbation [default: 0]
        #[arg(long, allow_negative_numbers = true)]
        perturb: Option<f64>,
        /// Snapshot times, comma separated [default: t-end only]
        #[arg(long, value_name = "T1,T2,...", value_delimiter = ',')]
        snapshots: Option<Vec<f64>>,
        /// Distance tolerance for branch classification [default: 1e-2]
        #[arg(long)]
        defect_tol: Option<f64>,
    },

    /// Solve the transverse free-boundary problem by fixed-point iteration
    #[command(after_help = "Writes boundary.csv with columns t,b,root (free \
                            boundary and interface root; root is nan while \
                            the interface is absent), field.csv with columns \
                            t,x,u (solution on up to 11 time levels), and \
                            iterations.csv with columns evaluation,sup_u,sup_ux.")]
    Transverse {
        /// File with the initial profile: one value per line, `cells` lines
        #[arg(long, value_name = "FILE")]
        phi: Option<PathBuf>,
        /// Initial free-boundary position (0 < bbar < 1)
        #[arg(long)]
        bbar: Option<f64>,
        /// Dirichlet value at x = 0
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Dirichlet value at x = 1
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Source strength on the switched side (h1 > 0)
        #[arg(long)]
        h1: Option<f64>,
        /// Source strength on the unswitched side (h-m1 <= 0)
        #[arg(long, allow_negative_numbers = true)]
        h_m1: Option<f64>,
        /// Requested horizon; halved automatically if contraction fails
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of spatial cells [default: 2000]
        #[arg(long)]
        cells: Option<usize>,
        /// Number of time steps [default: resolution-matched to cells]
        #[arg(long)]
        steps: Option<usize>,
        /// Fixed-point stopping tolerance in the iteration norm [default: 1e-6]
        #[arg(long)]
        tol_fp: Option<f64>,
        /// Maximum fixed-point iterations per horizon [default: 60]
        #[arg(long)]
        max_iter: Option<usize>,
    },

    /// Drive a scalar relay with a piecewise-linear input signal
    #[command(after_help = "Reads the input as CSV lines t,u (a header line \
                            is skipped if present) and writes response.csv \
                            with columns t,y. The relay variant emits the \
                            completed hysteresis response; the alt variant \
                            emits the alternative single-threshold response.")]
    Relay {
        /// CSV file with the input signal: lines of t,u
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Upper threshold (switch up when u >= beta)
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Lower threshold (switch down when u <= alpha); omit for one-way
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Initial relay state: 1 or -1 [default: 1]
        #[arg(long, allow_negative_numbers = true)]
        xi0: Option<i64>,
        /// Response variant: relay or alt [default: relay]
        #[arg(long)]
        variant: Option<String>,
    },

    /// Fit switching-law structure to a recorded switch-time table
    #[command(after_help = "Reads a switch_times.csv produced by simulate1d \
                            (columns n,t_switch) and writes analysis.txt \
                            (fitted coefficient, minimal residual bound, decay \
                            exponent, switching ratio, block tally) plus \
                            residuals.csv with columns n,q.")]
    Analyze {
        /// CSV file with columns n,t_switch
        #[arg(long, value_name = "FILE")]
        records: Option<PathBuf>,
        /// Source strength on switched sites
        #[arg(long)]
        h1: Option<f64>,
        /// Source strength on never-switched sites
        #[arg(long, allow_negative_numbers = true)]
        h_m1: Option<f64>,
        /// Smallest |n| used in the quadratic-law tail fit [default: 10]
        #[arg(long)]
        tail_start: Option<i64>,
        /// Inner edge of the ratio/block window [default: max |n| / 10]
        #[arg(long)]
        j_min: Option<usize>,
        /// Outer edge of the ratio/block window [default: max |n|]
        #[arg(long)]
        j_max: Option<usize>,
        /// Starting guess for the quadratic-law coefficient
        #[arg(long)]
        a_hint: Option<f64>,
    },

    /// Regenerate a bundled figure end to end
    #[command(after_help = "Figures: fig7 (1-D profiles under zero and \
                            opposed back-sources), fig8 (coefficient and \
                            residual-bound sweep over h1), fig9 (square and \
                            triangular switch maps), fig10 (slow-fast state \
                            after the first jump). Each figure writes its CSV \
                            tables and SVG panels into the output directory.")]
    Reproduce {
        /// Figure to regenerate: fig7, fig8, fig9, or fig10
        #[arg(value_name = "FIGURE")]
        figure: Option<String>,
    },
}

impl Command {
    /// Split a parsed subcommand into its config-section name and the
    /// section carrying exactly the values given on the command line.
    fn into_parts(self) -> (&'static str, AnySection) {
        match self {
            Command::SolveA { c, h1 } => ("solve-a", AnySection::SolveA(SolveASection { c, h1 })),
            Command::Green { t, n_max } => {
                ("green", AnySection::Green(GreenSection { t, n_max }))
            }
            Command::Verify {
                c,
                h1,
                h_m1,
                n0,
                e_bound,
                n,
                t_end,
            } => (
                "verify",
                AnySection::Verify(VerifySection {
                    c,
                    h1,
                    h_m1,
                    n0,
                    e_bound,
                    n,
                    t_end,
                }),
            ),
            Command::Simulate1d {
                c,
                h1,
                h_m1,
                n,
                t_end,
                snapshots,
            } => (
                "simulate1d",
                AnySection::Simulate1d(Simulate1dSection {
                    c,
                    h1,
                    h_m1,
                    n,
                    t_end,
                    snapshots,
                }),
            ),
            Command::Simulate2d {
                c,
                h1,
                h_m1,
                kind,
                radius,
                t_end,
                map_time,
            } => (
                "simulate2d",
                AnySection::Simulate2d(Simulate2dSection {
                    c,
                    h1,
                    h_m1,
                    kind,
                    radius,
                    t_end,
                    map_time,
                }),
            ),
            Command::Slowfast {
                delta,
                c,
                l,
                dx,
                t_end,
                nonlinearity,
                v0,
                perturb,
                snapshots,
                defect_tol,
            } => (
                "slowfast",
                AnySection::Slowfast(SlowfastSection {
                    delta,
                    c,
                    l,
                    dx,
                    t_end,
                    nonlinearity,
                    v0,
                    perturb,
                    snapshots,
                    defect_tol,
                }),
            ),
            Command::Transverse {
                phi,
                bbar,
                alpha,
                beta,
                h1,
                h_m1,
                t_end,
                cells,
                steps,
                tol_fp,
                max_iter,
            } => (
                "transverse",
                AnySection::Transverse(TransverseSection {
                    phi: phi.map(|p| p.display().to_string()),
                    bbar,
                    alpha,
                    beta,
                    h1,
                    h_m1,
                    t_end,
                    cells,
                    steps,
                    tol_fp,
                    max_iter,
                }),
            ),
            Command::Relay {
                input,
                beta,
                alpha,
                xi0,
                variant,
            } => (
                "relay",
                AnySection::Relay(RelaySection {
                    input: input.map(|p| p.display().to_string()),
                    beta,
                    alpha,
                    xi0,
                    variant,
                }),
            ),
            Command::Analyze {
                records,
                h1,
                h_m1,
                tail_start,
                j_min,
                j_max,
                a_hint,
            } => (
                "analyze",
                AnySection::Analyze(AnalyzeSection {
                    records: records.map(|p| p.display().to_string()),
                    h1,
                    h_m1,
                    tail_start,
                    j_min,
                    j_max,
                    a_hint,
                }),
            ),
            Command::Reproduce { figure } => {
                ("reproduce", AnySection::Reproduce(ReproduceSection { figure }))
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::ConfigFile::load(path)?,
        None => config::ConfigFile::default(),
    };
    let cli_parts = cli.command.map(Command::into_parts);
    let run_config = config::resolve(cli_parts, cli.output_dir, file)?;
    if let Some(dump) = &cli.dump_config {
        config::dump(&run_config, dump)?;
    }
    commands::run(&run_config)
}
