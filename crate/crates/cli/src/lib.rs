//! Command-line front end for `packbound-core`.
//!
//! Every subcommand writes one artifact (JSON by default) to standard output
//! or to `--output`. Failures print a single `error[<kind>]: <reason>` line
//! on standard error and exit with a code that identifies the kind:
//! 2 for unreadable or invalid input, 3 when the solver fails, 4 when a
//! bound does not pass its certificate checks.

pub mod config;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use packbound_core::cayley::{cayley_theta, delsarte, CayleyError, CayleySpec, FourierLpSolution, Group};
use packbound_core::sdp::{SdpError, SolverSettings};
use packbound_core::sphere::{build_sphere_sdp, sphere_bound, Basis, SphereError, SphereReport, SphereSettings};
use packbound_core::theta::{theta_prime, ThetaCertificate, ThetaError, WeightedGraph};
use packbound_core::verifier::{verify_conditions, GridSettings, MatrixRadialFunction, SphereSystem, VerificationReport, VerifyError};

use config::{Format, Overrides, RunConfig};
use table::{emit_table, parse_dims, TableRow};

/// Label attached to every grid-checked result.
pub const GRID_CHECK_NOTE: &str = "floating-point grid check, not a rigorous proof";

#[derive(Debug, Parser)]
#[command(name = "packbound", version, about = "Semidefinite bounds for independence numbers and sphere packings")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key/value settings file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,
    #[arg(long, global = true)]
    pub feas_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Write the artifact here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Points per grid in post-solve and certificate checks.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weighted ϑ′ of a graph file.
    Theta { graph: PathBuf },
    /// ϑ′ of a Cayley graph through its Fourier-domain LP.
    Cayley {
        /// Cyclic group ℤₙ.
        #[arg(long, conflicts_with = "boolean", required_unless_present = "boolean")]
        n: Option<usize>,
        /// Boolean group ℤ₂ᵐ of this rank.
        #[arg(long)]
        boolean: Option<u32>,
        /// Connection set, comma separated (closed under negation).
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<usize>,
    },
    /// Delsarte's LP bound on binary codes.
    Delsarte {
        #[arg(long)]
        length: u32,
        #[arg(long)]
        distance: u32,
    },
    /// Sphere-packing density bound.
    Sphere {
        #[arg(long, required_unless_present = "table")]
        dim: Option<usize>,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value = "laguerre")]
        basis: Basis,
        /// Also write the program as JSON.
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
        /// Also write the optimal function as JSON.
        #[arg(long)]
        emit_f: Option<PathBuf>,
        /// Sweep these dimensions (e.g. `1-8` or `1,2,3,8`) and emit CSV.
        #[arg(long, conflicts_with_all = ["dim", "dump_sdp", "emit_f"])]
        table: Option<String>,
    },
    /// Check a density certificate.
    Verify {
        /// Certificate JSON, single-function or matrix form.
        #[arg(long = "f")]
        function: PathBuf,
        /// Ball radii, one per sphere type.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// What went wrong, as reported through the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Parse,
    Solver,
    Verification,
    Output,
}

impl FailureKind {
    pub fn exit_code(self) -> u8 {
        match self {
            FailureKind::Output => 1,
            FailureKind::Parse => 2,
            FailureKind::Solver => 3,
            FailureKind::Verification => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FailureKind::Output => "output",
            FailureKind::Parse => "parse",
            FailureKind::Solver => "solver",
            FailureKind::Verification => "verification",
        }
    }
}

/// Marks a failure to write an artifact.
#[derive(Debug)]
struct OutputFailure(PathBuf);

impl std::fmt::Display for OutputFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "writing `{}`", self.0.display())
    }
}

/// A verify run whose report is written but which must still exit nonzero.
#[derive(Debug)]
struct NotCertified(String);

impl std::fmt::Display for NotCertified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "not certified: {}", self.0)
    }
}

impl std::error::Error for NotCertified {}

fn sdp_kind(e: &SdpError) -> FailureKind {
    match e {
        SdpError::InfeasibleData(_) => FailureKind::Solver,
        _ => FailureKind::Parse,
    }
}

/// Maps an error chain to its exit-code class; anything unrecognized is an
/// input problem.
pub fn classify(err: &anyhow::Error) -> FailureKind {
    if err.downcast_ref::<OutputFailure>().is_some() {
        return FailureKind::Output;
    }
    for cause in err.chain() {
        if cause.downcast_ref::<NotCertified>().is_some() {
            return FailureKind::Verification;
        }
        if let Some(e) = cause.downcast_ref::<SphereError>() {
            return match e {
                SphereError::Solver { .. } => FailureKind::Solver,
                SphereError::VerificationFailed(_) => FailureKind::Verification,
                SphereError::Sdp(s) => sdp_kind(s),
                _ => FailureKind::Parse,
            };
        }
        if let Some(e) = cause.downcast_ref::<VerifyError>() {
            return match e {
                VerifyError::NotCertified(_) => FailureKind::Verification,
                VerifyError::Linalg(_) => FailureKind::Solver,
                _ => FailureKind::Parse,
            };
        }
        if let Some(e) = cause.downcast_ref::<ThetaError>() {
            return match e {
                ThetaError::Solver(_) | ThetaError::Linalg(_) => FailureKind::Solver,
                ThetaError::Sdp(s) => sdp_kind(s),
                _ => FailureKind::Parse,
            };
        }
        if let Some(e) = cause.downcast_ref::<CayleyError>() {
            return match e {
                CayleyError::Solver(_) => FailureKind::Solver,
                CayleyError::Sdp(s) => sdp_kind(s),
                _ => FailureKind::Parse,
            };
        }
        if let Some(e) = cause.downcast_ref::<SdpError>() {
            return sdp_kind(e);
        }
    }
    FailureKind::Parse
}

/// The single diagnostic line for a failure.
pub fn reason_line(err: &anyhow::Error) -> String {
    let reason = format!("{err:#}").replace(['\n', '\r'], " ");
    format!("error[{}]: {reason}", classify(err).label())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaOutput {
    pub value: f64,
    pub vertices: usize,
    pub edges: usize,
    pub certificate: ThetaCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereOutput {
    pub bound: f64,
    pub dimension: usize,
    pub degree: usize,
    pub check: String,
    pub report: SphereReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub certified: bool,
    /// `max_i f_ii(0)`, present only when certified.
    pub bound: Option<f64>,
    pub radii: Vec<f64>,
    pub check: String,
    pub report: VerificationReport,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    text
}

fn single_value_csv(header: &str, value: f64) -> String {
    format!("{header}\n{}\n", table::format_real(value))
}

fn read_input(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {what} `{}`", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).context(OutputFailure(path.to_path_buf()))
}

/// Thread cap for `--table` sweeps from `PACKBOUND_THREADS`.
fn sweep_threads() -> Result<Option<usize>> {
    match std::env::var("PACKBOUND_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("PACKBOUND_THREADS=`{v}` is not a thread count"))?;
            if n == 0 {
                return Err(anyhow!("PACKBOUND_THREADS must be at least 1"));
            }
            Ok(Some(n))
        }
    }
}

fn sphere_settings(config: &RunConfig, basis: Basis) -> SphereSettings {
    let mut s = SphereSettings { solver: config.solver, basis, check_tol: config.tol, ..SphereSettings::default() };
    if let Some(p) = config.grid_points {
        s.grid_points = p;
    }
    s
}

fn run_table(dims: &str, degree: usize, settings: &SphereSettings) -> Result<String> {
    let dims = parse_dims(dims).map_err(|e| anyhow!("--table: {e}"))?;
    let cell = |&dim: &usize| -> Result<TableRow> {
        let (bound, _, _) = sphere_bound(dim, degree, settings).with_context(|| format!("dimension {dim}, degree {degree}"))?;
        Ok(TableRow { dim, degree, bound })
    };
    let sweep = || dims.par_iter().map(cell).collect::<Vec<_>>();
    let results = match sweep_threads()? {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().context("starting the sweep thread pool")?.install(sweep),
        None => sweep(),
    };
    // Cells come back in dimension order; the first failure decides the outcome.
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(emit_table(&rows))
}

/// Artifact of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    /// Set when the artifact is a report of failed certificate checks.
    pub rejected: Option<String>,
}

impl From<String> for Outcome {
    fn from(artifact: String) -> Self {
        Outcome { artifact, rejected: None }
    }
}

/// Runs one command and returns its artifact.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Outcome> {
    let solver: &SolverSettings = &config.solver;
    match command {
        Command::Theta { graph } => {
            let g: WeightedGraph = read_input(graph, "graph file")?.parse().with_context(|| format!("graph file `{}`", graph.display()))?;
            let (value, certificate) = theta_prime(&g, solver)?;
            Ok(match config.format {
                Format::Json => to_json(&ThetaOutput { value, vertices: g.n_vertices(), edges: g.n_edges(), certificate }),
                Format::Csv => single_value_csv("value", value),
            }
            .into())
        }
        Command::Cayley { n, boolean, sigma } => {
            let group = match (n, boolean) {
                (Some(n), _) => Group::cyclic(*n)?,
                (None, Some(m)) => Group::boolean(*m)?,
                (None, None) => return Err(anyhow!("one of --n or --boolean is required")),
            };
            let spec = CayleySpec::new(group, sigma.iter().copied())?;
            let solution: FourierLpSolution = cayley_theta(&spec, solver)?;
            Ok(match config.format {
                Format::Json => to_json(&solution),
                Format::Csv => single_value_csv("value", solution.value),
            }
            .into())
        }
        Command::Delsarte { length, distance } => {
            let solution = delsarte(*length, *distance, solver)?;
            Ok(match config.format {
                Format::Json => to_json(&solution),
                Format::Csv => single_value_csv("value", solution.value),
            }
            .into())
        }
        Command::Sphere { dim, degree, basis, dump_sdp, emit_f, table } => {
            let settings = sphere_settings(config, *basis);
            if let Some(dims) = table {
                return run_table(dims, *degree, &settings).map(Outcome::from);
            }
            let dim = dim.ok_or_else(|| anyhow!("--dim is required without --table"))?;
            if let Some(path) = dump_sdp {
                write_file(path, &build_sphere_sdp(dim, *degree, *basis)?.to_json())?;
            }
            let (bound, f, report) = sphere_bound(dim, *degree, &settings)?;
            if let Some(path) = emit_f {
                write_file(path, &f.to_json())?;
            }
            Ok(match config.format {
                Format::Json => to_json(&SphereOutput { bound, dimension: dim, degree: *degree, check: GRID_CHECK_NOTE.into(), report }),
                Format::Csv => emit_table(&[TableRow { dim, degree: *degree, bound }]),
            }
            .into())
        }
        Command::Verify { function, radii, tol } => {
            let f = MatrixRadialFunction::from_json(&read_input(function, "certificate")?)
                .with_context(|| format!("certificate `{}`", function.display()))?;
            let sys = SphereSystem::new(f.dimension(), radii.clone())?;
            let mut grid = GridSettings { tol: tol.unwrap_or(config.tol), ..GridSettings::default() };
            if let Some(p) = config.grid_points {
                grid.points = p;
            }
            if !(grid.tol > 0.0 && grid.tol.is_finite()) {
                return Err(anyhow!("--tol must be positive and finite"));
            }
            let report = verify_conditions(&f, &sys, &grid)?;
            let certified = report.passed();
            let rejected = (!certified).then(|| report.summary());
            let out = VerifyOutput {
                certified,
                bound: certified.then_some(report.bound),
                radii: radii.clone(),
                check: GRID_CHECK_NOTE.into(),
                report,
            };
            let artifact = match config.format {
                Format::Json => to_json(&out),
                Format::Csv => {
                    format!("certified,bound\n{},{}\n", certified, out.bound.map(table::format_real).unwrap_or_default())
                }
            };
            Ok(Outcome { artifact, rejected })
        }
    }
}

/// Resolves the configuration, runs the command and writes the artifact.
/// A failed verification still writes its report before reporting failure.
pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let file = c.config.as_deref().map(Overrides::read).transpose()?;
    let flags = Overrides {
        gap_tol: c.gap_tol,
        feas_tol: c.feas_tol,
        max_iter: c.max_iter,
        output: c.output.clone(),
        format: c.format,
        tol: None,
        grid_points: c.grid_points,
    };
    let config = RunConfig::resolve(file.as_ref(), &flags)?;
    let outcome = execute(&cli.command, &config)?;
    match &config.output {
        Some(path) => write_file(path, &outcome.artifact)?,
        None => print!("{}", outcome.artifact),
    }
    match outcome.rejected {
        Some(summary) => Err(NotCertified(summary).into()),
        None => Ok(()),
    }
}
