//! The `dlevel` command line.
//!
//! Exit codes: 0 success, 1 verification failed, 2 malformed input,
//! 3 semantic or lowering error, 4 I/O error, 5 oracle guard exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::composite::{CompileOptions, CompositeOperator, MaskMode};
use crate::encodings::{Encoding, EncodingRegistry};
use crate::generators::{self, GenError};
use crate::oracle::{code_dimension, verify_subspace, OracleError, DEFAULT_GUARD};
use crate::pauli::DEFAULT_TOLERANCE;
use crate::problem::{read_pauli_output, ProblemError, ProblemFile, StructuredOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Syntax(String),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Io(String),
    #[error("required dimension {required} exceeds the guard {guard}")]
    Guard { required: u128, guard: usize },
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Syntax(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Io(_) => 4,
            CliError::Guard { .. } => 5,
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Syntax(m) => CliError::Syntax(m),
            ProblemError::Semantic(m) => CliError::Semantic(m),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::GuardExceeded { required, guard } => CliError::Guard { required, guard },
            other => CliError::Semantic(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dlevel", version, about = "Compile operators on d-level subsystems into Pauli sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a problem file to a Pauli sum.
    Compile(CompileArgs),
    /// Compare qubit and term counts across encodings.
    Resources(ResourcesArgs),
    /// Check a compilation against the dense oracle.
    Verify(VerifyArgs),
    /// Write a problem file for a model family.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub input: PathBuf,
    /// Drop terms with |coeff| <= tol.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Act on every qubit of each unary subsystem (exact off the code space).
    #[arg(long)]
    pub strict_unary: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    pub input: PathBuf,
    /// Comma list of encoding specs (one row each) and/or `label=spec`
    /// overrides applied to every row.
    #[arg(long)]
    pub encodings: Option<String>,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long)]
    pub strict_unary: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub input: PathBuf,
    /// Largest allowed elementwise deviation.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest code-space dimension the oracle will build.
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    pub max_dim: usize,
    /// Check this compiled output (text or structured) instead of compiling.
    #[arg(long)]
    pub golden: Option<PathBuf>,
    #[arg(long)]
    pub strict_unary: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub model: Model,
    /// Encoding spec for every subsystem.
    #[arg(long, global = true, default_value = "stdbinary")]
    pub enc: String,
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Model {
    BoseHubbard {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        periodic: bool,
    },
    SpinChain {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        #[arg(long)]
        periodic: bool,
    },
    Vibrational {
        #[arg(long)]
        d: usize,
        /// Harmonic frequencies, one per mode.
        #[arg(long, value_delimiter = ',', required = true)]
        omegas: Vec<f64>,
        /// Cubic couplings `i,j,k,value` separated by `;`.
        #[arg(long, default_value = "")]
        cubic: String,
    },
    TensorTrain {
        /// Subsystem dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        terms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    GraphColoring {
        /// Edges `u-v` separated by commas.
        #[arg(long)]
        edges: String,
        /// Vertex count; defaults to one more than the largest endpoint.
        #[arg(long)]
        vertices: Option<usize>,
        #[arg(long)]
        colors: usize,
    },
    Tsp {
        /// Rows separated by `;`, entries by `,`.
        #[arg(long)]
        distances: String,
        #[arg(long)]
        penalty: f64,
    },
    Scheduling {
        #[arg(long, value_delimiter = ',', required = true)]
        durations: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        penalty: f64,
    },
}

/// Parses arguments, runs the command, prints any error, and returns the
/// exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(CliError::VerifyFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile(a) => compile(&a),
        Command::Resources(a) => resources(&a),
        Command::Verify(a) => verify(&a),
        Command::Gen(a) => generate(&a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn options(tol: f64, strict_unary: bool) -> CompileOptions {
    CompileOptions {
        tol,
        mask: if strict_unary { MaskMode::Full } else { MaskMode::Reduced },
    }
}

fn load(path: &Path, overrides: &BTreeMap<String, Encoding>) -> Result<(ProblemFile, CompositeOperator), CliError> {
    let file = ProblemFile::from_json(&read(path)?)?;
    let op = file.lower(&EncodingRegistry::new(), overrides)?;
    Ok((file, op))
}

fn compile(a: &CompileArgs) -> Result<(), CliError> {
    let (file, op) = load(&a.input, &BTreeMap::new())?;
    let sum = op
        .to_pauli(options(a.tol, a.strict_unary))
        .map_err(|e| CliError::Semantic(e.to_string()))?;
    let text = match a.format {
        Format::Text => sum.to_text(),
        Format::Structured => {
            let labels: Vec<String> = file.subsystems.iter().map(|s| s.id.clone()).collect();
            StructuredOutput::new(&sum, &op, &labels).to_json()
        }
    };
    emit(a.output.as_deref(), &text)
}

/// One line of the resources table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceRow {
    pub encoding: String,
    pub qubits: usize,
    pub terms: usize,
    pub max_weight: usize,
    pub mean_weight: f64,
    pub one_norm: f64,
    pub wall_ms: f64,
}

/// A `--encodings` list split into row specs and per-label overrides. An
/// item is an override when the text before its first `=` has no `:`.
pub fn parse_encodings_arg(
    arg: &str,
    registry: &EncodingRegistry,
) -> Result<(Vec<Encoding>, BTreeMap<String, Encoding>), CliError> {
    let mut rows = Vec::new();
    let mut overrides = BTreeMap::new();
    for item in arg.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let resolve = |spec: &str| registry.resolve(spec).map_err(|e| CliError::Semantic(e.to_string()));
        match item.split_once('=') {
            Some((label, spec)) if !label.contains(':') => {
                overrides.insert(label.to_string(), resolve(spec)?);
            }
            _ => rows.push(resolve(item)?),
        }
    }
    Ok((rows, overrides))
}

fn resources(a: &ResourcesArgs) -> Result<(), CliError> {
    let registry = EncodingRegistry::new();
    let file = ProblemFile::from_json(&read(&a.input)?)?;
    let (specs, overrides) = match &a.encodings {
        Some(arg) => parse_encodings_arg(arg, &registry)?,
        None => (Vec::new(), BTreeMap::new()),
    };
    let describe = |base: Option<&Encoding>| -> String {
        let mut parts: Vec<String> = base.map(|e| e.to_string()).into_iter().collect();
        parts.extend(overrides.iter().map(|(l, e)| format!("{l}={e}")));
        if parts.is_empty() {
            "as declared".to_string()
        } else {
            parts.join(" ")
        }
    };
    let mut plans: Vec<(String, BTreeMap<String, Encoding>)> = Vec::new();
    if specs.is_empty() {
        plans.push((describe(None), overrides.clone()));
    }
    for spec in &specs {
        let mut map: BTreeMap<String, Encoding> =
            file.subsystems.iter().map(|s| (s.id.clone(), spec.clone())).collect();
        map.extend(overrides.clone());
        plans.push((describe(Some(spec)), map));
    }
    let mut rows = Vec::new();
    for (name, map) in plans {
        let start = Instant::now();
        let op = file.lower(&registry, &map)?;
        let report = op
            .resource_report(options(a.tol, a.strict_unary))
            .map_err(|e| CliError::Semantic(e.to_string()))?;
        rows.push(ResourceRow {
            encoding: name,
            qubits: report.n_qubits,
            terms: report.n_terms,
            max_weight: report.max_weight,
            mean_weight: report.mean_weight,
            one_norm: report.coeff_one_norm,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        s
    } else {
        format_table(&rows)
    };
    emit(None, &text)
}

/// Fixed-width table of resource rows.
pub fn format_table(rows: &[ResourceRow]) -> String {
    let header = ["encoding", "qubits", "terms", "max_weight", "mean_weight", "one_norm", "wall_ms"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.encoding.clone(),
                r.qubits.to_string(),
                r.terms.to_string(),
                r.max_weight.to_string(),
                format!("{:.3}", r.mean_weight),
                format!("{:.6}", r.one_norm),
                format!("{:.2}", r.wall_ms),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..7)
        .map(|i| cells.iter().map(|c| c[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let line = |cols: Vec<&str>| -> String {
        let mut s = cols
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
            .collect::<Vec<_>>()
            .join("  ");
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for c in &cells {
        out.push_str(&line(c.iter().map(String::as_str).collect()));
    }
    out
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let (_, op) = load(&a.input, &BTreeMap::new())?;
    let required = code_dimension(&op.dims());
    if required > a.max_dim as u128 {
        return Err(CliError::Guard { required, guard: a.max_dim });
    }
    let sum = match &a.golden {
        Some(path) => read_pauli_output(&read(path)?).map_err(|e| CliError::Syntax(format!("{}: {e}", path.display())))?,
        None => op
            .to_pauli(options(DEFAULT_TOLERANCE, a.strict_unary))
            .map_err(|e| CliError::Semantic(e.to_string()))?,
    };
    let verdict = verify_subspace(&op, &sum, a.tol, a.max_dim)?;
    emit(None, &verdict.to_string())?;
    if verdict.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, sep: char, what: &str) -> Result<Vec<T>, CliError> {
    text.split(sep)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Syntax(format!("bad {what} entry `{s}`"))))
        .collect()
}

fn generate(a: &GenArgs) -> Result<(), CliError> {
    EncodingRegistry::new()
        .resolve(&a.enc)
        .map_err(|e| CliError::Semantic(e.to_string()))?;
    let file = match &a.model {
        &Model::BoseHubbard { sites, d, t, u, mu, periodic } => {
            generators::bose_hubbard(&generators::BoseHubbard { sites, d, t, u, mu, periodic }, &a.enc)?
        }
        &Model::SpinChain { sites, d, j, h, periodic } => {
            generators::spin_chain(&generators::SpinChain { sites, d, j, h, periodic }, &a.enc)?
        }
        Model::Vibrational { d, omegas, cubic } => {
            let mut couplings = Vec::new();
            for entry in cubic.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let parts: Vec<&str> = entry.split(',').map(str::trim).collect();
                let idx = |s: &str| s.parse::<usize>().map_err(|_| CliError::Syntax(format!("bad coupling `{entry}`")));
                let [i, j, k, v] = parts[..] else {
                    return Err(CliError::Syntax(format!("coupling `{entry}` needs i,j,k,value")));
                };
                let v = v.parse::<f64>().map_err(|_| CliError::Syntax(format!("bad coupling `{entry}`")))?;
                couplings.push((idx(i)?, idx(j)?, idx(k)?, v));
            }
            let p = generators::Vibrational { d: *d, omegas: omegas.clone(), cubic: couplings };
            generators::vibrational(&p, &a.enc)?
        }
        Model::TensorTrain { dims, terms, seed } => {
            let p = generators::TensorTrain { dims: dims.clone(), terms: *terms, seed: *seed };
            generators::tensor_train(&p, &a.enc)?
        }
        Model::GraphColoring { edges, vertices, colors } => {
            let mut list = Vec::new();
            for e in edges.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let parsed: Vec<usize> = parse_list(e, '-', "edge")?;
                let [u, v] = parsed[..] else {
                    return Err(CliError::Syntax(format!("edge `{e}` needs u-v")));
                };
                list.push((u, v));
            }
            let n = vertices.unwrap_or_else(|| list.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
            let p = generators::GraphColoring { vertices: n, edges: list, colors: *colors };
            generators::graph_coloring(&p, &a.enc)?
        }
        Model::Tsp { distances, penalty } => {
            let rows = distances
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|r| parse_list::<f64>(r, ',', "distance"))
                .collect::<Result<Vec<_>, _>>()?;
            generators::tsp(&generators::Tsp { distances: rows, penalty: *penalty }, &a.enc)?
        }
        Model::Scheduling { durations, weights, horizon, penalty } => {
            let p = generators::Scheduling {
                durations: durations.clone(),
                weights: weights.clone(),
                horizon: *horizon,
                penalty: *penalty,
            };
            generators::scheduling(&p, &a.enc)?
        }
    };
    emit(a.output.as_deref(), &file.to_json())
}
