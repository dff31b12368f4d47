//! Subcommand definitions and handlers. Every command is deterministic:
//! the same flags produce byte-identical CSV/JSON output.

use crate::config::parse_kernel;
use clap::{Args, Parser, Subcommand};
use mercerlab::diagnostics;
use mercerlab::io;
use mercerlab::kernels::KernelSpec;
use mercerlab::nystrom::{compose, discretize, DiscreteOperator};
use mercerlab::quadrature::{EvalGrid, QuadratureRule, RuleKind};
use mercerlab::semigroup::{self, Boundary, HeatSemigroupSpec};
use mercerlab::spectral::{eigendecompose, SpectralDecomposition};
use mercerlab::{Error, Result};
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "mercerlab", version, about = "Integral-operator laboratory: Nystrom discretization, Mercer expansions, and counterexample probes on an interval")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigendecompose a symmetric kernel; emits (index, eigenvalue) CSV
    Decompose(DecomposeArgs),
    /// Mercer reconstruction and tail diagnostics; emits a JSON report
    Mercer(MercerArgs),
    /// Counterexample probes; emit JSON probe reports
    Probe {
        #[command(subcommand)]
        probe: ProbeCommand,
    },
    /// Compose, adjoint and fractional-power pipelines; emits tabulated CSV
    Compose(ComposeArgs),
    /// Heat semigroup residual, trace and Gaussian-bound fit; emits JSON
    Semigroup(SemigroupArgs),
}

#[derive(Debug, Args)]
struct RuleArgs {
    /// Quadrature node count
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    /// Quadrature kind: gauss-legendre | trapezoid | midpoint
    #[arg(long, default_value = "gauss-legendre")]
    rule: String,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (each command lists its supported formats)
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Kernel spec, inline (`heat:dirichlet,t=1`) or a .json file
    #[arg(long)]
    kernel: String,
    #[command(flatten)]
    rule: RuleArgs,
    /// Keep only the leading eigenvalues
    #[arg(long)]
    top: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct MercerArgs {
    #[arg(long)]
    kernel: String,
    #[command(flatten)]
    rule: RuleArgs,
    /// Reconstruction truncation; defaults to the full dimension
    #[arg(long)]
    terms: Option<usize>,
    /// Evaluation grid size (uniform, endpoints included)
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum ProbeCommand {
    /// Product-kernel continuity along the +-2^-n diagonal sequences
    Continuity {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Probe the symmetrized kernel K + K^T instead
        #[arg(long)]
        symmetrized: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Diagonal sup growth across a truncation schedule
    DiagGrowth {
        #[arg(long)]
        kernel: String,
        /// Truncation schedule, e.g. 100,1000
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Row L2-norm criterion over a point set, with rule-refinement check
    CCriterion {
        #[arg(long)]
        kernel: String,
        #[command(flatten)]
        rule: RuleArgs,
        /// Probe points (endpoints are added); uniform grid when omitted
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<f64>>,
        /// Uniform grid size when --points is omitted
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gram-matrix positive-semidefiniteness at explicit points
    Psd {
        #[arg(long)]
        kernel: String,
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct ComposeArgs {
    /// Leftmost (outer) operator
    #[arg(long)]
    kernel: String,
    /// Second operator
    #[arg(long)]
    kernel2: Option<String>,
    /// Third operator
    #[arg(long)]
    kernel3: Option<String>,
    /// Transpose the first operand
    #[arg(long)]
    adjoint: bool,
    /// Transpose the second operand
    #[arg(long)]
    adjoint2: bool,
    /// Transpose the third operand
    #[arg(long)]
    adjoint3: bool,
    /// Fractional power of a single symmetric kernel (excludes --kernel2/3)
    #[arg(long)]
    power: Option<f64>,
    #[command(flatten)]
    rule: RuleArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SemigroupArgs {
    /// Boundary condition: dirichlet | neumann
    #[arg(long)]
    boundary: String,
    /// Time of the semigroup snapshot
    #[arg(long)]
    t: f64,
    /// Mode truncation; defaults to max(100, ceil(8/sqrt t))
    #[arg(long)]
    modes: Option<usize>,
    #[command(flatten)]
    rule: RuleArgs,
    /// Evaluation grid size
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Times for the Gaussian-bound fit; defaults to the snapshot time
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    /// Gaussian-bound exponent coefficient
    #[arg(long, default_value_t = 0.125)]
    b: f64,
    /// Gaussian-bound drift exponent
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn pick_format(requested: &Option<String>, allowed: &[&str]) -> Result<String> {
    match requested {
        None => Ok(allowed[0].to_string()),
        Some(f) if allowed.contains(&f.as_str()) => Ok(f.clone()),
        Some(f) => Err(Error::invalid(format!(
            "format `{f}` is not supported here (expected one of: {})",
            allowed.join(", ")
        ))),
    }
}

fn emit(output: &OutputArgs, content: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::invalid(format!("cannot write `{}`: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// The rule a spec is discretized on: tabulated kernels carry their own.
fn rule_for(spec: &KernelSpec, args: &RuleArgs) -> Result<QuadratureRule> {
    if let KernelSpec::Tabulated(t) = spec {
        return Ok(t.rule().clone());
    }
    let kind: RuleKind = args.rule.parse()?;
    QuadratureRule::build(kind, args.nodes, spec.interval())
}

fn decomposition(kernel: &str, rule_args: &RuleArgs) -> Result<(KernelSpec, SpectralDecomposition)> {
    let spec = parse_kernel(kernel)?;
    let rule = rule_for(&spec, rule_args)?;
    let op = discretize(&spec, &rule)?;
    Ok((spec, eigendecompose(&op)?))
}

fn run_decompose(args: DecomposeArgs) -> Result<()> {
    let format = pick_format(&args.output.format, &["csv", "json"])?;
    let (_, dec) = decomposition(&args.kernel, &args.rule)?;
    let content = match format.as_str() {
        "csv" => io::eigenvalues_csv(dec.eigenvalues(), args.top),
        _ => {
            let take = args.top.unwrap_or(dec.len()).min(dec.len());
            let rows: Vec<serde_json::Value> = dec.eigenvalues()[..take]
                .iter()
                .enumerate()
                .map(|(i, l)| json!([i + 1, l]))
                .collect();
            io::canonical_json(&json!({ "eigenvalues": rows }))
        }
    };
    emit(&args.output, &content)
}

fn run_mercer(args: MercerArgs) -> Result<()> {
    pick_format(&args.output.format, &["json"])?;
    let (spec, dec) = decomposition(&args.kernel, &args.rule)?;
    let terms = args.terms.unwrap_or(dec.len());
    let grid = EvalGrid::uniform(spec.interval(), args.grid)?;
    let report = dec.mercer_report(terms, &grid)?;
    emit(&args.output, &report.to_json())
}

fn run_probe(probe: ProbeCommand) -> Result<()> {
    match probe {
        ProbeCommand::Continuity {
            kernel,
            depth,
            symmetrized,
            output,
        } => {
            pick_format(&output.format, &["json"])?;
            let spec = parse_kernel(&kernel)?;
            let report = if symmetrized {
                diagnostics::continuity_probe_symmetrized(&spec, depth)?
            } else {
                diagnostics::continuity_probe_product(&spec, depth)?
            };
            emit(&output, &report.to_json())
        }
        ProbeCommand::DiagGrowth {
            kernel,
            schedule,
            output,
        } => {
            pick_format(&output.format, &["json"])?;
            let spec = parse_kernel(&kernel)?;
            let report = diagnostics::diagonal_growth_probe(&spec, &schedule)?;
            emit(&output, &report.to_json())
        }
        ProbeCommand::CCriterion {
            kernel,
            rule,
            points,
            grid,
            output,
        } => {
            pick_format(&output.format, &["json"])?;
            let spec = parse_kernel(&kernel)?;
            let f_grid = match &points {
                Some(pts) => EvalGrid::closure_of(spec.interval(), pts)?,
                None => EvalGrid::uniform(spec.interval(), grid)?,
            };
            let quad = rule_for(&spec, &rule)?;
            let report = diagnostics::c_criterion_probe(&spec, &f_grid, &quad)?;
            emit(&output, &report.to_json())
        }
        ProbeCommand::Psd {
            kernel,
            points,
            output,
        } => {
            pick_format(&output.format, &["json"])?;
            let spec = parse_kernel(&kernel)?;
            let report = diagnostics::psd_probe(&spec, &points)?;
            emit(&output, &report.to_json())
        }
    }
}

fn operator_output(op: &DiscreteOperator, output: &OutputArgs) -> Result<()> {
    let format = pick_format(&output.format, &["csv", "json"])?;
    let content = match format.as_str() {
        "csv" => op.to_csv(),
        _ => {
            let rows: Vec<serde_json::Value> = (0..op.len())
                .map(|i| serde_json::Value::from(op.samples().row(i).to_vec()))
                .collect();
            io::canonical_json(&json!({
                "nodes": op.rule().nodes(),
                "weights": op.rule().weights(),
                "samples": rows,
            }))
        }
    };
    emit(output, &content)
}

fn run_compose(args: ComposeArgs) -> Result<()> {
    if let Some(alpha) = args.power {
        if args.kernel2.is_some() || args.kernel3.is_some() {
            return Err(Error::invalid("--power applies to a single kernel, not a composition".to_string()));
        }
        let (_, dec) = decomposition(&args.kernel, &args.rule)?;
        let powered = dec.fractional_power(alpha)?;
        let powered = if args.adjoint { powered.adjoint() } else { powered };
        return operator_output(&powered, &args.output);
    }
    let first = parse_kernel(&args.kernel)?;
    let rule = rule_for(&first, &args.rule)?;
    let prepare = |spec: &KernelSpec, transpose: bool| -> Result<DiscreteOperator> {
        let op = discretize(spec, &rule)?;
        Ok(if transpose { op.adjoint() } else { op })
    };
    let mut result = prepare(&first, args.adjoint)?;
    if let Some(second) = &args.kernel2 {
        let op2 = prepare(&parse_kernel(second)?, args.adjoint2)?;
        result = compose(&result, &op2)?;
    } else if args.adjoint2 || args.kernel3.is_some() {
        return Err(Error::invalid("--kernel3/--adjoint2 need --kernel2".to_string()));
    }
    if let Some(third) = &args.kernel3 {
        let op3 = prepare(&parse_kernel(third)?, args.adjoint3)?;
        result = compose(&result, &op3)?;
    } else if args.adjoint3 {
        return Err(Error::invalid("--adjoint3 needs --kernel3".to_string()));
    }
    operator_output(&result, &args.output)
}

fn run_semigroup(args: SemigroupArgs) -> Result<()> {
    pick_format(&args.output.format, &["json"])?;
    let boundary: Boundary = args.boundary.parse()?;
    let modes = args.modes.unwrap_or_else(|| semigroup::default_modes(args.t));
    let spec = HeatSemigroupSpec::new(boundary, args.t, modes)?;
    let kind: RuleKind = args.rule.rule.parse()?;
    let rule = QuadratureRule::build(kind, args.rule.nodes, spec.interval())?;
    let grid = EvalGrid::uniform(spec.interval(), args.grid)?;
    let residual = semigroup::semigroup_check(&spec, &rule, &grid)?;
    let times = args.times.clone().unwrap_or_else(|| vec![args.t]);
    let fit = semigroup::gaussian_bound_fit(boundary, modes, &times, args.b, args.omega, &grid)?;
    let content = io::canonical_json(&json!({
        "semigroup_residual": residual,
        "trace": spec.trace(),
        "gaussian_c": fit.c,
    }));
    emit(&args.output, &content)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose(args) => run_decompose(args),
        Command::Mercer(args) => run_mercer(args),
        Command::Probe { probe } => run_probe(probe),
        Command::Compose(args) => run_compose(args),
        Command::Semigroup(args) => run_semigroup(args),
    }
}
