//! `nlsg` — data-producing front end for the interval and star-graph
//! solvers.
//!
//! Subcommands emit deterministic CSV (`#`-prefixed header row, floats with
//! 17 significant digits) or JSON lines, suitable for plotting scripts. The
//! `verify` subcommand runs the numerical invariant suites and exits
//! nonzero on any failure.

mod output;
mod parse;
mod verify;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nlsg_core::counterexample::{demonstrate_violation, find_config, StarConfig};
use nlsg_core::interval::trace_curve;
use nlsg_core::model::{IntervalProblem, ModelParams, ParamPoint, StarGraph};
use nlsg_core::quadrature::wavelength;
use nlsg_core::star::{
    central_value, continue_curve, count_star_nodes, newton_solve, residual, scaled_residual_norm,
    LocalCurvePoint, StarPoint,
};

use output::{fmt_f64, OutputFormat, Writer};

#[derive(Parser)]
#[command(
    name = "nlsg",
    version,
    about = "Stationary nonlinear Schrödinger solutions on intervals and star graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the wavelength and its gradient at one parameter point
    Wavelength(WavelengthArgs),
    /// Trace interval spectral curves over an amplitude grid
    Curves(CurvesArgs),
    /// Solve the star-graph matching conditions at fixed mu
    StarSolve(StarSolveArgs),
    /// Continue a star-graph solution family in mu
    Continue(ContinueArgs),
    /// Demonstrate a nodal-count change along a star-graph family
    Counterexample(CounterexampleArgs),
    /// Run the numerical verification suites
    Verify(VerifyArgs),
    /// Run a subcommand described by a key = value config file
    Run(RunArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted; relative paths join NLSG_OUT_DIR)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct ModelArgs {
    /// Nonlinearity exponent sigma (positive integer)
    #[arg(long)]
    sigma: u32,
    /// Coefficient nu (nonzero)
    #[arg(long, allow_hyphen_values = true)]
    nu: f64,
}

#[derive(Args)]
struct WavelengthArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Spectral parameter mu
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Amplitude alpha (positive)
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Boundary conditions: dd, dn, nd, or nn
    #[arg(long)]
    bc: String,
    /// Interval length
    #[arg(long)]
    length: f64,
    /// Curve indices, e.g. `3` or `1..5` (inclusive)
    #[arg(long)]
    n: String,
    /// Amplitude grid: `log:lo:hi:count`, `lin:lo:hi:count`, or a comma list
    #[arg(long)]
    alpha_grid: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct StarArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Edge lengths, comma-separated
    #[arg(long)]
    lengths: String,
    /// Boundary conditions per edge, e.g. `d,d,n`
    #[arg(long)]
    bcs: String,
    /// Branch signs per edge, e.g. `+,+,-`
    #[arg(long, allow_hyphen_values = true)]
    zetas: String,
    /// Spectral parameter mu
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Initial amplitudes per edge, comma-separated
    #[arg(long)]
    alphas: String,
}

#[derive(Args)]
struct StarSolveArgs {
    #[command(flatten)]
    star: StarArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ContinueArgs {
    #[command(flatten)]
    star: StarArgs,
    /// Final mu of the continuation
    #[arg(long, allow_hyphen_values = true)]
    mu_end: f64,
    /// Number of mu increments
    #[arg(long, default_value_t = 16)]
    steps: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Nonlinearity exponent sigma
    #[arg(long, default_value_t = 1)]
    sigma: u32,
    /// Coefficient nu (must be positive for this construction)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    nu: f64,
    /// Number of edges
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Integer rates m_j/l_j, e.g. `3,4,5`; searched when omitted
    #[arg(long)]
    rates: Option<String>,
    /// Central slope signs, e.g. `+,+,-`; required with --rates
    #[arg(long, allow_hyphen_values = true)]
    zetas: Option<String>,
    /// Half-period counts per edge (default: all 1)
    #[arg(long)]
    ns: Option<String>,
    /// Boundary conditions per edge (default: all Dirichlet)
    #[arg(long)]
    bcs: Option<String>,
    /// Continuation distance in mu (default: 1e-3 min_j nu alpha_j^(2 sigma))
    #[arg(long)]
    delta_mu: Option<f64>,
    /// Search bound for integer rates when --rates is omitted
    #[arg(long, default_value_t = 12)]
    search_bound: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines with a `command = <name>` entry
    config: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Wavelength(args) => cmd_wavelength(args).map(|()| 0),
        Command::Curves(args) => cmd_curves(args).map(|()| 0),
        Command::StarSolve(args) => cmd_star_solve(args).map(|()| 0),
        Command::Continue(args) => cmd_continue(args).map(|()| 0),
        Command::Counterexample(args) => cmd_counterexample(args).map(|()| 0),
        Command::Verify(args) => cmd_verify(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn model(args: &ModelArgs) -> Result<ModelParams> {
    Ok(ModelParams::new(args.sigma, args.nu)?)
}

fn cmd_wavelength(args: WavelengthArgs) -> Result<()> {
    let params = model(&args.model)?;
    let point = ParamPoint::new(args.mu, args.alpha, &params)?;
    let r = wavelength(&point, &params)?;
    let mut w = Writer::open(&args.output.out, args.output.format)?;
    #[derive(serde::Serialize)]
    struct Row {
        mu: f64,
        alpha: f64,
        lambda: f64,
        d_mu: f64,
        d_alpha: f64,
        est_error: f64,
    }
    let row = Row {
        mu: args.mu,
        alpha: args.alpha,
        lambda: r.lambda,
        d_mu: r.d_mu,
        d_alpha: r.d_alpha,
        est_error: r.est_error,
    };
    w.header("mu,alpha,lambda,d_mu,d_alpha,est_error")?;
    w.row(
        &[
            fmt_f64(row.mu),
            fmt_f64(row.alpha),
            fmt_f64(row.lambda),
            fmt_f64(row.d_mu),
            fmt_f64(row.d_alpha),
            fmt_f64(row.est_error),
        ],
        &row,
    )?;
    w.finish()
}

fn cmd_curves(args: CurvesArgs) -> Result<()> {
    let params = model(&args.model)?;
    let (bc_left, bc_right) = parse::bc_pair(&args.bc)?;
    let problem = IntervalProblem::new(args.length, bc_left, bc_right, params)?;
    let ns = parse::index_range(&args.n)?;
    let grid = parse::grid(&args.alpha_grid)?;
    let mut w = Writer::open(&args.output.out, args.output.format)?;
    w.header("n,alpha,mu,nodal_count")?;
    for &n in &ns {
        if nlsg_core::model::target_wavelength(n, &problem).is_none() {
            continue; // N-N has no first curve
        }
        let samples =
            trace_curve(n, &grid, &problem).with_context(|| format!("tracing curve n = {n}"))?;
        for s in samples {
            w.row(
                &[
                    s.n.to_string(),
                    fmt_f64(s.alpha),
                    fmt_f64(s.mu),
                    s.nodal_count.to_string(),
                ],
                &s,
            )?;
        }
    }
    w.finish()
}

fn star_inputs(args: &StarArgs) -> Result<(StarPoint, StarGraph)> {
    let params = model(&args.model)?;
    let lengths = parse::f64_list(&args.lengths)?;
    let bcs = parse::bc_list(&args.bcs)?;
    let zetas = parse::sign_list(&args.zetas)?;
    let alphas = parse::f64_list(&args.alphas)?;
    let graph = StarGraph::new(lengths, bcs, params)?;
    let q = StarPoint::new(args.mu, alphas, zetas)?;
    Ok((q, graph))
}

fn star_row(point: &LocalCurvePoint, w: &mut Writer) -> Result<()> {
    let mut fields = vec![fmt_f64(point.q.mu)];
    fields.extend(point.q.alphas.iter().map(|&a| fmt_f64(a)));
    fields.push(fmt_f64(point.central_value));
    fields.push(point.nodal_count.to_string());
    fields.push(fmt_f64(point.residual_norm));
    w.row(&fields, point)
}

fn star_header(d: usize) -> String {
    let mut header = String::from("mu");
    for j in 1..=d {
        header.push_str(&format!(",alpha_{j}"));
    }
    header.push_str(",central_value,nodal_count,residual_norm");
    header
}

fn cmd_star_solve(args: StarSolveArgs) -> Result<()> {
    let (q0, graph) = star_inputs(&args.star)?;
    let q = newton_solve(&q0, &graph, q0.mu)?;
    let r = residual(&q, &graph)?;
    let point = LocalCurvePoint {
        central_value: central_value(&q, &graph)?,
        nodal_count: count_star_nodes(&q, &graph)?,
        residual_norm: scaled_residual_norm(&r, &q, &graph),
        q,
    };
    let mut w = Writer::open(&args.output.out, args.output.format)?;
    w.header(&star_header(graph.degree()))?;
    star_row(&point, &mut w)?;
    w.finish()
}

fn cmd_continue(args: ContinueArgs) -> Result<()> {
    let (q0, graph) = star_inputs(&args.star)?;
    let q_start = newton_solve(&q0, &graph, q0.mu)?;
    let run = continue_curve(&q_start, &graph, args.mu_end, args.steps)?;
    let mut w = Writer::open(&args.output.out, args.output.format)?;
    w.header(&star_header(graph.degree()))?;
    for point in &run.points {
        star_row(point, &mut w)?;
    }
    w.finish()?;
    if !run.completed {
        bail!(
            "continuation stopped early: {}",
            run.failure.unwrap_or_else(|| "unknown".into())
        );
    }
    Ok(())
}

fn cmd_counterexample(args: CounterexampleArgs) -> Result<()> {
    let config: StarConfig = if let Some(rates) = &args.rates {
        let rates = parse::u32_list(rates)?;
        let zetas = parse::sign_list(
            args.zetas
                .as_deref()
                .context("--zetas is required with --rates")?,
        )?;
        let d = rates.len();
        let ns = match &args.ns {
            Some(s) => parse::u32_list(s)?,
            None => vec![1; d],
        };
        let bcs = match &args.bcs {
            Some(s) => parse::bc_list(s)?,
            None => vec![nlsg_core::model::BoundaryCondition::Dirichlet; d],
        };
        StarConfig::from_rates(args.sigma, args.nu, zetas, ns, &rates, bcs)?
    } else {
        find_config(args.sigma, args.d, args.search_bound).with_context(|| {
            format!(
                "no configuration found for sigma = {}, d = {}, bound = {}",
                args.sigma, args.d, args.search_bound
            )
        })?
    };
    let report = demonstrate_violation(&config, args.delta_mu)?;
    let mut w = Writer::open(&args.output.out, OutputFormat::Jsonl)?;
    w.json_pretty(&report)?;
    w.finish()
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let results = verify::run_suite(&args.suite)?;
    let mut failures = 0;
    for r in &results {
        if r.ok {
            println!("PASS {} — {}", r.name, r.detail);
        } else {
            println!("FAIL {} — {}", r.name, r.detail);
            failures += 1;
        }
    }
    println!("verify: {} checks, {} failed", results.len(), failures);
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut command: Option<String> = None;
    let mut argv: Vec<String> = vec!["nlsg".into()];
    let mut flags: Vec<(String, String)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').with_context(|| {
            format!(
                "{}:{}: expected `key = value`",
                args.config.display(),
                idx + 1
            )
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key == "command" {
            command = Some(value.to_string());
        } else {
            flags.push((format!("--{key}"), value.to_string()));
        }
    }
    let command = command.context("config file must set `command = <subcommand>`")?;
    if command == "run" {
        bail!("config files cannot nest `command = run`");
    }
    argv.push(command);
    for (k, v) in flags {
        argv.push(k);
        argv.push(v);
    }
    let cli = Cli::try_parse_from(&argv)
        .with_context(|| format!("invalid config expansion: {argv:?}"))?;
    dispatch(cli.command)
}
