//! Command-line interface: argument parsing, oracle construction, and JSON
//! report emission.
//!
//! Exit codes: 0 = pass/success, 1 = mathematical refutation (the test
//! failed), 2 = usage or input error. A JSON report is emitted on 0 and 1,
//! to stdout or to `--json-out`. `EXPRECOG_SEED` overrides `--seed` when
//! set, so whole suites can be re-seeded without touching scripts.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::parse_expression;
use crate::hankel::{estimate_order, popoviciu_test, TestGrid};
use crate::lattice::{density_probe, generators_in_ball};
use crate::montel::{certify, Conclusion, MontelHypothesis};
use crate::oracle::{line_restriction, FunctionOracle};
use crate::recurrence::{fit_recurrence_any, recover_1d, RecoveryConfig, RecoveryOutcome};
use crate::report::{
    render, ComplexJson, ConfigJson, Envelope, ModelJson, MultiModelJson, RonkinJson, WindowJson,
    TOOL_NAME, TOOL_VERSION,
};
use crate::ronkin::RonkinConversion;
use crate::samples::{format_from_path, load_samples};

#[derive(Parser)]
#[command(
    name = "exprecog",
    version,
    about = "Hankel-determinant functional equation tests and exponential polynomial recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test determinant vanishing at a fixed order over a seeded grid
    Check(CheckArgs),
    /// Find the smallest order at which the determinant test passes
    Order(OrderArgs),
    /// Recover a 1-D exponential polynomial model from an oracle or samples
    Fit(FitArgs),
    /// Fit step coefficients over a range of steps and verify the relation
    Rado(RadoArgs),
    /// Build dense-subgroup generators in a ball and probe density
    Generators(GeneratorsArgs),
    /// Verify the finite span conditions at the generators and certify
    Montel(MontelArgs),
    /// Restrict to lines and recover a 1-D model along each
    Lines(LinesArgs),
    /// Decide whether a Ronkin form is an exponential polynomial
    Ronkin(RonkinArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Closed-form expression in variables x1..xd
    #[arg(long, conflicts_with = "input")]
    expr: Option<String>,
    /// Sample file, JSON or CSV by extension
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of variables (required with --expr)
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Vanishing/rank tolerance for determinant and span tests
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Number of base points and steps in seeded grids
    #[arg(long, default_value_t = 12)]
    grid_size: usize,
    /// RNG seed; the EXPRECOG_SEED environment variable overrides it
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the JSON report to this path instead of stdout
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Order n of the (n+1)x(n+1) windows
    #[arg(long)]
    order: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest order to probe
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest order to probe
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Second fitting step for aliasing confirmation (closed-form oracles)
    #[arg(long)]
    confirm_step: Option<f64>,
    /// Held-out relative error at which a model is accepted
    #[arg(long, default_value_t = 1e-6)]
    accept_tol: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RadoArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Recurrence order; defaults to the estimated minimal order
    #[arg(long)]
    order: Option<usize>,
    /// Largest order to probe when --order is absent
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GeneratorsArgs {
    /// Dimension d of the ambient space
    #[arg(long)]
    dim: usize,
    /// Ball radius the generators must fit in
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ball center, comma-separated (defaults to the origin)
    #[arg(long)]
    center: Option<String>,
    /// Sup-norm error at which a probe target counts as hit
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    /// Sweep bound for the theta-generator coefficient
    #[arg(long, default_value_t = 10_000)]
    budget: i64,
    /// Number of seeded probe targets
    #[arg(long, default_value_t = 100)]
    targets: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct MontelArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Span order for every generator; defaults to the estimated order
    #[arg(long)]
    order: Option<usize>,
    /// Largest order to probe when --order is absent
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Radius of the ball the generators are drawn from
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ball center, comma-separated (defaults to the origin)
    #[arg(long)]
    center: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LinesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest order to probe per line
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Held-out relative error at which a line model is accepted
    #[arg(long, default_value_t = 1e-6)]
    accept_tol: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct RonkinArgs {
    /// Ronkin form description (JSON)
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

/// Outcome of one CLI invocation.
#[derive(Debug)]
pub struct CommandResult {
    pub exit_code: i32,
    /// Report destined for stdout (absent when --json-out consumed it or on
    /// errors).
    pub stdout: Option<String>,
    /// Diagnostic destined for stderr.
    pub stderr: Option<String>,
}

impl CommandResult {
    fn usage_error(message: String) -> Self {
        Self { exit_code: 2, stdout: None, stderr: Some(message) }
    }
}

/// Parse argv and run the selected subcommand.
pub fn run_command<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves 0 for --help/--version renders.
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let rendered = e.render().to_string();
            return if code == 0 {
                CommandResult { exit_code: 0, stdout: Some(rendered), stderr: None }
            } else {
                CommandResult::usage_error(rendered)
            };
        }
    };
    let outcome = match cli.command {
        Command::Check(args) => run_check(args),
        Command::Order(args) => run_order(args),
        Command::Fit(args) => run_fit(args),
        Command::Rado(args) => run_rado(args),
        Command::Generators(args) => run_generators(args),
        Command::Montel(args) => run_montel(args),
        Command::Lines(args) => run_lines(args),
        Command::Ronkin(args) => run_ronkin(args),
    };
    match outcome {
        Ok(result) => result,
        Err(e) => CommandResult::usage_error(format!("error: {e}")),
    }
}

fn resolve_seed(flag: u64) -> u64 {
    match std::env::var("EXPRECOG_SEED") {
        Ok(text) => text.trim().parse().unwrap_or(flag),
        Err(_) => flag,
    }
}

fn validate_common(common: &CommonArgs) -> Result<(f64, usize, u64)> {
    if common.tol <= 0.0 {
        return Err(Error::invalid("--tol must be positive"));
    }
    if common.grid_size < 4 {
        return Err(Error::invalid("--grid-size must be at least 4"));
    }
    Ok((common.tol, common.grid_size, resolve_seed(common.seed)))
}

fn build_oracle(input: &InputArgs) -> Result<(FunctionOracle, ConfigJson)> {
    let mut config = ConfigJson::default();
    match (&input.expr, &input.input) {
        (Some(text), None) => {
            let dim = input
                .dim
                .ok_or_else(|| Error::invalid("--dim is required with --expr"))?;
            let expr = parse_expression(text, dim)?;
            config.expr = Some(text.clone());
            config.dim = Some(dim);
            Ok((FunctionOracle::from_expression(expr), config))
        }
        (None, Some(path)) => {
            let samples = load_samples(path, format_from_path(path))?;
            if let Some(dim) = input.dim {
                if dim != samples.dim {
                    return Err(Error::invalid(format!(
                        "--dim {dim} does not match the {}-dimensional sample file",
                        samples.dim
                    )));
                }
            }
            config.input = Some(path.display().to_string());
            config.dim = Some(samples.dim);
            Ok((FunctionOracle::from_samples(&samples)?, config))
        }
        (Some(_), Some(_)) => Err(Error::invalid("--expr and --input are mutually exclusive")),
        (None, None) => Err(Error::invalid("one of --expr or --input is required")),
    }
}

fn emit<T: Serialize>(
    common: &CommonArgs,
    envelope: &Envelope<T>,
    exit_code: i32,
) -> Result<CommandResult> {
    let text = render(envelope);
    if let Some(path) = &common.json_out {
        std::fs::write(path, &text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(CommandResult { exit_code, stdout: None, stderr: None })
    } else {
        Ok(CommandResult { exit_code, stdout: Some(text), stderr: None })
    }
}

fn parse_center(text: Option<&str>, dim: usize) -> Result<Vec<f64>> {
    match text {
        None => Ok(vec![0.0; dim]),
        Some(t) => {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            if parts.len() != dim {
                return Err(Error::invalid(format!(
                    "--center needs {dim} comma-separated coordinates, got {}",
                    parts.len()
                )));
            }
            parts
                .iter()
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| Error::invalid(format!("bad coordinate {p:?} in --center")))
                })
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckResult {
    order: usize,
    pass: bool,
    windows_tested: usize,
    worst_magnitude: f64,
    worst_raw_det: ComplexJson,
    worst_window: WindowJson,
}

fn run_check(args: CheckArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let (f, mut config) = build_oracle(&args.input)?;
    config.order = Some(args.order);
    config.tol = tol;
    config.grid_size = grid_size;
    config.seed = seed;
    let grid = TestGrid::for_oracle(&f, args.order, seed, tol, grid_size)?;
    let report = popoviciu_test(&f, args.order, &grid)?;
    let status = if report.pass { "pass" } else { "fail" };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "check",
        config,
        status: status.into(),
        result: CheckResult {
            order: args.order,
            pass: report.pass,
            windows_tested: report.windows_tested,
            worst_magnitude: report.worst_magnitude,
            worst_raw_det: report.worst_raw_det.into(),
            worst_window: (&report.worst_window).into(),
        },
    };
    emit(&args.common, &envelope, if report.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// order
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OrderResult {
    n_max: usize,
    order: Option<usize>,
    probes: Vec<OrderProbeJson>,
}

#[derive(Serialize)]
struct OrderProbeJson {
    order: usize,
    pass: bool,
    worst_magnitude: f64,
}

fn run_order(args: OrderArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let (f, mut config) = build_oracle(&args.input)?;
    config.n_max = Some(args.n_max);
    config.tol = tol;
    config.grid_size = grid_size;
    config.seed = seed;
    let grid = TestGrid::for_oracle(&f, args.n_max, seed, tol, grid_size)?;
    let estimate = estimate_order(&f, args.n_max, &grid)?;
    let status = if estimate.order.is_some() { "found" } else { "not-found" };
    let exit = if estimate.order.is_some() { 0 } else { 1 };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "order",
        config,
        status: status.into(),
        result: OrderResult {
            n_max: args.n_max,
            order: estimate.order,
            probes: estimate
                .probes
                .iter()
                .map(|p| OrderProbeJson {
                    order: p.order,
                    pass: p.pass,
                    worst_magnitude: p.worst_magnitude,
                })
                .collect(),
        },
    };
    emit(&args.common, &envelope, exit)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(untagged)]
enum FitResult {
    Recovered {
        order: usize,
        fit_residual: f64,
        aliasing_resolved: bool,
        conditioning_warning: bool,
        model: ModelJson,
    },
    Failed {
        stage: &'static str,
        detail: String,
    },
}

fn run_fit(args: FitArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    if args.accept_tol <= 0.0 {
        return Err(Error::invalid("--accept-tol must be positive"));
    }
    let (f, mut config) = build_oracle(&args.input)?;
    if f.dim() != 1 {
        return Err(Error::invalid("fit requires a 1-dimensional oracle"));
    }
    config.n_max = Some(args.n_max);
    config.tol = tol;
    config.accept_tol = Some(args.accept_tol);
    config.grid_size = grid_size;
    config.seed = seed;
    config.confirm_step = args.confirm_step;
    let recovery = RecoveryConfig {
        confirm_step: args.confirm_step,
        accept_tol: args.accept_tol,
        det_tol: tol,
        grid_size,
        seed,
        ..RecoveryConfig::default()
    };
    let outcome = recover_1d(&f, args.n_max.max(1), &recovery)?;
    let (status, exit, result) = match outcome {
        RecoveryOutcome::Recovered(rec) => (
            "recovered",
            0,
            FitResult::Recovered {
                order: rec.order,
                fit_residual: rec.fit_residual,
                aliasing_resolved: rec.aliasing_resolved,
                conditioning_warning: rec.conditioning_warning,
                model: ModelJson::from_exppoly_1d(&rec.model)?,
            },
        ),
        RecoveryOutcome::NotExponentialPolynomial { stage, detail } => (
            "not-exponential-polynomial",
            1,
            FitResult::Failed { stage: stage.as_str(), detail },
        ),
    };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "fit",
        config,
        status: status.into(),
        result,
    };
    emit(&args.common, &envelope, exit)
}

// ---------------------------------------------------------------------------
// rado
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RadoResult {
    order: usize,
    steps: usize,
    base_points: usize,
    pass: bool,
    worst_residual: f64,
    witness_x: Vec<f64>,
    witness_h: Vec<f64>,
}

fn run_rado(args: RadoArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let (f, mut config) = build_oracle(&args.input)?;
    config.tol = tol;
    config.grid_size = grid_size;
    config.seed = seed;
    config.n_max = Some(args.n_max);

    let order = match args.order {
        Some(n) => n,
        None => {
            let grid = TestGrid::for_oracle(&f, args.n_max, seed, tol, grid_size)?;
            match estimate_order(&f, args.n_max, &grid)?.order {
                Some(n) => n.max(1),
                None => {
                    let envelope = Envelope {
                        tool: TOOL_NAME,
                        version: TOOL_VERSION,
                        command: "rado",
                        config,
                        status: "not-found".into(),
                        result: serde_json::json!({
                            "detail": format!(
                                "no order up to {} passes the determinant test",
                                args.n_max
                            ),
                        }),
                    };
                    return emit(&args.common, &envelope, 1);
                }
            }
        }
    };
    if order < 1 {
        return Err(Error::invalid("--order must be at least 1"));
    }
    config.order = Some(order);

    let grid = TestGrid::for_oracle(&f, order, seed, tol, grid_size)?;
    let mut coeff_samples = Vec::with_capacity(grid.steps.len());
    for h in &grid.steps {
        let (a, _residual) = fit_recurrence_any(&f, order, h, &grid.base_points)?;
        coeff_samples.push((h.clone(), a));
    }
    let report = crate::montel::rado_test(&f, &coeff_samples, &grid.base_points, tol)?;
    let status = if report.pass { "pass" } else { "fail" };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "rado",
        config,
        status: status.into(),
        result: RadoResult {
            order,
            steps: coeff_samples.len(),
            base_points: grid.base_points.len(),
            pass: report.pass,
            worst_residual: report.worst_residual,
            witness_x: report.witness.0,
            witness_h: report.witness.1,
        },
    };
    emit(&args.common, &envelope, if report.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GeneratorsResult {
    dim: usize,
    scale: f64,
    theta: Option<Vec<f64>>,
    generators: Vec<Vec<f64>>,
    hit_rate: f64,
    worst_error: f64,
}

fn run_generators(args: GeneratorsArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    if args.dim < 1 {
        return Err(Error::invalid("--dim must be at least 1"));
    }
    if args.eps <= 0.0 {
        return Err(Error::invalid("--eps must be positive"));
    }
    if args.budget < 1 {
        return Err(Error::invalid("--budget must be at least 1"));
    }
    let center = parse_center(args.center.as_deref(), args.dim)?;
    let set = generators_in_ball(&center, args.radius)?;
    let probe = density_probe(&set, args.targets, args.eps, args.budget, seed)?;
    let pass = probe.hit_rate == 1.0;
    let config = ConfigJson {
        dim: Some(args.dim),
        tol,
        grid_size,
        seed,
        budget: Some(args.budget),
        radius: Some(args.radius),
        center: Some(center),
        eps: Some(args.eps),
        targets: Some(args.targets),
        ..ConfigJson::default()
    };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "generators",
        config,
        status: if pass { "pass" } else { "fail" }.into(),
        result: GeneratorsResult {
            dim: args.dim,
            scale: set.scale(),
            theta: set.theta().map(|t| t.to_vec()),
            generators: set.generators().to_vec(),
            hit_rate: probe.hit_rate,
            worst_error: probe.worst_error,
        },
    };
    emit(&args.common, &envelope, if pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// montel
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MontelResult {
    conclusion: &'static str,
    note: &'static str,
    orders: Vec<usize>,
    per_generator: Vec<GeneratorCheckJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovered: Option<FitSummaryJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    line_models: Vec<LineModelJson>,
}

#[derive(Serialize)]
struct GeneratorCheckJson {
    generator: Vec<f64>,
    order: usize,
    observed_rank: usize,
    pass: bool,
    robust_failure: bool,
}

#[derive(Serialize)]
struct FitSummaryJson {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Serialize)]
struct LineModelJson {
    direction: Vec<f64>,
    #[serde(flatten)]
    fit: FitSummaryJson,
}

fn fit_summary(outcome: &RecoveryOutcome) -> Result<FitSummaryJson> {
    Ok(match outcome {
        RecoveryOutcome::Recovered(rec) => FitSummaryJson {
            status: "recovered",
            order: Some(rec.order),
            fit_residual: Some(rec.fit_residual),
            model: Some(ModelJson::from_exppoly_1d(&rec.model)?),
            stage: None,
            detail: None,
        },
        RecoveryOutcome::NotExponentialPolynomial { stage, detail } => FitSummaryJson {
            status: "not-exponential-polynomial",
            order: None,
            fit_residual: None,
            model: None,
            stage: Some(stage.as_str()),
            detail: Some(detail.clone()),
        },
    })
}

fn run_montel(args: MontelArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let (f, mut config) = build_oracle(&args.input)?;
    if f.lattice().is_some() {
        return Err(Error::invalid(
            "montel needs a closed-form oracle: the generator steps are irrational and \
             cannot stay on a sample lattice",
        ));
    }
    config.tol = tol;
    config.grid_size = grid_size;
    config.seed = seed;
    config.n_max = Some(args.n_max);
    config.radius = Some(args.radius);
    let center = parse_center(args.center.as_deref(), f.dim())?;
    config.center = Some(center.clone());

    let order = match args.order {
        Some(n) => n,
        None => {
            let grid = TestGrid::for_oracle(&f, args.n_max, seed, tol, grid_size)?;
            estimate_order(&f, args.n_max, &grid)?
                .order
                .unwrap_or(args.n_max)
                .max(1)
        }
    };
    config.order = Some(order);

    let generators = generators_in_ball(&center, args.radius)?;
    let hyp = MontelHypothesis::with_default_grid(generators, order, seed, tol)?;
    let recovery = RecoveryConfig { det_tol: tol, grid_size, seed, ..RecoveryConfig::default() };
    let bundle = certify(&f, &hyp, &recovery)?;

    let conclusion = bundle.montel.conclusion;
    let recovered = match &bundle.recovered {
        Some(outcome) => Some(fit_summary(outcome)?),
        None => None,
    };
    let mut line_models = Vec::new();
    for (direction, outcome) in &bundle.line_models {
        line_models.push(LineModelJson { direction: direction.clone(), fit: fit_summary(outcome)? });
    }
    let result = MontelResult {
        conclusion: conclusion.as_str(),
        note: "certification is numerical evidence from finite rank tests, not a proof",
        orders: hyp.orders.clone(),
        per_generator: bundle
            .montel
            .per_generator
            .iter()
            .map(|g| GeneratorCheckJson {
                generator: g.generator.clone(),
                order: g.order,
                observed_rank: g.observed_rank,
                pass: g.pass,
                robust_failure: g.robust_failure,
            })
            .collect(),
        recovered,
        line_models,
    };
    let status = match conclusion {
        Conclusion::CertifiedExponentialPolynomial => "certified-numerical",
        Conclusion::Refuted => "refuted",
        Conclusion::Inconclusive => "inconclusive",
    };
    let exit = if conclusion == Conclusion::CertifiedExponentialPolynomial { 0 } else { 1 };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "montel",
        config,
        status: status.into(),
        result,
    };
    emit(&args.common, &envelope, exit)
}

// ---------------------------------------------------------------------------
// lines
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LinesResult {
    total: usize,
    recovered: usize,
    lines: Vec<LineJson>,
}

#[derive(Serialize)]
struct LineJson {
    x0: Vec<f64>,
    h0: Vec<f64>,
    #[serde(flatten)]
    fit: FitSummaryJson,
}

fn run_lines(args: LinesArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let (f, mut config) = build_oracle(&args.input)?;
    if f.dim() > 1 && f.lattice().is_some() {
        return Err(Error::invalid(
            "lines on multivariate sampled data would leave the sample lattice; \
             supply a closed-form expression",
        ));
    }
    config.tol = tol;
    config.grid_size = grid_size;
    config.seed = seed;
    config.n_max = Some(args.n_max);
    config.accept_tol = Some(args.accept_tol);

    let recovery = RecoveryConfig {
        accept_tol: args.accept_tol,
        det_tol: tol,
        grid_size,
        seed,
        ..RecoveryConfig::default()
    };
    let dim = f.dim();
    let mut lines: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    if dim == 1 {
        lines.push((vec![0.0], vec![1.0]));
    } else {
        // Coordinate axes through the origin, then seeded random lines.
        for axis in 0..dim {
            let mut h0 = vec![0.0; dim];
            h0[axis] = 1.0;
            lines.push((vec![0.0; dim], h0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while lines.len() < dim + grid_size {
            let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if h0.iter().map(|c| c * c).sum::<f64>().sqrt() < 0.3 {
                continue;
            }
            lines.push((x0, h0));
        }
    }
    let mut rows = Vec::with_capacity(lines.len());
    let mut recovered_count = 0usize;
    for (x0, h0) in &lines {
        let restricted = if dim == 1 { f.clone() } else { line_restriction(&f, x0, h0)? };
        let outcome = recover_1d(&restricted, args.n_max.max(1), &recovery)?;
        if outcome.recovered().is_some() {
            recovered_count += 1;
        }
        rows.push(LineJson { x0: x0.clone(), h0: h0.clone(), fit: fit_summary(&outcome)? });
    }
    let all = recovered_count == rows.len();
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "lines",
        config,
        status: if all { "all-lines-recovered" } else { "some-lines-failed" }.into(),
        result: LinesResult { total: rows.len(), recovered: recovered_count, lines: rows },
    };
    emit(&args.common, &envelope, if all { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// ronkin
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(untagged)]
enum RonkinResult {
    Converted {
        exponent_total_degrees: Vec<usize>,
        model: MultiModelJson,
    },
    Rejected {
        exponent_total_degrees: Vec<usize>,
        offending_terms: Vec<usize>,
        witness_direction: Vec<f64>,
    },
}

fn run_ronkin(args: RonkinArgs) -> Result<CommandResult> {
    let (tol, grid_size, seed) = validate_common(&args.common)?;
    let text = std::fs::read_to_string(&args.input).map_err(|e| Error::Io {
        path: args.input.display().to_string(),
        message: e.to_string(),
    })?;
    let form = RonkinJson::parse(&text)?.to_form()?;
    let config = ConfigJson {
        input: Some(args.input.display().to_string()),
        dim: Some(form.dim()),
        tol,
        grid_size,
        seed,
        ..ConfigJson::default()
    };
    let degrees = form.total_degrees();
    let (status, exit, result) = match form.to_exppoly() {
        RonkinConversion::ExpPoly(p) => (
            "exponential-polynomial",
            0,
            RonkinResult::Converted {
                exponent_total_degrees: degrees,
                model: MultiModelJson::from_exppoly(&p),
            },
        ),
        RonkinConversion::Rejected { offending_terms, witness_direction } => (
            "rejected",
            1,
            RonkinResult::Rejected {
                exponent_total_degrees: degrees,
                offending_terms,
                witness_direction,
            },
        ),
    };
    let envelope = Envelope {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "ronkin",
        config,
        status: status.into(),
        result,
    };
    emit(&args.common, &envelope, exit)
}
