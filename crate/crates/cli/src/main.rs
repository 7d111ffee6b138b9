mod beta;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use torsionlab::boundary_models::{boundary_residue_torsion, gluing_check, BoundaryModel, Condition, Partition};
use torsionlab::hodge_core::{betti, ChainMetric};
use torsionlab::spectral_models::{analytic_torsion, ClosedModel};
use torsionlab::torsion_engine::{classify_beta, determinant_oracle, generalized_log_torsion, log_traces};
use torsionlab::twisted_complex::{ComplexSpec, Preset, TwistedComplex};
use torsionlab::verify::{random_metric, run_suite, Suite, VerifyOptions};
use torsionlab::zeta::mellin_zeta_with_tol;
use torsionlab::zeta::mellin::quadrature_eps;
use torsionlab::TorsionError;

use beta::BetaSpec;
use output::{render, Format};

#[derive(Parser, Debug)]
#[command(name = "torsionlab", version, about = "Reidemeister, analytic and residue torsion")]
struct Cli {
    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV (`field,value` rows).
    #[arg(long, global = true)]
    csv: bool,
    /// Tolerance: quadrature target for zeta evaluations, case tolerance for `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random metrics and random verification cases.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Torsion of a finite twisted complex.
    Torsion(TorsionArgs),
    /// Spectral zeta function of a model operator.
    Zeta(ZetaArgs),
    /// Residue and analytic torsion of a model manifold.
    ModelTorsion(ModelTorsionArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Check the gluing formula on a split interval or cylinder.
    Gluing(GluingArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetName {
    Circle,
    Torus2,
    Interval,
    Point,
}

#[derive(Args, Debug)]
struct TorsionArgs {
    /// Built-in complex.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    preset: Option<PresetName>,
    /// JSON description of a complex.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Rotation angle of the circle preset.
    #[arg(long, default_value_t = PI / 2.0)]
    theta: f64,
    /// Rotation angles `a,b` of the torus preset.
    #[arg(long, value_parser = parse_angles, default_value = "1.0,0.3")]
    angles: (f64, f64),
    /// Coefficient rank of the interval and point presets.
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Degree weight: `1`, `k`, `lin:LAMBDA,MU` or a comma list.
    #[arg(long, default_value = "k")]
    beta: BetaSpec,
    /// Chain metric: `identity`, `random` or `scale:c0,c1,...`.
    #[arg(long, default_value = "identity")]
    metric: String,
}

fn parse_angles(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let angle = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", p.trim()));
    match parts.as_slice() {
        [a, b] => Ok((angle(a)?, angle(b)?)),
        _ => Err(format!("expected two angles `a,b`, got `{s}`")),
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelName {
    Circle,
    Torus,
    Sphere2,
    Point,
    Interval,
    Cylinder,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConditionName {
    Relative,
    Absolute,
}

impl From<ConditionName> for Condition {
    fn from(c: ConditionName) -> Self {
        match c {
            ConditionName::Relative => Condition::Relative,
            ConditionName::Absolute => Condition::Absolute,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    model: ModelName,
    /// Torus dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Circle length (also the circle factor of the cylinder).
    #[arg(long = "L", default_value_t = 2.0 * PI)]
    length: f64,
    /// Interval length (also the interval factor of the cylinder).
    #[arg(long = "R", default_value_t = 1.0)]
    interval_length: f64,
    /// Character angle of the circle model.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Bundle rank of the circle model (1 or 2), or the point model.
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Boundary condition for interval and cylinder models.
    #[arg(long, default_value = "relative")]
    condition: ConditionName,
    /// Eigenvalue multiplicity of interval and cylinder models.
    #[arg(long, default_value_t = 1)]
    multiplicity: usize,
}

enum AnyModel {
    Closed(ClosedModel),
    Boundary(BoundaryModel),
}

impl ModelArgs {
    fn build(&self) -> Result<AnyModel, TorsionError> {
        Ok(match self.model {
            ModelName::Circle => AnyModel::Closed(ClosedModel::circle(self.length, self.theta, self.rank)?),
            ModelName::Torus => AnyModel::Closed(ClosedModel::torus(self.n, self.length)?),
            ModelName::Sphere2 => AnyModel::Closed(ClosedModel::sphere2()),
            ModelName::Point => AnyModel::Closed(ClosedModel::point(self.rank)),
            ModelName::Interval => AnyModel::Boundary(
                BoundaryModel::interval(self.interval_length, self.condition.into())?
                    .with_multiplicity(self.multiplicity)?,
            ),
            ModelName::Cylinder => AnyModel::Boundary(
                BoundaryModel::cylinder(self.interval_length, self.length, self.condition.into())?
                    .with_multiplicity(self.multiplicity)?,
            ),
        })
    }
}

#[derive(Args, Debug)]
struct ZetaArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Form degree.
    #[arg(long, default_value_t = 0)]
    degree: usize,
    /// Real evaluation point.
    #[arg(long, allow_negative_numbers = true)]
    s: f64,
    /// Also report the derivative in `s`.
    #[arg(long)]
    derivative: bool,
}

#[derive(Args, Debug)]
struct ModelTorsionArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Degree weight: `1`, `k`, `lin:LAMBDA,MU` or a comma list.
    #[arg(long, default_value = "k")]
    beta: BetaSpec,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeometryName {
    Interval,
    Cylinder,
}

#[derive(Args, Debug)]
struct GluingArgs {
    #[arg(long)]
    geometry: GeometryName,
    #[arg(long = "R", default_value_t = 1.0)]
    length: f64,
    #[arg(long = "L", default_value_t = 2.0 * PI)]
    circumference: f64,
    /// Position of the cut in `[0, R]`.
    #[arg(long)]
    cut: Option<f64>,
    #[arg(long, default_value = "absolute")]
    condition: ConditionName,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Torsion(TorsionError),
    VerifyFailed(usize),
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        CliError::Torsion(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::VerifyFailed(_) => 1,
            CliError::Torsion(e) => match e {
                TorsionError::NotAcyclic { .. } | TorsionError::NotAcyclicPreset(_) => 3,
                TorsionError::PoleHit { .. } | TorsionError::PoleAtOne(_) => 4,
                TorsionError::ConvergenceFailure { .. }
                | TorsionError::QuadratureFailure { .. }
                | TorsionError::StepTooLarge { .. }
                | TorsionError::PivotFailure { .. } => 5,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Torsion(e) => e.to_string(),
            CliError::VerifyFailed(n) => format!("{n} verification case(s) failed"),
        }
    }
}

#[derive(Serialize)]
struct ComplexTorsionReport {
    source: String,
    dimension: usize,
    rank: usize,
    cells: Vec<usize>,
    metric: String,
    beta: Vec<f64>,
    beta_in_span: bool,
    betti: Vec<usize>,
    log_traces: Vec<f64>,
    log_torsion: f64,
    determinant_oracle: f64,
}

fn load_complex(args: &TorsionArgs) -> Result<(String, TwistedComplex), CliError> {
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let spec: ComplexSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed complex in {}: {e}", path.display())))?;
        let complex = spec.build().map_err(|e| match e {
            TorsionError::NotAcyclic { .. } => CliError::Torsion(e),
            other => CliError::Usage(format!("invalid complex in {}: {other}", path.display())),
        })?;
        return Ok((path.display().to_string(), complex));
    }
    let preset = match args.preset.expect("clap enforces preset or input") {
        PresetName::Circle => Preset::Circle { theta: args.theta },
        PresetName::Torus2 => Preset::Torus2 {
            alpha: args.angles.0,
            beta: args.angles.1,
        },
        PresetName::Interval => Preset::Interval { rank: args.rank },
        PresetName::Point => Preset::Point { rank: args.rank },
    };
    Ok((format!("{preset:?}"), preset.complex()?))
}

fn build_metric(spec: &str, complex: &TwistedComplex, seed: u64) -> Result<ChainMetric, CliError> {
    match spec {
        "identity" => Ok(ChainMetric::identity(complex)),
        "random" => Ok(random_metric(complex, &mut ChaCha8Rng::seed_from_u64(seed))?),
        other => {
            let Some(list) = other.strip_prefix("scale:") else {
                return Err(CliError::Usage(format!(
                    "unknown metric `{other}` (expected identity, random or scale:c0,c1,...)"
                )));
            };
            let scales = list
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Usage(format!("bad metric scale: {e}")))?;
            if scales.len() != complex.dimension() + 1 {
                return Err(CliError::Usage(format!(
                    "metric needs {} scales, got {}",
                    complex.dimension() + 1,
                    scales.len()
                )));
            }
            let identity = ChainMetric::identity(complex);
            Ok(ChainMetric::new(
                identity.blocks().iter().zip(&scales).map(|(b, c)| b * *c).collect(),
            )?)
        }
    }
}

fn warn_beta(beta: &torsionlab::torsion_engine::BetaWeight) {
    if !classify_beta(beta).satisfies_recurrence {
        eprintln!("warning: beta not in span{{1,k}}");
    }
}

fn cmd_torsion(args: &TorsionArgs, cli: &Cli) -> Result<String, CliError> {
    let (source, complex) = load_complex(args)?;
    let metric = build_metric(&args.metric, &complex, cli.seed)?;
    let n = complex.dimension();
    let beta = args.beta.weight(n).map_err(CliError::Usage)?;
    warn_beta(&beta);
    let b = betti(&complex, &metric)?;
    if let Some((degree, &dim)) = b.iter().enumerate().find(|(_, &d)| d > 0) {
        return Err(TorsionError::NotAcyclic { degree, dim }.into());
    }
    let traces = log_traces(&complex, &metric, true)?;
    let report = ComplexTorsionReport {
        source,
        dimension: n,
        rank: complex.rank(),
        cells: complex.cells_per_degree().to_vec(),
        metric: args.metric.clone(),
        beta: beta.0.clone(),
        beta_in_span: classify_beta(&beta).satisfies_recurrence,
        betti: b,
        log_torsion: generalized_log_torsion(&traces, &beta)?,
        log_traces: traces,
        determinant_oracle: determinant_oracle(&complex)?,
    };
    Ok(render(&report, cli.format()))
}

#[derive(Serialize)]
struct ZetaReport {
    model: String,
    degree: usize,
    s: f64,
    value: f64,
    abs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivative_abs_error: Option<f64>,
    kernel_dim: usize,
}

fn cmd_zeta(args: &ZetaArgs, cli: &Cli) -> Result<String, CliError> {
    let tol = cli.tol.unwrap_or_else(quadrature_eps);
    let (name, dim, trace) = match args.model.build()? {
        AnyModel::Closed(m) => (m.name().to_string(), m.dim(), m),
        AnyModel::Boundary(b) => {
            if args.degree > b.dim() {
                return Err(CliError::Usage(format!("degree {} exceeds dimension {}", args.degree, b.dim())));
            }
            let z = mellin_zeta_with_tol(b.trace(args.degree), args.s, tol)?;
            return Ok(render(&zeta_report(b.name().to_string(), args, z), cli.format()));
        }
    };
    if args.degree > dim {
        return Err(CliError::Usage(format!("degree {} exceeds dimension {dim}", args.degree)));
    }
    let z = mellin_zeta_with_tol(trace.trace(args.degree), args.s, tol)?;
    Ok(render(&zeta_report(name, args, z), cli.format()))
}

fn zeta_report(model: String, args: &ZetaArgs, z: torsionlab::zeta::ZetaEval) -> ZetaReport {
    ZetaReport {
        model,
        degree: args.degree,
        s: z.s,
        value: z.value,
        abs_error: z.abs_error,
        derivative: if args.derivative { z.derivative } else { None },
        derivative_abs_error: if args.derivative { z.derivative_abs_error } else { None },
        kernel_dim: z.kernel_dim,
    }
}

fn cmd_model_torsion(args: &ModelTorsionArgs, cli: &Cli) -> Result<String, CliError> {
    match args.model.build()? {
        AnyModel::Closed(m) => {
            let beta = args.beta.weight(m.dim()).map_err(CliError::Usage)?;
            warn_beta(&beta);
            Ok(render(&analytic_torsion(&m, &beta)?, cli.format()))
        }
        AnyModel::Boundary(b) => {
            let beta = args.beta.weight(b.dim()).map_err(CliError::Usage)?;
            warn_beta(&beta);
            Ok(render(&boundary_residue_torsion(&b, &beta)?, cli.format()))
        }
    }
}

fn cmd_verify(args: &VerifyArgs, cli: &Cli) -> Result<String, CliError> {
    let result = run_suite(
        args.suite,
        VerifyOptions {
            tol: cli.tol,
            seed: cli.seed,
        },
    );
    let failures = result.failures().count();
    let text = match cli.format() {
        Format::Text => {
            let mut s = String::new();
            for c in &result.cases {
                let measured = c.measured.map(output::fmt_float).unwrap_or_else(|| "-".into());
                let expected = c.expected.map(output::fmt_float).unwrap_or_else(|| "-".into());
                s.push_str(&format!(
                    "{} {}  {}  expected {} measured {} tol {}{}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.description,
                    expected,
                    measured,
                    output::fmt_float(c.tolerance),
                    c.detail.as_ref().map(|d| format!("  ({d})")).unwrap_or_default()
                ));
            }
            s.push_str(&format!(
                "{}: {} of {} cases passed\n",
                result.suite,
                result.cases.len() - failures,
                result.cases.len()
            ));
            s
        }
        f => render(&result, f),
    };
    if failures > 0 {
        print!("{text}");
        return Err(CliError::VerifyFailed(failures));
    }
    Ok(text)
}

fn cmd_gluing(args: &GluingArgs, cli: &Cli) -> Result<String, CliError> {
    let cut = args.cut.unwrap_or(0.5 * args.length);
    let condition = args.condition.into();
    let partition = match args.geometry {
        GeometryName::Interval => Partition::Interval {
            length: args.length,
            cut,
            condition,
        },
        GeometryName::Cylinder => Partition::Cylinder {
            length: args.length,
            circumference: args.circumference,
            cut,
            condition,
        },
    };
    let report = gluing_check(&partition, cli.tol.unwrap_or(1e-8))?;
    Ok(render(&report, cli.format()))
}

impl Cli {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            Format::Text
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Torsion(a) => cmd_torsion(a, cli),
        Command::Zeta(a) => cmd_zeta(a, cli),
        Command::ModelTorsion(a) => cmd_model_torsion(a, cli),
        Command::Verify(a) => cmd_verify(a, cli),
        Command::Gluing(a) => cmd_gluing(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
