use std::collections::HashMap;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use super::{CliError, Command, OrderSpec, RunConfig};
use crate::operators::{LogPower, OperatorKind, OrderFunction, Side};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Parser)]
#[command(
    name = "hadamard-vo",
    about = "Variable-order Hadamard fractional operators: evaluation, expansions, error bounds and solvers",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evaluate an operator by quadrature and, where available, in closed form.
    Eval(Flags),
    /// Compare the expansion with the exact operator, with error bounds.
    Approx(Flags),
    /// L2 and maximum errors of the expansion for N = n+1 ..= N.
    Convergence(Flags),
    /// Solve D x + x = D x̄ + x̄ with x̄ the given function.
    SolveFde(Flags),
    /// Solve the tracking problem whose exact minimizer is the given function.
    SolveFvp(Flags),
    /// Regenerate the comparison datasets, bound checks and the L2 error table.
    Reproduce(Flags),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Integral,
    Hadamard,
    Marchaud,
    Caputo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// Left endpoint a > 0.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Right endpoint b > a.
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// `constant:c` or `linear:c0:c1` for α(t) = c0 + c1·t.
    #[arg(long)]
    order: Option<String>,
    /// `logpoly:c1:β1[:c2:β2...]` for Σ c·(ln(t/a))^β.
    #[arg(long)]
    function: Option<String>,
    /// Number of derivative terms.
    #[arg(long)]
    n: Option<usize>,
    /// Expansion size.
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    kind: Option<KindArg>,
    #[arg(long)]
    side: Option<SideArg>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Evaluate at these points instead of a grid (repeatable).
    #[arg(long = "t", allow_negative_numbers = true)]
    points: Vec<f64>,
    /// Output file (directory for `reproduce`); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG line plots next to the CSV output.
    #[arg(long)]
    svg: bool,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Solver start offset; defaults to 1e-4·(b − a).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Solver RK4 steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Flat `key=value` file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "a", "b", "order", "function", "n", "N", "kind", "side", "grid-points", "out", "svg", "rel-tol", "abs-tol", "epsilon", "steps",
];

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value for --{flag}: {msg}"))
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {} is not key=value: {line}", i + 1)));
        };
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(CliError::Usage(format!("unknown config key '{k}' on line {}", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_kind(s: &str) -> Result<OperatorKind, CliError> {
    Ok(match KindArg::from_str(s, true).map_err(|e| usage("kind", e))? {
        KindArg::Integral => OperatorKind::Integral,
        KindArg::Hadamard => OperatorKind::HadamardDeriv,
        KindArg::Marchaud => OperatorKind::Marchaud,
        KindArg::Caputo => OperatorKind::Caputo,
    })
}

fn parse_side(s: &str) -> Result<Side, CliError> {
    Ok(match SideArg::from_str(s, true).map_err(|e| usage("side", e))? {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
    })
}

fn kind_name(k: KindArg) -> &'static str {
    match k {
        KindArg::Integral => "integral",
        KindArg::Hadamard => "hadamard",
        KindArg::Marchaud => "marchaud",
        KindArg::Caputo => "caputo",
    }
}

fn side_name(s: SideArg) -> &'static str {
    match s {
        SideArg::Left => "left",
        SideArg::Right => "right",
    }
}

fn numbers(flag: &str, parts: &[&str]) -> Result<Vec<f64>, CliError> {
    parts.iter().map(|p| p.trim().parse::<f64>().map_err(|e| usage(flag, format!("'{p}': {e}")))).collect()
}

pub(super) fn parse_order(s: &str) -> Result<OrderSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["constant", c] => Ok(OrderSpec::Constant(numbers("order", &[c])?[0])),
        ["linear", c0, c1] => {
            let v = numbers("order", &[c0, c1])?;
            Ok(OrderSpec::Linear(v[0], v[1]))
        }
        _ => Err(usage("order", format!("expected constant:c or linear:c0:c1, got '{s}'"))),
    }
}

pub(super) fn parse_function(s: &str) -> Result<Vec<LogPower>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.first() != Some(&"logpoly") || parts.len() < 3 || parts.len().is_multiple_of(2) {
        return Err(usage("function", format!("expected logpoly:c:beta[:c:beta...], got '{s}'")));
    }
    let v = numbers("function", &parts[1..])?;
    let terms: Vec<LogPower> = v.chunks(2).map(|c| LogPower { coef: c[0], beta: c[1] }).collect();
    if let Some(p) = terms.iter().find(|p| !(p.beta >= 0.0)) {
        return Err(usage("function", format!("exponents must be non-negative, got {}", p.beta)));
    }
    Ok(terms)
}

fn pick<T>(flag: Option<T>, file: &HashMap<String, String>, key: &str, parse: impl Fn(&str) -> Result<T, CliError>) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key).map(|s| parse(s)).transpose(),
    }
}

fn num<T: std::str::FromStr>(key: &'static str) -> impl Fn(&str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    move |s| s.parse::<T>().map_err(|e| usage(key, format!("'{s}': {e}")))
}

/// Parses arguments (without the program name) into a validated configuration.
pub fn parse_args<S: AsRef<str>>(argv: &[S]) -> Result<RunConfig, CliError> {
    let full = std::iter::once("hadamard-vo").chain(argv.iter().map(|s| s.as_ref()));
    let cli = Cli::try_parse_from(full).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let (command, flags) = match cli.command {
        Sub::Eval(f) => (Command::Eval, f),
        Sub::Approx(f) => (Command::Approx, f),
        Sub::Convergence(f) => (Command::Convergence, f),
        Sub::SolveFde(f) => (Command::SolveFde, f),
        Sub::SolveFvp(f) => (Command::SolveFvp, f),
        Sub::Reproduce(f) => (Command::Reproduce, f),
    };
    let file = match &flags.config {
        Some(p) => read_config(p)?,
        None => HashMap::new(),
    };
    let a = pick(flags.a, &file, "a", num("a"))?.unwrap_or(1.0);
    let b = pick(flags.b, &file, "b", num("b"))?.unwrap_or(5.0);
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(CliError::Usage(format!("invalid value for --a/--b: need 0 < a < b, got a = {a}, b = {b}")));
    }
    let order = pick(flags.order.clone(), &file, "order", |s| Ok(s.to_string()))?.unwrap_or_else(|| "linear:0:0.1".into());
    let order = parse_order(&order)?;
    order.build(a, b).map_err(|e| usage("order", e))?;
    let function = pick(flags.function.clone(), &file, "function", |s| Ok(s.to_string()))?.unwrap_or_else(|| "logpoly:1:2".into());
    let function = parse_function(&function)?;
    let n = pick(flags.n, &file, "n", num("n"))?.unwrap_or(1);
    let big_n = pick(flags.big_n, &file, "N", num("N"))?.unwrap_or(4);
    if n < 1 {
        return Err(usage("n", "must be at least 1"));
    }
    if big_n < n + 1 {
        return Err(usage("N", format!("must be at least n + 1 = {}", n + 1)));
    }
    let kind = match flags.kind {
        Some(k) => parse_kind(kind_name(k))?,
        None => file.get("kind").map(|s| parse_kind(s)).transpose()?.unwrap_or(OperatorKind::Integral),
    };
    let side = match flags.side {
        Some(s) => parse_side(side_name(s))?,
        None => file.get("side").map(|s| parse_side(s)).transpose()?.unwrap_or(Side::Left),
    };
    if kind == OperatorKind::Caputo && side == Side::Right {
        return Err(usage("side", "the Caputo derivative is only available on the left"));
    }
    let default_points = if command == Command::Reproduce { 200 } else { 50 };
    let grid_points = pick(flags.grid_points, &file, "grid-points", num("grid-points"))?.unwrap_or(default_points);
    if grid_points < 2 {
        return Err(usage("grid-points", "need at least 2 points"));
    }
    if let Some(t) = flags.points.iter().find(|t| !(**t >= a && **t <= b)) {
        return Err(usage("t", format!("{t} lies outside [{a}, {b}]")));
    }
    let output = pick(flags.out.clone(), &file, "out", |s| Ok(PathBuf::from(s)))?;
    let emit_svg = flags.svg || pick(None, &file, "svg", num::<bool>("svg"))?.unwrap_or(false);
    let output = match (command, output) {
        (Command::Reproduce, None) => Some(PathBuf::from("out")),
        (_, None) if emit_svg => return Err(usage("svg", "needs --out to name the plot file")),
        (_, o) => o,
    };
    let defaults = QuadratureConfig::default();
    let rel_tol = pick(flags.rel_tol, &file, "rel-tol", num("rel-tol"))?.unwrap_or(defaults.rel_tol);
    let abs_tol = pick(flags.abs_tol, &file, "abs-tol", num("abs-tol"))?.unwrap_or(defaults.abs_tol);
    let quad = QuadratureConfig::with_tolerances(rel_tol, abs_tol);
    quad.validate().map_err(|e| usage("rel-tol", e))?;
    let epsilon = pick(flags.epsilon, &file, "epsilon", num("epsilon"))?.unwrap_or(1e-4 * (b - a));
    if !(epsilon > 0.0 && a + epsilon < b) {
        return Err(usage("epsilon", format!("must lie in (0, b − a), got {epsilon}")));
    }
    let steps = pick(flags.steps, &file, "steps", num("steps"))?.unwrap_or(2000);
    if steps == 0 {
        return Err(usage("steps", "must be positive"));
    }
    Ok(RunConfig {
        command,
        a,
        b,
        order,
        function,
        n,
        big_n,
        kind,
        side,
        grid_points,
        points: flags.points,
        output,
        emit_svg,
        quad,
        epsilon,
        steps,
    })
}

impl OrderSpec {
    pub fn build(&self, a: f64, b: f64) -> crate::Result<OrderFunction> {
        match *self {
            OrderSpec::Constant(c) => OrderFunction::constant(c, a, b),
            OrderSpec::Linear(c0, c1) => OrderFunction::linear(c0, c1, a, b),
        }
    }
}
