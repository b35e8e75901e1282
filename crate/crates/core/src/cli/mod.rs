//! Command-line front end. [`main_with_args`] is the whole program; the
//! binary only forwards `std::env::args` and the exit code.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 I/O error.

mod args;
mod commands;
pub mod csv;
mod reproduce;
pub mod svg;

use std::path::PathBuf;

use crate::operators::{FunctionSpec, LogPower, OperatorKind, OrderFunction, Side};
use crate::quadrature::QuadratureConfig;

pub use args::parse_args;
pub use reproduce::{grid_l2, l2_table_from_dir, REPRODUCE_FILES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eval,
    Approx,
    Convergence,
    SolveFde,
    SolveFvp,
    Reproduce,
}

/// `α(t) = c` or `α(t) = c0 + c1·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderSpec {
    Constant(f64),
    Linear(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub a: f64,
    pub b: f64,
    pub order: OrderSpec,
    /// Terms of `Σ c·(ln(t/a))^β`; on the right side `ln(b/t)` is used instead.
    pub function: Vec<LogPower>,
    pub n: usize,
    pub big_n: usize,
    pub kind: OperatorKind,
    pub side: Side,
    pub grid_points: usize,
    /// Explicit evaluation points; the grid is used when empty.
    pub points: Vec<f64>,
    pub output: Option<PathBuf>,
    pub emit_svg: bool,
    pub quad: QuadratureConfig,
    pub epsilon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// `--help` or `--version`: print and exit successfully.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Numerical(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl RunConfig {
    pub fn order_function(&self) -> crate::Result<OrderFunction> {
        self.order.build(self.a, self.b)
    }

    pub fn function_spec(&self, side: Side) -> crate::Result<FunctionSpec> {
        FunctionSpec::log_poly(&self.function, side, self.a, self.b)
    }

    /// Evaluation points: explicit `--t` values (sorted, deduplicated) or a
    /// uniform grid that stays off the endpoint where derivatives blow up.
    pub fn evaluation_points(&self) -> Vec<f64> {
        if !self.points.is_empty() {
            let mut p = self.points.clone();
            p.sort_by(f64::total_cmp);
            p.dedup();
            return p;
        }
        operator_grid(self.a, self.b, self.side, self.grid_points)
    }
}

/// `m` uniform points on `[a + δ, b]` (left) or `[a, b − δ]` (right) with
/// `δ = (b − a)/80`.
pub fn operator_grid(a: f64, b: f64, side: Side, m: usize) -> Vec<f64> {
    let delta = (b - a) / 80.0;
    let (lo, hi) = match side {
        Side::Left => (a + delta, b),
        Side::Right => (a, b - delta),
    };
    let m = m.max(2);
    (0..m)
        .map(|i| match i {
            0 => lo,
            i if i == m - 1 => hi,
            i => lo + (hi - lo) * i as f64 / (m - 1) as f64,
        })
        .collect()
}

/// Executes a parsed configuration and returns the exit code. Errors are
/// reported on standard error.
pub fn run(config: &RunConfig) -> i32 {
    let result = match config.command {
        Command::Eval => commands::eval(config),
        Command::Approx => commands::approx(config),
        Command::Convergence => commands::convergence(config),
        Command::SolveFde => commands::solve_fde(config),
        Command::SolveFvp => commands::solve_fvp(config),
        Command::Reproduce => reproduce::reproduce(config),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn main_with_args<S: AsRef<str>>(args: &[S]) -> i32 {
    match parse_args(args) {
        Ok(cfg) => run(&cfg),
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_avoid_the_singular_endpoint() {
        let l = operator_grid(1.0, 5.0, Side::Left, 50);
        assert_eq!((l[0], l[49], l.len()), (1.05, 5.0, 50));
        let r = operator_grid(1.0, 5.0, Side::Right, 3);
        assert_eq!(r, vec![1.0, 2.975, 4.95]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 1);
        assert_eq!(CliError::from(crate::Error::RankDeficient).exit_code(), 1);
        assert_eq!(CliError::from(std::io::Error::other("disk")).exit_code(), 3);
    }

    #[test]
    fn explicit_points_are_sorted() {
        let cfg = parse_args(&["eval", "--t", "3", "--t", "2", "--t", "3"]).unwrap();
        assert_eq!(cfg.evaluation_points(), vec![2.0, 3.0]);
    }
}
