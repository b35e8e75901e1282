use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::csv::{fmt_num, Table};
use super::reproduce::grid_l2;
use super::svg::{self, Series};
use super::{CliError, RunConfig};
use crate::bounds::{error_bound, DEFAULT_SAMPLES};
use crate::expansion::{approximate_on_grid, ExpansionConfig};
use crate::operators::{closed_form, oracle, FunctionSpec, OperatorKind, OrderFunction, Side};
use crate::solvers::{fde_solve, fvp_solve, trajectory_l2_error, FdeProblem, FvpProblem, TrajectorySolution};

pub(super) fn kind_label(kind: OperatorKind) -> &'static str {
    match kind {
        OperatorKind::Integral => "integral",
        OperatorKind::HadamardDeriv => "hadamard",
        OperatorKind::Marchaud => "marchaud",
        OperatorKind::Caputo => "caputo",
    }
}

pub(super) fn side_label(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Writes `table` to `out` (standard output when `None`).
pub(super) fn emit(table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => table.write_file(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_to(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

pub(super) fn write_svg(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<(), CliError> {
    std::fs::write(path, svg::render(title, x_label, y_label, series)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn svg_path(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

fn plot_columns(cfg: &RunConfig, table: &Table, x: &str, ys: &[&str], title: &str) -> Result<(), CliError> {
    let (Some(out), true) = (cfg.output.as_deref(), cfg.emit_svg) else {
        return Ok(());
    };
    let xs = table.numbers(x)?;
    let mut series = Vec::new();
    for name in ys {
        let c = table.column(name).expect("column present");
        let pts = xs
            .iter()
            .zip(&table.rows)
            .map(|(t, r)| (*t, r[c].parse::<f64>().unwrap_or(f64::NAN)))
            .collect();
        series.push(Series { label: name.to_string(), points: pts });
    }
    write_svg(&svg_path(out), title, x, "value", &series)
}

struct Setup {
    of: OrderFunction,
    fs: FunctionSpec,
    points: Vec<f64>,
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    Ok(Setup {
        of: cfg.order_function()?,
        fs: cfg.function_spec(cfg.side)?,
        points: cfg.evaluation_points(),
    })
}

fn exact_values(cfg: &RunConfig, s: &Setup) -> Vec<Option<f64>> {
    s.points.par_iter().map(|&t| closed_form(cfg.kind, cfg.side, &s.fs, &s.of, t).ok()).collect()
}

/// Closed form where one exists, the quadrature oracle otherwise.
pub(super) fn reference_values(kind: OperatorKind, side: Side, fs: &FunctionSpec, of: &OrderFunction, points: &[f64], cfg: &RunConfig) -> crate::Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&t| match closed_form(kind, side, fs, of, t) {
            Ok(v) => Ok(v),
            Err(_) => oracle(kind, side, fs, of, t, &cfg.quad),
        })
        .collect()
}

pub(super) fn bounds_on(kind: OperatorKind, side: Side, fs: &FunctionSpec, of: &OrderFunction, points: &[f64], n: usize, big_n: usize) -> crate::Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&t| error_bound(kind, side, fs, of, t, n, big_n, DEFAULT_SAMPLES))
        .collect()
}

pub(super) fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let exact = exact_values(cfg, &s);
    let quad: Vec<f64> = s
        .points
        .par_iter()
        .map(|&t| oracle(cfg.kind, cfg.side, &s.fs, &s.of, t, &cfg.quad))
        .collect::<crate::Result<_>>()?;
    let mut table = Table::new(["t", "exact", "approx", "bound", "abs_error"]);
    for ((t, e), q) in s.points.iter().zip(&exact).zip(&quad) {
        table.push(vec![fmt_num(*t), opt(*e), fmt_num(*q), String::new(), opt(e.map(|e| (e - q).abs()))]);
    }
    emit(&table, cfg.output.as_deref())?;
    plot_columns(cfg, &table, "t", &["exact", "approx"], &format!("{} ({})", kind_label(cfg.kind), side_label(cfg.side)))
}

pub(super) fn approx(cfg: &RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let ec = ExpansionConfig::new(cfg.n, cfg.big_n, cfg.side, cfg.kind)?;
    let exact = reference_values(cfg.kind, cfg.side, &s.fs, &s.of, &s.points, cfg)?;
    let approx = approximate_on_grid(&s.fs, &s.of, &s.points, &ec, &cfg.quad)?;
    let bound = bounds_on(cfg.kind, cfg.side, &s.fs, &s.of, &s.points, cfg.n, cfg.big_n)?;
    let mut table = Table::new(["t", "exact", "approx", "bound", "abs_error"]);
    for i in 0..s.points.len() {
        table.push_numbers(&[s.points[i], exact[i], approx[i], bound[i], (exact[i] - approx[i]).abs()]);
    }
    emit(&table, cfg.output.as_deref())?;
    let title = format!("{} ({}), n = {}, N = {}", kind_label(cfg.kind), side_label(cfg.side), cfg.n, cfg.big_n);
    plot_columns(cfg, &table, "t", &["exact", "approx"], &title)
}

pub(super) fn convergence(cfg: &RunConfig) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let exact = reference_values(cfg.kind, cfg.side, &s.fs, &s.of, &s.points, cfg)?;
    let mut table = Table::new(["n", "N", "l2_error", "max_abs_error", "max_bound"]);
    let mut series = Vec::new();
    for big_n in cfg.n + 1..=cfg.big_n {
        let ec = ExpansionConfig::new(cfg.n, big_n, cfg.side, cfg.kind)?;
        let approx = approximate_on_grid(&s.fs, &s.of, &s.points, &ec, &cfg.quad)?;
        let bound = bounds_on(cfg.kind, cfg.side, &s.fs, &s.of, &s.points, cfg.n, big_n)?;
        let l2 = grid_l2(&s.points, &exact, &approx);
        let max_err = exact.iter().zip(&approx).map(|(e, a)| (e - a).abs()).fold(0.0, f64::max);
        let max_bound = bound.iter().copied().fold(0.0, f64::max);
        table.push(vec![cfg.n.to_string(), big_n.to_string(), fmt_num(l2), fmt_num(max_err), fmt_num(max_bound)]);
        series.push((big_n as f64, l2));
    }
    emit(&table, cfg.output.as_deref())?;
    if let (Some(out), true) = (cfg.output.as_deref(), cfg.emit_svg) {
        let ser = Series { label: format!("n = {}", cfg.n), points: series };
        write_svg(&svg_path(out), &format!("L2 error, {} ({})", kind_label(cfg.kind), side_label(cfg.side)), "N", "L2 error", &[ser])?;
    }
    Ok(())
}

fn left_solution(cfg: &RunConfig) -> Result<(OrderFunction, FunctionSpec), CliError> {
    Ok((cfg.order_function()?, cfg.function_spec(Side::Left)?))
}

fn trajectory_table(sol: &TrajectorySolution, big_n: usize) -> Table {
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend((2..=big_n).map(|k| format!("V{k}")));
    if sol.costates.is_some() {
        header.extend((1..=big_n).map(|k| format!("lambda{k}")));
    }
    let mut table = Table::new(header);
    for i in 0..sol.len() {
        let mut row = vec![sol.grid[i], sol.x[i]];
        row.extend(&sol.moments[i]);
        if let Some(c) = &sol.costates {
            row.extend(&c[i]);
        }
        table.push_numbers(&row);
    }
    table
}

fn report(sol: &TrajectorySolution, fs: &FunctionSpec, cfg: &RunConfig) -> Result<(), CliError> {
    let d = &sol.diagnostics;
    let l2 = trajectory_l2_error(sol, |t| fs.value(t), &cfg.quad)?;
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "steps: {}", d.steps);
    let _ = writeln!(err, "epsilon: {:e}", d.epsilon);
    if let Some(v) = d.epsilon_sensitivity {
        let _ = writeln!(err, "epsilon sensitivity of x(b): {v:e}");
    }
    if let Some(r) = d.residual_norm {
        let _ = writeln!(err, "terminal residual: {r:e} after {} Newton iterations{}", d.newton_iterations, if d.retried { " (restarted)" } else { "" });
    }
    if let Some(s) = d.shooting_start {
        let _ = writeln!(err, "shooting start: {s}");
    }
    if let Some(j) = d.objective {
        let _ = writeln!(err, "objective: {j:e}");
    }
    if let Some(j) = d.approx_objective {
        let _ = writeln!(err, "objective of the approximated problem: {j:e}");
    }
    let _ = writeln!(err, "x(b) = {} (given solution {})", sol.final_x(), fs.value(cfg.b));
    let _ = writeln!(err, "L2 distance to the given solution: {l2:e}");
    Ok(())
}

fn emit_trajectory(cfg: &RunConfig, sol: &TrajectorySolution, fs: &FunctionSpec, title: &str) -> Result<(), CliError> {
    emit(&trajectory_table(sol, cfg.big_n), cfg.output.as_deref())?;
    report(sol, fs, cfg)?;
    if let (Some(out), true) = (cfg.output.as_deref(), cfg.emit_svg) {
        let exact = Series { label: "given solution".into(), points: sol.grid.iter().map(|&t| (t, fs.value(t))).collect() };
        let x = Series { label: format!("N = {}", cfg.big_n), points: sol.grid.iter().copied().zip(sol.x.iter().copied()).collect() };
        write_svg(&svg_path(out), title, "t", "x", &[exact, x])?;
    }
    Ok(())
}

pub(super) fn fde_problem(of: OrderFunction, fs: &FunctionSpec, big_n: usize, cfg: &RunConfig) -> crate::Result<FdeProblem> {
    FdeProblem::from_solution(of, fs, big_n)?.with_epsilon(cfg.epsilon)?.with_steps(cfg.steps)
}

pub(super) fn fvp_problem(of: OrderFunction, fs: &FunctionSpec, big_n: usize, cfg: &RunConfig) -> crate::Result<FvpProblem> {
    FvpProblem::tracking_solution(of, fs, big_n)?.with_epsilon(cfg.epsilon)?.with_steps(cfg.steps)
}

pub(super) fn solve_fde(cfg: &RunConfig) -> Result<(), CliError> {
    let (of, fs) = left_solution(cfg)?;
    let sol = fde_solve(&fde_problem(of, &fs, cfg.big_n, cfg)?)?;
    emit_trajectory(cfg, &sol, &fs, "fractional differential equation")
}

pub(super) fn solve_fvp(cfg: &RunConfig) -> Result<(), CliError> {
    let (of, fs) = left_solution(cfg)?;
    let sol = fvp_solve(&fvp_problem(of, &fs, cfg.big_n, cfg)?)?;
    emit_trajectory(cfg, &sol, &fs, "variational problem")
}
