//! The `reproduce` command: comparison datasets for the three left operators and
//! the two solvers, a bound-soundness check on both sides, and an L2 error
//! table recomputed from the written CSV files.

use std::path::Path;

use rayon::prelude::*;

use super::commands::{bounds_on, fde_problem, fvp_problem, kind_label, reference_values, side_label, write_svg};
use super::csv::{fmt_num, Table};
use super::svg::Series;
use super::{operator_grid, CliError, RunConfig};
use crate::expansion::{approximate_on_grid, ExpansionConfig};
use crate::operators::{OperatorKind, Side};
use crate::solvers::{fde_solve, fvp_solve, TrajectorySolution};

/// Files written by `reproduce`, in order; the last one is the L2 table.
pub const REPRODUCE_FILES: [&str; 7] = [
    "integral_approx.csv",
    "hadamard_approx.csv",
    "marchaud_approx.csv",
    "fde_solution.csv",
    "fvp_solution.csv",
    "bounds_soundness.csv",
    "l2_errors.csv",
];

/// `(n, N)` pairs of the operator datasets: `n = 1` with `N = 2, 3, 4`, then
/// `N = 4` with `n = 2, 3`.
const OPERATOR_CONFIGS: [(usize, usize); 5] = [(1, 2), (1, 3), (1, 4), (2, 4), (3, 4)];
const OPERATORS: [(OperatorKind, &str); 3] = [
    (OperatorKind::Integral, REPRODUCE_FILES[0]),
    (OperatorKind::HadamardDeriv, REPRODUCE_FILES[1]),
    (OperatorKind::Marchaud, REPRODUCE_FILES[2]),
];
const FDE_SIZES: [usize; 4] = [2, 3, 4, 5];
const FVP_SIZES: [usize; 3] = [2, 3, 4];
const SOUNDNESS_SIZES: [usize; 3] = [2, 3, 4];

/// Discrete L2 distance `(∫ (f − g)²)^{1/2}` by the trapezoidal rule on the
/// sample points `t` (ascending, not necessarily uniform).
pub fn grid_l2(t: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let sq: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).collect();
    t.windows(2)
        .zip(sq.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum::<f64>()
        .sqrt()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<(), CliError> {
    let p = dir.join(name);
    table.write_file(&p).map_err(|e| io_err(&p, e))
}

fn operator_dataset(cfg: &RunConfig, kind: OperatorKind) -> Result<Table, CliError> {
    let of = cfg.order_function()?;
    let fs = cfg.function_spec(Side::Left)?;
    let t = operator_grid(cfg.a, cfg.b, Side::Left, cfg.grid_points);
    let exact = reference_values(kind, Side::Left, &fs, &of, &t, cfg)?;
    let mut table = Table::new(["n", "N", "t", "exact", "approx", "bound", "abs_error"]);
    for (n, big_n) in OPERATOR_CONFIGS {
        let ec = ExpansionConfig::new(n, big_n, Side::Left, kind)?;
        let approx = approximate_on_grid(&fs, &of, &t, &ec, &cfg.quad)?;
        let bound = bounds_on(kind, Side::Left, &fs, &of, &t, n, big_n)?;
        for i in 0..t.len() {
            let mut row = vec![n.to_string(), big_n.to_string()];
            row.extend([t[i], exact[i], approx[i], bound[i], (exact[i] - approx[i]).abs()].map(fmt_num));
            table.push(row);
        }
    }
    Ok(table)
}

fn soundness(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let of = cfg.order_function()?;
    let mut table = Table::new(["operator", "side", "N", "t", "abs_error", "bound", "satisfied"]);
    let mut failures = 0;
    for side in [Side::Left, Side::Right] {
        let fs = cfg.function_spec(side)?;
        let t = operator_grid(cfg.a, cfg.b, side, cfg.grid_points);
        for kind in [OperatorKind::Integral, OperatorKind::Marchaud, OperatorKind::HadamardDeriv] {
            let exact = reference_values(kind, side, &fs, &of, &t, cfg)?;
            for big_n in SOUNDNESS_SIZES {
                let ec = ExpansionConfig::new(1, big_n, side, kind)?;
                let approx = approximate_on_grid(&fs, &of, &t, &ec, &cfg.quad)?;
                let bound = bounds_on(kind, side, &fs, &of, &t, 1, big_n)?;
                for i in 0..t.len() {
                    let err = (exact[i] - approx[i]).abs();
                    let ok = err <= bound[i];
                    failures += usize::from(!ok);
                    table.push(vec![
                        kind_label(kind).into(),
                        side_label(side).into(),
                        big_n.to_string(),
                        fmt_num(t[i]),
                        fmt_num(err),
                        fmt_num(bound[i]),
                        ok.to_string(),
                    ]);
                }
            }
        }
    }
    Ok((table, failures))
}

fn trajectory_dataset(cfg: &RunConfig, sizes: &[usize], sols: &[TrajectorySolution]) -> Result<Table, CliError> {
    let fs = cfg.function_spec(Side::Left)?;
    let grid = &sols[0].grid;
    if sols.iter().any(|s| &s.grid != grid) {
        return Err(CliError::Numerical("solver grids differ between expansion sizes".into()));
    }
    let mut header = vec!["t".to_string(), "exact".to_string()];
    header.extend(sizes.iter().map(|n| format!("x_N{n}")));
    let mut table = Table::new(header);
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t, fs.value(t)];
        row.extend(sols.iter().map(|s| s.x[i]));
        table.push_numbers(&row);
    }
    Ok(table)
}

fn solve_all<F>(sizes: &[usize], solve: F) -> Result<Vec<TrajectorySolution>, CliError>
where
    F: Fn(usize) -> crate::Result<TrajectorySolution> + Sync,
{
    sizes
        .par_iter()
        .map(|&n| solve(n).map_err(|e| CliError::Numerical(format!("N = {n}: {e}"))))
        .collect()
}

/// Recomputes the L2 error table from the dataset CSV files in `dir`.
pub fn l2_table_from_dir(dir: &Path) -> Result<Table, CliError> {
    let mut table = Table::new(["dataset", "n", "N", "l2_error"]);
    for (kind, name) in OPERATORS {
        let p = dir.join(name);
        let data = Table::read_file(&p).map_err(|e| io_err(&p, e))?;
        let num = |c: &str| data.numbers(c).map_err(|e| io_err(&p, e));
        let (n, big_n, t, exact, approx) = (num("n")?, num("N")?, num("t")?, num("exact")?, num("approx")?);
        for (cn, cbig) in OPERATOR_CONFIGS {
            let idx: Vec<usize> = (0..t.len()).filter(|&i| n[i] == cn as f64 && big_n[i] == cbig as f64).collect();
            let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
            let l2 = grid_l2(&pick(&t), &pick(&exact), &pick(&approx));
            table.push(vec![kind_label(kind).into(), cn.to_string(), cbig.to_string(), fmt_num(l2)]);
        }
    }
    for (label, name, sizes) in [("fde", REPRODUCE_FILES[3], &FDE_SIZES[..]), ("fvp", REPRODUCE_FILES[4], &FVP_SIZES[..])] {
        let p = dir.join(name);
        let data = Table::read_file(&p).map_err(|e| io_err(&p, e))?;
        let num = |c: &str| data.numbers(c).map_err(|e| io_err(&p, e));
        let (t, exact) = (num("t")?, num("exact")?);
        for &big_n in sizes {
            let x = num(&format!("x_N{big_n}"))?;
            table.push(vec![label.into(), "1".into(), big_n.to_string(), fmt_num(grid_l2(&t, &exact, &x))]);
        }
    }
    Ok(table)
}

fn dataset_svg(dir: &Path, name: &str, title: &str, table: &Table) -> Result<(), CliError> {
    let path = dir.join(name).with_extension("svg");
    let t_col = table.column("t").expect("t column");
    let mut series: Vec<Series> = Vec::new();
    let mut push = |label: String, t: f64, v: f64| match series.iter_mut().find(|s| s.label == label) {
        Some(s) => s.points.push((t, v)),
        None => series.push(Series { label, points: vec![(t, v)] }),
    };
    let cols: Vec<(usize, &String)> = table.header.iter().enumerate().filter(|(_, h)| *h == "exact" || h.starts_with("x_N")).collect();
    let long = table.column("approx");
    for r in &table.rows {
        let t: f64 = r[t_col].parse().unwrap_or(f64::NAN);
        let val = |c: usize| r[c].parse::<f64>().unwrap_or(f64::NAN);
        match long {
            Some(ac) => {
                let (n, big_n) = (&r[0], &r[1]);
                if n == "1" && big_n == "2" {
                    push("exact".into(), t, val(cols[0].0));
                }
                push(format!("n = {n}, N = {big_n}"), t, val(ac));
            }
            None => {
                for &(c, h) in &cols {
                    push(h.clone(), t, val(c));
                }
            }
        }
    }
    write_svg(&path, title, "t", "value", &series)
}

pub(super) fn reproduce(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = cfg.output.clone().expect("reproduce always has an output directory");
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;

    for (kind, name) in OPERATORS {
        let table = operator_dataset(cfg, kind)?;
        write(&table, &dir, name)?;
        if cfg.emit_svg {
            dataset_svg(&dir, name, kind_label(kind), &table)?;
        }
    }

    let of = cfg.order_function()?;
    let fs = cfg.function_spec(Side::Left)?;
    let fde = solve_all(&FDE_SIZES, |n| fde_solve(&fde_problem(of.clone(), &fs, n, cfg)?))?;
    let fvp = solve_all(&FVP_SIZES, |n| fvp_solve(&fvp_problem(of.clone(), &fs, n, cfg)?))?;
    for (name, sizes, sols, title) in [
        (REPRODUCE_FILES[3], &FDE_SIZES[..], &fde, "fractional differential equation"),
        (REPRODUCE_FILES[4], &FVP_SIZES[..], &fvp, "variational problem"),
    ] {
        let table = trajectory_dataset(cfg, sizes, sols)?;
        write(&table, &dir, name)?;
        if cfg.emit_svg {
            dataset_svg(&dir, name, title, &table)?;
        }
    }
    for (n, s) in FVP_SIZES.iter().zip(&fvp) {
        let d = &s.diagnostics;
        eprintln!(
            "fvp N = {n}: residual {:e}, objective {:e}",
            d.residual_norm.unwrap_or(f64::NAN),
            d.objective.unwrap_or(f64::NAN)
        );
    }

    let (sound, failures) = soundness(cfg)?;
    write(&sound, &dir, REPRODUCE_FILES[5])?;
    write(&l2_table_from_dir(&dir)?, &dir, REPRODUCE_FILES[6])?;
    if failures > 0 {
        return Err(CliError::Numerical(format!("{failures} bound-soundness rows violated, see {}", REPRODUCE_FILES[5])));
    }
    Ok(())
}
