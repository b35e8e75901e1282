//! Python bindings. Orders are `(c0, c1)` pairs for `α(t) = c0 + c1·t` and
//! functions are lists of `(coef, beta)` log-power terms, as on the command
//! line.

use std::collections::HashMap;

use hadamard_vo::bounds::{error_bound as core_error_bound, DEFAULT_SAMPLES};
use hadamard_vo::expansion::{approximate_on_grid, ExpansionConfig};
use hadamard_vo::operators::{closed_form as core_closed_form, oracle as core_oracle, FunctionSpec, LogPower, OperatorKind, OrderFunction, Side};
use hadamard_vo::quadrature::QuadratureConfig;
use hadamard_vo::solvers::{fde_solve, fvp_solve, trajectory_l2_error, FdeProblem, FvpProblem, TrajectorySolution};
use hadamard_vo::{specfun, Error};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::InvalidConfig(_) | Error::InvalidOrder(_) | Error::InvalidFunction(_) | Error::InsufficientOrder { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::Pole { .. } | Error::Overflow { .. } | Error::DivergentIntegral { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

pub fn parse_kind(kind: &str) -> Result<OperatorKind, Error> {
    match kind {
        "integral" => Ok(OperatorKind::Integral),
        "hadamard" => Ok(OperatorKind::HadamardDeriv),
        "marchaud" => Ok(OperatorKind::Marchaud),
        "caputo" => Ok(OperatorKind::Caputo),
        _ => Err(Error::InvalidConfig(format!("unknown operator '{kind}', expected integral, hadamard, marchaud or caputo"))),
    }
}

pub fn parse_side(side: &str) -> Result<Side, Error> {
    match side {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        _ => Err(Error::InvalidConfig(format!("unknown side '{side}', expected left or right"))),
    }
}

/// Order, function and side for one evaluation.
pub struct Problem {
    pub of: OrderFunction,
    pub fs: FunctionSpec,
    pub side: Side,
}

impl Problem {
    pub fn new(order: (f64, f64), terms: &[(f64, f64)], a: f64, b: f64, side: &str) -> Result<Self, Error> {
        let side = parse_side(side)?;
        let terms: Vec<LogPower> = terms.iter().map(|&(coef, beta)| LogPower { coef, beta }).collect();
        Ok(Problem {
            of: OrderFunction::linear(order.0, order.1, a, b)?,
            fs: FunctionSpec::log_poly(&terms, side, a, b)?,
            side,
        })
    }
}

fn quad(rel_tol: f64, abs_tol: f64) -> Result<QuadratureConfig, Error> {
    let cfg = QuadratureConfig::with_tolerances(rel_tol, abs_tol);
    cfg.validate()?;
    Ok(cfg)
}

/// Trajectory and diagnostics of a solve as plain data.
pub fn trajectory_dict(sol: &TrajectorySolution, exact: &FunctionSpec) -> Result<HashMap<String, Vec<f64>>, Error> {
    let d = &sol.diagnostics;
    let l2 = trajectory_l2_error(sol, |t| exact.value(t), &QuadratureConfig::default())?;
    let mut out = HashMap::new();
    out.insert("t".to_string(), sol.grid.clone());
    out.insert("x".to_string(), sol.x.clone());
    let nan = f64::NAN;
    for (k, v) in [
        ("l2_error", Some(l2)),
        ("epsilon", Some(d.epsilon)),
        ("epsilon_sensitivity", d.epsilon_sensitivity),
        ("residual_norm", d.residual_norm),
        ("objective", d.objective),
        ("approx_objective", d.approx_objective),
        ("shooting_start", d.shooting_start),
    ] {
        out.insert(k.to_string(), vec![v.unwrap_or(nan)]);
    }
    Ok(out)
}

#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    specfun::gamma(x).map_err(to_py)
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    specfun::digamma(x).map_err(to_py)
}

#[pyfunction]
fn gen_binomial(alpha: f64, k: usize) -> PyResult<f64> {
    specfun::gen_binomial(alpha, k).map_err(to_py)
}

/// Exact operator value for a log polynomial.
#[pyfunction]
#[pyo3(signature = (kind, t, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, side="left"))]
fn closed_form(kind: &str, t: f64, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, side: &str) -> PyResult<f64> {
    let p = Problem::new(order, &function, a, b, side).map_err(to_py)?;
    core_closed_form(parse_kind(kind).map_err(to_py)?, p.side, &p.fs, &p.of, t).map_err(to_py)
}

/// Operator value by quadrature.
#[pyfunction]
#[pyo3(signature = (kind, t, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, side="left", rel_tol=1e-10, abs_tol=1e-12))]
#[allow(clippy::too_many_arguments)]
fn oracle(kind: &str, t: f64, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, side: &str, rel_tol: f64, abs_tol: f64) -> PyResult<f64> {
    let p = Problem::new(order, &function, a, b, side).map_err(to_py)?;
    let cfg = quad(rel_tol, abs_tol).map_err(to_py)?;
    core_oracle(parse_kind(kind).map_err(to_py)?, p.side, &p.fs, &p.of, t, &cfg).map_err(to_py)
}

/// Expansion values on an ascending list of points.
#[pyfunction]
#[pyo3(signature = (kind, points, n=1, big_n=4, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, side="left"))]
#[allow(clippy::too_many_arguments)]
fn approximate(kind: &str, points: Vec<f64>, n: usize, big_n: usize, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, side: &str) -> PyResult<Vec<f64>> {
    let p = Problem::new(order, &function, a, b, side).map_err(to_py)?;
    let ec = ExpansionConfig::new(n, big_n, p.side, parse_kind(kind).map_err(to_py)?).map_err(to_py)?;
    approximate_on_grid(&p.fs, &p.of, &points, &ec, &QuadratureConfig::default()).map_err(to_py)
}

/// A posteriori bound on the expansion error at `t`.
#[pyfunction]
#[pyo3(signature = (kind, t, n=1, big_n=4, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, side="left"))]
#[allow(clippy::too_many_arguments)]
fn error_bound(kind: &str, t: f64, n: usize, big_n: usize, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, side: &str) -> PyResult<f64> {
    let p = Problem::new(order, &function, a, b, side).map_err(to_py)?;
    core_error_bound(parse_kind(kind).map_err(to_py)?, p.side, &p.fs, &p.of, t, n, big_n, DEFAULT_SAMPLES).map_err(to_py)
}

/// Solves `𝔻x + x = 𝔻x̄ + x̄` where `x̄` is the given function. Returns the
/// trajectory (`t`, `x`) and one-element diagnostic lists.
#[pyfunction]
#[pyo3(signature = (big_n=4, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, epsilon=None, steps=2000))]
fn solve_fde(big_n: usize, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, epsilon: Option<f64>, steps: usize) -> PyResult<HashMap<String, Vec<f64>>> {
    let p = Problem::new(order, &function, a, b, "left").map_err(to_py)?;
    let run = || -> Result<_, Error> {
        let problem = FdeProblem::from_solution(p.of.clone(), &p.fs, big_n)?.with_epsilon(epsilon.unwrap_or(1e-4 * (b - a)))?.with_steps(steps)?;
        trajectory_dict(&fde_solve(&problem)?, &p.fs)
    };
    run().map_err(to_py)
}

/// Solves the tracking problem whose exact minimizer is the given function.
#[pyfunction]
#[pyo3(signature = (big_n=3, order=(0.0, 0.1), function=vec![(1.0, 2.0)], a=1.0, b=5.0, epsilon=None, steps=2000))]
fn solve_fvp(big_n: usize, order: (f64, f64), function: Vec<(f64, f64)>, a: f64, b: f64, epsilon: Option<f64>, steps: usize) -> PyResult<HashMap<String, Vec<f64>>> {
    let p = Problem::new(order, &function, a, b, "left").map_err(to_py)?;
    let run = || -> Result<_, Error> {
        let problem = FvpProblem::tracking_solution(p.of.clone(), &p.fs, big_n)?.with_epsilon(epsilon.unwrap_or(1e-4 * (b - a)))?.with_steps(steps)?;
        trajectory_dict(&fvp_solve(&problem)?, &p.fs)
    };
    run().map_err(to_py)
}

#[pymodule]
fn hadamard_vo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(gen_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(approximate, m)?)?;
    m.add_function(wrap_pyfunction!(error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fde, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fvp, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!(parse_kind("hadamard").unwrap(), OperatorKind::HadamardDeriv);
        assert!(parse_kind("riesz").is_err());
        assert_eq!(parse_side("right").unwrap(), Side::Right);
        assert!(parse_side("up").is_err());
    }

    #[test]
    fn problem_validates_order() {
        assert!(Problem::new((1.5, 0.0), &[(1.0, 2.0)], 1.0, 5.0, "left").is_err());
        let p = Problem::new((0.0, 0.1), &[(1.0, 2.0)], 1.0, 5.0, "left").unwrap();
        assert_eq!(p.of.alpha(2.0), 0.2);
        assert_eq!(p.fs.value(std::f64::consts::E), 1.0);
    }

    #[test]
    fn trajectory_dict_has_diagnostics() {
        let p = Problem::new((0.0, 0.1), &[(1.0, 2.0)], 1.0, 5.0, "left").unwrap();
        let problem = FdeProblem::from_solution(p.of.clone(), &p.fs, 3).unwrap().with_steps(200).unwrap();
        let d = trajectory_dict(&fde_solve(&problem).unwrap(), &p.fs).unwrap();
        assert_eq!(d["t"].len(), d["x"].len());
        assert!(d["l2_error"][0] < 0.1);
        assert!(d["residual_norm"][0].is_nan());
    }
}
