use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::system::{step_count, Frame, Grid};
use super::{CubicHermite, Diagnostics, TrajectorySolution};
use crate::error::{Error, Result};
use crate::operators::{closed_form, left_marchaud_oracle, FunctionSpec, OperatorKind, OrderFunction, Side};
use crate::quadrature::{integrate, QuadratureConfig};

/// Tracked function `target(t)` in the integrand `(𝔻^{α(t)} x − target)²`.
pub type TargetFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const JACOBIAN_STEP: f64 = 1e-6;
const MAX_HALVINGS: usize = 20;
const RETRY_SEED: u64 = 0x5eed_0f_5b00;
const RETRY_MAGNITUDE: f64 = 1e-2;

/// Minimize `∫_a^b (𝔻^{α(t)} x − target)² dt` with `x(a) = x_a`,
/// `x(b) = x_b`, the derivative replaced by its `n = 1` expansion of size
/// `big_n`.
#[derive(Clone)]
pub struct FvpProblem {
    pub of: OrderFunction,
    pub target: TargetFn,
    pub x_a: f64,
    pub x_b: f64,
    pub big_n: usize,
    pub epsilon: f64,
    pub step: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Bound on `∫ A(0)/A(1) dw` over the shooting interval. The costate
    /// equation grows at that rate, so shooting starts where the remaining
    /// growth drops below this budget; before it the costates are held at 0.
    pub growth_budget: f64,
}

impl fmt::Debug for FvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FvpProblem")
            .field("order", &self.of.label())
            .field("domain", &self.of.domain())
            .field("x_a", &self.x_a)
            .field("x_b", &self.x_b)
            .field("big_n", &self.big_n)
            .field("epsilon", &self.epsilon)
            .field("step", &self.step)
            .field("newton_tol", &self.newton_tol)
            .field("max_newton_iters", &self.max_newton_iters)
            .field("growth_budget", &self.growth_budget)
            .finish()
    }
}

impl FvpProblem {
    /// Defaults: `epsilon = 1e−4·(b − a)`, 2000 steps, Newton tolerance
    /// 1e−10 within 20 iterations, growth budget 16.
    pub fn new<F>(of: OrderFunction, target: F, x_a: f64, x_b: f64, big_n: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (a, b) = of.domain();
        let epsilon = 1e-4 * (b - a);
        let p = FvpProblem {
            of,
            target: Arc::new(target),
            x_a,
            x_b,
            big_n,
            epsilon,
            step: (b - a - epsilon) / 2000.0,
            newton_tol: 1e-10,
            max_newton_iters: 20,
            growth_budget: 16.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Tracking of `𝔻x̄` with `x̄ = (ln(t/a))^β` and matching boundary values,
    /// so that `x̄` is the exact minimizer.
    pub fn tracking(of: OrderFunction, beta: f64, big_n: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidConfig(format!("the tracked solution needs beta > 0, got {beta}")));
        }
        let (a, b) = of.domain();
        Self::tracking_solution(of, &FunctionSpec::log_power(beta, a, b)?, big_n)
    }

    /// Tracking of `𝔻x̄` for a log polynomial `x̄` anchored at `a`, with
    /// `x̄(a)` and `x̄(b)` as boundary values.
    pub fn tracking_solution(of: OrderFunction, exact: &FunctionSpec, big_n: usize) -> Result<Self> {
        let (a, b) = of.domain();
        closed_form(OperatorKind::Marchaud, Side::Left, exact, &of, b)?;
        let of_t = of.clone();
        let x_bar = exact.clone();
        Self::new(
            of,
            move |t| closed_form(OperatorKind::Marchaud, Side::Left, &x_bar, &of_t, t).unwrap_or(f64::NAN),
            exact.value(a),
            exact.value(b),
            big_n,
        )
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        let (a, b) = self.of.domain();
        self.step = (b - a - self.epsilon) / steps.max(1) as f64;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.of.domain();
        if self.big_n < 2 {
            return Err(Error::InvalidConfig(format!("the expansion size N must be at least 2, got {}", self.big_n)));
        }
        if !(self.x_a.is_finite() && self.x_b.is_finite()) {
            return Err(Error::InvalidConfig("boundary values must be finite".into()));
        }
        if !(self.epsilon > 0.0 && a + self.epsilon < b) {
            return Err(Error::InvalidConfig(format!("start offset {} must be positive and below b − a", self.epsilon)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.newton_tol > 0.0) || self.max_newton_iters == 0 {
            return Err(Error::InvalidConfig("Newton tolerance and iteration limit must be positive".into()));
        }
        if !(self.growth_budget > 0.0) {
            return Err(Error::InvalidConfig("growth budget must be positive".into()));
        }
        Ok(())
    }
}

/// Hamiltonian system in `w = ln ln(t/a)`, i.e. `t·L·d/dt`. With
/// `costates == false` the costates are frozen at zero. With `accumulate`
/// an extra trailing component integrates `(u − target)²`.
fn w_rhs(p: &FvpProblem, costates: bool, accumulate: bool) -> impl Fn(&Frame, &[f64]) -> Vec<f64> + '_ {
    let n = p.big_n;
    move |fr, y| {
        let (x, v, lam) = (y[0], &y[1..n], &y[n..2 * n]);
        let l1 = if costates { lam[0] } else { 0.0 };
        let g = (p.target)(fr.t);
        let control = fr.l.powf(2.0 * fr.alpha - 1.0) / (2.0 * fr.a1 * fr.t);
        let mut out = Vec::with_capacity(y.len());
        out.push((fr.l.powf(fr.alpha) * g - control * l1 - fr.a0 * x - fr.moment_sum(v)) / fr.a1);
        for k in 2..=n {
            out.push((k - 1) as f64 * fr.l.powi(k as i32 - 1) * x);
        }
        if costates {
            let coupling: f64 = (2..=n).map(|k| (k - 1) as f64 * fr.l.powi(k as i32 - 1) * lam[k - 1]).sum();
            out.push(fr.a0 / fr.a1 * l1 - coupling);
            for (i, bk) in fr.b.iter().enumerate() {
                out.push(bk * fr.l.powi(-(i as i32) - 1) / fr.a1 * l1);
            }
        } else {
            out.extend(std::iter::repeat_n(0.0, n));
        }
        if accumulate {
            out.push(l1 * l1 * fr.l.powf(2.0 * fr.alpha - 1.0) / (4.0 * fr.a1 * fr.a1 * fr.t));
        }
        out
    }
}

/// Time derivative of `(x, V_2..V_N, λ_1..λ_N)` under the Hamiltonian system
/// with the control eliminated.
pub fn fvp_hamiltonian_rhs(problem: &FvpProblem, t: f64, state: &[f64]) -> Result<Vec<f64>> {
    if state.len() != 2 * problem.big_n {
        return Err(Error::InvalidConfig(format!("expected a state of length {}, got {}", 2 * problem.big_n, state.len())));
    }
    let fr = Frame::at(&problem.of, problem.big_n, t)?;
    fr.check_pivot()?;
    let scale = fr.t * fr.l;
    Ok(w_rhs(problem, true, false)(&fr, state).into_iter().map(|d| d / scale).collect())
}

/// First node from which the remaining costate growth fits the budget.
fn shooting_start(grid: &Grid, budget: f64) -> usize {
    let rate = |fr: &Frame| (fr.a0 / fr.a1).abs();
    let mut growth = 0.0;
    let mut start = grid.steps();
    for i in (0..grid.steps()).rev() {
        growth += grid.h * (rate(&grid.nodes[i]) + rate(&grid.nodes[i + 1])) / 2.0;
        if growth > budget {
            break;
        }
        start = i;
    }
    start
}

struct Shooter<'a> {
    p: &'a FvpProblem,
    grid: Grid,
    start: usize,
    initial: Vec<f64>,
}

impl Shooter<'_> {
    fn run(&self, lambda: &[f64], accumulate: bool, record: Option<&mut Vec<Vec<f64>>>) -> Result<Vec<f64>> {
        let n = self.p.big_n;
        let mut y = self.initial.clone();
        y[n..2 * n].copy_from_slice(lambda);
        if accumulate {
            y.push(0.0);
        }
        let f = w_rhs(self.p, true, accumulate);
        let mut record = record;
        if let Some(r) = record.as_deref_mut() {
            r.push(y.clone());
        }
        for i in self.start..self.grid.steps() {
            y = self.grid.rk4_step(&f, i, &y)?;
            if let Some(r) = record.as_deref_mut() {
                r.push(y.clone());
            }
        }
        Ok(y)
    }

    fn residual(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let n = self.p.big_n;
        let y = self.run(lambda, false, None)?;
        let mut r = Vec::with_capacity(n);
        r.push(y[0] - self.p.x_b);
        r.extend_from_slice(&y[n + 1..2 * n]);
        Ok(r)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct NewtonOutcome {
    lambda: Vec<f64>,
    residual: f64,
    iterations: usize,
}

fn newton(sh: &Shooter, guess: Vec<f64>) -> std::result::Result<NewtonOutcome, (Error, f64)> {
    let p = sh.p;
    let n = p.big_n;
    let mut lambda = guess;
    let mut r = sh.residual(&lambda).map_err(|e| (e, f64::INFINITY))?;
    let mut norm = max_norm(&r);
    let mut iterations = 0;
    while !(norm <= p.newton_tol) {
        if iterations == p.max_newton_iters {
            return Err((Error::ShootingFailed { iterations, residual: norm }, norm));
        }
        iterations += 1;
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let delta = JACOBIAN_STEP * lambda[j].abs().max(1.0);
                let mut bumped = lambda.clone();
                bumped[j] += delta;
                let rb = sh.residual(&bumped)?;
                Ok(rb.iter().zip(&r).map(|(a, b)| (a - b) / delta).collect())
            })
            .collect::<Result<_>>()
            .map_err(|e| (e, norm))?;
        let jac = DMatrix::from_fn(n, n, |i, j| columns[j][i]);
        let lu = jac.lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
        let biggest = diag.iter().cloned().fold(0.0, f64::max);
        if !(biggest > 0.0) || diag.iter().any(|d| !(*d > 1e-14 * biggest)) {
            return Err((Error::RankDeficient, norm));
        }
        let dir = lu.solve(&DVector::from_iterator(n, r.iter().map(|v| -v))).ok_or((Error::RankDeficient, norm))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = lambda.iter().zip(dir.iter()).map(|(l, d)| l + scale * d).collect();
            if let Ok(rt) = sh.residual(&trial) {
                let nt = max_norm(&rt);
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            scale /= 2.0;
        }
        match accepted {
            Some((l, rt, nt)) => {
                lambda = l;
                r = rt;
                norm = nt;
            }
            None => return Err((Error::ShootingFailed { iterations, residual: norm }, norm)),
        }
    }
    Ok(NewtonOutcome {
        lambda,
        residual: norm,
        iterations,
    })
}

/// Single shooting over the costates at the shooting start, after a first
/// stage from `a + epsilon` with the costates held at zero.
pub fn fvp_solve(problem: &FvpProblem) -> Result<TrajectorySolution> {
    problem.validate()?;
    let p = problem;
    let n = p.big_n;
    let (a, b) = p.of.domain();
    let start_t = a + p.epsilon;
    let grid = Grid::new(&p.of, n, start_t, step_count(b - start_t, p.step))?;
    grid.nodes[0].check_pivot()?;
    let start = shooting_start(&grid, p.growth_budget);

    let pre = w_rhs(p, false, false);
    let mut y = vec![0.0; 2 * n];
    y[0] = p.x_a;
    let mut states = vec![y.clone()];
    for i in 0..start {
        y = grid.rk4_step(&pre, i, &y)?;
        states.push(y.clone());
    }
    let shooter = Shooter {
        p,
        grid,
        start,
        initial: y,
    };

    let (outcome, retried) = match newton(&shooter, vec![0.0; n]) {
        Ok(o) => (o, false),
        Err((_, first_best)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(RETRY_SEED);
            let guess = (0..n).map(|_| RETRY_MAGNITUDE * rng.gen_range(-1.0..1.0)).collect();
            match newton(&shooter, guess) {
                Ok(o) => (o, true),
                Err((Error::RankDeficient, _)) => return Err(Error::RankDeficient),
                Err((Error::ShootingFailed { iterations, residual }, _)) => {
                    return Err(Error::ShootingFailed {
                        iterations,
                        residual: residual.min(first_best),
                    })
                }
                Err((e, _)) => return Err(e),
            }
        }
    };

    let mut shot = Vec::new();
    let end = shooter.run(&outcome.lambda, true, Some(&mut shot))?;
    let approx_objective = end[2 * n];
    states.pop();
    states.extend(shot.into_iter().map(|mut s| {
        s.truncate(2 * n);
        s
    }));

    let grid = &shooter.grid;
    let dx: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (fr, y))| w_rhs(p, i >= start, false)(fr, y)[0] / (fr.t * fr.l))
        .collect();

    let sensitivity = if start > 0 {
        prestage_sensitivity(p, &grid.nodes[start], &states[start])
    } else {
        None
    };

    let mut sol = TrajectorySolution {
        grid: grid.times(),
        x: states.iter().map(|y| y[0]).collect(),
        dx,
        moments: states.iter().map(|y| y[1..n].to_vec()).collect(),
        costates: Some(states.iter().map(|y| y[n..2 * n].to_vec()).collect()),
        diagnostics: Diagnostics {
            steps: grid.steps(),
            epsilon: p.epsilon,
            epsilon_sensitivity: sensitivity,
            residual_norm: Some(outcome.residual),
            newton_iterations: outcome.iterations,
            retried,
            shooting_start: Some(grid.nodes[start].t),
            objective: None,
            approx_objective: Some(approx_objective),
        },
    };
    sol.diagnostics.objective = Some(tracking_objective(p, &sol)?);
    Ok(sol)
}

/// Change in `x` at the shooting start when the first stage begins at
/// `a + epsilon/10` instead.
fn prestage_sensitivity(p: &FvpProblem, at: &Frame, reached: &[f64]) -> Option<f64> {
    let (a, _) = p.of.domain();
    let start = a + p.epsilon / 10.0;
    let steps = step_count(at.t - start, p.step);
    let grid = Grid::between(&p.of, p.big_n, start, at.t, steps).ok()?;
    let f = w_rhs(p, false, false);
    let mut y = vec![0.0; 2 * p.big_n];
    y[0] = p.x_a;
    for i in 0..grid.steps() {
        y = grid.rk4_step(&f, i, &y).ok()?;
    }
    Some((y[0] - reached[0]).abs())
}

/// `∫_{a+ε}^b (𝔻^{α(t)} x − target)² dt` for the cubic Hermite interpolant
/// of the trajectory, extended to `a` by one cubic through `x_a`.
pub fn tracking_objective(problem: &FvpProblem, sol: &TrajectorySolution) -> Result<f64> {
    let (a, _) = problem.of.domain();
    let mut t = vec![a];
    let mut x = vec![problem.x_a];
    let mut dx = vec![(sol.x[0] - problem.x_a) / (sol.grid[0] - a)];
    t.extend_from_slice(&sol.grid);
    x.extend_from_slice(&sol.x);
    dx.extend_from_slice(&sol.dx);
    let fs = CubicHermite::new(t, x, dx)?.to_function_spec()?;
    let inner = QuadratureConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        max_subdivisions: 2000,
        base_order: 15,
    };
    let outer = QuadratureConfig {
        rel_tol: 1e-6,
        abs_tol: 1e-10,
        max_subdivisions: 1000,
        base_order: 15,
    };
    let failure = std::sync::Mutex::new(None);
    let value = integrate(
        |s| match left_marchaud_oracle(&fs, &problem.of, s, &inner) {
            Ok(d) => (d - (problem.target)(s)).powi(2),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        },
        sol.grid[0],
        sol.grid[sol.len() - 1],
        &outer,
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(value?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureConfig;
    use crate::solvers::{fde_assemble, trajectory_l2_error, FdeProblem};
    use approx::assert_relative_eq;

    fn order() -> OrderFunction {
        OrderFunction::linear(0.0, 0.1, 1.0, 5.0).unwrap()
    }

    #[test]
    fn trivial_stationary_point() {
        let p = FvpProblem::new(order(), |_| 0.0, 0.0, 0.0, 3).unwrap();
        let d = fvp_hamiltonian_rhs(&p, 2.0, &[0.0; 6]).unwrap();
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn state_equation_matches_the_initial_value_assembly() {
        // with λ = 0 the control equals the target, so x′ solves 𝔻x ≈ target
        let p = FvpProblem::new(order(), |t: f64| t.sin(), 0.0, 1.0, 4).unwrap();
        let q = FdeProblem::new(order(), |t: f64, _| t.sin(), 0.0, 4).unwrap();
        let state = [0.4, 0.1, -0.2, 0.05, 0.0, 0.0, 0.0, 0.0];
        let d = fvp_hamiltonian_rhs(&p, 2.7, &state).unwrap();
        assert_relative_eq!(d[0], fde_assemble(&q, 2.7, 0.4, &state[1..4]).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn hamiltonian_by_hand() {
        let of = OrderFunction::constant(0.4, 1.0, 5.0).unwrap();
        let p = FvpProblem::new(of, |_| 1.2, 0.0, 1.0, 2).unwrap();
        let c = crate::expansion::coeffs_deriv(0.4, 1, 2).unwrap();
        let (a0, a1, b2) = (c.a(0), c.a(1), c.b(2));
        let t = 3.0f64;
        let l = t.ln();
        let (x, v2, l1, l2) = (0.5, 0.2, 0.3, -0.1);
        let d = fvp_hamiltonian_rhs(&p, t, &[x, v2, l1, l2]).unwrap();
        let xp = 1.2 * l.powf(-0.6) / (a1 * t) - l.powf(-1.2) / (2.0 * (a1 * t).powi(2)) * l1 - a0 / (l * a1 * t) * x - b2 / (a1 * t) * l.powi(-2) * v2;
        assert_relative_eq!(d[0], xp, max_relative = 1e-13);
        assert_relative_eq!(d[1], x / t, max_relative = 1e-13);
        assert_relative_eq!(d[2], a0 / (l * a1 * t) * l1 - l2 / t, max_relative = 1e-13);
        assert_relative_eq!(d[3], b2 * l.powi(-2) / (a1 * t) * l1, max_relative = 1e-13);
    }

    #[test]
    fn zero_extremal() {
        let p = FvpProblem::new(order(), |_| 0.0, 0.0, 0.0, 3).unwrap();
        let sol = fvp_solve(&p).unwrap();
        assert!(sol.x.iter().all(|v| *v == 0.0));
        assert_eq!(sol.diagnostics.objective, Some(0.0));
        assert_eq!(sol.diagnostics.newton_iterations, 0);
    }

    #[test]
    fn tracking_problem_converges_and_meets_boundary_conditions() {
        let cfg = QuadratureConfig::default();
        let p = FvpProblem::tracking(order(), 2.0, 3).unwrap();
        let sol = fvp_solve(&p).unwrap();
        let d = &sol.diagnostics;
        let n = p.big_n;
        assert!(d.residual_norm.unwrap() <= p.newton_tol);
        assert!((sol.final_x() - 5f64.ln().powi(2)).abs() <= p.newton_tol);
        let lam_end = &sol.costates.as_ref().unwrap()[sol.len() - 1];
        assert!(lam_end[1..n].iter().all(|l| l.abs() <= p.newton_tol));
        let err = trajectory_l2_error(&sol, |t: f64| t.ln().powi(2), &cfg).unwrap();
        assert!(err <= 0.1, "L2 error {err}");
        assert!(d.objective.unwrap() >= 0.0 && d.approx_objective.unwrap() >= 0.0);
        assert!(d.shooting_start.unwrap() > 1.0001);
    }

    #[test]
    fn deterministic() {
        let p = FvpProblem::tracking(order(), 2.0, 2).unwrap().with_steps(400).unwrap();
        assert_eq!(fvp_solve(&p).unwrap(), fvp_solve(&p).unwrap());
    }

    #[test]
    fn errors() {
        assert!(FvpProblem::new(order(), |_| 0.0, 0.0, f64::NAN, 3).is_err());
        assert!(FvpProblem::new(order(), |_| 0.0, 0.0, 0.0, 1).is_err());
        let p = FvpProblem::tracking(order(), 2.0, 3).unwrap();
        assert!(fvp_hamiltonian_rhs(&p, 1.0, &[0.0; 6]).is_err());
        assert!(fvp_hamiltonian_rhs(&p, 2.0, &[0.0; 5]).is_err());
        let capped = FvpProblem { max_newton_iters: 1, newton_tol: 1e-300, ..p };
        assert!(matches!(fvp_solve(&capped), Err(Error::ShootingFailed { .. })));
    }
}
