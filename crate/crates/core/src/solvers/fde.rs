use std::fmt;
use std::sync::Arc;

use super::system::{step_count, Frame, Grid};
use super::{Diagnostics, TrajectorySolution};
use crate::error::{Error, Result};
use crate::operators::{closed_form, FunctionSpec, OperatorKind, OrderFunction, Side};

/// Right-hand side `rhs(t, x)` of `𝔻^{α(t)} x(t) = rhs(t, x(t))`.
pub type ScalarRhs = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Initial value problem for the left Marchaud-type derivative on the domain
/// of `of`, approximated with the `n = 1` expansion of size `big_n`.
#[derive(Clone)]
pub struct FdeProblem {
    pub of: OrderFunction,
    pub rhs: ScalarRhs,
    pub x_a: f64,
    pub big_n: usize,
    /// Integration starts at `a + epsilon`.
    pub epsilon: f64,
    /// Nominal step in `t`; sets the number of RK4 steps taken uniformly in
    /// `ln ln(t/a)`.
    pub step: f64,
}

impl fmt::Debug for FdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdeProblem")
            .field("order", &self.of.label())
            .field("domain", &self.of.domain())
            .field("x_a", &self.x_a)
            .field("big_n", &self.big_n)
            .field("epsilon", &self.epsilon)
            .field("step", &self.step)
            .finish()
    }
}

impl FdeProblem {
    /// Defaults: `epsilon = 1e−4·(b − a)` and 2000 steps.
    pub fn new<F>(of: OrderFunction, rhs: F, x_a: f64, big_n: usize) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let (a, b) = of.domain();
        let epsilon = 1e-4 * (b - a);
        let p = FdeProblem {
            of,
            rhs: Arc::new(rhs),
            x_a,
            big_n,
            epsilon,
            step: (b - a - epsilon) / 2000.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// The equation `𝔻x + x = 𝔻x̄ + x̄` with `x̄ = (ln(t/a))^β`, whose exact
    /// solution is `x̄`.
    pub fn manufactured(of: OrderFunction, beta: f64, big_n: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidConfig(format!("the manufactured solution needs beta > 0, got {beta}")));
        }
        let (a, b) = of.domain();
        Self::from_solution(of, &FunctionSpec::log_power(beta, a, b)?, big_n)
    }

    /// The equation `𝔻x + x = 𝔻x̄ + x̄` for a log polynomial `x̄` anchored at
    /// `a`, with `x(a) = x̄(a)`.
    pub fn from_solution(of: OrderFunction, exact: &FunctionSpec, big_n: usize) -> Result<Self> {
        let (a, b) = of.domain();
        closed_form(OperatorKind::Marchaud, Side::Left, exact, &of, b)?;
        let of_rhs = of.clone();
        let x_bar = exact.clone();
        Self::new(
            of,
            move |t, x| {
                let forcing = closed_form(OperatorKind::Marchaud, Side::Left, &x_bar, &of_rhs, t).unwrap_or(f64::NAN);
                forcing + x_bar.value(t) - x
            },
            exact.value(a),
            big_n,
        )
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        self.step = step;
        self.validate()?;
        Ok(self)
    }

    /// With `steps` RK4 steps across `[a + epsilon, b]`.
    pub fn with_steps(self, steps: usize) -> Result<Self> {
        let (a, b) = self.of.domain();
        let span = b - a - self.epsilon;
        self.with_step(span / steps.max(1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.of.domain();
        if self.big_n < 2 {
            return Err(Error::InvalidConfig(format!("the expansion size N must be at least 2, got {}", self.big_n)));
        }
        if !(self.epsilon > 0.0 && a + self.epsilon < b) {
            return Err(Error::InvalidConfig(format!("start offset {} must be positive and below b − a", self.epsilon)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", self.step)));
        }
        if !self.x_a.is_finite() {
            return Err(Error::InvalidConfig("initial value must be finite".into()));
        }
        Ok(())
    }
}

/// `t·L·x′ = (L^α rhs − A(0) x − Σ B(k) L^{1−k} V_k) / A(1)`.
fn scaled_derivative(p: &FdeProblem, fr: &Frame, x: f64, v: &[f64]) -> f64 {
    let rhs = (p.rhs)(fr.t, x);
    (fr.l.powf(fr.alpha) * rhs - fr.a0 * x - fr.moment_sum(v)) / fr.a1
}

/// Solves the assembled expansion for `x′` at `(t, x, V_2..V_N)`.
pub fn fde_assemble(problem: &FdeProblem, t: f64, x: f64, v: &[f64]) -> Result<f64> {
    if v.len() + 1 != problem.big_n {
        return Err(Error::InvalidConfig(format!("expected {} moments, got {}", problem.big_n - 1, v.len())));
    }
    let fr = Frame::at(&problem.of, problem.big_n, t)?;
    fr.check_pivot()?;
    Ok(scaled_derivative(problem, &fr, x, v) / (fr.t * fr.l))
}

fn w_rhs(p: &FdeProblem) -> impl Fn(&Frame, &[f64]) -> Vec<f64> + '_ {
    move |fr, y| {
        let mut out = Vec::with_capacity(y.len());
        out.push(scaled_derivative(p, fr, y[0], &y[1..]));
        for k in 2..=p.big_n {
            out.push((k - 1) as f64 * fr.l.powi(k as i32 - 1) * y[0]);
        }
        out
    }
}

fn integrate(p: &FdeProblem, epsilon: f64) -> Result<(Grid, Vec<Vec<f64>>)> {
    let (a, b) = p.of.domain();
    let start = a + epsilon;
    let grid = Grid::new(&p.of, p.big_n, start, step_count(b - start, p.step))?;
    grid.nodes[0].check_pivot()?;
    let f = w_rhs(p);
    let mut y = vec![0.0; p.big_n];
    y[0] = p.x_a;
    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(y.clone());
    for i in 0..grid.steps() {
        y = grid.rk4_step(&f, i, &y)?;
        states.push(y.clone());
    }
    Ok((grid, states))
}

/// Fixed-step RK4 from `a + epsilon`, with `x(a + epsilon) = x_a` and zero
/// moments, to `b`.
pub fn fde_solve(problem: &FdeProblem) -> Result<TrajectorySolution> {
    problem.validate()?;
    let (grid, states) = integrate(problem, problem.epsilon)?;
    let f = w_rhs(problem);
    let dx = grid
        .nodes
        .iter()
        .zip(&states)
        .map(|(fr, y)| f(fr, y)[0] / (fr.t * fr.l))
        .collect();
    let x_end = states[states.len() - 1][0];
    let sensitivity = integrate(problem, problem.epsilon / 10.0)
        .map(|(_, s)| (s[s.len() - 1][0] - x_end).abs())
        .ok();
    Ok(TrajectorySolution {
        grid: grid.times(),
        x: states.iter().map(|y| y[0]).collect(),
        dx,
        moments: states.iter().map(|y| y[1..].to_vec()).collect(),
        costates: None,
        diagnostics: Diagnostics {
            steps: grid.steps(),
            epsilon: problem.epsilon,
            epsilon_sensitivity: sensitivity,
            residual_norm: None,
            newton_iterations: 0,
            retried: false,
            shooting_start: None,
            objective: None,
            approx_objective: None,
        },
    })
}
