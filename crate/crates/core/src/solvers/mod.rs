//! Solvers built on the first-order (`n = 1`) derivative expansion: an initial
//! value problem for the Marchaud-type equation and a quadratic tracking
//! problem solved through its Hamiltonian system by shooting.

mod fde;
mod fvp;
mod interp;
mod l2;
mod system;

pub use fde::{fde_assemble, fde_solve, FdeProblem, ScalarRhs};
pub use fvp::{fvp_hamiltonian_rhs, fvp_solve, tracking_objective, FvpProblem, TargetFn};
pub use interp::CubicHermite;
pub use l2::{l2_error, trajectory_l2_error};

use crate::error::Result;

/// Solver diagnostics. Fields that do not apply to a solver are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// RK4 steps over the whole interval.
    pub steps: usize,
    /// Start offset: integration begins at `a + epsilon`.
    pub epsilon: f64,
    /// Change in the reported end state when the start offset is divided by
    /// ten. This measures the effect of starting away from `a`.
    pub epsilon_sensitivity: Option<f64>,
    /// Max-norm of the terminal residual after shooting.
    pub residual_norm: Option<f64>,
    pub newton_iterations: usize,
    /// Whether the randomized restart was needed.
    pub retried: bool,
    /// Where shooting starts; costates are zero before this point.
    pub shooting_start: Option<f64>,
    /// The tracking functional with the exact Marchaud derivative of the
    /// interpolated trajectory.
    pub objective: Option<f64>,
    /// The tracking functional of the approximated problem, `∫ (u − target)²`.
    pub approx_objective: Option<f64>,
}

/// A trajectory on `[a + epsilon, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySolution {
    pub grid: Vec<f64>,
    pub x: Vec<f64>,
    /// `x′` at each grid point, from the dynamics.
    pub dx: Vec<f64>,
    /// `V_2 ..= V_N` at each grid point.
    pub moments: Vec<Vec<f64>>,
    /// `λ_1 ..= λ_N` at each grid point, for the variational solver.
    pub costates: Option<Vec<Vec<f64>>>,
    pub diagnostics: Diagnostics,
}

impl TrajectorySolution {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn final_x(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Cubic Hermite interpolant of `x` through the grid.
    pub fn interpolant(&self) -> Result<CubicHermite> {
        CubicHermite::new(self.grid.clone(), self.x.clone(), self.dx.clone())
    }
}
