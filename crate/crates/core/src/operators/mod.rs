//! Variable-order Hadamard operators: order and function types, quadrature
//! reference values, and exact values for log powers.

mod function;
mod oracles;
mod order;

pub use function::{seq_x_k0, seq_x_k1, FunctionSpec, LogPower, ANALYTIC_ORDER};
pub use oracles::{
    caputo_left_oracle, closed_form, closed_form_logpower, closed_form_logpower_right, left_hadamard_deriv_oracle,
    left_integral_oracle, left_marchaud_oracle, left_order_variation_term, oracle, right_hadamard_deriv_oracle,
    right_integral_oracle, right_marchaud_oracle,
};
pub use order::OrderFunction;

/// Which operator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Integral,
    /// The Hadamard derivative, including the order-variation term.
    HadamardDeriv,
    /// The Marchaud form, which drops the order-variation term.
    Marchaud,
    /// Caputo-type derivative (left side only).
    Caputo,
}

/// Left operators integrate over `[a, t]`, right ones over `[t, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}
