//! Variable-order Hadamard fractional calculus.
//!
//! Reference operators are evaluated by quadrature on the singular kernels
//! ([`operators`]). The same operators are approximated by finite sums of
//! integer-order derivatives and moments ([`expansion`]) with a posteriori
//! error bounds ([`bounds`]). The expansions turn fractional differential
//! equations and variational problems into ODE systems ([`solvers`]).

pub mod bounds;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod operators;
pub mod quadrature;
pub mod solvers;
pub mod specfun;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
