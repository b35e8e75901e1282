use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{factorial, gamma, gamma_ratio_shift, sin_pi};

/// Expansion coefficients at one evaluation point: `A(0..=n)` and
/// `B(n+1..=N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub n: usize,
    pub big_n: usize,
    pub alpha: f64,
    /// `A(k)` at index `k`.
    pub a: Vec<f64>,
    /// `B(k)` at index `k − n − 1`.
    pub b: Vec<f64>,
}

impl CoefficientSet {
    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }

    pub fn b(&self, k: usize) -> f64 {
        self.b[k - self.n - 1]
    }

    /// The same set with `A(k)` multiplied by `(−1)^k`, as used by the
    /// right-side expansions.
    pub fn alternating(mut self) -> Self {
        for (k, a) in self.a.iter_mut().enumerate() {
            if k % 2 == 1 {
                *a = -*a;
            }
        }
        self
    }
}

fn check(alpha: f64, n: usize, big_n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidOrder(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if n < 1 || big_n < n + 1 {
        return Err(Error::InvalidConfig(format!("expansion needs n >= 1 and N >= n + 1, got n = {n}, N = {big_n}")));
    }
    Ok(())
}

/// `1 + Σ_{p=n−k+1}^{N} Γ(z+m)/(Γ(z)·m!)` with `m = p − n + k`.
fn bracket(z: f64, n: usize, k: usize, big_n: usize) -> f64 {
    let first = n - k + 1;
    1.0 + (first..=big_n)
        .map(|p| {
            let m = p + k - n;
            gamma_ratio_shift(z, m) / factorial(m)
        })
        .sum::<f64>()
}

fn finite(set: CoefficientSet) -> Result<CoefficientSet> {
    if set.a.iter().chain(set.b.iter()).all(|v| v.is_finite()) {
        Ok(set)
    } else {
        Err(Error::Overflow {
            function: "expansion coefficients",
            at: set.alpha,
        })
    }
}

/// Coefficients of the fractional-integral expansion.
pub fn coeffs_integral(alpha: f64, n: usize, big_n: usize) -> Result<CoefficientSet> {
    check(alpha, n, big_n)?;
    let mut a = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let z = -alpha - k as f64;
        a.push(bracket(z, n, k, big_n) / gamma(alpha + k as f64 + 1.0)?);
    }
    // 1/(Γ(α)Γ(1−α)) = sin(πα)/π
    let reflect = sin_pi(alpha) / PI;
    let mut b = Vec::with_capacity(big_n - n);
    for k in n + 1..=big_n {
        b.push(reflect * gamma((k - n) as f64 - alpha)? / factorial(k - n));
    }
    finite(CoefficientSet {
        n,
        big_n,
        alpha,
        a,
        b,
    })
}

/// Coefficients of the Marchaud / Hadamard derivative expansions.
pub fn coeffs_deriv(alpha: f64, n: usize, big_n: usize) -> Result<CoefficientSet> {
    check(alpha, n, big_n)?;
    let mut a = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let z = alpha - k as f64;
        a.push(bracket(z, n, k, big_n) / gamma(k as f64 + 1.0 - alpha)?);
    }
    // 1/(Γ(−α)Γ(1+α)) = −sin(πα)/π
    let reflect = -sin_pi(alpha) / PI;
    let mut b = Vec::with_capacity(big_n - n);
    for k in n + 1..=big_n {
        b.push(reflect * gamma((k - n) as f64 + alpha)? / factorial(k - n));
    }
    finite(CoefficientSet {
        n,
        big_n,
        alpha,
        a,
        b,
    })
}
