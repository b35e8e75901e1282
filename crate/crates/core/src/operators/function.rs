use std::fmt;
use std::sync::Arc;

use super::Side;
use crate::error::{Error, Result};

type DerivFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Derivative order available from the analytic log-power constructors.
pub const ANALYTIC_ORDER: usize = 32;

/// One term `coef·(ln(t/a))^β` (left) or `coef·(ln(b/t))^β` (right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPower {
    pub coef: f64,
    pub beta: f64,
}

/// A sufficiently smooth function on `[a, b]`, `a > 0`, with derivatives.
#[derive(Clone)]
pub struct FunctionSpec {
    deriv: DerivFn,
    max_order: usize,
    a: f64,
    b: f64,
    reduced_accuracy: bool,
    log_terms: Option<(Side, Vec<LogPower>)>,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("max_order", &self.max_order)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("reduced_accuracy", &self.reduced_accuracy)
            .field("log_terms", &self.log_terms)
            .finish()
    }
}

fn check_domain(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::Domain(format!("function domain must satisfy 0 < a < b, got [{a}, {b}]")));
    }
    Ok(())
}

/// Signed Stirling numbers of the first kind `s(j, 0..=j)`.
fn stirling_first_row(j: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 0..j {
        let mut next = vec![0.0; m + 2];
        for (i, &s) in row.iter().enumerate() {
            next[i + 1] += s;
            next[i] -= m as f64 * s;
        }
        row = next;
    }
    row
}

/// Stirling numbers of the second kind `S(k, 0..=k)`.
fn stirling_second_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 0..k {
        let mut next = vec![0.0; m + 2];
        for (j, &s) in row.iter().enumerate() {
            next[j] += j as f64 * s;
            next[j + 1] += s;
        }
        row = next;
    }
    row
}

/// Coefficients `a_{k, 0..=k}` of `x_{k,1} = Σ a_{k,j} t^j x^{(j+1)}`.
fn derivative_sequence_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 0..k {
        let mut next = vec![0.0; m + 2];
        for (j, &c) in row.iter().enumerate() {
            next[j] += (j + 1) as f64 * c;
            next[j + 1] += c;
        }
        row = next;
    }
    row
}

/// j-th derivative of `(ln(t/a))^β` (left) or `(ln(b/t))^β` (right).
fn log_power_derivative(beta: f64, j: usize, t: f64, anchor: f64, side: Side) -> f64 {
    let (ell, sigma) = match side {
        Side::Left => ((t / anchor).ln().max(0.0), 1.0f64),
        Side::Right => ((anchor / t).ln().max(0.0), -1.0),
    };
    if j == 0 {
        return ell.powf(beta);
    }
    let s = stirling_first_row(j);
    let mut falling = 1.0;
    let mut sum = 0.0;
    for (i, &sji) in s.iter().enumerate() {
        if i > 0 {
            falling *= beta - (i - 1) as f64;
        }
        if sji == 0.0 || falling == 0.0 {
            continue;
        }
        sum += sji * sigma.powi(i as i32) * falling * ell.powf(beta - i as f64);
    }
    sum / t.powi(j as i32)
}

impl FunctionSpec {
    /// Builds a function from analytic derivatives `deriv(j, t)`, `j ≤ max_order`,
    /// spot-checking each derivative against central differences of the
    /// previous one.
    pub fn new<F>(deriv: F, max_order: usize, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        check_domain(a, b)?;
        let fs = FunctionSpec {
            deriv: Arc::new(deriv),
            max_order,
            a,
            b,
            reduced_accuracy: false,
            log_terms: None,
        };
        fs.check_derivatives()?;
        Ok(fs)
    }

    fn check_derivatives(&self) -> Result<()> {
        let top = self.max_order.min(4);
        for i in 1..8 {
            let t = self.a + (self.b - self.a) * (0.1 + 0.8 * i as f64 / 8.0);
            let h = 1e-5 * t;
            for j in 1..=top {
                let fd = ((self.deriv)(j - 1, t + h) - (self.deriv)(j - 1, t - h)) / (2.0 * h);
                let d = (self.deriv)(j, t);
                let prev = (self.deriv)(j - 1, t);
                let tol = 1e-5 * d.abs().max(prev.abs() / t) + 1e-12;
                if !((fd - d).abs() <= tol) {
                    return Err(Error::InvalidFunction(format!(
                        "derivative of order {j} at t = {t} is {d}, central difference gives {fd}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(ln(t/a))^β` on `[a, b]`.
    pub fn log_power(beta: f64, a: f64, b: f64) -> Result<Self> {
        Self::log_poly(&[LogPower { coef: 1.0, beta }], Side::Left, a, b)
    }

    /// `(ln(b/t))^β` on `[a, b]`.
    pub fn log_power_right(beta: f64, a: f64, b: f64) -> Result<Self> {
        Self::log_poly(&[LogPower { coef: 1.0, beta }], Side::Right, a, b)
    }

    /// `Σ c_i (ln(t/a))^{β_i}` for `Side::Left`, `Σ c_i (ln(b/t))^{β_i}` for
    /// `Side::Right`.
    pub fn log_poly(terms: &[LogPower], side: Side, a: f64, b: f64) -> Result<Self> {
        check_domain(a, b)?;
        if terms.is_empty() {
            return Err(Error::InvalidFunction("a log polynomial needs at least one term".into()));
        }
        for term in terms {
            if !(term.beta > -1.0) || !term.coef.is_finite() {
                return Err(Error::InvalidFunction(format!(
                    "log power exponent must exceed -1, got {}",
                    term.beta
                )));
            }
        }
        let anchor = match side {
            Side::Left => a,
            Side::Right => b,
        };
        let owned = terms.to_vec();
        let deriv = move |j: usize, t: f64| {
            owned
                .iter()
                .map(|p| p.coef * log_power_derivative(p.beta, j, t, anchor, side))
                .sum()
        };
        Ok(FunctionSpec {
            deriv: Arc::new(deriv),
            max_order: ANALYTIC_ORDER,
            a,
            b,
            reduced_accuracy: false,
            log_terms: Some((side, terms.to_vec())),
        })
    }

    pub fn constant(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::log_poly(&[LogPower { coef: c, beta: 0.0 }], Side::Left, a, b)
    }

    pub fn zero(a: f64, b: f64) -> Result<Self> {
        Self::constant(0.0, a, b)
    }

    /// Derivatives by central differences with step `ε^{1/(j+2)}·max(|t|, 1)`.
    /// Accuracy degrades quickly with the order; the result is flagged as
    /// reduced-accuracy. The stencil may sample slightly outside `[a, b]`.
    pub fn finite_difference<F>(value: F, max_order: usize, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_domain(a, b)?;
        let deriv = move |j: usize, t: f64| {
            if j == 0 {
                return value(t);
            }
            let h = f64::EPSILON.powf(1.0 / (j as f64 + 2.0)) * t.abs().max(1.0);
            let mut binom = 1.0;
            let mut sum = 0.0;
            for k in 0..=j {
                let offset = (j as f64 / 2.0 - k as f64) * h;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * binom * value(t + offset);
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
            sum / h.powi(j as i32)
        };
        Ok(FunctionSpec {
            deriv: Arc::new(deriv),
            max_order,
            a,
            b,
            reduced_accuracy: true,
            log_terms: None,
        })
    }

    /// Wraps derivatives that are exact by construction, such as a piecewise
    /// polynomial, where difference checks across knots would be misleading.
    pub(crate) fn from_exact_derivatives<F>(deriv: F, max_order: usize, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        check_domain(a, b)?;
        Ok(FunctionSpec {
            deriv: Arc::new(deriv),
            max_order,
            a,
            b,
            reduced_accuracy: false,
            log_terms: None,
        })
    }

    /// `x − c`.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.deriv.clone();
        let log_terms = self.log_terms.as_ref().map(|(side, terms)| {
            let mut terms = terms.clone();
            terms.push(LogPower { coef: -c, beta: 0.0 });
            (*side, terms)
        });
        FunctionSpec {
            deriv: Arc::new(move |j, t| if j == 0 { inner(0, t) - c } else { inner(j, t) }),
            max_order: self.max_order,
            a: self.a,
            b: self.b,
            reduced_accuracy: self.reduced_accuracy,
            log_terms,
        }
    }

    /// `c1·f1 + c2·f2` on the intersection of the two domains.
    pub fn linear_combination(c1: f64, f1: &FunctionSpec, c2: f64, f2: &FunctionSpec) -> Result<Self> {
        let a = f1.a.max(f2.a);
        let b = f1.b.min(f2.b);
        check_domain(a, b)?;
        let (d1, d2) = (f1.deriv.clone(), f2.deriv.clone());
        let log_terms = match (&f1.log_terms, &f2.log_terms) {
            (Some((s1, t1)), Some((s2, t2))) if s1 == s2 && f1.a == f2.a && f1.b == f2.b => {
                let mut terms: Vec<LogPower> = t1.iter().map(|p| LogPower { coef: c1 * p.coef, beta: p.beta }).collect();
                terms.extend(t2.iter().map(|p| LogPower { coef: c2 * p.coef, beta: p.beta }));
                Some((*s1, terms))
            }
            _ => None,
        };
        Ok(FunctionSpec {
            deriv: Arc::new(move |j, t| c1 * d1(j, t) + c2 * d2(j, t)),
            max_order: f1.max_order.min(f2.max_order),
            a,
            b,
            reduced_accuracy: f1.reduced_accuracy || f2.reduced_accuracy,
            log_terms,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.deriv)(0, t)
    }

    pub fn deriv(&self, j: usize, t: f64) -> Result<f64> {
        if j > self.max_order {
            return Err(Error::InsufficientOrder {
                required: j,
                available: self.max_order,
            });
        }
        Ok((self.deriv)(j, t))
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn is_reduced_accuracy(&self) -> bool {
        self.reduced_accuracy
    }

    /// The log-power representation, when the function was built from one.
    pub fn log_terms(&self) -> Option<(Side, &[LogPower])> {
        self.log_terms.as_ref().map(|(s, t)| (*s, t.as_slice()))
    }
}

/// `x_{k,0}(t) = (t d/dt)^k x(t) = Σ_j S(k, j) t^j x^{(j)}(t)`.
pub fn seq_x_k0(fs: &FunctionSpec, k: usize, t: f64) -> Result<f64> {
    if k > fs.max_order {
        return Err(Error::InsufficientOrder {
            required: k,
            available: fs.max_order,
        });
    }
    let s = stirling_second_row(k);
    let mut sum = 0.0;
    for (j, &c) in s.iter().enumerate() {
        if c != 0.0 {
            sum += c * t.powi(j as i32) * (fs.deriv)(j, t);
        }
    }
    Ok(sum)
}

/// `x_{k,1}(t)` with `x_{0,1} = x′` and `x_{k+1,1} = d/dt (t·x_{k,1})`.
pub fn seq_x_k1(fs: &FunctionSpec, k: usize, t: f64) -> Result<f64> {
    if k + 1 > fs.max_order {
        return Err(Error::InsufficientOrder {
            required: k + 1,
            available: fs.max_order,
        });
    }
    let coefs = derivative_sequence_row(k);
    Ok(coefs
        .iter()
        .enumerate()
        .map(|(j, &c)| c * t.powi(j as i32) * (fs.deriv)(j + 1, t))
        .sum())
}
