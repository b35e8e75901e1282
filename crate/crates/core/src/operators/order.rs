use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const GRID_POINTS: usize = 1001;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

/// A variable fractional order `α(t) ∈ (0, 1)` on `[a, b]` with its derivative.
#[derive(Clone)]
pub struct OrderFunction {
    alpha: ScalarFn,
    alpha_prime: ScalarFn,
    a: f64,
    b: f64,
    label: String,
}

impl fmt::Debug for OrderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrderFunction")
            .field("label", &self.label)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl OrderFunction {
    /// Validates `0 < α < 1` on a dense grid and checks `α′` against central
    /// differences.
    pub fn new<F, G>(alpha: F, alpha_prime: G, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(Arc::new(alpha), Arc::new(alpha_prime), a, b, "custom".into())
    }

    pub fn constant(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::build(Arc::new(move |_| c), Arc::new(|_| 0.0), a, b, format!("constant:{c}"))
    }

    /// `α(t) = c0 + c1·t`.
    pub fn linear(c0: f64, c1: f64, a: f64, b: f64) -> Result<Self> {
        Self::build(
            Arc::new(move |t| c0 + c1 * t),
            Arc::new(move |_| c1),
            a,
            b,
            format!("linear:{c0}:{c1}"),
        )
    }

    fn build(alpha: ScalarFn, alpha_prime: ScalarFn, a: f64, b: f64, label: String) -> Result<Self> {
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::Domain(format!("order domain must satisfy 0 < a < b, got [{a}, {b}]")));
        }
        for i in 0..GRID_POINTS {
            let t = a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64;
            let v = alpha(t);
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidOrder(format!("alpha({t}) = {v} is outside (0, 1)")));
            }
        }
        for i in 1..20 {
            let t = a + (b - a) * i as f64 / 20.0;
            let fd = (alpha(t + FD_STEP) - alpha(t - FD_STEP)) / (2.0 * FD_STEP);
            let d = alpha_prime(t);
            if !((fd - d).abs() <= FD_TOL) {
                return Err(Error::InvalidOrder(format!(
                    "alpha'({t}) = {d} disagrees with the central difference {fd}"
                )));
            }
        }
        Ok(OrderFunction {
            alpha,
            alpha_prime,
            a,
            b,
            label,
        })
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    pub fn alpha_prime(&self, t: f64) -> f64 {
        (self.alpha_prime)(t)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when `α′` vanishes on the whole domain.
    pub fn is_constant(&self) -> bool {
        (0..=32).all(|i| {
            let t = self.a + (self.b - self.a) * i as f64 / 32.0;
            self.alpha_prime(t) == 0.0
        })
    }
}
