use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::FunctionSpec;

/// Piecewise cubic Hermite interpolant through values and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    t: Vec<f64>,
    x: Vec<f64>,
    dx: Vec<f64>,
}

impl CubicHermite {
    pub fn new(t: Vec<f64>, x: Vec<f64>, dx: Vec<f64>) -> Result<Self> {
        if t.len() < 2 || x.len() != t.len() || dx.len() != t.len() {
            return Err(Error::InvalidConfig(format!(
                "interpolation needs at least two nodes and matching lengths, got {}/{}/{}",
                t.len(),
                x.len(),
                dx.len()
            )));
        }
        if t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("interpolation nodes must be strictly increasing".into()));
        }
        Ok(CubicHermite { t, x, dx })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    fn segment(&self, s: f64) -> usize {
        self.t.partition_point(|&v| v <= s).clamp(1, self.t.len() - 1) - 1
    }

    /// `j`-th derivative at `s`; the end cubics extend outside the nodes.
    pub fn derivative(&self, j: usize, s: f64) -> f64 {
        let i = self.segment(s);
        let h = self.t[i + 1] - self.t[i];
        let u = (s - self.t[i]) / h;
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let (m0, m1) = (h * self.dx[i], h * self.dx[i + 1]);
        let c1 = m0;
        let c2 = 3.0 * (x1 - x0) - 2.0 * m0 - m1;
        let c3 = 2.0 * (x0 - x1) + m0 + m1;
        match j {
            0 => x0 + u * (c1 + u * (c2 + u * c3)),
            1 => (c1 + u * (2.0 * c2 + 3.0 * u * c3)) / h,
            2 => (2.0 * c2 + 6.0 * u * c3) / (h * h),
            3 => 6.0 * c3 / (h * h * h),
            _ => 0.0,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivative(0, s)
    }

    /// The interpolant as an operator input with derivatives up to order 3.
    pub fn to_function_spec(&self) -> Result<FunctionSpec> {
        let (a, b) = self.domain();
        let me = Arc::new(self.clone());
        FunctionSpec::from_exact_derivatives(move |j, s| me.derivative(j, s), 3, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_cubics_exactly() {
        let p = |s: f64| 1.0 - 2.0 * s + 0.5 * s * s + 0.25 * s.powi(3);
        let dp = |s: f64| -2.0 + s + 0.75 * s * s;
        let t = vec![1.0, 1.3, 2.0, 2.2, 3.5];
        let h = CubicHermite::new(t.clone(), t.iter().map(|&s| p(s)).collect(), t.iter().map(|&s| dp(s)).collect()).unwrap();
        for s in [1.0, 1.1, 1.77, 2.2, 3.0, 3.5] {
            assert_relative_eq!(h.value(s), p(s), epsilon = 1e-13);
            assert_relative_eq!(h.derivative(1, s), dp(s), epsilon = 1e-12);
            assert_relative_eq!(h.derivative(2, s), 1.0 + 1.5 * s, epsilon = 1e-11);
            assert_relative_eq!(h.derivative(3, s), 1.5, epsilon = 1e-9);
        }
        let fs = h.to_function_spec().unwrap();
        assert_eq!(fs.max_order(), 3);
        assert_relative_eq!(fs.deriv(1, 2.5).unwrap(), dp(2.5), epsilon = 1e-12);
    }

    #[test]
    fn fourth_order_accuracy() {
        let err = |n: usize| {
            let t: Vec<f64> = (0..=n).map(|i| 1.0 + 4.0 * i as f64 / n as f64).collect();
            let h = CubicHermite::new(t.clone(), t.iter().map(|s| s.ln()).collect(), t.iter().map(|s| 1.0 / s).collect()).unwrap();
            (0..1000).map(|i| 1.0 + 4.0 * (i as f64 + 0.5) / 1000.0).map(|s| (h.value(s) - s.ln()).abs()).fold(0.0, f64::max)
        };
        let ratio = err(80) / err(160);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(CubicHermite::new(vec![1.0], vec![0.0], vec![0.0]).is_err());
        assert!(CubicHermite::new(vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(CubicHermite::new(vec![1.0, 2.0], vec![0.0], vec![0.0, 0.0]).is_err());
    }
}
