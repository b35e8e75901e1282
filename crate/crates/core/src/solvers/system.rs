//! Integration grid in `w = ln ln(t/a)` and the coefficient frames sampled on
//! it. In `w` the linear part of the state equation has bounded coefficients,
//! so a fixed-step explicit scheme stays stable all the way down to `a + ε`.

use crate::error::{Error, Result};
use crate::expansion::coeffs_deriv;
use crate::operators::OrderFunction;

/// Coefficients of the `n = 1` derivative expansion at one time.
#[derive(Debug, Clone)]
pub(crate) struct Frame {
    pub t: f64,
    /// `ln(t/a)`
    pub l: f64,
    pub alpha: f64,
    pub a0: f64,
    pub a1: f64,
    /// `B(k)` at index `k − 2`.
    pub b: Vec<f64>,
}

impl Frame {
    pub fn at(of: &OrderFunction, big_n: usize, t: f64) -> Result<Frame> {
        let (a, _) = of.domain();
        let l = (t / a).ln();
        if !(l > 0.0) {
            return Err(Error::SingularAssembly { t, pivot: 0.0 });
        }
        let alpha = of.alpha(t);
        let c = coeffs_deriv(alpha, 1, big_n)?;
        Ok(Frame {
            t,
            l,
            alpha,
            a0: c.a(0),
            a1: c.a(1),
            b: (2..=big_n).map(|k| c.b(k)).collect(),
        })
    }

    /// `A(1)·L^{1−α}·t`, the factor multiplying `x′`.
    pub fn pivot(&self) -> f64 {
        self.a1 * self.l.powf(1.0 - self.alpha) * self.t
    }

    pub fn check_pivot(&self) -> Result<()> {
        let p = self.pivot();
        if !(p.is_finite() && p.abs() > f64::MIN_POSITIVE) {
            return Err(Error::SingularAssembly { t: self.t, pivot: p });
        }
        Ok(())
    }

    /// `Σ_k B(k) L^{1−k} V_k`.
    pub fn moment_sum(&self, v: &[f64]) -> f64 {
        self.b
            .iter()
            .zip(v)
            .enumerate()
            .map(|(i, (bk, vk))| bk * self.l.powi(-(i as i32) - 1) * vk)
            .sum()
    }
}

/// Uniform grid in `w` from `start` to `b`, with the nodes and midpoints
/// converted to frames.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub h: f64,
    pub nodes: Vec<Frame>,
    pub mids: Vec<Frame>,
}

pub(crate) fn step_count(span: f64, step: f64) -> usize {
    ((span / step) - 1e-9).ceil().max(1.0) as usize
}

impl Grid {
    pub fn new(of: &OrderFunction, big_n: usize, start: f64, steps: usize) -> Result<Grid> {
        Self::between(of, big_n, start, of.domain().1, steps)
    }

    pub fn between(of: &OrderFunction, big_n: usize, start: f64, b: f64, steps: usize) -> Result<Grid> {
        let (a, _) = of.domain();
        let w0 = (start / a).ln().ln();
        let w1 = (b / a).ln().ln();
        let h = (w1 - w0) / steps as f64;
        let t_of = |w: f64| a * w.exp().exp();
        let mut nodes = Vec::with_capacity(steps + 1);
        let mut mids = Vec::with_capacity(steps);
        for i in 0..=steps {
            let t = match i {
                0 => start,
                i if i == steps => b,
                i => t_of(w0 + h * i as f64),
            };
            nodes.push(Frame::at(of, big_n, t)?);
            if i < steps {
                mids.push(Frame::at(of, big_n, t_of(w0 + h * (i as f64 + 0.5)))?);
            }
        }
        Ok(Grid { h, nodes, mids })
    }

    pub fn steps(&self) -> usize {
        self.mids.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|f| f.t).collect()
    }

    /// Classical RK4 step `i` of `dy/dw = f(frame, y)`.
    pub fn rk4_step<F>(&self, f: &F, i: usize, y: &[f64]) -> Result<Vec<f64>>
    where
        F: Fn(&Frame, &[f64]) -> Vec<f64>,
    {
        let h = self.h;
        let axpy = |s: f64, k: &[f64]| y.iter().zip(k).map(|(yi, ki)| yi + s * ki).collect::<Vec<_>>();
        let k1 = f(&self.nodes[i], y);
        let k2 = f(&self.mids[i], &axpy(h / 2.0, &k1));
        let k3 = f(&self.mids[i], &axpy(h / 2.0, &k2));
        let k4 = f(&self.nodes[i + 1], &axpy(h, &k3));
        let next: Vec<f64> = (0..y.len())
            .map(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: self.nodes[i + 1].t });
        }
        Ok(next)
    }
}
