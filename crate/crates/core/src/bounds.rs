//! A-priori error bounds for the expansions in [`crate::expansion`].

use crate::error::{Error, Result};
use crate::operators::{seq_x_k1, FunctionSpec, OperatorKind, OrderFunction, Side};
use crate::specfun::gamma;

/// Default number of samples for the maxima in the bounds.
pub const DEFAULT_SAMPLES: usize = 1000;

/// Everything a bound needs at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub big_n: usize,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    /// Maximum of `|x_{n,1}|` over `[a, t]` (left) or `[t, b]` (right).
    pub m_n1: f64,
    /// Maximum of `|x′|` over the same interval.
    pub m_x1: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_n1 >= 0.0 && self.m_x1 >= 0.0) {
            return Err(Error::InvalidConfig("bound maxima must be non-negative".into()));
        }
        if self.n < 1 || self.big_n < self.n + 1 {
            return Err(Error::InvalidConfig(format!(
                "bounds need n >= 1 and N >= n + 1, got n = {}, N = {}",
                self.n, self.big_n
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidOrder(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(0.0 < self.a && self.a <= self.t && self.t <= self.b) {
            return Err(Error::Domain(format!("need 0 < a <= t <= b, got a = {}, t = {}, b = {}", self.a, self.t, self.b)));
        }
        Ok(())
    }
}

/// Which quantity [`max_abs_seq`] maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqKind {
    /// `x_{n,1}`
    XN1,
    /// `x′`
    XPrime,
}

/// A sampled maximum and the spacing of the grid it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEstimate {
    pub value: f64,
    pub resolution: f64,
}

/// Maximum of `|x_{n,1}|` or `|x′|` over `[lo, hi]`: a uniform grid of
/// `samples` points, then golden-section refinement around the best sample.
pub fn max_abs_seq(fs: &FunctionSpec, lo: f64, hi: f64, which: SeqKind, n: usize, samples: usize) -> Result<MaxEstimate> {
    if samples < 2 {
        return Err(Error::InvalidConfig("max_abs_seq needs at least 2 samples".into()));
    }
    if !(lo <= hi) {
        return Err(Error::Domain(format!("interval out of order: [{lo}, {hi}]")));
    }
    let g = |t: f64| -> Result<f64> {
        Ok(match which {
            SeqKind::XN1 => seq_x_k1(fs, n, t)?.abs(),
            SeqKind::XPrime => fs.deriv(1, t)?.abs(),
        })
    };
    if lo == hi {
        return Ok(MaxEstimate { value: g(lo)?, resolution: 0.0 });
    }
    let h = (hi - lo) / (samples - 1) as f64;
    let mut best = (lo, g(lo)?);
    for i in 1..samples {
        let t = if i == samples - 1 { hi } else { lo + h * i as f64 };
        let v = g(t)?;
        if v > best.1 || !v.is_finite() {
            best = (t, v);
        }
    }
    if !best.1.is_finite() {
        return Ok(MaxEstimate { value: f64::INFINITY, resolution: h });
    }
    let (mut l, mut r) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = r - ratio * (r - l);
    let mut d = l + ratio * (r - l);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..60 {
        if gc > gd {
            r = d;
            d = c;
            gd = gc;
            c = r - ratio * (r - l);
            gc = g(c)?;
        } else {
            l = c;
            c = d;
            gc = gd;
            d = l + ratio * (r - l);
            gd = g(d)?;
        }
    }
    Ok(MaxEstimate {
        value: best.1.max(gc).max(gd),
        resolution: h,
    })
}

fn remainder_factor(s: f64, big_n: usize) -> Result<f64> {
    Ok((s * s + s).exp() / (gamma(s + 1.0)? * s * (big_n as f64).powf(s)))
}

/// Bound on the error of the left fractional-integral expansion.
pub fn bound_integral_en(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    let s = bi.n as f64 + bi.alpha;
    Ok(bi.m_n1 * remainder_factor(s, bi.big_n)? * (bi.t / bi.a).ln().powf(s) * (bi.t - bi.a))
}

/// Bound on the truncation error `E₁` of the left derivative expansions.
pub fn bound_deriv_e1(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    let s = bi.n as f64 - bi.alpha;
    Ok(bi.m_n1 * remainder_factor(s, bi.big_n)? * (bi.t / bi.a).ln().powf(s) * (bi.t - bi.a))
}

fn order_variation_bound(bi: &BoundInputs, span: f64, lever: f64) -> Result<f64> {
    if bi.alpha_prime == 0.0 || bi.m_x1 == 0.0 {
        return Ok(0.0);
    }
    let al = bi.alpha;
    let nf = bi.big_n as f64;
    let head = (lever * bi.alpha_prime * span.powf(2.0 - al)).abs();
    Ok(bi.m_x1 * head * (al * al - al).exp() / (gamma(2.0 - al)? * nf.powf(1.0 - al)) * (span.ln().abs() + 1.0 / nf))
}

/// Bound on the order-variation error `E₂` of the left Hadamard derivative
/// expansion.
pub fn bound_deriv_e2(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    order_variation_bound(bi, (bi.t / bi.a).ln(), bi.t * (2.0 * bi.t - bi.a))
}

/// Right-side mirror of [`bound_integral_en`], with `ln(b/t)` and `b − t`.
pub fn bound_right_en(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    let s = bi.n as f64 + bi.alpha;
    Ok(bi.m_n1 * remainder_factor(s, bi.big_n)? * (bi.b / bi.t).ln().powf(s) * (bi.b - bi.t))
}

/// Right-side `E₁`.
pub fn bound_right_e1(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    let s = bi.n as f64 - bi.alpha;
    Ok(bi.m_n1 * remainder_factor(s, bi.big_n)? * (bi.b / bi.t).ln().powf(s) * (bi.b - bi.t))
}

/// Right-side `E₂`.
pub fn bound_right_e2(bi: &BoundInputs) -> Result<f64> {
    bi.validate()?;
    order_variation_bound(bi, (bi.b / bi.t).ln(), bi.b * bi.t)
}

/// Total error bound for the expansion of `kind` on `side` at `t`, with the
/// maxima sampled at `samples` points.
pub fn error_bound(
    kind: OperatorKind,
    side: Side,
    fs: &FunctionSpec,
    of: &OrderFunction,
    t: f64,
    n: usize,
    big_n: usize,
    samples: usize,
) -> Result<f64> {
    let (a, b) = of.domain();
    let (lo, hi) = match side {
        Side::Left => (a, t),
        Side::Right => (t, b),
    };
    let needs_e2 = matches!(kind, OperatorKind::HadamardDeriv | OperatorKind::Caputo) && of.alpha_prime(t) != 0.0;
    let m_n1 = max_abs_seq(fs, lo, hi, SeqKind::XN1, n, samples)?.value;
    let m_x1 = if needs_e2 {
        max_abs_seq(fs, lo, hi, SeqKind::XPrime, n, samples)?.value
    } else {
        0.0
    };
    let bi = BoundInputs {
        n,
        big_n,
        t,
        a,
        b,
        alpha: of.alpha(t),
        alpha_prime: of.alpha_prime(t),
        m_n1,
        m_x1,
    };
    match (kind, side) {
        (OperatorKind::Integral, Side::Left) => bound_integral_en(&bi),
        (OperatorKind::Integral, Side::Right) => bound_right_en(&bi),
        (OperatorKind::Marchaud, Side::Left) => bound_deriv_e1(&bi),
        (OperatorKind::Marchaud, Side::Right) => bound_right_e1(&bi),
        (OperatorKind::HadamardDeriv | OperatorKind::Caputo, Side::Left) => Ok(bound_deriv_e1(&bi)? + bound_deriv_e2(&bi)?),
        (OperatorKind::HadamardDeriv, Side::Right) => Ok(bound_right_e1(&bi)? + bound_right_e2(&bi)?),
        (OperatorKind::Caputo, Side::Right) => Err(Error::Domain("the right Caputo derivative is not supported".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn inputs() -> BoundInputs {
        BoundInputs {
            n: 1,
            big_n: 4,
            t: 5.0,
            a: 1.0,
            b: 5.0,
            alpha: 0.5,
            alpha_prime: 0.1,
            m_n1: 2.0,
            m_x1: 2.0 / E,
        }
    }

    #[test]
    fn sampled_maxima() {
        let fs = FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap();
        let m = max_abs_seq(&fs, 1.0, 5.0, SeqKind::XPrime, 1, DEFAULT_SAMPLES).unwrap();
        assert_relative_eq!(m.value, 2.0 / E, max_relative = 1e-12);
        let m = max_abs_seq(&fs, 1.0, 5.0, SeqKind::XN1, 1, DEFAULT_SAMPLES).unwrap();
        assert_relative_eq!(m.value, 2.0, max_relative = 1e-12);
        // x_{1,1} = 2/t, maximized on a dense grid as an independent check
        let dense = (0..=100_000).map(|i| 2.0 / (1.0 + 4.0 * i as f64 / 100_000.0)).fold(0.0, f64::max);
        assert_relative_eq!(m.value, dense, max_relative = 1e-12);
        let c = FunctionSpec::constant(3.0, 1.0, 5.0).unwrap();
        assert_eq!(max_abs_seq(&c, 1.0, 5.0, SeqKind::XPrime, 1, 100).unwrap().value, 0.0);
        assert!(max_abs_seq(&c, 1.0, 5.0, SeqKind::XPrime, 1, 1).is_err());
    }

    #[test]
    fn integral_bound_value() {
        let bi = inputs();
        let s: f64 = 1.5;
        let l5 = 5f64.ln();
        // Γ(2.5) = 3√π/4
        let g = 3.0 * std::f64::consts::PI.sqrt() / 4.0;
        let expected = 2.0 * (s * s + s).exp() / (g * s * 4f64.powf(s)) * l5.powf(s) * 4.0;
        assert_relative_eq!(bound_integral_en(&bi).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn deriv_bound_values() {
        let bi = BoundInputs { t: 3.0, alpha: 0.3, ..inputs() };
        let s = 0.7f64;
        let expected = 2.0 * (s * s + s).exp() / (gamma(1.7).unwrap() * s * 4f64.powf(s)) * 3f64.ln().powf(s) * 2.0;
        assert_relative_eq!(bound_deriv_e1(&bi).unwrap(), expected, max_relative = 1e-13);

        let bi = BoundInputs { t: 4.0, alpha: 0.4, m_x1: 2.0 / E, ..inputs() };
        let l = 4f64.ln();
        let expected = 2.0 / E * (4.0 * 7.0 * 0.1 * l.powf(1.6)) * (0.16f64 - 0.4).exp() / (gamma(1.6).unwrap() * 4f64.powf(0.6))
            * (l.ln().abs() + 0.25);
        assert_relative_eq!(bound_deriv_e2(&bi).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn right_bounds_mirror_left() {
        // with a = 1, b = 5 and t ↦ 5/t the spans coincide
        let left = BoundInputs { t: 3.0, alpha: 0.3, ..inputs() };
        let right = BoundInputs { t: 5.0 / 3.0, ..left };
        let ratio = (5.0 - right.t) / (left.t - 1.0);
        assert_relative_eq!(bound_right_e1(&right).unwrap(), ratio * bound_deriv_e1(&left).unwrap(), max_relative = 1e-13);
        assert_relative_eq!(bound_right_en(&right).unwrap(), ratio * bound_integral_en(&left).unwrap(), max_relative = 1e-13);
        let lever = (5.0 * right.t) / (left.t * (2.0 * left.t - 1.0));
        assert_relative_eq!(bound_right_e2(&right).unwrap(), lever * bound_deriv_e2(&left).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn trivial_zeros() {
        let zero_max = BoundInputs { m_n1: 0.0, m_x1: 0.0, ..inputs() };
        assert_eq!(bound_integral_en(&zero_max).unwrap(), 0.0);
        assert_eq!(bound_deriv_e1(&zero_max).unwrap(), 0.0);
        assert_eq!(bound_deriv_e2(&zero_max).unwrap(), 0.0);
        let constant = BoundInputs { alpha_prime: 0.0, t: 3.0, ..inputs() };
        assert_eq!(bound_deriv_e2(&constant).unwrap(), 0.0);
        assert_eq!(bound_right_e2(&constant).unwrap(), 0.0);
        assert_eq!(bound_right_e1(&BoundInputs { m_n1: 0.0, ..constant }).unwrap(), 0.0);
    }

    #[test]
    fn doubling_n_scales_by_power() {
        let bi = inputs();
        let twice = BoundInputs { big_n: 8, ..bi };
        assert_relative_eq!(bound_integral_en(&twice).unwrap() / bound_integral_en(&bi).unwrap(), 2f64.powf(-1.5), max_relative = 1e-13);
        assert_relative_eq!(bound_deriv_e1(&twice).unwrap() / bound_deriv_e1(&bi).unwrap(), 2f64.powf(-0.5), max_relative = 1e-13);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(bound_integral_en(&BoundInputs { m_n1: -1.0, ..inputs() }).is_err());
        assert!(bound_deriv_e1(&BoundInputs { big_n: 1, ..inputs() }).is_err());
        assert!(bound_deriv_e1(&BoundInputs { t: 6.0, ..inputs() }).is_err());
    }

    #[test]
    fn bounds_cover_the_actual_error() {
        use crate::expansion::{approximate, ExpansionConfig};
        use crate::operators::oracle;
        use crate::quadrature::QuadratureConfig;
        let cfg = QuadratureConfig::default();
        let of = OrderFunction::linear(0.0, 0.1, 1.0, 5.0).unwrap();
        let fs = FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap();
        let kinds = [OperatorKind::Integral, OperatorKind::Marchaud, OperatorKind::HadamardDeriv];
        for side in [Side::Left, Side::Right] {
            for kind in kinds {
                for big_n in 2..=4 {
                    let ec = ExpansionConfig::new(1, big_n, side, kind).unwrap();
                    for i in 0..8 {
                        let t = 1.05 + 3.9 * i as f64 / 7.0;
                        let exact = oracle(kind, side, &fs, &of, t, &cfg).unwrap();
                        let approx = approximate(&fs, &of, t, &ec, &cfg).unwrap();
                        let bound = error_bound(kind, side, &fs, &of, t, 1, big_n, DEFAULT_SAMPLES).unwrap();
                        let err = (exact - approx).abs();
                        assert!(err <= bound, "{side:?} {kind:?} N = {big_n} t = {t}: {err} > {bound}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bounds_nonnegative_and_decreasing_in_n(
            n in 1usize..4, extra in 1usize..10, t in 1.01f64..4.99, alpha in 0.05f64..0.95,
            ap in -0.5f64..0.5, m1 in 0.0f64..10.0, m2 in 0.0f64..10.0,
        ) {
            let bi = BoundInputs { n, big_n: n + extra, t, a: 1.0, b: 5.0, alpha, alpha_prime: ap, m_n1: m1, m_x1: m2 };
            let next = BoundInputs { big_n: n + extra + 1, ..bi };
            let all = [bound_integral_en, bound_deriv_e1, bound_deriv_e2, bound_right_en, bound_right_e1, bound_right_e2];
            for f in all {
                let v = f(&bi).unwrap();
                let w = f(&next).unwrap();
                prop_assert!(v >= 0.0);
                prop_assert!(w < v || v == 0.0);
            }
        }
    }
}
