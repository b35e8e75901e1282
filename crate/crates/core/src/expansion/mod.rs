//! Approximation of the variable-order operators by finite sums of
//! integer-order derivatives `x_{k,0} = (t d/dt)^k x` and moments.

mod coefficients;
mod moments;

use rayon::prelude::*;

pub use coefficients::{coeffs_deriv, coeffs_integral, CoefficientSet};
pub use moments::{moment_left, moment_right, moments_at, moments_on_grid, MomentVector};

use crate::error::{Error, Result};
use crate::operators::{seq_x_k0, FunctionSpec, OperatorKind, OrderFunction, Side};
use crate::quadrature::QuadratureConfig;
use crate::specfun::{gamma, neg_binomial_unchecked};

/// Expansion size `n` (derivative terms `0..=n`), `N` (moment terms up to `N`)
/// and the operator being approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionConfig {
    pub n: usize,
    pub big_n: usize,
    pub side: Side,
    pub kind: OperatorKind,
}

impl ExpansionConfig {
    pub fn new(n: usize, big_n: usize, side: Side, kind: OperatorKind) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidConfig("expansion order n must be at least 1".into()));
        }
        if big_n < n + 1 {
            return Err(Error::InvalidConfig(format!("N must be at least n + 1 = {}, got {big_n}", n + 1)));
        }
        if kind == OperatorKind::Caputo && side == Side::Right {
            return Err(Error::InvalidConfig("the right Caputo expansion is not supported".into()));
        }
        Ok(ExpansionConfig { n, big_n, side, kind })
    }

    /// Highest moment index the assembly reads.
    pub fn moment_max_index(&self) -> usize {
        match self.kind {
            OperatorKind::HadamardDeriv | OperatorKind::Caputo => 2 * self.big_n + self.n + 1,
            OperatorKind::Integral | OperatorKind::Marchaud => self.big_n,
        }
    }
}

/// The order-variation sum `S2` of the Hadamard derivative expansion, in
/// powers of `span` (`ln(t/a)` on the left, `ln(b/t)` on the right).
fn order_variation_sum(x_t: f64, t: f64, alpha: f64, alpha_prime: f64, span: f64, moments: &MomentVector, n: usize, big_n: usize) -> Result<f64> {
    if alpha_prime == 0.0 {
        return Ok(0.0);
    }
    let q = 1.0 - alpha;
    let ln_span = span.ln();
    let pre = t * alpha_prime / gamma(q)? * span.powf(q);
    let c = |k: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * neg_binomial_unchecked(alpha, k)
    };

    let mut first = ln_span / q - 1.0 / (q * q);
    for k in 0..=big_n {
        first -= ln_span * c(k) / (k + 1) as f64;
        let inner: f64 = (1..=big_n).map(|p| 1.0 / (p * (k + p + 1)) as f64).sum();
        first += c(k) * inner;
    }

    let scaled = |k: usize, extra: usize| span.powi(n as i32 - (k + extra) as i32) * moments.get(k + extra);
    let mut second = 0.0;
    for k in n + 1..=big_n + n + 1 {
        let ck = c(k - n - 1);
        second += ln_span * ck / (k - n) as f64 * scaled(k, 0);
        for p in 1..=big_n {
            second -= ck / (p * (k + p - n)) as f64 * scaled(k, p);
        }
    }
    Ok(pre * (x_t * first + second))
}

/// Assembles the expansion at `t` from precomputed moments.
pub fn assemble(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, moments: &MomentVector) -> Result<f64> {
    let (a, b) = of.domain();
    if fs.max_order() < ec.n {
        return Err(Error::InsufficientOrder {
            required: ec.n,
            available: fs.max_order(),
        });
    }
    if moments.n() != ec.n || moments.max_index() < ec.moment_max_index() {
        return Err(Error::InvalidConfig(format!(
            "moment vector covers indices up to {}, the expansion needs {}",
            moments.max_index(),
            ec.moment_max_index()
        )));
    }
    if !(t >= a && t <= b) {
        return Err(Error::Domain(format!("t = {t} is outside [{a}, {b}]")));
    }
    let span = match ec.side {
        Side::Left => (t / a).ln(),
        Side::Right => (b / t).ln(),
    };
    if span <= 0.0 {
        if ec.kind == OperatorKind::Integral {
            return Ok(0.0);
        }
        return Err(Error::Domain(format!("the derivative expansion diverges at the endpoint t = {t}")));
    }
    let alpha = of.alpha(t);
    let (n, big_n) = (ec.n, ec.big_n);
    let coefs = match ec.kind {
        OperatorKind::Integral => coeffs_integral(alpha, n, big_n)?,
        _ => coeffs_deriv(alpha, n, big_n)?,
    };
    let coefs = match ec.side {
        Side::Left => coefs,
        Side::Right => coefs.alternating(),
    };
    // exponents of the span in the A and B sums
    let (a_shift, b_shift) = match ec.kind {
        OperatorKind::Integral => (alpha, alpha + n as f64),
        _ => (-alpha, n as f64 - alpha),
    };
    let mut sum = 0.0;
    for k in 0..=n {
        sum += coefs.a(k) * span.powf(a_shift + k as f64) * seq_x_k0(fs, k, t)?;
    }
    for k in n + 1..=big_n {
        sum += coefs.b(k) * span.powf(b_shift - k as f64) * moments.get(k);
    }
    match ec.kind {
        OperatorKind::Integral | OperatorKind::Marchaud => Ok(sum),
        OperatorKind::HadamardDeriv | OperatorKind::Caputo => {
            let s2 = order_variation_sum(fs.value(t), t, alpha, of.alpha_prime(t), span, moments, n, big_n)?;
            Ok(match ec.side {
                Side::Left => sum - s2,
                Side::Right => sum + s2,
            })
        }
    }
}

/// The function actually expanded: Caputo works on `x − x(a)`.
fn expanded_function(fs: &FunctionSpec, of: &OrderFunction, ec: &ExpansionConfig) -> Option<FunctionSpec> {
    (ec.kind == OperatorKind::Caputo).then(|| fs.shifted(fs.value(of.domain().0)))
}

/// Expansion value at a single point, moments by quadrature.
pub fn approximate(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    let shifted = expanded_function(fs, of, ec);
    let fs = shifted.as_ref().unwrap_or(fs);
    let (a, b) = of.domain();
    if !(t >= a && t <= b) {
        return Err(Error::Domain(format!("t = {t} is outside [{a}, {b}]")));
    }
    let moments = moments_at(fs, ec.side, (a, b), t, ec.n, ec.moment_max_index(), cfg)?;
    assemble(fs, of, t, ec, &moments)
}

/// Expansion values on an ascending grid; moments are accumulated along the
/// grid and the per-point assembly runs in parallel.
pub fn approximate_on_grid(
    fs: &FunctionSpec,
    of: &OrderFunction,
    grid: &[f64],
    ec: &ExpansionConfig,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let shifted = expanded_function(fs, of, ec);
    let fs = shifted.as_ref().unwrap_or(fs);
    let moments = moments_on_grid(fs, ec.side, of.domain(), grid, ec.n, ec.moment_max_index(), cfg)?;
    grid.par_iter()
        .zip(moments.par_iter())
        .map(|(&t, m)| assemble(fs, of, t, ec, m))
        .collect()
}

fn checked(ec: &ExpansionConfig, kind: OperatorKind, side: Side) -> Result<()> {
    if ec.kind != kind || ec.side != side {
        return Err(Error::InvalidConfig(format!(
            "expansion config is for {:?} {:?}, called as {kind:?} {side:?}",
            ec.side, ec.kind
        )));
    }
    Ok(())
}

pub fn approx_integral_left(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::Integral, Side::Left)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_integral_right(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::Integral, Side::Right)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_marchaud_left(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::Marchaud, Side::Left)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_marchaud_right(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::Marchaud, Side::Right)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_hadamard_deriv_left(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::HadamardDeriv, Side::Left)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_hadamard_deriv_right(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::HadamardDeriv, Side::Right)?;
    approximate(fs, of, t, ec, cfg)
}

pub fn approx_caputo_left(fs: &FunctionSpec, of: &OrderFunction, t: f64, ec: &ExpansionConfig, cfg: &QuadratureConfig) -> Result<f64> {
    checked(ec, OperatorKind::Caputo, Side::Left)?;
    approximate(fs, of, t, ec, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{closed_form, oracle, LogPower};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn order() -> OrderFunction {
        OrderFunction::linear(0.0, 0.1, 1.0, 5.0).unwrap()
    }

    fn log_square() -> FunctionSpec {
        FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap()
    }

    fn ec(n: usize, big_n: usize, side: Side, kind: OperatorKind) -> ExpansionConfig {
        ExpansionConfig::new(n, big_n, side, kind).unwrap()
    }

    #[test]
    fn integral_matches_rational_formulas() {
        let of = order();
        let fs = log_square();
        for t in [2.0f64, 3.0, 4.0, 5.0] {
            let common = t.ln().powf(2.0 + t / 10.0) / gamma(2.0 + t / 10.0).unwrap();
            let expected = [
                (2, common * (t * t - 20.0 * t + 300.0) / 300.0),
                (3, common * (-t.powi(3) + 40.0 * t * t - 700.0 * t + 12000.0) / 12000.0),
                (4, common * (t.powi(4) - 70.0 * t.powi(3) + 1900.0 * t * t - 33000.0 * t + 600000.0) / 600000.0),
            ];
            for (big_n, value) in expected {
                let got = approx_integral_left(&fs, &of, t, &ec(1, big_n, Side::Left, OperatorKind::Integral), &cfg()).unwrap();
                assert_relative_eq!(got, value, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn zero_function_gives_zero() {
        let of = order();
        let z = FunctionSpec::zero(1.0, 5.0).unwrap();
        for side in [Side::Left, Side::Right] {
            for kind in [OperatorKind::Integral, OperatorKind::Marchaud, OperatorKind::HadamardDeriv] {
                assert_eq!(approximate(&z, &of, 2.5, &ec(1, 4, side, kind), &cfg()).unwrap(), 0.0);
            }
        }
        assert_eq!(approx_caputo_left(&z, &of, 2.5, &ec(1, 4, Side::Left, OperatorKind::Caputo), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn marchaud_of_constant_is_exact() {
        let of = order();
        let c = FunctionSpec::constant(1.7, 1.0, 5.0).unwrap();
        for side in [Side::Left, Side::Right] {
            for big_n in [2, 4, 8] {
                for t in [1.3, 2.5, 4.4] {
                    let got = approximate(&c, &of, t, &ec(1, big_n, side, OperatorKind::Marchaud), &cfg()).unwrap();
                    let exact = oracle(OperatorKind::Marchaud, side, &c, &of, t, &cfg()).unwrap();
                    assert_relative_eq!(got, exact, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn constant_order_collapse() {
        let of = OrderFunction::constant(0.35, 1.0, 5.0).unwrap();
        let fs = log_square();
        for side in [Side::Left, Side::Right] {
            for t in [1.5, 3.0, 4.5] {
                let d = approximate(&fs, &of, t, &ec(2, 5, side, OperatorKind::HadamardDeriv), &cfg()).unwrap();
                let m = approximate(&fs, &of, t, &ec(2, 5, side, OperatorKind::Marchaud), &cfg()).unwrap();
                assert_eq!(d, m);
            }
        }
    }

    #[test]
    fn caputo_shift_relation() {
        let of = order();
        let fs = log_square();
        let cap = approx_caputo_left(&fs, &of, 3.0, &ec(1, 4, Side::Left, OperatorKind::Caputo), &cfg()).unwrap();
        let had = approx_hadamard_deriv_left(&fs, &of, 3.0, &ec(1, 4, Side::Left, OperatorKind::HadamardDeriv), &cfg()).unwrap();
        assert_relative_eq!(cap, had, max_relative = 1e-12);
        let c = FunctionSpec::constant(2.0, 1.0, 5.0).unwrap();
        assert_eq!(approx_caputo_left(&c, &of, 3.0, &ec(1, 4, Side::Left, OperatorKind::Caputo), &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn approximations_approach_oracles() {
        let of = order();
        let left = log_square();
        let right = FunctionSpec::log_power_right(2.0, 1.0, 5.0).unwrap();
        for (side, fs, t) in [(Side::Left, &left, 3.0), (Side::Right, &right, 2.0)] {
            for kind in [OperatorKind::Integral, OperatorKind::Marchaud, OperatorKind::HadamardDeriv] {
                let exact = closed_form(kind, side, fs, &of, t).unwrap();
                let coarse = (approximate(fs, &of, t, &ec(1, 2, side, kind), &cfg()).unwrap() - exact).abs();
                let fine = (approximate(fs, &of, t, &ec(1, 8, side, kind), &cfg()).unwrap() - exact).abs();
                assert!(fine < coarse, "{side:?} {kind:?}: {fine} !< {coarse}");
                assert!(fine < 0.05 * exact.abs().max(1.0), "{side:?} {kind:?}: error {fine}");
            }
        }
    }

    #[test]
    fn grid_and_pointwise_agree() {
        let of = order();
        let fs = log_square();
        let grid: Vec<f64> = (0..10).map(|i| 1.05 + 0.39 * i as f64).collect();
        for side in [Side::Left, Side::Right] {
            for kind in [OperatorKind::Integral, OperatorKind::HadamardDeriv] {
                let e = ec(1, 3, side, kind);
                let swept = approximate_on_grid(&fs, &of, &grid, &e, &cfg()).unwrap();
                for (&t, v) in grid.iter().zip(swept) {
                    let p = approximate(&fs, &of, t, &e, &cfg()).unwrap();
                    assert!((v - p).abs() <= 1e-8 * p.abs().max(1e-3), "{side:?} {kind:?} {t}: {v} vs {p}");
                }
            }
        }
    }

    #[test]
    fn endpoint_and_config_errors() {
        let of = order();
        let fs = log_square();
        assert_eq!(approximate(&fs, &of, 1.0, &ec(1, 3, Side::Left, OperatorKind::Integral), &cfg()).unwrap(), 0.0);
        assert!(approximate(&fs, &of, 1.0, &ec(1, 3, Side::Left, OperatorKind::Marchaud), &cfg()).is_err());
        assert!(approximate(&fs, &of, 5.0, &ec(1, 3, Side::Right, OperatorKind::HadamardDeriv), &cfg()).is_err());
        assert!(ExpansionConfig::new(1, 1, Side::Left, OperatorKind::Integral).is_err());
        assert!(ExpansionConfig::new(0, 3, Side::Left, OperatorKind::Integral).is_err());
        assert!(ExpansionConfig::new(1, 3, Side::Right, OperatorKind::Caputo).is_err());
        let e = ec(1, 3, Side::Left, OperatorKind::Integral);
        assert!(approx_marchaud_left(&fs, &of, 2.0, &e, &cfg()).is_err());
        let short = MomentVector::zeros(1, 3);
        assert!(assemble(&fs, &of, 2.0, &ec(1, 3, Side::Left, OperatorKind::HadamardDeriv), &short).is_err());
        assert_eq!(ec(1, 4, Side::Left, OperatorKind::HadamardDeriv).moment_max_index(), 10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn approximations_are_linear(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, t in 1.2f64..4.8, right in any::<bool>(), big_n in 2usize..6) {
            let of = order();
            let side = if right { Side::Right } else { Side::Left };
            let f1 = log_square();
            let f2 = FunctionSpec::log_poly(&[LogPower { coef: 1.0, beta: 1.0 }, LogPower { coef: 0.5, beta: 0.0 }], Side::Left, 1.0, 5.0).unwrap();
            let both = FunctionSpec::linear_combination(c1, &f1, c2, &f2).unwrap();
            for kind in [OperatorKind::Integral, OperatorKind::Marchaud, OperatorKind::HadamardDeriv] {
                let e = ec(1, big_n, side, kind);
                let v1 = approximate(&f1, &of, t, &e, &cfg()).unwrap();
                let v2 = approximate(&f2, &of, t, &e, &cfg()).unwrap();
                let vb = approximate(&both, &of, t, &e, &cfg()).unwrap();
                let scale = c1.abs() * v1.abs() + c2.abs() * v2.abs() + 1e-6;
                prop_assert!((vb - c1 * v1 - c2 * v2).abs() <= 1e-9 * scale);
            }
        }
    }
}
