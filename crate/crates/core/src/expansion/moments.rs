use crate::error::{Error, Result};
use crate::operators::{FunctionSpec, Side};
use crate::quadrature::{integrate, QuadratureConfig};

/// Moments `V_k` (left) or `W_k` (right) for `k = n+1 ..= max_index` at one
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    n: usize,
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(n: usize, values: Vec<f64>) -> Self {
        MomentVector { n, values }
    }

    pub fn zeros(n: usize, max_index: usize) -> Self {
        MomentVector {
            n,
            values: vec![0.0; max_index.saturating_sub(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_index(&self) -> usize {
        self.n + self.values.len()
    }

    /// Panics when `k` is outside `n+1 ..= max_index`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - self.n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Moments are small near the anchor point and are later divided by powers
/// of the log span, so only relative accuracy counts.
fn relative_only(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-300,
        ..*cfg
    }
}

fn check_index(n: usize, k: usize) -> Result<()> {
    if k < n + 1 {
        return Err(Error::Domain(format!("moment index k = {k} must exceed n = {n}")));
    }
    Ok(())
}

/// `(k−n) L^{k−n} ∫_0^1 s^{k−n−1} x(anchor·e^{±sL}) ds`.
fn scaled_moment(
    x: impl Fn(f64) -> f64,
    anchor: f64,
    span: f64,
    sign: f64,
    n: usize,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if span == 0.0 {
        return Ok(0.0);
    }
    let m = (k - n) as f64;
    let power = (k - n - 1) as i32;
    let est = integrate(
        |s: f64| s.powi(power) * x(anchor * (sign * s * span).exp()),
        0.0,
        1.0,
        &relative_only(cfg),
    )?;
    Ok(m * span.powi(k as i32 - n as i32) * est.value)
}

/// `V_k(t) = (k−n) ∫_a^t (ln(τ/a))^{k−n−1} x(τ)/τ dτ`.
pub fn moment_left(fs: &FunctionSpec, a: f64, t: f64, n: usize, k: usize, cfg: &QuadratureConfig) -> Result<f64> {
    check_index(n, k)?;
    if !(a > 0.0 && t >= a) {
        return Err(Error::Domain(format!("left moment needs 0 < a <= t, got a = {a}, t = {t}")));
    }
    scaled_moment(|tau| fs.value(tau), a, (t / a).ln(), 1.0, n, k, cfg)
}

/// `W_k(t) = (k−n) ∫_t^b (ln(b/τ))^{k−n−1} x(τ)/τ dτ`.
pub fn moment_right(fs: &FunctionSpec, t: f64, b: f64, n: usize, k: usize, cfg: &QuadratureConfig) -> Result<f64> {
    check_index(n, k)?;
    if !(t > 0.0 && b >= t) {
        return Err(Error::Domain(format!("right moment needs 0 < t <= b, got t = {t}, b = {b}")));
    }
    scaled_moment(|tau| fs.value(tau), b, (b / t).ln(), -1.0, n, k, cfg)
}

/// All moments `n+1 ..= max_index` at a single point by quadrature.
pub fn moments_at(
    fs: &FunctionSpec,
    side: Side,
    domain: (f64, f64),
    t: f64,
    n: usize,
    max_index: usize,
    cfg: &QuadratureConfig,
) -> Result<MomentVector> {
    let (a, b) = domain;
    let values = (n + 1..=max_index)
        .map(|k| match side {
            Side::Left => moment_left(fs, a, t, n, k, cfg),
            Side::Right => moment_right(fs, t, b, n, k, cfg),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentVector::new(n, values))
}

/// Moments along an ascending grid, accumulated interval by interval from the
/// anchor point (`a` for the left side, `b` for the right side).
pub fn moments_on_grid(
    fs: &FunctionSpec,
    side: Side,
    domain: (f64, f64),
    grid: &[f64],
    n: usize,
    max_index: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<MomentVector>> {
    let (a, b) = domain;
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("moment grid must be strictly increasing".into()));
    }
    if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
        if first < a || last > b {
            return Err(Error::Domain(format!("grid [{first}, {last}] leaves the domain [{a}, {b}]")));
        }
    }
    let qcfg = relative_only(cfg);
    let count = max_index.saturating_sub(n);
    let mut out = vec![MomentVector::zeros(n, max_index); grid.len()];
    let mut acc = vec![0.0; count];
    let segment = |lo: f64, hi: f64, acc: &mut [f64]| -> Result<()> {
        for (i, slot) in acc.iter_mut().enumerate() {
            let k = n + 1 + i;
            let m = (k - n) as f64;
            let power = (k - n - 1) as i32;
            let kernel = |tau: f64| match side {
                Side::Left => (tau / a).ln().max(0.0).powi(power),
                Side::Right => (b / tau).ln().max(0.0).powi(power),
            };
            *slot += m * integrate(|tau| kernel(tau) * fs.value(tau) / tau, lo, hi, &qcfg)?.value;
        }
        Ok(())
    };
    match side {
        Side::Left => {
            let mut prev = a;
            for (i, &t) in grid.iter().enumerate() {
                segment(prev, t, &mut acc)?;
                out[i] = MomentVector::new(n, acc.clone());
                prev = t;
            }
        }
        Side::Right => {
            let mut prev = b;
            for (i, &t) in grid.iter().enumerate().rev() {
                segment(t, prev, &mut acc)?;
                out[i] = MomentVector::new(n, acc.clone());
                prev = t;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::simpson;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn moments_of_one() {
        let one = FunctionSpec::constant(1.0, 1.0, 5.0).unwrap();
        let t = 3.2f64;
        assert_relative_eq!(moment_left(&one, 1.0, t, 1, 2, &cfg()).unwrap(), t.ln(), max_relative = 1e-13);
        assert_relative_eq!(moment_left(&one, 1.0, t, 1, 3, &cfg()).unwrap(), t.ln().powi(2), max_relative = 1e-13);
        assert_relative_eq!(moment_right(&one, t, 5.0, 1, 2, &cfg()).unwrap(), (5.0 / t).ln(), max_relative = 1e-13);
        let zero = FunctionSpec::zero(1.0, 5.0).unwrap();
        assert_eq!(moment_right(&zero, t, 5.0, 1, 4, &cfg()).unwrap(), 0.0);
        assert_eq!(moment_left(&one, 1.0, 1.0, 1, 2, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn moments_of_log_square_match_brute_force() {
        let fs = FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap();
        // V_2(5) = ∫_1^5 (ln τ)²/τ dτ = (ln 5)³/3
        let v = moment_left(&fs, 1.0, 5.0, 1, 2, &cfg()).unwrap();
        let brute = simpson(&|tau: f64| tau.ln().powi(2) / tau, 1.0, 5.0, 20_000);
        assert_relative_eq!(v, brute, max_relative = 1e-12);
        assert_relative_eq!(v, 5f64.ln().powi(3) / 3.0, max_relative = 1e-13);
        let w = moment_right(&fs, 1.0, 5.0, 1, 2, &cfg()).unwrap();
        assert_relative_eq!(w, brute, max_relative = 1e-12);
        let w3 = moment_right(&fs, 2.0, 5.0, 1, 3, &cfg()).unwrap();
        let brute3 = simpson(&|tau: f64| 2.0 * (5.0 / tau).ln() * tau.ln().powi(2) / tau, 2.0, 5.0, 20_000);
        assert_relative_eq!(w3, brute3, max_relative = 1e-12);
    }

    #[test]
    fn grid_sweep_matches_pointwise() {
        let fs = FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap();
        let grid: Vec<f64> = (0..12).map(|i| 1.05 + 0.35 * i as f64).collect();
        for side in [Side::Left, Side::Right] {
            let swept = moments_on_grid(&fs, side, (1.0, 5.0), &grid, 1, 7, &cfg()).unwrap();
            for (mv, &t) in swept.iter().zip(&grid) {
                let direct = moments_at(&fs, side, (1.0, 5.0), t, 1, 7, &cfg()).unwrap();
                assert_eq!(mv.max_index(), 7);
                for k in 2..=7 {
                    let scale = direct.get(k).abs().max(1e-300);
                    assert!((mv.get(k) - direct.get(k)).abs() <= 1e-9 * scale, "{side:?} k {k} t {t}");
                }
            }
        }
    }

    #[test]
    fn small_moments_keep_relative_accuracy() {
        let fs = FunctionSpec::log_power(2.0, 1.0, 5.0).unwrap();
        let t = 1.01f64;
        let l = t.ln();
        // V_k = (k−1) l^{k+1}/(k+1) for x = (ln τ)², n = 1
        for k in 2..=10 {
            let exact = (k - 1) as f64 * l.powi(k as i32 + 1) / (k + 1) as f64;
            assert_relative_eq!(moment_left(&fs, 1.0, t, 1, k, &cfg()).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let fs = FunctionSpec::constant(1.0, 1.0, 5.0).unwrap();
        assert!(moment_left(&fs, 1.0, 2.0, 2, 2, &cfg()).is_err());
        assert!(moment_left(&fs, 2.0, 1.0, 1, 2, &cfg()).is_err());
        assert!(moments_on_grid(&fs, Side::Left, (1.0, 5.0), &[2.0, 1.5], 1, 3, &cfg()).is_err());
        assert!(moments_on_grid(&fs, Side::Left, (1.0, 5.0), &[2.0, 6.0], 1, 3, &cfg()).is_err());
    }
}
