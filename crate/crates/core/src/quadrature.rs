//! Adaptive Gauss–Kronrod integration and the weakly singular Hadamard
//! kernels `(ln(t/τ))^μ [ln ln(t/τ)] f(τ)/τ`.
//!
//! The Hadamard kernels are mapped onto `u ∈ (0, 1]` with `ln(t/τ) = u·ln(t/a)`,
//! which leaves an endpoint factor `u^μ` (optionally times `ln u`). That end is
//! covered by dyadic panels `[2^-j, 2^-j+1]` down to a depth where the
//! analytic contribution of the remaining sliver, with `f` frozen at `τ = t`,
//! is accurate to within tolerance.

use crate::error::{Error, Result};

/// Tolerances and panel settings for every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections (and maximum dyadic grading depth).
    pub max_subdivisions: usize,
    /// Kronrod nodes per panel: 15 or 21.
    pub base_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 200,
            base_order: 15,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureConfig {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidConfig("max_subdivisions must be at least 1".into()));
        }
        if self.base_order != 15 && self.base_order != 21 {
            return Err(Error::InvalidConfig(format!(
                "base_order must be 15 or 21, got {}",
                self.base_order
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// A quadrature value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn scaled(self, c: f64) -> Self {
        Estimate {
            value: c * self.value,
            error: c.abs() * self.error,
        }
    }

    pub fn plus(self, other: Estimate) -> Self {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
        }
    }
}

struct Rule {
    xgk: &'static [f64],
    wgk: &'static [f64],
    wg: &'static [f64],
}

const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_119_480_353_579_537_798_210,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_682_323_220_290,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn rule_for(order: usize) -> Rule {
    match order {
        21 => Rule {
            xgk: &XGK21,
            wgk: &WGK21,
            wg: &WG10,
        },
        _ => Rule {
            xgk: &XGK15,
            wgk: &WGK15,
            wg: &WG7,
        },
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One Gauss–Kronrod panel: `(value, error estimate, ∫|f|)`.
fn gk_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rule: &Rule) -> (f64, f64, f64) {
    let n = rule.xgk.len();
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let pairs = (n - 1) / 2;
    let mut res_g = if rule.wg.len() > pairs { fc * rule.wg[pairs] } else { 0.0 };
    let mut res_k = fc * rule.wgk[n - 1];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 11];
    let mut fv2 = [0.0; 11];
    for j in 0..n - 1 {
        let x = half * rule.xgk[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_g += rule.wg[j / 2] * (f1 + f2);
        }
        res_k += rule.wgk[j] * (f1 + f2);
        res_abs += rule.wgk[j] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = rule.wgk[n - 1] * (fc - mean).abs();
    for j in 0..n - 1 {
        res_asc += rule.wgk[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let err = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    (res_k * half, err, res_abs * abs_half)
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

/// Globally adaptive bisection starting from `initial` panels. `fixed` is a
/// contribution computed elsewhere (value and error) that counts toward the
/// total.
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    initial: &[(f64, f64)],
    fixed: Estimate,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let rule = rule_for(cfg.base_order);
    let mut panels: Vec<Panel> = initial
        .iter()
        .map(|&(lo, hi)| {
            let (value, error, magnitude) = gk_panel(f, lo, hi, &rule);
            Panel { lo, hi, value, error, magnitude }
        })
        .collect();
    let totals = |panels: &[Panel]| {
        panels.iter().fold(fixed, |acc, p| acc.plus(Estimate::new(p.value, p.error)))
    };
    let mut total = totals(&panels);
    if !total.value.is_finite() || !total.error.is_finite() {
        return Err(Error::Domain("integrand is not finite on the interval".into()));
    }
    // cancellation between panels can leave a sum that no refinement resolves
    let roundoff = |panels: &[Panel]| {
        100.0 * f64::EPSILON * (fixed.value.abs() + panels.iter().map(|p| p.magnitude).sum::<f64>())
    };
    let mut splits = 0;
    while total.error > cfg.target(total.value).max(roundoff(&panels)) {
        if splits >= cfg.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                estimate: total.value,
                error: total.error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let mid = 0.5 * (p.lo + p.hi);
                p.hi - p.lo > 8.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
            })
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(Error::ToleranceNotMet {
                estimate: total.value,
                error: total.error,
            });
        };
        let p = panels.swap_remove(i);
        let mid = 0.5 * (p.lo + p.hi);
        for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
            let (value, error, magnitude) = gk_panel(f, lo, hi, &rule);
            panels.push(Panel { lo, hi, value, error, magnitude });
        }
        splits += 1;
        // recompute from scratch to avoid drift in the running sums
        total = totals(&panels);
        if !total.value.is_finite() {
            return Err(Error::Domain("integrand is not finite on the interval".into()));
        }
    }
    Ok(total)
}

/// Adaptive integral of a smooth integrand over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(lo <= hi) {
        return Err(Error::Domain(format!("integration bounds out of order: [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(Estimate::ZERO);
    }
    adaptive(&f, &[(lo, hi)], Estimate::ZERO, cfg)
}

/// `∫_0^1 u^μ [shift + ln u] g(u) du` with the bracket present when
/// `log_shift` is `Some(shift)`.
fn kernel_integral<G: Fn(f64) -> f64>(
    g: &G,
    mu: f64,
    log_shift: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    if !(mu > -1.0) {
        return Err(Error::DivergentIntegral { mu });
    }
    cfg.validate()?;
    if mu >= 0.0 && log_shift.is_none() {
        return adaptive(&|u: f64| u.powf(mu) * g(u), &[(0.0, 1.0)], Estimate::ZERO, cfg);
    }

    let m = mu + 1.0;
    let shift = log_shift.unwrap_or(0.0);
    let weight = |u: f64| match log_shift {
        Some(c) => u.powf(mu) * (c + u.ln()),
        None => u.powf(mu),
    };
    // exact ∫_0^h weight, and a bound on ∫_0^h |weight|
    let weight_integral = |h: f64| {
        let p = h.powf(m) / m;
        match log_shift {
            Some(c) => p * (c + h.ln() - 1.0 / m),
            None => p,
        }
    };
    let weight_abs_bound = |h: f64| {
        let p = h.powf(m) / m;
        match log_shift {
            Some(c) => p * (c.abs() + h.ln().abs() + 1.0 / m),
            None => p,
        }
    };

    let g0 = g(0.0);
    if !g0.is_finite() {
        return Err(Error::Domain("integrand is not finite at the singular endpoint".into()));
    }
    let g_scale = [0.0, 0.25, 0.5, 0.75]
        .iter()
        .map(|&u| g(u).abs())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let tail_target = 1e-3 * cfg.abs_tol.max(cfg.rel_tol * g_scale * weight_abs_bound(1.0));

    let max_depth = cfg.max_subdivisions.clamp(8, 1000);
    let mut depth = 1;
    let mut tail_err;
    loop {
        let h = 0.5f64.powi(depth as i32);
        let dg = (g(h) - g0).abs().max((g(0.5 * h) - g0).abs());
        tail_err = dg * weight_abs_bound(h);
        if (depth >= 8 && tail_err <= tail_target) || depth >= max_depth {
            break;
        }
        depth += 1;
    }
    let h = 0.5f64.powi(depth as i32);
    let tail = Estimate::new(g0 * weight_integral(h), tail_err);

    let panels: Vec<(f64, f64)> = (1..=depth)
        .rev()
        .map(|j| {
            let lo = 0.5f64.powi(j as i32);
            (lo, 2.0 * lo)
        })
        .collect();
    let _ = shift;
    adaptive(&|u: f64| weight(u) * g(u), &panels, tail, cfg)
}

fn check_hadamard_args(lo: f64, hi: f64, mu: f64) -> Result<()> {
    if !(lo > 0.0) {
        return Err(Error::Domain(format!("Hadamard kernels need a positive lower limit, got {lo}")));
    }
    if !(hi >= lo) {
        return Err(Error::Domain(format!("integration bounds out of order: [{lo}, {hi}]")));
    }
    if !(mu > -1.0) {
        return Err(Error::DivergentIntegral { mu });
    }
    Ok(())
}

/// `∫_a^t (ln(t/τ))^μ [ln ln(t/τ)] f(τ)/τ dτ`, the log factor present when
/// `log_factor` is set.
pub fn hadamard_weighted_integral<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    t: f64,
    mu: f64,
    log_factor: bool,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    check_hadamard_args(a, t, mu)?;
    if t == a {
        return Ok(Estimate::ZERO);
    }
    let span = (t / a).ln();
    let shift = log_factor.then(|| span.ln());
    let g = |u: f64| f(t * (-u * span).exp());
    Ok(kernel_integral(&g, mu, shift, cfg)?.scaled(span.powf(mu + 1.0)))
}

/// `∫_t^b (ln(τ/t))^μ [ln ln(τ/t)] f(τ)/τ dτ`.
pub fn hadamard_weighted_integral_right<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    b: f64,
    mu: f64,
    log_factor: bool,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    check_hadamard_args(t, b, mu)?;
    if t == b {
        return Ok(Estimate::ZERO);
    }
    let span = (b / t).ln();
    let shift = log_factor.then(|| span.ln());
    let g = |u: f64| f(t * (u * span).exp());
    Ok(kernel_integral(&g, mu, shift, cfg)?.scaled(span.powf(mu + 1.0)))
}
