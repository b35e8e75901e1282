//! Independent reference computations used only by unit tests.

/// `span^{μ+1} ∫_0^1 s^μ [ln span + ln s] g(s) ds` by the substitution
/// `s = v^q`, `q = 3/(μ+1)`, which turns the endpoint factor into `v²`, then
/// composite Simpson on a fine uniform grid.
pub fn brute_force_kernel(g: &dyn Fn(f64) -> f64, span: f64, mu: f64, log_factor: bool) -> f64 {
    let q = 3.0 / (mu + 1.0);
    let c = span.ln();
    let integrand = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        let w = if log_factor { c + q * v.ln() } else { 1.0 };
        q * v * v * w * g(v.powf(q))
    };
    let n = 400_000;
    let h = 1.0 / n as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..n {
        let v = i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(v);
    }
    span.powf(mu + 1.0) * sum * h / 3.0
}

/// Composite Simpson on `[lo, hi]` with `n` (even) intervals.
pub fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}
