use super::TrajectorySolution;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureConfig};

/// `(∫_a^b (f − g)² dt)^{1/2}`.
pub fn l2_error<F, G>(f: F, g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(a < b) {
        return Err(Error::Domain(format!("L2 distance needs a < b, got [{a}, {b}]")));
    }
    Ok(integrate(|t| (f(t) - g(t)).powi(2), a, b, cfg)?.value.max(0.0).sqrt())
}

/// L2 distance between the interpolated trajectory and `reference` over the
/// trajectory's interval, integrated grid cell by grid cell.
pub fn trajectory_l2_error<G>(sol: &TrajectorySolution, reference: G, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let h = sol.interpolant()?;
    let mut total = 0.0;
    for w in sol.grid.windows(2) {
        total += integrate(|t| (h.value(t) - reference(t)).powi(2), w[0], w[1], cfg)?.value;
    }
    Ok(total.max(0.0).sqrt())
}
