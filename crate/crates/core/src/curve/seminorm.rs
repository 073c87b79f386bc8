use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::quad::{map_rows, pairwise_sum};

/// The double integral
/// `[f]_{s,ρ} = ∫∫ |f(x) − f(y)|^ρ / |x − y|^{1+sρ}` over the torus `(ℝ/Lℤ)²`
/// (no outer root), by a midpoint-type sum on `grid²` points.
///
/// The diagonal cells are replaced by the integral of the linearization
/// `|g·y|^ρ / |y|^{1+sρ}` over `|y| < h/2`, with `g` the central difference
/// quotient of `f` at the grid point.
pub fn gagliardo_seminorm<F>(f: F, period: f64, s: f64, rho: f64, grid: usize) -> Result<f64>
where
    F: Fn(f64) -> Vec3 + Sync,
{
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Precondition(format!("seminorm order s must lie in (0,1), got {s}")));
    }
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(Error::Precondition(format!("seminorm exponent must be >= 1, got {rho}")));
    }
    if grid < 64 {
        return Err(Error::Precondition(format!("seminorm grid must be at least 64, got {grid}")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::Precondition(format!("period must be positive, got {period}")));
    }
    let h = period / grid as f64;
    let values = map_rows(grid, |i| f(i as f64 * h));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("seminorm integrand has non-finite samples".into()));
    }
    let power = 1.0 + s * rho;
    // |i − j| ↦ |x − y|^{-(1+sρ)}
    let kernel: Vec<f64> = (0..grid)
        .map(|k| {
            let d = k.min(grid - k) as f64 * h;
            if k == 0 {
                0.0
            } else {
                d.powf(-power)
            }
        })
        .collect();
    let a = rho * (1.0 - s) - 1.0;
    let band = 2.0 * (0.5 * h).powf(a + 1.0) / (a + 1.0);

    let rows = map_rows(grid, |i| {
        let fi = values[i];
        let mut terms = Vec::with_capacity(grid);
        for (j, fj) in values.iter().enumerate() {
            if j != i {
                let k = j.abs_diff(i);
                terms.push((fi - *fj).norm().powf(rho) * kernel[k]);
            }
        }
        let g = (values[(i + 1) % grid] - values[(i + grid - 1) % grid]).norm() / (2.0 * h);
        terms.push(g.powf(rho) * band / h);
        pairwise_sum(&terms)
    });
    Ok(pairwise_sum(&rows) * h * h)
}
