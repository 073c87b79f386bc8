use std::sync::Arc;

use super::{arclength_reparametrize, ClosedCurve, CurveSpec};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::quad::gauss_legendre5;

pub const DEFAULT_MOLLIFIER_NODES: usize = 192;

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Non-negative even kernel on `[−1, 1]` with unit integral, stored as a
/// quadrature rule `Σ w_k g(y_k) ≈ ∫ η(y) g(y) dy`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    offsets: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl Mollifier {
    /// `η(x) = exp(−1/(1−x²))/Z` sampled with the trapezoidal rule on `nodes` cells.
    pub fn standard_bump(nodes: usize) -> Result<Self> {
        if nodes < 8 {
            return Err(Error::Precondition(format!("mollifier needs at least 8 nodes, got {nodes}")));
        }
        let h = 2.0 / nodes as f64;
        let offsets: Vec<f64> = (1..nodes).map(|k| -1.0 + k as f64 * h).collect();
        let raw: Vec<f64> = offsets.iter().map(|&y| bump(y) * h).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(Mollifier { offsets, weights, scale: total })
    }

    /// Normalized profile value.
    pub fn profile(&self, x: f64) -> f64 {
        bump(x) / self.scale
    }

    /// `∫_{−1}^{1} η` by composite Gauss–Legendre, independent of the stored rule.
    pub fn integral(&self) -> f64 {
        let cells = 512;
        let h = 2.0 / cells as f64;
        (0..cells)
            .map(|i| {
                let a = -1.0 + i as f64 * h;
                gauss_legendre5(a, a + h, |x| self.profile(x))
            })
            .sum()
    }

    pub fn rule(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.offsets.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Mollifier::standard_bump(DEFAULT_MOLLIFIER_NODES).expect("default node count is valid")
    }
}

/// `γ_ε = γ ∗ η_ε` on the same parameter domain.
pub struct MollifiedCurve {
    base: CurveSpec,
    eps: f64,
    mollifier: Mollifier,
}

impl MollifiedCurve {
    fn average(&self, u: f64, f: impl Fn(f64) -> Vec3) -> Vec3 {
        let mut acc = Vec3::ZERO;
        for (y, w) in self.mollifier.rule() {
            acc += f(u - self.eps * y) * w;
        }
        acc
    }
}

impl ClosedCurve for MollifiedCurve {
    fn period(&self) -> f64 {
        self.base.period()
    }

    fn position(&self, u: f64) -> Vec3 {
        self.average(u, |x| self.base.position(x))
    }

    fn derivative(&self, u: f64) -> Vec3 {
        self.average(u, |x| self.base.derivative(x))
    }

    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        if self.base.has_exact_second_derivative() {
            Some(self.average(u, |x| self.base.second_derivative(x)))
        } else {
            None
        }
    }
}

/// `λ·γ(·/λ)`: dilation about the origin that keeps unit speed.
pub struct ScaledCurve {
    base: Arc<dyn ClosedCurve>,
    factor: f64,
}

impl ScaledCurve {
    pub fn new(base: Arc<dyn ClosedCurve>, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Precondition(format!("scale factor must be positive, got {factor}")));
        }
        Ok(ScaledCurve { base, factor })
    }
}

impl ClosedCurve for ScaledCurve {
    fn period(&self) -> f64 {
        self.factor * self.base.period()
    }

    fn position(&self, u: f64) -> Vec3 {
        self.base.position(u / self.factor) * self.factor
    }

    fn derivative(&self, u: f64) -> Vec3 {
        self.base.derivative(u / self.factor)
    }

    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        self.base.second_derivative(u / self.factor).map(|v| v / self.factor)
    }
}

/// Arclength parametrization of `(𝓛(γ)/𝓛(γ_ε))·γ_ε`.
pub fn mollify(curve: &CurveSpec, eps: f64, mollifier: &Mollifier) -> Result<CurveSpec> {
    if !curve.is_arclength() {
        return Err(Error::Precondition("mollify needs an arclength-parametrized curve".into()));
    }
    let length = curve.period();
    if !(eps > 0.0 && eps < 0.25 * length) {
        return Err(Error::Precondition(format!(
            "mollifier width must lie in (0, L/4) = (0, {}), got {eps}",
            0.25 * length
        )));
    }
    let smoothed = CurveSpec::new(
        format!("{}*eta", curve.name()),
        MollifiedCurve { base: curve.clone(), eps, mollifier: mollifier.clone() },
        false,
    );
    let unit = arclength_reparametrize(&smoothed)?;
    let factor = length / unit.period();
    let scaled = ScaledCurve::new(unit.shared(), factor)?;
    Ok(CurveSpec::new(format!("mollify({}, {eps})", curve.name()), scaled, true))
}
