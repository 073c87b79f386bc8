//! Closed parametric space curves and the operations on them: presets,
//! arclength reparametrization, partitions, mollification, the Gagliardo
//! seminorm and bilipschitz/modulus diagnostics.

mod arclength;
mod diagnostics;
mod mollify;
mod partition;
mod presets;
mod seminorm;

use std::fmt;
use std::sync::{Arc, OnceLock};

pub use arclength::{arclength_reparametrize, arclength_reparametrize_with, ArclengthCurve, DEFAULT_TABLE_CELLS};
pub use diagnostics::{curve_diagnostics, CurveDiagnostics, ModulusTable};
pub use mollify::{mollify, MollifiedCurve, Mollifier, ScaledCurve};
pub use partition::{make_partition, Partition, PartitionMode};
pub use presets::{preset_curve, Circle, Ellipse, TorusKnot};
pub use seminorm::gagliardo_seminorm;

use crate::geom::Vec3;
use crate::quad::pairwise_sum;

/// Grid used for speed quadrature of non-arclength curves.
const LENGTH_GRID: usize = 4096;

/// A closed curve `ℝ/Pℤ → ℝ³` with at least one continuous derivative.
pub trait ClosedCurve: Send + Sync {
    fn period(&self) -> f64;
    fn position(&self, u: f64) -> Vec3;
    fn derivative(&self, u: f64) -> Vec3;
    fn second_derivative(&self, _u: f64) -> Option<Vec3> {
        None
    }
}

/// Shared handle to a closed curve plus its parametrization flag.
#[derive(Clone)]
pub struct CurveSpec {
    name: String,
    curve: Arc<dyn ClosedCurve>,
    is_arclength: bool,
    length: Arc<OnceLock<f64>>,
}

impl fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveSpec")
            .field("name", &self.name)
            .field("period", &self.period())
            .field("is_arclength", &self.is_arclength)
            .finish()
    }
}

impl CurveSpec {
    pub fn new(name: impl Into<String>, curve: impl ClosedCurve + 'static, is_arclength: bool) -> Self {
        Self::from_shared(name, Arc::new(curve), is_arclength)
    }

    pub fn from_shared(name: impl Into<String>, curve: Arc<dyn ClosedCurve>, is_arclength: bool) -> Self {
        let length = Arc::new(OnceLock::new());
        if is_arclength {
            let _ = length.set(curve.period());
        }
        CurveSpec { name: name.into(), curve, is_arclength, length }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_arclength(&self) -> bool {
        self.is_arclength
    }

    pub fn period(&self) -> f64 {
        self.curve.period()
    }

    #[inline]
    pub fn position(&self, u: f64) -> Vec3 {
        self.curve.position(u)
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> Vec3 {
        self.curve.derivative(u)
    }

    /// Exact second derivative when the curve provides one, otherwise a
    /// central difference of the first derivative with step `1e-4·period`.
    pub fn second_derivative(&self, u: f64) -> Vec3 {
        match self.curve.second_derivative(u) {
            Some(v) => v,
            None => {
                let h = 1e-4 * self.period();
                (self.derivative(u + h) - self.derivative(u - h)) / (2.0 * h)
            }
        }
    }

    pub fn has_exact_second_derivative(&self) -> bool {
        self.curve.second_derivative(0.0).is_some()
    }

    #[inline]
    pub fn speed(&self, u: f64) -> f64 {
        self.derivative(u).norm()
    }

    /// Unit tangent `γ'/|γ'|`.
    #[inline]
    pub fn tangent(&self, u: f64) -> Vec3 {
        let d = self.derivative(u);
        d / d.norm()
    }

    /// Geometric curvature `|γ' × γ''| / |γ'|³`.
    pub fn curvature(&self, u: f64) -> f64 {
        let d1 = self.derivative(u);
        let d2 = self.second_derivative(u);
        d1.cross(d2).norm() / d1.norm().powi(3)
    }

    /// Length; the period for arclength curves, periodic trapezoidal
    /// quadrature of the speed otherwise.
    pub fn length(&self) -> f64 {
        *self.length.get_or_init(|| {
            let p = self.period();
            let h = p / LENGTH_GRID as f64;
            let speeds: Vec<f64> = (0..LENGTH_GRID).map(|i| self.speed(i as f64 * h)).collect();
            pairwise_sum(&speeds) * h
        })
    }

    pub fn shared(&self) -> Arc<dyn ClosedCurve> {
        Arc::clone(&self.curve)
    }
}

/// Positions, unit tangents, speeds and curvatures on the uniform grid `u_i = i·P/grid`.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    pub step: f64,
    pub positions: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
    pub speeds: Vec<f64>,
    pub curvatures: Vec<f64>,
}

impl CurveSamples {
    pub fn new(curve: &CurveSpec, grid: usize) -> Self {
        let step = curve.period() / grid as f64;
        let rows = crate::quad::map_rows(grid, |i| {
            let u = i as f64 * step;
            let d = curve.derivative(u);
            let speed = d.norm();
            (curve.position(u), d / speed, speed, curve.curvature(u))
        });
        let mut s = CurveSamples {
            step,
            positions: Vec::with_capacity(grid),
            tangents: Vec::with_capacity(grid),
            speeds: Vec::with_capacity(grid),
            curvatures: Vec::with_capacity(grid),
        };
        for (p, t, v, k) in rows {
            s.positions.push(p);
            s.tangents.push(t);
            s.speeds.push(v);
            s.curvatures.push(k);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}
