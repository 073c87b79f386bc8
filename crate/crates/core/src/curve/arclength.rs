use std::sync::Arc;

use super::{ClosedCurve, CurveSpec};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::quad::gauss_legendre5;

pub const DEFAULT_TABLE_CELLS: usize = 2048;

/// Unit-speed reparametrization of a regular closed curve.
///
/// The cumulative arclength is tabulated at `cells + 1` uniform parameter
/// nodes (Gauss–Legendre per cell). The inverse map starts from the cubic
/// Hermite interpolant of the table, whose slopes `1/|γ'|` are exact, and
/// is polished by Newton steps on `S(u) = s`.
pub struct ArclengthCurve {
    raw: CurveSpec,
    u_nodes: Vec<f64>,
    s_nodes: Vec<f64>,
    speeds: Vec<f64>,
    length: f64,
}

impl ArclengthCurve {
    pub fn raw(&self) -> &CurveSpec {
        &self.raw
    }

    /// `(parameter, arclength)` table.
    pub fn table(&self) -> (&[f64], &[f64]) {
        (&self.u_nodes, &self.s_nodes)
    }

    /// Raw parameter `u` with `S(u) = s (mod L)`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let period_raw = self.raw.period();
        let wraps = (s / self.length).floor();
        let s = s - wraps * self.length;
        let cells = self.u_nodes.len() - 1;
        let k = self.s_nodes.partition_point(|&x| x <= s).saturating_sub(1).min(cells - 1);
        let (s0, s1) = (self.s_nodes[k], self.s_nodes[k + 1]);
        let (u0, u1) = (self.u_nodes[k], self.u_nodes[k + 1]);
        let ds = s1 - s0;
        let tau = ((s - s0) / ds).clamp(0.0, 1.0);
        let (t2, t3) = (tau * tau, tau * tau * tau);
        let mut u = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + tau) * ds / self.speeds[k]
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * ds / self.speeds[k + 1];
        let tol = 4.0 * f64::EPSILON * self.length.max(1.0);
        for _ in 0..4 {
            let residual = s0 + gauss_legendre5(u0, u, |x| self.raw.speed(x)) - s;
            u -= residual / self.raw.speed(u);
            if residual.abs() <= tol {
                break;
            }
        }
        u + wraps * period_raw
    }
}

impl ClosedCurve for ArclengthCurve {
    fn period(&self) -> f64 {
        self.length
    }

    fn position(&self, s: f64) -> Vec3 {
        self.raw.position(self.parameter_at(s))
    }

    fn derivative(&self, s: f64) -> Vec3 {
        self.raw.tangent(self.parameter_at(s))
    }

    fn second_derivative(&self, s: f64) -> Option<Vec3> {
        if !self.raw.has_exact_second_derivative() {
            return None;
        }
        let u = self.parameter_at(s);
        let d1 = self.raw.derivative(u);
        let v = d1.norm();
        let t = d1 / v;
        let d2 = self.raw.second_derivative(u);
        Some((d2 - t * d2.dot(t)) / (v * v))
    }
}

pub fn arclength_reparametrize(raw: &CurveSpec) -> Result<CurveSpec> {
    arclength_reparametrize_with(raw, DEFAULT_TABLE_CELLS)
}

pub fn arclength_reparametrize_with(raw: &CurveSpec, cells: usize) -> Result<CurveSpec> {
    if cells < 16 {
        return Err(Error::Precondition(format!("arclength table needs >= 16 cells, got {cells}")));
    }
    let period = raw.period();
    let step = period / cells as f64;
    let u_nodes: Vec<f64> = (0..=cells).map(|k| k as f64 * step).collect();
    let speeds: Vec<f64> = u_nodes.iter().map(|&u| raw.speed(u)).collect();
    let pieces = crate::quad::map_rows(cells, |k| {
        let mut min_speed = f64::INFINITY;
        let integral = gauss_legendre5(u_nodes[k], u_nodes[k + 1], |u| {
            let v = raw.speed(u);
            min_speed = min_speed.min(v);
            v
        });
        (integral, min_speed)
    });
    let mean = pieces.iter().map(|p| p.0).sum::<f64>() / period;
    let min_speed = pieces
        .iter()
        .map(|p| p.1)
        .chain(speeds.iter().copied())
        .fold(f64::INFINITY, f64::min);
    if !(min_speed > 1e-8 * mean) || !mean.is_finite() {
        return Err(Error::Numerical(format!(
            "vanishing speed in '{}': min |γ'| = {min_speed:.3e}, mean {mean:.3e}",
            raw.name()
        )));
    }
    let mut s_nodes = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    s_nodes.push(0.0);
    for (piece, _) in &pieces {
        acc += piece;
        s_nodes.push(acc);
    }
    let curve = ArclengthCurve { raw: raw.clone(), u_nodes, s_nodes, speeds, length: acc };
    let name = raw.name().to_string();
    Ok(CurveSpec::from_shared(name, Arc::new(curve), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::preset_curve;
    use std::f64::consts::TAU;

    /// Unit circle traversed with speed `1 + 0.5 cos u`.
    struct WobblyCircle;

    impl ClosedCurve for WobblyCircle {
        fn period(&self) -> f64 {
            TAU
        }
        fn position(&self, u: f64) -> Vec3 {
            let phi = u + 0.5 * u.sin();
            Vec3::new(phi.cos(), phi.sin(), 0.0)
        }
        fn derivative(&self, u: f64) -> Vec3 {
            let phi = u + 0.5 * u.sin();
            Vec3::new(-phi.sin(), phi.cos(), 0.0) * (1.0 + 0.5 * u.cos())
        }
    }

    struct Stalling;

    impl ClosedCurve for Stalling {
        fn period(&self) -> f64 {
            TAU
        }
        fn position(&self, u: f64) -> Vec3 {
            let phi = u - u.sin();
            Vec3::new(phi.cos(), phi.sin(), 0.0)
        }
        fn derivative(&self, u: f64) -> Vec3 {
            let phi = u - u.sin();
            Vec3::new(-phi.sin(), phi.cos(), 0.0) * (1.0 - u.cos())
        }
    }

    #[test]
    fn nonuniform_circle_becomes_unit_speed() {
        let raw = CurveSpec::new("wobbly", WobblyCircle, false);
        let c = arclength_reparametrize(&raw).unwrap();
        assert!((c.period() - TAU).abs() < 1e-12);
        for i in 0..1000 {
            let s = TAU * i as f64 / 1000.0;
            assert!((c.derivative(s).norm() - 1.0).abs() < 1e-8);
            // finite-difference speed, independent of the tangent normalization
            let h = 1e-5;
            let fd = c.position(s + h).distance(c.position(s - h)) / (2.0 * h);
            assert!((fd - 1.0).abs() < 1e-8, "speed {fd} at {s}");
            assert!(c.position(s).distance(Vec3::new(s.cos(), s.sin(), 0.0)) < 1e-10);
        }
    }

    #[test]
    fn reparametrization_is_idempotent() {
        let circle = preset_curve("circle", &[1.0]).unwrap();
        let once = arclength_reparametrize(&circle).unwrap();
        for i in 0..100 {
            let s = 0.0629 * i as f64;
            assert!(once.position(s).distance(circle.position(s)) < 1e-10);
        }
        let ellipse = arclength_reparametrize(&preset_curve("ellipse", &[2.0, 1.0]).unwrap()).unwrap();
        let twice = arclength_reparametrize(&ellipse).unwrap();
        assert!((twice.period() - ellipse.period()).abs() < 1e-9);
        for i in 0..200 {
            let s = ellipse.period() * i as f64 / 200.0;
            assert!(twice.position(s).distance(ellipse.position(s)) < 1e-9);
        }
    }

    #[test]
    fn ellipse_reparametrization_preserves_length() {
        let raw = preset_curve("ellipse", &[2.0, 1.0]).unwrap();
        let c = arclength_reparametrize(&raw).unwrap();
        assert!((c.period() / raw.length() - 1.0).abs() < 1e-8);
        // recompute the length from unit-speed chords
        let n = 20000;
        let h = c.period() / n as f64;
        let chords: f64 = (0..n).map(|i| c.position(i as f64 * h).distance(c.position((i + 1) as f64 * h))).sum();
        assert!((chords / c.period() - 1.0).abs() < 1e-7);
        assert!(c.position(c.period() + 0.3).distance(c.position(0.3)) < 1e-12);
        for i in 0..100 {
            assert!((c.derivative(0.097 * i as f64).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn arclength_second_derivative_matches_curvature() {
        let c = arclength_reparametrize(&preset_curve("ellipse", &[2.0, 1.0]).unwrap()).unwrap();
        // vertex (2,0) has curvature a/b² = 2
        assert!((c.second_derivative(0.0).norm() - 2.0).abs() < 1e-10);
        let h = 1e-4;
        for i in 0..30 {
            let s = 0.3 * i as f64;
            let fd = (c.derivative(s + h) - c.derivative(s - h)) / (2.0 * h);
            assert!(fd.distance(c.second_derivative(s)) < 1e-6);
        }
    }

    #[test]
    fn vanishing_speed_is_rejected() {
        let raw = CurveSpec::new("stalling", Stalling, false);
        assert!(matches!(arclength_reparametrize(&raw), Err(Error::Numerical(_))));
    }
}
