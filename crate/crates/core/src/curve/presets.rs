use std::f64::consts::TAU;

use super::{ClosedCurve, CurveSpec};
use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Circle of the given radius in the xy-plane, already unit speed.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub radius: f64,
}

impl ClosedCurve for Circle {
    fn period(&self) -> f64 {
        TAU * self.radius
    }

    fn position(&self, u: f64) -> Vec3 {
        let a = u / self.radius;
        Vec3::new(a.cos(), a.sin(), 0.0) * self.radius
    }

    fn derivative(&self, u: f64) -> Vec3 {
        let a = u / self.radius;
        Vec3::new(-a.sin(), a.cos(), 0.0)
    }

    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        let a = u / self.radius;
        Some(Vec3::new(-a.cos(), -a.sin(), 0.0) / self.radius)
    }
}

/// `(a cos u, b sin u, 0)`, `u ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl ClosedCurve for Ellipse {
    fn period(&self) -> f64 {
        TAU
    }

    fn position(&self, u: f64) -> Vec3 {
        Vec3::new(self.a * u.cos(), self.b * u.sin(), 0.0)
    }

    fn derivative(&self, u: f64) -> Vec3 {
        Vec3::new(-self.a * u.sin(), self.b * u.cos(), 0.0)
    }

    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        Some(Vec3::new(-self.a * u.cos(), -self.b * u.sin(), 0.0))
    }
}

/// The `(p, q)` torus knot `((R + r cos qu) cos pu, (R + r cos qu) sin pu, r sin qu)`.
#[derive(Debug, Clone, Copy)]
pub struct TorusKnot {
    pub p: f64,
    pub q: f64,
    pub major: f64,
    pub minor: f64,
}

impl ClosedCurve for TorusKnot {
    fn period(&self) -> f64 {
        TAU
    }

    fn position(&self, u: f64) -> Vec3 {
        let (p, q) = (self.p * u, self.q * u);
        let rho = self.major + self.minor * q.cos();
        Vec3::new(rho * p.cos(), rho * p.sin(), self.minor * q.sin())
    }

    fn derivative(&self, u: f64) -> Vec3 {
        let (p, q) = (self.p * u, self.q * u);
        let rho = self.major + self.minor * q.cos();
        let drho = -self.minor * self.q * q.sin();
        Vec3::new(
            drho * p.cos() - rho * self.p * p.sin(),
            drho * p.sin() + rho * self.p * p.cos(),
            self.minor * self.q * q.cos(),
        )
    }

    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        let (p, q) = (self.p * u, self.q * u);
        let rho = self.major + self.minor * q.cos();
        let drho = -self.minor * self.q * q.sin();
        let ddrho = -self.minor * self.q * self.q * q.cos();
        let pp = self.p * self.p;
        Some(Vec3::new(
            ddrho * p.cos() - 2.0 * drho * self.p * p.sin() - rho * pp * p.cos(),
            ddrho * p.sin() + 2.0 * drho * self.p * p.cos() - rho * pp * p.sin(),
            -self.minor * self.q * self.q * q.sin(),
        ))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {v}")))
    }
}

fn arity(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::Precondition(format!(
            "{name} takes {n} parameters, got {}",
            params.len()
        )));
    }
    Ok(())
}

/// Analytic test curve by name.
///
/// * `circle [R]` (default `R = 1`), arclength parametrized
/// * `ellipse [a, b]` (default `2, 1`)
/// * `torus_knot [p, q, R, r]` (default `2, 3, 2, 0.5`), `p, q` coprime, `R > r`
pub fn preset_curve(name: &str, params: &[f64]) -> Result<CurveSpec> {
    match name {
        "circle" => {
            let params = if params.is_empty() { &[1.0][..] } else { params };
            arity(name, params, 1)?;
            let radius = positive("radius", params[0])?;
            Ok(CurveSpec::new(format!("circle({radius})"), Circle { radius }, true))
        }
        "ellipse" => {
            let params = if params.is_empty() { &[2.0, 1.0][..] } else { params };
            arity(name, params, 2)?;
            let a = positive("semi-axis a", params[0])?;
            let b = positive("semi-axis b", params[1])?;
            Ok(CurveSpec::new(format!("ellipse({a},{b})"), Ellipse { a, b }, false))
        }
        "torus_knot" => {
            let params = if params.is_empty() { &[2.0, 3.0, 2.0, 0.5][..] } else { params };
            arity(name, params, 4)?;
            let (p, q) = (positive("p", params[0])?, positive("q", params[1])?);
            if p.fract() != 0.0 || q.fract() != 0.0 {
                return Err(Error::Precondition("torus knot winding numbers must be integers".into()));
            }
            if gcd(p as u64, q as u64) != 1 {
                return Err(Error::Precondition(format!(
                    "torus knot ({p},{q}) is not embedded: winding numbers must be coprime"
                )));
            }
            let major = positive("R", params[2])?;
            let minor = positive("r", params[3])?;
            if minor >= major {
                return Err(Error::Precondition("torus knot needs r < R".into()));
            }
            Ok(CurveSpec::new(
                format!("torus_knot({p},{q},{major},{minor})"),
                TorusKnot { p, q, major, minor },
                false,
            ))
        }
        other => Err(Error::Precondition(format!(
            "unknown curve preset '{other}' (expected circle, ellipse or torus_knot)"
        ))),
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule, independent of the curve's own quadrature.
    fn simpson_length(c: &CurveSpec, n: usize) -> f64 {
        let h = c.period() / n as f64;
        let mut acc = c.speed(0.0) + c.speed(c.period());
        for i in 1..n {
            acc += c.speed(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn circle_preset() {
        let c = preset_curve("circle", &[1.0]).unwrap();
        assert!(c.is_arclength());
        assert!((c.length() - TAU).abs() < 1e-15);
        for i in 0..16 {
            assert!((c.curvature(i as f64 * 0.4) - 1.0).abs() < 1e-12);
        }
        let c3 = preset_curve("circle", &[3.0]).unwrap();
        assert!((c3.length() - 3.0 * TAU).abs() < 1e-14);
    }

    #[test]
    fn ellipse_length_matches_simpson_oracle() {
        let c = preset_curve("ellipse", &[2.0, 1.0]).unwrap();
        let oracle = simpson_length(&c, 1 << 16);
        assert!((c.length() - oracle).abs() < 1e-10, "{} vs {}", c.length(), oracle);
        assert!((c.length() - 9.688_448_220_547_675).abs() < 1e-9);
    }

    #[test]
    fn torus_knot_is_closed_and_embedded() {
        let c = preset_curve("torus_knot", &[2.0, 3.0, 2.0, 0.5]).unwrap();
        assert!(c.position(0.0).distance(c.position(TAU)) < 1e-12);
        // grid search for the minimal distance between points at least 0.2 apart in parameter
        let n = 400;
        let pts: Vec<Vec3> = (0..n).map(|i| c.position(TAU * i as f64 / n as f64)).collect();
        let mut min = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let gap = crate::quad::periodic_distance(i as f64, j as f64, n as f64) * TAU / n as f64;
                if gap > 0.2 {
                    min = min.min(pts[i].distance(pts[j]));
                }
            }
        }
        assert!(min > 0.1, "min distance {min}");
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let c = preset_curve("torus_knot", &[2.0, 3.0, 2.0, 0.5]).unwrap();
        let h = 1e-5;
        for i in 0..20 {
            let u = 0.31 * i as f64;
            let fd1 = (c.position(u + h) - c.position(u - h)) / (2.0 * h);
            let fd2 = (c.derivative(u + h) - c.derivative(u - h)) / (2.0 * h);
            assert!(fd1.distance(c.derivative(u)) < 1e-7);
            assert!(fd2.distance(c.second_derivative(u)) < 1e-6);
        }
    }

    #[test]
    fn preset_errors() {
        assert!(preset_curve("trefoil", &[]).is_err());
        assert!(preset_curve("circle", &[-1.0]).is_err());
        assert!(preset_curve("ellipse", &[2.0, 0.0]).is_err());
        assert!(preset_curve("torus_knot", &[2.0, 4.0, 2.0, 0.5]).is_err());
        assert!(preset_curve("torus_knot", &[2.0, 3.0, 0.5, 2.0]).is_err());
    }
}
