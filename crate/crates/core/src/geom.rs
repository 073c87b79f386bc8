//! Exact 3D primitives: vectors, reflections, circumradius and tangent-point radius.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy conversion; `+∞` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

/// The straight line `base + ℝ·direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    base: Vec3,
    direction: Vec3,
}

impl Line {
    pub fn new(base: Vec3, direction: Vec3) -> Result<Self> {
        if !direction.is_unit(1e-12) {
            return Err(Error::Precondition(format!(
                "line direction must be a unit vector, |d| = {}",
                direction.norm()
            )));
        }
        Ok(Line { base, direction })
    }

    pub fn base(&self) -> Vec3 {
        self.base
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn distance_to(&self, p: Vec3) -> f64 {
        (p - self.base).cross(self.direction).norm()
    }
}

fn require_unit(v: Vec3, what: &str) -> Result<()> {
    if !v.is_unit(UNIT_TOL) {
        return Err(Error::Precondition(format!(
            "{what} must be a unit vector, got norm {}",
            v.norm()
        )));
    }
    Ok(())
}

/// Reflection `(2 e⊗e − Id) v` of `v` at the unit vector `e`.
pub fn reflect_about(e: Vec3, v: Vec3) -> Result<Vec3> {
    require_unit(e, "reflection axis")?;
    Ok(reflect_unchecked(e, v))
}

#[inline]
pub(crate) fn reflect_unchecked(e: Vec3, v: Vec3) -> Vec3 {
    e * (2.0 * e.dot(v)) - v
}

/// Radius of the circle through three points, `+∞` when they are collinear.
pub fn circumradius(x: Vec3, y: Vec3, z: Vec3) -> Result<ExtReal> {
    let a = y.distance(z);
    let b = x.distance(z);
    let c = x.distance(y);
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return Err(Error::Degenerate("circumradius of coincident points".into()));
    }
    let scale = a.max(b).max(c);
    let area2 = (y - x).cross(z - x).norm();
    if area2 <= 1e-12 * scale * scale {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite(a * b * c / (2.0 * area2)))
}

/// Radius of the circle through `p` and `q` that is tangent to `t` at `p`.
pub fn tangent_point_radius(p: Vec3, t: Vec3, q: Vec3) -> Result<ExtReal> {
    require_unit(t, "tangent")?;
    let d = q - p;
    let d2 = d.norm_sq();
    if d2 == 0.0 {
        return Err(Error::Degenerate("tangent-point radius of coincident points".into()));
    }
    let dist = d.cross(t).norm();
    if dist <= 1e-15 * d2.sqrt() {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite(d2 / (2.0 * dist)))
}

/// `1 / r_tp(p, t; q) = 2·dist(p + ℝt, q) / |p − q|²`; zero when `q` lies on the tangent line.
///
/// Unchecked hot-path variant: `t` is assumed unit and `p ≠ q`.
#[inline]
pub fn inverse_tangent_point_radius(p: Vec3, t: Vec3, q: Vec3) -> f64 {
    let d = q - p;
    2.0 * d.cross(t).norm() / d.norm_sq()
}

/// Orthogonal projection `⟨v, t⟩ t` onto the span of the unit vector `t`.
pub fn project_onto_direction(t: Vec3, v: Vec3) -> Result<Vec3> {
    require_unit(t, "projection direction")?;
    Ok(t * v.dot(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn reflection_examples() {
        let ex = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(reflect_about(ex, Vec3::new(0.0, 1.0, 0.0)).unwrap(), Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(reflect_about(ex, ex).unwrap(), ex);
        let r = reflect_about(Vec3::new(0.0, 0.0, 1.0), Vec3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2)).unwrap();
        assert!(close(r, Vec3::new(-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2), 1e-15));
        assert!(reflect_about(Vec3::new(2.0, 0.0, 0.0), ex).is_err());
    }

    #[test]
    fn circumradius_examples() {
        let r = circumradius(Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)).unwrap();
        assert!((r.finite().unwrap() - 1.0).abs() < 1e-14);
        let r = circumradius(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(r, ExtReal::Infinite);
        let a = 3.0;
        let tri = [
            Vec3::ZERO,
            Vec3::new(a, 0.0, 0.0),
            Vec3::new(a / 2.0, a * 3f64.sqrt() / 2.0, 0.0),
        ];
        let r = circumradius(tri[0], tri[1], tri[2]).unwrap().finite().unwrap();
        assert!((r - a / 3f64.sqrt()).abs() < 1e-14);
        assert!(circumradius(tri[0], tri[0], tri[2]).is_err());
    }

    #[test]
    fn tangent_point_radius_examples() {
        let th = PI / 3.0;
        let r = tangent_point_radius(
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(th.cos(), th.sin(), 0.0),
        )
        .unwrap();
        assert!((r.finite().unwrap() - 1.0).abs() < 1e-14);
        let r = tangent_point_radius(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0)).unwrap();
        assert!((r.finite().unwrap() - 1.0).abs() < 1e-15);
        let r = tangent_point_radius(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0)).unwrap();
        assert_eq!(r, ExtReal::Infinite);
        assert!(tangent_point_radius(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO).is_err());
    }

    #[test]
    fn projection_examples() {
        let ex = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(project_onto_direction(ex, Vec3::new(3.0, 4.0, 0.0)).unwrap(), Vec3::new(3.0, 0.0, 0.0));
        assert_eq!(project_onto_direction(ex, ex * 2.5).unwrap(), ex * 2.5);
        let ey = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(project_onto_direction(ey, Vec3::new(1.0, 2.0, 3.0)).unwrap(), Vec3::new(0.0, 2.0, 0.0));
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (0.0..2.0 * PI, -1.0f64..1.0).prop_map(|(phi, z)| {
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    fn vec() -> impl Strategy<Value = Vec3> {
        (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn reflection_is_norm_preserving_involution(e in unit(), v in vec()) {
            let r = reflect_about(e, v).unwrap();
            prop_assert!((r.norm() - v.norm()).abs() <= 1e-10 * (1.0 + v.norm()));
            let back = reflect_about(e, r).unwrap();
            prop_assert!(back.distance(v) <= 1e-10 * (1.0 + v.norm()));
        }

        #[test]
        fn circumradius_is_symmetric(a in vec(), b in vec(), c in vec()) {
            prop_assume!(a.distance(b) > 1e-3 && b.distance(c) > 1e-3 && a.distance(c) > 1e-3);
            let r0 = circumradius(a, b, c).unwrap();
            for r in [circumradius(b, a, c).unwrap(), circumradius(c, b, a).unwrap(), circumradius(b, c, a).unwrap()] {
                match (r0, r) {
                    (ExtReal::Finite(x), ExtReal::Finite(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0)),
                    (ExtReal::Infinite, ExtReal::Infinite) => {}
                    _ => prop_assert!(false, "collinearity verdict differs under permutation"),
                }
            }
        }

        #[test]
        fn tangent_point_radius_recovers_circle(radius in 0.1f64..10.0, a in 0.0..2.0 * PI, b in 0.0..2.0 * PI) {
            let gap = (a - b).rem_euclid(2.0 * PI);
            prop_assume!(gap > 1e-3 && gap < 2.0 * PI - 1e-3);
            let p = Vec3::new(a.cos(), a.sin(), 0.0) * radius;
            let t = Vec3::new(-a.sin(), a.cos(), 0.0);
            let q = Vec3::new(b.cos(), b.sin(), 0.0) * radius;
            let r = tangent_point_radius(p, t, q).unwrap().finite().unwrap();
            prop_assert!((r - radius).abs() <= 1e-9 * radius);
        }

        #[test]
        fn projection_is_idempotent_contraction(t in unit(), v in vec(), s in -10.0f64..10.0) {
            let p = project_onto_direction(t, v).unwrap();
            let pp = project_onto_direction(t, p).unwrap();
            prop_assert!(pp.distance(p) <= 1e-12 * (1.0 + v.norm()));
            prop_assert!(p.distance(v) <= (t * s).distance(v) + 1e-12);
        }
    }
}
