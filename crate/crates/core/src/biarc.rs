//! Point-tangent pairs and balanced biarcs.
//!
//! A biarc is a pair of circular arcs joined with a common tangent at the
//! matching point `m`. For a proper pair `([q0,t0],[q1,t1])` the admissible
//! matching points form the circle through `q0` and `q1` tangent to
//! `t0 + t1*` at `q0` (with `t1* = R(e) t1` the reflection of `t1` at the
//! chord direction `e`). The balanced choice is the point of the oriented
//! subarc from `q0` to `q1` equidistant from both end points, i.e. the
//! midpoint of that subarc. By the tangent-chord angle theorem the chord
//! `q0 → m` bisects the angle between `w = (t0 + t1*)/|t0 + t1*|` and `e`,
//! which gives the closed form
//!
//! ```text
//! m = q0 + |d| (w + e) / |w + e|²,      d = q1 − q0.
//! ```
//!
//! For proper pairs `⟨w, e⟩ > 0`, so `|w + e|² > 2` and the formula covers
//! the straight-segment case (`w = e`, `m` the chord midpoint) without a
//! special branch.

use crate::error::{Error, Result};
use crate::geom::{reflect_unchecked, Vec3};

/// Tolerance on tangent equalities used by [`classify_pair`].
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Largest accepted tangent mismatch at the matching point during construction.
pub const JOIN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTangent {
    pub q: Vec3,
    pub t: Vec3,
}

impl PointTangent {
    /// Checked constructor; `t` must be a unit vector within `1e-9`.
    pub fn new(q: Vec3, t: Vec3) -> Result<Self> {
        if !q.is_finite() || !t.is_finite() {
            return Err(Error::Precondition("non-finite point-tangent datum".into()));
        }
        if !t.is_unit(1e-9) {
            return Err(Error::Precondition(format!(
                "tangent must be a unit vector, got norm {}",
                t.norm()
            )));
        }
        Ok(PointTangent { q, t })
    }

    /// Normalizes `t` first.
    pub fn normalized(q: Vec3, t: Vec3) -> Result<Self> {
        let t = t
            .normalized()
            .ok_or_else(|| Error::Precondition("zero tangent".into()))?;
        PointTangent::new(q, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    Generic,
    CocircularCompatible,
    CocircularIncompatible,
    EqualTangentsTransversal,
    EqualTangentsPerpendicular,
}

/// Chord and reflected tangent of a point-tangent pair.
struct Chord {
    d: Vec3,
    len: f64,
    e: Vec3,
    t1_star: Vec3,
}

fn chord(a: &PointTangent, b: &PointTangent) -> Result<Chord> {
    let d = b.q - a.q;
    let len = d.norm();
    if len == 0.0 {
        return Err(Error::Degenerate("point-tangent pair with coincident points".into()));
    }
    let e = d / len;
    Ok(Chord { d, len, e, t1_star: reflect_unchecked(e, b.t) })
}

pub fn classify_pair(a: &PointTangent, b: &PointTangent) -> Result<PairClass> {
    let c = chord(a, b)?;
    let class = if (a.t - b.t).norm() <= CLASSIFY_TOL {
        if a.t.dot(c.e).abs() <= CLASSIFY_TOL {
            PairClass::EqualTangentsPerpendicular
        } else {
            PairClass::EqualTangentsTransversal
        }
    } else if (a.t - c.t1_star).norm() <= CLASSIFY_TOL {
        PairClass::CocircularCompatible
    } else if (a.t + c.t1_star).norm() <= CLASSIFY_TOL {
        PairClass::CocircularIncompatible
    } else {
        PairClass::Generic
    };
    Ok(class)
}

/// `⟨q1 − q0, t0⟩ > 0` and `⟨q1 − q0, t1⟩ > 0`.
pub fn is_proper(a: &PointTangent, b: &PointTangent) -> bool {
    let d = b.q - a.q;
    d.dot(a.t) > 0.0 && d.dot(b.t) > 0.0
}

pub fn balanced_matching_point(a: &PointTangent, b: &PointTangent) -> Result<Vec3> {
    let c = chord(a, b)?;
    let (da, db) = (c.d.dot(a.t), c.d.dot(b.t));
    if !(da > 0.0 && db > 0.0) {
        return Err(Error::ImproperPair(format!(
            "<q1-q0, t0> = {da:.3e}, <q1-q0, t1> = {db:.3e}"
        )));
    }
    if classify_pair(a, b)? == PairClass::CocircularIncompatible {
        return Err(Error::IncompatibleCocircular);
    }
    let w = (a.t + c.t1_star)
        .normalized()
        .ok_or(Error::IncompatibleCocircular)?;
    let s = w + c.e;
    Ok(a.q + s * (c.len / s.norm_sq()))
}

/// Circular arc (or straight segment) in arclength parametrization.
///
/// The curvature vector `k` is perpendicular to the start tangent and has
/// length `1/radius`; it vanishes for a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub p0: Vec3,
    pub u0: Vec3,
    pub curvature_vector: Vec3,
    pub length: f64,
}

/// `sin(θ)/θ` and `(1 − cos θ)/θ²`, stable near zero.
#[inline]
fn sinc_cosc(theta: f64) -> (f64, f64) {
    if theta.abs() < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        let h = (0.5 * theta).sin();
        (theta.sin() / theta, 2.0 * h * h / (theta * theta))
    }
}

impl Arc {
    /// The unique arc starting at `p0` with tangent `u0` that ends at `p1`.
    pub fn through(p0: Vec3, u0: Vec3, p1: Vec3) -> Result<Arc> {
        let c = p1 - p0;
        let c2 = c.norm_sq();
        if c2 == 0.0 {
            return Err(Error::Degenerate("arc with coincident end points".into()));
        }
        let along = c.dot(u0);
        let perp = c - u0 * along;
        let curvature_vector = perp * (2.0 / c2);
        let phi = perp.norm().atan2(along);
        if phi > std::f64::consts::PI - 1e-9 {
            return Err(Error::Degenerate("arc turning through a full circle".into()));
        }
        let (sinc, _) = sinc_cosc(phi);
        Ok(Arc { p0, u0, curvature_vector, length: c2.sqrt() / sinc })
    }

    pub fn curvature(&self) -> f64 {
        self.curvature_vector.norm()
    }

    /// Position and unit tangent at arclength `s` (no range check).
    #[inline]
    pub fn eval(&self, s: f64) -> (Vec3, Vec3) {
        let kappa = self.curvature_vector.norm();
        let theta = kappa * s;
        let (sinc, cosc) = sinc_cosc(theta);
        let sin_term = s * sinc;
        let pos = self.p0 + self.u0 * sin_term + self.curvature_vector * (s * s * cosc);
        let tan = self.u0 * theta.cos() + self.curvature_vector * sin_term;
        (pos, tan)
    }

    pub fn end(&self) -> (Vec3, Vec3) {
        self.eval(self.length)
    }

    /// Image under `x ↦ center + factor (x − center)`.
    pub fn scaled(&self, factor: f64, center: Vec3) -> Arc {
        Arc {
            p0: center + (self.p0 - center) * factor,
            u0: self.u0,
            curvature_vector: self.curvature_vector / factor,
            length: self.length * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biarc {
    pub first: Arc,
    pub second: Arc,
    pub matching_point: Vec3,
    pub pair: (PointTangent, PointTangent),
    pub total_length: f64,
}

pub fn build_balanced_biarc(a: &PointTangent, b: &PointTangent) -> Result<Biarc> {
    let m = balanced_matching_point(a, b)?;
    let first = Arc::through(a.q, a.t, m)?;
    let (_, tm) = first.end();
    let second = Arc::through(m, tm, b.q)?;
    let (_, t_end) = second.end();
    let mismatch = (t_end - b.t).norm();
    if mismatch > JOIN_TOL {
        return Err(Error::Consistency(format!(
            "biarc end tangent misses t1 by {mismatch:.3e}"
        )));
    }
    Ok(Biarc {
        first,
        second,
        matching_point: m,
        pair: (*a, *b),
        total_length: first.length + second.length,
    })
}

impl Biarc {
    /// Position and unit tangent at arclength `s ∈ [0, total_length]`.
    pub fn eval(&self, s: f64) -> Result<(Vec3, Vec3)> {
        let slack = 1e-12 * self.total_length;
        if !(s >= -slack && s <= self.total_length + slack) {
            return Err(Error::Precondition(format!(
                "arclength {s} outside [0, {}]",
                self.total_length
            )));
        }
        Ok(self.eval_clamped(s))
    }

    #[inline]
    pub(crate) fn eval_clamped(&self, s: f64) -> (Vec3, Vec3) {
        let s = s.clamp(0.0, self.total_length);
        if s <= self.first.length {
            self.first.eval(s)
        } else {
            self.second.eval(s - self.first.length)
        }
    }

    /// Checks interpolation, the C¹ join and balance within `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let (a, b) = self.pair;
        let m = self.matching_point;
        let (p_end1, t_end1) = self.first.end();
        let (p_end2, t_end2) = self.second.end();
        let checks = [
            ("start point", self.first.p0.distance(a.q)),
            ("start tangent", self.first.u0.distance(a.t)),
            ("first arc end", p_end1.distance(m)),
            ("second arc start", self.second.p0.distance(m)),
            ("tangent join", t_end1.distance(self.second.u0)),
            ("end point", p_end2.distance(b.q)),
            ("end tangent", t_end2.distance(b.t)),
            ("balance", (m.distance(a.q) - m.distance(b.q)).abs()),
            (
                "length sum",
                (self.total_length - self.first.length - self.second.length).abs(),
            ),
        ];
        for (what, err) in checks {
            if !(err <= tol) {
                return Err(Error::Consistency(format!("biarc {what} off by {err:.3e}")));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64, center: Vec3) -> Biarc {
        let map = |p: Vec3| center + (p - center) * factor;
        let (a, b) = self.pair;
        Biarc {
            first: self.first.scaled(factor, center),
            second: self.second.scaled(factor, center),
            matching_point: map(self.matching_point),
            pair: (
                PointTangent { q: map(a.q), t: a.t },
                PointTangent { q: map(b.q), t: b.t },
            ),
            total_length: self.total_length * factor,
        }
    }
}

/// Biarc parameter `Λ = ⟨t0, d⟩ |m − q0|² / (⟨t0, m − q0⟩ |d|²)`.
pub fn biarc_parameter(b: &Biarc) -> Result<f64> {
    let (a, z) = b.pair;
    let d = z.q - a.q;
    let dm = b.matching_point - a.q;
    let denom = a.t.dot(dm) * d.norm_sq();
    if !(denom.abs() > 1e-300) {
        return Err(Error::Degenerate("vanishing biarc parameter denominator".into()));
    }
    Ok(a.t.dot(d) * dm.norm_sq() / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::circumradius;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn pt(q: [f64; 3], t: [f64; 3]) -> PointTangent {
        PointTangent::normalized(Vec3::new(q[0], q[1], q[2]), Vec3::new(t[0], t[1], t[2])).unwrap()
    }

    fn quarter() -> (PointTangent, PointTangent) {
        (pt([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), pt([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]))
    }

    fn straight() -> (PointTangent, PointTangent) {
        (pt([0.0; 3], [1.0, 0.0, 0.0]), pt([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]))
    }

    #[test]
    fn classification_examples() {
        let (a, b) = straight();
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::EqualTangentsTransversal);
        let (a, b) = quarter();
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::CocircularCompatible);
        let a = pt([0.0; 3], [1.0, 0.0, 0.0]);
        let b = pt([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::CocircularIncompatible);
        let a = pt([0.0; 3], [0.0, 1.0, 0.0]);
        let b = pt([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::EqualTangentsPerpendicular);
        let a = pt([0.0; 3], [1.0, 0.0, 0.0]);
        let b = pt([1.0, 0.2, 0.1], [1.0, 0.1, -0.2]);
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::Generic);
        assert!(classify_pair(&a, &a).is_err());
    }

    #[test]
    fn matching_point_examples() {
        let (a, b) = straight();
        assert!(balanced_matching_point(&a, &b).unwrap().distance(Vec3::new(0.5, 0.0, 0.0)) < 1e-15);
        let (a, b) = quarter();
        let m = balanced_matching_point(&a, &b).unwrap();
        assert!(m.distance(Vec3::new(SQRT_2 / 2.0, SQRT_2 / 2.0, 0.0)) < 1e-15);
        let bad = pt([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        let (a, _) = straight();
        assert!(matches!(
            balanced_matching_point(&pt([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]), &pt([2.0, 0.0, 0.0], [1.0, 0.0, 0.0])),
            Err(Error::ImproperPair(_))
        ));
        assert!(balanced_matching_point(&a, &bad).is_err());
    }

    #[test]
    fn incompatible_cocircular_is_never_constructed() {
        let a = pt([0.0; 3], [1.0, 0.0, 0.0]);
        let b = pt([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]);
        assert!(build_balanced_biarc(&a, &b).is_err());
        let b = pt([1.0, 0.0, 0.0], [1.0, -1.0, 0.0]);
        let a = pt([0.0; 3], [1.0, 1.0, 0.0]);
        assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::CocircularCompatible);
        assert!(build_balanced_biarc(&a, &b).is_ok());
    }

    #[test]
    fn biarc_examples() {
        let (a, b) = straight();
        let bi = build_balanced_biarc(&a, &b).unwrap();
        assert!((bi.first.length - 0.5).abs() < 1e-15 && (bi.second.length - 0.5).abs() < 1e-15);
        assert!((bi.total_length - 1.0).abs() < 1e-15);
        bi.check_invariants(1e-12).unwrap();

        let (a, b) = quarter();
        let bi = build_balanced_biarc(&a, &b).unwrap();
        assert!((bi.first.length - FRAC_PI_4).abs() < 1e-14);
        assert!((bi.second.length - FRAC_PI_4).abs() < 1e-14);
        assert!((bi.total_length - PI / 2.0).abs() < 1e-14);
        bi.check_invariants(1e-12).unwrap();
        for k in 0..=50 {
            let s = bi.total_length * k as f64 / 50.0;
            let (p, _) = bi.eval(s).unwrap();
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }

        let a = pt([0.0; 3], [1.0, 0.0, 0.0]);
        let b = pt([1.0, 0.2, 0.1], [1.0, 0.05, -0.03]);
        let bi = build_balanced_biarc(&a, &b).unwrap();
        bi.check_invariants(1e-10).unwrap();
    }

    #[test]
    fn eval_examples() {
        let (a, b) = quarter();
        let bi = build_balanced_biarc(&a, &b).unwrap();
        let (p, t) = bi.eval(0.0).unwrap();
        assert!(p.distance(a.q) < 1e-15 && t.distance(a.t) < 1e-15);
        let (p, t) = bi.eval(bi.first.length).unwrap();
        assert!(p.distance(bi.matching_point) < 1e-14);
        assert!(t.distance(bi.second.u0) < 1e-14);
        let (p, _) = bi.eval(FRAC_PI_4).unwrap();
        assert!(p.distance(Vec3::new(SQRT_2 / 2.0, SQRT_2 / 2.0, 0.0)) < 1e-14);
        assert!(bi.eval(-0.1).is_err());
        assert!(bi.eval(bi.total_length + 0.1).is_err());
    }

    #[test]
    fn parameter_examples() {
        let (a, b) = straight();
        let l = biarc_parameter(&build_balanced_biarc(&a, &b).unwrap()).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        let (a, b) = quarter();
        let l = biarc_parameter(&build_balanced_biarc(&a, &b).unwrap()).unwrap();
        assert!((l - (SQRT_2 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn straight_limit_is_continuous() {
        // tilt t1 by a vanishing angle: the matching point converges to the midpoint
        let a = pt([0.0; 3], [1.0, 0.0, 0.0]);
        for k in 1..12 {
            let eps = 10f64.powi(-k);
            let b = pt([1.0, 0.0, 0.0], [1.0, eps, 0.0]);
            let bi = build_balanced_biarc(&a, &b).unwrap();
            bi.check_invariants(1e-12).unwrap();
            assert!(bi.matching_point.distance(Vec3::new(0.5, 0.0, 0.0)) < eps);
        }
    }

    fn unit() -> impl Strategy<Value = Vec3> {
        (0.0..2.0 * PI, -1.0f64..1.0).prop_map(|(phi, z)| {
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    fn proper_pair() -> impl Strategy<Value = (PointTangent, PointTangent)> {
        (
            (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0),
            unit(),
            0.05f64..3.0,
            unit(),
            unit(),
        )
            .prop_filter_map("improper", |((x, y, z), dir, len, t0, t1)| {
                let a = PointTangent { q: Vec3::new(x, y, z), t: t0 };
                let b = PointTangent { q: a.q + dir * len, t: t1 };
                (dir.dot(t0) > 0.05 && dir.dot(t1) > 0.05).then_some((a, b))
            })
    }

    proptest! {
        #[test]
        fn matching_point_lies_on_sigma_plus((a, b) in proper_pair()) {
            let c = chord(&a, &b).unwrap();
            let w = (a.t + c.t1_star).normalized().unwrap();
            let m = balanced_matching_point(&a, &b).unwrap();
            let carrier = Arc::through(a.q, w, b.q).unwrap();
            let (mid, _) = carrier.eval(0.5 * carrier.length);
            prop_assert!(mid.distance(m) <= 1e-9 * (1.0 + c.len));
        }

        #[test]
        fn classification_is_rigid_motion_invariant(
            (a, b) in proper_pair(),
            axis in unit(),
            angle in 0.0..2.0 * PI,
            shift in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
        ) {
            // Rodrigues rotation
            let rot = |v: Vec3| v * angle.cos() + axis.cross(v) * angle.sin() + axis * (axis.dot(v) * (1.0 - angle.cos()));
            let s = Vec3::new(shift.0, shift.1, shift.2);
            let move_pt = |p: PointTangent| PointTangent { q: rot(p.q) + s, t: rot(p.t) };
            let before = classify_pair(&a, &b).unwrap();
            prop_assert_ne!(before, PairClass::CocircularIncompatible);
            let after = classify_pair(&move_pt(a), &move_pt(b)).unwrap();
            prop_assert_eq!(before, after);
            let q = straight();
            prop_assert_eq!(
                classify_pair(&move_pt(q.0), &move_pt(q.1)).unwrap(),
                PairClass::EqualTangentsTransversal
            );
        }

        #[test]
        fn eval_has_unit_speed((a, b) in proper_pair(), frac in 0.0f64..0.999) {
            let bi = build_balanced_biarc(&a, &b).unwrap();
            let ds = 1e-4 * bi.total_length;
            let s = frac * (bi.total_length - ds);
            let (p0, _) = bi.eval(s).unwrap();
            let (p1, _) = bi.eval(s + ds).unwrap();
            prop_assert!((p0.distance(p1) / ds - 1.0).abs() < 1e-6);
        }

        #[test]
        fn cocircular_biarcs_stay_on_the_circle(radius in 0.2f64..5.0, a0 in 0.0..2.0 * PI, span in 0.05f64..2.5) {
            let on = |ang: f64| PointTangent {
                q: Vec3::new(ang.cos(), ang.sin(), 0.0) * radius,
                t: Vec3::new(-ang.sin(), ang.cos(), 0.0),
            };
            let (a, b) = (on(a0), on(a0 + span));
            prop_assert_eq!(classify_pair(&a, &b).unwrap(), PairClass::CocircularCompatible);
            let bi = build_balanced_biarc(&a, &b).unwrap();
            let center = Vec3::ZERO;
            let _ = circumradius(a.q, b.q, bi.matching_point).unwrap();
            for k in 0..=20 {
                let (p, _) = bi.eval(bi.total_length * k as f64 / 20.0).unwrap();
                prop_assert!((p.distance(center) - radius).abs() <= 1e-9 * radius.max(1.0));
            }
        }
    }
}
