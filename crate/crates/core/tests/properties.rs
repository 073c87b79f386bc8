use std::f64::consts::TAU;

use proptest::prelude::*;

use biarcknot::biarc::is_proper;
use biarcknot::curve::{arclength_reparametrize, make_partition, preset_curve, ClosedCurve, CurveSpec, PartitionMode};
use biarcknot::energy::{continuous_tp_energy, discrete_tp_energy, thickness_and_ropelength};
use biarcknot::geom::Vec3;
use biarcknot::interpolate::{build_biarc_curve, BiarcCurve};

fn torus_knot() -> CurveSpec {
    arclength_reparametrize(&preset_curve("torus_knot", &[2.0, 3.0, 2.0, 0.5]).unwrap()).unwrap()
}

/// `γ(u + shift)`.
struct Shifted {
    base: CurveSpec,
    shift: f64,
}

impl ClosedCurve for Shifted {
    fn period(&self) -> f64 {
        self.base.period()
    }
    fn position(&self, u: f64) -> Vec3 {
        self.base.position(u + self.shift)
    }
    fn derivative(&self, u: f64) -> Vec3 {
        self.base.derivative(u + self.shift)
    }
    fn second_derivative(&self, u: f64) -> Option<Vec3> {
        Some(self.base.second_derivative(u + self.shift))
    }
}

#[test]
fn torus_knot_thickness_is_grid_stable() {
    let k = torus_knot();
    let (d64, r64) = thickness_and_ropelength(&k, 64).unwrap();
    let (d128, _) = thickness_and_ropelength(&k, 128).unwrap();
    assert!(d64 > 0.0);
    assert!((d64 - d128).abs() <= 0.005 * d128, "{d64} vs {d128}");
    assert!((r64 - k.period() / d64).abs() < 1e-12 * r64);
}

#[test]
fn continuous_energy_is_shift_invariant() {
    let raw = preset_curve("ellipse", &[2.0, 1.0]).unwrap();
    let a = continuous_tp_energy(&raw, 3.0, 256).unwrap();
    let shifted = CurveSpec::new("shifted", Shifted { base: raw.clone(), shift: 0.377 }, false);
    let b = continuous_tp_energy(&shifted, 3.0, 256).unwrap();
    assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
}

#[test]
fn continuous_energy_of_torus_knot_is_grid_stable() {
    let k = torus_knot();
    let a = continuous_tp_energy(&k, 3.0, 256).unwrap();
    let b = continuous_tp_energy(&k, 3.0, 512).unwrap();
    assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
}

#[test]
fn circle_interpolant_is_in_bn_for_every_n() {
    let c = preset_curve("circle", &[1.0]).unwrap();
    for n in [8usize, 9, 17, 100, 333] {
        let p = make_partition(TAU, n, PartitionMode::Uniform, 0).unwrap();
        let b = build_biarc_curve(&c, &p).unwrap();
        assert!(b.check_bn(TAU, n).unwrap());
        for l in b.lengths() {
            assert!((l - TAU / n as f64).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jittered_interpolants_are_valid(n in 24usize..120, rho in 0.0f64..0.39, seed in any::<u64>(), which in 0usize..2) {
        let curve = if which == 0 {
            arclength_reparametrize(&preset_curve("ellipse", &[2.0, 1.0]).unwrap()).unwrap()
        } else {
            torus_knot()
        };
        let p = make_partition(curve.period(), n, PartitionMode::Jitter(rho), seed).unwrap();
        let b = build_biarc_curve(&curve, &p).unwrap();
        b.validate(1e-9).unwrap();
        let j = b.junctions();
        for i in 0..n {
            prop_assert!(is_proper(&j[i], &j[(i + 1) % n]));
            let (q, t) = b.eval(b.offsets()[i]);
            prop_assert!(q.distance(curve.position(p.nodes()[i])) < 1e-10);
            prop_assert!(t.distance(curve.derivative(p.nodes()[i])) < 1e-10);
        }
        let sum: f64 = b.lengths().iter().sum();
        prop_assert!((sum - b.total_length()).abs() < 1e-12 * sum);
        let text = b.to_junction_text();
        let back = BiarcCurve::from_junction_text(&text).unwrap();
        prop_assert_eq!(back.to_junction_text(), text);
    }

    #[test]
    fn ungated_energy_scales(d in 0.1f64..10.0, q in 2.0f64..9.0, seed in any::<u64>()) {
        let c = preset_curve("circle", &[1.0]).unwrap();
        let p = make_partition(TAU, 20, PartitionMode::Jitter(0.3), seed).unwrap();
        let b = build_biarc_curve(&c, &p).unwrap();
        let e = discrete_tp_energy(&b, q, false, TAU).unwrap().to_f64();
        let s = discrete_tp_energy(&b.scaled(d, Vec3::new(1.0, 2.0, 3.0)).unwrap(), q, false, TAU).unwrap().to_f64();
        prop_assert!((s - d.powf(2.0 - q) * e).abs() <= 1e-9 * s);
    }
}
