mod support;

use num_complex::Complex64 as C;
use triwave_core::ensemble::*;
use triwave_core::error::Error;
use triwave_core::levels::{Detunings, RelaxationSpec};
use triwave_core::liouville::{steady_state, Drives, PacketParams};
use triwave_core::num::rel_diff;

fn relax() -> RelaxationSpec<f64> {
    RelaxationSpec::new([1.0, 1.2, 0.9], 0.3, 0.2, 0.05, 5.0).unwrap()
}

fn weak(e1: f64) -> PacketParams<f64> {
    PacketParams::new(Detunings::zero(), relax(), Drives::optical(C::new(e1, 0.0), C::new(0.0, 0.0))).unwrap()
}

fn generic() -> PacketParams<f64> {
    let det = Detunings { d21: 0.4, d31: 0.1, d32: -0.3 };
    PacketParams::new(det, relax(), Drives::optical(C::new(0.6, 0.2), C::new(-0.3, 0.5))).unwrap()
}

#[test]
fn weights() {
    let g = distribution_weight(0.0, LineShape::Gaussian).unwrap();
    assert!((g - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-16);
    for x in [0.3, 1.7, 4.0] {
        for k in [LineShape::Gaussian, LineShape::Lorentzian] {
            assert_eq!(distribution_weight(x, k).unwrap(), distribution_weight(-x, k).unwrap());
        }
    }
    assert!(matches!(distribution_weight(0.0, LineShape::Homogeneous), Err(Error::Contract(_))));
}

#[test]
fn quadrature_mass() {
    let p = weak(1e-3);
    let one = |_: &PacketParams<f64>, _: &_| C::new(1.0, 0.0);
    let g = BroadeningSpec::new(LineShape::Gaussian, [0.5, 0.5, 0.5]).unwrap().with_rule(QuadratureRule::Standard);
    assert!((average_quantity(&p, &g, one).unwrap().re - 1.0).abs() < 1e-8);
    let tail = 1.0 - 2.0 / std::f64::consts::PI * (1.0f64 / 5.0).atan();
    assert!((tail - 0.8743).abs() < 1e-4);
    let l = BroadeningSpec::new(LineShape::Lorentzian, [30.0, 30.0, 30.0]).unwrap().with_rule(QuadratureRule::Adaptive);
    assert!((average_quantity(&p, &l, one).unwrap().re - tail).abs() < 1e-9);
    let l = l.with_rule(QuadratureRule::Standard);
    assert!((average_quantity(&p, &l, one).unwrap().re - tail).abs() < 1e-4);
}

#[test]
fn homogeneous_is_the_packet_solve() {
    let p = generic();
    let s = steady_state(&p).unwrap();
    let r = ensemble_average(&p, &BroadeningSpec::homogeneous()).unwrap();
    assert_eq!(r.sigma32, s.sigma32);
    assert_eq!(r.populations, s.rho);
    assert_eq!(r.nodes, 1);
}

#[test]
fn narrow_line_reduces_to_packet() {
    let p = generic();
    let s = steady_state(&p).unwrap();
    for kind in [LineShape::Gaussian, LineShape::Lorentzian] {
        let b = BroadeningSpec::new(kind, [1e-4, 1e-4, 1e-4]).unwrap();
        let r = ensemble_average(&p, &b).unwrap();
        let mass = average_quantity(&p, &b, |_, _| C::new(1.0, 0.0)).unwrap().re;
        assert!(rel_diff(r.sigma32, s.sigma32 * mass) < 1e-6, "{kind}");
    }
}

#[test]
fn lorentzian_convolution() {
    let e1 = 1e-4;
    let p = weak(e1);
    let n12 = steady_state(&weak(0.0)).unwrap().n12();
    let u = 100.0 * relax().gamma21;
    let b = BroadeningSpec::new(LineShape::Lorentzian, [u, u, u]).unwrap();
    let r = ensemble_average(&p, &b).unwrap();
    // ⟨Im σ21/e1⟩ = −Re⟨iσ21/e1⟩
    let got = -r.response21.re;
    let expect = n12 / (relax().gamma21 + u);
    assert!((got / expect - 1.0).abs() < 0.02, "{got} vs {expect}");
}

#[test]
fn doubling_nodes_converges() {
    let p = generic();
    let b = BroadeningSpec::new(LineShape::Gaussian, [0.5, 0.7, 0.4]).unwrap();
    let a = ensemble_average(&p, &b.with_nodes(129).unwrap()).unwrap();
    let c = ensemble_average(&p, &b.with_nodes(258).unwrap()).unwrap();
    assert!(rel_diff(a.sigma32, c.sigma32) < 1e-6);
    assert!(rel_diff(a.ir_source_sum(), c.ir_source_sum()) < 1e-6);

    let b = BroadeningSpec::new(LineShape::Gaussian, [40.0, 60.0, 30.0]).unwrap();
    let r = ensemble_average(&p, &b).unwrap();
    assert!(r.error_estimate.unwrap() < 1e-6);
    let tight = b.with_tolerance(triwave_core::quadrature::AdaptiveTolerance { rel: 1e-12, ..Default::default() });
    let t = ensemble_average(&p, &tight).unwrap();
    assert!(t.nodes > r.nodes);
    assert!(rel_diff(r.sigma32, t.sigma32) < 1e-6);
}

#[test]
fn symmetric_line_parity() {
    let p = weak(1e-3);
    for kind in [LineShape::Gaussian, LineShape::Lorentzian] {
        let b = BroadeningSpec::new(kind, [20.0, 20.0, 20.0]).unwrap();
        let r = ensemble_average(&p, &b).unwrap();
        assert!(r.response21.im.abs() < 1e-9 * r.response21.re.abs(), "{kind}: {}", r.response21);
    }
}

#[test]
fn broadening_lowers_peak_response() {
    let p = weak(1e-3);
    let mut last = f64::INFINITY;
    for u in [0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let b = BroadeningSpec::new(LineShape::Gaussian, [u, u, u]).unwrap();
        let v = ensemble_average(&p, &b).unwrap().response21.norm();
        assert!(v < last, "u = {u}");
        last = v;
    }
}

fn burning() -> (PacketParams<f64>, BroadeningSpec<f64>) {
    let r = RelaxationSpec::uniform(1.0, 10.0).unwrap();
    let p = PacketParams::new(Detunings::zero(), r, Drives::optical(C::new(10.5, 0.0), C::new(0.0, 10.5))).unwrap();
    let b = BroadeningSpec::new(LineShape::Gaussian, [110.0, 110.0, 110.0]).unwrap();
    (p, b)
}

#[test]
fn burned_hole_is_deep() {
    let (p, b) = burning();
    let p = p.with_drives(Drives::optical(C::new(10.5, 0.0), C::new(0.0, 0.0))).unwrap();
    let n12 = |xi: f64| steady_state(&p.with_shift(b.shift(xi))).unwrap().n12();
    let far = n12(3.0);
    let center = n12(0.0);
    assert!(far < 0.0);
    assert!(1.0 - center / far > 0.5, "center {center}, far {far}");
}

#[test]
fn refinement_consistency() {
    let (p, b) = burning();
    let refined = holeburning_average(&p, &b, true).unwrap();
    let plain = holeburning_average(&p, &b.with_nodes(40 * b.nodes()).unwrap(), false).unwrap();
    assert!(rel_diff(refined.sigma32, plain.sigma32) < 1e-4);
    assert!((refined.n12() - plain.n12()).abs() < 1e-4);
}

#[test]
fn regime_gates() {
    let (p, b) = burning();
    let weak_drive = p.with_drives(Drives::optical(C::new(2.0, 0.0), C::new(2.0, 0.0))).unwrap();
    match holeburning_average(&weak_drive, &b, true) {
        Err(Error::Regime(v)) => assert_eq!(v.len(), 2),
        other => panic!("{other:?}"),
    }
    let narrow = BroadeningSpec::new(LineShape::Gaussian, [50.0, 50.0, 50.0]).unwrap();
    assert!(matches!(holeburning_average(&p, &narrow, true), Err(Error::Regime(_))));
}

#[test]
fn failed_node_is_named() {
    let r = RelaxationSpec::new([1.0; 3], 0.0, 0.0, 0.0, 0.0).unwrap();
    let p = PacketParams::new(Detunings::zero(), r, Drives::default()).unwrap();
    let b = BroadeningSpec::new(LineShape::Gaussian, [0.5, 0.5, 0.5]).unwrap();
    match ensemble_average(&p, &b) {
        Err(Error::PacketSolve { xi, source }) => {
            assert!(xi.is_finite());
            assert!(matches!(*source, Error::DegenerateParameters { .. }));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn spec_validation() {
    assert!(BroadeningSpec::new(LineShape::Gaussian, [0.0, 1.0, 1.0]).is_err());
    assert!(BroadeningSpec::new(LineShape::Homogeneous, [0.0, 1.0, 0.0]).is_err());
    assert!(BroadeningSpec::<f64>::homogeneous().with_nodes(16).is_err());
    assert!(BroadeningSpec::<f64>::homogeneous().with_cutoff(4.0).is_err());
}
