//! Built-in cross-checks between the closed forms and the numerical solvers.

use num_complex::Complex64 as C;
use triwave_core::analytic::{
    clamped_loss, eq10a_eq11_inhomogeneous, eq6_ir_field, gamma_factors, AnalyticContext, HOLEBURNING_COEFFICIENTS,
};
use triwave_core::ensemble::{ensemble_average, holeburning_coefficients, BroadeningSpec, HoleBurningCoefficients, LineShape};
use triwave_core::levels::{Detunings, RelaxationSpec};
use triwave_core::liouville::{sigma32_perturbative, Drives, PacketParams};
use triwave_core::num::rel_diff;

use crate::config::ScenarioConfig;
use crate::error::RunError;
use crate::scenario::Scenario;

/// Relative difference between the weak-IR closed form and the packet
/// solver's parametric source for one packet.
pub fn weak_form_vs_packet(ctx: &AnalyticContext<f64>, packet: &PacketParams<f64>) -> Result<f64, RunError> {
    let probe = sigma32_perturbative(packet).map_err(RunError::model("packet probe"))?;
    let g = gamma_factors(ctx, &Detunings::zero());
    let sum = g.s12(probe.state.n12()) + g.s13(probe.state.n13());
    let closed = eq6_ir_field(ctx, 1.0, sum).e;
    let direct = C::i() * probe.source / ctx.kappa;
    Ok(rel_diff(closed, direct))
}

/// Ratio of the quadrature-averaged weak-IR field to the unsaturated
/// inhomogeneous closed form at u21 = u32 = k·γ21, u31 = 2u.
pub fn inhomogeneous_ratio(relaxation: RelaxationSpec<f64>, k: f64) -> Result<f64, RunError> {
    let g = relaxation.gamma21;
    let (e1, e2) = (C::new(0.01 * g, 0.0), C::new(0.012 * g, 0.0));
    let p = PacketParams::new(Detunings::zero(), relaxation, Drives::optical(e1, e2)).map_err(RunError::model("packet"))?;
    let u = k * g;
    let b = BroadeningSpec::new(LineShape::Gaussian, [u, 2.0 * u, u]).map_err(RunError::model("broadening"))?;
    let r = ensemble_average(&p, &b).map_err(RunError::model("ensemble"))?;
    // Unit g², g1², κ and unit level, dipole and confinement ratios; κ1 from the clamp.
    let ctx = AnalyticContext {
        omega: 1.0,
        omega1: 1.0,
        omega2: 2.0,
        d: 1.0,
        d1: 1.0,
        d2: 1.0,
        kappa: 1.0,
        kappa1: clamped_loss(1.0, r.response21),
        kappa2: 1.0,
        conf: 1.0,
        conf1: 1.0,
        conf2: 1.0,
        relaxation,
        u21: u,
        u31: 2.0 * u,
        u32: u,
        detunings: Detunings::zero(),
        e1,
        e2,
    };
    let numeric = eq6_ir_field(&ctx, 1.0, r.ir_source_sum()).e.norm();
    Ok(numeric / eq10a_eq11_inhomogeneous(&ctx).e_abs)
}

/// Hole-burning bracket coefficients for equal drives |e1| = |e2| = e·γ,
/// u = k·e·γ and pump `pump`·γ, all other rates γ.
pub fn holeburning_split(gamma: f64, e: f64, k: f64, pump: f64) -> Result<HoleBurningCoefficients<f64>, RunError> {
    let r = RelaxationSpec::new([gamma; 3], gamma, gamma, gamma, pump * gamma).map_err(RunError::model("relaxation"))?;
    let amp = e * gamma;
    let p = PacketParams::new(Detunings::zero(), r, Drives::optical(C::new(amp, 0.0), C::new(0.0, amp))).map_err(RunError::model("packet"))?;
    let u = k * amp;
    let b = BroadeningSpec::new(LineShape::Gaussian, [u, u, u]).map_err(RunError::model("broadening"))?;
    holeburning_coefficients(&p, &b).map_err(RunError::model("hole burning"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Description of the pass condition.
    pub bound: String,
    pub pass: bool,
}

/// The oracle suite behind `triwave verify`.
pub fn verify(cfg: &ScenarioConfig) -> Result<Vec<Check>, RunError> {
    let s = Scenario::from_config(cfg)?;
    let drives = s.resolve_drives()?;
    let mut checks = Vec::new();

    let packet = s.packet(drives)?;
    let d = weak_form_vs_packet(&s.analytic_context(&drives), &packet)?;
    checks.push(Check { name: "weak-IR closed form vs packet solver".into(), value: d, bound: "rel < 1e-6".into(), pass: d < 1e-6 });

    let mut last = f64::INFINITY;
    let mut monotone = true;
    for (k, tol) in [(30.0, 0.2), (100.0, 0.1), (300.0, 0.05)] {
        let dev = (inhomogeneous_ratio(s.relaxation, k)? - 1.0).abs();
        monotone &= dev < last;
        last = dev;
        checks.push(Check {
            name: format!("inhomogeneous closed form vs quadrature, u/γ = {k}"),
            value: dev,
            bound: format!("rel < {tol}"),
            pass: dev < tol,
        });
    }
    checks.push(Check {
        name: "inhomogeneous closed form convergence in u/γ".into(),
        value: last,
        bound: "monotone".into(),
        pass: monotone,
    });

    let h = holeburning_split(1.0, 30.0, 300.0, 10.0)?;
    for (name, got, expect) in [("c1", h.c1, HOLEBURNING_COEFFICIENTS[0]), ("c2", h.c2, HOLEBURNING_COEFFICIENTS[1])] {
        let dev = (got / expect - 1.0).abs();
        checks.push(Check {
            name: format!("hole-burning coefficient {name} = {got:.4}"),
            value: dev,
            bound: "rel < 0.15".into(),
            pass: dev < 0.15 && h.opposite_signs,
        });
    }
    Ok(checks)
}
