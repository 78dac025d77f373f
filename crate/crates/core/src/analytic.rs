//! Closed-form IR field expressions in the weak-IR limit.

use crate::error::{Error, Result};
use crate::levels::{Detunings, RelaxationSpec};
use crate::num::{im_unit, Real, C};
use crate::units::V_PER_M_PER_MEV_NM;

/// Scale separation required by the asymptotic regimes.
pub const REGIME_RATIO: f64 = 10.0;

/// Coefficients of the hole-burning closed form.
pub const HOLEBURNING_COEFFICIENTS: [f64; 2] = [0.9, 0.1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactors<T> {
    pub g21: C<T>,
    pub g31: C<T>,
    pub g32: C<T>,
    /// Γ32 + |e1|²/Γ31 + |e2|²/Γ21*
    pub g32_tilde: C<T>,
}

impl<T: Real> GammaFactors<T> {
    /// `detunings` already include any packet shift.
    pub fn new(gammas: [T; 3], detunings: &Detunings<T>, e1: C<T>, e2: C<T>) -> Self {
        let g21 = C::new(gammas[0], detunings.d21);
        let g31 = C::new(gammas[1], detunings.d31);
        let g32 = C::new(gammas[2], detunings.d32);
        let g32_tilde = g32 + C::from(e1.norm_sqr()) / g31 + C::from(e2.norm_sqr()) / g21.conj();
        Self { g21, g31, g32, g32_tilde }
    }

    /// Packet weight n12/(Γ21*Γ̃32).
    pub fn s12(&self, n12: T) -> C<T> {
        C::from(n12) / (self.g21.conj() * self.g32_tilde)
    }

    /// Packet weight n13/(Γ31Γ̃32).
    pub fn s13(&self, n13: T) -> C<T> {
        C::from(n13) / (self.g31 * self.g32_tilde)
    }
}

/// Parameters shared by all closed forms. Unprimed symbols refer to the IR
/// field, suffixes 1 and 2 to the optical fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticContext<T> {
    pub omega: T,
    pub omega1: T,
    pub omega2: T,
    pub d: T,
    pub d1: T,
    pub d2: T,
    pub kappa: T,
    pub kappa1: T,
    pub kappa2: T,
    /// Confinement factors G, G1, G2.
    pub conf: T,
    pub conf1: T,
    pub conf2: T,
    pub relaxation: RelaxationSpec<T>,
    pub u21: T,
    pub u31: T,
    pub u32: T,
    /// Bare field detunings (zero at line centers).
    pub detunings: Detunings<T>,
    pub e1: C<T>,
    pub e2: C<T>,
}

impl<T: Real> AnalyticContext<T> {
    pub fn validate(&self) -> Result<()> {
        let scale = self.omega2.abs().max(self.omega1.abs());
        if (self.omega - (self.omega2 - self.omega1)).abs() > T::lit(8.0) * T::epsilon() * scale {
            return Err(Error::contract("ω must equal ω2 − ω1"));
        }
        for (name, v) in [("omega", self.omega), ("omega1", self.omega1), ("omega2", self.omega2)] {
            if !(v > T::zero()) {
                return Err(Error::domain(format!("{name} must be > 0")));
            }
        }
        for (name, v) in [("d", self.d), ("d1", self.d1), ("d2", self.d2)] {
            if !(v > T::zero()) {
                return Err(Error::domain(format!("{name} must be > 0")));
            }
        }
        for (name, v) in [("kappa", self.kappa), ("kappa1", self.kappa1), ("kappa2", self.kappa2)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be > 0")));
            }
        }
        for (name, v) in [("G", self.conf), ("G1", self.conf1), ("G2", self.conf2)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::domain(format!("{name} must lie in (0, 1]")));
            }
        }
        for (name, v) in [("u21", self.u21), ("u31", self.u31), ("u32", self.u32)] {
            if !(v >= T::zero()) {
                return Err(Error::domain(format!("{name} must be ≥ 0")));
            }
        }
        self.relaxation.validate()
    }

    /// (κ1/G1)(G/κ)
    pub fn eta1(&self) -> T {
        (self.kappa1 * self.conf) / (self.conf1 * self.kappa)
    }

    /// (κ2/G2)(G/κ)
    pub fn eta2(&self) -> T {
        (self.kappa2 * self.conf) / (self.conf2 * self.kappa)
    }

    /// (ω/ω1)(d²/d1²)(κ1/G1)(G/κ)
    pub fn bracket1(&self) -> T {
        self.omega / self.omega1 * (self.d * self.d) / (self.d1 * self.d1) * self.eta1()
    }

    /// (ω/ω2)(d²/d2²)(κ2/G2)(G/κ)
    pub fn bracket2(&self) -> T {
        self.omega / self.omega2 * (self.d * self.d) / (self.d2 * self.d2) * self.eta2()
    }

    fn min_gamma(&self) -> T {
        let r = &self.relaxation;
        r.gamma21.min(r.gamma31).min(r.gamma32)
    }
}

/// Γ factors of a packet shifted by `shift` from the context's bare detunings.
pub fn gamma_factors<T: Real>(ctx: &AnalyticContext<T>, shift: &Detunings<T>) -> GammaFactors<T> {
    let det = Detunings {
        d21: ctx.detunings.d21 + shift.d21,
        d31: ctx.detunings.d31 + shift.d31,
        d32: ctx.detunings.d32 + shift.d32,
    };
    GammaFactors::new(ctx.relaxation.gammas(), &det, ctx.e1, ctx.e2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakIrField<T> {
    pub e: C<T>,
    /// |e| below every γ_ik.
    pub within_gate: bool,
}

/// IR Rabi amplitude (i g² e1* e2/κ)·Σ, where Σ is the ensemble mean of
/// n12/(Γ21*Γ̃32) + n13/(Γ31Γ̃32).
pub fn eq6_ir_field<T: Real>(ctx: &AnalyticContext<T>, g2: T, sum: C<T>) -> WeakIrField<T> {
    let e = im_unit::<T>() * C::from(g2) * ctx.e1.conj() * ctx.e2 * sum / C::from(ctx.kappa);
    WeakIrField { e, within_gate: e.norm() < ctx.min_gamma() }
}

/// Homogeneous line, both optical fields at line center.
pub fn eq7_ir_field_homogeneous<T: Real>(ctx: &AnalyticContext<T>) -> T {
    ctx.e1.norm() * ctx.e2.norm() / ctx.relaxation.gamma32 * (ctx.bracket1() + ctx.bracket2())
}

/// A loss given either as an amplitude decay rate or as an absorption
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss<T> {
    Mev(T),
    PerCm(T),
}

impl<T: Real> Loss<T> {
    fn value(&self) -> T {
        match *self {
            Loss::Mev(v) | Loss::PerCm(v) => v,
        }
    }
}

/// η = (κ12/G12)(G/κ).
pub fn eta_parameter<T: Real>(kappa12: Loss<T>, conf12: T, kappa: Loss<T>, conf: T) -> Result<T> {
    if std::mem::discriminant(&kappa12) != std::mem::discriminant(&kappa) {
        return Err(Error::contract("η needs both losses in the same unit"));
    }
    let (k12, k) = (kappa12.value(), kappa.value());
    if !(k12 > T::zero() && k > T::zero()) {
        return Err(Error::domain("losses must be > 0"));
    }
    if !(conf12 > T::zero()) || !(conf >= T::zero()) {
        return Err(Error::domain("confinement factors must be positive"));
    }
    Ok((k12 * conf) / (conf12 * k))
}

/// E2_sat² = ħ²γ32²/d2² in (V/m)².
pub fn saturation_scale<T: Real>(gamma32: T, d2: T) -> Result<T> {
    if !(gamma32 > T::zero() && d2 > T::zero()) {
        return Err(Error::domain("γ32 and d2 must be > 0"));
    }
    let e = gamma32 / d2 * T::lit(V_PER_M_PER_MEV_NM);
    Ok(e * e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InhomogeneousIrField<T> {
    pub e_abs: T,
    /// |ℰ|²/|ℰ1|²
    pub intensity_ratio: T,
    pub within_gate: bool,
}

/// Unsaturated inhomogeneous limit, fields at the line centers.
///
/// The intensity form uses |ℰ2|²/|ℰ2|²_s with e = dℰ/2; its bracket carries
/// a factor 2γ32 that is offset by an overall 1/4 so both forms agree.
pub fn eq10a_eq11_inhomogeneous<T: Real>(ctx: &AnalyticContext<T>) -> InhomogeneousIrField<T> {
    let r = &ctx.relaxation;
    let width_ratio = ctx.u21 / ctx.u32;
    let e_abs = T::lit(2.0) * ctx.e1.norm() * ctx.e2.norm() / (r.gamma32 + r.gamma21) * width_ratio * ctx.bracket1();

    // |ℰ2|²/|ℰ2|²_s in Rabi units: (2|e2|/d2)² / (γ32/d2)².
    let sat = T::lit(4.0) * ctx.e2.norm_sqr() / (r.gamma32 * r.gamma32);
    let inner = T::lit(2.0) * r.gamma32 / (r.gamma32 + r.gamma21) * (ctx.d / ctx.d1) * (ctx.omega / ctx.omega1)
        * width_ratio
        * ctx.eta1();
    let intensity_ratio = T::lit(0.25) * sat * inner * inner;

    let ratio = T::lit(REGIME_RATIO);
    let drive = ctx.e1.norm().max(ctx.e2.norm());
    let within_gate = [(ctx.u21, r.gamma21), (ctx.u31, r.gamma31), (ctx.u32, r.gamma32)]
        .iter()
        .all(|&(u, g)| u >= ratio * g && u >= ratio * drive);
    InhomogeneousIrField { e_abs, intensity_ratio, within_gate }
}

/// Hole-burning limit with the standard 0.9/0.1 coefficients.
pub fn eq13_ir_field_holeburning<T: Real>(ctx: &AnalyticContext<T>) -> Result<T> {
    let [c1, c2] = HOLEBURNING_COEFFICIENTS;
    holeburning_with_coefficients(ctx, T::lit(c1), T::lit(c2))
}

/// Hole-burning form |e1||e2|u/(γu32)·|c1·B1 − c2·B2|.
pub fn holeburning_with_coefficients<T: Real>(ctx: &AnalyticContext<T>, c1: T, c2: T) -> Result<T> {
    let violations = holeburning_assumptions(ctx);
    if !violations.is_empty() {
        return Err(Error::Assumptions(violations));
    }
    let gamma = ctx.relaxation.gamma21;
    let prefactor = ctx.e1.norm() * ctx.e2.norm() * ctx.u21 / (gamma * ctx.u32);
    Ok(prefactor * (c1 * ctx.bracket1() - c2 * ctx.bracket2()).abs())
}

/// Structural assumptions of the hole-burning closed form that `ctx` violates.
pub fn holeburning_assumptions<T: Real>(ctx: &AnalyticContext<T>) -> Vec<String> {
    let tol = T::lit(1e-9);
    let close = |a: T, b: T| (a - b).abs() <= tol * a.abs().max(b.abs());
    let r = &ctx.relaxation;
    let mut out = Vec::new();
    if !close(ctx.e1.norm(), ctx.e2.norm()) {
        out.push("|e1| = |e2|".to_string());
    }
    let g = r.gamma21;
    let rates = [
        ("gamma31", r.gamma31),
        ("gamma32", r.gamma32),
        ("r32", r.r32),
        ("r31", r.r31),
        ("r21", r.r21),
    ];
    let unequal: Vec<&str> = rates.iter().filter(|(_, v)| !close(*v, g)).map(|(n, _)| *n).collect();
    if !unequal.is_empty() {
        out.push(format!("all γ_ik and population rates equal (differs: {})", unequal.join(", ")));
    }
    if !close(ctx.u21, ctx.u31) {
        out.push("u21 = u31".to_string());
    }
    if !(ctx.u32 > T::zero()) {
        out.push("u32 > 0".to_string());
    }
    out
}

/// Modal loss κ1 that clamps a lasing optical field, from the ensemble mean
/// of iσ21/e1 (or iσ31/e2) and the coupling g1².
pub fn clamped_loss<T: Real>(g1_sq: T, mean_response: C<T>) -> T {
    (mean_response * C::from(g1_sq)).re
}

/// Line-center population difference that sustains a clamped field:
/// n12 = −κ1γ21/g1².
pub fn clamped_population<T: Real>(kappa1: T, gamma21: T, g1_sq: T) -> Result<T> {
    if !(g1_sq > T::zero()) {
        return Err(Error::domain("g1² must be > 0"));
    }
    Ok(-kappa1 * gamma21 / g1_sq)
}
