//! Cavity side of the problem: coupling constant, mode response, phase
//! matching, the self-consistent IR field and the photon budget.
//!
//! In steady state the IR mode obeys (κ + i(ω_c − ω))e = i g²⟨σ32⟩, where the
//! overlap of the polarization with the mode profile is folded into the
//! confinement factor carried by g².

use crate::analytic::clamped_loss;
use crate::ensemble::{average_on_grid, ensemble_average, ensemble_average_with, BroadeningSpec, EnsembleGrid, EnsembleResult};
use crate::error::{Error, Result};
use crate::liouville::{Drives, PacketParams};
use crate::num::{im_unit, Real, C};
use crate::units::{wavenumber, UnitTable, COULOMB_MEV_NM, EPS0_F_M, MEV_J, V_PER_M_PER_MEV_NM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityModeSpec<T> {
    omega_c: T,
    kappa: T,
    conf: T,
    index: T,
    kx: T,
    volume_um3: Option<T>,
}

impl<T: Real> CavityModeSpec<T> {
    /// Mode at `omega_c` (meV) with field decay `kappa` (meV), confinement
    /// `conf` and modal index `index`; kx follows from the index.
    pub fn new(omega_c: T, kappa: T, conf: T, index: T) -> Result<Self> {
        if !(omega_c > T::zero()) {
            return Err(Error::domain("mode frequency must be > 0"));
        }
        if !(kappa > T::zero() && kappa.is_finite()) {
            return Err(Error::domain("κ must be > 0"));
        }
        if !(conf > T::zero() && conf <= T::one()) {
            return Err(Error::domain("confinement factor must lie in (0, 1]"));
        }
        if !(index > T::zero()) {
            return Err(Error::domain("modal index must be > 0"));
        }
        Ok(Self { omega_c, kappa, conf, index, kx: wavenumber(index, omega_c), volume_um3: None })
    }

    pub fn with_volume(mut self, volume_um3: T) -> Self {
        self.volume_um3 = Some(volume_um3);
        self
    }

    pub fn with_kappa(self, kappa: T) -> Result<Self> {
        Self::new(self.omega_c, kappa, self.conf, self.index).map(|m| Self { volume_um3: self.volume_um3, ..m })
    }

    pub fn omega_c(&self) -> T {
        self.omega_c
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn conf(&self) -> T {
        self.conf
    }

    pub fn index(&self) -> T {
        self.index
    }

    /// µm⁻¹
    pub fn kx(&self) -> T {
        self.kx
    }

    pub fn volume_um3(&self) -> Option<T> {
        self.volume_um3
    }
}

/// g² = 2πωd²NG/μ² together with its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConstant<T> {
    /// meV²
    pub g2: T,
    /// cm⁻³
    pub density: T,
    /// e·nm
    pub dipole: T,
    /// meV
    pub omega: T,
    pub index: T,
    pub conf: T,
}

/// Coupling constant in meV², with d²N expressed through e²/nm = 1439.96 meV.
pub fn coupling_g2<T: Real>(density_cm3: T, dipole_nm: T, omega: T, index: T, conf: T) -> Result<CouplingConstant<T>> {
    for (name, v) in [("density", density_cm3), ("dipole", dipole_nm), ("omega", omega), ("index", index), ("confinement", conf)] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::domain(format!("{name} must be > 0")));
        }
    }
    let density_nm3 = density_cm3 * T::lit(1e-21);
    let g2 = T::lit(2.0) * T::PI() * omega * dipole_nm * dipole_nm * density_nm3 * conf * T::lit(COULOMB_MEV_NM)
        / (index * index);
    Ok(CouplingConstant { g2, density: density_cm3, dipole: dipole_nm, omega, index, conf })
}

/// Steady mode amplitude driven by `source` = i g²⟨σ32⟩ at frequency `omega`.
pub fn mode_steady_field<T: Real>(source: C<T>, mode: &CavityModeSpec<T>, omega: T) -> C<T> {
    source / C::new(mode.kappa, mode.omega_c - omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatch<T> {
    /// kx_IR − (k2x − k1x), µm⁻¹
    pub delta_k: T,
    /// |Δk|·L < π
    pub matched: bool,
}

pub fn phase_mismatch<T: Real>(k1x: T, k2x: T, kx_ir: T, length_um: T) -> PhaseMatch<T> {
    let delta_k = kx_ir - (k2x - k1x);
    PhaseMatch { delta_k, matched: delta_k.abs() * length_um < T::PI() }
}

/// IR index that phase-matches optical modes of indices `mu1`, `mu2`.
pub fn matching_index<T: Real>(mu1: T, omega1: T, mu2: T, omega2: T) -> T {
    (mu2 * omega2 - mu1 * omega1) / (omega2 - omega1)
}

/// Geometry of the emitting device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Device<T> {
    pub length_um: T,
    pub width_um: T,
    pub thickness_um: T,
    /// Fraction of the cavity loss that leaves through the output facet.
    pub outcoupling: T,
}

impl<T: Real> Device<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("length", self.length_um), ("width", self.width_um), ("thickness", self.thickness_um)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::domain(format!("device {name} must be > 0")));
            }
        }
        if !(self.outcoupling >= T::zero() && self.outcoupling <= T::one()) {
            return Err(Error::domain("out-coupling fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn facet_area_cm2(&self) -> T {
        self.width_um * self.thickness_um * T::lit(1e-8)
    }

    pub fn volume_m3(&self) -> T {
        self.length_um * self.width_um * self.thickness_um * T::lit(1e-18)
    }
}

/// Field amplitude |ℰ| = 2|e|/d in V/m.
pub fn field_v_per_m<T: Real>(rabi: C<T>, dipole_nm: T) -> T {
    T::lit(2.0) * rabi.norm() / dipole_nm * T::lit(V_PER_M_PER_MEV_NM)
}

/// Travelling-wave intensity cε0μ|ℰ|²/2 in W/cm².
pub fn intensity_w_cm2<T: Real>(rabi: C<T>, dipole_nm: T, index: T) -> T {
    let f = field_v_per_m(rabi, dipole_nm);
    let c_m_s = UnitTable::<T>::standard().c_cm_s * T::lit(1e-2);
    c_m_s * T::lit(EPS0_F_M) * index * f * f * T::lit(0.5) * T::lit(1e-4)
}

/// Energy ε0μ²|ℰ|²/2·V stored in the mode, in J.
pub fn stored_energy_j<T: Real>(rabi: C<T>, dipole_nm: T, index: T, device: &Device<T>) -> T {
    let f = field_v_per_m(rabi, dipole_nm);
    T::lit(EPS0_F_M) * index * index * f * f * T::lit(0.5) * device.volume_m3()
}

/// Photons leaving the mode per second through all losses, per cm² of facet.
pub fn photon_flux<T: Real>(rabi: C<T>, dipole_nm: T, mode: &CavityModeSpec<T>, device: &Device<T>) -> T {
    let w = stored_energy_j(rabi, dipole_nm, mode.index, device);
    let rate = T::lit(2.0) * UnitTable::<T>::standard().mev_to_rad_per_s(mode.kappa);
    rate * w / (mode.omega_c * T::lit(MEV_J)) / device.facet_area_cm2()
}

/// Out-coupled power in mW.
pub fn output_power<T: Real>(rabi: C<T>, dipole_nm: T, mode: &CavityModeSpec<T>, device: &Device<T>) -> T {
    let w = stored_energy_j(rabi, dipole_nm, mode.index, device);
    let rate = T::lit(2.0) * UnitTable::<T>::standard().mev_to_rad_per_s(mode.kappa);
    device.outcoupling * rate * w * T::lit(1e3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CappedFlux<T> {
    pub flux: T,
    pub cap_applied: bool,
}

/// At most one IR photon per optical photon.
pub fn manley_rowe_cap<T: Real>(flux_ir: T, flux_opt1: T, flux_opt2: T) -> Result<CappedFlux<T>> {
    if [flux_ir, flux_opt1, flux_opt2].iter().any(|f| !(*f >= T::zero())) {
        return Err(Error::domain("photon fluxes must be ≥ 0"));
    }
    let bound = flux_opt1.min(flux_opt2);
    Ok(if flux_ir > bound {
        CappedFlux { flux: bound, cap_applied: true }
    } else {
        CappedFlux { flux: flux_ir, cap_applied: false }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping<T> {
    /// β chosen from the linearised map at e = 0.
    Auto,
    Fixed(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub damping: Damping<T>,
    pub max_iter: usize,
    /// Relative fixed-point residual at which iteration stops.
    pub tolerance: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { damping: Damping::Auto, max_iter: 500, tolerance: T::lit(1e-10) }
    }
}

/// One optical field as seen by the photon budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalMode<T> {
    pub dipole: T,
    pub mode: CavityModeSpec<T>,
}

/// Everything the IR fixed point needs. The drives in `packet` are held
/// fixed; its IR amplitude is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrProblem<T> {
    pub packet: PacketParams<T>,
    pub broadening: BroadeningSpec<T>,
    pub g2: T,
    pub mode: CavityModeSpec<T>,
    /// IR field frequency ω2 − ω1 (meV).
    pub omega: T,
    /// IR dipole d32 (e·nm).
    pub dipole: T,
    pub optical: [OpticalMode<T>; 2],
    pub device: Device<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrSolution<T> {
    pub e: C<T>,
    /// W/cm², intracavity
    pub intensity: T,
    /// s⁻¹·cm⁻², after the cap
    pub photon_flux: T,
    /// s⁻¹·cm⁻², before the cap
    pub uncapped_flux: T,
    pub optical_flux: [T; 2],
    pub cap_applied: bool,
    pub converged: bool,
    pub iterations: usize,
    pub residual: T,
    pub damping: T,
    /// |e| below every γ_ik.
    pub weak_ir: bool,
    /// Ensemble averages at the converged field.
    pub ensemble: EnsembleResult<T>,
}

/// Damping that best contracts the linearisation M(e) ≈ M0 + P·e + Q·e*.
fn auto_damping<T: Real>(p: C<T>, q: C<T>) -> T {
    let i = im_unit::<T>();
    let col_x = p + q;
    let col_y = i * (p - q);
    let (a, b, c, d) = (col_x.re, col_y.re, col_x.im, col_y.im);
    let half_tr = T::lit(0.5) * (a + d);
    let det = a * d - b * c;
    let disc = half_tr * half_tr - det;
    let eigs = if disc >= T::zero() {
        [C::new(half_tr + disc.sqrt(), T::zero()), C::new(half_tr - disc.sqrt(), T::zero())]
    } else {
        [C::new(half_tr, (-disc).sqrt()), C::new(half_tr, -(-disc).sqrt())]
    };
    let one = C::new(T::one(), T::zero());
    let spread = |beta: T| eigs.iter().fold(T::zero(), |m, l| m.max((one - (one - *l).scale(beta)).norm()));
    let mut best = (T::lit(0.5), spread(T::lit(0.5)));
    for l in eigs {
        let z = one - l;
        if z.re > T::zero() {
            let beta = (z.re / z.norm_sqr()).min(T::one());
            let s = spread(beta);
            if s < best.1 {
                best = (beta, s);
            }
        }
    }
    best.0
}

/// Converged IR amplitude of the driven cavity.
pub fn self_consistent_ir<T: Real>(problem: &IrProblem<T>, options: &SolverOptions<T>) -> Result<IrSolution<T>> {
    problem.device.validate()?;
    let base = problem.packet.with_ir(C::new(T::zero(), T::zero()))?;
    let b = &problem.broadening;
    let (at_zero, grid) = ensemble_average_with(&base, b, true)?;
    let denom = C::new(problem.mode.kappa, problem.mode.omega_c - problem.omega);
    let gain = im_unit::<T>() * C::from(problem.g2) / denom;
    let map_at = |e: C<T>, grid: &EnsembleGrid<T>| -> Result<(C<T>, EnsembleResult<T>)> {
        let r = average_on_grid(&base.with_ir(e)?, b, grid, false)?;
        Ok((gain * r.sigma32, r))
    };

    let mut beta = match options.damping {
        Damping::Fixed(beta) => {
            if !(beta > T::zero() && beta <= T::one()) {
                return Err(Error::domain("damping β must lie in (0, 1]"));
            }
            beta
        }
        Damping::Auto => {
            let r = at_zero.ir_response.expect("response requested");
            auto_damping(gain * r.along_e, gain * r.along_conj)
        }
    };

    let mut e = C::new(T::zero(), T::zero());
    let mut history: Vec<T> = Vec::new();
    let mut rising = 0usize;
    let mut since_change = 0usize;
    for iter in 1..=options.max_iter {
        let (m, ens) = if iter == 1 { (gain * at_zero.sigma32, at_zero.clone()) } else { map_at(e, &grid)? };
        let step = m - e;
        let scale = m.norm().max(e.norm());
        let residual = if scale > T::zero() { step.norm() / scale } else { T::zero() };
        if !residual.is_finite() || !m.norm().is_finite() {
            return Err(Error::NonConvergence { iterations: iter, residual: f64::INFINITY });
        }
        if residual <= options.tolerance {
            return Ok(finish(problem, e, ens, iter, residual, beta));
        }
        if history.last().is_some_and(|&last| residual > last) {
            rising += 1;
        } else {
            rising = 0;
        }
        history.push(residual);
        since_change += 1;
        let stalled = since_change > 20 && residual >= T::lit(0.5) * history[history.len() - 21];
        if rising >= 5 || stalled {
            match options.damping {
                Damping::Auto if beta > T::lit(1e-3) => {
                    beta = beta * T::lit(0.5);
                    rising = 0;
                    since_change = 0;
                }
                _ => {
                    return Err(Error::Oscillation {
                        iterations: iter,
                        residual: residual.to_f64_lossy(),
                        suggested_damping: (beta * T::lit(0.5)).to_f64_lossy(),
                    })
                }
            }
        }
        e += step.scale(beta);
    }
    let last = history.last().copied().unwrap_or(T::nan());
    Err(Error::NonConvergence { iterations: options.max_iter, residual: last.to_f64_lossy() })
}

fn finish<T: Real>(p: &IrProblem<T>, e: C<T>, ensemble: EnsembleResult<T>, iterations: usize, residual: T, damping: T) -> IrSolution<T> {
    let uncapped = photon_flux(e, p.dipole, &p.mode, &p.device);
    let d = p.packet.drives();
    let optical_flux = [
        photon_flux(d.e1, p.optical[0].dipole, &p.optical[0].mode, &p.device),
        photon_flux(d.e2, p.optical[1].dipole, &p.optical[1].mode, &p.device),
    ];
    let capped = manley_rowe_cap(uncapped, optical_flux[0], optical_flux[1]).unwrap_or(CappedFlux { flux: uncapped, cap_applied: false });
    let r = p.packet.relaxation();
    let min_gamma = r.gamma21.min(r.gamma31).min(r.gamma32);
    IrSolution {
        e,
        intensity: intensity_w_cm2(e, p.dipole, p.mode.index),
        photon_flux: capped.flux,
        uncapped_flux: uncapped,
        optical_flux,
        cap_applied: capped.cap_applied,
        converged: true,
        iterations,
        residual,
        damping,
        weak_ir: e.norm() < min_gamma,
        ensemble,
    }
}

/// Re-evaluates the fixed-point map at a solution and returns the relative
/// residual |M(e) − e|/|M(e)|.
pub fn fixed_point_residual<T: Real>(problem: &IrProblem<T>, e: C<T>) -> Result<T> {
    let q = problem.packet.with_ir(e)?;
    let r = ensemble_average(&q, &problem.broadening)?;
    let denom = C::new(problem.mode.kappa, problem.mode.omega_c - problem.omega);
    let m = im_unit::<T>() * C::from(problem.g2) * r.sigma32 / denom;
    let scale = m.norm().max(e.norm());
    Ok(if scale > T::zero() { (m - e).norm() / scale } else { T::zero() })
}

/// Optical drive amplitudes at which each optical field's saturated modal
/// gain equals its loss, holding the given phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampTarget<T> {
    pub g1_sq: T,
    pub g2_sq: T,
    pub kappa1: T,
    pub kappa2: T,
    pub phase1: T,
    pub phase2: T,
}

pub fn clamp_drives<T: Real>(packet: &PacketParams<T>, b: &BroadeningSpec<T>, target: &ClampTarget<T>) -> Result<Drives<T>> {
    let unit1 = C::from_polar(T::one(), target.phase1);
    let unit2 = C::from_polar(T::one(), target.phase2);
    let gains = |a1: T, a2: T| -> Result<(T, T)> {
        let q = packet.with_drives(Drives::optical(unit1.scale(a1), unit2.scale(a2)))?;
        let r = ensemble_average(&q, b)?;
        Ok((clamped_loss(target.g1_sq, r.response21), clamped_loss(target.g2_sq, r.response31)))
    };
    let tiny = T::lit(1e-9) * packet.relaxation().gamma21.max(T::lit(1e-300));
    let (g1, g2) = gains(tiny, tiny)?;
    let mut below = Vec::new();
    if !(g1 > target.kappa1) {
        below.push(format!("optical field 1 below threshold (gain {g1} ≤ loss {})", target.kappa1));
    }
    if !(g2 > target.kappa2) {
        below.push(format!("optical field 2 below threshold (gain {g2} ≤ loss {})", target.kappa2));
    }
    if !below.is_empty() {
        return Err(Error::Regime(below));
    }

    // Field 2 is clamped for each trial |e1|; the resulting field-1 excess
    // gain decreases monotonically in |e1|.
    let hi0 = packet.relaxation().gamma21.max(packet.relaxation().gamma31).max(T::one());
    let bisect = |eval: &dyn Fn(T) -> Result<T>| -> Result<Option<T>> {
        if eval(tiny)? <= T::zero() {
            return Ok(None);
        }
        let mut lo = tiny;
        let mut hi = hi0;
        let mut grow = 0;
        while eval(hi)? > T::zero() {
            lo = hi;
            hi = hi * T::lit(4.0);
            grow += 1;
            if grow > 60 {
                return Err(Error::NonConvergence { iterations: grow, residual: f64::NAN });
            }
        }
        while hi / lo - T::one() > T::lit(1e-11) {
            let mid = (lo * hi).sqrt();
            if eval(mid)? > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some((lo * hi).sqrt()))
    };
    let field2 = |a1: T| -> Result<Option<T>> { bisect(&|a2| Ok(gains(a1, a2)?.1 - target.kappa2)) };
    let excess1 = |a1: T| -> Result<T> {
        let a2 = field2(a1)?.unwrap_or(tiny);
        Ok(gains(a1, a2)?.0 - target.kappa1)
    };
    let Some(a1) = bisect(&excess1)? else {
        return Err(Error::Regime(vec!["optical field 1 is suppressed below threshold by field 2".into()]));
    };
    let Some(a2) = field2(a1)? else {
        return Err(Error::Regime(vec!["optical field 2 is suppressed below threshold by field 1".into()]));
    };
    Ok(Drives::optical(unit1.scale(a1), unit2.scale(a2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_response_is_lorentzian() {
        let m = CavityModeSpec::new(98.0f64, 0.5, 0.1, 3.3).unwrap();
        let s = C::new(0.2, -0.1);
        let on = mode_steady_field(s, &m, 98.0);
        assert!((on.norm() - s.norm() / 0.5).abs() < 1e-14);
        let off = mode_steady_field(s, &m, 98.5);
        assert!((off.norm() / on.norm() - 0.5f64.sqrt()).abs() < 1e-14);
        // ω_c − ω = −κ here, so the phase advances by 45°.
        let below = mode_steady_field(s, &m, 97.5);
        let phase = (below / on).arg().to_degrees();
        assert!((phase + 45.0).abs() < 1e-12);
        assert!(((off / on).arg().to_degrees() - 45.0).abs() < 1e-12);
    }

    #[test]
    fn kx_follows_index() {
        let m = CavityModeSpec::new(98.0, 0.5, 0.1, 3.3).unwrap();
        let expect = 3.3 * 98.0 / (crate::units::HC_MEV_UM / (2.0 * std::f64::consts::PI));
        assert!((m.kx() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_matching() {
        let pm = phase_mismatch(2.0, 5.0, 3.0, 1000.0);
        assert_eq!(pm.delta_k, 0.0);
        assert!(pm.matched);
        let a = phase_mismatch(2.0, 5.0, 2.5, 1000.0);
        let b = phase_mismatch(-2.0, -5.0, 2.5, 1000.0);
        assert!(!a.matched);
        assert_eq!(a.delta_k, -0.5);
        assert_eq!(b.delta_k, 5.5);
        assert!((matching_index(3.3f64, 1400.0, 3.3, 1498.0) - 3.3).abs() < 1e-12);
    }

    #[test]
    fn cap_examples() {
        let c = manley_rowe_cap(1e20, 2e20, 3e20).unwrap();
        assert_eq!((c.flux, c.cap_applied), (1e20, false));
        let c = manley_rowe_cap(5e20, 2e20, 3e20).unwrap();
        assert_eq!((c.flux, c.cap_applied), (2e20, true));
        let again = manley_rowe_cap(c.flux, 2e20, 3e20).unwrap();
        assert_eq!(again.flux, c.flux);
        assert!(manley_rowe_cap(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn power_scales_with_outcoupling() {
        let m = CavityModeSpec::new(98.0f64, 0.45, 0.1, 3.3).unwrap();
        let mut dev = Device { length_um: 1000.0, width_um: 10.0, thickness_um: 2.0, outcoupling: 0.1 };
        assert_eq!(output_power(C::new(0.0, 0.0), 2.0, &m, &dev), 0.0);
        let p1 = output_power(C::new(0.3, 0.0), 2.0, &m, &dev);
        dev.outcoupling = 0.2;
        let p2 = output_power(C::new(0.3, 0.0), 2.0, &m, &dev);
        assert!((p2 / p1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn auto_damping_cancels_a_real_eigenvalue() {
        // M(e) = −4e: β = 1/5 lands on the fixed point in one step.
        let beta: f64 = auto_damping(C::new(-4.0, 0.0), C::new(0.0, 0.0));
        assert!((beta - 0.2).abs() < 1e-14);
    }
}
