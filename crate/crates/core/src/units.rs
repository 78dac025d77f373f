//! Unit conventions and conversions.
//!
//! Internally ħ = 1: energies, rates and angular frequencies are all in meV,
//! lengths in µm, carrier densities in cm⁻³. Losses enter in cm⁻¹ and are
//! converted once at the boundary.

use crate::error::{Error, Result};
use crate::num::Real;

/// ħ in meV·s (CODATA 2018).
pub const HBAR_MEV_S: f64 = 6.582_119_569e-13;
/// Speed of light in cm/s.
pub const C_CM_S: f64 = 2.997_924_58e10;
/// hc in meV·µm, derived from the two constants above so that all conversions agree.
pub const HC_MEV_UM: f64 = 2.0 * std::f64::consts::PI * HBAR_MEV_S * C_CM_S * 1.0e4;
/// e²/(4πε₀) in meV·nm.
pub const COULOMB_MEV_NM: f64 = 1_439.964_548;
/// Field strength in V/m of a dipole-energy of 1 meV across 1 e·nm.
pub const V_PER_M_PER_MEV_NM: f64 = 1.0e6;
/// ε₀ in F/m.
pub const EPS0_F_M: f64 = 8.854_187_8128e-12;
/// 1 meV in J.
pub const MEV_J: f64 = 1.602_176_634e-22;

/// Conversion constants expressed in the working scalar type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitTable<T> {
    pub hbar_mev_s: T,
    pub c_cm_s: T,
    pub hc_mev_um: T,
}

impl<T: Real> UnitTable<T> {
    pub fn standard() -> Self {
        Self {
            hbar_mev_s: T::lit(HBAR_MEV_S),
            c_cm_s: T::lit(C_CM_S),
            hc_mev_um: T::lit(HC_MEV_UM),
        }
    }

    /// ħc in meV·µm.
    pub fn hbar_c_mev_um(&self) -> T {
        self.hc_mev_um / (T::lit(2.0) * T::PI())
    }

    pub fn mev_to_rad_per_s(&self, e: T) -> T {
        e / self.hbar_mev_s
    }

    pub fn rad_per_s_to_mev(&self, w: T) -> T {
        w * self.hbar_mev_s
    }
}

impl<T: Real> Default for UnitTable<T> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Vacuum wavelength (µm) of a photon with energy `energy` (meV).
pub fn wavelength_from_energy<T: Real>(energy: T) -> Result<T> {
    if !(energy > T::zero()) || !energy.is_finite() {
        return Err(Error::domain(format!("photon energy must be positive, got {energy} meV")));
    }
    Ok(UnitTable::<T>::standard().hc_mev_um / energy)
}

/// Photon energy (meV) of vacuum wavelength `lambda` (µm).
pub fn energy_from_wavelength<T: Real>(lambda: T) -> Result<T> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda} µm")));
    }
    Ok(UnitTable::<T>::standard().hc_mev_um / lambda)
}

/// Field amplitude decay rate κ (meV) for an intensity loss `alpha` (cm⁻¹).
///
/// κ = α·c/(2μ): α is a loss per unit length of *intensity*, the factor two
/// turns it into an amplitude rate, so 2κ (as a wavenumber) reproduces α.
/// `omega` is only checked for positivity; the modal index `mu` is assumed to
/// already be the group index at that frequency.
pub fn loss_cm_to_rate<T: Real>(alpha: T, omega: T, mu: T) -> Result<T> {
    check_loss_args(alpha, omega, mu)?;
    let units = UnitTable::<T>::standard();
    let per_second = alpha * units.c_cm_s / (T::lit(2.0) * mu);
    Ok(units.rad_per_s_to_mev(per_second))
}

/// Inverse of [`loss_cm_to_rate`].
pub fn rate_to_loss_cm<T: Real>(kappa: T, omega: T, mu: T) -> Result<T> {
    check_loss_args(kappa, omega, mu)?;
    let units = UnitTable::<T>::standard();
    let per_second = units.mev_to_rad_per_s(kappa);
    Ok(per_second * T::lit(2.0) * mu / units.c_cm_s)
}

fn check_loss_args<T: Real>(loss: T, omega: T, mu: T) -> Result<()> {
    if !(mu > T::zero()) {
        return Err(Error::domain(format!("refractive index must be positive, got {mu}")));
    }
    if !(omega > T::zero()) {
        return Err(Error::domain(format!("frequency must be positive, got {omega} meV")));
    }
    if !(loss >= T::zero()) || !loss.is_finite() {
        return Err(Error::domain(format!("loss must be finite and non-negative, got {loss}")));
    }
    Ok(())
}

/// Longitudinal wavenumber (µm⁻¹) of a mode with index `mu` at photon energy `omega` (meV).
pub fn wavenumber<T: Real>(mu: T, omega: T) -> T {
    mu * omega / UnitTable::<T>::standard().hbar_c_mev_um()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_anchors() {
        let lam = wavelength_from_energy(98.0_f64).unwrap();
        assert!((lam - 12.6514).abs() < 1e-4, "{lam}");
        assert_eq!((lam * 100.0).round() / 100.0, 12.65);

        let one = wavelength_from_energy(1239.84_f64).unwrap();
        assert!((one - 1.0).abs() < 2e-6);

        let hh = wavelength_from_energy(20.66_f64).unwrap();
        assert!((hh - 60.0).abs() < 0.02, "{hh}");
        let e = energy_from_wavelength(60.0_f64).unwrap();
        assert_eq!((e * 100.0).round() / 100.0, 20.66);
    }

    #[test]
    fn nonpositive_energy_rejected() {
        assert!(wavelength_from_energy(0.0_f64).is_err());
        assert!(wavelength_from_energy(-3.0_f64).is_err());
        assert!(wavelength_from_energy(f64::NAN).is_err());
    }

    #[test]
    fn loss_conversion() {
        assert_eq!(loss_cm_to_rate(0.0_f64, 95.0, 3.3).unwrap(), 0.0);
        let k1 = loss_cm_to_rate(100.0_f64, 95.0, 3.3).unwrap();
        let k2 = loss_cm_to_rate(100.0_f64, 95.0, 6.6).unwrap();
        assert!((k1 / k2 - 2.0).abs() < 1e-14);
        assert!(loss_cm_to_rate(100.0_f64, 95.0, 0.0).is_err());
        assert!(loss_cm_to_rate(100.0_f64, 95.0, -1.0).is_err());
        assert!(loss_cm_to_rate(-1.0_f64, 95.0, 3.3).is_err());
    }

    #[test]
    fn loss_round_trip_at_17_um() {
        let omega = energy_from_wavelength(17.0_f64).unwrap();
        let kappa = loss_cm_to_rate(150.0, omega, 3.3).unwrap();
        // 150 cm⁻¹ · c / (2·3.3) ≈ 6.81e11 s⁻¹ ≈ 0.448 meV
        assert!((kappa - 0.4484).abs() < 1e-3, "{kappa}");
        let back = rate_to_loss_cm(kappa, omega, 3.3).unwrap();
        assert!((back - 150.0).abs() / 150.0 < 1e-12);
    }

    #[test]
    fn rad_per_s_constant() {
        let u = UnitTable::<f64>::standard();
        assert!((u.mev_to_rad_per_s(1.0) / 1.519_267e12 - 1.0).abs() < 1e-6);
    }
}
