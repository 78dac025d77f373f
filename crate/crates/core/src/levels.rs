//! The three-level medium: level energies, transition dipoles, relaxation
//! rates, and the coherent fields acting on it.
//!
//! Level 1 is the lowest (hole) level, 2 and 3 the two electron levels.
//! Field 1 drives 2↔1, field 2 drives 3↔1, and the IR field sits on 3↔2.

use std::fmt;

use crate::error::{Error, Result};
use crate::num::{Real, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme<T> {
    e1: T,
    e2: T,
    e3: T,
}

impl<T: Real> LevelScheme<T> {
    /// Level energies in meV; must be strictly increasing.
    pub fn new(e1: T, e2: T, e3: T) -> Result<Self> {
        if !(e1.is_finite() && e2.is_finite() && e3.is_finite()) {
            return Err(Error::domain("level energies must be finite"));
        }
        if !(e3 > e2 && e2 > e1) {
            return Err(Error::domain(format!(
                "level energies must satisfy E3 > E2 > E1, got ({e1}, {e2}, {e3}) meV"
            )));
        }
        Ok(Self { e1, e2, e3 })
    }

    /// Builds the scheme from ω21 and ω32 with E1 = 0.
    pub fn from_transitions(omega21: T, omega32: T) -> Result<Self> {
        Self::new(T::zero(), omega21, omega21 + omega32)
    }

    pub fn energies(&self) -> [T; 3] {
        [self.e1, self.e2, self.e3]
    }

    pub fn omega21(&self) -> T {
        self.e2 - self.e1
    }

    pub fn omega32(&self) -> T {
        self.e3 - self.e2
    }

    /// Defined as ω21 + ω32 so that the three-level loop closes exactly.
    pub fn omega31(&self) -> T {
        self.omega21() + self.omega32()
    }
}

/// Transition dipole moments in e·nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSet<T> {
    pub d21: T,
    pub d31: T,
    pub d32: T,
}

impl<T: Real> DipoleSet<T> {
    pub fn new(d21: T, d31: T, d32: T) -> Result<Self> {
        for (name, d) in [("d21", d21), ("d31", d31), ("d32", d32)] {
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::domain(format!(
                    "dipole {name} must be positive (all three transitions allowed), got {d}"
                )));
            }
        }
        Ok(Self { d21, d31, d32 })
    }
}

/// Phenomenological relaxation and pumping, all in meV.
///
/// `gamma*` are coherence decay rates; `r32`, `r31`, `r21` are population
/// decay channels 3→2, 3→1, 2→1; `pump` is the incoherent rate 1→3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSpec<T> {
    pub gamma21: T,
    pub gamma31: T,
    pub gamma32: T,
    pub r32: T,
    pub r31: T,
    pub r21: T,
    pub pump: T,
}

impl<T: Real> RelaxationSpec<T> {
    pub fn new(gamma: [T; 3], r32: T, r31: T, r21: T, pump: T) -> Result<Self> {
        let spec = Self {
            gamma21: gamma[0],
            gamma31: gamma[1],
            gamma32: gamma[2],
            r32,
            r31,
            r21,
            pump,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Every rate (coherence and population) equal to `gamma`, with its own pump rate.
    pub fn uniform(gamma: T, pump: T) -> Result<Self> {
        Self::new([gamma; 3], gamma, gamma, gamma, pump)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::domain(format!("rate {name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn gammas(&self) -> [T; 3] {
        [self.gamma21, self.gamma31, self.gamma32]
    }

    pub fn named(&self) -> [(&'static str, T); 7] {
        [
            ("gamma21", self.gamma21),
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
            ("r32", self.r32),
            ("r31", self.r31),
            ("r21", self.r21),
            ("pump", self.pump),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldRole {
    /// Drives 2↔1.
    Optical1,
    /// Drives 3↔1.
    Optical2,
    /// Generated on 3↔2.
    Infrared,
}

impl fmt::Display for FieldRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldRole::Optical1 => "optical-1",
            FieldRole::Optical2 => "optical-2",
            FieldRole::Infrared => "ir",
        })
    }
}

/// A coherent field in Rabi form, e = dℰ/2ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveField<T> {
    pub rabi: C<T>,
    /// Carrier frequency, meV.
    pub omega: T,
    /// Longitudinal wavenumber, µm⁻¹.
    pub kx: T,
    pub role: FieldRole,
}

impl<T: Real> DriveField<T> {
    pub fn new(role: FieldRole, rabi: C<T>, omega: T, kx: T) -> Result<Self> {
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::domain(format!("{role} carrier frequency must be positive, got {omega}")));
        }
        if !(rabi.re.is_finite() && rabi.im.is_finite()) {
            return Err(Error::domain(format!("{role} Rabi amplitude must be finite")));
        }
        if !kx.is_finite() {
            return Err(Error::domain(format!("{role} wavenumber must be finite")));
        }
        Ok(Self { rabi, omega, kx, role })
    }
}

/// Rotating-frame detunings Δ_ik = ω_ik − (field frequency), meV.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Detunings<T> {
    pub d21: T,
    pub d31: T,
    pub d32: T,
}

impl<T: Real> Detunings<T> {
    pub fn zero() -> Self {
        Self { d21: T::zero(), d31: T::zero(), d32: T::zero() }
    }

    /// Δ31 − Δ21 − Δ32; zero for a closed loop.
    pub fn loop_defect(&self) -> T {
        self.d31 - self.d21 - self.d32
    }

    pub fn negated(&self) -> Self {
        Self { d21: -self.d21, d31: -self.d31, d32: -self.d32 }
    }
}

/// Detunings of the two optical fields and the IR field from their transitions.
///
/// The rotating frame only exists when the IR frequency is exactly the
/// difference frequency ω2 − ω1; anything else is a contract violation.
pub fn closed_loop_detunings<T: Real>(levels: &LevelScheme<T>, omega1: T, omega2: T, omega: T) -> Result<Detunings<T>> {
    let diff = omega2 - omega1;
    let scale = omega1.abs().max(omega2.abs()).max(T::one());
    if (omega - diff).abs() > T::lit(8.0) * T::epsilon() * scale {
        return Err(Error::contract(format!(
            "three-photon resonance requires ω = ω2 − ω1 = {diff}, got {omega}"
        )));
    }
    let d21 = levels.omega21() - omega1;
    let d32 = levels.omega32() - diff;
    Ok(Detunings { d21, d31: d21 + d32, d32 })
}
