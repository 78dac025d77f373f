//! Steady-state model of inversionless infrared generation by difference-frequency
//! mixing of two optical fields in a three-level medium.
//!
//! Units: ħ = 1, energies and rates in meV, lengths in µm, densities in cm⁻³.
//! Field amplitudes are complex Rabi amplitudes e = dℰ/2.
//!
//! Numerical code is generic over [`Real`]; the `*64` aliases fix it to `f64`.

pub mod analytic;
pub mod cavity;
pub mod ensemble;
pub mod error;
pub mod levels;
pub mod linalg;
pub mod liouville;
pub mod num;
pub mod quadrature;
pub mod units;

pub use error::{Error, Result};
pub use num::{Real, C};

pub type C64 = C<f64>;
pub type LevelScheme64 = levels::LevelScheme<f64>;
pub type DipoleSet64 = levels::DipoleSet<f64>;
pub type RelaxationSpec64 = levels::RelaxationSpec<f64>;
pub type Detunings64 = levels::Detunings<f64>;
pub type PacketParams64 = liouville::PacketParams<f64>;
pub type PacketState64 = liouville::PacketState<f64>;
pub type Drives64 = liouville::Drives<f64>;
pub type AnalyticContext64 = analytic::AnalyticContext<f64>;
