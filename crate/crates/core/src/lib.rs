//! Complex-time zeros of the survival amplitude `L(z) = sum_j k_j e^{-E_j z}`
//! of a quenched finite quantum system.
//!
//! * [`amplitude`]: energy distributions and log-domain evaluation of `L`.
//! * [`zeros`]: argument-principle zero finder and zero-set bookkeeping.
//! * [`envelope`]: the dominant-level envelope and its closed-form zeros.
//! * [`spin`]: exact diagonalization of Ising chains with `1/r^alpha` coupling.
//! * [`twoband`]: free-fermion quenches with factorized amplitudes.
//! * [`gaussian`]: the Gaussian-population model and its theta-function form.

pub mod amplitude;
pub mod envelope;
pub mod error;
pub mod gaussian;
pub mod spin;
pub mod twoband;
pub mod zeros;

pub use amplitude::{AmplitudeValue, ComplexTime, EnergyDistribution, SurvivalAmplitude};
pub use envelope::{compute_envelope, Envelope};
pub use error::{Error, Result};
pub use zeros::{find_zeros, Provenance, Rect, SearchWindow, Zero, ZeroSet};
