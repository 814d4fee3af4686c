//! Pseudo-spectral laboratory for the weakly damped, forced KdV equation
//!
//! ```text
//! ∂_t u + ∂_x³ u + ½∂_x(u²) + γu = f,   x ∈ R/2πZ,
//! ```
//!
//! with mean-zero data in negative Sobolev spaces. The crate provides exact
//! band-limited spectral calculus ([`spectral`]), the I-operator and the
//! modified energies built from it ([`imethod`]), exponential time stepping
//! of the full and frequency-split flows ([`dynamics`]), and measured
//! experiment suites with CSV/JSON persistence ([`experiments`]).

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod imethod;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{GridSpec, SobolevIndex, SpectralField};
