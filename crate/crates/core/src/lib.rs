//! Resonant energy transfer from a donor to an acceptor pigment through a
//! network of bath states, with a dissipative sink on the acceptor.
//!
//! Energies, rates and frequencies are in cm⁻¹ with ħ = 1; see [`units`] for
//! the conversion of times to picoseconds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fmo;
pub mod io;
pub mod network;
pub mod optimize;
pub mod pipeline;
pub mod quadrature;
pub mod spectral;
pub mod transfer;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
pub use network::{ExcitonNetwork, RateOrdering, SinkParameters};
pub use pipeline::{evaluate_objective, ModelOptions, ParameterVector, ProfilePair};
pub use spectral::{QuadratureWindow, Site, SpectralProfile};
