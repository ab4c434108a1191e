//! Multi-band BCS superconductivity toolkit.
//!
//! Computes critical temperatures, gap functions, and inter-band enhancement
//! constants for systems of parabolic bands coupled by radial pair
//! potentials. The workhorse objects are the Fermi-surface interaction
//! operator (per angular-momentum channel) and the symmetrized
//! Birman–Schwinger operator on a clustered momentum grid; the critical
//! temperature is located by bisection on its lowest eigenvalue.

pub mod analysis;
pub mod diagnostics;
pub mod error;
pub mod fermi_operator;
pub mod gap;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{build_model, BandDispersion, InteractionMatrix, ModelConfig, ModelInstance, RadialPotential};
