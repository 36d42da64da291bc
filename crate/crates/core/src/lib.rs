//! Numerical core for the two-phase interface flow on the line, written
//! around its adjoint formulation: the multilinear singular integral family,
//! the double layer potential and its shifted inverses, the vorticity-
//! density solve, and the quasilinear interface evolution with an IMEX
//! integrator — together with the oracles and verification harness that
//! certify the exact identities tying them together.
//!
//! Functions live on a truncated line `[-L, L)` sampled at `M` power-of-two
//! nodes and are treated as identically zero outside; all transforms run on
//! a 2x zero-padded circle. See the module docs for the discretization
//! contracts.

pub mod diagnostics;
mod error;
pub mod evolution;
mod grid;
mod params;
pub mod singular;
pub mod solve;
pub mod sobolev;
pub mod spectral;
pub mod window;

pub use error::{Error, Result};
pub use grid::{Grid, SampledFn, FAR_FIELD_TOL};
pub use params::PhysicalParams;
pub use sobolev::{sobolev_norm, wkp_norm, SobolevIndex};
pub use spectral::{derivative, hilbert};
