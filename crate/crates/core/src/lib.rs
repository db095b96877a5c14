//! Ginzburg-Landau vortices on the unit disc with a step pinning term.
//!
//! The pinning potential equals 1 on the disc of radius R and `a` on the
//! surrounding annulus. The crate computes the pinned density profile, the
//! weighted London field and its vortex-attractor set, minimizes the full
//! functional under an applied field, detects vortices, and evaluates the
//! Green's kernel, the vortex test configuration and the renormalized energy.

pub mod error;
pub mod gl2d;
pub mod green;
pub mod london;
pub mod model;
pub mod profile1d;
mod ringsolve;
pub mod vortices;

pub use error::{Error, Result};
