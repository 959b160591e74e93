//! Exact Fourier-Bessel laboratory for Helmholtz transmission scattering by a
//! penetrable unit disk whose wave speed is perturbed by `z` on the disk.

pub mod bounds;
mod error;
pub mod identities;
pub mod modal;
pub mod probe;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
