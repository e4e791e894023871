//! Spectral and scattering computations for the one-dimensional massive
//! Dirac operator with a point interaction at the origin.
//!
//! A self-adjoint extension is described by an admissible pair `(C, D)` of
//! 2x2 matrices acting on the boundary values at `x = 0`. From it the crate
//! computes bound states in the gap `(-m, m)`, the on-shell matrix `T0` and
//! the scattering matrix on the continuum, resolvent kernels, the action of
//! the wave operator in the upside-down representation, and the winding
//! number of the boundary loop, which equals minus the bound-state count.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cli;
pub mod error;
pub mod extensions;
pub mod scattering;
pub mod spectrum;
pub mod tol;
pub mod topology;
pub mod waveop;
pub mod weyl_green;

pub use algebra::{Complex, LaurentPoly, Mat2C, Vec2};
pub use error::{Error, Result};
pub use extensions::{BoundaryPair, PairClass};
pub use scattering::{Branch, ContinuumPoint, FreeFiber};
pub use spectrum::{Eigenvalue, SpectralReport};
pub use topology::{BoundaryLoop, Edge, ExtReal, LevinsonReport};
pub use waveop::{GridFunction, GridSpec};
pub use weyl_green::{Energy, EnergyPoint, Side};
