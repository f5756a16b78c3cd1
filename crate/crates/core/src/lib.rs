//! Matrix-valued Herglotz functions, Krein functions and reflectionless Dirac
//! operators on finite-gap sets.
//!
//! The crate is organised bottom-up:
//!
//! - [`mat2`]: 2×2 complex kernel, eigenstructure, `exp` and the branch-controlled `log`.
//! - [`herglotz`]: M functions, boundary values of the Krein function, the exponential
//!   representation and large-`z` extraction of the potential.
//! - [`finitegap`]: gap sets, Krein profiles, the explicit construction, the trace
//!   formula and the sharp bound on `‖W‖`.
//! - [`dirac`]: an independent route through the differential equation: transfer
//!   matrices, closed-form Weyl functions, Riccati steps and sampling of `W(x)` along the line.

pub mod dirac;
pub mod error;
pub mod extrap;
pub mod finitegap;
pub mod herglotz;
pub mod linear;
pub mod mat2;
pub mod quad;

pub use error::{Error, Result};
pub use finitegap::{GapSet, KreinProfile, PotentialSample, SpherePoint, WeylPair};
pub use herglotz::{KreinSample, LimitSchedule, MFunction};
pub use mat2::ComplexMat2;
