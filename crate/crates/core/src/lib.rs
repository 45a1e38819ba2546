//! Isotropic random sections of spin and tensor bundles over the sphere and
//! the ball: spin-weighted harmonic transforms, Gaussian sampling from power
//! spectra, E/B and Stokes fields, spin ladder operators and lensing
//! distortion fields, representation calculus for SO(3)/O(3), and radial
//! frames for fields on the ball.

pub mod error;
pub mod harmonics;
pub mod io;
pub mod ladder;
mod linalg;
mod parallel;
pub mod quadrature;
pub mod radial;
pub mod randomfield;
pub mod reptheory;
pub mod rng;
pub mod transform;

pub use error::{Error, ErrorKind, Result};
pub use io::SCHEMA_VERSION;
