//! Certified computations on the slit-torus double cover whose Teichmüller
//! geodesic is driven by the continued fraction `alpha = [1, 4, 9, 16, ...]`.
//!
//! The crate is organised bottom-up:
//!
//! * [`interval`]: rational interval arithmetic (the number kernel).
//! * [`cfrac`]: convergents, enclosures of alpha, the slit constant `b`,
//!   and the growth assumptions on the coefficients.
//! * [`flatsurf`]: sheared lattices, the slit surface, the diagonal flow,
//!   saddle connections, systoles, slit curves and their certificates.
//! * [`dynamics`]: the rotation with its Z/2 skew extension and Birkhoff traces.
//! * [`witness`]: the per-stage pipeline and the verdict checks.
//! * [`cli`]: configuration, caching and report emission for the binary.

pub mod cfrac;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod flatsurf;
pub mod interval;
pub mod witness;

pub use error::{Error, Result};
pub use interval::{Interval, Rational};
