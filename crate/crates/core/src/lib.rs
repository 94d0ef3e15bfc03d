//! Numerical laboratory for double-phase functionals with a checkerboard
//! weight: log-power N-functions, the saddle-point constructions around the
//! origin, gap/no-gap classification, singularity-removing cutoffs and a
//! finite-element experiment that exhibits the Lavrentiev gap.

pub mod cutoff;
pub mod fem;
pub mod error;
pub mod geometry;
pub mod json;
pub mod orlicz;
pub mod quadrature;
pub mod regime;

pub use error::{Error, Result};
