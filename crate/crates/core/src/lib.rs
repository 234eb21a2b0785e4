//! Inverse scattering transform for the defocusing NLS equation with a
//! self-consistent source on a nonzero background.

// Negated comparisons are used on purpose so NaN fails every guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod evolution;
pub mod glm;
pub mod pipeline;
pub mod potential;
pub mod source_terms;
pub mod spectral;
pub mod verify;
pub mod zakharov_shabat;

pub use error::{Error, Result};
pub use potential::{PotentialField, UniformGrid};
pub use spectral::{BoundaryData, Sheet, SpectralPoint};
