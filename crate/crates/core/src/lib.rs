//! Paradifferential calculus on the circle and numerical experiments for
//! dispersive Burgers-type flows.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod gauge;
pub mod paracomp;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use spectral::{PeriodicGrid, SpectralFunction, C64};
pub use symbol::{CutoffFunction, Symbol};
