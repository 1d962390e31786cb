//! Structure-preserving finite-volume simulation of a thin viscous film
//! carrying an insoluble surfactant, with the surface-tension regularizations
//! used to construct nonnegative weak solutions and a diagnostics suite that
//! measures conservation, dissipation, positivity and embedding bounds.

pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod interp;
pub mod newton;
pub mod quadrature;
pub mod regularize;
pub mod solver;
pub mod tension;

pub use error::{Error, Result};
