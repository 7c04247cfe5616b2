//! Finite-difference θ-schemes for the odd-order dispersive equation
//! `∂ₜu + ∂ₓ^(2p+1) u = 0` on a periodic grid, with stability analysis,
//! exact periodic references and convergence studies.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initial_data;
pub mod reference;
pub mod stencil;
pub mod timestepper;
pub mod vonneumann;

pub use error::{Error, Result};
pub use grid::{FieldState, GridSpec};
pub use initial_data::InitialDatum;
pub use stencil::{SchemeSpec, StencilKind};
