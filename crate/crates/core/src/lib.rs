//! Linear stability of ion-irradiated amorphous films whose beam-induced
//! stress enters as an anisotropic plastic flow.
//!
//! The crate evaluates the flat-film steady state, the full and longwave
//! dispersion relations, and the most unstable ripple wavelength and phase
//! velocity. Two independent routes to the growth rate check the closed
//! form: [`bvp`] assembles the boundary-value solution term by term, and
//! [`oracle`] solves the linearized Stokes problem by Chebyshev collocation.
//! [`ebf`] implements the effective-body-force model for comparison, and
//! [`io`] backs the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod dispersion;
pub mod ebf;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod units;

pub use error::{Error, Result};
