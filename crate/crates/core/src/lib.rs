//! Linearized Gaussian dynamics of two optically trapped dielectric objects
//! (tethered microdisks or levitated nanospheres) sharing a three-mode
//! Fabry–Pérot cavity.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] turns a physical description into rates and couplings.
//! * [`meanfield`] solves the classical coherent amplitudes that define the
//!   working point of the linearization.
//! * [`dynamics`] builds drift/diffusion matrices, checks stability, solves
//!   the steady-state Lyapunov equation and integrates the covariance under
//!   time-modulated drives.
//! * [`gaussian`] analyses covariance matrices (symplectic spectra,
//!   logarithmic negativity, phonon numbers).
//! * [`effective`] is the adiabatically eliminated mechanical model.
//! * [`readout`] maps mechanical covariances to probe-mode output moments and
//!   back.
//! * [`scenario`] and [`pipeline`] glue everything into the batch runs used by
//!   the command line front end.

// `!(x > 0.0)` rejects NaN along with non-positive values; mode and object
// indices address several parallel arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod gaussian;
pub mod integrate;
pub mod meanfield;
pub mod model;
pub mod pipeline;
pub mod rates;
pub mod readout;
pub mod scenario;

pub use error::{Error, Result};
