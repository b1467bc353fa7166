//! Capacity of analog Gaussian channels observed through sub-Nyquist samplers.
//!
//! A continuous-time Gaussian channel (frequency response `H`, noise power
//! spectral density `S_eta`) is observed through one of three sampler
//! front-ends, each running at an overall rate `f_s`:
//!
//! - a single prefilter followed by uniform sampling,
//! - a bank of `M` filters, each branch sampled at `f_s/M`,
//! - a bank of `M` branches with periodic modulators (period `1/f_q`)
//!   between pre- and post-filters, each branch sampled at `f_s/M`.
//!
//! Sampling below the Nyquist rate folds the spectrum; capacity then depends
//! on how the sampler combines aliased frequency content. This crate computes
//! the resulting Shannon capacity in closed form for all three front-ends,
//! synthesizes capacity-optimal samplers (alias-selection filters and banks,
//! modulation sequences), and builds the linear MMSE reconstruction filters
//! for the same observation model.
//!
//! Everything is spectral-domain and piecewise-constant: fold sums truncate
//! exactly because supports are compact, and midpoint quadrature of
//! piecewise-constant integrands is exact on commensurate grids, so results
//! are reproducible to floating-point accuracy rather than quadrature
//! accuracy.
//!
//! Modules:
//! - [`spectra`]: piecewise-constant spectral functions, frequency grids,
//!   aliased sets, folded SNR.
//! - [`linalg`]: small dense complex-matrix helpers, cyclic-Jacobi Hermitian
//!   eigensolver, PSD inverse square root.
//! - [`waterfill`]: parametric water-filling over parallel Gaussian channels.
//! - [`capacity`]: sampled capacity for the three sampler classes.
//! - [`design`]: capacity-optimal sampler synthesis and achievability checks.
//! - [`mmse`]: Wiener reconstruction filters and MMSE-optimal banks.
//! - [`channels`]: built-in channel models and randomized generators.
//!
//! Capacities are reported in nats (per unit time); unit conversion is a
//! presentation concern left to callers.

// `!(x > 0.0)` is used on purpose for rate/width validation: unlike
// `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channels;
pub mod design;
mod error;
mod exec;
pub mod linalg;
pub mod mmse;
pub mod spectra;
pub mod waterfill;

pub use error::{Error, Result};

/// Relative threshold used everywhere a near-zero denominator, eigenvalue, or
/// Gram matrix must be distinguished from an exact zero.
pub const EPS_INV: f64 = 1e-12;
