//! Brute-force cross-check of the spectral capacity and reconstruction
//! results on a finite discrete-time model.
//!
//! The spectral crate computes capacities and Wiener reconstructions in
//! closed form, bin by bin. This crate rebuilds the same observation model
//! with none of that machinery: the continuous-time convolutions are
//! replaced by a dense matrix acting on input samples spaced `Δ = T̃_s/k`
//! apart, the sampled noise keeps its exact continuous-time covariance, and
//! capacity comes from whitening plus a direct eigendecomposition of the
//! resulting finite MIMO channel. As the observation window (`n` samples
//! per branch) grows, the finite capacity converges to the closed forms —
//! the two routes share no intermediate results, so agreement validates
//! both.
//!
//! Modules:
//! - [`model`]: the finite model — block-Toeplitz channel matrix from
//!   impulse-response taps or directly from spectra, exact sampled-noise
//!   covariance, and a modulated-sampler variant.
//! - [`capacity`]: whitened gains and water-filled capacity of the finite
//!   model, in nats per unit time.
//! - [`mc`]: Monte-Carlo check of the Wiener reconstruction's orthogonality
//!   principle on simulated Gaussian draws.
//!
//! All randomness is seeded explicitly; identical seeds reproduce identical
//! statistics bit-for-bit regardless of thread count.

pub mod capacity;
mod exec;
pub mod mc;
pub mod model;

pub use subnyq_core::{Error, Result};
