//! Command-line driver for the sub-Nyquist capacity toolkit.
//!
//! A job is described by one JSON config (channel, sampler, power budget,
//! rates) and run through one of five subcommands:
//!
//! - `capacity`: closed-form capacity at a single sampling rate,
//! - `design`: synthesize the capacity-optimal sampler and print it as a
//!   sampler config,
//! - `sweep`: capacity across a list or range of rates,
//! - `mmse`: time-averaged error of linear reconstruction from the samples,
//! - `oracle`: finite-window numerical cross-check of the closed form.
//!
//! Output tables are CSV with pinned headers and 17-significant-digit
//! floats, so files round-trip bit for bit and repeated runs are
//! byte-identical. Exit codes: 0 success, 2 configuration problem,
//! 3 numeric failure.

pub mod config;
pub mod emit;
mod exec;
pub mod run;
