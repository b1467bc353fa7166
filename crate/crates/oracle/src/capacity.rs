//! Water-filled capacity of the finite model.
//!
//! Whiten the observation with the inverse square root of the noise
//! covariance, eigendecompose the whitened channel Gram matrix, and
//! water-fill the resulting parallel channels. The per-entry gains are the
//! eigenvalues divided by `Δ` and the water-filling measure per entry is
//! `1/T` (`T = n·T̃_s`), so the continuous-time power constraint
//! `(1/T)∫|x|² ≤ P` maps onto the discrete budget and the result comes out
//! in nats per unit time, directly comparable to the closed forms.

use subnyq_core::linalg::{hermitian_eig, inv_sqrt_psd};
use subnyq_core::waterfill::{waterfill, ParallelChannelSet};
use subnyq_core::Result;

use crate::model::DiscreteModel;

/// Eigenvalue gains of the whitened finite channel, scaled by `1/Δ`
/// (descending order, negatives from eigensolver rounding clamped to zero).
///
/// Errors with [`subnyq_core::Error::SingularWhitening`] when the noise
/// covariance is singular — the branch filters then do not produce
/// right-invertible observations.
pub fn whitened_gains(model: &DiscreteModel) -> Result<Vec<f64>> {
    let w = inv_sqrt_psd(model.noise_covariance())?;
    let b = w.mul(model.channel_matrix());
    let eig = hermitian_eig(&b.gram())?;
    Ok(eig
        .values
        .iter()
        .map(|&l| (l / model.delta()).max(0.0))
        .collect())
}

/// Capacity of the finite model in nats per unit time for input power
/// budget `p`.
///
/// A channel matrix that is exactly zero observes nothing and yields zero
/// capacity for any budget.
pub fn finite_capacity(model: &DiscreteModel, p: f64) -> Result<f64> {
    let gains = whitened_gains(model)?;
    if gains.iter().all(|&g| g == 0.0) {
        return Ok(0.0);
    }
    let set = ParallelChannelSet::new(gains, 1.0 / model.window())?;
    Ok(waterfill(&set, p)?.capacity)
}
