//! Parametric water-filling over parallel Gaussian channels.
//!
//! Every capacity formula in this crate reduces to the same optimization:
//! given nonnegative channel gains `λ_j` (one per frequency bin, or per
//! (bin, eigen-branch) pair) each carrying the same measure `w`, allocate a
//! power budget `P` to maximize `Σ w·½·log(1 + λ_j·p_j/w)`-style mutual
//! information. The optimum fills power up to a common water level `ν`:
//!
//! ```text
//! p_j = [ν − 1/λ_j]^+,   Σ_j w·p_j = P,   C = Σ_j w·½·log⁺(ν·λ_j)
//! ```
//!
//! with `[x]^+ = max{x, 0}` and `log⁺x = max{ln x, 0}`. One global level is
//! shared by all entries — pooled allocation, exactly matching the single
//! parametric power constraint of the continuous-time formulas. Capacity is
//! returned in nats.

use crate::spectra::{approx_gcd, SpectralFunction};
use crate::{Error, Result};

/// Parallel Gaussian channels: nonnegative gains plus the measure carried by
/// each entry (`Δf` for spectral channels, `1/T` for the discrete-time
/// validation model).
#[derive(Debug, Clone)]
pub struct ParallelChannelSet {
    gains: Vec<f64>,
    weight: f64,
}

impl ParallelChannelSet {
    /// Build a channel set; gains must be finite and nonnegative, the
    /// per-entry weight positive.
    pub fn new(gains: Vec<f64>, weight: f64) -> Result<Self> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::invalid_shape(format!(
                "per-entry weight must be positive, got {weight}"
            )));
        }
        for (j, &g) in gains.iter().enumerate() {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::invalid_shape(format!(
                    "channel gain {j} must be finite and nonnegative, got {g}"
                )));
            }
        }
        Ok(Self { gains, weight })
    }

    /// Channel gains.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Measure per entry.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Solved power allocation.
#[derive(Debug, Clone)]
pub struct WaterfillSolution {
    /// Water level `ν`.
    pub nu: f64,
    /// Capacity `Σ w·½·log⁺(ν·λ_j)` in nats.
    pub capacity: f64,
    /// Per-entry allocated power `[ν − 1/λ_j]^+`, same order as the gains.
    pub powers: Vec<f64>,
}

/// Solve the water-filling problem for a power budget `p ≥ 0`.
///
/// `p = 0` returns zero capacity with all powers zero. A positive budget
/// with no positive gain is [`Error::NoUsableChannel`]. The level is found
/// by bisection on the monotone allocated-power function and then polished
/// with the closed form on the discovered active set, so power conservation
/// holds to machine precision rather than bisection tolerance.
pub fn waterfill(channels: &ParallelChannelSet, p: f64) -> Result<WaterfillSolution> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::invalid_shape(format!(
            "power budget must be finite and nonnegative, got {p}"
        )));
    }
    let w = channels.weight;
    let gains = &channels.gains;
    let lambda_max = gains.iter().cloned().fold(0.0_f64, f64::max);

    if p == 0.0 {
        let nu = if lambda_max > 0.0 {
            1.0 / lambda_max
        } else {
            0.0
        };
        return Ok(WaterfillSolution {
            nu,
            capacity: 0.0,
            powers: vec![0.0; gains.len()],
        });
    }
    if lambda_max <= 0.0 {
        return Err(Error::NoUsableChannel { p });
    }

    let n_pos = gains.iter().filter(|&&g| g > 0.0).count();
    let allocated = |nu: f64| -> f64 {
        w * gains
            .iter()
            .filter(|&&g| g > 0.0)
            .map(|&g| (nu - 1.0 / g).max(0.0))
            .sum::<f64>()
    };

    // Bracket the level. The seeded upper end can undershoot for skewed gain
    // profiles, so expand geometrically; `1/λ_max + p/w + 1` certainly
    // over-allocates through the best entry alone, bounding the expansion.
    let lo = 1.0 / lambda_max;
    let mut hi = lo + p / (w * n_pos as f64) + 1.0;
    while allocated(hi) < p {
        hi = lo + 2.0 * (hi - lo);
    }

    let mut a = lo;
    let mut b = hi;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let got = allocated(mid);
        if ((got - p) / p).abs() <= 1e-10 {
            a = mid;
            b = mid;
            break;
        }
        if got < p {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut nu = 0.5 * (a + b);

    // Closed-form polish: on the active set, Σ w·(ν − 1/λ) = p is linear in ν.
    let active: Vec<f64> = gains
        .iter()
        .filter(|&&g| g > 0.0 && g > 1.0 / nu)
        .cloned()
        .collect();
    if !active.is_empty() {
        let inv_sum: f64 = active.iter().map(|&g| 1.0 / g).sum();
        let nu_exact = (p / w + inv_sum) / active.len() as f64;
        // Accept only if the polished level keeps exactly the same set active.
        let consistent = gains.iter().all(|&g| {
            let was_active = g > 0.0 && g > 1.0 / nu;
            let is_active = g > 0.0 && g * nu_exact > 1.0;
            was_active == is_active
        });
        if consistent {
            nu = nu_exact;
        }
    }

    let powers: Vec<f64> = gains
        .iter()
        .map(|&g| {
            if g > 0.0 {
                (nu - 1.0 / g).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let capacity = w * gains
        .iter()
        .map(|&g| {
            let x = nu * g;
            if x > 1.0 {
                0.5 * x.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    Ok(WaterfillSolution {
        nu,
        capacity,
        powers,
    })
}

/// Capacity of the analog channel itself (sampling at or above the Nyquist
/// rate with ideal prefiltering): water-fill the power budget over the gains
/// `|H(f)|²/S_eta(f)` across the whole channel support.
///
/// The channel and noise tables may use different bin layouts; the merged
/// breakpoints are refined onto a uniform grid whose step is the common
/// divisor of all segment widths, keeping midpoint quadrature exact
/// ([`Error::IncommensurateRates`] when no such step exists). A channel that
/// is identically zero yields capacity `0` for any budget; a frequency with
/// signal but no noise is rejected as unbounded SNR.
pub fn nyquist_capacity(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    p: f64,
) -> Result<WaterfillSolution> {
    let (gains, delta) = nyquist_gain_table(h, s_eta)?;
    if !gains.iter().any(|&g| g > 0.0) {
        return Ok(WaterfillSolution {
            nu: 0.0,
            capacity: 0.0,
            powers: vec![0.0; gains.len()],
        });
    }
    waterfill(&ParallelChannelSet::new(gains, delta)?, p)
}

/// Uniform-gain table for [`nyquist_capacity`]: the gains `|H|²/S_eta` on a
/// common refinement grid of step `delta` spanning the support hull.
pub fn nyquist_gain_table(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
) -> Result<(Vec<f64>, f64)> {
    let lo = h.support_lo().min(s_eta.support_lo());
    let hi = h.support_hi().max(s_eta.support_hi());

    let mut cuts = vec![lo, hi];
    for fun in [h, s_eta] {
        let (start, _) = fun.support();
        for m in 0..=fun.values().len() {
            let b = start + m as f64 * fun.bin_width();
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));

    let widths: Vec<f64> = cuts.windows(2).map(|s| s[1] - s[0]).collect();
    let delta = approx_gcd(&widths).ok_or_else(|| {
        Error::incommensurate(
            "channel and noise bin layouts share no common refinement step".to_string(),
        )
    })?;

    let n = ((hi - lo) / delta).round() as usize;
    let mut gains = Vec::with_capacity(n);
    for j in 0..n {
        let f = lo + (j as f64 + 0.5) * delta;
        let h2 = h.abs2(f);
        let eta = s_eta.real_at(f);
        if h2 > 0.0 && eta <= 0.0 {
            return Err(Error::invalid_shape(format!(
                "unbounded SNR: channel response is nonzero at f = {f} where the noise PSD vanishes"
            )));
        }
        gains.push(if h2 > 0.0 { h2 / eta } else { 0.0 });
    }
    Ok((gains, delta))
}
