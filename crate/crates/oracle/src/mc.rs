//! Monte-Carlo check of the orthogonality principle.
//!
//! The Wiener reconstruction is optimal exactly when its error is
//! uncorrelated with every observation: `E[x(t)·ȳ_i(u)] =
//! E[x̂(t)·ȳ_i(u)]`. This module simulates Gaussian input and noise draws
//! on the finite model, reconstructs with the spectral-domain filters
//! `G_i`, and reports the worst and root-mean-square mismatch between the
//! two empirical cross-correlations. With a correct reconstructor the
//! residual is pure sampling noise, `O(1/√trials)`; a mismatched
//! reconstructor leaves a bias that does not shrink with trials.
//!
//! Probes are restricted to the interior halves of the input and output
//! windows: the reconstructor is optimal for the infinite-horizon
//! stationary model, while the finite window truncates the response tails
//! near its edges, leaving an `O(1/n)` deterministic deficit on edge
//! samples that has nothing to do with the orthogonality claim under test.
//!
//! The input grid must resolve the spectra involved: with
//! `1/Δ = k·f_s/M` at least the summed spectral diameters of the input and
//! of the filtered channel, the Riemann sums behind the finite model equal
//! the continuous integrals exactly, and the residual carries no
//! discretization bias at all.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subnyq_core::linalg::{sqrt_psd, CMatrix};
use subnyq_core::mmse::wiener_filter;
use subnyq_core::spectra::{FrequencyGrid, SpectralFunction};
use subnyq_core::{Error, Result};

use crate::exec;
use crate::model::{draw_standard_complex, from_spectra};

/// Trial count and window shape of a Monte-Carlo run.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    /// Output samples per branch.
    pub n: usize,
    /// Input oversampling factor.
    pub k: usize,
    /// Number of independent draws.
    pub trials: usize,
    /// Master seed; per-trial streams derive from it deterministically.
    pub seed: u64,
}

/// Empirical orthogonality residuals.
#[derive(Debug, Clone, Copy)]
pub struct OrthogonalityStats {
    /// Largest cross-correlation mismatch over all probed pairs.
    pub max_residual: f64,
    /// Root-mean-square mismatch over all probed pairs.
    pub rms_residual: f64,
    /// Input-signal standard deviation `√∫S_X` for scale.
    pub signal_std: f64,
    /// Draws actually run.
    pub trials: usize,
    /// Number of `(input sample, branch sample)` pairs probed.
    pub probed_pairs: usize,
}

/// Interior run `[len/4, 3·len/4)` of a window, never empty.
fn interior(len: usize) -> std::ops::Range<usize> {
    let lo = len / 4;
    let hi = (3 * len / 4).max(lo + 1).min(len.max(1));
    lo..hi
}

fn matvec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len(), "matrix-vector dimension mismatch");
    (0..a.nrows())
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &xj) in x.iter().enumerate() {
                acc += a.get(i, j) * xj;
            }
            acc
        })
        .collect()
}

/// Run the orthogonality check with the optimal Wiener reconstructor.
pub fn mc_orthogonality(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    s_x: &SpectralFunction,
    f_s: f64,
    grid: &FrequencyGrid,
    cfg: McConfig,
) -> Result<OrthogonalityStats> {
    let solution = wiener_filter(h, s_eta, filters, s_x, f_s, grid)?;
    mc_orthogonality_with_reconstructor(h, s_eta, filters, s_x, f_s, &solution.g, cfg)
}

/// Run the orthogonality check with an explicit reconstruction bank —
/// deliberately mismatched banks serve as negative controls.
pub fn mc_orthogonality_with_reconstructor(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    s_x: &SpectralFunction,
    f_s: f64,
    g: &[SpectralFunction],
    cfg: McConfig,
) -> Result<OrthogonalityStats> {
    if cfg.trials == 0 {
        return Err(Error::invalid_shape("Monte-Carlo run needs trials ≥ 1"));
    }
    if g.len() != filters.len() {
        return Err(Error::invalid_shape(format!(
            "reconstructor count {} does not match branch count {}",
            g.len(),
            filters.len()
        )));
    }
    let model = from_spectra(h, s_eta, filters, f_s, cfg.n, cfg.k)?;
    let (n, k, m) = (model.n(), model.oversampling(), model.branches());
    let (nk, nm) = (n * k, n * m);
    let delta = model.delta();

    // Input covariance on the Δ grid (Hermitian Toeplitz, exact).
    let x_lags: Vec<Complex64> = (0..nk)
        .map(|l| s_x.inverse_transform_at(l as f64 * delta))
        .collect();
    let k_x = CMatrix::from_fn(nk, nk, |v, v2| {
        if v >= v2 {
            x_lags[v - v2]
        } else {
            x_lags[v2 - v].conj()
        }
    });
    let f_x = sqrt_psd(&k_x)?;
    let f_w = sqrt_psd(model.noise_covariance())?;

    // Reconstruction matrix: x̂(vΔ) = Σ_{i,u} g̃_i((v − u·k)·Δ)·y_i(u).
    let lag_lo = -(((n - 1) * k) as i64);
    let g_lag_count = (2 * n - 1) * k;
    let g_tables: Vec<Vec<Complex64>> = g
        .iter()
        .map(|gi| {
            (0..g_lag_count)
                .map(|j| gi.inverse_transform_at((lag_lo + j as i64) as f64 * delta))
                .collect()
        })
        .collect();
    let recon = CMatrix::from_fn(nk, nm, |v, r| {
        let (i, u) = (r / n, r % n);
        let lag = v as i64 - (u * k) as i64;
        g_tables[i][(lag - lag_lo) as usize]
    });

    // Interior probes only (see module docs).
    let probe_v: Vec<usize> = interior(nk).collect();
    let probe_r: Vec<usize> = (0..m)
        .flat_map(|i| interior(n).map(move |u| i * n + u))
        .collect();
    let n_pairs = probe_v.len() * probe_r.len();

    // Fixed chunk layout keeps the reduction order — and hence the result
    // bits — independent of thread scheduling.
    let n_chunks = cfg.trials.min(64);
    let partials = exec::map_indexed(n_chunks, |c| {
        let lo = c * cfg.trials / n_chunks;
        let hi = (c + 1) * cfg.trials / n_chunks;
        let mut sxy = vec![Complex64::new(0.0, 0.0); n_pairs];
        let mut sxhy = vec![Complex64::new(0.0, 0.0); n_pairs];
        for trial in lo..hi {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            let z_x = draw_standard_complex(&mut rng, nk);
            let z_w = draw_standard_complex(&mut rng, nm);
            let x = matvec(&f_x, &z_x);
            let noise = matvec(&f_w, &z_w);
            let mut y = matvec(model.channel_matrix(), &x);
            for (yv, nv) in y.iter_mut().zip(noise.iter()) {
                *yv += nv;
            }
            let xh = matvec(&recon, &y);
            let mut p = 0;
            for &v in &probe_v {
                for &r in &probe_r {
                    let yb = y[r].conj();
                    sxy[p] += x[v] * yb;
                    sxhy[p] += xh[v] * yb;
                    p += 1;
                }
            }
        }
        (sxy, sxhy)
    });

    let mut sxy = vec![Complex64::new(0.0, 0.0); n_pairs];
    let mut sxhy = vec![Complex64::new(0.0, 0.0); n_pairs];
    for (part_xy, part_xhy) in partials {
        for (acc, v) in sxy.iter_mut().zip(part_xy.iter()) {
            *acc += v;
        }
        for (acc, v) in sxhy.iter_mut().zip(part_xhy.iter()) {
            *acc += v;
        }
    }

    let inv_trials = 1.0 / cfg.trials as f64;
    let mut max_residual = 0.0_f64;
    let mut sum_sqr = 0.0_f64;
    for p in 0..n_pairs {
        let r = ((sxy[p] - sxhy[p]) * inv_trials).norm();
        max_residual = max_residual.max(r);
        sum_sqr += r * r;
    }
    let rms_residual = (sum_sqr / n_pairs.max(1) as f64).sqrt();

    let signal_power: f64 = s_x.values().iter().map(|v| v.re).sum::<f64>() * s_x.bin_width();
    Ok(OrthogonalityStats {
        max_residual,
        rms_residual,
        signal_std: signal_power.max(0.0).sqrt(),
        trials: cfg.trials,
        probed_pairs: n_pairs,
    })
}
