//! Sampled channel capacity for the three sampler front-ends.
//!
//! All three computations share the same skeleton. Uniform sampling at rate
//! `f_r` maps each frequency `f` in the fundamental interval
//! `[-f_r/2, f_r/2)` to the finite aliased set `{f − l·f_r}` inside the
//! channel/noise support. Per frequency bin the sampler is a small MIMO
//! system from aliases to branches; whitening the sampled noise and
//! eigensolving the resulting Hermitian matrix yields per-bin parallel
//! channel gains, which are pooled across bins (and branches) into a single
//! water-filling problem with one global water level.
//!
//! - Single filter: the 1×K system collapses to the scalar folded SNR.
//! - Filter bank (`M` branches at `f_s/M`): branch filter matrix `F_s` with
//!   noise-weighted entries `S_i(f−l·f_s/M)·√S_eta(...)`, channel diagonal
//!   `F_h = diag H/√S_eta`; gains are eigenvalues of
//!   `W·F_s·F_hF_h*·F_s*·W*` with `W = (F_sF_s*)^{−1/2}`.
//! - Modulation bank (periodic modulators with coefficients `c_i^u` at
//!   spacing `f_q`, rational rate tie `a·M/f_s = b/f_q`): the same structure
//!   on the finer alias spacing `f_q/b` with `a` phase-shifted rows per
//!   branch, giving `a·M` gains per bin.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::exec;
use crate::linalg::{hermitian_eig, inv_sqrt_psd, CMatrix};
use crate::spectra::{
    aliased_set, check_commensurate, folded_snr, support_hull, FrequencyGrid, SpectralFunction,
};
use crate::waterfill::{waterfill, ParallelChannelSet, WaterfillSolution};
use crate::{Error, Result};

// ============================================================================
// Sampler descriptions
// ============================================================================

/// One branch of a modulated sampler: pre-filter `P_i`, periodic modulator
/// with Fourier coefficients `c_i^u` (period `1/f_q`), post-filter `S_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationBranch {
    /// Pre-modulation filter `P_i(f)`.
    pub pre_filter: SpectralFunction,
    /// Modulator Fourier coefficients `u → c_i^u`; finitely many entries.
    pub coeffs: BTreeMap<i64, Complex64>,
    /// Post-modulation filter `S_i(f)` ahead of the sampler.
    pub post_filter: SpectralFunction,
}

/// Modulated filter bank: `M` branches, modulation rate `f_q`, and the
/// coprime pair `(a, b)` tying the rates together via `a·M/f_s = b/f_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationBankSpec {
    /// Per-branch filters and modulator coefficients.
    pub branches: Vec<ModulationBranch>,
    /// Modulation rate (the modulators have period `1/f_q`).
    pub f_q: f64,
    /// Numerator of the reduced rate ratio.
    pub a: u32,
    /// Denominator of the reduced rate ratio.
    pub b: u32,
}

/// Sampler front-end description.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerSpec {
    /// One prefilter followed by uniform sampling at `f_s`.
    SingleFilter {
        /// The prefilter `S(f)`.
        s: SpectralFunction,
    },
    /// `M` branch filters, each branch sampled at `f_s/M`.
    FilterBank {
        /// The branch filters `S_i(f)`.
        filters: Vec<SpectralFunction>,
    },
    /// Modulated filter bank, each branch sampled at `f_s/M`.
    ModulationBank(ModulationBankSpec),
}

/// Phase convention for the modulated symbol rows. Both describe the same
/// physical sampler — they differ by a unitary diagonal row scaling, so the
/// per-bin eigenvalues (and hence capacity) agree; a test asserts this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModPhaseConvention {
    /// Rows `l ∈ {1..a}`, phase `exp(−j2π·l·(M/f_s)·x)`.
    OneBased,
    /// Rows `l ∈ {0..a−1}`, phase `exp(+j2π·l·(M/f_s)·x)`.
    ZeroBased,
}

// ============================================================================
// Folded gain tables
// ============================================================================

/// Aliased frequencies folding onto one fundamental-interval frequency,
/// together with their channel gains: column `v` lives at
/// `freqs[v] = base_f − indices[v]·spacing` and carries the gain
/// `gains[v] = |H|²/S_eta` and noise level `noise[v] = S_eta` there.
///
/// Aliases where channel and noise both vanish carry no signal and no noise
/// and are dropped; an alias with signal but no noise is rejected as
/// unbounded SNR.
#[derive(Debug, Clone)]
pub struct FoldedGains {
    /// Fundamental-interval frequency the aliases fold onto.
    pub base_f: f64,
    /// Alias spacing.
    pub spacing: f64,
    /// Kept alias indices, ascending.
    pub indices: Vec<i64>,
    /// Aliased frequencies, one per kept index.
    pub freqs: Vec<f64>,
    /// Channel gains `|H(freq)|²/S_eta(freq)`.
    pub gains: Vec<f64>,
    /// Noise PSD values `S_eta(freq)`.
    pub noise: Vec<f64>,
}

/// Build the folded gain table at `f` for alias spacing `spacing`.
pub fn folded_gain_table(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spacing: f64,
    f: f64,
) -> Result<FoldedGains> {
    let hull = support_hull(h, s_eta);
    let set = aliased_set(f, spacing, hull);
    let mut indices = Vec::new();
    let mut freqs = Vec::new();
    let mut gains = Vec::new();
    let mut noise = Vec::new();
    for (l, freq) in set.iter_freqs() {
        let h2 = h.abs2(freq);
        let eta = s_eta.real_at(freq);
        if h2 == 0.0 && eta == 0.0 {
            continue; // no signal and no noise: the alias carries nothing
        }
        if h2 > 0.0 && eta <= 0.0 {
            return Err(Error::invalid_shape(format!(
                "unbounded SNR: channel response nonzero at f = {freq} where the noise PSD vanishes"
            )));
        }
        indices.push(l);
        freqs.push(freq);
        gains.push(if h2 > 0.0 { h2 / eta } else { 0.0 });
        noise.push(eta);
    }
    Ok(FoldedGains {
        base_f: f,
        spacing,
        indices,
        freqs,
        gains,
        noise,
    })
}

// ============================================================================
// Per-bin eigenvalue spectra
// ============================================================================

/// Eigenvalues of one frequency bin of a sampled MIMO system.
#[derive(Debug, Clone)]
pub struct BinEigenvalues {
    /// Bin center frequency in the fundamental interval.
    pub f: f64,
    /// Realized gains after sampling: eigenvalues of the whitened symbol
    /// matrix, descending (length = number of branches, or `a·M` for a
    /// modulated bank).
    pub lambda: Vec<f64>,
    /// Folded channel gains `|H|²/S_eta` over the full aliased set,
    /// descending — the ceiling no sampler at this rate can exceed.
    pub gains: Vec<f64>,
}

pub(crate) fn check_grid_span(grid: &FrequencyGrid, span: f64) -> Result<()> {
    let tol = 1e-9 * span;
    if (grid.f_lo() + span / 2.0).abs() > tol || (grid.f_hi() - span / 2.0).abs() > tol {
        return Err(Error::incommensurate(format!(
            "grid [{}, {}) must span the fundamental interval ±{}",
            grid.f_lo(),
            grid.f_hi(),
            span / 2.0,
        )));
    }
    Ok(())
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Per-bin eigenvalues for a filter bank of `m` branches, each sampled at
/// `f_s/m`, on a grid spanning `[-f_s/2m, f_s/2m)`.
pub fn filterbank_spectrum(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    f_s: f64,
    m: usize,
    grid: &FrequencyGrid,
) -> Result<Vec<BinEigenvalues>> {
    if m == 0 || filters.len() != m {
        return Err(Error::invalid_shape(format!(
            "filter bank needs m ≥ 1 branch filters, got m = {m} with {} filters",
            filters.len()
        )));
    }
    if !(f_s > 0.0) {
        return Err(Error::invalid_shape(format!(
            "sampling rate must be positive, got {f_s}"
        )));
    }
    let spacing = f_s / m as f64;
    check_grid_span(grid, spacing)?;
    check_commensurate(h, grid, spacing, "channel")?;
    check_commensurate(s_eta, grid, spacing, "noise PSD")?;
    for (i, s) in filters.iter().enumerate() {
        check_commensurate(s, grid, spacing, &format!("branch filter {i}"))?;
    }

    let bins = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        filterbank_bin(h, s_eta, filters, spacing, f)
    });
    bins.into_iter().collect()
}

/// Whiten the symbol matrix against its own noise Gram, shape by the folded
/// channel gains, and return the realized eigenvalues padded to `out_rows`.
///
/// Rows with (relatively) zero norm are branches that observe nothing in
/// this bin — a selection bank whose passband lives elsewhere. They carry
/// neither signal nor noise, so they are dropped before whitening and their
/// eigenvalues are exact zeros. Whitening still fails with
/// [`Error::SingularWhitening`] when two *observing* rows are linearly
/// dependent (for example duplicated branch filters).
fn whitened_gains(symbol: &CMatrix, gains: &[f64], out_rows: usize) -> Result<Vec<f64>> {
    let norms = symbol.row_norms_sqr();
    let max_norm = norms.iter().fold(0.0_f64, |a, &b| a.max(b));
    let kept: Vec<usize> = (0..symbol.nrows())
        .filter(|&i| norms[i] > crate::EPS_INV * max_norm && norms[i] > 0.0)
        .collect();
    if kept.is_empty() {
        return Ok(vec![0.0; out_rows]);
    }
    let reduced = if kept.len() == symbol.nrows() {
        symbol.clone()
    } else {
        symbol.select_rows(&kept)
    };
    let whitener = inv_sqrt_psd(&reduced.gram())?;
    let roots: Vec<f64> = gains.iter().map(|&g| g.sqrt()).collect();
    let shaped = whitener.mul(&reduced).scaled_cols_real(&roots);
    let eig = hermitian_eig(&shaped.gram())?;
    let mut lambda: Vec<f64> = eig.values.into_iter().map(|l| l.max(0.0)).collect();
    lambda.resize(out_rows, 0.0);
    Ok(lambda)
}

fn filterbank_bin(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    spacing: f64,
    f: f64,
) -> Result<BinEigenvalues> {
    let table = folded_gain_table(h, s_eta, spacing, f)?;
    let m = filters.len();
    let k = table.indices.len();
    if k == 0 {
        return Ok(BinEigenvalues {
            f,
            lambda: vec![0.0; m],
            gains: Vec::new(),
        });
    }
    // Noise-weighted filter matrix (branches × aliases).
    let f_s_mat = CMatrix::from_fn(m, k, |i, v| {
        filters[i].eval(table.freqs[v]) * table.noise[v].sqrt()
    });
    Ok(BinEigenvalues {
        f,
        lambda: whitened_gains(&f_s_mat, &table.gains, m)?,
        gains: sorted_desc(table.gains),
    })
}

/// Per-bin eigenvalues for a modulated filter bank with the default
/// (one-based) phase convention. Grid spans `[-f_q/2b, f_q/2b)`, which under
/// the rate tie equals `[-f_s/2aM, f_s/2aM)`.
pub fn modbank_spectrum(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    f_s: f64,
    grid: &FrequencyGrid,
) -> Result<Vec<BinEigenvalues>> {
    modbank_spectrum_with_convention(h, s_eta, spec, f_s, grid, ModPhaseConvention::OneBased)
}

/// [`modbank_spectrum`] with an explicit row-phase convention.
pub fn modbank_spectrum_with_convention(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    f_s: f64,
    grid: &FrequencyGrid,
    convention: ModPhaseConvention,
) -> Result<Vec<BinEigenvalues>> {
    validate_modbank(spec, f_s)?;
    let m = spec.branches.len();
    let spacing = spec.f_q / spec.b as f64;
    check_grid_span(grid, spacing)?;
    check_commensurate(h, grid, spacing, "channel")?;
    check_commensurate(s_eta, grid, spacing, "noise PSD")?;
    for (i, br) in spec.branches.iter().enumerate() {
        check_commensurate(&br.pre_filter, grid, spacing, &format!("pre-filter {i}"))?;
        check_commensurate(&br.post_filter, grid, spacing, &format!("post-filter {i}"))?;
    }
    // Modulation shifts by u·f_q = u·b·spacing keep bins aligned automatically.

    let t_tilde = m as f64 / f_s; // per-branch sampling period M·T_s
    let bins = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        modbank_bin(h, s_eta, spec, spacing, t_tilde, convention, f)
    });
    bins.into_iter().collect()
}

fn validate_modbank(spec: &ModulationBankSpec, f_s: f64) -> Result<()> {
    if spec.branches.is_empty() {
        return Err(Error::invalid_shape("modulated bank has no branches"));
    }
    if spec.a == 0 || spec.b == 0 {
        return Err(Error::incommensurate(format!(
            "rate ratio integers must be positive, got a = {}, b = {}",
            spec.a, spec.b
        )));
    }
    if gcd(spec.a as u64, spec.b as u64) != 1 {
        return Err(Error::incommensurate(format!(
            "(a, b) = ({}, {}) is not in lowest terms",
            spec.a, spec.b
        )));
    }
    if !(spec.f_q > 0.0) || !(f_s > 0.0) {
        return Err(Error::invalid_shape(format!(
            "rates must be positive, got f_s = {f_s}, f_q = {}",
            spec.f_q
        )));
    }
    // a·M·T_s = b·T_q  ⇔  a·M/f_s = b/f_q.
    let m = spec.branches.len() as f64;
    let lhs = spec.a as f64 * m / f_s;
    let rhs = spec.b as f64 / spec.f_q;
    if (lhs - rhs).abs() > 1e-9 * lhs.max(rhs) {
        return Err(Error::incommensurate(format!(
            "rate tie violated: a·M/f_s = {lhs} but b/f_q = {rhs}"
        )));
    }
    for (i, br) in spec.branches.iter().enumerate() {
        if br.coeffs.is_empty() {
            return Err(Error::invalid_shape(format!(
                "branch {i} modulator has no Fourier coefficients"
            )));
        }
    }
    Ok(())
}

fn modbank_bin(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    spacing: f64,
    t_tilde: f64,
    convention: ModPhaseConvention,
    f: f64,
) -> Result<BinEigenvalues> {
    let table = folded_gain_table(h, s_eta, spacing, f)?;
    let m = spec.branches.len();
    let a = spec.a as usize;
    let k = table.indices.len();
    if k == 0 {
        return Ok(BinEigenvalues {
            f,
            lambda: vec![0.0; a * m],
            gains: Vec::new(),
        });
    }
    // Stacked symbol matrix: a rows per branch, one column per alias.
    let mut f_eta = CMatrix::zeros(a * m, k);
    for (alpha, br) in spec.branches.iter().enumerate() {
        for (v, &phi_v) in table.freqs.iter().enumerate() {
            let weight = br.pre_filter.eval(phi_v) * table.noise[v].sqrt();
            if weight.norm_sqr() == 0.0 {
                continue;
            }
            for row in 0..a {
                // x_{u,v} = φ_v − u·f_q is the frequency the modulator takes
                // the content from; the row phase advances with it.
                let (l_eff, sign) = match convention {
                    ModPhaseConvention::OneBased => ((row + 1) as f64, -1.0),
                    ModPhaseConvention::ZeroBased => (row as f64, 1.0),
                };
                let mut acc = Complex64::new(0.0, 0.0);
                for (&u, &c_u) in br.coeffs.iter() {
                    let x = phi_v - u as f64 * spec.f_q;
                    let s_val = br.post_filter.eval(x);
                    if s_val.norm_sqr() == 0.0 {
                        continue;
                    }
                    let phase = Complex64::from_polar(
                        1.0,
                        sign * 2.0 * std::f64::consts::PI * l_eff * t_tilde * x,
                    );
                    acc += c_u * s_val * phase;
                }
                f_eta.set(alpha * a + row, v, weight * acc);
            }
        }
    }
    Ok(BinEigenvalues {
        f,
        lambda: whitened_gains(&f_eta, &table.gains, a * m)?,
        gains: sorted_desc(table.gains),
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ============================================================================
// Capacity operations
// ============================================================================

/// Pool per-bin eigenvalues into one water-filling problem (weight = grid
/// step) and solve for the budget `p`. All realized gains across bins and
/// branches share a single water level.
pub fn capacity_from_bins(
    bins: &[BinEigenvalues],
    delta: f64,
    p: f64,
) -> Result<WaterfillSolution> {
    let gains: Vec<f64> = bins.iter().flat_map(|b| b.lambda.iter().copied()).collect();
    waterfill(&ParallelChannelSet::new(gains, delta)?, p)
}

/// Capacity (nats per unit time) of a single prefilter `s` followed by
/// uniform sampling at `f_s`, with power budget `p`, on a grid spanning
/// `[-f_s/2, f_s/2)`: water-fill over the per-bin folded SNR.
pub fn capacity_single_filter(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s: &SpectralFunction,
    f_s: f64,
    p: f64,
    grid: &FrequencyGrid,
) -> Result<WaterfillSolution> {
    let gains = single_filter_gains(h, s_eta, s, f_s, grid)?;
    waterfill(&ParallelChannelSet::new(gains, grid.delta())?, p)
}

/// Folded SNR `γ(f)` of a single prefilter at every bin center of `grid`.
pub fn single_filter_gains(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s: &SpectralFunction,
    f_s: f64,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    if !(f_s > 0.0) {
        return Err(Error::invalid_shape(format!(
            "sampling rate must be positive, got {f_s}"
        )));
    }
    check_grid_span(grid, f_s)?;
    check_commensurate(h, grid, f_s, "channel")?;
    check_commensurate(s_eta, grid, f_s, "noise PSD")?;
    check_commensurate(s, grid, f_s, "prefilter")?;
    let gains = exec::map_indexed(grid.n_bins(), |j| {
        folded_snr(h, s_eta, s, f_s, grid.center(j))
    });
    gains.into_iter().collect()
}

/// Capacity of an `m`-branch filter bank, each branch sampled at `f_s/m`.
pub fn capacity_filterbank(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    f_s: f64,
    m: usize,
    p: f64,
    grid: &FrequencyGrid,
) -> Result<WaterfillSolution> {
    let bins = filterbank_spectrum(h, s_eta, filters, f_s, m, grid)?;
    capacity_from_bins(&bins, grid.delta(), p)
}

/// Capacity of a modulated filter bank at overall rate `f_s`.
pub fn capacity_modbank(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    f_s: f64,
    p: f64,
    grid: &FrequencyGrid,
) -> Result<WaterfillSolution> {
    let bins = modbank_spectrum(h, s_eta, spec, f_s, grid)?;
    capacity_from_bins(&bins, grid.delta(), p)
}
