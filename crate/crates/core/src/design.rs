//! Capacity-optimal sampler design.
//!
//! Under sub-Nyquist sampling the folded aliases compete for the sampler's
//! limited observation space, so the optimal front-ends are *selection*
//! structures: per frequency bin, pass the alias with the strongest channel
//! gain `|H|²/S_eta` and suppress the rest.
//!
//! - [`optimal_prefilter`]: one branch, keep the best alias per bin.
//! - [`optimal_filterbank`]: `m` branches, branch `k` keeps the `k`-th best.
//! - [`modbank_upper_bound`]: rate-tied bound no modulated bank can exceed —
//!   the top `a·M` folded gains at spacing `f_q/b` per bin.
//! - [`design_modulation_sequence`]: a single-branch modulated sampler whose
//!   periodic modulator shifts the `k` best spectral subbands onto disjoint
//!   images, achieving the `k`-branch selection-bank capacity with one
//!   physical branch.
//! - [`landau_check`]: necessary aliasing-count condition for a bank of `m`
//!   branches at total rate `f_s` to be able to separate the channel's
//!   active spectral support.
//!
//! Ties between equally strong aliases (within `1e-12` relative) are broken
//! deterministically toward the alias closest to the fundamental interval:
//! smallest `|l|` first, then smallest signed `l`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::capacity::{
    capacity_from_bins, check_grid_span, folded_gain_table, BinEigenvalues, FoldedGains,
    ModulationBankSpec, ModulationBranch,
};
use crate::exec;
use crate::spectra::{
    check_commensurate, support_hull, FrequencyGrid, SpectralFunction, SpectrumKind,
};
use crate::waterfill::{waterfill, ParallelChannelSet, WaterfillSolution};
use crate::{Error, Result, EPS_INV};

// ============================================================================
// Alias ranking
// ============================================================================

/// Order the aliases of a folded gain table by gain, descending, with the
/// deterministic tie-break described in the module docs. Returns positions
/// into the table's parallel arrays.
fn ranked_aliases(table: &FoldedGains) -> Vec<usize> {
    let n = table.gains.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| table.gains[j].partial_cmp(&table.gains[i]).unwrap());
    // Re-order groups of (relatively) equal gains by alias distance so the
    // choice does not depend on enumeration order.
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let g0 = table.gains[order[start]];
        let mut end = start + 1;
        while end < n && (g0 - table.gains[order[end]]) <= EPS_INV * g0 {
            end += 1;
        }
        let mut group: Vec<usize> = order[start..end].to_vec();
        group.sort_by_key(|&v| (table.indices[v].abs(), table.indices[v]));
        out.extend(group);
        start = end;
    }
    out
}

/// One per-bin passband choice of a designed selection filter.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPick {
    /// Bin center in the fundamental interval.
    pub f: f64,
    /// Chosen alias index `l`.
    pub alias: i64,
    /// Passband center `f − l·spacing`.
    pub freq: f64,
    /// Channel gain `|H|²/S_eta` at the passband.
    pub gain: f64,
}

/// Materialize a 0/1 selection filter with the given passband bin centers.
/// `freqs` must be distinct points of a `delta`-spaced grid; an empty list
/// yields a zero filter (a branch that observes nothing) spanning one bin
/// starting at `anchor`, which must lie on the grid's edge lattice so the
/// stub stays commensurate with downstream evaluations.
fn selection_spectrum(
    kind: SpectrumKind,
    freqs: &[f64],
    delta: f64,
    anchor: f64,
) -> Result<SpectralFunction> {
    if freqs.is_empty() {
        return SpectralFunction::constant(kind, anchor, anchor + delta, 0.0);
    }
    let fmin = freqs.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = ((fmax - fmin) / delta).round() as usize + 1;
    let mut values = vec![0.0; n];
    for &f in freqs {
        let idx = ((f - fmin) / delta).round() as usize;
        values[idx] = 1.0;
    }
    SpectralFunction::from_real(kind, fmin - delta / 2.0, delta, values)
}

// ============================================================================
// Optimal single prefilter
// ============================================================================

/// A designed single-branch prefilter: per-bin best-alias picks and the
/// materialized 0/1 passband filter.
#[derive(Debug, Clone)]
pub struct PrefilterDesign {
    /// Materialized selection filter, commensurate with the design grid.
    pub filter: SpectralFunction,
    /// Per-bin choice; `None` where the folded channel gain is zero.
    pub picks: Vec<Option<BinPick>>,
    delta: f64,
}

impl PrefilterDesign {
    /// Per-bin realized gain (zero where nothing was picked).
    pub fn gains(&self) -> Vec<f64> {
        self.picks
            .iter()
            .map(|p| p.as_ref().map_or(0.0, |p| p.gain))
            .collect()
    }

    /// Capacity achieved by the design under power budget `p`, straight from
    /// the picked gains (equals running the materialized filter through the
    /// single-filter capacity pipeline).
    pub fn capacity(&self, p: f64) -> Result<WaterfillSolution> {
        waterfill(&ParallelChannelSet::new(self.gains(), self.delta)?, p)
    }
}

/// Design the capacity-optimal single prefilter for sampling at rate `f_s`:
/// per bin of `[-f_s/2, f_s/2)`, pass the alias with the largest folded
/// channel gain. Errors when the channel gain is zero on the whole grid (no
/// prefilter is better than any other, and a zero prefilter is degenerate).
pub fn optimal_prefilter(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    f_s: f64,
    grid: &FrequencyGrid,
) -> Result<PrefilterDesign> {
    if !(f_s > 0.0) {
        return Err(Error::invalid_shape(format!(
            "sampling rate must be positive, got {f_s}"
        )));
    }
    check_grid_span(grid, f_s)?;
    check_commensurate(h, grid, f_s, "channel")?;
    check_commensurate(s_eta, grid, f_s, "noise PSD")?;

    let picks = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        let table = folded_gain_table(h, s_eta, f_s, f)?;
        let ranked = ranked_aliases(&table);
        Ok(ranked.first().copied().and_then(|v| {
            (table.gains[v] > 0.0).then(|| BinPick {
                f,
                alias: table.indices[v],
                freq: table.freqs[v],
                gain: table.gains[v],
            })
        }))
    });
    let picks: Vec<Option<BinPick>> = picks.into_iter().collect::<Result<_>>()?;

    let passbands: Vec<f64> = picks.iter().flatten().map(|p| p.freq).collect();
    if passbands.is_empty() {
        return Err(Error::invalid_shape(
            "optimal prefilter undefined: folded channel gain is zero on the whole grid",
        ));
    }
    let filter = selection_spectrum(
        SpectrumKind::Prefilter,
        &passbands,
        grid.delta(),
        grid.f_lo(),
    )?;
    Ok(PrefilterDesign {
        filter,
        picks,
        delta: grid.delta(),
    })
}

// ============================================================================
// Optimal filter bank
// ============================================================================

/// A designed `m`-branch selection bank.
#[derive(Debug, Clone)]
pub struct FilterbankDesign {
    /// Materialized branch filters; branch `k` passes the `k`-th best alias
    /// of each bin (zero filter where fewer than `k+1` aliases carry gain).
    pub filters: Vec<SpectralFunction>,
    /// Per-branch, per-bin picks (`picks[k][j]` for branch `k`, bin `j`).
    pub picks: Vec<Vec<Option<BinPick>>>,
    /// Predicted per-bin spectrum: realized gains are exactly the picked
    /// folded gains, descending, padded with zeros to `m`.
    pub bins: Vec<BinEigenvalues>,
    delta: f64,
}

impl FilterbankDesign {
    /// Capacity achieved by the design under power budget `p`.
    pub fn capacity(&self, p: f64) -> Result<WaterfillSolution> {
        capacity_from_bins(&self.bins, self.delta, p)
    }
}

/// Design the capacity-optimal `m`-branch filter bank for total rate `f_s`
/// (each branch samples at `f_s/m`): per bin of `[-f_s/2m, f_s/2m)`, branch
/// `k` passes the alias with the `k`-th largest folded channel gain.
pub fn optimal_filterbank(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    f_s: f64,
    m: usize,
    grid: &FrequencyGrid,
) -> Result<FilterbankDesign> {
    if m == 0 {
        return Err(Error::invalid_shape(
            "filter bank needs at least one branch",
        ));
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

    let per_bin = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        let table = folded_gain_table(h, s_eta, spacing, f)?;
        let ranked = ranked_aliases(&table);
        let row: Vec<Option<BinPick>> = (0..m)
            .map(|k| {
                ranked.get(k).copied().and_then(|v| {
                    (table.gains[v] > 0.0).then(|| BinPick {
                        f,
                        alias: table.indices[v],
                        freq: table.freqs[v],
                        gain: table.gains[v],
                    })
                })
            })
            .collect();
        let mut gains_all: Vec<f64> = table.gains.clone();
        gains_all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok((row, gains_all))
    });
    let per_bin: Vec<(Vec<Option<BinPick>>, Vec<f64>)> =
        per_bin.into_iter().collect::<Result<_>>()?;

    let mut any_gain = false;
    let mut picks: Vec<Vec<Option<BinPick>>> = vec![Vec::with_capacity(grid.n_bins()); m];
    let mut bins = Vec::with_capacity(grid.n_bins());
    for (j, (row, gains_all)) in per_bin.into_iter().enumerate() {
        let mut lambda: Vec<f64> = row
            .iter()
            .map(|p| p.as_ref().map_or(0.0, |p| p.gain))
            .collect();
        lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
        any_gain |= lambda.first().is_some_and(|&g| g > 0.0);
        bins.push(BinEigenvalues {
            f: grid.center(j),
            lambda,
            gains: gains_all,
        });
        for (k, p) in row.into_iter().enumerate() {
            picks[k].push(p);
        }
    }
    if !any_gain {
        return Err(Error::invalid_shape(
            "optimal filter bank undefined: folded channel gain is zero on the whole grid",
        ));
    }

    let filters = picks
        .iter()
        .map(|branch| {
            let passbands: Vec<f64> = branch.iter().flatten().map(|p| p.freq).collect();
            selection_spectrum(
                SpectrumKind::Prefilter,
                &passbands,
                grid.delta(),
                grid.f_lo(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(FilterbankDesign {
        filters,
        picks,
        bins,
        delta: grid.delta(),
    })
}

// ============================================================================
// Modulated-bank upper bound
// ============================================================================

/// Per-bin eigenvalue ceiling for any modulated bank with `m` branches,
/// modulation rate `f_q`, and rate ratio `a/b` in lowest terms: on each bin
/// of `[-f_q/2b, f_q/2b)` no such sampler can realize more than the top
/// `a·m` folded channel gains at alias spacing `f_q/b`.
pub fn modbank_upper_bound(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    f_q: f64,
    a: u32,
    b: u32,
    m: usize,
    grid: &FrequencyGrid,
) -> Result<Vec<BinEigenvalues>> {
    if m == 0 {
        return Err(Error::invalid_shape(
            "modulated bank needs at least one branch",
        ));
    }
    if a == 0 || b == 0 {
        return Err(Error::incommensurate(format!(
            "rate ratio integers must be positive, got a = {a}, b = {b}"
        )));
    }
    if !(f_q > 0.0) {
        return Err(Error::invalid_shape(format!(
            "modulation rate must be positive, got {f_q}"
        )));
    }
    let spacing = f_q / b as f64;
    check_grid_span(grid, spacing)?;
    check_commensurate(h, grid, spacing, "channel")?;
    check_commensurate(s_eta, grid, spacing, "noise PSD")?;

    let rows = a as usize * m;
    let bins = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        let table = folded_gain_table(h, s_eta, spacing, f)?;
        let mut gains_all = table.gains;
        gains_all.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let mut lambda: Vec<f64> = gains_all.iter().copied().take(rows).collect();
        lambda.resize(rows, 0.0);
        Ok(BinEigenvalues {
            f,
            lambda,
            gains: gains_all,
        })
    });
    bins.into_iter().collect()
}

/// Capacity of the [`modbank_upper_bound`] ceiling for the geometry of a
/// concrete bank spec, under power budget `p`.
pub fn modbank_upper_bound_capacity(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    p: f64,
    grid: &FrequencyGrid,
) -> Result<WaterfillSolution> {
    let bins = modbank_upper_bound(
        h,
        s_eta,
        spec.f_q,
        spec.a,
        spec.b,
        spec.branches.len(),
        grid,
    )?;
    capacity_from_bins(&bins, grid.delta(), p)
}

// ============================================================================
// Landau-rate aliasing check
// ============================================================================

/// First bin violating the aliasing-count condition.
#[derive(Debug, Clone)]
pub struct LandauWitness {
    /// Bin center in the fundamental interval.
    pub f: f64,
    /// Number of channel-active aliases folding onto `f`.
    pub active: usize,
    /// The active aliased frequencies.
    pub freqs: Vec<f64>,
}

/// Result of [`landau_check`].
#[derive(Debug, Clone)]
pub struct LandauReport {
    /// True when every bin has at most `m` channel-active aliases.
    pub ok: bool,
    /// Largest active-alias count over the grid.
    pub max_active: usize,
    /// Branch count the check was run against.
    pub branches: usize,
    /// First violating bin, when `ok` is false.
    pub witness: Option<LandauWitness>,
}

/// Check the aliasing-count condition for an `m`-branch bank at total rate
/// `f_s`: per bin of `[-f_s/2m, f_s/2m)`, count the aliases (spacing
/// `f_s/m`) where the channel response is nonzero. With more than `m`
/// active aliases in any bin, `m` branches cannot separate the folded
/// content — lossless reconstruction of the input spectrum is impossible at
/// this rate, whatever the filters.
pub fn landau_check(
    h: &SpectralFunction,
    f_s: f64,
    m: usize,
    grid: &FrequencyGrid,
) -> Result<LandauReport> {
    if m == 0 {
        return Err(Error::invalid_shape(
            "aliasing check needs at least one branch",
        ));
    }
    if !(f_s > 0.0) {
        return Err(Error::invalid_shape(format!(
            "sampling rate must be positive, got {f_s}"
        )));
    }
    let spacing = f_s / m as f64;
    check_grid_span(grid, spacing)?;
    check_commensurate(h, grid, spacing, "channel")?;

    let hull = support_hull(h, h);
    let mut max_active = 0usize;
    let mut witness = None;
    for j in 0..grid.n_bins() {
        let f = grid.center(j);
        let set = crate::spectra::aliased_set(f, spacing, hull);
        let freqs: Vec<f64> = set
            .iter_freqs()
            .filter_map(|(_, fr)| (h.abs2(fr) > 0.0).then_some(fr))
            .collect();
        let active = freqs.len();
        if active > max_active {
            max_active = active;
        }
        if active > m && witness.is_none() {
            witness = Some(LandauWitness { f, active, freqs });
        }
    }
    Ok(LandauReport {
        ok: witness.is_none(),
        max_active,
        branches: m,
        witness,
    })
}

// ============================================================================
// Modulation-sequence design
// ============================================================================

/// A designed single-branch modulated sampler.
///
/// The channel band is tiled into `2·subband_span` subbands of width `f_q`;
/// the `k` subbands with the largest integrated SNR are selected. The
/// periodic modulator shifts selected subband `l_i` (winners sorted by
/// descending index) up by `shifts[i] = i·(l_star+1) − l_i` subbands, so the
/// images land on the disjoint, widely spaced subbands `i·(l_star+1)`; with
/// `l_star` a multiple of `k`, sampling at `k·f_q` then folds the images
/// onto the fundamental interval with mutually orthogonal phase signatures,
/// and the whitened per-bin gains are exactly the selected subband SNRs.
#[derive(Debug, Clone)]
pub struct ModulationDesign {
    /// Modulation rate (subband width).
    pub f_q: f64,
    /// Number of selected subbands (`k`); the sampler runs at `k·f_q`.
    pub k: usize,
    /// Half the subband count: indices range over `−span..span`.
    pub subband_span: i64,
    /// Smallest multiple of `k` that is at least the subband count.
    pub l_star: i64,
    /// Selected subband indices, descending.
    pub selected_subbands: Vec<i64>,
    /// Integrated SNR of each selected subband, aligned with the selection.
    pub scores: Vec<f64>,
    /// Modulator subband shifts `α_i`, aligned with the selection.
    pub shifts: Vec<i64>,
}

impl ModulationDesign {
    /// Total sampling rate of the designed sampler.
    pub fn sampling_rate(&self) -> f64 {
        self.k as f64 * self.f_q
    }

    /// Modulator Fourier coefficients: unit weight at key `−α_i` for each
    /// selected subband (the key sign matches the spectral convention used
    /// by the capacity pipeline, where coefficient `u` routes input content
    /// at `φ` to the image at `φ − u·f_q`).
    pub fn coefficients(&self) -> BTreeMap<i64, Complex64> {
        self.shifts
            .iter()
            .map(|&alpha| (-alpha, Complex64::new(1.0, 0.0)))
            .collect()
    }

    /// Materialize the design as a one-branch bank spec (`a = k`, `b = 1`):
    /// the pre-modulation filter passes the selected subbands, the
    /// post-modulation filter passes their shifted images.
    pub fn to_modbank_spec(&self) -> Result<ModulationBankSpec> {
        let pre_bands: Vec<f64> = self
            .selected_subbands
            .iter()
            .map(|&l| (l as f64 + 0.5) * self.f_q)
            .collect();
        let post_bands: Vec<f64> = (0..self.k as i64)
            .map(|i| (i * (self.l_star + 1)) as f64 * self.f_q + 0.5 * self.f_q)
            .collect();
        Ok(ModulationBankSpec {
            branches: vec![ModulationBranch {
                pre_filter: selection_spectrum(
                    SpectrumKind::Premodulation,
                    &pre_bands,
                    self.f_q,
                    0.0,
                )?,
                coeffs: self.coefficients(),
                post_filter: selection_spectrum(
                    SpectrumKind::Prefilter,
                    &post_bands,
                    self.f_q,
                    0.0,
                )?,
            }],
            f_q: self.f_q,
            a: self.k as u32,
            b: 1,
        })
    }
}

/// Breakpoints of `g` strictly inside `(lo, hi)`.
fn interior_breakpoints(g: &SpectralFunction, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let w = g.bin_width();
    let tol = 1e-9 * w;
    let i_lo = ((lo - g.support_lo()) / w).ceil() as i64;
    let i_hi = ((hi - g.support_lo()) / w).floor() as i64;
    for i in i_lo..=i_hi {
        let f = g.support_lo() + i as f64 * w;
        if f > lo + tol && f < hi - tol {
            out.push(f);
        }
    }
}

/// Integrated SNR `∫ |H|²/S_eta df` over `[lo, hi)`, exact for the
/// piecewise-constant representation.
fn integrated_snr(h: &SpectralFunction, s_eta: &SpectralFunction, lo: f64, hi: f64) -> Result<f64> {
    let mut pts = vec![lo, hi];
    interior_breakpoints(h, lo, hi, &mut pts);
    interior_breakpoints(s_eta, lo, hi, &mut pts);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = 1e-9 * h.bin_width().min(s_eta.bin_width());
    pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let h2 = h.abs2(mid);
        if h2 == 0.0 {
            continue;
        }
        let eta = s_eta.real_at(mid);
        if eta <= 0.0 {
            return Err(Error::invalid_shape(format!(
                "unbounded SNR: channel response nonzero at f = {mid} where the noise PSD vanishes"
            )));
        }
        acc += (w[1] - w[0]) * h2 / eta;
    }
    Ok(acc)
}

/// Design the modulation sequence of a single-branch modulated sampler at
/// rate `k·f_q` that achieves the capacity of the optimal `k`-branch
/// selection bank at the same total rate, for channels piecewise-constant
/// on `f_q`-aligned subbands.
///
/// Subbands are ranked by integrated SNR (ties toward the subband closest
/// to zero). Errors when the channel carries no gain at all, or when `k`
/// exceeds the subband count covering the channel support.
pub fn design_modulation_sequence(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    f_q: f64,
    k: usize,
) -> Result<ModulationDesign> {
    if !(f_q > 0.0) {
        return Err(Error::invalid_shape(format!(
            "modulation rate must be positive, got {f_q}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid_shape(
            "modulation design needs k ≥ 1 subbands",
        ));
    }
    let (lo, hi) = support_hull(h, h);
    if !(hi > lo) {
        return Err(Error::invalid_shape("channel has empty support"));
    }
    // Symmetric subband span [−span·f_q, span·f_q) covering the channel.
    let span = (((-lo).max(hi) / f_q) - 1e-9).ceil().max(1.0) as i64;
    let n_sub = 2 * span;
    if (k as i64) > n_sub {
        return Err(Error::invalid_shape(format!(
            "cannot select k = {k} subbands out of {n_sub}"
        )));
    }

    // Score all subbands; rank descending with the deterministic tie-break.
    let subbands: Vec<i64> = (-span..span).collect();
    let scores: Vec<f64> = subbands
        .iter()
        .map(|&l| integrated_snr(h, s_eta, l as f64 * f_q, (l + 1) as f64 * f_q))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..subbands.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
    let mut ranked = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let s0 = scores[order[start]];
        let mut end = start + 1;
        while end < order.len() && (s0 - scores[order[end]]) <= EPS_INV * s0 {
            end += 1;
        }
        let mut group: Vec<usize> = order[start..end].to_vec();
        group.sort_by_key(|&v| (subbands[v].abs(), subbands[v]));
        ranked.extend(group);
        start = end;
    }
    if scores[ranked[0]] <= 0.0 {
        return Err(Error::invalid_shape(
            "modulation design undefined: channel SNR is zero in every subband",
        ));
    }

    // Winners, sorted by descending subband index.
    let mut winners: Vec<(i64, f64)> = ranked[..k]
        .iter()
        .map(|&v| (subbands[v], scores[v]))
        .collect();
    winners.sort_by_key(|w| std::cmp::Reverse(w.0));

    // Smallest multiple of k that is ≥ the subband count.
    let k_i = k as i64;
    let l_star = (n_sub + k_i - 1) / k_i * k_i;
    let shifts: Vec<i64> = winners
        .iter()
        .enumerate()
        .map(|(i, &(l, _))| i as i64 * (l_star + 1) - l)
        .collect();

    Ok(ModulationDesign {
        f_q,
        k,
        subband_span: span,
        l_star,
        selected_subbands: winners.iter().map(|w| w.0).collect(),
        scores: winners.iter().map(|w| w.1).collect(),
        shifts,
    })
}
