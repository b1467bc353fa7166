//! Linear MMSE (Wiener) reconstruction of the channel input from
//! filter-bank samples, and the MMSE-optimal selection bank.
//!
//! Per frequency bin `f` of the fundamental interval `[-f_s/2M, f_s/2M)`,
//! the `M` sampled branch sequences observe the aliases `φ_l = f − l·f_s/M`
//! through the matrix `F_s[i][l] = S_i(φ_l)`. With input PSD `S_X`, channel
//! `H`, and noise PSD `S_eta`, the sampled observation covariance is
//!
//! ```text
//! K(f) = F_s (F_h F_X F_h* + F_η) F_s*          (M×M)
//! ```
//!
//! and the per-bin MSE of the best linear estimate of the input spectrum is
//!
//! ```text
//! ξ(f) = Σ_l S_X(φ_l) − trace{ F_X F_h* F_s* K⁻¹ F_s F_h F_X }
//! ```
//!
//! integrated over the fundamental interval. The reconstruction filter per
//! alias row is `G(f) = T̃_s · F_X F_h* F_s* · K⁻¹` with `T̃_s = M/f_s`.
//!
//! A sampler that maximizes the recovered power per bin minimizes ξ; the
//! per-alias recovered power ceiling is `S_X·D` with
//! `D = |H|²S_X/(|H|²S_X + S_eta)`, so the MMSE-optimal `M`-branch bank
//! passes the `M` aliases with the largest `S_X·D` — the same selection
//! structure as the capacity-optimal bank, and (with the water-filling
//! input PSD) the very same index sets.

use num_complex::Complex64;

use crate::capacity::check_grid_span;
use crate::design::{optimal_filterbank, FilterbankDesign};
use crate::exec;
use crate::linalg::{hermitian_pseudo_inverse, CMatrix};
use crate::spectra::{
    aliased_set, check_commensurate, FrequencyGrid, SpectralFunction, SpectrumKind,
};
use crate::waterfill::WaterfillSolution;
use crate::{Error, Result, EPS_INV};

// ============================================================================
// Wiener reconstruction
// ============================================================================

/// Result of linear MMSE reconstruction from a bank of sampled branches.
#[derive(Debug, Clone)]
pub struct WienerSolution {
    /// Per-branch reconstruction frequency responses `G_i(φ)` tabulated over
    /// the spectral hull: row `l` of the per-bin `G` matrix lands at the
    /// alias frequency `φ_l`.
    pub g: Vec<SpectralFunction>,
    /// Reconstruction error power `ξ` (signal-power units, per unit time).
    pub mse: f64,
    /// Per-bin observation covariance `K(f)`, one `M×M` matrix per grid bin.
    pub k_matrices: Vec<CMatrix>,
}

/// Columns of the per-bin MIMO model: every alias that carries signal,
/// noise, or input power.
struct MmseBin {
    freqs: Vec<f64>,
    h_vals: Vec<Complex64>,
    eta: Vec<f64>,
    sx: Vec<f64>,
}

fn union_hull(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s_x: &SpectralFunction,
) -> (f64, f64) {
    let lo = h.support_lo().min(s_eta.support_lo()).min(s_x.support_lo());
    let hi = h.support_hi().max(s_eta.support_hi()).max(s_x.support_hi());
    (lo, hi)
}

fn mmse_bin(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s_x: &SpectralFunction,
    spacing: f64,
    f: f64,
) -> MmseBin {
    let hull = union_hull(h, s_eta, s_x);
    let set = aliased_set(f, spacing, hull);
    let mut bin = MmseBin {
        freqs: Vec::new(),
        h_vals: Vec::new(),
        eta: Vec::new(),
        sx: Vec::new(),
    };
    for (_, freq) in set.iter_freqs() {
        let hv = h.eval(freq);
        let eta = s_eta.real_at(freq);
        let sx = s_x.real_at(freq);
        if hv.norm_sqr() == 0.0 && eta == 0.0 && sx == 0.0 {
            continue;
        }
        bin.freqs.push(freq);
        bin.h_vals.push(hv);
        bin.eta.push(eta);
        bin.sx.push(sx);
    }
    bin
}

/// Per-bin MSE term and reconstruction rows for one fundamental bin.
struct BinSolution {
    term: f64,
    k_mat: CMatrix,
    /// `(alias frequency, G row)` pairs.
    g_rows: Vec<(f64, Vec<Complex64>)>,
}

fn solve_bin(
    bin: &MmseBin,
    filters: &[SpectralFunction],
    t_tilde: f64,
    f: f64,
) -> Result<BinSolution> {
    let m = filters.len();
    let k = bin.freqs.len();
    let sum_sx: f64 = bin.sx.iter().sum();
    if k == 0 {
        return Ok(BinSolution {
            term: 0.0,
            k_mat: CMatrix::zeros(m, m),
            g_rows: Vec::new(),
        });
    }
    // F_s and the signal cross matrix C = F_s·F_h·F_X (branches × aliases).
    let f_s_mat = CMatrix::from_fn(m, k, |i, v| filters[i].eval(bin.freqs[v]));
    let c_mat = CMatrix::from_fn(m, k, |i, v| f_s_mat.get(i, v) * bin.h_vals[v] * bin.sx[v]);
    // K = F_s (F_h F_X F_h* + F_η) F_s*.
    let diag: Vec<f64> = (0..k)
        .map(|v| bin.h_vals[v].norm_sqr() * bin.sx[v] + bin.eta[v])
        .collect();
    let roots: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let k_mat = f_s_mat.scaled_cols_real(&roots).gram();

    let signal_power: f64 = c_mat.row_norms_sqr().iter().sum();
    let k_scale = k_mat.frobenius();
    if signal_power > 0.0 && k_scale <= 0.0 {
        // Signal reaches the sampler but the observation covariance is
        // exactly zero — the bank observes nothing here and the "inverse"
        // is meaningless.
        return Err(Error::SingularK { f });
    }
    if k_scale <= 0.0 {
        return Ok(BinSolution {
            term: sum_sx.max(0.0),
            k_mat,
            g_rows: bin
                .freqs
                .iter()
                .map(|&fr| (fr, vec![Complex64::new(0.0, 0.0); m]))
                .collect(),
        });
    }

    // Pseudo-inverse below EPS_INV·λ_max: selection banks give a diagonal,
    // exactly invertible K; random banks may be genuinely rank-deficient,
    // in which case estimation happens on the observable subspace.
    let k_inv = hermitian_pseudo_inverse(&k_mat, EPS_INV)?;

    // trace{C* K⁻¹ C} = Σ_{l} (C* K⁻¹ C)_{ll}; G = T̃_s · C* K⁻¹ (aliases × branches).
    let g_mat = c_mat.adjoint().mul(&k_inv);
    let mut trace = 0.0;
    for l in 0..k {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            acc += g_mat.get(l, i) * c_mat.get(i, l);
        }
        trace += acc.re;
    }
    let g_rows = (0..k)
        .map(|l| {
            let row: Vec<Complex64> = (0..m).map(|i| g_mat.get(l, i) * t_tilde).collect();
            (bin.freqs[l], row)
        })
        .collect();
    Ok(BinSolution {
        // Per-bin MSE is nonnegative by construction; drop rounding dust.
        term: (sum_sx - trace).max(0.0),
        k_mat,
        g_rows,
    })
}

/// Linear MMSE reconstruction of the channel input from an `M`-branch
/// filter bank sampled at `f_s/M` per branch, for input PSD `s_x`.
///
/// Errors with [`Error::SingularK`] when a bin carries signal power but the
/// bank observes nothing there at all.
pub fn wiener_filter(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    s_x: &SpectralFunction,
    f_s: f64,
    grid: &FrequencyGrid,
) -> Result<WienerSolution> {
    let m = filters.len();
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
    check_commensurate(s_x, grid, spacing, "input PSD")?;
    for (i, s) in filters.iter().enumerate() {
        check_commensurate(s, grid, spacing, &format!("branch filter {i}"))?;
    }

    let t_tilde = m as f64 / f_s;
    let solved = exec::map_indexed(grid.n_bins(), |j| {
        let f = grid.center(j);
        let bin = mmse_bin(h, s_eta, s_x, spacing, f);
        solve_bin(&bin, filters, t_tilde, f)
    });
    let solved: Vec<BinSolution> = solved.into_iter().collect::<Result<_>>()?;

    let mse = grid.delta() * solved.iter().map(|b| b.term).sum::<f64>();

    // Materialize the reconstruction responses over the hull grid: each
    // alias frequency belongs to exactly one fundamental bin.
    let (lo, hi) = union_hull(h, s_eta, s_x);
    let delta = grid.delta();
    let n_hull = ((hi - lo) / delta).round().max(1.0) as usize;
    let mut g_tables = vec![vec![Complex64::new(0.0, 0.0); n_hull]; m];
    for b in &solved {
        for (freq, row) in &b.g_rows {
            let pos = (freq - lo) / delta - 0.5;
            let idx = pos.round() as i64;
            if idx < 0 || idx as usize >= n_hull {
                continue; // alias right on the hull edge — carries nothing
            }
            for (i, &v) in row.iter().enumerate() {
                g_tables[i][idx as usize] = v;
            }
        }
    }
    let g = g_tables
        .into_iter()
        .map(|t| SpectralFunction::new(SpectrumKind::Prefilter, lo, delta, t))
        .collect::<Result<Vec<_>>>()?;

    Ok(WienerSolution {
        g,
        mse,
        k_matrices: solved.into_iter().map(|b| b.k_mat).collect(),
    })
}

// ============================================================================
// MMSE-optimal selection bank
// ============================================================================

/// One per-bin alias choice of the MMSE-optimal bank.
#[derive(Debug, Clone, PartialEq)]
pub struct MmsePick {
    /// Bin center in the fundamental interval.
    pub f: f64,
    /// Chosen alias index `l`.
    pub alias: i64,
    /// Passband center `f − l·spacing`.
    pub freq: f64,
    /// Recovered signal power `S_X·D` at the passband.
    pub recovered: f64,
}

/// MMSE-optimal `M`-branch selection bank and its attained reconstruction.
#[derive(Debug, Clone)]
pub struct MmseBankDesign {
    /// Materialized 0/1 branch filters.
    pub filters: Vec<SpectralFunction>,
    /// Per-branch, per-bin picks (`picks[k][j]`), `None` where fewer than
    /// `k+1` aliases recover any power.
    pub picks: Vec<Vec<Option<MmsePick>>>,
    /// The attained reconstruction (from running [`wiener_filter`] with the
    /// designed bank).
    pub solution: WienerSolution,
    /// ξ from the selection bound `∫[Σ S_X − Σ top-M S_X·D]`, which the
    /// attained solution meets.
    pub bound_mse: f64,
}

/// Design the `M`-branch bank minimizing the linear reconstruction MSE at
/// total rate `f_s`: per bin, pass the `M` aliases with the largest
/// recovered power `S_X·D`, `D = |H|²S_X/(|H|²S_X + S_eta)`. Ties break
/// toward the alias closest to the fundamental interval, exactly as in the
/// capacity-optimal designs.
pub fn mmse_optimal_bank(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s_x: &SpectralFunction,
    f_s: f64,
    m: usize,
    grid: &FrequencyGrid,
) -> Result<MmseBankDesign> {
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
    check_commensurate(s_x, grid, spacing, "input PSD")?;

    let mut picks: Vec<Vec<Option<MmsePick>>> = vec![Vec::with_capacity(grid.n_bins()); m];
    let mut bound = 0.0;
    for j in 0..grid.n_bins() {
        let f = grid.center(j);
        let bin = mmse_bin(h, s_eta, s_x, spacing, f);
        let k = bin.freqs.len();
        let sum_sx: f64 = bin.sx.iter().sum();
        // Recovered power per alias: S_X·|H|²S_X/(|H|²S_X + S_eta).
        let recovered: Vec<f64> = (0..k)
            .map(|v| {
                let sig = bin.h_vals[v].norm_sqr() * bin.sx[v];
                if sig > 0.0 {
                    bin.sx[v] * sig / (sig + bin.eta[v])
                } else {
                    0.0
                }
            })
            .collect();

        // Rank by recovered power, descending, ties toward small |l|. The
        // alias index of column v is recovered from its frequency.
        let alias_of = |v: usize| -> i64 { ((f - bin.freqs[v]) / spacing).round() as i64 };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| recovered[j].partial_cmp(&recovered[i]).unwrap());
        let mut ranked = Vec::with_capacity(k);
        let mut start = 0;
        while start < k {
            let r0 = recovered[order[start]];
            let mut end = start + 1;
            while end < k && (r0 - recovered[order[end]]) <= EPS_INV * r0 {
                end += 1;
            }
            let mut group: Vec<usize> = order[start..end].to_vec();
            group.sort_by_key(|&v| (alias_of(v).abs(), alias_of(v)));
            ranked.extend(group);
            start = end;
        }

        let mut kept = 0.0;
        for (slot, branch_picks) in picks.iter_mut().enumerate() {
            let pick = ranked.get(slot).copied().and_then(|v| {
                (recovered[v] > 0.0).then(|| {
                    kept += recovered[v];
                    MmsePick {
                        f,
                        alias: alias_of(v),
                        freq: bin.freqs[v],
                        recovered: recovered[v],
                    }
                })
            });
            branch_picks.push(pick);
        }
        bound += grid.delta() * (sum_sx - kept).max(0.0);
    }

    let filters = picks
        .iter()
        .map(|branch| {
            let passbands: Vec<f64> = branch.iter().flatten().map(|p| p.freq).collect();
            selection_filter(&passbands, grid.delta(), grid.f_lo())
        })
        .collect::<Result<Vec<_>>>()?;
    let solution = wiener_filter(h, s_eta, &filters, s_x, f_s, grid)?;
    Ok(MmseBankDesign {
        filters,
        picks,
        solution,
        bound_mse: bound,
    })
}

fn selection_filter(freqs: &[f64], delta: f64, anchor: f64) -> Result<SpectralFunction> {
    if freqs.is_empty() {
        // One empty bin anchored on the grid's edge lattice, so the zero
        // filter stays commensurate with downstream evaluations.
        return SpectralFunction::constant(SpectrumKind::Prefilter, anchor, anchor + delta, 0.0);
    }
    let fmin = freqs.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = ((fmax - fmin) / delta).round() as usize + 1;
    let mut values = vec![0.0; n];
    for &f in freqs {
        values[((f - fmin) / delta).round() as usize] = 1.0;
    }
    SpectralFunction::from_real(SpectrumKind::Prefilter, fmin - delta / 2.0, delta, values)
}

// ============================================================================
// Water-filling input PSD
// ============================================================================

/// Capacity-achieving input PSD for the optimal `m`-branch bank at rate
/// `f_s` under power budget `p`: water-fill over the bank's realized gains
/// and place the per-alias power density `[ν − 1/γ]⁺` on each picked
/// passband. Returns the PSD together with the water-filling solution, so
/// callers can cross MMSE selections against capacity selections.
pub fn waterfilling_input_psd(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    f_s: f64,
    m: usize,
    p: f64,
    grid: &FrequencyGrid,
) -> Result<(SpectralFunction, WaterfillSolution, FilterbankDesign)> {
    let design = optimal_filterbank(h, s_eta, f_s, m, grid)?;
    let solution = design.capacity(p)?;
    let nu = solution.nu;
    let delta = grid.delta();

    let mut freqs = Vec::new();
    let mut dens = Vec::new();
    for branch in &design.picks {
        for pick in branch.iter().flatten() {
            let d = nu - 1.0 / pick.gain;
            if d > 0.0 {
                freqs.push(pick.freq);
                dens.push(d);
            }
        }
    }
    if freqs.is_empty() {
        // Zero budget (or gains too weak): the optimal input is silence.
        let hull = crate::spectra::support_hull(h, s_eta);
        let psd = SpectralFunction::constant(SpectrumKind::InputPsd, hull.0, hull.1, 0.0)?;
        return Ok((psd, solution, design));
    }
    let fmin = freqs.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = freqs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n = ((fmax - fmin) / delta).round() as usize + 1;
    let mut values = vec![0.0; n];
    for (&f, &d) in freqs.iter().zip(dens.iter()) {
        values[((f - fmin) / delta).round() as usize] = d;
    }
    let psd =
        SpectralFunction::from_real(SpectrumKind::InputPsd, fmin - delta / 2.0, delta, values)?;
    Ok((psd, solution, design))
}
