//! The finite discrete-time observation model.
//!
//! A window of `n` output samples per branch (per-branch sampling interval
//! `T̃_s = M/f_s`) observes input samples on the finer grid `Δ = T̃_s/k`
//! through a dense channel matrix, plus branch noise with its exact
//! continuous-time covariance at the sample instants:
//!
//! ```text
//!   y[(i,u)] = Σ_v  A[(i,u), v] · x[v]  +  w[(i,u)],     A: (n·M) × (n·k)
//! ```
//!
//! Rows are branch-major (`row = i·n + u`). The channel matrix is
//! block-Toeplitz — `A[(i,u+1), v+k] = A[(i,u), v]` — because every entry
//! depends on the lag `u·k − v` only.
//!
//! Three constructors build the model:
//! - [`discretize`]: from explicitly given impulse-response taps; branch
//!   noise is discrete white noise of variance `1/Δ` pushed through the
//!   materialized filter tap matrix.
//! - [`from_spectra`]: from piecewise-constant spectra; entries are `Δ`
//!   times the combined response `h̃_i = h ∗ s_i` evaluated by exact per-bin
//!   quadrature, and the noise covariance is the exact integral
//!   `∫ S_i S_j* 𝒮_η e^{j2πf(u−u')T̃_s} df` — valid for any `Δ`, colored
//!   noise handled natively.
//! - [`from_spectra_modulated`]: the same for a modulated sampler bank,
//!   restricted to unit-numerator rate ties (`a = 1`), where the modulator
//!   phases at the sample instants collapse to constants and the model
//!   stays block-Toeplitz.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use subnyq_core::capacity::ModulationBankSpec;
use subnyq_core::linalg::CMatrix;
use subnyq_core::spectra::{spectral_product_integral, ProductTerm, SpectralFunction};
use subnyq_core::{Error, Result};

use crate::exec;

/// Relative threshold below which leading/trailing taps are dropped when a
/// tap series is built — it documents that the notionally infinite filter
/// extent is truncated where the response is numerically negligible.
pub const TAP_TRUNCATION: f64 = 1e-10;

// ============================================================================
// Impulse-response taps
// ============================================================================

/// A finite run of impulse-response samples on the `Δ` grid: `taps[j]` is
/// the response at lag `start + j` (in units of `Δ`).
#[derive(Debug, Clone, PartialEq)]
pub struct TapSeries {
    start: i64,
    taps: Vec<Complex64>,
}

impl TapSeries {
    /// Build a tap series, trimming leading and trailing taps whose
    /// magnitude falls below [`TAP_TRUNCATION`] times the largest tap.
    /// Interior small taps are kept; an all-negligible series becomes empty.
    pub fn new(start: i64, taps: Vec<Complex64>) -> Self {
        let max = taps.iter().map(|t| t.norm()).fold(0.0_f64, f64::max);
        let floor = TAP_TRUNCATION * max;
        let first = taps.iter().position(|t| t.norm() > floor);
        let Some(first) = first else {
            return Self {
                start: 0,
                taps: Vec::new(),
            };
        };
        let last = taps.iter().rposition(|t| t.norm() > floor).unwrap();
        Self {
            start: start + first as i64,
            taps: taps[first..=last].to_vec(),
        }
    }

    /// The unit impulse at the given lag.
    pub fn unit_impulse(lag: i64) -> Self {
        Self {
            start: lag,
            taps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Sample a spectrum's impulse response on the `Δ` grid:
    /// `taps[j] = Δ · x̃((start + j)·Δ)` with `x̃(t) = ∫ X(f) e^{j2πft} df`,
    /// for `len` lags starting at `start`. The usual trimming applies.
    pub fn from_spectrum(x: &SpectralFunction, delta: f64, start: i64, len: usize) -> Self {
        let taps = (0..len)
            .map(|j| x.inverse_transform_at((start + j as i64) as f64 * delta) * delta)
            .collect();
        Self::new(start, taps)
    }

    /// First lag carrying a tap.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last lag carrying a tap; `None` when the series is empty.
    pub fn end(&self) -> Option<i64> {
        if self.taps.is_empty() {
            None
        } else {
            Some(self.start + self.taps.len() as i64 - 1)
        }
    }

    /// Number of stored taps.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    /// Whether the series carries no taps at all.
    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// The tap at `lag`, zero outside the stored run.
    pub fn get(&self, lag: i64) -> Complex64 {
        let idx = lag - self.start;
        if idx < 0 || idx as usize >= self.taps.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.taps[idx as usize]
        }
    }

    /// The series delayed by `by` grid steps (`by < 0` advances it).
    pub fn shifted(&self, by: i64) -> Self {
        Self {
            start: self.start + by,
            taps: self.taps.clone(),
        }
    }

    /// Discrete convolution with another series.
    pub fn convolve(&self, other: &Self) -> Self {
        if self.taps.is_empty() || other.taps.is_empty() {
            return Self {
                start: 0,
                taps: Vec::new(),
            };
        }
        let n_out = self.taps.len() + other.taps.len() - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); n_out];
        for (a, &ta) in self.taps.iter().enumerate() {
            for (b, &tb) in other.taps.iter().enumerate() {
                out[a + b] += ta * tb;
            }
        }
        Self::new(self.start + other.start, out)
    }
}

// ============================================================================
// The finite model
// ============================================================================

/// Finite discrete-time observation model; see the module docs for the
/// layout and scaling conventions.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    n: usize,
    k: usize,
    m: usize,
    t_tilde: f64,
    delta: f64,
    channel_matrix: CMatrix,
    filter_matrix: Option<CMatrix>,
    noise_cov: CMatrix,
}

impl DiscreteModel {
    /// Output samples per branch.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Input oversampling factor: `Δ = T̃_s/k`.
    pub fn oversampling(&self) -> usize {
        self.k
    }

    /// Number of branches.
    pub fn branches(&self) -> usize {
        self.m
    }

    /// Per-branch sampling interval.
    pub fn t_tilde(&self) -> f64 {
        self.t_tilde
    }

    /// Input grid step.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Length of the observation window, `n·T̃_s`.
    pub fn window(&self) -> f64 {
        self.n as f64 * self.t_tilde
    }

    /// The `(n·M) × (n·k)` matrix taking input samples to branch samples.
    pub fn channel_matrix(&self) -> &CMatrix {
        &self.channel_matrix
    }

    /// The materialized noise filter tap matrix (taps route only); its
    /// columns extend past the input window because the filters see noise
    /// from outside it.
    pub fn filter_matrix(&self) -> Option<&CMatrix> {
        self.filter_matrix.as_ref()
    }

    /// Covariance of the branch-noise sample vector.
    pub fn noise_covariance(&self) -> &CMatrix {
        &self.noise_cov
    }

    /// Largest violation of the block-Toeplitz structure
    /// `A[(i,u+1), v+k] = A[(i,u), v]`; zero for a well-formed model.
    pub fn block_toeplitz_defect(&self) -> f64 {
        let a = &self.channel_matrix;
        let mut worst = 0.0_f64;
        for i in 0..self.m {
            for u in 0..self.n.saturating_sub(1) {
                for v in 0..self.n * self.k - self.k {
                    let d =
                        (a.get(i * self.n + u + 1, v + self.k) - a.get(i * self.n + u, v)).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }
}

fn validate_window(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::invalid_shape(format!(
            "window needs n ≥ 1 samples per branch and oversampling k ≥ 1, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

// ============================================================================
// Taps route
// ============================================================================

/// Build the model from explicit impulse-response taps on the `Δ` grid.
///
/// `h` is the channel response, `filters` the per-branch sampler responses;
/// the combined per-branch response is their discrete convolution. Branch
/// noise is discrete white noise of variance `1/Δ` pushed through the
/// materialized filter matrix, so `noise_cov = (1/Δ)·S·S*`. For physical
/// correspondence with the spectral route the taps should approximate
/// `Δ` times the continuous responses at the grid instants.
pub fn discretize(
    h: &TapSeries,
    filters: &[TapSeries],
    n: usize,
    k: usize,
    t_tilde: f64,
) -> Result<DiscreteModel> {
    validate_window(n, k)?;
    if filters.is_empty() {
        return Err(Error::invalid_shape("sampler needs at least one branch"));
    }
    if t_tilde <= 0.0 || t_tilde.is_nan() {
        return Err(Error::invalid_shape(format!(
            "per-branch sampling interval must be positive, got {t_tilde}"
        )));
    }
    let m = filters.len();
    let delta = t_tilde / k as f64;
    let nk = n * k;

    let combined: Vec<TapSeries> = filters.iter().map(|s| h.convolve(s)).collect();
    let channel_matrix = CMatrix::from_fn(n * m, nk, |row, v| {
        let (i, u) = (row / n, row % n);
        combined[i].get((u * k) as i64 - v as i64)
    });

    // Noise filter matrix: column w holds the tap at lag u·k − w. The
    // column range spans every lag any branch filter reaches from any
    // output sample — wider than the input window on purpose.
    let w_lo = filters
        .iter()
        .filter_map(|s| s.end())
        .map(|e| -e)
        .min()
        .unwrap_or(0);
    let w_hi = filters
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| ((n - 1) * k) as i64 - s.start())
        .max()
        .unwrap_or(-1);
    let ncols = (w_hi - w_lo + 1).max(0) as usize;
    let filter_matrix = CMatrix::from_fn(n * m, ncols, |row, c| {
        let (i, u) = (row / n, row % n);
        filters[i].get((u * k) as i64 - (w_lo + c as i64))
    });
    let noise_cov = filter_matrix
        .gram()
        .scaled(Complex64::new(1.0 / delta, 0.0));

    Ok(DiscreteModel {
        n,
        k,
        m,
        t_tilde,
        delta,
        channel_matrix,
        filter_matrix: Some(filter_matrix),
        noise_cov,
    })
}

// ============================================================================
// Spectral route
// ============================================================================

/// Lag range of the channel matrix: `u·k − v` for `u ∈ 0..n`, `v ∈ 0..n·k`.
fn lag_bounds(n: usize, k: usize) -> (i64, usize) {
    let lag_min = -((n * k) as i64 - 1);
    let count = (2 * n - 1) * k;
    (lag_min, count)
}

fn assemble_channel(n: usize, k: usize, m: usize, tables: &[Vec<Complex64>]) -> CMatrix {
    let (lag_min, _) = lag_bounds(n, k);
    CMatrix::from_fn(n * m, n * k, |row, v| {
        let (i, u) = (row / n, row % n);
        let lag = (u * k) as i64 - v as i64;
        tables[i][(lag - lag_min) as usize]
    })
}

/// Mirror per-pair covariance lag tables into the full Hermitian matrix:
/// `cov[(i,u),(j,u')] = t[i][j][u−u']`, lower triangle by conjugation.
fn assemble_noise_cov(n: usize, m: usize, tables: &[Vec<Complex64>]) -> CMatrix {
    CMatrix::from_fn(n * m, n * m, |row, col| {
        let (i, u) = (row / n, row % n);
        let (j, u2) = (col / n, col % n);
        if u >= u2 {
            tables[i * m + j][u - u2]
        } else {
            tables[j * m + i][u2 - u].conj()
        }
    })
}

/// Build the model directly from piecewise-constant spectra.
///
/// Channel-matrix entries are `Δ·h̃_i((u·k − v)·Δ)` with `h̃_i` the inverse
/// transform of `H·S_i` (exact per-bin quadrature); the only discretization
/// left is the Riemann approximation of the input convolution and the
/// finite window. The noise covariance is exact for any `Δ`.
pub fn from_spectra(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    filters: &[SpectralFunction],
    f_s: f64,
    n: usize,
    k: usize,
) -> Result<DiscreteModel> {
    validate_window(n, k)?;
    if filters.is_empty() {
        return Err(Error::invalid_shape("sampler needs at least one branch"));
    }
    if f_s <= 0.0 || f_s.is_nan() {
        return Err(Error::invalid_shape(format!(
            "sampling rate must be positive, got {f_s}"
        )));
    }
    let m = filters.len();
    let t_tilde = m as f64 / f_s;
    let delta = t_tilde / k as f64;

    let (lag_min, count) = lag_bounds(n, k);
    let flat = exec::map_indexed(m * count, |idx| {
        let (i, j) = (idx / count, idx % count);
        let t = (lag_min + j as i64) as f64 * delta;
        spectral_product_integral(&[ProductTerm::new(h), ProductTerm::new(&filters[i])], t) * delta
    });
    let tables: Vec<Vec<Complex64>> = flat.chunks(count).map(|c| c.to_vec()).collect();
    let channel_matrix = assemble_channel(n, k, m, &tables);

    let cov_flat = exec::map_indexed(m * m * n, |idx| {
        let (i, rest) = (idx / (m * n), idx % (m * n));
        let (j, d) = (rest / n, rest % n);
        spectral_product_integral(
            &[
                ProductTerm::new(&filters[i]),
                ProductTerm::new(&filters[j]).conjugated(),
                ProductTerm::new(s_eta),
            ],
            d as f64 * t_tilde,
        )
    });
    let cov_tables: Vec<Vec<Complex64>> = cov_flat.chunks(n).map(|c| c.to_vec()).collect();
    let noise_cov = assemble_noise_cov(n, m, &cov_tables);

    Ok(DiscreteModel {
        n,
        k,
        m,
        t_tilde,
        delta,
        channel_matrix,
        filter_matrix: None,
        noise_cov,
    })
}

// ============================================================================
// Modulated spectral route
// ============================================================================

/// Build the model for a modulated sampler bank (pre-filter, periodic
/// modulator, post-filter per branch).
///
/// Restricted to unit-numerator rate ties (`a = 1`): the modulator
/// frequencies are then integer multiples of the per-branch sampling rate
/// (`f_q·T̃_s = b`), every sample-instant phase `e^{−j2π·u·f_q·l·T̃_s}`
/// equals one, and the model stays block-Toeplitz. Content reaching output
/// frequency `x` through coefficient `c_u` comes from input frequency
/// `x + u·f_q`, matching the spectral route's routing convention.
pub fn from_spectra_modulated(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    spec: &ModulationBankSpec,
    f_s: f64,
    n: usize,
    k: usize,
) -> Result<DiscreteModel> {
    validate_window(n, k)?;
    if spec.branches.is_empty() {
        return Err(Error::invalid_shape("modulated bank has no branches"));
    }
    if spec.a != 1 {
        return Err(Error::invalid_shape(format!(
            "discrete model supports unit-numerator rate ties only (a = 1), got a = {}",
            spec.a
        )));
    }
    if spec.b == 0 {
        return Err(Error::incommensurate(
            "rate ratio integers must be positive, got b = 0",
        ));
    }
    if f_s <= 0.0 || f_s.is_nan() || spec.f_q <= 0.0 || spec.f_q.is_nan() {
        return Err(Error::invalid_shape(format!(
            "rates must be positive, got f_s = {f_s}, f_q = {}",
            spec.f_q
        )));
    }
    let m = spec.branches.len();
    let t_tilde = m as f64 / f_s;
    // a·M/f_s = b/f_q with a = 1.
    let lhs = t_tilde;
    let rhs = spec.b as f64 / spec.f_q;
    if (lhs - rhs).abs() > 1e-9 * lhs.max(rhs) {
        return Err(Error::incommensurate(format!(
            "rate tie violated: M/f_s = {lhs} but b/f_q = {rhs}"
        )));
    }
    for (i, br) in spec.branches.iter().enumerate() {
        if br.coeffs.is_empty() {
            return Err(Error::invalid_shape(format!(
                "branch {i} modulator has no Fourier coefficients"
            )));
        }
    }
    let delta = t_tilde / k as f64;
    let f_q = spec.f_q;

    // Combined response of branch i at lag t: content at input frequency φ
    // passes the pre-filter and channel at φ, is shifted down by u·f_q, and
    // meets the post-filter at φ − u·f_q:
    //   h̃_i(t) = Σ_u c_u ∫ S_i(φ − u·f_q) · P_i(φ) · H(φ) · e^{j2πφt} dφ.
    // The sample-instant phases are unity here because a = 1.
    let (lag_min, count) = lag_bounds(n, k);
    let flat = exec::map_indexed(m * count, |idx| {
        let (i, j) = (idx / count, idx % count);
        let br = &spec.branches[i];
        let t = (lag_min + j as i64) as f64 * delta;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &c_u) in br.coeffs.iter() {
            acc += c_u
                * spectral_product_integral(
                    &[
                        ProductTerm::new(&br.post_filter).shifted(u as f64 * f_q),
                        ProductTerm::new(&br.pre_filter),
                        ProductTerm::new(h),
                    ],
                    t,
                );
        }
        acc * delta
    });
    let tables: Vec<Vec<Complex64>> = flat.chunks(count).map(|c| c.to_vec()).collect();
    let channel_matrix = assemble_channel(n, k, m, &tables);

    // Branch-noise covariance: noise entering at φ takes the same path, so
    // every (u, u') coefficient pair contributes a five-factor product
    // integral. The cross phases e^{−j2π·f_q·(u·l − u'·l')·T̃_s} are again
    // unity for a = 1, leaving a Toeplitz dependence on l − l'.
    let cov_flat = exec::map_indexed(m * m * n, |idx| {
        let (i, rest) = (idx / (m * n), idx % (m * n));
        let (j, d) = (rest / n, rest % n);
        let bi = &spec.branches[i];
        let bj = &spec.branches[j];
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &cu) in bi.coeffs.iter() {
            for (&u2, &cu2) in bj.coeffs.iter() {
                acc += cu
                    * cu2.conj()
                    * spectral_product_integral(
                        &[
                            ProductTerm::new(&bi.post_filter).shifted(u as f64 * f_q),
                            ProductTerm::new(&bj.post_filter)
                                .shifted(u2 as f64 * f_q)
                                .conjugated(),
                            ProductTerm::new(&bi.pre_filter),
                            ProductTerm::new(&bj.pre_filter).conjugated(),
                            ProductTerm::new(s_eta),
                        ],
                        d as f64 * t_tilde,
                    );
            }
        }
        acc
    });
    let cov_tables: Vec<Vec<Complex64>> = cov_flat.chunks(n).map(|c| c.to_vec()).collect();
    let noise_cov = assemble_noise_cov(n, m, &cov_tables);

    Ok(DiscreteModel {
        n,
        k,
        m,
        t_tilde,
        delta,
        channel_matrix,
        filter_matrix: None,
        noise_cov,
    })
}

// ============================================================================
// Gaussian draws shared by the Monte-Carlo checks
// ============================================================================

/// Standard complex normal vector (`E|z|² = 1` per entry).
pub(crate) fn draw_standard_complex(rng: &mut impl rand::Rng, len: usize) -> Vec<Complex64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * FRAC_1_SQRT_2
        })
        .collect()
}
