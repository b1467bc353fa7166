//! Piecewise-constant spectral functions, frequency grids, and aliased-set
//! arithmetic.
//!
//! Every frequency-domain object in this crate — channel response `H`,
//! prefilters `S_i`, pre-modulation filters `P_i`, noise PSD `S_eta`, input
//! PSD `S_X` — is a piecewise-constant complex function with compact support,
//! tabulated on its own uniform bin grid with the half-open convention
//! `[lo, hi)`. Compact support makes every fold sum finite without any
//! tolerance-based truncation, and piecewise constancy makes midpoint
//! quadrature exact as long as grids are commensurate (bin edges of every
//! function land on edges of the evaluation grid after any aliasing shift).
//!
//! The module also provides the exact inverse-transform quadrature used by
//! the discrete-time validation model: the integral of a product of shifted
//! piecewise-constant factors against a complex exponential has a closed form
//! per constant segment, so time-domain responses and covariances are
//! computed without numerical integration error.

use num_complex::Complex64;

use crate::{Error, Result, EPS_INV};

// ============================================================================
// Spectral functions
// ============================================================================

/// Role tag for a tabulated spectral function.
///
/// Power-spectral-density kinds (`NoisePsd`, `InputPsd`) are constrained to
/// real, nonnegative values at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Channel frequency response `H(f)`.
    Channel,
    /// Sampler prefilter / branch filter `S(f)`, `S_i(f)`.
    Prefilter,
    /// Pre-modulation filter `P_i(f)` in a modulated bank branch.
    Premodulation,
    /// Noise power spectral density `S_eta(f)`.
    NoisePsd,
    /// Input power spectral density `S_X(f)`.
    InputPsd,
}

/// Piecewise-constant complex function of frequency with compact support.
///
/// The function equals `values[i]` on the half-open bin
/// `[support_lo + i·bin_width, support_lo + (i+1)·bin_width)` and exactly `0`
/// outside `[support_lo, support_hi())`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    kind: SpectrumKind,
    support_lo: f64,
    bin_width: f64,
    values: Vec<Complex64>,
}

impl SpectralFunction {
    /// Build a tabulated function from complex bin values.
    ///
    /// Errors with [`Error::InvalidChannelShape`] on an empty table, a
    /// non-positive bin width, non-finite values, or (for PSD kinds) values
    /// that are not real and nonnegative.
    pub fn new(
        kind: SpectrumKind,
        support_lo: f64,
        bin_width: f64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_shape("spectral table has no bins"));
        }
        if !(bin_width > 0.0) || !bin_width.is_finite() || !support_lo.is_finite() {
            return Err(Error::invalid_shape(format!(
                "bad spectral geometry: support_lo = {support_lo}, bin_width = {bin_width}"
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::invalid_shape(format!("non-finite value in bin {i}")));
            }
            if matches!(kind, SpectrumKind::NoisePsd | SpectrumKind::InputPsd)
                && (v.im != 0.0 || v.re < 0.0)
            {
                return Err(Error::invalid_shape(format!(
                    "PSD must be real and nonnegative, got {v} in bin {i}"
                )));
            }
        }
        Ok(Self {
            kind,
            support_lo,
            bin_width,
            values,
        })
    }

    /// Build a tabulated function from real bin values.
    pub fn from_real(
        kind: SpectrumKind,
        support_lo: f64,
        bin_width: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        Self::new(
            kind,
            support_lo,
            bin_width,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Constant value on `[lo, hi)` represented as a single bin.
    pub fn constant(kind: SpectrumKind, lo: f64, hi: f64, value: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid_shape(format!(
                "constant spectrum needs hi > lo, got [{lo}, {hi})"
            )));
        }
        Self::from_real(kind, lo, hi - lo, vec![value])
    }

    /// Role tag.
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    /// Lower support edge.
    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    /// Upper support edge (exclusive).
    pub fn support_hi(&self) -> f64 {
        self.support_lo + self.bin_width * self.values.len() as f64
    }

    /// `(support_lo, support_hi)` as a pair.
    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi())
    }

    /// Bin width of the table.
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    /// Tabulated bin values.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Evaluate at `f` with half-open bins; exactly `0` outside the support.
    ///
    /// A point within `1e-9` bin widths of a bin edge is snapped to that edge
    /// before the half-open rule is applied, so breakpoint evaluations are
    /// stable against floating-point drift in the caller's arithmetic.
    pub fn eval(&self, f: f64) -> Complex64 {
        let t = (f - self.support_lo) / self.bin_width;
        let r = t.round();
        let idx = if (t - r).abs() < 1e-9 { r } else { t.floor() };
        if idx < 0.0 || idx >= self.values.len() as f64 {
            return Complex64::new(0.0, 0.0);
        }
        self.values[idx as usize]
    }

    /// Squared magnitude at `f`.
    pub fn abs2(&self, f: f64) -> f64 {
        self.eval(f).norm_sqr()
    }

    /// Real part at `f` (PSD kinds are real by construction).
    pub fn real_at(&self, f: f64) -> f64 {
        self.eval(f).re
    }

    /// Copy with every bin scaled by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            kind: self.kind,
            support_lo: self.support_lo,
            bin_width: self.bin_width,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Total width of the bins with nonzero value (e.g. the occupied band of
    /// a multiband channel, which sets its minimal lossless sampling rate).
    pub fn nonzero_support_measure(&self) -> f64 {
        self.bin_width * self.values.iter().filter(|v| v.norm_sqr() > 0.0).count() as f64
    }

    /// True when every bin edge of this table lands on the lattice
    /// `origin + k·delta`, which is what exact folded quadrature on a grid of
    /// step `delta` requires.
    pub fn aligned_to(&self, origin: f64, delta: f64) -> bool {
        ratio_as_integer(self.bin_width, delta).is_some()
            && ratio_as_integer(self.support_lo - origin, delta).is_some()
    }

    /// Inverse Fourier transform at time `t`: `∫ X(f)·e^{j2πft} df`, exact
    /// for the piecewise-constant table (per-bin closed form).
    pub fn inverse_transform_at(&self, t: f64) -> Complex64 {
        spectral_product_integral(&[ProductTerm::new(self)], t)
    }
}

/// Enclosing interval of two supports (hull of the union).
pub fn support_hull(a: &SpectralFunction, b: &SpectralFunction) -> (f64, f64) {
    (
        a.support_lo().min(b.support_lo()),
        a.support_hi().max(b.support_hi()),
    )
}

// ============================================================================
// Frequency grids
// ============================================================================

/// Uniform quadrature grid over `[f_lo, f_hi)` with bin centers at
/// `f_lo + (j + 1/2)·delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    f_lo: f64,
    f_hi: f64,
    n_bins: usize,
}

impl FrequencyGrid {
    /// Build a grid; needs `f_hi > f_lo` and at least one bin.
    pub fn new(f_lo: f64, f_hi: f64, n_bins: usize) -> Result<Self> {
        if n_bins == 0 || !(f_hi > f_lo) {
            return Err(Error::invalid_shape(format!(
                "bad grid: [{f_lo}, {f_hi}) with {n_bins} bins"
            )));
        }
        Ok(Self { f_lo, f_hi, n_bins })
    }

    /// Grid over the fundamental interval `[-span/2, span/2)` with step
    /// `delta`; rejects non-integer `span/delta`.
    pub fn fundamental(span: f64, delta: f64) -> Result<Self> {
        let n = ratio_as_integer(span, delta).ok_or_else(|| {
            Error::incommensurate(format!(
                "interval width {span} is not an integer multiple of bin width {delta}"
            ))
        })?;
        if n <= 0 {
            return Err(Error::incommensurate(format!(
                "interval width {span} must be positive and at least one bin of {delta}"
            )));
        }
        Self::new(-span / 2.0, span / 2.0, n as usize)
    }

    /// Lower edge.
    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    /// Upper edge.
    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    /// Number of bins.
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Bin width.
    pub fn delta(&self) -> f64 {
        (self.f_hi - self.f_lo) / self.n_bins as f64
    }

    /// Center frequency of bin `j`.
    pub fn center(&self, j: usize) -> f64 {
        self.f_lo + (j as f64 + 0.5) * self.delta()
    }

    /// Iterator over bin centers.
    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_bins).map(move |j| self.center(j))
    }
}

// ============================================================================
// Aliased sets
// ============================================================================

/// The finite index set `{l : base_f − l·spacing ∈ support}` — the aliases
/// folded onto `base_f` by uniform sampling at rate `spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasedSet {
    /// Frequency the aliases fold onto.
    pub base_f: f64,
    /// Fold spacing (`f_s`, `f_s/M`, or `f_q/b` depending on the sampler).
    pub spacing: f64,
    /// Ascending alias indices `l`.
    pub indices: Vec<i64>,
}

impl AliasedSet {
    /// Aliased frequency for index `l`: `base_f − l·spacing`.
    pub fn freq(&self, l: i64) -> f64 {
        self.base_f - l as f64 * self.spacing
    }

    /// Number of aliases.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// True when no alias falls inside the support.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Iterator over `(l, base_f − l·spacing)` pairs.
    pub fn iter_freqs(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.indices.iter().map(move |&l| (l, self.freq(l)))
    }
}

/// Enumerate all alias indices `l` with `base_f − l·spacing` inside the
/// half-open interval `support = [lo, hi)`; indices ascending.
///
/// Edge membership uses a tolerance of `1e-9` relative to the spacing so that
/// images landing on `lo` are kept and images landing on `hi` are excluded
/// regardless of floating-point drift. An empty interval yields an empty set.
pub fn aliased_set(base_f: f64, spacing: f64, support: (f64, f64)) -> AliasedSet {
    assert!(spacing > 0.0, "alias spacing must be positive");
    let (lo, hi) = support;
    let mut indices = Vec::new();
    if hi > lo {
        let tol = 1e-9 * spacing.max(base_f.abs()).max(1.0);
        // base_f − l·spacing ∈ [lo, hi)  ⇔  (base_f − hi)/spacing < l ≤ (base_f − lo)/spacing
        let l_min = ((base_f - hi) / spacing).floor() as i64 - 1;
        let l_max = ((base_f - lo) / spacing).ceil() as i64 + 1;
        for l in l_min..=l_max {
            let f = base_f - l as f64 * spacing;
            if f >= lo - tol && f < hi - tol {
                indices.push(l);
            }
        }
    }
    AliasedSet {
        base_f,
        spacing,
        indices,
    }
}

// ============================================================================
// Folded SNR
// ============================================================================

/// Post-sampling SNR at `f` for a single prefilter `S` sampled at `f_s`:
///
/// ```text
///            Σ_l |H(f−l·f_s)·S(f−l·f_s)|²
/// γ(f) =  ─────────────────────────────────────
///          Σ_l |S(f−l·f_s)|²·S_eta(f−l·f_s)
/// ```
///
/// with both sums over the aliases inside the hull of the channel and noise
/// supports. Returns `0` when the numerator vanishes (nothing of the signal
/// survives the filter); errors with [`Error::DegenerateFilter`] when the
/// noise denominator is negligible while signal content remains, since then
/// the sampled observation would have unbounded SNR and the parametric
/// capacity form breaks down.
pub fn folded_snr(
    h: &SpectralFunction,
    s_eta: &SpectralFunction,
    s: &SpectralFunction,
    f_s: f64,
    f: f64,
) -> Result<f64> {
    let hull = support_hull(h, s_eta);
    let set = aliased_set(f, f_s, hull);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut s2_max = 0.0_f64;
    let mut eta_max = 0.0_f64;
    let mut h2_max = 0.0_f64;
    for (_, freq) in set.iter_freqs() {
        let s2 = s.abs2(freq);
        let h2 = h.abs2(freq);
        let eta = s_eta.real_at(freq);
        num += h2 * s2;
        den += s2 * eta;
        s2_max = s2_max.max(s2);
        eta_max = eta_max.max(eta);
        h2_max = h2_max.max(h2);
    }
    let den_scale = s2_max * eta_max;
    let num_scale = s2_max * h2_max;
    if den <= EPS_INV * den_scale || den == 0.0 {
        if num <= EPS_INV * num_scale || num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateFilter { f });
    }
    Ok(num / den)
}

// ============================================================================
// Exact quadrature of spectral products against complex exponentials
// ============================================================================

/// One factor of a spectral product: a tabulated function evaluated at
/// `f − shift`, optionally conjugated.
#[derive(Debug, Clone, Copy)]
pub struct ProductTerm<'a> {
    function: &'a SpectralFunction,
    shift: f64,
    conj: bool,
}

impl<'a> ProductTerm<'a> {
    /// Plain factor `X(f)`.
    pub fn new(function: &'a SpectralFunction) -> Self {
        Self {
            function,
            shift: 0.0,
            conj: false,
        }
    }

    /// Factor `X(f − shift)`.
    pub fn shifted(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    /// Factor `conj(X(·))`.
    pub fn conjugated(mut self) -> Self {
        self.conj = true;
        self
    }

    fn eval(&self, f: f64) -> Complex64 {
        let v = self.function.eval(f - self.shift);
        if self.conj {
            v.conj()
        } else {
            v
        }
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.function.support();
        (lo + self.shift, hi + self.shift)
    }
}

/// `sin(z)/z` with a series fallback near zero.
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Exact integral `∫ Π_i g_i(f) · e^{j2πfx} df` where each `g_i` is a
/// shifted, optionally conjugated piecewise-constant factor.
///
/// The product is piecewise constant between the merged breakpoints of all
/// factors, and the exponential integrates in closed form on each segment
/// (`width · e^{j2πx·mid} · sinc(πx·width)`), so the result carries no
/// quadrature error. This single primitive supplies the discrete-time
/// validation model with time-domain responses (`x = t`, factors `H` and
/// `S_i`) and exact sampled-noise covariances (`x = u·T`, factors `S_i`,
/// `S_j*`, `S_eta`).
pub fn spectral_product_integral(terms: &[ProductTerm<'_>], x: f64) -> Complex64 {
    assert!(
        !terms.is_empty(),
        "product integral needs at least one factor"
    );
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for t in terms {
        let (a, b) = t.support();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if !(hi > lo) {
        return Complex64::new(0.0, 0.0);
    }
    let scale = terms
        .iter()
        .map(|t| t.function.bin_width())
        .fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * scale;

    let mut cuts = vec![lo, hi];
    for t in terms {
        let (start, _) = t.support();
        let w = t.function.bin_width();
        let n = t.function.values().len();
        for m in 0..=n {
            let b = start + m as f64 * w;
            if b > lo + tol && b < hi - tol {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);

    let mut acc = Complex64::new(0.0, 0.0);
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let width = b - a;
        if width <= tol {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut val = Complex64::new(1.0, 0.0);
        for t in terms {
            val *= t.eval(mid);
            if val.norm_sqr() == 0.0 {
                break;
            }
        }
        if val.norm_sqr() == 0.0 {
            continue;
        }
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x * mid);
        acc += val * phase * (width * sinc(std::f64::consts::PI * x * width));
    }
    acc
}

// ============================================================================
// Commensurability helpers
// ============================================================================

/// `Some(k)` when `x/y` is the integer `k` within `1e-9` relative tolerance.
pub fn ratio_as_integer(x: f64, y: f64) -> Option<i64> {
    if y == 0.0 || !x.is_finite() || !y.is_finite() {
        return None;
    }
    let r = x / y;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * r.abs().max(1.0) {
        Some(k as i64)
    } else {
        None
    }
}

/// Approximate positive greatest common divisor of a set of lengths
/// (float Euclid with tolerance), or `None` when the inputs share no
/// common step: the candidate must stay well above the numerical noise
/// floor (`1e-6` of the largest input) and reproduce every input as an
/// integer multiple to within `1e-9` of that scale. Incommensurate inputs
/// (e.g. `1` and `√2`) drive the Euclid remainders down to the noise floor
/// and are rejected by the first condition.
pub fn approx_gcd(values: &[f64]) -> Option<f64> {
    let mut g = 0.0_f64;
    let mut scale = 0.0_f64;
    for &v in values {
        let v = v.abs();
        scale = scale.max(v);
        if v > 0.0 {
            g = if g == 0.0 {
                v
            } else {
                gcd_pair(g, v, 1e-9 * scale)
            };
        }
    }
    if g <= 1e-6 * scale.max(1.0) {
        return None;
    }
    // Verify with an absolute tolerance: |v − round(v/g)·g| must be small
    // relative to the inputs, not to the (possibly huge) ratio v/g.
    for &v in values {
        let k = (v / g).round();
        if (v - k * g).abs() > 1e-9 * scale.max(1.0) {
            return None;
        }
    }
    Some(g)
}

fn gcd_pair(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a.abs().max(b.abs()), a.abs().min(b.abs()));
    while b > tol {
        let r = a - b * (a / b).floor();
        let r = if r > b - tol { 0.0 } else { r };
        a = b;
        b = r;
    }
    a
}

/// Check that `function` can be folded onto `grid` at the given alias
/// `spacing` with exact midpoint quadrature: the spacing must be an integer
/// number of grid steps and every bin edge of the function must land on the
/// grid's edge lattice.
pub fn check_commensurate(
    function: &SpectralFunction,
    grid: &FrequencyGrid,
    spacing: f64,
    what: &str,
) -> Result<()> {
    let delta = grid.delta();
    if ratio_as_integer(spacing, delta).is_none() {
        return Err(Error::incommensurate(format!(
            "alias spacing {spacing} is not an integer multiple of grid step {delta}"
        )));
    }
    if !function.aligned_to(grid.f_lo(), delta) {
        return Err(Error::incommensurate(format!(
            "{what} bins (lo = {}, width = {}) do not align with the grid \
             (lo = {}, step = {delta})",
            function.support_lo(),
            function.bin_width(),
            grid.f_lo(),
        )));
    }
    Ok(())
}
