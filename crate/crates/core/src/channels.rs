//! Built-in channel/noise models and a seeded random channel generator.
//!
//! Each model packages a channel response `H`, a noise PSD `S_eta`, and the
//! Nyquist rate `2·max|f|` of the channel support. All responses are
//! piecewise-constant on half-open bins, so capacity integrals over
//! commensurate grids are exact.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::spectra::{SpectralFunction, SpectrumKind};
use crate::{Error, Result};

/// A named channel model: response, noise, and Nyquist rate.
#[derive(Debug, Clone)]
pub struct NamedChannel {
    /// Short identifier (stable across runs; used by the CLI config).
    pub name: String,
    /// Channel frequency response `H(f)`.
    pub h: SpectralFunction,
    /// Noise power spectral density `S_eta(f)`.
    pub s_eta: SpectralFunction,
    /// Nyquist rate `2·(largest support frequency of H)`.
    pub f_nyq: f64,
    /// Human-readable description.
    pub notes: String,
}

/// Flat channel: `H = 1` on `[−b, b)`, unit white noise on the same band.
pub fn flat_channel(b: f64) -> Result<NamedChannel> {
    if !(b > 0.0) {
        return Err(Error::invalid_shape(format!(
            "flat channel needs positive bandwidth, got {b}"
        )));
    }
    Ok(NamedChannel {
        name: format!("flat-{b}"),
        h: SpectralFunction::constant(SpectrumKind::Channel, -b, b, 1.0)?,
        s_eta: SpectralFunction::constant(SpectrumKind::NoisePsd, -b, b, 1.0)?,
        f_nyq: 2.0 * b,
        notes: format!("flat unit response and unit noise on [-{b}, {b})"),
    })
}

/// Flat channel with noise extending past the signal band: `H = 1` on
/// `[−b, b)`, unit noise on the wider `[−noise_bw, noise_bw)`. Sampling
/// above the channel's Nyquist rate keeps improving capacity here, because
/// faster sampling thins out how much out-of-band noise folds onto the
/// signal band. `noise_bw == b` is allowed and reduces to [`flat_channel`].
pub fn wideband_noise_channel(b: f64, noise_bw: f64) -> Result<NamedChannel> {
    if !(b > 0.0) {
        return Err(Error::invalid_shape(format!(
            "channel needs positive bandwidth, got {b}"
        )));
    }
    if !(noise_bw >= b) {
        return Err(Error::invalid_shape(format!(
            "noise bandwidth must cover the channel bandwidth, got {noise_bw} < {b}"
        )));
    }
    Ok(NamedChannel {
        name: format!("wideband-noise-{b}-{noise_bw}"),
        h: SpectralFunction::constant(SpectrumKind::Channel, -b, b, 1.0)?,
        s_eta: SpectralFunction::constant(SpectrumKind::NoisePsd, -noise_bw, noise_bw, 1.0)?,
        f_nyq: 2.0 * b,
        notes: format!(
            "unit response on [-{b}, {b}), unit noise on the wider [-{noise_bw}, {noise_bw})"
        ),
    })
}

/// Four-band multiband channel: `H = 1` where `|f|` lies in
/// `(0.1, 0.2) ∪ (0.4, 0.5)`, zero elsewhere, unit noise on `[−0.5, 0.5)`.
/// The occupied measure is `0.4`, so a four-branch bank at total rate `0.4`
/// already meets the Nyquist-rate capacity while a smaller rate cannot.
pub fn multiband_channel() -> Result<NamedChannel> {
    let delta = 0.05;
    let n = 20;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mid = (-0.5 + (i as f64 + 0.5) * delta).abs();
            let active = (mid > 0.1 && mid < 0.2) || (mid > 0.4 && mid < 0.5);
            if active {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(NamedChannel {
        name: "multiband".to_string(),
        h: SpectralFunction::from_real(SpectrumKind::Channel, -0.5, delta, values)?,
        s_eta: SpectralFunction::constant(SpectrumKind::NoisePsd, -0.5, 0.5, 1.0)?,
        f_nyq: 1.0,
        notes: "unit response on |f| in (0.1, 0.2) and (0.4, 0.5); unit noise; \
                occupied measure 0.4"
            .to_string(),
    })
}

/// Three-subband channel: unit-width subbands on `[−1.5, 1.5)` with SNRs
/// `{2, 1, 2}` (outer subbands stronger), unit noise across the band.
///
/// At sampling rate `2` the two outer subbands alias onto each other, so a
/// plain prefilter must give one of them up — the folded SNR takes the
/// values `{2, 1}` — while a modulated sampler can shift one outer subband
/// clear of the other and realize `{2, 2}`.
pub fn three_subband_channel() -> Result<NamedChannel> {
    let gains = [2.0_f64, 1.0, 2.0];
    let values: Vec<f64> = gains.iter().map(|g| g.sqrt()).collect();
    Ok(NamedChannel {
        name: "three-subband".to_string(),
        h: SpectralFunction::from_real(SpectrumKind::Channel, -1.5, 1.0, values)?,
        s_eta: SpectralFunction::constant(SpectrumKind::NoisePsd, -1.5, 1.5, 1.0)?,
        f_nyq: 3.0,
        notes: "unit-width subbands with SNRs {2, 1, 2}, unit noise".to_string(),
    })
}

/// Seeded random channel, piecewise-constant on `n_subbands` subbands of
/// width `f_q` centered on the origin, with per-subband SNR drawn uniformly
/// from `[0.2, 4.0)` and unit noise across the span. Deterministic in
/// `seed`; `n_subbands` must be even and positive.
pub fn random_piecewise_channel(seed: u64, n_subbands: usize, f_q: f64) -> Result<NamedChannel> {
    if n_subbands == 0 || n_subbands % 2 != 0 {
        return Err(Error::invalid_shape(format!(
            "subband count must be even and positive, got {n_subbands}"
        )));
    }
    if !(f_q > 0.0) {
        return Err(Error::invalid_shape(format!(
            "subband width must be positive, got {f_q}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n_subbands)
        .map(|_| rng.gen_range(0.2..4.0_f64).sqrt())
        .collect();
    let half = n_subbands as f64 / 2.0;
    Ok(NamedChannel {
        name: format!("random-{seed}-{n_subbands}"),
        h: SpectralFunction::from_real(SpectrumKind::Channel, -half * f_q, f_q, values)?,
        s_eta: SpectralFunction::constant(SpectrumKind::NoisePsd, -half * f_q, half * f_q, 1.0)?,
        f_nyq: n_subbands as f64 * f_q,
        notes: format!("{n_subbands} random subbands of width {f_q}, unit noise"),
    })
}
