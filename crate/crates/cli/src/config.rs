//! Job configuration: the JSON schema accepted by every subcommand, its
//! validation rules, and the resolution step that turns a validated config
//! into the spectral objects the computation routines consume.
//!
//! A job names a channel (built-in or inline tables), a sampler, a power
//! budget, and either a single sampling rate or a sweep. All frequency
//! tables must be commensurate with the requested `bin_width`, and every
//! swept rate must put an integer number of bins in its per-branch cell;
//! violations are rejected up front with the offending field named.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use subnyq_core::capacity::{ModulationBankSpec, ModulationBranch};
use subnyq_core::channels::{
    self, flat_channel, multiband_channel, random_piecewise_channel, three_subband_channel,
    wideband_noise_channel,
};
use subnyq_core::spectra::{ratio_as_integer, SpectralFunction, SpectrumKind};

// ==================== Errors ====================

/// A configuration problem: malformed JSON, a schema violation, or a
/// semantic rule broken by otherwise well-formed fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

// ==================== Units ====================

/// Units for reported capacity values. Conversion touches capacities only;
/// water levels and MSE figures are not logarithmic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// Natural logarithm units (the internal representation).
    #[default]
    Nats,
    /// Base-2 logarithm units.
    Bits,
}

impl Units {
    /// Convert a capacity from nats into these units.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    /// Lower-case label used in output metadata.
    pub fn label(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

// ==================== Spectral tables ====================

/// Which spectral role a table plays. Mirrors the internal spectrum tags so
/// a table is only accepted where its role fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Channel frequency response `H(f)`.
    Channel,
    /// Noise power spectral density (real, nonnegative).
    NoisePsd,
    /// Sampling prefilter frequency response.
    Prefilter,
    /// Filter applied ahead of a modulator.
    Premodulation,
    /// Input power spectral density (real, nonnegative).
    InputPsd,
}

impl TableKind {
    fn to_kind(self) -> SpectrumKind {
        match self {
            TableKind::Channel => SpectrumKind::Channel,
            TableKind::NoisePsd => SpectrumKind::NoisePsd,
            TableKind::Prefilter => SpectrumKind::Prefilter,
            TableKind::Premodulation => SpectrumKind::Premodulation,
            TableKind::InputPsd => SpectrumKind::InputPsd,
        }
    }

    fn from_kind(kind: SpectrumKind) -> Self {
        match kind {
            SpectrumKind::Channel => TableKind::Channel,
            SpectrumKind::NoisePsd => TableKind::NoisePsd,
            SpectrumKind::Prefilter => TableKind::Prefilter,
            SpectrumKind::Premodulation => TableKind::Premodulation,
            SpectrumKind::InputPsd => TableKind::InputPsd,
        }
    }
}

/// One bin value: a bare real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableValue {
    /// Real-valued bin.
    Real(f64),
    /// Complex-valued bin as `[re, im]`.
    Complex([f64; 2]),
}

impl TableValue {
    fn to_complex(self) -> Complex64 {
        match self {
            TableValue::Real(re) => Complex64::new(re, 0.0),
            TableValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A tabulated piecewise-constant spectral function: `values[j]` holds on
/// `[support_lo + j*bin_width, support_lo + (j+1)*bin_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    /// Spectral role of the table.
    pub kind: TableKind,
    /// Left edge of the support in Hz.
    pub support_lo: f64,
    /// Width of each constant piece in Hz.
    pub bin_width: f64,
    /// Bin values, left to right.
    pub values: Vec<TableValue>,
}

impl TableConfig {
    /// Build the spectral function, insisting the table's role matches the
    /// slot it appears in.
    pub fn resolve(
        &self,
        expected: TableKind,
        field: &str,
    ) -> Result<SpectralFunction, ConfigError> {
        if self.kind != expected {
            return err(format!(
                "{field}: table kind {:?} does not fit this slot (expected {expected:?})",
                self.kind
            ));
        }
        let values: Vec<Complex64> = self.values.iter().map(|v| v.to_complex()).collect();
        SpectralFunction::new(self.kind.to_kind(), self.support_lo, self.bin_width, values)
            .map_err(|e| ConfigError(format!("{field}: {e}")))
    }

    /// Describe a spectral function as a table, using bare reals when every
    /// bin has zero imaginary part.
    pub fn from_spectral(sf: &SpectralFunction) -> Self {
        let all_real = sf.values().iter().all(|v| v.im == 0.0);
        let values = sf
            .values()
            .iter()
            .map(|v| {
                if all_real {
                    TableValue::Real(v.re)
                } else {
                    TableValue::Complex([v.re, v.im])
                }
            })
            .collect();
        TableConfig {
            kind: TableKind::from_kind(sf.kind()),
            support_lo: sf.support_lo(),
            bin_width: sf.bin_width(),
            values,
        }
    }
}

// ==================== Channel ====================

/// Channel selection: either the `name` of a built-in family (with its
/// parameters) or inline `h` + `s_eta` tables, never both.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Built-in family: `flat`, `wideband_noise`, `multiband`,
    /// `three_subband`, or `random`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Signal bandwidth for `flat` / `wideband_noise` (default 0.5 Hz).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Noise bandwidth for `wideband_noise` (must be >= `b`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_bw: Option<f64>,
    /// Subband count for `random` (even, positive).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subbands: Option<usize>,
    /// Subband width in Hz for `random`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subband_width: Option<f64>,
    /// RNG seed for `random` (defaults to the job seed).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_seed: Option<u64>,
    /// Inline channel response table (kind `channel`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<TableConfig>,
    /// Inline noise PSD table (kind `noise_psd`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_eta: Option<TableConfig>,
}

impl ChannelConfig {
    /// Build the channel this config describes. `job_seed` backs the
    /// `random` family when no `channel_seed` is given.
    pub fn resolve(&self, job_seed: u64) -> Result<channels::NamedChannel, ConfigError> {
        let inline = self.h.is_some() || self.s_eta.is_some();
        match (&self.name, inline) {
            (Some(_), true) => {
                err("channel: give either a built-in name or inline h/s_eta tables, not both")
            }
            (None, false) => {
                err("channel: missing source; give a built-in name or inline h/s_eta tables")
            }
            (None, true) => {
                if self.b.is_some()
                    || self.noise_bw.is_some()
                    || self.subbands.is_some()
                    || self.subband_width.is_some()
                    || self.channel_seed.is_some()
                {
                    return err(
                        "channel: parameters (b, noise_bw, subbands, subband_width, channel_seed) \
                         apply to built-in names only",
                    );
                }
                let (Some(h), Some(s_eta)) = (&self.h, &self.s_eta) else {
                    return err("channel: inline channels need both h and s_eta tables");
                };
                let h = h.resolve(TableKind::Channel, "channel.h")?;
                let s_eta = s_eta.resolve(TableKind::NoisePsd, "channel.s_eta")?;
                let f_nyq = 2.0 * h.support_lo().abs().max(h.support_hi().abs());
                Ok(channels::NamedChannel {
                    name: "inline".to_string(),
                    h,
                    s_eta,
                    f_nyq,
                    notes: "user-supplied tables".to_string(),
                })
            }
            (Some(name), false) => {
                let reject_params = |allowed: &[&str]| -> Result<(), ConfigError> {
                    let given: Vec<&str> = [
                        ("b", self.b.is_some()),
                        ("noise_bw", self.noise_bw.is_some()),
                        ("subbands", self.subbands.is_some()),
                        ("subband_width", self.subband_width.is_some()),
                        ("channel_seed", self.channel_seed.is_some()),
                    ]
                    .iter()
                    .filter(|(n, present)| *present && !allowed.contains(n))
                    .map(|(n, _)| *n)
                    .collect();
                    if given.is_empty() {
                        Ok(())
                    } else {
                        err(format!(
                            "channel `{name}`: unsupported parameters: {}",
                            given.join(", ")
                        ))
                    }
                };
                let built = match name.as_str() {
                    "flat" => {
                        reject_params(&["b"])?;
                        flat_channel(self.b.unwrap_or(0.5))
                    }
                    "wideband_noise" => {
                        reject_params(&["b", "noise_bw"])?;
                        let b = self.b.unwrap_or(0.5);
                        let Some(noise_bw) = self.noise_bw else {
                            return err("channel `wideband_noise`: noise_bw is required");
                        };
                        wideband_noise_channel(b, noise_bw)
                    }
                    "multiband" => {
                        reject_params(&[])?;
                        multiband_channel()
                    }
                    "three_subband" => {
                        reject_params(&[])?;
                        three_subband_channel()
                    }
                    "random" => {
                        reject_params(&["subbands", "subband_width", "channel_seed"])?;
                        let Some(subbands) = self.subbands else {
                            return err("channel `random`: subbands is required");
                        };
                        let Some(width) = self.subband_width else {
                            return err("channel `random`: subband_width is required");
                        };
                        random_piecewise_channel(
                            self.channel_seed.unwrap_or(job_seed),
                            subbands,
                            width,
                        )
                    }
                    other => {
                        return err(format!(
                            "channel: unknown channel name `{other}`; known names: flat, \
                             wideband_noise, multiband, three_subband, random"
                        ))
                    }
                };
                built.map_err(|e| ConfigError(format!("channel `{name}`: {e}")))
            }
        }
    }
}

// ==================== Sampler ====================

/// One explicit branch of a modulated sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    /// Filter ahead of the modulator (kind `premodulation`).
    pub pre: TableConfig,
    /// Modulator Fourier coefficients as `[u, re, im]` triples.
    pub coeffs: Vec<(i64, f64, f64)>,
    /// Filter between modulator and sampler (kind `prefilter`).
    pub post: TableConfig,
}

/// Sampler selection. The `optimal_*` kinds are designed from the channel
/// at each requested rate; the rest are taken as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerConfig {
    /// Plain sampling with no prefilter (an all-pass over the observed band).
    Direct,
    /// Capacity-optimal single prefilter.
    OptimalFilter,
    /// Capacity-optimal selection bank with `branches` branches.
    OptimalBank {
        /// Number of bank branches.
        branches: usize,
    },
    /// Explicit single prefilter.
    Filter {
        /// Prefilter table (kind `prefilter`).
        filter: TableConfig,
    },
    /// Explicit filter bank, one prefilter per branch.
    Bank {
        /// Per-branch prefilter tables.
        filters: Vec<TableConfig>,
    },
    /// Explicit modulated bank. Ties the sampling rate to
    /// `a * branches * f_q / b`.
    Modulation {
        /// Modulation rate in Hz.
        f_q: f64,
        /// Numerator of the reduced rate ratio.
        a: u32,
        /// Denominator of the reduced rate ratio.
        b: u32,
        /// Per-branch filters and modulator coefficients.
        branches: Vec<BranchConfig>,
    },
    /// Single-branch modulation sequence designed from the channel:
    /// `subbands` slots of width `f_q` are selected out of the channel span.
    /// Ties the sampling rate to `subbands * f_q`.
    OptimalModulation {
        /// Modulation rate (and subband width) in Hz.
        f_q: f64,
        /// Number of subbands the sequence captures per period.
        subbands: usize,
    },
}

/// A sampler with its tables materialized.
#[derive(Debug, Clone)]
pub enum ResolvedSampler {
    /// No prefilter; an all-pass over the channel/noise support is used.
    Direct,
    /// Single prefilter designed per rate.
    OptimalFilter,
    /// Selection bank designed per rate.
    OptimalBank {
        /// Number of bank branches.
        branches: usize,
    },
    /// Fixed single prefilter.
    Filter(SpectralFunction),
    /// Fixed filter bank.
    Bank(Vec<SpectralFunction>),
    /// Fixed modulated bank.
    Modulation(ModulationBankSpec),
    /// Modulation sequence designed from the channel.
    OptimalModulation {
        /// Modulation rate in Hz.
        f_q: f64,
        /// Subbands captured per period.
        subbands: usize,
    },
}

impl ResolvedSampler {
    /// Number of sampling branches (rows of the sampled vector process).
    pub fn branches(&self) -> usize {
        match self {
            ResolvedSampler::Direct
            | ResolvedSampler::OptimalFilter
            | ResolvedSampler::Filter(_)
            | ResolvedSampler::OptimalModulation { .. } => 1,
            ResolvedSampler::OptimalBank { branches } => *branches,
            ResolvedSampler::Bank(filters) => filters.len(),
            ResolvedSampler::Modulation(spec) => spec.branches.len(),
        }
    }

    /// Short stable descriptor used in output metadata.
    pub fn descriptor(&self) -> String {
        match self {
            ResolvedSampler::Direct => "direct".to_string(),
            ResolvedSampler::OptimalFilter => "optimal-filter".to_string(),
            ResolvedSampler::OptimalBank { branches } => format!("optimal-bank-{branches}"),
            ResolvedSampler::Filter(_) => "filter".to_string(),
            ResolvedSampler::Bank(filters) => format!("bank-{}", filters.len()),
            ResolvedSampler::Modulation(spec) => format!("modulation-{}", spec.branches.len()),
            ResolvedSampler::OptimalModulation { subbands, .. } => {
                format!("optimal-modulation-{subbands}")
            }
        }
    }

    /// The sampling rate this sampler pins, if any. Modulated samplers fix
    /// the rate through the rate tie; filter samplers accept any rate.
    pub fn pinned_rate(&self) -> Option<f64> {
        match self {
            ResolvedSampler::Modulation(spec) => {
                Some(f64::from(spec.a) * spec.branches.len() as f64 * spec.f_q / f64::from(spec.b))
            }
            ResolvedSampler::OptimalModulation { f_q, subbands } => Some(*subbands as f64 * f_q),
            _ => None,
        }
    }
}

impl SamplerConfig {
    fn resolve(&self) -> Result<ResolvedSampler, ConfigError> {
        match self {
            SamplerConfig::Direct => Ok(ResolvedSampler::Direct),
            SamplerConfig::OptimalFilter => Ok(ResolvedSampler::OptimalFilter),
            SamplerConfig::OptimalBank { branches } => {
                if *branches == 0 {
                    return err("sampler: optimal_bank needs at least one branch");
                }
                Ok(ResolvedSampler::OptimalBank {
                    branches: *branches,
                })
            }
            SamplerConfig::Filter { filter } => Ok(ResolvedSampler::Filter(
                filter.resolve(TableKind::Prefilter, "sampler.filter")?,
            )),
            SamplerConfig::Bank { filters } => {
                if filters.is_empty() {
                    return err("sampler: bank needs at least one filter");
                }
                let resolved: Result<Vec<_>, _> = filters
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t.resolve(TableKind::Prefilter, &format!("sampler.filters[{i}]")))
                    .collect();
                Ok(ResolvedSampler::Bank(resolved?))
            }
            SamplerConfig::Modulation {
                f_q,
                a,
                b,
                branches,
            } => {
                if branches.is_empty() {
                    return err("sampler: modulation needs at least one branch");
                }
                if *f_q <= 0.0 || f_q.is_nan() {
                    return err(format!(
                        "sampler: modulation rate must be positive, got {f_q}"
                    ));
                }
                if *a == 0 || *b == 0 {
                    return err("sampler: rate ratio a/b needs positive a and b");
                }
                let mut resolved = Vec::with_capacity(branches.len());
                for (i, branch) in branches.iter().enumerate() {
                    if branch.coeffs.is_empty() {
                        return err(format!(
                            "sampler.branches[{i}]: modulator needs at least one coefficient"
                        ));
                    }
                    let mut coeffs = BTreeMap::new();
                    for &(u, re, im) in &branch.coeffs {
                        if coeffs.insert(u, Complex64::new(re, im)).is_some() {
                            return err(format!(
                                "sampler.branches[{i}]: duplicate modulator coefficient index {u}"
                            ));
                        }
                    }
                    resolved.push(ModulationBranch {
                        pre_filter: branch.pre.resolve(
                            TableKind::Premodulation,
                            &format!("sampler.branches[{i}].pre"),
                        )?,
                        coeffs,
                        post_filter: branch.post.resolve(
                            TableKind::Prefilter,
                            &format!("sampler.branches[{i}].post"),
                        )?,
                    });
                }
                Ok(ResolvedSampler::Modulation(ModulationBankSpec {
                    branches: resolved,
                    f_q: *f_q,
                    a: *a,
                    b: *b,
                }))
            }
            SamplerConfig::OptimalModulation { f_q, subbands } => {
                if *f_q <= 0.0 || f_q.is_nan() {
                    return err(format!(
                        "sampler: modulation rate must be positive, got {f_q}"
                    ));
                }
                if *subbands == 0 {
                    return err("sampler: optimal_modulation needs at least one subband");
                }
                Ok(ResolvedSampler::OptimalModulation {
                    f_q: *f_q,
                    subbands: *subbands,
                })
            }
        }
    }
}

// ==================== Sweep ====================

/// Rates to evaluate: an explicit ascending list or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepConfig {
    /// Explicit list of sampling rates, strictly increasing.
    List(Vec<f64>),
    /// Inclusive arithmetic range of sampling rates.
    Range {
        /// First rate in Hz.
        start: f64,
        /// Last rate in Hz (included when `start + k*step` lands on it).
        stop: f64,
        /// Step between rates in Hz.
        step: f64,
    },
}

impl SweepConfig {
    /// Expand into the concrete list of rates.
    pub fn rates(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            SweepConfig::List(list) => {
                if list.is_empty() {
                    return err("sweep: rate list must not be empty");
                }
                for pair in list.windows(2) {
                    // NaN anywhere also fails the ordering requirement.
                    if pair[1] <= pair[0] || pair[0].is_nan() || pair[1].is_nan() {
                        return err(format!(
                            "sweep: rates must be strictly increasing, got {} after {}",
                            pair[1], pair[0]
                        ));
                    }
                }
                if list[0] <= 0.0 || list[0].is_nan() {
                    return err(format!("sweep: rates must be positive, got {}", list[0]));
                }
                Ok(list.clone())
            }
            SweepConfig::Range { start, stop, step } => {
                let bad_bound = |x: f64| x <= 0.0 || x.is_nan();
                if bad_bound(*start) || bad_bound(*step) || *stop < *start || stop.is_nan() {
                    return err(format!(
                        "sweep: need 0 < start <= stop and step > 0, got start {start}, \
                         stop {stop}, step {step}"
                    ));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

// ==================== Job ====================

/// Top-level job description shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Channel under study.
    pub channel: ChannelConfig,
    /// Sampler applied to the channel output.
    pub sampler: SamplerConfig,
    /// Average input power budget (power units, >= 0).
    pub power: f64,
    /// Frequency resolution of the computation grid in Hz.
    pub bin_width: f64,
    /// Sampling rate for single-rate subcommands (capacity, design, mmse,
    /// oracle).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_s: Option<f64>,
    /// Rates for the sweep subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Units for reported capacities.
    #[serde(default)]
    pub units: Units,
    /// Seed for randomized pieces (e.g. the `random` channel family).
    #[serde(default)]
    pub seed: u64,
    /// Input PSD for the mmse subcommand (kind `input_psd`); when absent the
    /// capacity-achieving PSD at the configured power is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<TableConfig>,
    /// Output path for the emitted table; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// A validated job with every table materialized, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedJob {
    /// Channel under study.
    pub channel: channels::NamedChannel,
    /// Sampler with tables materialized.
    pub sampler: ResolvedSampler,
    /// Average input power budget.
    pub power: f64,
    /// Frequency resolution in Hz.
    pub bin_width: f64,
    /// Single sampling rate, when given.
    pub f_s: Option<f64>,
    /// Expanded sweep rates, when given.
    pub sweep: Option<Vec<f64>>,
    /// Units for reported capacities.
    pub units: Units,
    /// Seed for randomized pieces.
    pub seed: u64,
    /// Input PSD override for reconstruction jobs.
    pub input: Option<SpectralFunction>,
    /// Output path override.
    pub out: Option<PathBuf>,
}

impl JobConfig {
    /// Validate and materialize the job. Rejects inconsistent rates before
    /// any computation starts.
    pub fn resolve(&self) -> Result<ResolvedJob, ConfigError> {
        // NaN fails the is_finite checks, so the comparisons can stay simple.
        if self.power < 0.0 || !self.power.is_finite() {
            return err(format!(
                "power: budget must be finite and >= 0, got {}",
                self.power
            ));
        }
        if self.bin_width <= 0.0 || !self.bin_width.is_finite() {
            return err(format!(
                "bin_width: resolution must be finite and positive, got {}",
                self.bin_width
            ));
        }
        let channel = self.channel.resolve(self.seed)?;
        let sampler = self.sampler.resolve()?;
        let sweep = match &self.sweep {
            Some(s) => Some(s.rates()?),
            None => None,
        };
        if let Some(f_s) = self.f_s {
            if f_s <= 0.0 || !f_s.is_finite() {
                return err(format!(
                    "f_s: sampling rate must be finite and positive, got {f_s}"
                ));
            }
        }
        if self.f_s.is_none() && sweep.is_none() {
            return err("job: give a sampling rate (f_s) or a sweep");
        }
        if let Some(pinned) = sampler.pinned_rate() {
            if sweep.is_some() {
                return err(
                    "sweep: modulated samplers tie the sampling rate to the modulation rate; \
                     use f_s instead of a sweep",
                );
            }
            if let Some(f_s) = self.f_s {
                let rel = (f_s - pinned).abs() / pinned.max(1.0);
                if rel > 1e-9 {
                    return err(format!(
                        "f_s: modulated sampler ties the rate to {pinned} Hz, got {f_s}"
                    ));
                }
            }
        }
        // Every rate must put an integer number of bins in its per-branch
        // cell, or the frequency grid cannot represent the aliasing pattern.
        let branches = sampler.branches();
        let mut all_rates: Vec<f64> = Vec::new();
        if let Some(f_s) = self.f_s {
            all_rates.push(f_s);
        }
        if let Some(rates) = &sweep {
            all_rates.extend_from_slice(rates);
        }
        for &rate in &all_rates {
            let cell = grid_cell(&sampler, rate, branches);
            if ratio_as_integer(cell, self.bin_width).is_none() {
                return err(format!(
                    "bin_width: rate {rate} Hz spans a per-branch cell of {cell} Hz, which is \
                     not an integer number of {} Hz bins",
                    self.bin_width
                ));
            }
        }
        let input = match &self.input {
            Some(table) => Some(table.resolve(TableKind::InputPsd, "input")?),
            None => None,
        };
        Ok(ResolvedJob {
            channel,
            sampler,
            power: self.power,
            bin_width: self.bin_width,
            f_s: self.f_s,
            sweep,
            units: self.units,
            seed: self.seed,
            input,
            out: self.out.clone(),
        })
    }
}

/// Width of the frequency cell one grid period must cover for this sampler
/// at this rate: `f_q / b` for modulated banks, `f_s / branches` otherwise.
pub fn grid_cell(sampler: &ResolvedSampler, f_s: f64, branches: usize) -> f64 {
    match sampler {
        ResolvedSampler::Modulation(spec) => spec.f_q / f64::from(spec.b),
        ResolvedSampler::OptimalModulation { f_q, .. } => *f_q,
        _ => f_s / branches as f64,
    }
}

/// Parse and validate a JSON job description. Syntax errors carry the line
/// and column; semantic errors name the offending field.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let config: JobConfig =
        serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
    config.resolve()?;
    Ok(config)
}
