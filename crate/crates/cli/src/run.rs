//! Subcommand execution: turn a resolved job into capacity curves, sampler
//! designs, reconstruction reports, or finite-window cross-checks, and emit
//! them as deterministic text.
//!
//! stdout carries exactly the output table (CSV or JSON); run metadata goes
//! to stderr. Failures are classified into configuration problems (exit
//! code 2) and numeric failures (exit code 3).

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use subnyq_core::capacity::{capacity_filterbank, capacity_modbank, capacity_single_filter};
use subnyq_core::design::{
    design_modulation_sequence, landau_check, optimal_filterbank, optimal_prefilter,
};
use subnyq_core::mmse::{waterfilling_input_psd, wiener_filter};
use subnyq_core::spectra::{support_hull, FrequencyGrid, SpectralFunction, SpectrumKind};
use subnyq_core::waterfill::{nyquist_capacity, WaterfillSolution};
use subnyq_core::Error as CoreError;
use subnyq_oracle::capacity::finite_capacity;
use subnyq_oracle::model::{from_spectra, from_spectra_modulated, DiscreteModel};

use crate::config::{
    parse_config, ResolvedJob, ResolvedSampler, SamplerConfig, TableConfig, Units,
};
use crate::emit::{mse_csv, oracle_csv, sanitize_field, CapacityCurve, CurveRow, OracleRow};
use crate::exec;

// ==================== Command line ====================

/// Capacity of sub-Nyquist sampled Gaussian channels: closed-form curves,
/// capacity-optimal sampler design, linear reconstruction, and finite-window
/// cross-checks.
#[derive(Debug, Parser)]
#[command(name = "subnyq", version, about)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// The available subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity of the configured sampler at a single sampling rate.
    Capacity(JobArgs),
    /// Design a capacity-optimal sampler and print it as a sampler config.
    Design(JobArgs),
    /// Capacity across a list or range of sampling rates.
    Sweep(JobArgs),
    /// Time-averaged MMSE of linear reconstruction from the samples.
    Mmse(JobArgs),
    /// Finite-window numerical cross-check of the closed-form capacity.
    Oracle(OracleArgs),
}

/// Arguments shared by every subcommand.
#[derive(Debug, Args)]
pub struct JobArgs {
    /// Path to the JSON job description.
    pub config: PathBuf,
    /// Report capacities in these units (overrides the config).
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// Write the output table here instead of stdout (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Extra arguments of the `oracle` subcommand.
#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Shared job arguments.
    #[command(flatten)]
    pub job: JobArgs,
    /// Window sizes (number of sampling blocks) to evaluate.
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
    pub n: Vec<usize>,
    /// Oversampling factor of the dense quadrature grid.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
}

// ==================== Failure classification ====================

/// A failed run, tagged with the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Configuration problem (exit code 2): malformed config, inconsistent
    /// rates, or shapes the computation cannot accept.
    Config(String),
    /// Numeric failure (exit code 3): a computation started but could not
    /// complete.
    Numeric(String),
}

impl Failure {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for Failure {}

/// Sort computation errors into the two exit classes: shape and rate
/// mismatches are configuration problems, everything else is numeric.
fn classify(e: CoreError) -> Failure {
    match e {
        CoreError::IncommensurateRates { .. } | CoreError::InvalidChannelShape { .. } => {
            Failure::Config(e.to_string())
        }
        other => Failure::Numeric(other.to_string()),
    }
}

// ==================== Entry point ====================

/// Run one parsed command line to completion.
pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Capacity(args) => {
            let job = load(&args)?;
            let doc = run_capacity(&job)?;
            deliver(&job, &doc)
        }
        Command::Design(args) => {
            let job = load(&args)?;
            let doc = run_design(&job)?;
            deliver(&job, &doc)
        }
        Command::Sweep(args) => {
            let job = load(&args)?;
            let curve = run_sweep(&job)?;
            eprintln!(
                "sweep: sampler {}, {} rates, landau_rate {}, units {}",
                curve.sampler,
                curve.rows.len(),
                curve.landau_rate,
                curve.units
            );
            deliver(&job, &curve.to_csv())
        }
        Command::Mmse(args) => {
            let job = load(&args)?;
            let doc = run_mmse(&job)?;
            deliver(&job, &doc)
        }
        Command::Oracle(args) => {
            let job = load(&args.job)?;
            let rows = run_oracle(&job, &args.n, args.k)?;
            deliver(&job, &oracle_csv(&rows))
        }
    }
}

/// Read, parse, and resolve the job config; apply command-line overrides.
fn load(args: &JobArgs) -> Result<ResolvedJob, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Failure::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let config = parse_config(&text).map_err(|e| Failure::Config(e.to_string()))?;
    let mut job = config
        .resolve()
        .map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(units) = args.units {
        job.units = units;
    }
    if let Some(out) = &args.out {
        job.out = Some(out.clone());
    }
    Ok(job)
}

/// Write the document to the configured output path, or print it to stdout.
fn deliver(job: &ResolvedJob, doc: &str) -> Result<(), Failure> {
    match &job.out {
        Some(path) => {
            std::fs::write(path, doc)
                .map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

/// The single sampling rate a one-rate subcommand works at: the configured
/// `f_s`, or the rate a modulated sampler pins.
fn single_rate(job: &ResolvedJob) -> Result<f64, Failure> {
    job.f_s
        .or_else(|| job.sampler.pinned_rate())
        .ok_or_else(|| Failure::Config("f_s: this subcommand needs a single sampling rate".into()))
}

// ==================== Shared pieces ====================

/// All-pass prefilter covering the joint support of channel and noise; this
/// is what "sampling without a prefilter" observes.
fn allpass(h: &SpectralFunction, s_eta: &SpectralFunction) -> Result<SpectralFunction, CoreError> {
    let (lo, hi) = support_hull(h, s_eta);
    SpectralFunction::constant(SpectrumKind::Prefilter, lo, hi, 1.0)
}

/// Capacity of the configured sampler at one rate, in nats.
pub fn capacity_at(job: &ResolvedJob, f_s: f64) -> Result<WaterfillSolution, CoreError> {
    let h = &job.channel.h;
    let s_eta = &job.channel.s_eta;
    let p = job.power;
    match &job.sampler {
        ResolvedSampler::Direct => {
            let grid = FrequencyGrid::fundamental(f_s, job.bin_width)?;
            let s = allpass(h, s_eta)?;
            capacity_single_filter(h, s_eta, &s, f_s, p, &grid)
        }
        ResolvedSampler::OptimalFilter => {
            let grid = FrequencyGrid::fundamental(f_s, job.bin_width)?;
            let design = optimal_prefilter(h, s_eta, f_s, &grid)?;
            capacity_single_filter(h, s_eta, &design.filter, f_s, p, &grid)
        }
        ResolvedSampler::OptimalBank { branches } => {
            let grid = FrequencyGrid::fundamental(f_s / *branches as f64, job.bin_width)?;
            optimal_filterbank(h, s_eta, f_s, *branches, &grid)?.capacity(p)
        }
        ResolvedSampler::Filter(s) => {
            let grid = FrequencyGrid::fundamental(f_s, job.bin_width)?;
            capacity_single_filter(h, s_eta, s, f_s, p, &grid)
        }
        ResolvedSampler::Bank(filters) => {
            let grid = FrequencyGrid::fundamental(f_s / filters.len() as f64, job.bin_width)?;
            capacity_filterbank(h, s_eta, filters, f_s, filters.len(), p, &grid)
        }
        ResolvedSampler::Modulation(spec) => {
            let grid = FrequencyGrid::fundamental(spec.f_q / f64::from(spec.b), job.bin_width)?;
            capacity_modbank(h, s_eta, spec, f_s, p, &grid)
        }
        ResolvedSampler::OptimalModulation { f_q, subbands } => {
            let design = design_modulation_sequence(h, s_eta, *f_q, *subbands)?;
            let spec = design.to_modbank_spec()?;
            let grid = FrequencyGrid::fundamental(*f_q, job.bin_width)?;
            capacity_modbank(h, s_eta, &spec, f_s, p, &grid)
        }
    }
}

/// Total bandwidth the channel actively uses: the measure of `|H| > 0`.
/// No sampler can reach Nyquist capacity below this aggregate rate.
pub fn landau_rate(h: &SpectralFunction) -> f64 {
    h.values().iter().filter(|v| v.norm_sqr() > 0.0).count() as f64 * h.bin_width()
}

// ==================== Subcommands ====================

/// Capacity at the single configured rate, as a one-row curve table.
pub fn run_capacity(job: &ResolvedJob) -> Result<String, Failure> {
    let f_s = single_rate(job)?;
    let nyq = nyquist_capacity(&job.channel.h, &job.channel.s_eta, job.power).map_err(classify)?;
    let sol = capacity_at(job, f_s).map_err(classify)?;
    let curve = CapacityCurve {
        sampler: job.sampler.descriptor(),
        units: job.units.label().to_string(),
        landau_rate: landau_rate(&job.channel.h),
        rows: vec![CurveRow {
            f_s,
            capacity: job.units.from_nats(sol.capacity),
            nu: sol.nu,
            nyquist_capacity: job.units.from_nats(nyq.capacity),
            error: None,
        }],
    };
    eprintln!(
        "capacity: channel {}, sampler {}, landau_rate {}, units {}",
        job.channel.name, curve.sampler, curve.landau_rate, curve.units
    );
    Ok(curve.to_csv())
}

/// Capacity at every swept rate. A rate that fails numerically produces a
/// NaN row carrying the diagnostic instead of aborting the sweep.
pub fn run_sweep(job: &ResolvedJob) -> Result<CapacityCurve, Failure> {
    let rates = job.sweep.clone().ok_or_else(|| {
        Failure::Config("sweep: config has no sweep; use the capacity subcommand".into())
    })?;
    let nyq = nyquist_capacity(&job.channel.h, &job.channel.s_eta, job.power).map_err(classify)?;
    let nyq_out = job.units.from_nats(nyq.capacity);
    let results = exec::map_indexed(rates.len(), |i| capacity_at(job, rates[i]));
    let rows = rates
        .iter()
        .zip(results)
        .map(|(&f_s, result)| match result {
            Ok(sol) => CurveRow {
                f_s,
                capacity: job.units.from_nats(sol.capacity),
                nu: sol.nu,
                nyquist_capacity: nyq_out,
                error: None,
            },
            Err(e) => CurveRow {
                f_s,
                capacity: f64::NAN,
                nu: f64::NAN,
                nyquist_capacity: nyq_out,
                error: Some(sanitize_field(&e.to_string())),
            },
        })
        .collect();
    Ok(CapacityCurve {
        sampler: job.sampler.descriptor(),
        units: job.units.label().to_string(),
        landau_rate: landau_rate(&job.channel.h),
        rows,
    })
}

/// Design the optimal sampler at the configured rate and describe it as a
/// sampler config (JSON), ready to paste back into a job.
pub fn run_design(job: &ResolvedJob) -> Result<String, Failure> {
    let f_s = single_rate(job)?;
    let h = &job.channel.h;
    let s_eta = &job.channel.s_eta;
    let designed = match &job.sampler {
        ResolvedSampler::OptimalFilter => {
            let grid = FrequencyGrid::fundamental(f_s, job.bin_width).map_err(classify)?;
            let design = optimal_prefilter(h, s_eta, f_s, &grid).map_err(classify)?;
            report_aliasing(h, f_s, 1, &grid);
            SamplerConfig::Filter {
                filter: TableConfig::from_spectral(&design.filter),
            }
        }
        ResolvedSampler::OptimalBank { branches } => {
            let grid = FrequencyGrid::fundamental(f_s / *branches as f64, job.bin_width)
                .map_err(classify)?;
            let design = optimal_filterbank(h, s_eta, f_s, *branches, &grid).map_err(classify)?;
            report_aliasing(h, f_s, *branches, &grid);
            SamplerConfig::Bank {
                filters: design
                    .filters
                    .iter()
                    .map(TableConfig::from_spectral)
                    .collect(),
            }
        }
        ResolvedSampler::OptimalModulation { f_q, subbands } => {
            let design = design_modulation_sequence(h, s_eta, *f_q, *subbands).map_err(classify)?;
            let spec = design.to_modbank_spec().map_err(classify)?;
            eprintln!(
                "design: modulation sequence selects subbands {:?} (scores {:?})",
                design.selected_subbands, design.scores
            );
            SamplerConfig::Modulation {
                f_q: spec.f_q,
                a: spec.a,
                b: spec.b,
                branches: spec
                    .branches
                    .iter()
                    .map(|branch| crate::config::BranchConfig {
                        pre: TableConfig::from_spectral(&branch.pre_filter),
                        coeffs: branch
                            .coeffs
                            .iter()
                            .map(|(&u, c)| (u, c.re, c.im))
                            .collect(),
                        post: TableConfig::from_spectral(&branch.post_filter),
                    })
                    .collect(),
            }
        }
        other => {
            return Err(Failure::Config(format!(
                "design: sampler `{}` is already explicit; use kind optimal_filter, \
                 optimal_bank, or optimal_modulation",
                other.descriptor()
            )))
        }
    };
    let mut doc = serde_json::to_string_pretty(&designed)
        .map_err(|e| Failure::Numeric(format!("cannot serialize design: {e}")))?;
    doc.push('\n');
    Ok(doc)
}

/// Print whether the rate/branch combination can keep every active alias
/// set resolvable (stderr metadata of the design subcommand).
fn report_aliasing(h: &SpectralFunction, f_s: f64, m: usize, grid: &FrequencyGrid) {
    match landau_check(h, f_s, m, grid) {
        Ok(report) => {
            if report.ok {
                eprintln!(
                    "design: aliasing check ok; at most {} active aliases per frequency, \
                     {} branches",
                    report.max_active, report.branches
                );
            } else {
                let at = report.witness.map(|w| w.f).unwrap_or(f64::NAN);
                eprintln!(
                    "design: aliasing overload near f = {at}: {} active aliases exceed \
                     {} branches; some channel content is necessarily lost",
                    report.max_active, report.branches
                );
            }
        }
        Err(e) => eprintln!("design: aliasing check failed: {e}"),
    }
}

/// Time-averaged MMSE of the Wiener reconstruction from the configured
/// sampler's output, as a one-row table.
pub fn run_mmse(job: &ResolvedJob) -> Result<String, Failure> {
    let f_s = single_rate(job)?;
    let h = &job.channel.h;
    let s_eta = &job.channel.s_eta;
    let m = job.sampler.branches();
    let grid = FrequencyGrid::fundamental(f_s / m as f64, job.bin_width).map_err(classify)?;
    let filters: Vec<SpectralFunction> = match &job.sampler {
        ResolvedSampler::Direct => vec![allpass(h, s_eta).map_err(classify)?],
        ResolvedSampler::OptimalFilter => {
            let single = FrequencyGrid::fundamental(f_s, job.bin_width).map_err(classify)?;
            vec![
                optimal_prefilter(h, s_eta, f_s, &single)
                    .map_err(classify)?
                    .filter,
            ]
        }
        ResolvedSampler::OptimalBank { branches } => {
            optimal_filterbank(h, s_eta, f_s, *branches, &grid)
                .map_err(classify)?
                .filters
        }
        ResolvedSampler::Filter(s) => vec![s.clone()],
        ResolvedSampler::Bank(filters) => filters.clone(),
        ResolvedSampler::Modulation(_) | ResolvedSampler::OptimalModulation { .. } => {
            return Err(Failure::Config(
                "mmse: linear reconstruction reports support filter samplers only".into(),
            ))
        }
    };
    let s_x = match &job.input {
        Some(psd) => psd.clone(),
        None => {
            waterfilling_input_psd(h, s_eta, f_s, m, job.power, &grid)
                .map_err(classify)?
                .0
        }
    };
    let solution = wiener_filter(h, s_eta, &filters, &s_x, f_s, &grid).map_err(classify)?;
    eprintln!(
        "mmse: channel {}, sampler {}, {} branches, mse {}",
        job.channel.name,
        job.sampler.descriptor(),
        m,
        solution.mse
    );
    Ok(mse_csv(f_s, solution.mse))
}

/// Build the finite-window model of the configured sampler.
fn discrete_model(
    job: &ResolvedJob,
    f_s: f64,
    n: usize,
    k: usize,
) -> Result<DiscreteModel, CoreError> {
    let h = &job.channel.h;
    let s_eta = &job.channel.s_eta;
    match &job.sampler {
        ResolvedSampler::Direct => from_spectra(h, s_eta, &[allpass(h, s_eta)?], f_s, n, k),
        ResolvedSampler::OptimalFilter => {
            let grid = FrequencyGrid::fundamental(f_s, job.bin_width)?;
            let design = optimal_prefilter(h, s_eta, f_s, &grid)?;
            from_spectra(h, s_eta, &[design.filter], f_s, n, k)
        }
        ResolvedSampler::OptimalBank { branches } => {
            let grid = FrequencyGrid::fundamental(f_s / *branches as f64, job.bin_width)?;
            let design = optimal_filterbank(h, s_eta, f_s, *branches, &grid)?;
            from_spectra(h, s_eta, &design.filters, f_s, n, k)
        }
        ResolvedSampler::Filter(s) => from_spectra(h, s_eta, std::slice::from_ref(s), f_s, n, k),
        ResolvedSampler::Bank(filters) => from_spectra(h, s_eta, filters, f_s, n, k),
        ResolvedSampler::Modulation(spec) => from_spectra_modulated(h, s_eta, spec, f_s, n, k),
        ResolvedSampler::OptimalModulation { f_q, subbands } => {
            let design = design_modulation_sequence(h, s_eta, *f_q, *subbands)?;
            from_spectra_modulated(h, s_eta, &design.to_modbank_spec()?, f_s, n, k)
        }
    }
}

/// Compare finite-window capacities against the closed form at the
/// configured rate, one row per window size.
pub fn run_oracle(
    job: &ResolvedJob,
    n_list: &[usize],
    k: usize,
) -> Result<Vec<OracleRow>, Failure> {
    if n_list.is_empty() {
        return Err(Failure::Config(
            "oracle: give at least one window size (--n)".into(),
        ));
    }
    if k == 0 {
        return Err(Failure::Config(
            "oracle: oversampling factor --k must be positive".into(),
        ));
    }
    let f_s = single_rate(job)?;
    let closed = capacity_at(job, f_s).map_err(classify)?.capacity;
    let results = exec::map_indexed(n_list.len(), |i| -> Result<OracleRow, CoreError> {
        let model = discrete_model(job, f_s, n_list[i], k)?;
        let cap = finite_capacity(&model, job.power)?;
        let rel_error = if closed != 0.0 {
            (cap - closed).abs() / closed.abs()
        } else {
            cap.abs()
        };
        Ok(OracleRow {
            n: n_list[i],
            finite_capacity: job.units.from_nats(cap),
            closed_form: job.units.from_nats(closed),
            rel_error,
        })
    });
    results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify)
}
