//! Acceptance gate: nine system-level checks covering the closed forms,
//! orderings, optimality bounds, design dualities, and finite-window
//! agreement the toolkit promises. Each test pins its tolerances and ends
//! with one machine-readable PASS line.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subnyq_cli::config::{ChannelConfig, JobConfig, SamplerConfig, SweepConfig, Units};
use subnyq_cli::emit::CurveRow;
use subnyq_cli::run::run_sweep;
use subnyq_core::capacity::{
    capacity_modbank, capacity_single_filter, filterbank_spectrum, modbank_spectrum,
    ModulationBankSpec, ModulationBranch,
};
use subnyq_core::channels::{
    flat_channel, multiband_channel, random_piecewise_channel, three_subband_channel,
    wideband_noise_channel,
};
use subnyq_core::design::{
    design_modulation_sequence, modbank_upper_bound_capacity, optimal_filterbank, optimal_prefilter,
};
use subnyq_core::mmse::{mmse_optimal_bank, waterfilling_input_psd, wiener_filter};
use subnyq_core::spectra::{FrequencyGrid, SpectralFunction, SpectrumKind};
use subnyq_core::waterfill::nyquist_capacity;
use subnyq_oracle::capacity::finite_capacity;
use subnyq_oracle::model::from_spectra;

// ==================== Helpers ====================

/// Job config shared by the sweep-based criteria.
fn sweep_job(
    channel: ChannelConfig,
    sampler: SamplerConfig,
    power: f64,
    bin_width: f64,
    sweep: SweepConfig,
) -> JobConfig {
    JobConfig {
        channel,
        sampler,
        power,
        bin_width,
        f_s: None,
        sweep: Some(sweep),
        units: Units::Nats,
        seed: 0,
        input: None,
        out: None,
    }
}

fn named_channel(name: &str) -> ChannelConfig {
    ChannelConfig {
        name: Some(name.to_string()),
        ..Default::default()
    }
}

/// Evaluate a sweep and insist every rate succeeded.
fn clean_sweep(config: &JobConfig) -> Vec<CurveRow> {
    let job = config.resolve().expect("acceptance configs must resolve");
    let curve = run_sweep(&job).expect("acceptance sweeps must run");
    for row in &curve.rows {
        assert!(
            row.error.is_none(),
            "rate {} failed unexpectedly: {:?}",
            row.f_s,
            row.error
        );
    }
    curve.rows
}

/// Random complex table, kind-tagged, over `[lo, hi)` in `width` pieces.
fn random_table(
    rng: &mut ChaCha8Rng,
    kind: SpectrumKind,
    lo: f64,
    hi: f64,
    width: f64,
) -> SpectralFunction {
    let n = ((hi - lo) / width).round() as usize;
    let values: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpectralFunction::new(kind, lo, width, values).expect("random table should be valid")
}

/// The strictly-decreasing pair witnessing non-monotonicity, if any.
fn non_monotone_pair(rows: &[CurveRow], gap: f64) -> Option<(f64, f64)> {
    for (i, a) in rows.iter().enumerate() {
        for b in rows.iter().skip(i + 1) {
            if a.capacity > b.capacity + gap {
                return Some((a.f_s, b.f_s));
            }
        }
    }
    None
}

// ==================== Criteria ====================

#[test]
fn acceptance_01_flat_channel_closed_form() {
    let start = Instant::now();
    let channel = flat_channel(0.5).expect("flat channel should build");
    let p = 5.0;
    let want = 0.5 * 6.0_f64.ln();

    let nyq = nyquist_capacity(&channel.h, &channel.s_eta, p).expect("Nyquist capacity");
    assert!(
        (nyq.capacity - want).abs() <= 1e-9 * want,
        "flat B=0.5, unit noise, P=5 must give ln(6)/2 = {want}, got {}",
        nyq.capacity
    );

    for f_s in [1.0, 1.25] {
        let grid = FrequencyGrid::fundamental(f_s, 0.125).expect("grid");
        let design =
            optimal_prefilter(&channel.h, &channel.s_eta, f_s, &grid).expect("prefilter design");
        let cap = capacity_single_filter(&channel.h, &channel.s_eta, &design.filter, f_s, p, &grid)
            .expect("single-filter capacity");
        assert!(
            (cap.capacity - nyq.capacity).abs() <= 1e-9 * nyq.capacity,
            "optimal prefilter at f_s = {f_s} >= Nyquist must reach the Nyquist capacity \
             within 1e-9 relative; got {} vs {}",
            cap.capacity,
            nyq.capacity
        );
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion must finish in < 1 s, took {elapsed:?}"
    );
    println!("ACCEPTANCE 01 flat-channel closed form: PASS");
}

#[test]
fn acceptance_02_single_filter_capacity_is_non_monotone_in_rate() {
    let start = Instant::now();
    let config = sweep_job(
        named_channel("multiband"),
        SamplerConfig::OptimalFilter,
        1.0,
        0.025,
        SweepConfig::Range {
            start: 0.05,
            stop: 1.0,
            step: 0.05,
        },
    );
    let rows = clean_sweep(&config);
    assert_eq!(rows.len(), 20, "the sweep grid has 20 rates");

    let pair = non_monotone_pair(&rows, 1e-6);
    let (f1, f2) = pair.expect(
        "the optimal single prefilter on the multiband channel must lose capacity \
         somewhere as the rate grows",
    );
    assert!(f1 < f2, "witness pair must be ordered");

    let last = rows.last().expect("rows");
    assert!(
        (last.capacity - last.nyquist_capacity).abs() <= 1e-6 * last.nyquist_capacity,
        "at f_s = 1 (Nyquist) the single filter must reach the Nyquist capacity, got {} vs {}",
        last.capacity,
        last.nyquist_capacity
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion must finish in < 10 s, took {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 02 single-filter non-monotonicity: PASS (capacity drops from f_s={f1} \
         to f_s={f2})"
    );
}

#[test]
fn acceptance_03_four_branch_bank_achieves_nyquist_from_the_active_bandwidth() {
    let config = sweep_job(
        named_channel("multiband"),
        SamplerConfig::OptimalBank { branches: 4 },
        1.0,
        0.00625,
        SweepConfig::Range {
            start: 0.05,
            stop: 1.0,
            step: 0.05,
        },
    );
    let rows = clean_sweep(&config);

    let mut checked_above = 0;
    for row in &rows {
        if row.f_s >= 0.4 - 1e-9 {
            assert!(
                (row.capacity - row.nyquist_capacity).abs() <= 1e-6 * row.nyquist_capacity,
                "4-branch bank at f_s = {} >= 0.4 (the active bandwidth) must equal the \
                 Nyquist capacity within 1e-6 relative; got {} vs {}",
                row.f_s,
                row.capacity,
                row.nyquist_capacity
            );
            checked_above += 1;
        }
    }
    assert_eq!(checked_above, 13, "rates 0.4..1.0 in 0.05 steps");

    let below = rows
        .iter()
        .find(|r| (r.f_s - 0.3).abs() < 1e-9)
        .expect("the sweep grid contains f_s = 0.3");
    assert!(
        below.capacity < below.nyquist_capacity * (1.0 - 1e-6),
        "below the active bandwidth the bank must stay strictly under the Nyquist \
         capacity; got {} vs {}",
        below.capacity,
        below.nyquist_capacity
    );
    println!("ACCEPTANCE 03 bank reaches Nyquist capacity at the active bandwidth: PASS");
}

#[test]
fn acceptance_04_sampled_gains_never_exceed_the_folded_ceiling() {
    for trial in 0..200_u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x04AC_C000 + trial);
        let n_subbands = if trial % 2 == 0 { 4 } else { 6 };
        let channel = random_piecewise_channel(1000 + trial, n_subbands, 0.5)
            .expect("random channel should build");
        let m = 1 + (trial as usize) % 3;
        let f_s = m as f64 * 0.25;
        let grid = FrequencyGrid::fundamental(0.25, 0.125).expect("grid");
        let (lo, hi) = (channel.h.support_lo(), channel.h.support_hi());

        let filters: Vec<SpectralFunction> = (0..m)
            .map(|_| random_table(&mut rng, SpectrumKind::Prefilter, lo, hi, 0.25))
            .collect();
        let bins = filterbank_spectrum(&channel.h, &channel.s_eta, &filters, f_s, m, &grid)
            .expect("random bank spectrum");
        for bin in &bins {
            for (k, &lambda) in bin.lambda.iter().enumerate() {
                let ceiling = bin.gains.get(k).copied().unwrap_or(0.0);
                assert!(
                    lambda <= ceiling + 1e-9,
                    "trial {trial}, bin at f = {}: sampled gain #{k} = {lambda} exceeds \
                     the folded ceiling {ceiling}",
                    bin.f
                );
            }
        }

        let design = optimal_filterbank(&channel.h, &channel.s_eta, f_s, m, &grid)
            .expect("selection bank design");
        let achieved =
            filterbank_spectrum(&channel.h, &channel.s_eta, &design.filters, f_s, m, &grid)
                .expect("selection bank spectrum");
        for bin in &achieved {
            for (k, &lambda) in bin.lambda.iter().enumerate() {
                let ceiling = bin.gains.get(k).copied().unwrap_or(0.0);
                assert!(
                    (lambda - ceiling).abs() <= 1e-9,
                    "trial {trial}, bin at f = {}: the selection bank must achieve the \
                     ceiling exactly; gain #{k} = {lambda} vs {ceiling}",
                    bin.f
                );
            }
        }
    }
    println!("ACCEPTANCE 04 eigenvalue ceiling over 200 random banks: PASS");
}

#[test]
fn acceptance_05_mmse_and_capacity_designs_pick_the_same_aliases() {
    // A generous budget floods every picked alias with power, which is the
    // regime where the two selection rules provably coincide.
    let p = 25.0;
    for trial in 0..50_u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x05AC_C000 + trial);
        let n_subbands = if trial % 2 == 0 { 4 } else { 6 };
        let channel = random_piecewise_channel(2000 + trial, n_subbands, 0.5)
            .expect("random channel should build");
        let m = 2 + (trial as usize) % 2;
        let f_s = m as f64 * 0.25;
        let grid = FrequencyGrid::fundamental(0.25, 0.125).expect("grid");

        let (s_x, _solution, cap_design) =
            waterfilling_input_psd(&channel.h, &channel.s_eta, f_s, m, p, &grid)
                .expect("water-filling input PSD");
        let mmse_design = mmse_optimal_bank(&channel.h, &channel.s_eta, &s_x, f_s, m, &grid)
            .expect("MMSE bank design");

        let n_bins = grid.n_bins();
        for j in 0..n_bins {
            let mut cap_set: Vec<i64> = (0..m)
                .filter_map(|k| cap_design.picks[k][j].as_ref().map(|p| p.alias))
                .collect();
            let mut mmse_set: Vec<i64> = (0..m)
                .filter_map(|k| mmse_design.picks[k][j].as_ref().map(|p| p.alias))
                .collect();
            cap_set.sort_unstable();
            mmse_set.sort_unstable();
            assert_eq!(
                cap_set, mmse_set,
                "trial {trial}, bin {j}: capacity and MMSE designs must select the same \
                 alias sets under the water-filling input"
            );
        }

        let optimal_mse = mmse_design.solution.mse;
        let (lo, hi) = (channel.h.support_lo(), channel.h.support_hi());
        for _ in 0..100 {
            let filters: Vec<SpectralFunction> = (0..m)
                .map(|_| random_table(&mut rng, SpectrumKind::Prefilter, lo, hi, 0.25))
                .collect();
            let sol = wiener_filter(&channel.h, &channel.s_eta, &filters, &s_x, f_s, &grid)
                .expect("random-bank reconstruction");
            assert!(
                sol.mse >= optimal_mse - 1e-9,
                "trial {trial}: a random bank reconstructed better ({}) than the \
                 MMSE-optimal bank ({optimal_mse})",
                sol.mse
            );
        }
    }
    println!("ACCEPTANCE 05 capacity/MMSE selection duality over 50 channels: PASS");
}

#[test]
fn acceptance_06_modulated_capacity_respects_the_folded_upper_bound() {
    let p = 2.0;
    for trial in 0..50_u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x06AC_C000 + trial);
        let channel =
            random_piecewise_channel(3000 + trial, 4, 0.5).expect("random channel should build");
        let m = 1 + (trial as usize) % 2;
        let (a, b) = match trial % 3 {
            0 => (1_u32, 1_u32),
            1 => (1, 2),
            _ => (2, 1),
        };
        let f_q = 0.5;
        let f_s = f64::from(a) * m as f64 * f_q / f64::from(b);
        let grid = FrequencyGrid::fundamental(f_q / f64::from(b), 0.125).expect("grid");

        let branches: Vec<ModulationBranch> = (0..m)
            .map(|_| {
                let n_coeffs = 1 + rng.gen_range(0..3_i64);
                let mut coeffs = std::collections::BTreeMap::new();
                while coeffs.len() < n_coeffs as usize {
                    let u = rng.gen_range(-2..=2_i64);
                    coeffs.entry(u).or_insert_with(|| {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                }
                ModulationBranch {
                    pre_filter: random_table(
                        &mut rng,
                        SpectrumKind::Premodulation,
                        -1.0,
                        1.0,
                        0.25,
                    ),
                    coeffs,
                    post_filter: random_table(&mut rng, SpectrumKind::Prefilter, -2.0, 2.0, 0.25),
                }
            })
            .collect();
        let spec = ModulationBankSpec {
            branches,
            f_q,
            a,
            b,
        };

        let cap = capacity_modbank(&channel.h, &channel.s_eta, &spec, f_s, p, &grid)
            .expect("modulated capacity")
            .capacity;
        let bound = modbank_upper_bound_capacity(&channel.h, &channel.s_eta, &spec, p, &grid)
            .expect("modulated upper bound")
            .capacity;
        assert!(
            cap <= bound + 1e-9,
            "trial {trial}: modulated capacity {cap} exceeds its folded upper bound {bound}"
        );
    }

    // Trivial modulation (one branch, unit DC coefficient) must collapse to
    // the plain single-filter evaluation of the combined filter.
    for trial in 0..10_u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x06AC_D000 + trial);
        let channel =
            random_piecewise_channel(3500 + trial, 4, 0.5).expect("random channel should build");
        let s = random_table(&mut rng, SpectrumKind::Prefilter, -1.0, 1.0, 0.25);
        let pre = SpectralFunction::constant(SpectrumKind::Premodulation, -1.0, 1.0, 1.0)
            .expect("all-pass");
        let mut coeffs = std::collections::BTreeMap::new();
        coeffs.insert(0_i64, Complex64::new(1.0, 0.0));
        let spec = ModulationBankSpec {
            branches: vec![ModulationBranch {
                pre_filter: pre,
                coeffs,
                post_filter: s.clone(),
            }],
            f_q: 0.5,
            a: 1,
            b: 1,
        };
        let grid = FrequencyGrid::fundamental(0.5, 0.125).expect("grid");
        let through_modulator = capacity_modbank(&channel.h, &channel.s_eta, &spec, 0.5, p, &grid)
            .expect("trivially modulated capacity")
            .capacity;
        let plain = capacity_single_filter(&channel.h, &channel.s_eta, &s, 0.5, p, &grid)
            .expect("single-filter capacity")
            .capacity;
        assert!(
            (through_modulator - plain).abs() <= 1e-9 * plain.max(1.0),
            "trial {trial}: trivial modulation must match the single-filter path; \
             got {through_modulator} vs {plain}"
        );
    }
    println!("ACCEPTANCE 06 modulation upper bound over 50 random specs: PASS");
}

#[test]
fn acceptance_07_modulation_sequences_match_filter_banks_at_equal_rate() {
    let p = 2.0;
    let f_q = 0.5;
    for trial in 0..50_u64 {
        let n_subbands = if trial % 2 == 0 { 4 } else { 6 };
        let k = 2 + (trial as usize) % 2;
        let channel = random_piecewise_channel(4000 + trial, n_subbands, f_q)
            .expect("random channel should build");
        let grid = FrequencyGrid::fundamental(f_q, 0.125).expect("grid");
        let f_s = k as f64 * f_q;

        let design = design_modulation_sequence(&channel.h, &channel.s_eta, f_q, k)
            .expect("modulation sequence design");
        let spec = design
            .to_modbank_spec()
            .expect("sequence should describe a bank");
        let via_modulation = capacity_modbank(&channel.h, &channel.s_eta, &spec, f_s, p, &grid)
            .expect("modulated capacity")
            .capacity;
        let via_bank = optimal_filterbank(&channel.h, &channel.s_eta, f_s, k, &grid)
            .expect("selection bank design")
            .capacity(p)
            .expect("selection bank capacity")
            .capacity;
        assert!(
            (via_modulation - via_bank).abs() <= 1e-9 * via_bank.max(1.0),
            "trial {trial}: a single modulated branch must match the {k}-branch \
             selection bank at the same total rate; got {via_modulation} vs {via_bank}"
        );
    }

    // Three-subband example: a modulator whose coefficients shift both
    // strong subbands into disjoint output bands realizes gains {2, 2};
    // a plain prefilter at the same rate is stuck with {2, 1} per bin, and
    // the capacity ordering follows.
    let channel = three_subband_channel().expect("three-subband channel");
    let p = 1.0;
    let mut coeffs = std::collections::BTreeMap::new();
    coeffs.insert(0_i64, Complex64::new(1.0, 0.0));
    coeffs.insert(-3_i64, Complex64::new(1.0, 0.0));
    let mut post_values = vec![0.0; 12];
    post_values[0] = 1.0;
    post_values[1] = 1.0;
    post_values[10] = 1.0;
    post_values[11] = 1.0;
    let spec = ModulationBankSpec {
        branches: vec![ModulationBranch {
            pre_filter: SpectralFunction::constant(SpectrumKind::Premodulation, -1.5, 1.5, 1.0)
                .expect("all-pass"),
            coeffs,
            post_filter: SpectralFunction::from_real(
                SpectrumKind::Prefilter,
                -1.5,
                0.5,
                post_values,
            )
            .expect("post filter"),
        }],
        f_q: 1.0,
        a: 2,
        b: 1,
    };
    let grid = FrequencyGrid::fundamental(1.0, 0.25).expect("grid");
    let bins = modbank_spectrum(&channel.h, &channel.s_eta, &spec, 2.0, &grid)
        .expect("modulated spectrum");
    for bin in &bins {
        assert_eq!(bin.lambda.len(), 2, "two gains per bin at rate 2 f_q");
        for &lambda in &bin.lambda {
            assert!(
                (lambda - 2.0).abs() <= 1e-9,
                "modulated sampler must capture both strong subbands (gain 2), got {lambda}"
            );
        }
    }
    let mod_cap = capacity_modbank(&channel.h, &channel.s_eta, &spec, 2.0, p, &grid)
        .expect("modulated capacity")
        .capacity;

    let filter_grid = FrequencyGrid::fundamental(2.0, 0.5).expect("grid");
    let prefilter =
        optimal_prefilter(&channel.h, &channel.s_eta, 2.0, &filter_grid).expect("prefilter design");
    let gains = prefilter.gains();
    assert!(
        gains.iter().any(|&g| (g - 1.0).abs() <= 1e-9)
            && gains.iter().any(|&g| (g - 2.0).abs() <= 1e-9)
            && gains
                .iter()
                .all(|&g| (g - 1.0).abs() <= 1e-9 || (g - 2.0).abs() <= 1e-9),
        "the plain prefilter at rate 2 sees gains {{2, 1}}, got {gains:?}"
    );
    let filter_cap = capacity_single_filter(
        &channel.h,
        &channel.s_eta,
        &prefilter.filter,
        2.0,
        p,
        &filter_grid,
    )
    .expect("single-filter capacity")
    .capacity;
    assert!(
        mod_cap > filter_cap + 1e-6,
        "capturing {{2, 2}} must beat {{2, 1}} at equal rate and power; \
         got {mod_cap} vs {filter_cap}"
    );
    println!("ACCEPTANCE 07 modulation-sequence equivalence over 50 channels: PASS");
}

#[test]
fn acceptance_08_finite_window_models_converge_to_the_closed_forms() {
    let start = Instant::now();
    let sizes = [32_usize, 64, 128, 256];
    let k = 8;

    // Convergence suite 1: flat channel, all-pass filter, Nyquist rate.
    let flat = flat_channel(0.5).expect("flat channel");
    let allpass =
        SpectralFunction::constant(SpectrumKind::Prefilter, -0.5, 0.5, 1.0).expect("all-pass");
    let closed_flat = 0.5 * 6.0_f64.ln();
    check_convergence("flat channel", &sizes, closed_flat, 5.0, |n| {
        from_spectra(
            &flat.h,
            &flat.s_eta,
            std::slice::from_ref(&allpass),
            1.0,
            n,
            k,
        )
    });

    // Convergence suite 2: multiband channel with its optimal prefilter at
    // a sub-Nyquist rate.
    let multiband = multiband_channel().expect("multiband channel");
    let grid = FrequencyGrid::fundamental(0.4, 0.025).expect("grid");
    let design =
        optimal_prefilter(&multiband.h, &multiband.s_eta, 0.4, &grid).expect("prefilter design");
    let closed_multi = capacity_single_filter(
        &multiband.h,
        &multiband.s_eta,
        &design.filter,
        0.4,
        1.0,
        &grid,
    )
    .expect("closed form")
    .capacity;
    check_convergence(
        "multiband + optimal prefilter",
        &sizes,
        closed_multi,
        1.0,
        |n| {
            from_spectra(
                &multiband.h,
                &multiband.s_eta,
                std::slice::from_ref(&design.filter),
                0.4,
                n,
                k,
            )
        },
    );

    // Convergence suite 3: a two-branch selection bank on a channel with
    // two unequal aliases; the design value has a hand-checkable closed
    // form, ln(13)/2 at P = 3.
    let h = SpectralFunction::from_real(SpectrumKind::Channel, -1.0, 1.0, vec![1.0, 2.0])
        .expect("two-alias channel");
    let s_eta =
        SpectralFunction::constant(SpectrumKind::NoisePsd, -1.0, 1.0, 1.0).expect("unit noise");
    let bank_grid = FrequencyGrid::fundamental(0.5, 0.25).expect("grid");
    let bank = optimal_filterbank(&h, &s_eta, 1.0, 2, &bank_grid).expect("bank design");
    let closed_bank = bank.capacity(3.0).expect("bank capacity").capacity;
    assert!(
        (closed_bank - 0.5 * 13.0_f64.ln()).abs() <= 1e-9,
        "two-branch bank on gains {{4, 4}} at P=3 is ln(13)/2, got {closed_bank}"
    );
    check_convergence("two-alias selection bank", &sizes, closed_bank, 3.0, |n| {
        from_spectra(&h, &s_eta, &bank.filters, 1.0, n, k)
    });

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "criterion must finish in < 2 min, took {elapsed:?}"
    );
    println!("ACCEPTANCE 08 finite-window convergence (three configurations): PASS");
}

/// Run one convergence suite: errors must shrink monotonically over the
/// window sizes and end below 2%.
fn check_convergence<F>(label: &str, sizes: &[usize], closed: f64, p: f64, build: F)
where
    F: Fn(usize) -> subnyq_core::Result<subnyq_oracle::model::DiscreteModel>,
{
    let mut errors = Vec::new();
    for &n in sizes {
        let model = build(n).expect("finite-window model should build");
        let cap = finite_capacity(&model, p).expect("finite-window capacity");
        errors.push((cap - closed).abs() / closed.abs());
    }
    for (i, pair) in errors.windows(2).enumerate() {
        assert!(
            pair[1] < pair[0],
            "{label}: windowed error must shrink monotonically, got {errors:?} \
             (violated between sizes {} and {})",
            sizes[i],
            sizes[i + 1]
        );
    }
    let last = *errors.last().expect("errors");
    assert!(
        last < 0.02,
        "{label}: at n = {} the finite-window capacity must land within 2% of the \
         closed form, got relative error {last}",
        sizes.last().expect("sizes")
    );
}

#[test]
fn acceptance_09_oversampling_without_prefilter_keeps_gaining() {
    let config = sweep_job(
        ChannelConfig {
            name: Some("wideband_noise".to_string()),
            b: Some(0.5),
            noise_bw: Some(1.0),
            ..Default::default()
        },
        SamplerConfig::Direct,
        1.0,
        0.1,
        SweepConfig::Range {
            start: 0.2,
            stop: 1.6,
            step: 0.2,
        },
    );
    let rows = clean_sweep(&config);
    let at = |target: f64| -> f64 {
        rows.iter()
            .find(|r| (r.f_s - target).abs() < 1e-9)
            .unwrap_or_else(|| panic!("sweep should contain f_s = {target}"))
            .capacity
    };
    assert!(
        at(1.2) > at(1.0) + 1e-6,
        "with noise wider than the signal and no prefilter, sampling above the signal's \
         Nyquist rate must keep helping: C(1.2) = {} vs C(1.0) = {}",
        at(1.2),
        at(1.0)
    );
    let pair = non_monotone_pair(&rows, 1e-6);
    assert!(
        pair.is_some(),
        "the unfiltered curve must also be non-monotone somewhere: {:?}",
        rows.iter().map(|r| (r.f_s, r.capacity)).collect::<Vec<_>>()
    );
    println!("ACCEPTANCE 09 above-Nyquist gain without prefiltering: PASS");
}

// Sanity cross-check shared by the convergence suites: the flat-channel
// closed form used above matches the library's own Nyquist evaluation.
#[test]
fn closed_forms_used_by_the_gate_are_self_consistent() {
    let flat = flat_channel(0.5).expect("flat channel");
    let nyq = nyquist_capacity(&flat.h, &flat.s_eta, 5.0).expect("Nyquist capacity");
    assert!(
        (nyq.capacity - 0.5 * 6.0_f64.ln()).abs() <= 1e-12,
        "hardcoded flat closed form must match the library"
    );
    // Alias-free observation of the wideband-noise channel sees unit SNR on
    // the signal band only, so its Nyquist capacity at P=1 is ln(2)/2 — the
    // sampled capacities in the oversampling criterion sit below it.
    let wb = wideband_noise_channel(0.5, 1.0).expect("wideband-noise channel");
    let nyq_wb = nyquist_capacity(&wb.h, &wb.s_eta, 1.0).expect("Nyquist capacity");
    assert!(
        (nyq_wb.capacity - 0.5 * 2.0_f64.ln()).abs() <= 1e-12,
        "unit-power wideband-noise closed form is ln(2)/2, got {}",
        nyq_wb.capacity
    );
}
