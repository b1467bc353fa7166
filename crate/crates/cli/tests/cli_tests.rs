//! End-to-end tests of the command-line driver: config parsing and
//! validation, CSV round-trips, determinism of emitted tables, and the
//! exit-code contract of the compiled binary.

use std::process::{Command, Output};

use subnyq_cli::config::{parse_config, JobConfig, SweepConfig};
use subnyq_cli::emit::{parse_curve_csv, parse_oracle_csv, CapacityCurve, CurveRow};

// ==================== Helpers ====================

/// Run the compiled binary with the given arguments.
fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subnyq"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

/// Write `text` to a temp file and return (dir guard, path string).
fn config_file(text: &str) -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().expect("tempdir should be created");
    let path = dir.path().join("job.json");
    std::fs::write(&path, text).expect("config should be written");
    (dir, path.to_string_lossy().into_owned())
}

const FLAT_CAPACITY_JOB: &str = r#"{
  "channel": { "name": "flat", "b": 0.5 },
  "sampler": { "kind": "direct" },
  "power": 5.0,
  "bin_width": 0.25,
  "f_s": 1.0
}"#;

// ==================== Config parsing ====================

#[test]
fn parsed_configs_round_trip_through_serialization() {
    let text = r#"{
      "channel": { "name": "wideband_noise", "b": 0.5, "noise_bw": 1.0 },
      "sampler": { "kind": "optimal_bank", "branches": 2 },
      "power": 1.0,
      "bin_width": 0.1,
      "sweep": { "start": 0.2, "stop": 1.2, "step": 0.2 },
      "units": "bits",
      "seed": 7
    }"#;
    let config = parse_config(text).expect("config should parse");
    let serialized = serde_json::to_string(&config).expect("config should serialize");
    let reparsed: JobConfig = serde_json::from_str(&serialized).expect("round trip should parse");
    assert_eq!(
        reparsed, config,
        "serialize→parse must reproduce the config"
    );
}

#[test]
fn syntax_errors_report_the_line() {
    let text = "{\n  \"channel\": { \"name\": \"flat\" },\n  \"sampler\": oops\n}";
    let err = parse_config(text).expect_err("malformed JSON must be rejected");
    assert!(
        err.0.contains("line 3"),
        "syntax error should name the offending line, got: {}",
        err.0
    );
}

#[test]
fn unknown_channel_names_are_rejected_with_the_known_list() {
    let text = r#"{
      "channel": { "name": "fractal" },
      "sampler": { "kind": "direct" },
      "power": 1.0,
      "bin_width": 0.1,
      "f_s": 1.0
    }"#;
    let err = parse_config(text).expect_err("unknown channel name must be rejected");
    assert!(
        err.0.contains("unknown channel name `fractal`") && err.0.contains("wideband_noise"),
        "error should name the unknown channel and list the known ones, got: {}",
        err.0
    );
}

#[test]
fn rates_that_do_not_fit_the_bin_width_are_rejected_up_front() {
    let text = r#"{
      "channel": { "name": "flat" },
      "sampler": { "kind": "direct" },
      "power": 1.0,
      "bin_width": 0.3,
      "sweep": [0.6, 0.7]
    }"#;
    let err = parse_config(text).expect_err("0.7 is not an integer number of 0.3 bins");
    assert!(
        err.0.contains("0.7") && err.0.contains("bin"),
        "error should name the misaligned rate, got: {}",
        err.0
    );
}

#[test]
fn modulated_samplers_reject_sweeps_and_mismatched_rates() {
    let base = r#"{
      "channel": { "name": "flat" },
      "sampler": { "kind": "optimal_modulation", "f_q": 0.5, "subbands": 2 },
      "power": 1.0,
      "bin_width": 0.25,
      RATES
    }"#;
    let swept = base.replace("RATES", r#""sweep": [0.5, 1.0]"#);
    let err = parse_config(&swept).expect_err("modulated sampler must reject a sweep");
    assert!(
        err.0.contains("tie"),
        "error should explain the rate tie, got: {}",
        err.0
    );

    let wrong = base.replace("RATES", r#""f_s": 0.75"#);
    let err = parse_config(&wrong).expect_err("rate off the tie must be rejected");
    assert!(
        err.0.contains("ties the rate to 1"),
        "error should state the pinned rate, got: {}",
        err.0
    );
}

#[test]
fn range_sweeps_expand_to_the_inclusive_grid() {
    let sweep = SweepConfig::Range {
        start: 0.2,
        stop: 1.0,
        step: 0.2,
    };
    let rates = sweep.rates().expect("range should expand");
    assert_eq!(
        rates.len(),
        5,
        "inclusive range 0.2..1.0 step 0.2 has 5 rates"
    );
    for (i, r) in rates.iter().enumerate() {
        let want = 0.2 * (i + 1) as f64;
        assert!(
            (r - want).abs() < 1e-12,
            "rate {i} should be {want}, got {r}"
        );
    }
}

// ==================== CSV round-trips ====================

#[test]
fn curve_csv_round_trips_bit_for_bit() {
    let curve = CapacityCurve {
        sampler: "direct".to_string(),
        units: "nats".to_string(),
        landau_rate: 0.4,
        rows: vec![
            CurveRow {
                f_s: 0.30000000000000004,
                capacity: 0.8958797346140275,
                nu: 5.666666666666667,
                nyquist_capacity: 0.8958797346140275,
                error: None,
            },
            CurveRow {
                f_s: 0.6,
                capacity: f64::NAN,
                nu: f64::NAN,
                nyquist_capacity: 0.8958797346140275,
                error: Some("whitening failed; eigenvalue 0e0 below threshold".to_string()),
            },
        ],
    };
    let text = curve.to_csv();
    let rows = parse_curve_csv(&text).expect("emitted CSV should parse");
    assert_eq!(rows.len(), 2, "row count should survive the round trip");
    for (parsed, original) in rows.iter().zip(&curve.rows) {
        assert_eq!(
            parsed.f_s.to_bits(),
            original.f_s.to_bits(),
            "f_s must round-trip exactly"
        );
        assert_eq!(
            parsed.capacity.to_bits(),
            original.capacity.to_bits(),
            "capacity (including NaN) must round-trip exactly"
        );
        assert_eq!(
            parsed.nu.to_bits(),
            original.nu.to_bits(),
            "nu must round-trip exactly"
        );
        assert_eq!(
            parsed.error, original.error,
            "error field must round-trip verbatim"
        );
    }
    let again = CapacityCurve {
        rows,
        ..curve.clone()
    };
    assert_eq!(
        again.to_csv(),
        text,
        "re-emitting parsed rows must reproduce the bytes"
    );
}

// ==================== Binary: capacity and units ====================

#[test]
fn flat_channel_capacity_matches_the_closed_form_through_the_binary() {
    let (_dir, path) = config_file(FLAT_CAPACITY_JOB);
    let out = run_bin(&["capacity", &path]);
    assert!(
        out.status.success(),
        "capacity run should succeed: {:?}",
        out
    );
    let rows = parse_curve_csv(&String::from_utf8(out.stdout).expect("stdout should be UTF-8"))
        .expect("stdout should be curve CSV");
    assert_eq!(rows.len(), 1, "single-rate capacity emits one row");
    let want = 0.5 * 6.0_f64.ln();
    assert!(
        (rows[0].capacity - want).abs() < 1e-9,
        "flat channel at Nyquist with P=5 should give ln(6)/2 = {want}, got {}",
        rows[0].capacity
    );
    assert!(
        (rows[0].nyquist_capacity - want).abs() < 1e-9,
        "Nyquist column should equal the same closed form at full rate"
    );
    assert!(
        rows[0].error.is_none(),
        "successful row must leave the error field empty"
    );
}

#[test]
fn bit_units_divide_capacities_by_ln2_and_leave_nu_alone() {
    let (_dir, path) = config_file(FLAT_CAPACITY_JOB);
    let nats = run_bin(&["capacity", &path]);
    let bits = run_bin(&["capacity", &path, "--units", "bits"]);
    assert!(
        nats.status.success() && bits.status.success(),
        "both runs should succeed"
    );
    let nats_text = String::from_utf8(nats.stdout).expect("UTF-8");
    let bits_text = String::from_utf8(bits.stdout).expect("UTF-8");
    let nats_row = &parse_curve_csv(&nats_text).expect("curve CSV")[0];
    let bits_row = &parse_curve_csv(&bits_text).expect("curve CSV")[0];
    assert_eq!(
        bits_row.capacity.to_bits(),
        (nats_row.capacity / std::f64::consts::LN_2).to_bits(),
        "bits must equal nats divided by ln 2, bit for bit"
    );
    assert_eq!(
        bits_row.nyquist_capacity.to_bits(),
        (nats_row.nyquist_capacity / std::f64::consts::LN_2).to_bits(),
        "the Nyquist column converts the same way"
    );
    assert_eq!(
        bits_row.nu.to_bits(),
        nats_row.nu.to_bits(),
        "the water level is not a logarithmic quantity and must not change"
    );
}

// ==================== Binary: sweeps ====================

#[test]
fn sweep_output_is_byte_identical_across_runs_and_destinations() {
    let job = r#"{
      "channel": { "name": "wideband_noise", "b": 0.5, "noise_bw": 1.0 },
      "sampler": { "kind": "direct" },
      "power": 1.0,
      "bin_width": 0.1,
      "sweep": [0.4, 0.8, 1.2]
    }"#;
    let (dir, path) = config_file(job);
    let first = run_bin(&["sweep", &path]);
    let second = run_bin(&["sweep", &path]);
    assert!(
        first.status.success() && second.status.success(),
        "sweeps should succeed"
    );
    assert_eq!(
        first.stdout, second.stdout,
        "repeated sweeps must emit identical bytes"
    );

    let out_path = dir.path().join("curve.csv");
    let filed = run_bin(&["sweep", &path, "--out", &out_path.to_string_lossy()]);
    assert!(filed.status.success(), "sweep with --out should succeed");
    let file_bytes = std::fs::read(&out_path).expect("output file should exist");
    assert_eq!(
        file_bytes, first.stdout,
        "--out must write the same bytes that stdout would carry"
    );

    let rows = parse_curve_csv(&String::from_utf8(first.stdout).expect("UTF-8"))
        .expect("sweep output should be curve CSV");
    assert_eq!(rows.len(), 3, "one row per swept rate");
    assert!(
        rows.windows(2).all(|w| w[0].f_s < w[1].f_s),
        "rows must be sorted by ascending sampling rate"
    );
}

#[test]
fn a_rate_that_fails_numerically_yields_a_nan_row_not_an_abort() {
    // Two identical branches make the sampled noise covariance exactly
    // singular at every rate, so each row fails while the sweep proceeds.
    let job = r#"{
      "channel": { "name": "flat", "b": 0.5 },
      "sampler": { "kind": "bank", "filters": [
        { "kind": "prefilter", "support_lo": -0.5, "bin_width": 1.0, "values": [1.0] },
        { "kind": "prefilter", "support_lo": -0.5, "bin_width": 1.0, "values": [1.0] }
      ] },
      "power": 1.0,
      "bin_width": 0.1,
      "sweep": [0.4, 0.8]
    }"#;
    let (_dir, path) = config_file(job);
    let out = run_bin(&["sweep", &path]);
    assert!(
        out.status.success(),
        "a sweep with failing rates still exits 0: {:?}",
        out.status
    );
    let rows = parse_curve_csv(&String::from_utf8(out.stdout).expect("UTF-8"))
        .expect("sweep output should be curve CSV");
    assert_eq!(rows.len(), 2, "failed rates still get rows");
    for row in &rows {
        assert!(
            row.capacity.is_nan(),
            "failed rate must report NaN capacity"
        );
        let message = row
            .error
            .as_deref()
            .expect("failed rate must carry a diagnostic");
        assert!(
            !message.contains(','),
            "diagnostics must stay in one CSV field"
        );
        assert!(
            row.nyquist_capacity.is_finite(),
            "the channel-level Nyquist column is rate-independent and must survive"
        );
    }
}

// ==================== Binary: exit codes ====================

#[test]
fn configuration_problems_exit_with_code_2() {
    let (_dir, path) = config_file(r#"{ "channel": { "name": "flat" } }"#);
    let out = run_bin(&["capacity", &path]);
    assert_eq!(out.status.code(), Some(2), "incomplete config must exit 2");
    let stderr = String::from_utf8(out.stderr).expect("UTF-8");
    assert!(
        stderr.contains("error:"),
        "stderr should carry the diagnostic, got: {stderr}"
    );

    let out = run_bin(&["capacity", "/nonexistent/job.json"]);
    assert_eq!(out.status.code(), Some(2), "unreadable config must exit 2");
}

#[test]
fn numeric_failures_exit_with_code_3() {
    let job = r#"{
      "channel": { "name": "flat", "b": 0.5 },
      "sampler": { "kind": "bank", "filters": [
        { "kind": "prefilter", "support_lo": -0.5, "bin_width": 1.0, "values": [1.0] },
        { "kind": "prefilter", "support_lo": -0.5, "bin_width": 1.0, "values": [1.0] }
      ] },
      "power": 1.0,
      "bin_width": 0.1,
      "f_s": 0.8
    }"#;
    let (_dir, path) = config_file(job);
    let out = run_bin(&["capacity", &path]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "a singular sampled-noise covariance is a numeric failure: {:?}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_errors_exit_with_code_2() {
    let out = run_bin(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2), "unknown subcommand must exit 2");
}

// ==================== Binary: design and oracle ====================

#[test]
fn designed_samplers_are_valid_sampler_configs() {
    let job = r#"{
      "channel": { "name": "wideband_noise", "b": 0.5, "noise_bw": 1.0 },
      "sampler": { "kind": "optimal_filter" },
      "power": 1.0,
      "bin_width": 0.1,
      "f_s": 0.4
    }"#;
    let (_dir, path) = config_file(job);
    let out = run_bin(&["design", &path]);
    assert!(out.status.success(), "design should succeed: {:?}", out);
    let text = String::from_utf8(out.stdout).expect("UTF-8");
    let designed: subnyq_cli::config::SamplerConfig =
        serde_json::from_str(&text).expect("design output should parse as a sampler config");
    match designed {
        subnyq_cli::config::SamplerConfig::Filter { filter } => {
            assert!(
                !filter.values.is_empty(),
                "designed prefilter should carry bins"
            );
        }
        other => panic!("optimal_filter design should emit kind filter, got {other:?}"),
    }
}

#[test]
fn oracle_report_shows_the_window_error_shrinking() {
    let (_dir, path) = config_file(FLAT_CAPACITY_JOB);
    let out = run_bin(&["oracle", &path, "--n", "8,16,32", "--k", "4"]);
    assert!(out.status.success(), "oracle run should succeed: {:?}", out);
    let rows = parse_oracle_csv(&String::from_utf8(out.stdout).expect("UTF-8"))
        .expect("oracle output should be the convergence CSV");
    assert_eq!(rows.len(), 3, "one row per window size");
    assert!(
        rows.windows(2).all(|w| w[1].rel_error < w[0].rel_error),
        "relative error must shrink as the window grows: {:?}",
        rows.iter().map(|r| r.rel_error).collect::<Vec<_>>()
    );
    assert!(
        rows.last().expect("rows").rel_error < 0.05,
        "the largest window should land within 5% of the closed form"
    );
}
