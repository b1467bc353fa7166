//! Frozen examples and property tests for the spectral primitives.

use num_complex::Complex64;
use proptest::prelude::*;
use subnyq_core::spectra::{
    aliased_set, approx_gcd, folded_snr, ratio_as_integer, spectral_product_integral, support_hull,
    FrequencyGrid, ProductTerm, SpectralFunction, SpectrumKind,
};
use subnyq_core::Error;

fn table(kind: SpectrumKind, lo: f64, w: f64, vals: &[f64]) -> SpectralFunction {
    SpectralFunction::from_real(kind, lo, w, vals.to_vec()).expect("valid table")
}

fn flat(kind: SpectrumKind, lo: f64, hi: f64, v: f64) -> SpectralFunction {
    SpectralFunction::constant(kind, lo, hi, v).expect("valid constant")
}

// ============================================================================
// Evaluation and half-open bins
// ============================================================================

#[test]
fn eval_uses_half_open_bins() {
    let h = flat(SpectrumKind::Channel, -0.5, 0.5, 1.0);
    assert_eq!(h.eval(0.3), Complex64::new(1.0, 0.0), "interior point");
    assert_eq!(h.eval(0.7), Complex64::new(0.0, 0.0), "outside support");
    assert_eq!(
        h.eval(-0.5),
        Complex64::new(1.0, 0.0),
        "lower edge included"
    );
    assert_eq!(h.eval(0.5), Complex64::new(0.0, 0.0), "upper edge excluded");
}

#[test]
fn eval_snaps_to_bin_edges_against_rounding() {
    // A point that floating-point arithmetic puts a hair below an edge must
    // still read from the bin the edge opens.
    let g = table(
        SpectrumKind::Channel,
        -0.3,
        0.1,
        &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
    );
    let edge = -0.3 + 3.0 * 0.1; // analytically 0.0, numerically below it
    assert_eq!(g.eval(edge).re, 4.0, "edge belongs to the opening bin");
    assert_eq!(g.eval(0.0).re, 4.0);
    assert_eq!(
        g.eval(0.0 - 1e-12).re,
        4.0,
        "rounding dust below an edge snaps up"
    );
    assert_eq!(g.eval(-0.05).re, 3.0, "interior of previous bin unaffected");
}

#[test]
fn psd_kinds_reject_negative_and_complex_values() {
    assert!(SpectralFunction::from_real(SpectrumKind::NoisePsd, 0.0, 1.0, vec![-1.0]).is_err());
    assert!(SpectralFunction::new(
        SpectrumKind::InputPsd,
        0.0,
        1.0,
        vec![Complex64::new(1.0, 0.5)]
    )
    .is_err());
    assert!(SpectralFunction::from_real(SpectrumKind::Channel, 0.0, 1.0, vec![-1.0]).is_ok());
}

#[test]
fn support_hull_spans_both_functions() {
    let a = flat(SpectrumKind::Channel, -0.5, 0.5, 1.0);
    let b = flat(SpectrumKind::NoisePsd, -1.0, 0.25, 1.0);
    assert_eq!(support_hull(&a, &b), (-1.0, 0.5));
}

// ============================================================================
// Aliased sets
// ============================================================================

/// Brute-force reference: scan a range of l wide enough for every input the
/// property generates (|base| ≤ 3, spacing ≥ 0.11, support within [−5, 1)).
fn brute_force_aliases(base_f: f64, spacing: f64, support: (f64, f64)) -> Vec<i64> {
    (-200..=200)
        .filter(|&l| {
            let f = base_f - l as f64 * spacing;
            f >= support.0 && f < support.1
        })
        .collect()
}

#[test]
fn aliased_set_frozen_examples() {
    let set = aliased_set(0.1, 0.6, (-0.5, 0.5));
    let indices: Vec<i64> = set.iter_freqs().map(|(l, _)| l).collect();
    assert_eq!(
        indices,
        vec![0, 1],
        "0.1 and 0.1−0.6 = −0.5 are inside [−0.5, 0.5)"
    );
    assert_eq!(set.freq(1), -0.5);

    let set = aliased_set(0.0, 1.0, (-0.5, 0.5));
    let indices: Vec<i64> = set.iter_freqs().map(|(l, _)| l).collect();
    assert_eq!(
        indices,
        vec![0],
        "only l = 0 lands inside the half-open interval"
    );

    assert!(
        aliased_set(0.0, 1.0, (0.0, 0.0)).is_empty(),
        "empty support"
    );
}

#[test]
fn aliased_set_boundary_tolerance() {
    // The image lands on the lower edge exactly: included (half-open).
    let set = aliased_set(0.5, 1.0, (-0.5, 0.5));
    let indices: Vec<i64> = set.iter_freqs().map(|(l, _)| l).collect();
    assert_eq!(
        indices,
        vec![1],
        "0.5 excluded at the top, −0.5 included at the bottom"
    );
}

proptest! {
    #[test]
    fn aliased_set_matches_brute_force(
        base in -3.0..3.0f64,
        spacing in 0.11..2.0f64,
        lo in -5.0..0.0f64,
        width in 0.0..6.0f64,
    ) {
        let support = (lo, lo + width);
        let got: Vec<i64> = aliased_set(base, spacing, support)
            .iter_freqs()
            .map(|(l, _)| l)
            .collect();
        let want = brute_force_aliases(base, spacing, support);
        // The library applies a relative edge tolerance; disagreements are
        // only admissible within that sliver of the boundary, so every index
        // in the symmetric difference must map near a support edge.
        let tol = 1e-8 * spacing.max(base.abs()).max(1.0);
        for l in got.iter().filter(|l| !want.contains(l))
            .chain(want.iter().filter(|l| !got.contains(l)))
        {
            let f = base - *l as f64 * spacing;
            let near_edge = (f - support.0).abs() <= tol || (f - support.1).abs() <= tol;
            prop_assert!(near_edge, "mismatch away from support edges: l = {l}, f = {f}");
        }
    }

    #[test]
    fn aliased_set_shifts_by_one_index(
        base in -2.0..2.0f64,
        spacing in 0.1..1.5f64,
    ) {
        let support = (-3.0, 3.0);
        let a: Vec<i64> = aliased_set(base, spacing, support).iter_freqs().map(|(l, _)| l).collect();
        let b: Vec<i64> = aliased_set(base + spacing, spacing, support)
            .iter_freqs()
            .map(|(l, _)| l)
            .collect();
        let shifted: Vec<i64> = a.iter().map(|l| l + 1).collect();
        prop_assert_eq!(shifted, b);
    }
}

// ============================================================================
// Folded SNR
// ============================================================================

/// Two-alias fixture at f_s = 1: alias at f has |H|² = 4, alias at f−1 has
/// |H|² = 1, unit noise everywhere.
fn two_alias_channel() -> (SpectralFunction, SpectralFunction) {
    let h = table(SpectrumKind::Channel, -1.0, 1.0, &[1.0, 2.0]);
    let s_eta = flat(SpectrumKind::NoisePsd, -1.0, 1.0, 1.0);
    (h, s_eta)
}

#[test]
fn folded_snr_equal_weights() {
    let (h, s_eta) = two_alias_channel();
    let s = flat(SpectrumKind::Prefilter, -1.0, 1.0, 1.0);
    let got = folded_snr(&h, &s_eta, &s, 1.0, 0.25).expect("bounded");
    assert!((got - 2.5).abs() < 1e-12, "(4+1)/(1+1) = 5/2, got {got}");
}

#[test]
fn folded_snr_selection_filter() {
    let (h, s_eta) = two_alias_channel();
    let s = table(SpectrumKind::Prefilter, -1.0, 1.0, &[0.0, 1.0]);
    let got = folded_snr(&h, &s_eta, &s, 1.0, 0.25).expect("bounded");
    assert!(
        (got - 4.0).abs() < 1e-12,
        "selection keeps the strong alias, got {got}"
    );
}

#[test]
fn folded_snr_no_aliasing_is_pointwise_snr() {
    let h = flat(SpectrumKind::Channel, -0.5, 0.5, 1.0);
    let s_eta = flat(SpectrumKind::NoisePsd, -0.5, 0.5, 1.0);
    let s = flat(SpectrumKind::Prefilter, -0.5, 0.5, 1.0);
    for &f in &[-0.45, -0.2, 0.0, 0.3, 0.49] {
        let got = folded_snr(&h, &s_eta, &s, 1.0, f).expect("bounded");
        assert!(
            (got - 1.0).abs() < 1e-12,
            "flat channel at Nyquist: γ(f) = 1, got {got}"
        );
    }
}

#[test]
fn folded_snr_zero_numerator_is_zero() {
    // The filter passes only a noise-only region: no signal, finite noise.
    let h = table(SpectrumKind::Channel, -1.0, 1.0, &[0.0, 2.0]);
    let s_eta = flat(SpectrumKind::NoisePsd, -1.0, 1.0, 1.0);
    let s = table(SpectrumKind::Prefilter, -1.0, 1.0, &[1.0, 0.0]);
    let got = folded_snr(&h, &s_eta, &s, 1.0, 0.25).expect("bounded");
    assert_eq!(got, 0.0);
}

#[test]
fn folded_snr_degenerate_filter_rejected() {
    // The filter passes only a band where the noise PSD vanishes but the
    // channel does not: the sampled noise has no power while signal gets
    // through, so the observation SNR is unbounded.
    let h = table(SpectrumKind::Channel, -1.0, 1.0, &[1.0, 2.0]);
    let s_eta = table(SpectrumKind::NoisePsd, -1.0, 1.0, &[1.0, 0.0]);
    let s = table(SpectrumKind::Prefilter, -1.0, 1.0, &[0.0, 1.0]);
    match folded_snr(&h, &s_eta, &s, 1.0, 0.25) {
        Err(Error::DegenerateFilter { .. }) => {}
        other => panic!("expected DegenerateFilter, got {other:?}"),
    }
}

#[test]
fn folded_snr_all_zero_filter_is_zero() {
    // A filter that blocks everything yields a zero sampled sequence: no
    // signal, no noise, SNR 0 by convention (not an error).
    let (h, s_eta) = two_alias_channel();
    let s = table(SpectrumKind::Prefilter, -1.0, 1.0, &[0.0, 0.0]);
    let got = folded_snr(&h, &s_eta, &s, 1.0, 0.25).expect("zero filter is not degenerate");
    assert_eq!(got, 0.0);
}

proptest! {
    /// γ^s(f) is a convex combination of the per-alias SNRs γ_l(f).
    #[test]
    fn folded_snr_between_alias_extremes(
        h2 in prop::collection::vec(0.0..4.0f64, 4),
        s2 in prop::collection::vec(0.01..2.0f64, 4),
        f in -0.49..0.49f64,
    ) {
        let h = table(SpectrumKind::Channel, -2.0, 1.0,
                      &h2.iter().map(|v| v.sqrt()).collect::<Vec<_>>());
        let s_eta = flat(SpectrumKind::NoisePsd, -2.0, 2.0, 1.0);
        let s = table(SpectrumKind::Prefilter, -2.0, 1.0, &s2);
        let got = folded_snr(&h, &s_eta, &s, 1.0, f).unwrap();
        let gains: Vec<f64> = aliased_set(f, 1.0, (-2.0, 2.0))
            .iter_freqs()
            .map(|(_, fr)| h.abs2(fr))
            .collect();
        let lo = gains.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = gains.iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(got >= lo - 1e-9 && got <= hi + 1e-9,
            "γ^s = {got} outside [{lo}, {hi}]");
    }

    /// Scaling the prefilter by any nonzero complex constant changes nothing.
    #[test]
    fn folded_snr_filter_scale_invariant(
        s2 in prop::collection::vec(0.01..2.0f64, 2),
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
        f in -0.49..0.49f64,
    ) {
        prop_assume!(re * re + im * im > 1e-3);
        let (h, s_eta) = two_alias_channel();
        let s = table(SpectrumKind::Prefilter, -1.0, 1.0, &s2);
        let scaled = s.scaled(Complex64::new(re, im));
        let a = folded_snr(&h, &s_eta, &s, 1.0, f).unwrap();
        let b = folded_snr(&h, &s_eta, &scaled, 1.0, f).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }
}

// ============================================================================
// Exact product quadrature
// ============================================================================

#[test]
fn product_integral_flat_dc() {
    let g = flat(SpectrumKind::Channel, 0.0, 1.0, 1.0);
    let got = spectral_product_integral(&[ProductTerm::new(&g)], 0.0);
    assert!((got - Complex64::new(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn product_integral_flat_against_exponential() {
    // ∫_0^1 e^{j2πxf} df = e^{jπx}·sinc(πx).
    let g = flat(SpectrumKind::Channel, 0.0, 1.0, 1.0);
    for &x in &[0.25, 1.0, 2.5, -0.7, 1e-6] {
        let got = spectral_product_integral(&[ProductTerm::new(&g)], x);
        let arg = std::f64::consts::PI * x;
        let want = Complex64::from_polar(1.0, arg) * (arg.sin() / arg);
        assert!(
            (got - want).norm() < 1e-12,
            "x = {x}: got {got}, want {want}"
        );
    }
}

#[test]
fn product_integral_overlap_of_shifted_factors() {
    // 1 on [0,1) times 1 on [0,1) shifted by 0.25: overlap [0.25, 1) of
    // width 0.75.
    let g = flat(SpectrumKind::Channel, 0.0, 1.0, 1.0);
    let got = spectral_product_integral(
        &[ProductTerm::new(&g), ProductTerm::new(&g).shifted(0.25)],
        0.0,
    );
    assert!((got.re - 0.75).abs() < 1e-15 && got.im.abs() < 1e-15);
}

#[test]
fn product_integral_conjugation() {
    let g = SpectralFunction::new(
        SpectrumKind::Prefilter,
        0.0,
        1.0,
        vec![Complex64::new(0.0, 2.0)],
    )
    .expect("valid");
    let plain = spectral_product_integral(&[ProductTerm::new(&g)], 0.0);
    let conj = spectral_product_integral(&[ProductTerm::new(&g).conjugated()], 0.0);
    assert!((plain - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    assert!((conj - Complex64::new(0.0, -2.0)).norm() < 1e-15);
}

#[test]
fn product_integral_disjoint_supports_vanish() {
    let a = flat(SpectrumKind::Channel, 0.0, 1.0, 3.0);
    let b = flat(SpectrumKind::Channel, 2.0, 3.0, 5.0);
    let got = spectral_product_integral(&[ProductTerm::new(&a), ProductTerm::new(&b)], 0.3);
    assert_eq!(got, Complex64::new(0.0, 0.0));
}

proptest! {
    /// |g|² integrates to a real, nonnegative value for any x = 0 and scales
    /// quadratically under scalar multiplication.
    #[test]
    fn product_integral_energy_properties(
        vals in prop::collection::vec(-2.0..2.0f64, 3),
        c in 0.1..3.0f64,
    ) {
        let g = table(SpectrumKind::Prefilter, -1.0, 0.5, &vals);
        let energy = spectral_product_integral(
            &[ProductTerm::new(&g), ProductTerm::new(&g).conjugated()], 0.0);
        prop_assert!(energy.im.abs() < 1e-12);
        prop_assert!(energy.re >= -1e-12);
        let scaled = g.scaled(Complex64::new(c, 0.0));
        let scaled_energy = spectral_product_integral(
            &[ProductTerm::new(&scaled), ProductTerm::new(&scaled).conjugated()], 0.0);
        prop_assert!((scaled_energy.re - c * c * energy.re).abs() <= 1e-9 * (1.0 + energy.re));
    }
}

// ============================================================================
// Grids and commensurability
// ============================================================================

#[test]
fn fundamental_grid_rejects_incommensurate_span() {
    assert!(FrequencyGrid::fundamental(1.0, 0.05).is_ok());
    assert!(
        FrequencyGrid::fundamental(1.0, 0.3).is_err(),
        "1/0.3 is not an integer"
    );
}

#[test]
fn fundamental_grid_centers_are_symmetric() {
    let grid = FrequencyGrid::fundamental(1.0, 0.25).expect("commensurate");
    let centers: Vec<f64> = grid.centers().collect();
    assert_eq!(centers.len(), 4);
    assert!((centers[0] + 0.375).abs() < 1e-12);
    assert!((centers[3] - 0.375).abs() < 1e-12);
}

#[test]
fn ratio_and_gcd_helpers() {
    assert_eq!(ratio_as_integer(1.0, 0.05), Some(20));
    assert_eq!(ratio_as_integer(1.0, 0.3), None);
    let g = approx_gcd(&[0.3, 0.2, 0.5]).expect("commensurate set");
    assert!((g - 0.1).abs() < 1e-9, "gcd(0.3, 0.2, 0.5) = 0.1, got {g}");
    assert!(approx_gcd(&[1.0, std::f64::consts::SQRT_2]).is_none());
}
