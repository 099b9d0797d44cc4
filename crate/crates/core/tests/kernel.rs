mod common;

use std::f64::consts::PI;

use bsvsim_core::kernel::{sample_harmonics, sample_joint, SegmentStack};
use bsvsim_core::{default_grid, pump_envelope, sample_kernel, tpa_multi_segment, tpa_single_crystal, RadialGrid, Segment, Setup};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

/// Direct z-integration of the phase-matching integral with composite Simpson:
/// ∫ χ(z) exp(i Φ(z)) dz with dΦ/dz = |q_s - q_i|²/(2k) + ρ(z)(q_s + q_i)_x.
fn z_integral(setup: &Setup, qs: [f64; 2], qi: [f64; 2], steps_per_segment: usize) -> Complex64 {
    let d2 = (qs[0] - qi[0]).powi(2) + (qs[1] - qi[1]).powi(2);
    let sx = qs[0] + qi[0];
    let sy = qs[1] + qi[1];
    let mut phase = 0.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for seg in &setup.segments {
        let len = seg.length_mm * 1e3;
        let rate = d2 / (2.0 * setup.pump.k_p) + seg.walkoff_mrad * 1e-3 * sx;
        if seg.kind == bsvsim_core::SegmentKind::Crystal {
            let n = 2 * steps_per_segment;
            let h = len / n as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..=n {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * Complex64::from_polar(1.0, phase + rate * h * i as f64);
            }
            acc += s * (h / 3.0);
        }
        phase += rate * len;
    }
    let q = (sx * sx + sy * sy).sqrt();
    acc * (-0.5 * (setup.pump.sigma_um * q).powi(2)).exp()
}

#[test]
fn envelope_examples() {
    let sigma = 120.0 / (2.0 * 2f64.ln().sqrt());
    assert_eq!(pump_envelope(0.0, sigma), 1.0);
    assert!((pump_envelope(1.0 / sigma, sigma) - (-0.5f64).exp()).abs() < 1e-15);
    assert!((pump_envelope(-2.0 / sigma, sigma) - (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn single_crystal_is_exchange_symmetric() {
    let s = single_crystal();
    let mut rng = Rng(7);
    for _ in 0..50 {
        let a = [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)];
        let b = [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)];
        let f = tpa_single_crystal(a, b, &s).unwrap();
        let g = tpa_single_crystal(b, a, &s).unwrap();
        assert!((f - g).norm() <= 1e-15 * f.norm().max(1e-300));
    }
}

#[test]
fn single_crystal_on_axis_and_at_sinc_zero() {
    let s = single_crystal();
    let f = tpa_single_crystal([0.0, 0.0], [0.0, 0.0], &s).unwrap();
    assert!((f - Complex64::new(3000.0, 0.0)).norm() < 1e-12);
    // Anti-correlated pair with |q_s - q_i|² L/(4 k_p) = π.
    let d = (4.0 * PI * s.pump.k_p / 3000.0).sqrt();
    let f = tpa_single_crystal([0.0, d / 2.0], [0.0, -d / 2.0], &s).unwrap();
    assert!(f.norm() < 1e-11);
}

#[test]
fn multi_segment_reduces_to_single_crystal() {
    let s = single_crystal();
    let mut rng = Rng(11);
    for _ in 0..20 {
        let a = [rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)];
        let b = [rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)];
        let f = tpa_single_crystal(a, b, &s).unwrap();
        let g = tpa_multi_segment(a, b, &s);
        assert!((f - g).norm() <= 1e-12 * 3000.0, "{f} vs {g}");
    }
}

#[test]
fn adjacent_crystals_act_as_one() {
    let one = setup(vec![Segment::crystal(2.0, 0.0)], 100.0);
    let two = setup(vec![Segment::crystal(1.0, 0.0), Segment::crystal(1.0, 0.0)], 100.0);
    let mut rng = Rng(3);
    for _ in 0..20 {
        let a = [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)];
        let b = [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)];
        let f = tpa_multi_segment(a, b, &one);
        let g = tpa_multi_segment(a, b, &two);
        assert!((f - g).norm() < 1e-11 * 2000.0);
    }
}

#[test]
fn multi_segment_matches_z_integration() {
    let cases = [
        two_crystals(1.0, 3.0, 120.0, [0.0, 0.0]),
        two_crystals(1.0, 8.0, 35.0, [25.0, 25.0]),
        two_crystals(1.0, 8.0, 35.0, [25.0, -25.0]),
    ];
    let mut rng = Rng(99);
    for s in &cases {
        for _ in 0..15 {
            let a = [rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25)];
            let b = [rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25)];
            let f = tpa_multi_segment(a, b, s);
            let o = z_integral(s, a, b, 400);
            assert!((f - o).norm() < 1e-9 * 1000.0, "{f} vs {o}");
        }
    }
}

#[test]
fn interference_minima_do_not_depend_on_the_pump() {
    // Anti-correlated pairs (q_s + q_i = 0) along a line: the envelope is 1 and
    // zeros come from the two-crystal interference only.
    let narrow = two_crystals(1.0, 3.0, 120.0, [0.0, 0.0]);
    let wide = two_crystals(1.0, 3.0, 500.0, [0.0, 0.0]);
    let qs: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-4).collect();
    let minima = |s: &Setup| -> Vec<f64> {
        let y: Vec<f64> = qs.iter().map(|&q| tpa_multi_segment([q, 0.0], [-q, 0.0], s).norm()).collect();
        (1..y.len() - 1).filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1]).map(|i| qs[i]).collect()
    };
    let a = minima(&narrow);
    let b = minima(&wide);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    // Interference zeros: (2q)²(L + d)/(2k_p) = (2m+1)π, with L the crystal and d the gap.
    let k = narrow.pump.k_p;
    let first = (PI * 2.0 * k / 4000.0).sqrt() / 2.0;
    assert!((a[0] - first).abs() < 2e-4, "{} vs {first}", a[0]);
}

#[test]
fn flat_and_cosine_kernels() {
    let grid = RadialGrid::new(12, 1.0, 4);
    let flat = sample_harmonics(&grid, |_, _| Complex64::new(1.0, 0.0));
    for (h, chi) in flat.chi.iter().enumerate() {
        let expect = if h == 4 { 1.0 } else { 0.0 };
        assert!(chi.iter().all(|v| (v - Complex64::new(expect, 0.0)).norm() < 1e-14));
    }
    // cos(φ_s - φ_i) = (e^{iΔ} + e^{-iΔ})/2: only n = ±1 with weight 1/2.
    let cosine = sample_harmonics(&grid, |qs, qi| {
        let d = qs[1].atan2(qs[0]) - qi[1].atan2(qi[0]);
        Complex64::new(d.cos(), 0.0)
    });
    for (h, chi) in cosine.chi.iter().enumerate() {
        let expect = if h == 3 || h == 5 { 0.5 } else { 0.0 };
        assert!(chi.iter().all(|v| (v - Complex64::new(expect, 0.0)).norm() < 1e-14), "h={h}");
    }
    assert!((flat.total_power - flat.retained_power).abs() < 1e-14 * flat.total_power);
}

#[test]
fn total_power_matches_independent_quadrature() {
    let s = setup(vec![Segment::crystal(1.0, 0.0)], 120.0);
    // Half the default support keeps the angular content resolvable by both rules.
    let grid = RadialGrid::new(40, 0.5 * default_grid(&s).q_max, 96);
    let stack = SegmentStack::new(&s);
    let raw = sample_harmonics(&grid, |a, b| stack.amplitude(a, b));
    let (x, w) = bsvsim_core::grid::gauss_legendre(1000);
    let mut total = 0.0;
    for j in 0..grid.n_points {
        for k in 0..grid.n_points {
            let (qj, qk) = (grid.nodes[j], grid.nodes[k]);
            let ang: f64 = x
                .iter()
                .zip(&w)
                .map(|(t, wt)| {
                    let phi = PI * (t + 1.0);
                    wt * PI * stack.amplitude([qj, 0.0], [qk * phi.cos(), qk * phi.sin()]).norm_sqr()
                })
                .sum();
            total += 2.0 * PI * grid.weights[j] * qj * grid.weights[k] * qk * ang;
        }
    }
    assert!((raw.total_power - total).abs() < 1e-10 * total, "{} vs {total}", raw.total_power);
}

#[test]
fn normalized_kernel_has_unit_norm() {
    let s = two_crystals(1.0, 3.0, 120.0, [0.0, 0.0]);
    let grid = RadialGrid::new(64, default_grid(&s).q_max, 24);
    let k = sample_kernel(&s, &grid, 0.1).unwrap();
    assert!((k.norm_sq() - 1.0).abs() < 1e-12);
    assert!(!k.is_joint());
    let tight = sample_kernel(&s, &RadialGrid::new(64, default_grid(&s).q_max, 2), 1e-6);
    assert!(matches!(tight, Err(bsvsim_core::Error::HarmonicTruncation { .. })));
}

#[test]
fn joint_sampling_agrees_with_harmonic_sampling() {
    let s = setup(vec![Segment::crystal(1.0, 0.0)], 60.0);
    let grid = RadialGrid::new(10, 0.3, 6);
    let stack = SegmentStack::new(&s);
    let h = sample_harmonics(&grid, |a, b| stack.amplitude(a, b));
    let j = sample_joint(&grid, true, |a, b| stack.amplitude(a, b));
    assert!((h.total_power - j.total_power).abs() < 1e-9 * h.total_power, "{} vs {}", h.total_power, j.total_power);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walkoff_flip_mirrors_amplitude(rho in 1.0f64..40.0, ax in -0.2f64..0.2, ay in -0.2f64..0.2, bx in -0.2f64..0.2, by in -0.2f64..0.2) {
        let p = two_crystals(1.0, 4.0, 50.0, [rho, rho]);
        let m = two_crystals(1.0, 4.0, 50.0, [-rho, -rho]);
        let f = tpa_multi_segment([ax, ay], [bx, by], &p);
        let g = tpa_multi_segment([-ax, ay], [-bx, by], &m);
        prop_assert!((f - g).norm() < 1e-12 * 2000.0);
    }

    #[test]
    fn amplitude_bounded_by_total_length(ax in -0.3f64..0.3, ay in -0.3f64..0.3, bx in -0.3f64..0.3, by in -0.3f64..0.3, gap in 0.0f64..10.0) {
        let s = setup(vec![Segment::crystal(1.0, 10.0), Segment::gap(gap.max(0.01)), Segment::crystal(2.0, -5.0)], 80.0);
        prop_assert!(tpa_multi_segment([ax, ay], [bx, by], &s).norm() <= 3000.0 * (1.0 + 1e-12));
    }
}
