use cfskew_core::stats::chi_squared_gof;
use cfskew_core::zipf::{fit_zipf_exponent, generalized_harmonic, rank_counts, zipf_sample};
use cfskew_core::ZipfModel;
use proptest::prelude::*;

/// Neumaier-compensated sum, so the check measures the PMF rather than the
/// rounding of a million additions.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[test]
fn pmf_normalizes() {
    for &s in &[0.0, 0.5, 1.0, 2.0] {
        for &n in &[1usize, 7, 1000, 100_000, 1_000_000] {
            let m = ZipfModel::new(s, n).unwrap();
            let total = compensated_sum((1..=n).map(|k| m.pmf(k).unwrap()));
            assert!((total - 1.0).abs() <= 1e-12, "s={s} n={n} total={total}");
        }
    }
}

#[test]
fn harmonic_matches_exact_rationals() {
    // H(6, 1) = 49/20, H(5, 2) = 5269/3600
    assert!((generalized_harmonic(6, 1.0).unwrap() - 49.0 / 20.0).abs() < 1e-15);
    assert!((generalized_harmonic(5, 2.0).unwrap() - 5269.0 / 3600.0).abs() < 1e-15);
    assert_eq!(generalized_harmonic(9, 0.0).unwrap(), 9.0);
}

#[test]
fn rank_one_frequency_within_three_standard_errors() {
    let m = ZipfModel::new(1.0, 1000).unwrap();
    let n = 1_000_000;
    let draws = zipf_sample(&m, 2024, n);
    let hits = draws.iter().filter(|&&r| r == 1).count() as f64;
    let p = m.pmf(1).unwrap();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let freq = hits / n as f64;
    assert!((freq - p).abs() <= 3.0 * se, "freq={freq} p={p} se={se}");
}

#[test]
fn sampler_passes_chi_squared() {
    for &(s, n) in &[(1.0, 1000usize), (0.5, 200), (2.0, 50), (0.0, 30)] {
        let m = ZipfModel::new(s, n).unwrap();
        let counts = rank_counts(&zipf_sample(&m, 7, 1_000_000), n);
        let t = chi_squared_gof(&counts, &m.pmf_vec(), 5.0).unwrap();
        assert!(t.p_value > 0.001, "s={s} n={n} {t:?}");
    }
}

#[test]
fn fit_inverts_sampler() {
    let m = ZipfModel::new(1.0, 1000).unwrap();
    let counts = rank_counts(&zipf_sample(&m, 99, 1_000_000), 1000);
    let s = fit_zipf_exponent(&counts).unwrap();
    assert!((0.95..=1.05).contains(&s), "fitted {s}");
    for &(true_s, n) in &[(0.6, 300usize), (1.5, 300)] {
        let m = ZipfModel::new(true_s, n).unwrap();
        let counts = rank_counts(&zipf_sample(&m, 5, 1_000_000), n);
        let s = fit_zipf_exponent(&counts).unwrap();
        assert!((s - true_s).abs() <= 0.05, "true {true_s}, fitted {s}");
    }
}

proptest! {
    #[test]
    fn pmf_is_monotone(s in 0.0f64..4.0, n in 1usize..400) {
        let m = ZipfModel::new(s, n).unwrap();
        for k in 1..n {
            prop_assert!(m.pmf(k).unwrap() >= m.pmf(k + 1).unwrap());
        }
    }

    #[test]
    fn pmf_ratio_law(s in 0.0f64..3.0, n in 2usize..500, a in 1usize..500, b in 1usize..500) {
        let (i, j) = (a.min(n), b.min(n));
        let m = ZipfModel::new(s, n).unwrap();
        let ratio = m.pmf(i).unwrap() / m.pmf(j).unwrap();
        let expected = (j as f64 / i as f64).powf(s);
        prop_assert!((ratio - expected).abs() <= 1e-12 * expected.max(1.0), "{} vs {}", ratio, expected);
    }

    #[test]
    fn zero_exponent_is_uniform(n in 1usize..300, k in 1usize..300) {
        let m = ZipfModel::new(0.0, n).unwrap();
        let k = k.min(n);
        prop_assert!((m.pmf(k).unwrap() - 1.0 / n as f64).abs() < 1e-15);
    }
}
