mod common;

use bayes_rmst::summaries::{histogram_bins, kde_mode, quantile_sorted, silverman_bandwidth, summarize};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn normal_sample(mean: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

#[test]
fn kde_mode_near_centre() {
    for seed in 0..5 {
        let mut v = normal_sample(-3.0, 2.0, 4000, seed);
        let s = summarize(&v, 0.95, &[]).unwrap();
        v.sort_by(f64::total_cmp);
        let h = silverman_bandwidth(&v);
        assert!((s.mode - s.mean).abs() < 3.0 * h, "{} vs {} (h {h})", s.mode, s.mean);
        assert_eq!(kde_mode(&v), s.mode);
    }
}

#[test]
fn interval_matches_normal_quantiles() {
    let v = normal_sample(0.0, 1.0, 200_000, 3);
    let s = summarize(&v, 0.95, &[]).unwrap();
    assert!((s.lo + 1.959964).abs() < 0.02 && (s.hi - 1.959964).abs() < 0.02);
    assert!((s.sd - 1.0).abs() < 0.01);
}

#[test]
fn exceedance_of_a_negative_difference() {
    // Normal approximation of a posterior with mean -3.77 and SE 1.36.
    let v = normal_sample(-3.77, 1.36, 200_000, 8);
    let s = summarize(&v, 0.95, &[0.0, -3.0, -6.0]).unwrap();
    let want = common::normal_cdf(3.77 / 1.36);
    let p = s.exceedance[0].probability;
    assert!((p - want).abs() < 0.001, "{p} vs {want}");
    assert!((p - 0.999).abs() < 0.005);
    assert!(s.exceedance[2].probability < s.exceedance[1].probability);
}

#[test]
fn histogram_of_normal_draws() {
    let v = normal_sample(0.0, 1.0, 50_000, 4);
    let h = histogram_bins(&v, 50).unwrap();
    assert_eq!(h.counts.iter().sum::<usize>(), v.len());
    let peak = (0..50).max_by_key(|&i| h.counts[i]).unwrap();
    let centre = 0.5 * (h.edges[peak] + h.edges[peak + 1]);
    assert!(centre.abs() < 0.3, "{centre}");
    assert!(h.counts[0] < h.counts[peak] / 20 && h.counts[49] < h.counts[peak] / 20);
}

#[test]
fn quantile_endpoints() {
    let v = [1.0, 2.0, 4.0, 8.0];
    assert_eq!(quantile_sorted(&v, 0.0), 1.0);
    assert_eq!(quantile_sorted(&v, 1.0), 8.0);
    assert_eq!(quantile_sorted(&v, 0.5), 3.0);
    assert!(summarize(&[0.0; 20], 1.0, &[]).is_err());
    assert!(summarize(&[f64::NAN; 20], 0.9, &[]).is_err());
}

#[test]
fn single_precision() {
    let v: Vec<f32> = (1..=100).map(|i| i as f32).collect();
    let s = summarize(&v, 0.9f32, &[50.5]).unwrap();
    assert_eq!(s.median, 50.5);
    assert_eq!(s.exceedance[0].probability, 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn invariants(mut v in prop::collection::vec(-1e3f64..1e3, 10..200), level in 0.5f64..0.99,
                  mut ts in prop::collection::vec(-1e3f64..1e3, 0..6), seed in 0u64..1000) {
        ts.sort_by(f64::total_cmp);
        let s = summarize(&v, level, &ts).unwrap();
        prop_assert!(s.lo <= s.hi);
        prop_assert!(s.sd >= 0.0);
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(s.mode >= min && s.mode <= max);
        for w in s.exceedance.windows(2) {
            prop_assert!(w[0].probability <= w[1].probability);
        }
        for e in &s.exceedance {
            prop_assert!((0.0..=1.0).contains(&e.probability));
        }
        use rand::seq::SliceRandom;
        v.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        prop_assert_eq!(summarize(&v, level, &ts).unwrap(), s);
    }

    #[test]
    fn histogram_counts(v in prop::collection::vec(-50f64..50.0, 1..300), bins in 1usize..40) {
        let h = histogram_bins(&v, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<usize>(), v.len());
        prop_assert_eq!(h.edges.len(), h.counts.len() + 1);
        prop_assert!(h.edges.windows(2).all(|w| w[0] <= w[1]));
    }
}
