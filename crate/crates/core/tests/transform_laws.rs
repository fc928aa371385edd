//! Statistical behaviour of the shift transforms on sampled paths.

use cei_core::samplers::{sample_brownian_bridge, sample_ensemble};
use cei_core::stats::median;
use cei_core::transforms::*;
use cei_core::{argmin_first, minimum, reflected_process, RngStream};
use rand::Rng;

#[test]
fn local_time_estimate_is_stable_under_halving_bandwidth() {
    let n = 4096;
    let pairs = sample_ensemble(200, 21, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let r = reflected_process(&p).unwrap();
        let wide = local_time_estimate(&r, 0.3, 0.04).unwrap().total();
        let narrow = local_time_estimate(&r, 0.3, 0.02).unwrap().total();
        (wide, narrow)
    });
    let mean_wide = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let mean_change = pairs.iter().map(|p| (p.0 - p.1).abs()).sum::<f64>() / pairs.len() as f64;
    assert!(
        mean_change / mean_wide < 0.15,
        "relative change {}",
        mean_change / mean_wide
    );
}

#[test]
fn local_time_shift_at_zero_approaches_argmin() {
    let n = 4096;
    let paths = sample_ensemble(300, 22, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let u: f64 = rng.random();
        (p, u)
    });
    let medians: Vec<f64> = [0.2, 0.05, 0.01]
        .iter()
        .map(|&eps| {
            let d: Vec<f64> = paths
                .iter()
                .map(|(p, u)| {
                    let nu = condition_min_value_transform(p, 0.0, eps, *u)
                        .unwrap()
                        .nu_index
                        .unwrap();
                    (nu as f64 - argmin_first(p) as f64).abs() / n as f64
                })
                .collect();
            median(&d)
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
    assert!(medians[2] < 1e-3, "{medians:?}");
}

#[test]
fn first_passage_threshold_below_origin_is_identity() {
    // with x = 0 the threshold u min X is <= 0 = X_0, so the first grid index
    // strictly above it is the origin whenever the minimum is negative
    let mut rng = RngStream::new(23, 0).rng();
    for _ in 0..50 {
        let p = sample_brownian_bridge(512, 0.0, &mut rng);
        let u: f64 = rng.random::<f64>() * 0.999 + 0.001;
        let r = first_passage_transform(&p, 0.0, u).unwrap();
        if minimum(&p) < 0.0 {
            assert_eq!(r.nu_index, Some(0));
        }
    }
}

#[test]
fn last_passage_time_increases_with_quantile() {
    let mut rng = RngStream::new(24, 0).rng();
    for _ in 0..50 {
        let p = sample_brownian_bridge(512, 1.0, &mut rng);
        let nus: Vec<usize> = (0..20)
            .map(|k| last_passage_transform(&p, k as f64 / 20.0).unwrap().nu_index.unwrap())
            .collect();
        assert!(nus.windows(2).all(|w| w[0] <= w[1]), "{nus:?}");
        for k in 0..20 {
            let q = last_passage_transform(&p, k as f64 / 20.0).unwrap().path.unwrap();
            assert!(minimum(&q) >= 0.0);
        }
        // on a bridge to 0 the last passage is the (last) argmin: Vervaat
        let b = sample_brownian_bridge(512, 0.0, &mut rng);
        assert_eq!(last_passage_transform(&b, 0.7).unwrap().path.unwrap(), vervaat(&b));
    }
}

#[test]
fn min_value_transform_lands_in_band() {
    let n = 4096;
    let eps = 0.02;
    let y = -0.5;
    let mins = sample_ensemble(500, 25, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let u: f64 = rng.random();
        condition_min_value_transform(&p, y, eps, u)
            .ok()
            .map(|r| minimum(&r.path.unwrap()))
    });
    let accepted: Vec<f64> = mins.into_iter().flatten().collect();
    assert!(accepted.len() > 250);
    assert!(accepted.iter().all(|m| (m - y).abs() <= eps + 1e-12));
}
