//! Exhaustive checks of the occupation-time shift on small discrete walks.

use cei_core::exact::*;
use cei_core::path::{minimum, Interval};
use cei_core::stats::exact_distribution_compare;
use cei_core::transforms::{condition_min_transform, occupation_process};

const TOL: f64 = 1e-12;

fn cases() -> Vec<(Vec<f64>, Interval)> {
    let iv = |lo: f64, hi: f64| Interval::closed(lo, hi).unwrap();
    vec![
        (vec![1.0, 1.0, -1.0, -1.0], Interval::point(-2.0).unwrap()),
        (vec![1.0, 1.0, -1.0, -1.0], iv(-1.0, 0.0)),
        (vec![2.0, -1.0, -1.0], Interval::point(-2.0).unwrap()),
        (vec![2.0, -1.0, -1.0], iv(-1.0, 0.0)),
        (vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0], iv(-2.0, -1.0)),
        (vec![2.0, 1.0, -1.0, -1.0, -1.0], iv(-1.5, 0.0)),
        (vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0], iv(-3.0, -1.0)),
        (
            vec![3.0, 1.0, -1.0, -1.0, -1.0, -0.5, -0.5],
            Interval::left_open(-2.5, -0.5).unwrap(),
        ),
        (vec![1.0, 1.0, 1.0, -1.0, -1.0], iv(-1.0, 0.0)),
    ]
}

/// Independent oracle for the plain shift: the output law puts mass
/// proportional to `P(Y) / K(Y)` on paths with `min Y in I`, where `K(Y)` is the
/// number of occupied cells. `K` is invariant under cyclic shifts.
fn reciprocal_occupation_law(increments: &[f64], interval: Interval) -> PathLaw {
    let mut law = PathLaw::new();
    for (p, w) in walk_paths(increments) {
        if interval.contains(minimum(&p)) {
            let k = occupation_process(&p, interval).occupied_count();
            *law.entry(key(&p)).or_default() += w / k as f64;
        }
    }
    let total: f64 = law.values().sum();
    law.values_mut().for_each(|v| *v /= total);
    law
}

#[test]
fn nu_is_exactly_uniform_and_independent() {
    for (s, i) in cases() {
        let e = enumerate_condition_min(&s, i, InputWeighting::Plain);
        let n = e.n as f64;
        for p in e.nu_law() {
            assert!((p - 1.0 / n).abs() < TOL, "{s:?} {i:?}: P(nu) = {p}");
        }
        assert!(e.independence_defect() < TOL, "{s:?} {i:?}");
    }
}

#[test]
fn plain_shift_law_matches_reciprocal_occupation_oracle() {
    for (s, i) in cases() {
        let got = enumerate_condition_min(&s, i, InputWeighting::Plain).path_law();
        let want = reciprocal_occupation_law(&s, i);
        let r = exact_distribution_compare(&got, &want, TOL).unwrap();
        assert!(r.passed, "{s:?} {i:?}: tv {}", r.statistic);
    }
}

#[test]
fn size_biased_shift_gives_conditioned_law() {
    for (s, i) in cases() {
        let got = enumerate_condition_min(&s, i, InputWeighting::SizeBiased).path_law();
        let want = conditioned_on_min(&s, i);
        let r = exact_distribution_compare(&got, &want, TOL).unwrap();
        assert!(r.passed, "{s:?} {i:?}: tv {}", r.statistic);
    }
}

#[test]
fn plain_shift_hits_conditioned_law_only_for_constant_occupation() {
    let s = [1.0, 1.0, -1.0, -1.0];
    let point = Interval::point(-2.0).unwrap();
    let tv = |i| {
        let got = enumerate_condition_min(&s, i, InputWeighting::Plain).path_law();
        exact_distribution_compare(&got, &conditioned_on_min(&s, i), TOL)
            .unwrap()
            .statistic
    };
    assert!(tv(point) < TOL);
    // occupied-cell counts 3 and 4 coexist: 3 (2/9 - 1/5) = 1/15
    assert!((tv(Interval::closed(-1.0, 0.0).unwrap()) - 1.0 / 15.0).abs() < TOL);
}

#[test]
fn uniform_reshift_recovers_positive_occupation_law() {
    for (s, i) in cases() {
        let e = enumerate_condition_min(&s, i, InputWeighting::Plain);
        let got = uniform_reshift(&e.path_law(), e.n);
        let want = conditioned_on_occupation(&s, i);
        let r = exact_distribution_compare(&got, &want, TOL).unwrap();
        assert!(r.passed, "{s:?} {i:?}: tv {}", r.statistic);
    }
}

#[test]
fn point_conditioning_every_rank() {
    let s = [1.0, 1.0, -1.0, -1.0];
    let i = Interval::point(-2.0).unwrap();
    for (p, _) in walk_paths(&s) {
        for r in 0..8 {
            let res = condition_min_transform(&p, i, r as f64 / 8.0).unwrap();
            // every ordering has amplitude 2 except +-+- and -+-+
            if let Some(q) = res.path {
                assert_eq!(minimum(&q), -2.0);
            } else {
                assert_eq!(cei_core::amplitude(&p), 1.0);
            }
        }
    }
}

#[test]
fn event_probability_matches_amplitude_remark() {
    // for bridges, positive occupation of {-2} means amplitude >= 2: four of six orderings
    let s = [1.0, 1.0, -1.0, -1.0];
    let e = enumerate_condition_min(&s, Interval::point(-2.0).unwrap(), InputWeighting::Plain);
    assert!((e.event_probability - 4.0 / 6.0).abs() < TOL);
}
