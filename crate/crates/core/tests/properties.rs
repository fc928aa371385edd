use cei_core::path::*;
use cei_core::stats::{kolmogorov_sf, ks_two_sample};
use cei_core::transforms::vervaat;
use proptest::prelude::*;

fn increments() -> impl Strategy<Value = Vec<f64>> {
    // mixture of small moves and big jumps
    prop::collection::vec(prop_oneof![4 => -1.0f64..1.0, 1 => -50.0f64..50.0], 2..40)
}

fn path() -> impl Strategy<Value = GridPath> {
    increments().prop_map(|d| GridPath::from_increments(&d).unwrap())
}

fn bridge() -> impl Strategy<Value = GridPath> {
    increments().prop_map(|d| {
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let mut v: Vec<f64> = vec![0.0];
        let mut acc = 0.0;
        for x in &d {
            acc += x - mean;
            v.push(acc);
        }
        *v.last_mut().unwrap() = 0.0;
        GridPath::new(v).unwrap()
    })
}

proptest! {
    #[test]
    fn shift_preserves_endpoints(p in path(), j in 0usize..64) {
        let j = j % (p.n() + 1);
        let q = cyclic_shift(&p, j).unwrap();
        prop_assert_eq!(q.at(0), 0.0);
        prop_assert_eq!(q.endpoint(), p.endpoint());
    }

    #[test]
    fn shift_group_property(p in path(), i in 0usize..64, j in 0usize..64) {
        let n = p.n();
        let (i, j) = (i % n, j % n);
        let lhs = cyclic_shift(&cyclic_shift(&p, i).unwrap(), j).unwrap();
        let rhs = cyclic_shift(&p, (i + j) % n).unwrap();
        let scale = 1.0 + p.values().iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {}", a, b);
        }
    }

    #[test]
    fn min_profile_matches_brute_force(p in path()) {
        let m = shifted_min_profile(&p);
        for (j, mj) in m.iter().enumerate() {
            prop_assert_eq!(*mj, minimum(&cyclic_shift(&p, j).unwrap()));
        }
    }

    #[test]
    fn vervaat_of_bridge_is_nonnegative(p in bridge()) {
        let v = vervaat(&p);
        prop_assert!(v.values().iter().all(|x| *x >= 0.0));
        prop_assert_eq!(v.endpoint(), 0.0);
        prop_assert!((maximum(&v) - amplitude(&p)).abs() <= 1e-12 * (1.0 + amplitude(&p)));
    }

    #[test]
    fn reversal_is_involution(p in path()) {
        let back = time_reversal(&time_reversal(&p));
        for (a, b) in back.values().iter().zip(p.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn amplitude_invariant_under_bridge_shifts(p in bridge(), j in 0usize..64) {
        let j = j % p.n();
        let a = amplitude(&p);
        prop_assert!((amplitude(&cyclic_shift(&p, j).unwrap()) - a).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn reflected_is_nonnegative(p in path()) {
        prop_assume!(p.endpoint() >= 0.0);
        let r = reflected_process(&p).unwrap();
        prop_assert!(r.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn kolmogorov_sf_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(kolmogorov_sf(lo) >= kolmogorov_sf(hi));
    }

    #[test]
    fn ks_p_value_decreases_with_shift(offset in 0.0f64..0.5) {
        let a: Vec<f64> = (0..200).map(|k| k as f64 / 200.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + offset).collect();
        let c: Vec<f64> = a.iter().map(|x| x + offset + 0.05).collect();
        let rb = ks_two_sample(&a, &b, 0.001).unwrap();
        let rc = ks_two_sample(&a, &c, 0.001).unwrap();
        prop_assert!(rc.statistic >= rb.statistic);
        prop_assert!(rc.p_value.unwrap() <= rb.p_value.unwrap());
    }
}
