//! Exact finite laws for discrete cyclically exchangeable walks.
//!
//! A uniformly shuffled multiset of increments gives every distinct ordering
//! the same probability, so all laws below are computed by exhaustive
//! enumeration of distinct orderings, with no sampling involved.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;

use crate::path::{cyclic_shift, minimum, GridPath, Interval};
use crate::transforms::{condition_min_transform, occupation_process};

/// Hashable, ordered key for a path's values.
pub type PathKey = Vec<OrderedFloat<f64>>;

/// A finite probability law on paths.
pub type PathLaw = BTreeMap<PathKey, f64>;

pub fn key(p: &GridPath) -> PathKey {
    p.values().iter().copied().map(OrderedFloat).collect()
}

/// All distinct orderings of `increments`.
pub fn distinct_orderings(increments: &[f64]) -> Vec<Vec<f64>> {
    let mut distinct: Vec<f64> = increments.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut counts: Vec<usize> = distinct
        .iter()
        .map(|d| increments.iter().filter(|x| x.total_cmp(d).is_eq()).count())
        .collect();

    fn recurse(distinct: &[f64], counts: &mut [usize], current: &mut Vec<f64>, len: usize, out: &mut Vec<Vec<f64>>) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for i in 0..distinct.len() {
            if counts[i] == 0 {
                continue;
            }
            counts[i] -= 1;
            current.push(distinct[i]);
            recurse(distinct, counts, current, len, out);
            current.pop();
            counts[i] += 1;
        }
    }

    let mut out = Vec::new();
    recurse(
        &distinct,
        &mut counts,
        &mut Vec::with_capacity(increments.len()),
        increments.len(),
        &mut out,
    );
    out
}

/// The walk law: uniform over distinct orderings.
pub fn walk_paths(increments: &[f64]) -> Vec<(GridPath, f64)> {
    let orders = distinct_orderings(increments);
    let w = 1.0 / orders.len() as f64;
    orders
        .into_iter()
        .map(|o| (GridPath::from_increments(&o).expect("finite increments"), w))
        .collect()
}

fn normalize(law: &mut PathLaw) -> f64 {
    let total: f64 = law.values().sum();
    if total > 0.0 {
        law.values_mut().for_each(|v| *v /= total);
    }
    total
}

/// Law of the walk restricted to `pred` and renormalized, with the mass of `pred`.
pub fn conditioned_law(increments: &[f64], pred: impl Fn(&GridPath) -> bool) -> (PathLaw, f64) {
    let mut law = PathLaw::new();
    for (p, w) in walk_paths(increments) {
        if pred(&p) {
            *law.entry(key(&p)).or_default() += w;
        }
    }
    let mass = normalize(&mut law);
    (law, mass)
}

/// Joint law of `(nu, shifted path)` produced by the occupation-time shift,
/// conditional on the occupation being positive.
#[derive(Debug, Clone)]
pub struct ShiftEnumeration {
    pub n: usize,
    /// `P(nu = j, theta_nu X = Y | A_1 > 0)`.
    pub joint: BTreeMap<(usize, PathKey), f64>,
    /// `P(A_1 > 0)`.
    pub event_probability: f64,
}

impl ShiftEnumeration {
    pub fn path_law(&self) -> PathLaw {
        let mut law = PathLaw::new();
        for ((_, k), w) in &self.joint {
            *law.entry(k.clone()).or_default() += w;
        }
        law
    }

    pub fn nu_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; self.n];
        for ((j, _), w) in &self.joint {
            law[*j] += w;
        }
        law
    }

    /// `max |P(nu = j, Y) - P(nu = j) P(Y)|` over the support.
    pub fn independence_defect(&self) -> f64 {
        let paths = self.path_law();
        let nu = self.nu_law();
        let mut worst: f64 = 0.0;
        for (j, pj) in nu.iter().enumerate() {
            for (k, pk) in &paths {
                let joint = self.joint.get(&(j, k.clone())).copied().unwrap_or(0.0);
                worst = worst.max((joint - pj * pk).abs());
            }
        }
        worst
    }
}

/// How the walk is weighted before the occupation-time shift is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputWeighting {
    /// The walk law itself.
    Plain,
    /// The walk law size-biased by the number of occupied cells.
    SizeBiased,
}

/// Exhaustively applies [`condition_min_transform`] to every ordering and
/// every quantile cell, where a path with `K` occupied cells is shifted with
/// `u = (r + 1/2)/K`, `r = 0..K`, each with weight `1/K`.
pub fn enumerate_condition_min(increments: &[f64], interval: Interval, weighting: InputWeighting) -> ShiftEnumeration {
    let mut joint = BTreeMap::new();
    let mut event = 0.0;
    let mut n = 0;
    for (p, w) in walk_paths(increments) {
        n = p.n();
        let k = occupation_process(&p, interval).occupied_count();
        if k == 0 {
            continue;
        }
        let input = match weighting {
            InputWeighting::Plain => w,
            InputWeighting::SizeBiased => w * k as f64,
        };
        event += input;
        for r in 0..k {
            let u = (r as f64 + 0.5) / k as f64;
            let res = condition_min_transform(&p, interval, u).expect("valid quantile");
            let (path, nu) = (res.path.expect("event holds"), res.nu_index.expect("event holds"));
            *joint.entry((nu, key(&path))).or_insert(0.0) += input / k as f64;
        }
    }
    if event > 0.0 {
        joint.values_mut().for_each(|v| *v /= event);
    }
    let event_probability = match weighting {
        InputWeighting::Plain => event,
        InputWeighting::SizeBiased => walk_paths(increments)
            .into_iter()
            .filter(|(p, _)| occupation_process(p, interval).occupied_count() > 0)
            .map(|(_, w)| w)
            .sum(),
    };
    ShiftEnumeration {
        n,
        joint,
        event_probability,
    }
}

/// Law of `cyclic_shift(Y, J)` for `Y ~ law` and `J` uniform on `0..n`.
pub fn uniform_reshift(law: &PathLaw, n: usize) -> PathLaw {
    let mut out = PathLaw::new();
    for (k, w) in law {
        let values: Vec<f64> = k.iter().map(|v| v.0).collect();
        let p = GridPath::new(values).expect("law keys are valid paths");
        for j in 0..n {
            let q = cyclic_shift(&p, j).expect("j < n");
            *out.entry(key(&q)).or_default() += w / n as f64;
        }
    }
    out
}

/// Law of the walk given `min in I`.
pub fn conditioned_on_min(increments: &[f64], interval: Interval) -> PathLaw {
    conditioned_law(increments, |p| interval.contains(minimum(p))).0
}

/// Law of the walk given positive occupation of `I`.
pub fn conditioned_on_occupation(increments: &[f64], interval: Interval) -> PathLaw {
    conditioned_law(increments, |p| occupation_process(p, interval).occupied_count() > 0).0
}
