//! Hypothesis tests that turn distributional identities into pass/fail checks.
//!
//! All functions are deterministic in their inputs. p-values come from
//! asymptotic distributions: Kolmogorov for KS (with Stephens' small-sample
//! correction) and chi-square for contingency tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::exact::PathLaw;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("distribution sums to {0}, not 1")]
    Unnormalized(f64),
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Outcome of one statistical or exact check.
///
/// Exactly one of `p_value` and `exact_pass` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_pass: Option<bool>,
    pub n_samples: (usize, usize),
    pub seed: u64,
    pub passed: bool,
    pub details: BTreeMap<String, f64>,
}

impl TestReport {
    pub fn statistical(name: &str, statistic: f64, p_value: f64, alpha: f64, n_samples: (usize, usize)) -> Self {
        let mut details = BTreeMap::new();
        details.insert("alpha".to_string(), alpha);
        TestReport {
            name: name.to_string(),
            statistic,
            p_value: Some(p_value),
            exact_pass: None,
            n_samples,
            seed: 0,
            passed: p_value > alpha,
            details,
        }
    }

    pub fn exact(name: &str, statistic: f64, pass: bool, n_samples: (usize, usize)) -> Self {
        TestReport {
            name: name.to_string(),
            statistic,
            p_value: None,
            exact_pass: Some(pass),
            n_samples,
            seed: 0,
            passed: pass,
            details: BTreeMap::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

fn sorted(a: &[f64]) -> Result<Vec<f64>, StatsError> {
    if a.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = a.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Empirical CDF of `sample` evaluated at `x`.
pub fn ecdf(sample: &[f64], x: f64) -> f64 {
    sample.iter().filter(|v| **v <= x).count() as f64 / sample.len() as f64
}

/// Kolmogorov survival function `Q(lambda) = P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form of the CDF converges fast for small lambda.
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=8 {
            let odd = (2 * k - 1) as f64;
            s += (-odd * odd * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sq = effective_n.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// Sup-distance between the empirical CDFs of `a` and `b`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport, StatsError> {
    let d = ks_statistic(a, b)?;
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    Ok(TestReport::statistical(
        "ks_two_sample",
        d,
        ks_p_value(d, ne),
        alpha,
        (a.len(), b.len()),
    ))
}

/// One-sample KS test against the uniform law on `[0, 1]`.
pub fn ks_uniform(a: &[f64], alpha: f64) -> Result<TestReport, StatsError> {
    let v = sorted(a)?;
    if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(StatsError::OutOfRange(*x));
    }
    let m = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 / m - x).max(x - i as f64 / m))
        .fold(0.0, f64::max);
    Ok(TestReport::statistical(
        "ks_uniform",
        d,
        ks_p_value(d, m),
        alpha,
        (v.len(), 0),
    ))
}

fn quantile_bins(a: &[f64], bins: usize) -> Vec<usize> {
    let s = sorted(a).expect("checked by caller");
    let cuts: Vec<f64> = (1..bins).map(|q| s[q * s.len() / bins]).collect();
    a.iter().map(|x| cuts.iter().filter(|c| *x >= **c).count()).collect()
}

/// Chi-square test of independence on a `bins x bins` table of empirical-quantile bins.
pub fn chi2_independence(a: &[f64], b: &[f64], bins: usize, alpha: f64) -> Result<TestReport, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let needed = 10 * bins * bins;
    if a.len() < needed || bins < 2 {
        return Err(StatsError::TooFewSamples { needed, got: a.len() });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let ba = quantile_bins(a, bins);
    let bb = quantile_bins(b, bins);
    let mut table = vec![vec![0usize; bins]; bins];
    for (x, y) in ba.iter().zip(&bb) {
        table[*x][*y] += 1;
    }
    let total = a.len() as f64;
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let cols: Vec<f64> = (0..bins)
        .map(|j| table.iter().map(|r| r[j]).sum::<usize>() as f64)
        .collect();
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let e = rows[i] * cols[j] / total;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let df = ((bins - 1) * (bins - 1)) as f64;
    let p = ChiSquared::new(df).expect("positive dof").sf(stat);
    Ok(TestReport::statistical("chi2_independence", stat, p, alpha, (a.len(), b.len())).detail("dof", df))
}

/// Total-variation comparison of two finite laws.
pub fn exact_distribution_compare(d1: &PathLaw, d2: &PathLaw, tol: f64) -> Result<TestReport, StatsError> {
    for d in [d1, d2] {
        let total: f64 = d.values().sum();
        if (total - 1.0).abs() > tol.max(1e-12) {
            return Err(StatsError::Unnormalized(total));
        }
    }
    let mut tv = 0.0;
    for (k, p) in d1 {
        tv += (p - d2.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in d2 {
        if !d1.contains_key(k) {
            tv += q.abs();
        }
    }
    tv *= 0.5;
    Ok(TestReport::exact("exact_distribution_compare", tv, tv <= tol, (d1.len(), d2.len())).detail("tv_distance", tv))
}

/// Checks sample mean and variance against targets, each within `k_sigma`
/// standard errors (normal approximation, plug-in fourth moment for the variance).
pub fn moment_check(a: &[f64], target_mean: f64, target_var: f64, k_sigma: f64) -> Result<TestReport, StatsError> {
    if a.len() < 30 {
        return Err(StatsError::TooFewSamples {
            needed: 30,
            got: a.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = a.len() as f64;
    let mean = a.iter().sum::<f64>() / n;
    let var = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = a.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let se_mean = (target_var / n).sqrt();
    let se_var = ((m4 - var * var).max(0.0) / n).sqrt();
    let z = |diff: f64, se: f64| {
        if se > 0.0 {
            diff.abs() / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let z_mean = z(mean - target_mean, se_mean);
    let z_var = z(var - target_var, se_var);
    let statistic = z_mean.max(z_var);
    Ok(
        TestReport::exact("moment_check", statistic, statistic <= k_sigma, (a.len(), 0))
            .detail("mean", mean)
            .detail("variance", var)
            .detail("z_mean", z_mean)
            .detail("z_variance", z_var),
    )
}

/// Pearson sample correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(a: &[f64]) -> f64 {
    let s = sorted(a).expect("nonempty finite sample");
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use ordered_float::OrderedFloat;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(seed: u64, m: usize) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0).rng();
        (0..m).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.3581) = 0.05 and Q(1.9495) = 0.001 are the classical critical points.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.9495) - 0.001).abs() < 1e-5);
        // both series agree at the switch point
        let lo = {
            let c = std::f64::consts::PI.powi(2) / (8.0 * 1.18f64.powi(2));
            1.0 - (2.0 * std::f64::consts::PI).sqrt() / 1.18
                * (1..=8).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum::<f64>()
        };
        assert!((lo - kolmogorov_sf(1.18)).abs() < 1e-10);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = normals(1, 500);
        let r = ks_two_sample(&a, &a, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
        let b: Vec<f64> = a.iter().map(|x| x + 100.0).collect();
        let r = ks_two_sample(&a, &b, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value.unwrap() < 1e-6 && !r.passed);
        assert_eq!(ks_two_sample(&[], &a, 0.01), Err(StatsError::EmptySample));
    }

    #[test]
    fn ks_two_sample_calibration() {
        let passes = (0..100)
            .filter(|s| {
                ks_two_sample(&normals(2 * s + 100, 5000), &normals(2 * s + 101, 5000), DEFAULT_ALPHA)
                    .unwrap()
                    .passed
            })
            .count();
        assert!(passes >= 99, "{passes}/100");
    }

    #[test]
    fn ks_uniform_cases() {
        let m = 1000;
        let grid: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect();
        let r = ks_uniform(&grid, DEFAULT_ALPHA).unwrap();
        assert!((r.statistic - 0.5 / m as f64).abs() < 1e-12 && r.passed);
        assert!(!ks_uniform(&vec![0.5; 100], DEFAULT_ALPHA).unwrap().passed);
        assert_eq!(ks_uniform(&[0.2, 1.5], 0.01), Err(StatsError::OutOfRange(1.5)));
    }

    #[test]
    fn chi2_cases() {
        let a = normals(3, 2000);
        assert!(!chi2_independence(&a, &a, 5, DEFAULT_ALPHA).unwrap().passed);
        let passes = (0..100)
            .filter(|s| {
                chi2_independence(
                    &normals(500 + 2 * s, 2000),
                    &normals(501 + 2 * s, 2000),
                    5,
                    DEFAULT_ALPHA,
                )
                .unwrap()
                .passed
            })
            .count();
        assert!(passes >= 99, "{passes}/100");
        assert_eq!(
            chi2_independence(&a, &a[..10], 5, 0.01),
            Err(StatsError::LengthMismatch(2000, 10))
        );
        assert_eq!(
            chi2_independence(&a[..100], &a[..100], 5, 0.01),
            Err(StatsError::TooFewSamples { needed: 250, got: 100 })
        );
    }

    fn law(entries: &[(f64, f64)]) -> PathLaw {
        entries
            .iter()
            .map(|(v, p)| (vec![OrderedFloat(0.0), OrderedFloat(*v)], *p))
            .collect()
    }

    #[test]
    fn exact_compare_cases() {
        let d = law(&[(1.0, 0.5), (-1.0, 0.5)]);
        let r = exact_distribution_compare(&d, &d, 1e-12).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.exact_pass, Some(true));
        let e = law(&[(2.0, 1.0)]);
        let r = exact_distribution_compare(&d, &e, 1e-12).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(!r.passed);
        assert!(matches!(
            exact_distribution_compare(&law(&[(1.0, 0.4)]), &e, 1e-12),
            Err(StatsError::Unnormalized(_))
        ));
    }

    #[test]
    fn moment_cases() {
        assert!(moment_check(&normals(4, 10_000), 0.0, 1.0, 4.0).unwrap().passed);
        assert!(!moment_check(&vec![0.3; 100], 0.0, 1.0, 4.0).unwrap().passed);
        assert!(moment_check(&[1.0; 10], 0.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn report_invariant() {
        let r = ks_uniform(&[0.1, 0.5, 0.9], 0.01).unwrap();
        assert!(r.p_value.is_some() != r.exact_pass.is_some());
        let r = moment_check(&normals(5, 100), 0.0, 1.0, 4.0).unwrap();
        assert!(r.p_value.is_some() != r.exact_pass.is_some());
    }
}
