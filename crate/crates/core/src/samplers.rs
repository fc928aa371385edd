//! Seeded generation of the process laws on the grid.
//!
//! Every sampler takes an explicit generator; [`sample_ensemble`] fans out
//! over independent [`RngStream`]s so ensembles are reproducible regardless
//! of thread count.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::{amplitude, minimum, GridPath};
use crate::rng::RngStream;

/// Default attempt budget for one accepted path in rejection sampling.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("no acceptable path after {attempts} attempts")]
    MaxAttemptsExceeded { attempts: u64 },
    #[error("invalid sampler parameters: {0}")]
    InvalidParams(String),
}

/// Canonical parameters of a finite-jump exchangeable-increment process
/// `alpha t + sigma b_t + sum_i beta_i (1{U_i <= t} - t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EiParams {
    pub alpha: f64,
    pub sigma: f64,
    pub betas: Vec<f64>,
}

impl EiParams {
    pub fn new(alpha: f64, sigma: f64, betas: Vec<f64>) -> Result<Self, SampleError> {
        if !alpha.is_finite() || !sigma.is_finite() || sigma < 0.0 {
            return Err(SampleError::InvalidParams(format!("alpha={alpha}, sigma={sigma}")));
        }
        if let Some(b) = betas.iter().find(|b| !b.is_finite() || **b == 0.0) {
            return Err(SampleError::InvalidParams(format!("jump size {b}")));
        }
        Ok(EiParams { alpha, sigma, betas })
    }
}

fn gaussian_walk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let scale = (1.0 / n as f64).sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(acc);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += scale * z;
        values.push(acc);
    }
    values
}

fn pin_to(values: &mut [f64], x: f64) {
    let n = values.len() - 1;
    let drift = values[n] - x;
    for (k, v) in values.iter_mut().enumerate() {
        *v -= (k as f64 / n as f64) * drift;
    }
    values[n] = x;
}

/// Standard Brownian motion: cumulative sums of `N(0, 1/n)` increments.
pub fn sample_brownian_motion<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    GridPath::from_raw(gaussian_walk(n, rng))
}

/// Brownian bridge from 0 to `x`, `b_k = W_k - (k/n)(W_n - x)`; the endpoint is exactly `x`.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(n: usize, x: f64, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    let mut values = gaussian_walk(n, rng);
    pin_to(&mut values, x);
    GridPath::from_raw(values)
}

/// Exchangeable-increment process in canonical form with finitely many jumps.
///
/// Jump `beta_i` enters at grid index `ceil(U_i n)`. The diffusive part is a
/// Brownian bridge, so the endpoint is `alpha`. With `x_end` given, the
/// path is pinned to that endpoint by a linear correction.
pub fn sample_ei_process<R: Rng + ?Sized>(n: usize, params: &EiParams, x_end: Option<f64>, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    let nf = n as f64;
    let mut values = if params.sigma > 0.0 {
        let mut b = gaussian_walk(n, rng);
        pin_to(&mut b, 0.0);
        b.iter_mut().for_each(|v| *v *= params.sigma);
        b
    } else {
        vec![0.0; n + 1]
    };
    let mut jump_at = vec![0.0; n + 1];
    let mut total = 0.0;
    for &beta in &params.betas {
        let u: f64 = rng.random();
        let k = ((u * nf).ceil() as usize).clamp(1, n);
        jump_at[k] += beta;
        total += beta;
    }
    let mut jumps = 0.0;
    for (k, v) in values.iter_mut().enumerate() {
        jumps += jump_at[k];
        let t = k as f64 / nf;
        *v += params.alpha * t + jumps - total * t;
    }
    values[0] = 0.0;
    values[n] = params.alpha;
    if let Some(x) = x_end {
        pin_to(&mut values, x);
    }
    GridPath::from_raw(values)
}

/// Three-dimensional Bessel process: norm of three independent Brownian motions.
pub fn sample_bessel3_process<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    let a = gaussian_walk(n, rng);
    let b = gaussian_walk(n, rng);
    let c = gaussian_walk(n, rng);
    let values = (0..=n)
        .map(|k| (a[k] * a[k] + b[k] * b[k] + c[k] * c[k]).sqrt())
        .collect();
    GridPath::from_raw(values)
}

/// Three-dimensional Bessel bridge from 0 to `x >= 0`: norm of a 3-d Brownian
/// bridge from the origin to `(x, 0, 0)`.
pub fn sample_bessel3_bridge<R: Rng + ?Sized>(n: usize, x: f64, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    assert!(x >= 0.0, "Bessel bridge endpoint must be nonnegative");
    let mut a = gaussian_walk(n, rng);
    let mut b = gaussian_walk(n, rng);
    let mut c = gaussian_walk(n, rng);
    pin_to(&mut a, x);
    pin_to(&mut b, 0.0);
    pin_to(&mut c, 0.0);
    let mut values: Vec<f64> = (0..=n)
        .map(|k| (a[k] * a[k] + b[k] * b[k] + c[k] * c[k]).sqrt())
        .collect();
    values[n] = x;
    GridPath::from_raw(values)
}

/// `B sgn(B_1)` for a Brownian motion `B`; draws with `B_1 == 0` are redrawn.
pub fn sample_signed_bm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GridPath {
    assert!(n >= 2, "grid resolution must be at least 2");
    loop {
        let mut values = gaussian_walk(n, rng);
        let end = values[n];
        if end == 0.0 {
            continue;
        }
        if end < 0.0 {
            values.iter_mut().for_each(|v| *v = -*v);
            values[0] = 0.0;
        }
        return GridPath::from_raw(values);
    }
}

/// Uniformly random ordering of `increments`, summed into a walk.
pub fn sample_discrete_cei_walk<R: Rng + ?Sized>(increments: &[f64], rng: &mut R) -> GridPath {
    assert!(increments.len() >= 2, "a walk needs at least two increments");
    let mut incs = increments.to_vec();
    incs.shuffle(rng);
    GridPath::from_increments(&incs).expect("finite increments")
}

/// A process law that can be drawn on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "kebab-case")]
pub enum Process {
    Bm,
    Bridge { x: f64 },
    Ei { params: EiParams, x_end: Option<f64> },
    Bessel3,
    Bessel3Bridge { x: f64 },
    SignedBm,
    Walk { increments: Vec<f64> },
}

impl Process {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> GridPath {
        match self {
            Process::Bm => sample_brownian_motion(n, rng),
            Process::Bridge { x } => sample_brownian_bridge(n, *x, rng),
            Process::Ei { params, x_end } => sample_ei_process(n, params, *x_end, rng),
            Process::Bessel3 => sample_bessel3_process(n, rng),
            Process::Bessel3Bridge { x } => sample_bessel3_bridge(n, *x, rng),
            Process::SignedBm => sample_signed_bm(n, rng),
            Process::Walk { increments } => sample_discrete_cei_walk(increments, rng),
        }
    }
}

/// Draws from `base` until `accept` holds; returns the path and the number of attempts used.
pub fn rejection_sample<R, F>(
    base: &Process,
    n: usize,
    accept: F,
    max_attempts: u64,
    rng: &mut R,
) -> Result<(GridPath, u64), SampleError>
where
    R: Rng + ?Sized,
    F: Fn(&GridPath) -> bool,
{
    for attempt in 1..=max_attempts.max(1) {
        let p = base.sample(n, rng);
        if accept(&p) {
            return Ok((p, attempt));
        }
    }
    Err(SampleError::MaxAttemptsExceeded {
        attempts: max_attempts.max(1),
    })
}

/// Rejection sampler for `base` conditioned on `min >= -epsilon`.
pub fn rejection_sample_conditioned_min<R: Rng + ?Sized>(
    n: usize,
    epsilon: f64,
    base: &Process,
    max_attempts: u64,
    rng: &mut R,
) -> Result<GridPath, SampleError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(SampleError::InvalidParams(format!("epsilon={epsilon}")));
    }
    rejection_sample(base, n, |p| minimum(p) >= -epsilon, max_attempts, rng).map(|(p, _)| p)
}

/// Rejection sampler for `base` conditioned on `amplitude >= level`.
pub fn rejection_sample_min_amplitude<R: Rng + ?Sized>(
    n: usize,
    level: f64,
    base: &Process,
    max_attempts: u64,
    rng: &mut R,
) -> Result<GridPath, SampleError> {
    rejection_sample(base, n, |p| amplitude(p) >= level, max_attempts, rng).map(|(p, _)| p)
}

/// Evaluates `f` on `count` independent streams `RngStream::tagged(seed, tag, i)` in parallel,
/// returning results in index order.
pub fn sample_ensemble<T, F>(count: usize, seed: u64, tag: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(&mut RngStream::tagged(seed, tag, i as u64).rng()))
        .collect()
}
