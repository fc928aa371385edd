//! Grid paths and the deterministic path functionals.
//!
//! A [`GridPath`] holds the values `X_{k/n}` for `k = 0..=n` of a càdlàg path
//! started at zero. Everything here is a pure function of the stored values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("path must start at 0, got {0}")]
    NonZeroStart(f64),
    #[error("path value at index {index} is not finite")]
    NonFinite { index: usize },
    #[error("path needs at least 3 grid values, got {0}")]
    TooShort(usize),
    #[error("shift index {index} outside 0..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("reflected process requires a nonnegative endpoint, got {0}")]
    NegativeEndpoint(f64),
    #[error("invalid interval [{lo}, {hi}]: need lo < hi <= 0")]
    InvalidInterval { lo: f64, hi: f64 },
}

/// A path observed on the uniform grid `k/n`, `k = 0..=n`, with `values[0] == 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridPath {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for GridPath {
    type Error = PathError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        GridPath::new(values)
    }
}

impl From<GridPath> for Vec<f64> {
    fn from(p: GridPath) -> Self {
        p.values
    }
}

impl GridPath {
    /// Validates `values` and wraps them; `n = values.len() - 1`.
    pub fn new(values: Vec<f64>) -> Result<Self, PathError> {
        if values.len() < 3 {
            return Err(PathError::TooShort(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(PathError::NonFinite { index });
        }
        if values[0] != 0.0 {
            return Err(PathError::NonZeroStart(values[0]));
        }
        Ok(GridPath { values })
    }

    /// Builds a path from its `n` increments by cumulative summation.
    pub fn from_increments(increments: &[f64]) -> Result<Self, PathError> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for d in increments {
            acc += d;
            values.push(acc);
        }
        GridPath::new(values)
    }

    // Samplers construct values that satisfy the invariants by construction.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 3 && values[0] == 0.0);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        GridPath { values }
    }

    /// Number of grid cells.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at time `k/n`.
    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Value at time 1.
    pub fn endpoint(&self) -> f64 {
        self.values[self.n()]
    }

    /// Value at the grid point nearest to time `t`.
    pub fn at_time(&self, t: f64) -> f64 {
        let k = (t * self.n() as f64).round() as usize;
        self.values[k.min(self.n())]
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn minimum(&self) -> f64 {
        minimum(self)
    }

    pub fn maximum(&self) -> f64 {
        maximum(self)
    }
}

/// A real interval contained in `(-inf, 0]` with open/closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Result<Self, PathError> {
        // Degenerate closed intervals [a, a] are allowed: the discrete walks need point
        // conditioning such as {min = -2}.
        let ok = lo.is_finite() && hi.is_finite() && hi <= 0.0 && (lo < hi || (lo == hi && !lo_open && !hi_open));
        if !ok {
            return Err(PathError::InvalidInterval { lo, hi });
        }
        Ok(Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        })
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Result<Self, PathError> {
        Interval::new(lo, hi, true, false)
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Result<Self, PathError> {
        Interval::new(lo, hi, false, false)
    }

    /// The point interval `{a}`.
    pub fn point(a: f64) -> Result<Self, PathError> {
        Interval::new(a, a, false, false)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }
}

/// Cyclic shift at grid index `j`: swaps the path pieces before and after `j/n`
/// while keeping `X_0 = 0` and `X_1` fixed.
///
/// `result[k] = values[j+k] - values[j]` for `j + k <= n`, and
/// `(values[j+k-n] - values[j]) + values[n]` otherwise.
pub fn cyclic_shift(p: &GridPath, j: usize) -> Result<GridPath, PathError> {
    let n = p.n();
    if j > n {
        return Err(PathError::IndexOutOfRange { index: j, n });
    }
    let v = &p.values;
    let base = v[j];
    let end = v[n];
    let mut out = Vec::with_capacity(n + 1);
    out.extend(v[j..].iter().map(|x| x - base));
    out.extend(v[1..=j].iter().map(|x| (x - base) + end));
    debug_assert_eq!(out.len(), n + 1);
    Ok(GridPath::from_raw(out))
}

pub fn minimum(p: &GridPath) -> f64 {
    p.values.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn maximum(p: &GridPath) -> f64 {
    p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest index attaining the minimum (exact float comparison).
pub fn argmin_first(p: &GridPath) -> usize {
    let mut best = 0;
    for (k, &v) in p.values.iter().enumerate().skip(1) {
        if v < p.values[best] {
            best = k;
        }
    }
    best
}

/// Range `max - min` of the path.
pub fn amplitude(p: &GridPath) -> f64 {
    maximum(p) - minimum(p)
}

/// Time reversal `t -> X_1 - X_{1-t}` on the grid. Left limits are not
/// distinguished from values at grid points.
pub fn time_reversal(p: &GridPath) -> GridPath {
    let n = p.n();
    let end = p.values[n];
    let mut out: Vec<f64> = (0..=n).map(|k| end - p.values[n - k]).collect();
    out[n] = end;
    GridPath::from_raw(out)
}

/// `m[j] = minimum(cyclic_shift(p, j))` for `j = 0..n`, in O(n).
///
/// The two branches of the shift are minimised separately with suffix and
/// prefix minima. Subtracting `values[j]` (and adding `values[n]`) are
/// monotone under rounding, so the result is bit-identical to the brute-force
/// minimum over the shifted path.
pub fn shifted_min_profile(p: &GridPath) -> Vec<f64> {
    let n = p.n();
    let v = &p.values;
    let end = v[n];

    let mut suffix = vec![0.0; n + 1];
    suffix[n] = v[n];
    for s in (0..n).rev() {
        suffix[s] = v[s].min(suffix[s + 1]);
    }

    let mut out = Vec::with_capacity(n);
    // Minimum of values[1..=j]; empty for j = 0.
    let mut prefix = f64::INFINITY;
    for j in 0..n {
        if j > 0 {
            prefix = prefix.min(v[j]);
        }
        let base = v[j];
        let head = suffix[j] - base;
        let tail = if j > 0 { (prefix - base) + end } else { f64::INFINITY };
        out.push(head.min(tail));
    }
    out
}

/// The reflected process `R = X - J` with
/// `J_t = min(inf_{s >= t} X_s, inf_{s <= t} X_s + X_1)`.
///
/// For `X_1 >= 0` this equals `-minimum(cyclic_shift(p, j))` at each grid
/// index. `R` generally does not start at 0, so it is returned as a plain
/// profile of `n + 1` values with the cyclic convention `R[n] = R[0]`.
pub fn reflected_process(p: &GridPath) -> Result<ReflectedProcess, PathError> {
    let n = p.n();
    let v = &p.values;
    let end = v[n];
    if end < 0.0 {
        return Err(PathError::NegativeEndpoint(end));
    }
    let mut future = vec![0.0; n + 1];
    future[n] = v[n];
    for s in (0..n).rev() {
        future[s] = v[s].min(future[s + 1]);
    }
    let mut past = f64::INFINITY;
    let mut r = Vec::with_capacity(n + 1);
    for j in 0..n {
        if j > 0 {
            past = past.min(v[j]);
        }
        let j_t = if j > 0 { future[j].min(past + end) } else { future[0] };
        r.push(v[j] - j_t);
    }
    r.push(r[0]);
    Ok(ReflectedProcess { values: r })
}

/// Values of the reflected process on the grid (see [`reflected_process`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedProcess {
    values: Vec<f64>,
}

impl ReflectedProcess {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }
}
