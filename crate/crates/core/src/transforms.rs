//! Conditioning by random cyclic shifts.
//!
//! The shift index is always chosen by an inverse-CDF rule on a step function
//! that counts grid cells: among the `K` qualifying cells, a quantile `u` in
//! `[0, 1)` selects the cell of 1-based rank `floor(u K) + 1`. A uniform `u`
//! therefore picks a uniform qualifying cell.

use thiserror::Error;

use crate::path::{
    argmin_first, cyclic_shift, minimum, reflected_process, shifted_min_profile, GridPath, Interval, PathError,
    ReflectedProcess,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("occupation time of the interval is zero")]
    EmptyOccupation,
    #[error("local time at level {level} is zero")]
    EmptyLocalTime { level: f64 },
    #[error("path never exceeds the passage threshold {threshold}")]
    NoPassage { threshold: f64 },
    #[error("quantile {0} outside [0, 1)")]
    InvalidQuantile(f64),
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error(transparent)]
    Path(#[from] PathError),
}

fn check_quantile(u: f64) -> Result<(), TransformError> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(TransformError::InvalidQuantile(u))
    }
}

/// Index of the occupied cell of 1-based rank `floor(u K) + 1` among the `K`
/// cells flagged in `occupied`.
fn select_by_rank(occupied: impl Iterator<Item = bool>, count: usize, u: f64) -> Option<usize> {
    if count == 0 {
        return None;
    }
    let rank = ((u * count as f64).floor() as usize).min(count - 1);
    occupied.enumerate().filter(|(_, o)| *o).nth(rank).map(|(j, _)| j)
}

/// Occupation process of the shift parameter in cells whose shifted minimum lies in `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProfile {
    /// `m[j]`: minimum of the path shifted at `j`.
    pub m: Vec<f64>,
    /// `a[k] = #{j < k : m[j] in I} / n`.
    pub a: Vec<f64>,
    pub interval: Interval,
    occupied: Vec<bool>,
    count: usize,
}

impl OccupationProfile {
    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// Total occupation `A_1`.
    pub fn total(&self) -> f64 {
        self.a[self.n()]
    }

    /// Number of occupied cells, `n A_1`.
    pub fn occupied_count(&self) -> usize {
        self.count
    }

    pub fn is_occupied(&self, j: usize) -> bool {
        self.occupied[j]
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied.iter().enumerate().filter(|(_, o)| **o).map(|(j, _)| j)
    }
}

pub fn occupation_process(p: &GridPath, interval: Interval) -> OccupationProfile {
    let m = shifted_min_profile(p);
    let n = m.len();
    let occupied: Vec<bool> = m.iter().map(|v| interval.contains(*v)).collect();
    let mut a = Vec::with_capacity(n + 1);
    let mut count = 0usize;
    a.push(0.0);
    for &o in &occupied {
        count += o as usize;
        a.push(count as f64 / n as f64);
    }
    OccupationProfile {
        m,
        a,
        interval,
        occupied,
        count,
    }
}

/// Random shift time `inf{t : A_t = u A_1}` on the grid.
pub fn nu_from_occupation(profile: &OccupationProfile, u: f64) -> Result<usize, TransformError> {
    check_quantile(u)?;
    select_by_rank(profile.occupied.iter().copied(), profile.count, u).ok_or(TransformError::EmptyOccupation)
}

/// Outcome of a conditioning shift. `path` and `nu_index` are present exactly
/// when `conditioning_event` holds, and then `path == cyclic_shift(input, nu_index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftResult {
    pub path: Option<GridPath>,
    pub nu_index: Option<usize>,
    pub conditioning_event: bool,
}

impl ShiftResult {
    fn shifted(p: &GridPath, nu: usize) -> Result<Self, TransformError> {
        Ok(ShiftResult {
            path: Some(cyclic_shift(p, nu)?),
            nu_index: Some(nu),
            conditioning_event: true,
        })
    }

    fn no_event() -> Self {
        ShiftResult {
            path: None,
            nu_index: None,
            conditioning_event: false,
        }
    }

    pub fn into_path(self) -> Option<GridPath> {
        self.path
    }
}

/// Shift at a uniform time of the occupation of `I` by the shifted minimum.
/// On the conditioning event the shifted path has its minimum in `I`.
pub fn condition_min_transform(p: &GridPath, interval: Interval, u: f64) -> Result<ShiftResult, TransformError> {
    check_quantile(u)?;
    let profile = occupation_process(p, interval);
    match nu_from_occupation(&profile, u) {
        Ok(nu) => ShiftResult::shifted(p, nu),
        Err(TransformError::EmptyOccupation) => Ok(ShiftResult::no_event()),
        Err(e) => Err(e),
    }
}

/// Vervaat transform: shift at the (first) argmin.
pub fn vervaat(p: &GridPath) -> GridPath {
    cyclic_shift(p, argmin_first(p)).expect("argmin is a valid index")
}

/// Occupation-density estimate of the local time at level `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeEstimate {
    pub y: f64,
    pub epsilon: f64,
    /// `l[k] = #{j < k : |R[j] - y| <= epsilon} / (epsilon n)`.
    pub l: Vec<f64>,
    in_band: Vec<bool>,
    count: usize,
}

impl LocalTimeEstimate {
    pub fn total(&self) -> f64 {
        self.l[self.l.len() - 1]
    }

    pub fn band_count(&self) -> usize {
        self.count
    }
}

pub fn local_time_estimate(r: &ReflectedProcess, y: f64, epsilon: f64) -> Result<LocalTimeEstimate, TransformError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(TransformError::InvalidBandwidth(epsilon));
    }
    let n = r.n();
    let scale = 1.0 / (epsilon * n as f64);
    let in_band: Vec<bool> = r.values()[..n].iter().map(|v| (v - y).abs() <= epsilon).collect();
    let mut l = Vec::with_capacity(n + 1);
    let mut count = 0usize;
    l.push(0.0);
    for &b in &in_band {
        count += b as usize;
        l.push(count as f64 * scale);
    }
    Ok(LocalTimeEstimate {
        y,
        epsilon,
        l,
        in_band,
        count,
    })
}

/// Shift at a uniform point of the local time of the reflected process at `level`.
pub fn local_time_shift(p: &GridPath, level: f64, epsilon: f64, u: f64) -> Result<ShiftResult, TransformError> {
    check_quantile(u)?;
    let r = reflected_process(p)?;
    let lt = local_time_estimate(&r, level, epsilon)?;
    let nu = select_by_rank(lt.in_band.iter().copied(), lt.count, u).ok_or(TransformError::EmptyLocalTime { level })?;
    ShiftResult::shifted(p, nu)
}

/// Conditions the minimum to equal `y <= 0` (up to the bandwidth) by shifting
/// at the local time of the reflected process at level `-y`.
pub fn condition_min_value_transform(
    p: &GridPath,
    y: f64,
    epsilon: f64,
    u: f64,
) -> Result<ShiftResult, TransformError> {
    local_time_shift(p, -y, epsilon, u)
}

/// Shift at `nu = min{k : X_k > u (x + min X)}`.
pub fn first_passage_transform(p: &GridPath, x: f64, u: f64) -> Result<ShiftResult, TransformError> {
    check_quantile(u)?;
    let threshold = u * (x + minimum(p));
    let nu = p
        .values()
        .iter()
        .position(|v| *v > threshold)
        .ok_or(TransformError::NoPassage { threshold })?;
    ShiftResult::shifted(p, nu)
}

/// Shift at the last grid time the path sits at or below `min X + u X_1`.
///
/// For `X_1 >= 0` the local time at zero of the reflected process is the
/// increase of `J`, which rises by `X_1` in total and only while `X` runs along
/// its future infimum; inverting it at `u X_1` lands on this last-passage time.
/// The shifted path is nonnegative.
pub fn last_passage_transform(p: &GridPath, u: f64) -> Result<ShiftResult, TransformError> {
    check_quantile(u)?;
    let end = p.endpoint();
    if end < 0.0 {
        return Err(PathError::NegativeEndpoint(end).into());
    }
    let level = minimum(p) + u * end;
    let n = p.n();
    let nu = p.values()[..n]
        .iter()
        .rposition(|v| *v <= level)
        .ok_or(TransformError::NoPassage { threshold: level })?;
    ShiftResult::shifted(p, nu)
}

/// Uniform shift of a Bessel-3 path followed by removal of the line `t X_1`.
pub fn bes3_to_bridge(p: &GridPath, u: f64) -> Result<GridPath, TransformError> {
    check_quantile(u)?;
    let n = p.n();
    let j = (u * n as f64).round() as usize;
    let q = cyclic_shift(p, j.min(n))?;
    let end = p.endpoint();
    let mut out: Vec<f64> = q
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v - (k as f64 / n as f64) * end)
        .collect();
    out[n] = 0.0;
    Ok(GridPath::new(out)?)
}
