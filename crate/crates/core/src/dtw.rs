//! Constrained dynamic time warping.
//!
//! All alignments use the symmetric step pattern: entering a cell diagonally
//! adds `2 * d(i, j)`, entering it horizontally or vertically adds `d(i, j)`,
//! and the start cell costs `2 * d(0, 0)`. Paths are restricted to a
//! Sakoe-Chiba band `|i - j| <= w`.

use crate::error::{Error, Result};
use crate::series::{euclidean, TimeSeries};

/// Step pattern of the dynamic program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepPattern {
    /// Weights (1, 2, 1) for (vertical, diagonal, horizontal) moves.
    #[default]
    Symmetric,
}

/// Distance between two aligned samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalCost {
    #[default]
    Euclidean,
    SquaredEuclidean,
}

impl LocalCost {
    #[inline]
    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            LocalCost::Euclidean => euclidean(a, b),
            LocalCost::SquaredEuclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtwConfig {
    /// Band half-width as a fraction of the longer input, in `(0, 1]`.
    pub window_fraction: f64,
    pub step: StepPattern,
    pub local_cost: LocalCost,
    /// Odd subsequence length for [`shape_dtw`]; `None` means the default of 5.
    pub descriptor_len: Option<usize>,
}

impl Default for DtwConfig {
    fn default() -> Self {
        Self::with_window(0.1)
    }
}

impl DtwConfig {
    pub const DEFAULT_DESCRIPTOR_LEN: usize = 5;

    /// No band constraint beyond the matrix itself.
    pub fn full() -> Self {
        Self::with_window(1.0)
    }

    pub fn with_window(window_fraction: f64) -> Self {
        Self {
            window_fraction,
            step: StepPattern::Symmetric,
            local_cost: LocalCost::Euclidean,
            descriptor_len: None,
        }
    }

    pub fn descriptor(mut self, len: usize) -> Self {
        self.descriptor_len = Some(len);
        self
    }

    pub fn cost(mut self, local_cost: LocalCost) -> Self {
        self.local_cost = local_cost;
        self
    }

    /// Effective band half-width for inputs of length `n` and `m`: the
    /// fractional band, widened to `|n - m|` so that a path always exists.
    pub fn band_width(&self, n: usize, m: usize) -> usize {
        let longer = n.max(m) as f64;
        let w = (self.window_fraction * longer).ceil() as usize;
        w.max(n.abs_diff(m))
    }

    fn validate(&self) -> Result<()> {
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::argument(format!(
                "window fraction {} outside (0, 1]",
                self.window_fraction
            )));
        }
        Ok(())
    }
}

/// A monotone alignment between two sequences as `(i, j)` index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath(Vec<(usize, usize)>);

impl WarpingPath {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self(pairs)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: (usize, usize)) -> bool {
        self.0.contains(&point)
    }

    /// Swaps the roles of the two sequences.
    pub fn transposed(&self) -> Self {
        Self(self.0.iter().map(|&(i, j)| (j, i)).collect())
    }

    /// Checks the path invariants for an `n x m` alignment with band `w`:
    /// endpoints, unit monotone steps and the band.
    pub fn check(&self, n: usize, m: usize, w: usize) -> Result<()> {
        let p = &self.0;
        if p.first() != Some(&(0, 0)) || p.last() != Some(&(n - 1, m - 1)) {
            return Err(Error::constraint("path does not span both sequences"));
        }
        for s in p.windows(2) {
            let (di, dj) = (s[1].0.wrapping_sub(s[0].0), s[1].1.wrapping_sub(s[0].1));
            if di > 1 || dj > 1 || di + dj == 0 {
                return Err(Error::constraint(format!(
                    "illegal step {:?} -> {:?}",
                    s[0], s[1]
                )));
            }
        }
        if let Some(&(i, j)) = p.iter().find(|&&(i, j)| i.abs_diff(j) > w) {
            return Err(Error::constraint(format!("({i}, {j}) outside band {w}")));
        }
        Ok(())
    }
}

/// Result of an alignment: accumulated cost and the path achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub distance: f64,
    pub path: WarpingPath,
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Solves the banded dynamic program on the sub-rectangle `start..=end`
/// (inclusive, in global coordinates). The start cell holds `start_acc`
/// when given, otherwise `2 * cost(start)`.
fn solve<C>(
    cost: C,
    start: (usize, usize),
    end: (usize, usize),
    w: usize,
    start_acc: Option<f64>,
    want_path: bool,
) -> (f64, Vec<(usize, usize)>)
where
    C: Fn(usize, usize) -> f64,
{
    let rows = end.0 - start.0 + 1;
    let cols = end.1 - start.1 + 1;
    let mut acc = vec![f64::INFINITY; rows * cols];
    let mut dir = if want_path { vec![DIAG; rows * cols] } else { Vec::new() };

    for r in 0..rows {
        let gi = start.0 + r;
        let lo = gi.saturating_sub(w).max(start.1);
        let hi = (gi + w).min(end.1);
        if lo > hi {
            continue;
        }
        for gj in lo..=hi {
            let c = gj - start.1;
            let idx = r * cols + c;
            let d = cost(gi, gj);
            if r == 0 && c == 0 {
                acc[idx] = start_acc.unwrap_or(2.0 * d);
                continue;
            }
            let mut best = f64::INFINITY;
            let mut step = DIAG;
            if r > 0 && c > 0 {
                best = acc[idx - cols - 1] + 2.0 * d;
            }
            if r > 0 {
                let v = acc[idx - cols] + d;
                if v < best {
                    best = v;
                    step = UP;
                }
            }
            if c > 0 {
                let v = acc[idx - 1] + d;
                if v < best {
                    best = v;
                    step = LEFT;
                }
            }
            acc[idx] = best;
            if want_path {
                dir[idx] = step;
            }
        }
    }

    let distance = acc[rows * cols - 1];
    let mut path = Vec::new();
    if want_path {
        let (mut r, mut c) = (rows - 1, cols - 1);
        path.reserve(rows + cols);
        path.push((start.0 + r, start.1 + c));
        while r > 0 || c > 0 {
            match dir[r * cols + c] {
                DIAG => {
                    r -= 1;
                    c -= 1;
                }
                UP => r -= 1,
                _ => c -= 1,
            }
            path.push((start.0 + r, start.1 + c));
        }
        path.reverse();
    }
    (distance, path)
}

fn check_dims(x: &TimeSeries, y: &TimeSeries) -> Result<()> {
    if x.dims() != y.dims() {
        return Err(Error::dimension(format!(
            "cannot align {} channels with {}",
            x.dims(),
            y.dims()
        )));
    }
    Ok(())
}

#[cfg(debug_assertions)]
fn debug_check(path: &[(usize, usize)], n: usize, m: usize, w: usize) {
    WarpingPath(path.to_vec())
        .check(n, m, w)
        .expect("dtw produced an invalid warping path");
}

#[cfg(not(debug_assertions))]
fn debug_check(_: &[(usize, usize)], _: usize, _: usize, _: usize) {}

/// Banded DTW between `x` and `y`.
pub fn dtw(x: &TimeSeries, y: &TimeSeries, cfg: &DtwConfig) -> Result<Alignment> {
    check_dims(x, y)?;
    cfg.validate()?;
    let (n, m) = (x.len(), y.len());
    let w = cfg.band_width(n, m);
    let lc = cfg.local_cost;
    let (distance, path) = solve(
        |i, j| lc.eval(x.row(i), y.row(j)),
        (0, 0),
        (n - 1, m - 1),
        w,
        None,
        true,
    );
    debug_check(&path, n, m, w);
    Ok(Alignment {
        distance,
        path: WarpingPath(path),
    })
}

/// Banded DTW distance without backtracking.
pub fn dtw_distance(x: &TimeSeries, y: &TimeSeries, cfg: &DtwConfig) -> Result<f64> {
    check_dims(x, y)?;
    cfg.validate()?;
    let (n, m) = (x.len(), y.len());
    let lc = cfg.local_cost;
    let (distance, _) = solve(
        |i, j| lc.eval(x.row(i), y.row(j)),
        (0, 0),
        (n - 1, m - 1),
        cfg.band_width(n, m),
        None,
        false,
    );
    Ok(distance)
}

/// Suboptimal DTW whose path is forced through `point`.
///
/// The prefix `(0,0) -> point` and the suffix `point -> end` are solved
/// independently under the same band and concatenated. The distance is the
/// prefix cost plus the suffix cost excluding the shared forced cell, i.e.
/// the symmetric-pattern cost of the concatenated path.
pub fn dtw_forced_point(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: &DtwConfig,
    point: (usize, usize),
) -> Result<Alignment> {
    check_dims(x, y)?;
    cfg.validate()?;
    let (n, m) = (x.len(), y.len());
    let w = cfg.band_width(n, m);
    let (pi, pj) = point;
    if pi >= n || pj >= m || pi.abs_diff(pj) > w {
        return Err(Error::constraint(format!(
            "forced point ({pi}, {pj}) is not band-feasible for {n}x{m} with band {w}"
        )));
    }
    let lc = cfg.local_cost;
    let cost = |i: usize, j: usize| lc.eval(x.row(i), y.row(j));
    let (head_cost, mut path) = solve(cost, (0, 0), point, w, None, true);
    // the suffix continues from the prefix total so the forced cell is counted once
    let (total, tail) = solve(cost, point, (n - 1, m - 1), w, Some(head_cost), true);
    if !total.is_finite() {
        return Err(Error::constraint(format!(
            "no band-feasible path through ({pi}, {pj})"
        )));
    }
    path.extend_from_slice(&tail[1..]);
    debug_check(&path, n, m, w);
    Ok(Alignment {
        distance: total,
        path: WarpingPath(path),
    })
}

/// Raw-subsequence descriptors: for each time step, the `len` samples
/// centred on it (edges replicated), flattened across channels.
pub fn shape_descriptors(x: &TimeSeries, len: usize) -> Result<TimeSeries> {
    if len == 0 || len.is_multiple_of(2) {
        return Err(Error::argument(format!(
            "descriptor length must be odd and positive, got {len}"
        )));
    }
    let half = (len / 2) as isize;
    let last = x.len() as isize - 1;
    let mut values = Vec::with_capacity(x.len() * len * x.dims());
    for t in 0..x.len() as isize {
        for k in -half..=half {
            let s = (t + k).clamp(0, last) as usize;
            values.extend_from_slice(x.row(s));
        }
    }
    Ok(TimeSeries::from_parts(values, len * x.dims()))
}

/// shapeDTW: DTW whose local cost is the Euclidean distance between
/// raw-subsequence descriptors of length `cfg.descriptor_len`.
pub fn shape_dtw(x: &TimeSeries, y: &TimeSeries, cfg: &DtwConfig) -> Result<Alignment> {
    check_dims(x, y)?;
    let len = cfg.descriptor_len.unwrap_or(DtwConfig::DEFAULT_DESCRIPTOR_LEN);
    let dx = shape_descriptors(x, len)?;
    let dy = shape_descriptors(y, len)?;
    dtw(&dx, &dy, cfg)
}

/// shapeDTW distance without backtracking.
pub fn shape_dtw_distance(x: &TimeSeries, y: &TimeSeries, cfg: &DtwConfig) -> Result<f64> {
    check_dims(x, y)?;
    let len = cfg.descriptor_len.unwrap_or(DtwConfig::DEFAULT_DESCRIPTOR_LEN);
    dtw_distance(&shape_descriptors(x, len)?, &shape_descriptors(y, len)?, cfg)
}
