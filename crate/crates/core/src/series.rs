//! The sequence container shared by every transform.

use crate::error::{Error, Result};

/// A `T x D` real-valued sequence stored row-major: `values[t * dims + d]`.
///
/// Values are finite except for series built with [`TimeSeries::with_missing`],
/// which may carry `NaN` placeholders until imputation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dims: usize,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dims: usize) -> Result<Self> {
        let ts = Self::with_missing(values, dims)?;
        if ts.values.iter().any(|v| v.is_nan()) {
            return Err(Error::argument("time series contains NaN"));
        }
        Ok(ts)
    }

    /// Builds a series that may contain `NaN` placeholders (missing values).
    /// Infinite values are still rejected.
    pub fn with_missing(values: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::argument("time series needs at least one channel"));
        }
        if values.is_empty() {
            return Err(Error::argument("time series needs at least one time step"));
        }
        if !values.len().is_multiple_of(dims) {
            return Err(Error::dimension(format!(
                "{} values do not divide into {dims} channels",
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::argument("time series contains an infinite value"));
        }
        Ok(Self { values, dims })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    /// Builds a series from per-time-step rows; every row must have the same width.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dims = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::dimension("ragged rows"));
            }
            values.extend_from_slice(row);
        }
        Self::new(values, dims)
    }

    /// Internal constructor for values produced by arithmetic on valid series.
    pub(crate) fn from_parts(values: Vec<f64>, dims: usize) -> Self {
        debug_assert!(dims > 0 && !values.is_empty() && values.len().is_multiple_of(dims));
        Self { values, dims }
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dims
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of channels `D`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dims..(t + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dims)
    }

    pub fn get(&self, t: usize, d: usize) -> f64 {
        self.values[t * self.dims + d]
    }

    /// Copies one channel out as a contiguous vector.
    pub fn channel(&self, d: usize) -> Vec<f64> {
        self.rows().map(|r| r[d]).collect()
    }

    pub fn has_missing(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }

    /// Applies `f` to every value, keeping the shape.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.values.iter().map(|&v| f(v)).collect(), self.dims)
    }

    /// Contiguous sub-sequence `[start, end)` of time steps.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start < end && end <= self.len(), "slice {start}..{end} out of range");
        Self::from_parts(
            self.values[start * self.dims..end * self.dims].to_vec(),
            self.dims,
        )
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Per-channel (min, max) over all time steps, ignoring NaN.
    pub fn channel_range(&self, d: usize) -> (f64, f64) {
        self.rows()
            .map(|r| r[d])
            .filter(|v| !v.is_nan())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Euclidean distance between two samples of equal width.
#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_accessors() {
        let ts = TimeSeries::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.dims(), 2);
        assert_eq!(ts.row(1), &[3.0, 4.0]);
        assert_eq!(ts.channel(1), vec![2.0, 4.0, 6.0]);
        assert_eq!(ts.channel_range(0), (1.0, 5.0));
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(TimeSeries::new(vec![], 1).is_err());
        assert!(TimeSeries::new(vec![1.0], 0).is_err());
        assert!(TimeSeries::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(TimeSeries::new(vec![f64::NAN], 1).is_err());
        assert!(TimeSeries::with_missing(vec![f64::INFINITY], 1).is_err());
        assert!(TimeSeries::with_missing(vec![1.0, f64::NAN], 1)
            .unwrap()
            .has_missing());
    }

    #[test]
    fn euclidean_matches_definition() {
        assert_eq!(euclidean(&[3.0], &[-1.0]), 4.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }
}
