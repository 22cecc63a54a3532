//! Linear resampling and natural cubic splines.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::gaussian_vec;
use crate::series::TimeSeries;

/// Linearly interpolates every channel of `x` at fractional time index `pos`,
/// writing one row into `out`. `pos` is clamped to `[0, T-1]`.
#[inline]
pub(crate) fn sample_row(x: &TimeSeries, pos: f64, out: &mut [f64]) {
    let last = x.len() - 1;
    if pos <= 0.0 {
        out.copy_from_slice(x.row(0));
        return;
    }
    let lo = pos.floor() as usize;
    if lo >= last {
        out.copy_from_slice(x.row(last));
        return;
    }
    let frac = pos - lo as f64;
    let (a, b) = (x.row(lo), x.row(lo + 1));
    for d in 0..out.len() {
        out[d] = a[d] + frac * (b[d] - a[d]);
    }
}

/// Samples `x` at the given fractional positions.
pub(crate) fn sample_at(x: &TimeSeries, positions: impl IntoIterator<Item = f64>) -> TimeSeries {
    let dims = x.dims();
    let mut values = Vec::new();
    let mut row = vec![0.0; dims];
    for pos in positions {
        sample_row(x, pos, &mut row);
        values.extend_from_slice(&row);
    }
    TimeSeries::from_parts(values, dims)
}

/// Resamples `x` to `new_length` steps by piecewise-linear interpolation at
/// uniformly spaced fractional indices. Endpoints are kept exactly and
/// `resample_linear(x, x.len())` returns `x` unchanged.
pub fn resample_linear(x: &TimeSeries, new_length: usize) -> TimeSeries {
    assert!(new_length >= 1, "new_length must be positive");
    let n = x.len();
    if new_length == n {
        return x.clone();
    }
    if new_length == 1 {
        return x.slice(0, 1);
    }
    let span = (n - 1) as f64;
    let denom = (new_length - 1) as f64;
    sample_at(x, (0..new_length).map(|i| i as f64 * span / denom))
}

/// Knot positions and heights of an interpolating spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Knots {
    positions: Vec<f64>,
    heights: Vec<f64>,
}

impl Knots {
    pub fn new(positions: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if positions.len() != heights.len() {
            return Err(Error::argument("knot positions and heights differ in length"));
        }
        if positions.len() < 2 {
            return Err(Error::argument("at least two knots are required"));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::argument("knot positions must be strictly increasing"));
        }
        if positions.iter().chain(&heights).any(|v| !v.is_finite()) {
            return Err(Error::argument("knots must be finite"));
        }
        Ok(Self { positions, heights })
    }

    /// `heights.len()` knots evenly spaced over `[0, end]`, both ends included.
    pub fn evenly_spaced(end: f64, heights: Vec<f64>) -> Result<Self> {
        let count = heights.len();
        if count < 2 {
            return Err(Error::argument("at least two knots are required"));
        }
        Self::new(even_positions(end, count), heights)
    }

    /// `count` knots over `[0, end]` with heights drawn from `Normal(mean, sigma^2)`.
    /// With `random_interior` the interior positions are drawn uniformly
    /// (sorted) instead of evenly spaced; the endpoints stay fixed.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        count: usize,
        end: f64,
        mean: f64,
        sigma: f64,
        random_interior: bool,
    ) -> Result<Self> {
        if count < 2 {
            return Err(Error::argument("at least two knots are required"));
        }
        let heights = gaussian_vec(rng, mean, sigma, count);
        let positions = if random_interior && count > 2 {
            let mut interior: Vec<f64> =
                (0..count - 2).map(|_| rng.random_range(0.0..end)).collect();
            interior.sort_by(f64::total_cmp);
            let mut p = Vec::with_capacity(count);
            p.push(0.0);
            p.extend(interior);
            p.push(end);
            // collisions are vanishingly rare; fall back to even spacing
            if p.windows(2).any(|w| w[1] <= w[0]) {
                even_positions(end, count)
            } else {
                p
            }
        } else {
            even_positions(end, count)
        };
        Self::new(positions, heights)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }
}

fn even_positions(end: f64, count: usize) -> Vec<f64> {
    let step = (count - 1) as f64;
    let mut p: Vec<f64> = (0..count).map(|i| i as f64 * end / step).collect();
    p[count - 1] = end;
    p
}

/// Natural cubic spline (zero second derivative at both ends).
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(knots: &Knots) -> Self {
        let xs = knots.positions.clone();
        let ys = knots.heights.clone();
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives (Thomas algorithm).
            let k = n - 2;
            let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                upper[i] = h[i + 1];
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
            }
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self { xs, ys, m }
    }

    pub fn span(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, q: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(lo..=hi).contains(&q) {
            return Err(Error::Domain(format!(
                "query {q} outside spline span [{lo}, {hi}]"
            )));
        }
        // segment i such that xs[i] <= q <= xs[i+1]
        let i = match self.xs.binary_search_by(|x| x.total_cmp(&q)) {
            Ok(i) => return Ok(self.ys[i]),
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - q) / h;
        let b = (q - self.xs[i]) / h;
        // written as y_i + b*dy so constant data evaluates exactly
        Ok(self.ys[i]
            + b * (self.ys[i + 1] - self.ys[i])
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0)
    }
}

/// Evaluates the natural cubic spline through `knots` at each query point.
pub fn cubic_spline_eval(knots: &Knots, query_points: &[f64]) -> Result<Vec<f64>> {
    let spline = NaturalCubicSpline::new(knots);
    query_points.iter().map(|&q| spline.eval(q)).collect()
}
