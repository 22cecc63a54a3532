//! Random transformations in the magnitude and time domains.
//!
//! Each transform has a sampling entry point taking an RNG and a
//! deterministic `*_with` variant taking the already-drawn quantities, so the
//! geometry can be tested without going through the random stream.

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::interp::{resample_linear, sample_at, Knots, NaturalCubicSpline};
use crate::rng::{gaussian, gaussian_vec};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermuteMode {
    /// Equal-length segments; the remainder goes to the leading segments.
    #[default]
    Equal,
    /// Segments split at uniformly drawn cut points.
    Variable,
}

/// Tunable parameters of the random transforms. Defaults are the evaluated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformParams {
    pub jitter_sigma: f64,
    pub scale_sigma: f64,
    pub magwarp_sigma: f64,
    pub magwarp_knots: usize,
    pub timewarp_sigma: f64,
    pub timewarp_knots: usize,
    pub slice_ratio: f64,
    /// Inclusive range the segment count is drawn from.
    pub permute_segments: (usize, usize),
    pub permute_mode: PermuteMode,
    pub windowwarp_ratio: f64,
    pub windowwarp_scales: Vec<f64>,
    /// Angle standard deviation (radians) for multivariate rotation.
    pub rotation_sigma: f64,
    /// Draw one scale / warp curve for all channels instead of one per channel.
    pub shared_magnitude: bool,
    /// Randomize interior knot positions for magnitude warping.
    pub random_knot_positions: bool,
}

impl Default for TransformParams {
    fn default() -> Self {
        Self {
            jitter_sigma: 0.03,
            scale_sigma: 0.2,
            magwarp_sigma: 0.2,
            magwarp_knots: 4,
            timewarp_sigma: 0.2,
            timewarp_knots: 4,
            slice_ratio: 0.9,
            permute_segments: (2, 5),
            permute_mode: PermuteMode::Equal,
            windowwarp_ratio: 0.1,
            windowwarp_scales: vec![0.5, 2.0],
            rotation_sigma: 0.2,
            shared_magnitude: false,
            random_knot_positions: false,
        }
    }
}

impl TransformParams {
    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            ("jitter_sigma", self.jitter_sigma),
            ("scale_sigma", self.scale_sigma),
            ("magwarp_sigma", self.magwarp_sigma),
            ("timewarp_sigma", self.timewarp_sigma),
            ("rotation_sigma", self.rotation_sigma),
        ];
        for (name, v) in sigmas {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.magwarp_knots < 2 || self.timewarp_knots < 2 {
            return Err(Error::argument("spline warps need at least 2 knots"));
        }
        if !(self.slice_ratio > 0.0 && self.slice_ratio <= 1.0) {
            return Err(Error::argument(format!(
                "slice_ratio must be in (0, 1], got {}",
                self.slice_ratio
            )));
        }
        let (lo, hi) = self.permute_segments;
        if lo == 0 || lo > hi {
            return Err(Error::argument(format!("invalid segment range {lo}..={hi}")));
        }
        if !(self.windowwarp_ratio > 0.0 && self.windowwarp_ratio <= 1.0) {
            return Err(Error::argument(format!(
                "windowwarp_ratio must be in (0, 1], got {}",
                self.windowwarp_ratio
            )));
        }
        if self.windowwarp_scales.is_empty()
            || self.windowwarp_scales.iter().any(|s| !(*s > 0.0 && s.is_finite()))
        {
            return Err(Error::argument("windowwarp_scales must be non-empty and positive"));
        }
        Ok(())
    }
}

/// Adds i.i.d. `Normal(0, jitter_sigma^2)` noise to every value.
pub fn jitter<R: Rng + ?Sized>(x: &TimeSeries, params: &TransformParams, rng: &mut R) -> TimeSeries {
    let mut out = x.clone();
    if params.jitter_sigma == 0.0 {
        return out;
    }
    let noise = gaussian_vec(rng, 0.0, params.jitter_sigma, x.values().len());
    for (v, e) in out.values_mut().iter_mut().zip(noise) {
        *v += e;
    }
    out
}

/// Negation about zero, the univariate stand-in for rotation.
pub fn flip(x: &TimeSeries) -> TimeSeries {
    x.map(|v| 0.0 - v)
}

/// Rotates every sample by one angle in a uniformly chosen coordinate plane.
pub fn rotate<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let d = x.dims();
    if d < 2 {
        return Err(Error::dimension("rotation needs at least 2 channels; use flip"));
    }
    let pairs = d * (d - 1) / 2;
    let mut k = rng.random_range(0..pairs);
    let (mut p, mut q) = (0, 1);
    'outer: for a in 0..d {
        for b in a + 1..d {
            if k == 0 {
                (p, q) = (a, b);
                break 'outer;
            }
            k -= 1;
        }
    }
    let theta = gaussian(rng, 0.0, params.rotation_sigma);
    rotate_with(x, (p, q), theta)
}

/// Rotates every sample by `theta` radians in the `(p, q)` coordinate plane.
pub fn rotate_with(x: &TimeSeries, plane: (usize, usize), theta: f64) -> Result<TimeSeries> {
    let (p, q) = plane;
    if p == q || p >= x.dims() || q >= x.dims() {
        return Err(Error::dimension(format!("invalid rotation plane ({p}, {q})")));
    }
    let mut out = x.clone();
    if theta == 0.0 {
        return Ok(out);
    }
    let (s, c) = theta.sin_cos();
    let d = x.dims();
    for row in out.values_mut().chunks_exact_mut(d) {
        let (a, b) = (row[p], row[q]);
        row[p] = c * a - s * b;
        row[q] = s * a + c * b;
    }
    Ok(out)
}

/// Multiplies by `alpha ~ Normal(1, scale_sigma^2)`, one factor per channel
/// unless `shared_magnitude` is set.
pub fn scale<R: Rng + ?Sized>(x: &TimeSeries, params: &TransformParams, rng: &mut R) -> TimeSeries {
    let alphas = if params.shared_magnitude {
        vec![gaussian(rng, 1.0, params.scale_sigma); x.dims()]
    } else {
        gaussian_vec(rng, 1.0, params.scale_sigma, x.dims())
    };
    scale_with(x, &alphas)
}

/// Multiplies channel `d` by `alphas[d]`.
pub fn scale_with(x: &TimeSeries, alphas: &[f64]) -> TimeSeries {
    assert_eq!(alphas.len(), x.dims(), "one factor per channel");
    let mut out = x.clone();
    for row in out.values_mut().chunks_exact_mut(alphas.len()) {
        for (v, a) in row.iter_mut().zip(alphas) {
            *v *= a;
        }
    }
    out
}

fn spline_end(len: usize) -> f64 {
    (len.max(2) - 1) as f64
}

fn curve(knots: &Knots, len: usize) -> Result<Vec<f64>> {
    let spline = NaturalCubicSpline::new(knots);
    (0..len).map(|t| spline.eval(t as f64)).collect()
}

/// Multiplies by a smooth random curve: a natural cubic spline through
/// `magwarp_knots` knots with heights `~ Normal(1, magwarp_sigma^2)`.
pub fn magnitude_warp<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let end = spline_end(x.len());
    let draw = |rng: &mut R| {
        Knots::random(
            rng,
            params.magwarp_knots,
            end,
            1.0,
            params.magwarp_sigma,
            params.random_knot_positions,
        )
    };
    let knots = if params.shared_magnitude {
        vec![draw(rng)?; x.dims()]
    } else {
        (0..x.dims()).map(|_| draw(rng)).collect::<Result<Vec<_>>>()?
    };
    magnitude_warp_with(x, &knots)
}

/// Magnitude warp with explicit per-channel knots (`knots[d]` for channel `d`).
pub fn magnitude_warp_with(x: &TimeSeries, knots: &[Knots]) -> Result<TimeSeries> {
    if knots.len() != x.dims() {
        return Err(Error::dimension("one knot set per channel"));
    }
    let curves = knots
        .iter()
        .map(|k| curve(k, x.len()))
        .collect::<Result<Vec<_>>>()?;
    let mut out = x.clone();
    let d = x.dims();
    for (t, row) in out.values_mut().chunks_exact_mut(d).enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v *= curves[c][t];
        }
    }
    Ok(out)
}

/// Splits into `N` segments (`N` uniform in `permute_segments`) and
/// concatenates them in a uniformly random order.
pub fn permute<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let (lo, hi) = params.permute_segments;
    let n = rng.random_range(lo..=hi);
    let len = x.len();
    if n > len {
        return Err(Error::constraint(format!(
            "cannot split {len} time steps into {n} segments"
        )));
    }
    let bounds = match params.permute_mode {
        PermuteMode::Equal => equal_segments(len, n),
        PermuteMode::Variable => {
            let mut cuts: Vec<usize> = index::sample(rng, len - 1, n - 1)
                .into_iter()
                .map(|c| c + 1)
                .collect();
            cuts.sort_unstable();
            let mut b = Vec::with_capacity(n);
            let mut start = 0;
            for c in cuts {
                b.push((start, c));
                start = c;
            }
            b.push((start, len));
            b
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Ok(permute_with(x, &bounds, &order))
}

/// `n` contiguous `[start, end)` segments covering `0..len`; the first
/// `len % n` segments get one extra element.
pub fn equal_segments(len: usize, n: usize) -> Vec<(usize, usize)> {
    let (base, extra) = (len / n, len % n);
    let mut start = 0;
    (0..n)
        .map(|k| {
            let size = base + usize::from(k < extra);
            let seg = (start, start + size);
            start += size;
            seg
        })
        .collect()
}

/// Concatenates `segments[order[0]], segments[order[1]], ...`.
pub fn permute_with(x: &TimeSeries, segments: &[(usize, usize)], order: &[usize]) -> TimeSeries {
    let d = x.dims();
    let mut values = Vec::with_capacity(x.values().len());
    for &k in order {
        let (s, e) = segments[k];
        values.extend_from_slice(&x.values()[s * d..e * d]);
    }
    TimeSeries::from_parts(values, d)
}

/// Window length used by [`window_slice`] for a series of length `len`.
pub fn slice_length(len: usize, ratio: f64) -> usize {
    (ratio * len as f64).round() as usize
}

/// Crops a random window of `round(slice_ratio * T)` steps and stretches it
/// back to `T` steps by linear interpolation.
pub fn window_slice<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let len = x.len();
    let w = slice_length(len, params.slice_ratio).min(len);
    if w < 2 {
        return Err(Error::constraint(format!(
            "slice window of {w} step(s) is too short (T = {len})"
        )));
    }
    let start = rng.random_range(0..=len - w);
    Ok(window_slice_with(x, start, w))
}

pub fn window_slice_with(x: &TimeSeries, start: usize, width: usize) -> TimeSeries {
    resample_linear(&x.slice(start, start + width), x.len())
}

/// Cumulative time map for the given rate curve: `tau(0) = 0`,
/// `tau(T-1) = T-1`, increments proportional to the trapezoid average of
/// adjacent rates. Returns `None` unless every rate is positive.
pub fn warp_from_rates(rates: &[f64]) -> Option<Vec<f64>> {
    if rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return None;
    }
    let n = rates.len();
    let mut tau = Vec::with_capacity(n);
    tau.push(0.0);
    let mut acc = 0.0;
    for t in 1..n {
        acc += 0.5 * (rates[t - 1] + rates[t]);
        tau.push(acc);
    }
    if n > 1 {
        let k = (n - 1) as f64 / acc;
        for v in tau.iter_mut() {
            *v *= k;
        }
        tau[n - 1] = (n - 1) as f64;
    }
    Some(tau)
}

/// Time map drawn from a spline rate curve through `knots`.
pub fn warp_from_knots(knots: &Knots, len: usize) -> Result<Option<Vec<f64>>> {
    Ok(warp_from_rates(&curve(knots, len)?))
}

const TIME_WARP_RETRIES: usize = 100;

/// Smooth random time warp. A rate curve is a natural cubic spline through
/// `timewarp_knots` knots with heights `~ Normal(1, timewarp_sigma^2)`; the
/// curve is integrated into a strictly increasing map `tau` with fixed
/// endpoints, and the output at step `t` is `x` sampled at `tau^-1(t)`.
/// One warp is shared by all channels.
pub fn time_warp<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    if x.len() < 2 {
        return Ok(x.clone());
    }
    let tau = random_time_map(x.len(), params, rng)?;
    Ok(time_warp_with(x, &tau))
}

/// The random strictly increasing map `tau` used by [`time_warp`], with
/// `tau[0] = 0` and `tau[len - 1] = len - 1`.
pub fn random_time_map<R: Rng + ?Sized>(
    len: usize,
    params: &TransformParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if len < 2 {
        return Ok(vec![0.0; len]);
    }
    let end = spline_end(len);
    for _ in 0..TIME_WARP_RETRIES {
        let knots = Knots::random(rng, params.timewarp_knots, end, 1.0, params.timewarp_sigma, false)?;
        if let Some(tau) = warp_from_knots(&knots, len)? {
            return Ok(tau);
        }
    }
    Err(Error::constraint(format!(
        "time warp drew a non-positive rate {TIME_WARP_RETRIES} times; lower timewarp_sigma"
    )))
}

/// Applies a strictly increasing time map `tau` (same length as `x`).
pub fn time_warp_with(x: &TimeSeries, tau: &[f64]) -> TimeSeries {
    assert_eq!(tau.len(), x.len());
    let last = tau.len() - 1;
    let mut seg = 0;
    let positions = (0..tau.len()).map(|t| {
        let target = t as f64;
        if target >= tau[last] {
            return last as f64;
        }
        while seg + 1 < last && tau[seg + 1] <= target {
            seg += 1;
        }
        seg as f64 + (target - tau[seg]) / (tau[seg + 1] - tau[seg])
    });
    sample_at(x, positions.collect::<Vec<_>>())
}

/// Stretches or contracts a random window of `round(windowwarp_ratio * T)`
/// steps (at least one) by a factor drawn from `windowwarp_scales`, then resamples the
/// whole sequence back to `T` steps.
pub fn window_warp<R: Rng + ?Sized>(
    x: &TimeSeries,
    params: &TransformParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let len = x.len();
    let w = slice_length(len, params.windowwarp_ratio).clamp(1, len);
    let start = rng.random_range(0..=len - w);
    let factor = params.windowwarp_scales[rng.random_range(0..params.windowwarp_scales.len())];
    Ok(window_warp_with(x, start, w, factor))
}

pub fn window_warp_with(x: &TimeSeries, start: usize, width: usize, factor: f64) -> TimeSeries {
    let len = x.len();
    let warped_len = ((width as f64 * factor).round() as usize).max(1);
    let warped = resample_linear(&x.slice(start, start + width), warped_len);
    let d = x.dims();
    let mut values = Vec::with_capacity((len - width + warped_len) * d);
    values.extend_from_slice(&x.values()[..start * d]);
    values.extend_from_slice(warped.values());
    values.extend_from_slice(&x.values()[(start + width) * d..]);
    resample_linear(&TimeSeries::from_parts(values, d), len)
}
