//! Pattern-mixing augmentations built on DTW alignment.
//!
//! * SPAWNER averages two same-class patterns along a DTW path forced through
//!   a random point.
//! * wDBA-ASD takes a weighted DTW barycenter of a reference and its class
//!   neighbours, weighting each neighbour by its distance to the reference.
//! * RGW / DGW warp a reference onto the time axis of a teacher pattern, the
//!   teacher being random (RGW) or the most class-discriminative candidate
//!   of a sampled batch under shapeDTW (DGW).

use rand::seq::index;
use rand::Rng;

use crate::dataset::LabeledDataset;
use crate::dtw::{
    dtw, dtw_distance, dtw_forced_point, shape_descriptors, Alignment, DtwConfig, LocalCost,
    WarpingPath,
};
use crate::error::{Error, Result, Warning};
use crate::interp::resample_linear;
use crate::rng::gaussian;
use crate::series::TimeSeries;

/// How SPAWNER perturbs the averaged pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpawnerNoise {
    /// Standard deviation `spawner_sigma * |a_i - b_j|`, i.e. proportional to
    /// the local disagreement of the two aligned patterns.
    #[default]
    Relative,
    /// Standard deviation `spawner_sigma` everywhere.
    Absolute,
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingParams {
    pub spawner_sigma: f64,
    pub spawner_noise: SpawnerNoise,
    /// Sakoe-Chiba band as a fraction of the longer pattern.
    pub dtw_window: f64,
    pub dba_iterations: usize,
    /// Candidates sampled per DGW generation, positives and negatives together.
    pub dgw_batch: usize,
    pub use_shape_dtw_for_dgw: bool,
    /// Odd shapeDTW descriptor length.
    pub descriptor_len: usize,
}

impl Default for MixingParams {
    fn default() -> Self {
        Self {
            spawner_sigma: 0.5,
            spawner_noise: SpawnerNoise::Relative,
            dtw_window: 0.1,
            dba_iterations: 10,
            dgw_batch: 6,
            use_shape_dtw_for_dgw: true,
            descriptor_len: DtwConfig::DEFAULT_DESCRIPTOR_LEN,
        }
    }
}

impl MixingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtw_window > 0.0 && self.dtw_window <= 1.0) {
            return Err(Error::argument(format!(
                "dtw_window must be in (0, 1], got {}",
                self.dtw_window
            )));
        }
        if !(self.spawner_sigma >= 0.0 && self.spawner_sigma.is_finite()) {
            return Err(Error::argument("spawner_sigma must be finite and >= 0"));
        }
        if self.dba_iterations == 0 {
            return Err(Error::argument("dba_iterations must be positive"));
        }
        if self.dgw_batch < 2 {
            return Err(Error::argument("dgw_batch must be at least 2"));
        }
        if self.descriptor_len.is_multiple_of(2) {
            return Err(Error::argument("descriptor_len must be odd"));
        }
        Ok(())
    }

    pub fn dtw_config(&self) -> DtwConfig {
        DtwConfig::with_window(self.dtw_window).descriptor(self.descriptor_len)
    }
}

fn same_dims(a: &TimeSeries, b: &TimeSeries) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::dimension(format!(
            "patterns have {} and {} channels",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// A SPAWNER sample together with the alignment that produced it.
#[derive(Debug, Clone)]
pub struct SpawnerOutput {
    pub series: TimeSeries,
    pub point: (usize, usize),
    pub alignment: Alignment,
}

/// Point on the (length-scaled) diagonal at row `i`.
fn diagonal_point(i: usize, n: usize, m: usize) -> (usize, usize) {
    if n == 1 {
        return (0, 0);
    }
    let j = (i as f64 * (m - 1) as f64 / (n - 1) as f64).round() as usize;
    (i, j.min(m - 1))
}

/// SPAWNER: forces the alignment of `a` and `b` through a random point on
/// the scaled diagonal, averages the aligned pairs, resamples to `a`'s
/// length and adds noise.
pub fn spawner<R: Rng + ?Sized>(
    a: &TimeSeries,
    b: &TimeSeries,
    params: &MixingParams,
    rng: &mut R,
) -> Result<SpawnerOutput> {
    let i = rng.random_range(0..a.len());
    let point = diagonal_point(i, a.len(), b.len());
    spawner_through(a, b, point, params, rng)
}

/// SPAWNER with an explicit forced point.
pub fn spawner_through<R: Rng + ?Sized>(
    a: &TimeSeries,
    b: &TimeSeries,
    point: (usize, usize),
    params: &MixingParams,
    rng: &mut R,
) -> Result<SpawnerOutput> {
    same_dims(a, b)?;
    let alignment = dtw_forced_point(a, b, &params.dtw_config(), point)?;
    let d = a.dims();
    let pairs = alignment.path.pairs();
    let mut mean = Vec::with_capacity(pairs.len() * d);
    let mut spread = Vec::with_capacity(pairs.len() * d);
    for &(i, j) in pairs {
        for (x, y) in a.row(i).iter().zip(b.row(j)) {
            mean.push(0.5 * (x + y));
            spread.push((x - y).abs());
        }
    }
    let mean = resample_linear(&TimeSeries::from_parts(mean, d), a.len());
    let mut series = mean;
    match params.spawner_noise {
        SpawnerNoise::Off => {}
        SpawnerNoise::Absolute => {
            for v in series.values_mut() {
                *v += gaussian(rng, 0.0, params.spawner_sigma);
            }
        }
        SpawnerNoise::Relative => {
            let spread = resample_linear(&TimeSeries::from_parts(spread, d), a.len());
            for (v, s) in series.values_mut().iter_mut().zip(spread.values()) {
                *v += gaussian(rng, 0.0, params.spawner_sigma * s);
            }
        }
    }
    Ok(SpawnerOutput {
        series,
        point,
        alignment,
    })
}

/// Step multiplicity of each pair under the symmetric pattern: 2 for the
/// start cell and diagonal entries, 1 for horizontal or vertical entries.
fn step_weights(path: &WarpingPath) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
    let p = path.pairs();
    p.iter().enumerate().map(move |(k, &cell)| {
        let w = if k == 0 || (p[k - 1].0 != cell.0 && p[k - 1].1 != cell.1) {
            2.0
        } else {
            1.0
        };
        (cell, w)
    })
}

fn dba_config(cfg: &DtwConfig) -> DtwConfig {
    cfg.cost(LocalCost::SquaredEuclidean)
}

/// The quantity DBA minimizes: `sum_s w_s * DTW(centroid, s)` with
/// squared-Euclidean local cost.
pub fn dba_cost(
    centroid: &TimeSeries,
    seeds: &[&TimeSeries],
    weights: &[f64],
    cfg: &DtwConfig,
) -> Result<f64> {
    let cfg = dba_config(cfg);
    let mut total = 0.0;
    for (s, &w) in seeds.iter().zip(weights) {
        if w > 0.0 {
            total += w * dtw_distance(centroid, s, &cfg)?;
        }
    }
    Ok(total)
}

fn check_dba_inputs(seeds: &[&TimeSeries], weights: &[f64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::argument("DBA needs at least one seed"));
    }
    if seeds.len() != weights.len() {
        return Err(Error::argument(format!(
            "{} seeds but {} weights",
            seeds.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || weights.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::argument("weights must be non-negative with a positive sum"));
    }
    let d = seeds[0].dims();
    if seeds.iter().any(|s| s.dims() != d) {
        return Err(Error::dimension("seeds have different channel counts"));
    }
    Ok(())
}

fn dba_step(
    centroid: &TimeSeries,
    seeds: &[&TimeSeries],
    weights: &[f64],
    cfg: &DtwConfig,
) -> Result<TimeSeries> {
    let d = centroid.dims();
    // running weighted mean, exact when all matched values agree
    let mut mean = vec![0.0; centroid.values().len()];
    let mut mass = vec![0.0; centroid.len()];
    for (s, &w) in seeds.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let alignment = dtw(centroid, s, cfg)?;
        for ((i, j), m) in step_weights(&alignment.path) {
            let k = w * m;
            mass[i] += k;
            let share = k / mass[i];
            for (acc, v) in mean[i * d..(i + 1) * d].iter_mut().zip(s.row(j)) {
                *acc += share * (v - *acc);
            }
        }
    }
    Ok(TimeSeries::from_parts(mean, d))
}

/// Weighted DTW barycenter averaging.
///
/// Starts from the highest-weight seed (first on ties) and runs
/// `iterations` rounds; each round aligns every seed to the centroid and
/// replaces each centroid element by the weighted mean of the seed elements
/// matched to it. Alignments use squared-Euclidean local cost and each match
/// counts with its step multiplicity, which makes every round a minimizer of
/// [`dba_cost`] for the current paths.
pub fn dba(
    seeds: &[&TimeSeries],
    weights: &[f64],
    iterations: usize,
    cfg: &DtwConfig,
) -> Result<TimeSeries> {
    Ok(run_dba(seeds, weights, iterations, cfg, false)?.0)
}

/// [`dba`] plus the cost before the first round and after every round.
pub fn dba_trace(
    seeds: &[&TimeSeries],
    weights: &[f64],
    iterations: usize,
    cfg: &DtwConfig,
) -> Result<(TimeSeries, Vec<f64>)> {
    run_dba(seeds, weights, iterations, cfg, true)
}

fn run_dba(
    seeds: &[&TimeSeries],
    weights: &[f64],
    iterations: usize,
    cfg: &DtwConfig,
    trace: bool,
) -> Result<(TimeSeries, Vec<f64>)> {
    check_dba_inputs(seeds, weights)?;
    let cfg = dba_config(cfg);
    let start = weights
        .iter()
        .enumerate()
        .fold(0, |best, (i, &w)| if w > weights[best] { i } else { best });
    let mut centroid = seeds[start].clone();
    let mut costs = Vec::new();
    if trace {
        costs.push(dba_cost(&centroid, seeds, weights, &cfg)?);
    }
    for _ in 0..iterations {
        centroid = dba_step(&centroid, seeds, weights, &cfg)?;
        if trace {
            costs.push(dba_cost(&centroid, seeds, weights, &cfg)?);
        }
    }
    Ok((centroid, costs))
}

/// Average Selected with Distance weights: `exp(ln(0.5) * d / d_nn)` where
/// `d_nn` is the smallest neighbour distance, so the nearest neighbour gets
/// 0.5. When `d_nn` is 0 only exact duplicates keep weight 1.
pub fn asd_weights(distances: &[f64]) -> Vec<f64> {
    let nearest = distances.iter().copied().fold(f64::INFINITY, f64::min);
    distances
        .iter()
        .map(|&d| {
            if nearest == 0.0 {
                if d == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (std::f64::consts::LN_2 * -d / nearest).exp()
            }
        })
        .collect()
}

/// wDBA with ASD weighting around pattern `ref_index`. The reference has
/// weight 1; a class without other members yields the reference itself and
/// a [`Warning::SingletonClass`].
pub fn wdba_asd(
    dataset: &LabeledDataset,
    ref_index: usize,
    params: &MixingParams,
) -> Result<(TimeSeries, Option<Warning>)> {
    let class = dataset.labels()[ref_index];
    let reference = &dataset.series()[ref_index];
    let neighbours: Vec<usize> = dataset
        .class_members(class)
        .into_iter()
        .filter(|&i| i != ref_index)
        .collect();
    if neighbours.is_empty() {
        let w = Warning::SingletonClass {
            index: ref_index,
            class,
        };
        log::warn!("{w}");
        return Ok((reference.clone(), Some(w)));
    }
    let cfg = params.dtw_config();
    let distances = neighbours
        .iter()
        .map(|&i| dtw_distance(reference, &dataset.series()[i], &cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut weights = vec![1.0];
    weights.extend(asd_weights(&distances));
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let mut seeds = vec![reference];
    seeds.extend(neighbours.iter().map(|&i| &dataset.series()[i]));
    let centroid = dba(&seeds, &weights, params.dba_iterations, &cfg)?;
    Ok((centroid, None))
}

/// Sets `reference` to the time axis of `teacher` along `path`, whose pairs
/// are `(teacher_index, reference_index)`: each teacher step takes the mean
/// of the reference elements matched to it. The result has the teacher's length.
pub fn guided_warp(reference: &TimeSeries, teacher_len: usize, path: &WarpingPath) -> TimeSeries {
    let d = reference.dims();
    let mut sum = vec![0.0; teacher_len * d];
    let mut count = vec![0usize; teacher_len];
    for &(j, i) in path.pairs() {
        count[j] += 1;
        for (acc, v) in sum[j * d..(j + 1) * d].iter_mut().zip(reference.row(i)) {
            *acc += v;
        }
    }
    for (j, chunk) in sum.chunks_exact_mut(d).enumerate() {
        if count[j] > 1 {
            let n = count[j] as f64;
            chunk.iter_mut().for_each(|v| *v /= n);
        }
    }
    TimeSeries::from_parts(sum, d)
}

/// Random guided warping step: aligns `teacher` with `reference` by DTW,
/// warps the reference onto the teacher's time axis, then resamples to the
/// reference length.
pub fn rgw(reference: &TimeSeries, teacher: &TimeSeries, cfg: &DtwConfig) -> Result<TimeSeries> {
    same_dims(reference, teacher)?;
    let alignment = dtw(teacher, reference, cfg)?;
    let warped = guided_warp(reference, teacher.len(), &alignment.path);
    Ok(resample_linear(&warped, reference.len()))
}

/// Positive and negative candidate indices for a DGW generation, both ascending.
pub fn sample_dgw_batch<R: Rng + ?Sized>(
    dataset: &LabeledDataset,
    ref_index: usize,
    batch: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let class = dataset.labels()[ref_index];
    let (positives, negatives): (Vec<usize>, Vec<usize>) = (0..dataset.len())
        .filter(|&i| i != ref_index)
        .partition(|&i| dataset.labels()[i] == class);
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::constraint(format!(
            "DGW for pattern {ref_index} needs same-class and other-class candidates \
             ({} positive, {} negative available)",
            positives.len(),
            negatives.len()
        )));
    }
    let pos_k = positives.len().min(batch.saturating_sub(1).max(1));
    let neg_k = negatives.len().min(batch.saturating_sub(pos_k).max(1));
    let mut pick = |pool: &[usize], k: usize| {
        let mut chosen: Vec<usize> = index::sample(rng, pool.len(), k)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        chosen.sort_unstable();
        chosen
    };
    let pos = pick(&positives, pos_k);
    let neg = pick(&negatives, neg_k);
    Ok((pos, neg))
}

fn dgw_features(x: &TimeSeries, params: &MixingParams) -> Result<TimeSeries> {
    if params.use_shape_dtw_for_dgw {
        shape_descriptors(x, params.descriptor_len)
    } else {
        Ok(x.clone())
    }
}

/// The positive candidate maximizing `mean d(p, negatives) - mean d(p, other
/// positives)` under shapeDTW (or plain DTW). Ties go to the smallest
/// dataset index, so the result does not depend on candidate order.
pub fn select_teacher(
    dataset: &LabeledDataset,
    positives: &[usize],
    negatives: &[usize],
    params: &MixingParams,
) -> Result<usize> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::constraint("teacher selection needs positive and negative candidates"));
    }
    let mut pos = positives.to_vec();
    pos.sort_unstable();
    pos.dedup();
    let mut neg = negatives.to_vec();
    neg.sort_unstable();
    neg.dedup();
    if pos.len() == 1 {
        return Ok(pos[0]);
    }

    let cfg = params.dtw_config();
    let feats = |ids: &[usize]| {
        ids.iter()
            .map(|&i| dgw_features(&dataset.series()[i], params))
            .collect::<Result<Vec<_>>>()
    };
    let pf = feats(&pos)?;
    let nf = feats(&neg)?;

    // pairwise positive distances, each unordered pair once
    let p = pos.len();
    let mut pp = vec![0.0; p * p];
    for a in 0..p {
        for b in a + 1..p {
            let d = dtw_distance(&pf[a], &pf[b], &cfg)?;
            pp[a * p + b] = d;
            pp[b * p + a] = d;
        }
    }
    let mut best = (f64::NEG_INFINITY, pos[0]);
    for a in 0..p {
        let pos_mean = pp[a * p..(a + 1) * p].iter().sum::<f64>() / (p - 1) as f64;
        let mut neg_mean = 0.0;
        for n in &nf {
            neg_mean += dtw_distance(&pf[a], n, &cfg)?;
        }
        neg_mean /= nf.len() as f64;
        let score = neg_mean - pos_mean;
        if score > best.0 {
            best = (score, pos[a]);
        }
    }
    Ok(best.1)
}

/// Discriminative guided warping of pattern `ref_index`: samples a candidate
/// batch, selects the most discriminative same-class teacher and warps the
/// reference onto it along a shapeDTW alignment.
pub fn dgw<R: Rng + ?Sized>(
    dataset: &LabeledDataset,
    ref_index: usize,
    params: &MixingParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let (pos, neg) = sample_dgw_batch(dataset, ref_index, params.dgw_batch, rng)?;
    let teacher = select_teacher(dataset, &pos, &neg, params)?;
    guided_by(&dataset.series()[ref_index], &dataset.series()[teacher], params)
}

/// Warps `reference` onto `teacher` with the DGW alignment (shapeDTW unless disabled).
pub fn guided_by(
    reference: &TimeSeries,
    teacher: &TimeSeries,
    params: &MixingParams,
) -> Result<TimeSeries> {
    same_dims(reference, teacher)?;
    let cfg = params.dtw_config();
    let alignment = dtw(&dgw_features(teacher, params)?, &dgw_features(reference, params)?, &cfg)?;
    let warped = guided_warp(reference, teacher.len(), &alignment.path);
    Ok(resample_linear(&warped, reference.len()))
}
