//! Dataset properties, PCA coordinates, property/accuracy correlations and
//! augmentation timing.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::augment::{augment_dataset, AugmentParams, Method};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result, Warning};
use crate::series::TimeSeries;

fn uniform_rows(series: &[TimeSeries]) -> Result<usize> {
    let first = series
        .first()
        .ok_or_else(|| Error::argument("no series given"))?
        .values()
        .len();
    if series.iter().any(|s| s.values().len() != first) {
        return Err(Error::dimension("series must share one length; preprocess first"));
    }
    if series.iter().any(|s| s.has_missing()) {
        return Err(Error::argument("series contain missing values; preprocess first"));
    }
    Ok(first)
}

/// Sum over elements of the population variance across `series`.
fn summed_variance(series: &[&TimeSeries], width: usize) -> f64 {
    let n = series.len() as f64;
    let mut mean = vec![0.0; width];
    for s in series {
        for (m, v) in mean.iter_mut().zip(s.values()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut total = 0.0;
    for s in series {
        for (m, v) in mean.iter().zip(s.values()) {
            total += (v - m) * (v - m);
        }
    }
    total / n
}

/// `(1/T) * sum_t var_t`, the population variance at each time step over all
/// patterns, averaged over time (and channels).
pub fn dataset_variance(ds: &LabeledDataset) -> Result<f64> {
    if ds.len() < 2 {
        return Err(Error::argument("dataset variance needs at least 2 patterns"));
    }
    let width = uniform_rows(ds.series())?;
    let all: Vec<&TimeSeries> = ds.series().iter().collect();
    Ok(summed_variance(&all, width) / width as f64)
}

/// `(1/(N*C)) * sum_c (N_c/T) * sum_t var_{c,t}`. Classes with fewer than
/// two patterns contribute 0 and produce a warning.
pub fn intra_class_variance(ds: &LabeledDataset) -> Result<(f64, Vec<Warning>)> {
    let width = uniform_rows(ds.series())?;
    let mut warnings = Vec::new();
    let mut total = 0.0;
    for c in 0..ds.n_classes() {
        let members: Vec<&TimeSeries> = ds
            .class_members(c)
            .into_iter()
            .map(|i| &ds.series()[i])
            .collect();
        if members.len() < 2 {
            warnings.push(Warning::SmallClass {
                class: c,
                size: members.len(),
            });
            continue;
        }
        // (N_c / N) * (S_c / T), grouped so one class reproduces dataset_variance exactly
        let share = members.len() as f64 / ds.len() as f64;
        total += share * (summed_variance(&members, width) / width as f64);
    }
    Ok((total / ds.n_classes() as f64, warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub dataset: String,
    pub n_train: usize,
    pub patterns_per_class: f64,
    pub length: usize,
    pub dataset_variance: f64,
    pub intra_class_variance: f64,
}

impl PropertyReport {
    pub const COLUMNS: [&'static str; 5] = [
        "n_train",
        "patterns_per_class",
        "length",
        "dataset_variance",
        "intra_class_variance",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.n_train as f64,
            self.patterns_per_class,
            self.length as f64,
            self.dataset_variance,
            self.intra_class_variance,
        ]
    }
}

/// Property report of a preprocessed training split.
pub fn property_report(ds: &LabeledDataset) -> Result<(PropertyReport, Vec<Warning>)> {
    let length = ds
        .uniform_length()
        .ok_or_else(|| Error::dimension("series must share one length; preprocess first"))?;
    let (icv, warnings) = intra_class_variance(ds)?;
    let report = PropertyReport {
        dataset: ds.name.clone(),
        n_train: ds.len(),
        patterns_per_class: ds.len() as f64 / ds.n_classes() as f64,
        length,
        dataset_variance: dataset_variance(ds)?,
        intra_class_variance: icv,
    };
    Ok((report, warnings))
}

pub const PCA_TOLERANCE: f64 = 1e-10;
pub const PCA_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit-norm principal axes, largest eigenvalue first.
    pub components: Vec<Vec<f64>>,
    /// Population covariance eigenvalues of the components.
    pub eigenvalues: Vec<f64>,
    /// One `k`-vector per input series.
    pub coords: Vec<Vec<f64>>,
}

impl Pca {
    /// Projects further series (e.g. generated ones) with the fitted axes.
    pub fn project(&self, x: &TimeSeries) -> Result<Vec<f64>> {
        if x.values().len() != self.mean.len() {
            return Err(Error::dimension("series length differs from the fitted data"));
        }
        let centered: Vec<f64> = x.values().iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok(self.components.iter().map(|c| dot(c, &centered)).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    m.chunks_exact(v.len()).map(|row| dot(row, v)).collect()
}

fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for b in basis {
        let p = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Top eigenvector of the deflated covariance `cov`, orthogonal to `found`.
fn power_iteration(cov: &[f64], n: usize, found: &[Vec<f64>]) -> Vec<f64> {
    // start from the column of largest norm, falling back to basis vectors
    let column = |j: usize| (0..n).map(|i| cov[i * n + j]).collect::<Vec<f64>>();
    let best = (0..n)
        .map(|j| (j, dot(&column(j), &column(j))))
        .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a })
        .0;
    let mut v = column(best);
    if orthonormalize(&mut v, found) == 0.0 {
        for j in 0..n {
            v = vec![0.0; n];
            v[j] = 1.0;
            if orthonormalize(&mut v, found) > 1e-6 {
                break;
            }
        }
    }
    for _ in 0..PCA_MAX_ITERATIONS {
        let mut next = mat_vec(cov, &v);
        if orthonormalize(&mut next, found) == 0.0 {
            break;
        }
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < PCA_TOLERANCE {
            break;
        }
    }
    v
}

/// Projects mean-centred series onto the top `k` covariance eigenvectors.
///
/// Eigenpairs come from deflated power iteration; each axis is signed so
/// that its largest-magnitude loading is positive, which makes coordinates
/// reproducible bit for bit.
pub fn pca_project(series: &[TimeSeries], k: usize) -> Result<Pca> {
    let n_rows = series.len();
    if n_rows < 2 {
        return Err(Error::argument("PCA needs at least 2 series"));
    }
    let width = uniform_rows(series)?;
    if k == 0 || k > n_rows.min(width) {
        return Err(Error::argument(format!(
            "cannot extract {k} components from {n_rows} series of {width} values"
        )));
    }
    let mut mean = vec![0.0; width];
    for s in series {
        mean.iter_mut().zip(s.values()).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n_rows as f64);
    let centered: Vec<Vec<f64>> = series
        .iter()
        .map(|s| s.values().iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let mut cov = vec![0.0; width * width];
    for row in &centered {
        for i in 0..width {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            for (c, rj) in cov[i * width..(i + 1) * width].iter_mut().zip(row) {
                *c += ri * rj;
            }
        }
    }
    cov.iter_mut().for_each(|c| *c /= n_rows as f64);

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v = power_iteration(&cov, width, &components);
        let lead = v
            .iter()
            .copied()
            .fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let lambda = dot(&v, &mat_vec(&cov, &v)).max(0.0);
        for i in 0..width {
            for j in 0..width {
                cov[i * width + j] -= lambda * v[i] * v[j];
            }
        }
        eigenvalues.push(lambda);
        components.push(v);
    }
    let coords = centered
        .iter()
        .map(|row| components.iter().map(|c| dot(c, row)).collect())
        .collect();
    Ok(Pca {
        mean,
        components,
        eigenvalues,
        coords,
    })
}

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson_corr(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::argument(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::argument("correlation needs at least 2 values"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::argument("correlation undefined for a constant vector"));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// One row of the externally supplied accuracy table.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAcc {
    pub dataset: String,
    pub method: String,
    pub delta_acc: f64,
}

/// Correlation of each method's accuracy change with each property column;
/// `None` where the correlation is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrReport {
    pub methods: Vec<String>,
    pub rows: Vec<[Option<f64>; 5]>,
}

/// Joins properties with accuracy deltas per method. Every method must have
/// a row for every dataset in `properties`.
pub fn corr_report(properties: &[PropertyReport], delta_acc: &[DeltaAcc]) -> Result<CorrReport> {
    let mut table: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for row in delta_acc {
        table
            .entry(row.method.as_str())
            .or_default()
            .insert(row.dataset.as_str(), row.delta_acc);
    }
    let methods: BTreeSet<&str> = table.keys().copied().collect();
    let mut missing = Vec::new();
    for m in &methods {
        for p in properties {
            if !table[m].contains_key(p.dataset.as_str()) {
                missing.push((p.dataset.clone(), m.to_string()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingRows(missing));
    }

    let columns: Vec<Vec<f64>> = (0..5)
        .map(|c| properties.iter().map(|p| p.values()[c]).collect())
        .collect();
    let rows = methods
        .iter()
        .map(|m| {
            let deltas: Vec<f64> = properties
                .iter()
                .map(|p| table[m][p.dataset.as_str()])
                .collect();
            let mut row = [None; 5];
            for (slot, col) in row.iter_mut().zip(&columns) {
                *slot = pearson_corr(&deltas, col).ok();
            }
            row
        })
        .collect();
    Ok(CorrReport {
        methods: methods.into_iter().map(String::from).collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub dataset: String,
    pub machine: String,
    /// Wall-clock seconds per method, in the requested order.
    pub seconds: Vec<(Method, f64)>,
}

pub fn machine_note() -> String {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{}-{}, {cores} logical cores, single-threaded run",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

/// Seconds for one single-threaded augmentation pass of `ds` with `method`.
pub fn bench_method(
    ds: &LabeledDataset,
    method: Method,
    params: &AugmentParams,
    multiplier: usize,
    seed: u64,
) -> Result<f64> {
    let start = Instant::now();
    let out = augment_dataset(ds, method, params, multiplier, seed, Some(1))?;
    let elapsed = start.elapsed().as_secs_f64();
    drop(out);
    Ok(elapsed)
}

pub fn bench(
    ds: &LabeledDataset,
    methods: &[Method],
    params: &AugmentParams,
    multiplier: usize,
    seed: u64,
) -> Result<TimingReport> {
    let seconds = methods
        .iter()
        .map(|&m| Ok((m, bench_method(ds, m, params, multiplier, seed)?)))
        .collect::<Result<_>>()?;
    Ok(TimingReport {
        dataset: ds.name.clone(),
        machine: machine_note(),
        seconds,
    })
}
