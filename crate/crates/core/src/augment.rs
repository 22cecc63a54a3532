//! Dataset-level augmentation: method registry, parameter overrides and the
//! seeded, order-stable generation loop.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result, Warning};
use crate::mixing::{self, MixingParams, SpawnerNoise};
use crate::rng::SeedSpec;
use crate::series::TimeSeries;
use crate::transforms::{self, PermuteMode, TransformParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    None,
    Jittering,
    /// Rotation for multivariate series, flipping for univariate ones.
    Rotation,
    Scaling,
    MagnitudeWarping,
    Permutation,
    Slicing,
    TimeWarping,
    WindowWarping,
    Spawner,
    Wdba,
    Rgw,
    Dgw,
}

impl Method {
    /// The twelve augmentation methods, without the identity.
    pub const ALL: [Method; 12] = [
        Method::Jittering,
        Method::Rotation,
        Method::Scaling,
        Method::MagnitudeWarping,
        Method::Permutation,
        Method::Slicing,
        Method::TimeWarping,
        Method::WindowWarping,
        Method::Spawner,
        Method::Wdba,
        Method::Rgw,
        Method::Dgw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Jittering => "jittering",
            Method::Rotation => "rotation",
            Method::Scaling => "scaling",
            Method::MagnitudeWarping => "magnitude_warping",
            Method::Permutation => "permutation",
            Method::Slicing => "slicing",
            Method::TimeWarping => "time_warping",
            Method::WindowWarping => "window_warping",
            Method::Spawner => "spawner",
            Method::Wdba => "wdba",
            Method::Rgw => "rgw",
            Method::Dgw => "dgw",
        }
    }

    /// Methods that combine a pattern with others from the dataset.
    pub fn is_mixing(self) -> bool {
        matches!(self, Method::Spawner | Method::Wdba | Method::Rgw | Method::Dgw)
    }

    /// Methods whose output depends only on the dataset and the reference.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::None | Method::Wdba)
    }

    pub fn valid_names() -> String {
        Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "identity" => Some(Method::None),
            "jitter" => Some(Method::Jittering),
            "flipping" | "flip" => Some(Method::Rotation),
            "magwarp" => Some(Method::MagnitudeWarping),
            "window_slicing" => Some(Method::Slicing),
            "timewarp" => Some(Method::TimeWarping),
            "windowwarp" => Some(Method::WindowWarping),
            "wdba_asd" => Some(Method::Wdba),
            "dgw_sd" => Some(Method::Dgw),
            _ => None,
        };
        alias
            .or_else(|| {
                std::iter::once(Method::None)
                    .chain(Method::ALL)
                    .find(|m| m.name() == key)
            })
            .ok_or_else(|| {
                Error::argument(format!(
                    "unknown method '{s}'; valid methods: {}",
                    Method::valid_names()
                ))
            })
    }
}

/// Every tunable parameter of every method.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentParams {
    pub transform: TransformParams,
    pub mixing: MixingParams,
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::argument(format!("invalid value '{value}' for {key}")))
}

fn parse_flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(Error::argument(format!("invalid value '{value}' for {key}"))),
    }
}

impl AugmentParams {
    pub const KEYS: [&'static str; 21] = [
        "jitter_sigma",
        "scale_sigma",
        "magwarp_sigma",
        "magwarp_knots",
        "timewarp_sigma",
        "timewarp_knots",
        "slice_ratio",
        "permute_segments",
        "permute_mode",
        "windowwarp_ratio",
        "windowwarp_scales",
        "rotation_sigma",
        "shared_magnitude",
        "random_knot_positions",
        "spawner_sigma",
        "spawner_noise",
        "dtw_window",
        "dba_iterations",
        "dgw_batch",
        "use_shape_dtw_for_dgw",
        "descriptor_len",
    ];

    /// Applies one `key=value` override. `permute_segments` takes `lo-hi`
    /// (or a single count), `windowwarp_scales` a comma-separated list.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.transform;
        let m = &mut self.mixing;
        match key {
            "jitter_sigma" => t.jitter_sigma = parse_num(key, value)?,
            "scale_sigma" => t.scale_sigma = parse_num(key, value)?,
            "magwarp_sigma" => t.magwarp_sigma = parse_num(key, value)?,
            "magwarp_knots" => t.magwarp_knots = parse_num(key, value)?,
            "timewarp_sigma" => t.timewarp_sigma = parse_num(key, value)?,
            "timewarp_knots" => t.timewarp_knots = parse_num(key, value)?,
            "slice_ratio" => t.slice_ratio = parse_num(key, value)?,
            "permute_segments" => {
                t.permute_segments = match value.split_once('-') {
                    Some((lo, hi)) => (parse_num(key, lo)?, parse_num(key, hi)?),
                    None => {
                        let n = parse_num(key, value)?;
                        (n, n)
                    }
                }
            }
            "permute_mode" => {
                t.permute_mode = match value.trim() {
                    "equal" => PermuteMode::Equal,
                    "variable" => PermuteMode::Variable,
                    _ => return Err(Error::argument(format!("invalid value '{value}' for {key}"))),
                }
            }
            "windowwarp_ratio" => t.windowwarp_ratio = parse_num(key, value)?,
            "windowwarp_scales" => {
                t.windowwarp_scales = value
                    .split(',')
                    .map(|s| parse_num(key, s))
                    .collect::<Result<_>>()?
            }
            "rotation_sigma" => t.rotation_sigma = parse_num(key, value)?,
            "shared_magnitude" => t.shared_magnitude = parse_flag(key, value)?,
            "random_knot_positions" => t.random_knot_positions = parse_flag(key, value)?,
            "spawner_sigma" => m.spawner_sigma = parse_num(key, value)?,
            "spawner_noise" => {
                m.spawner_noise = match value.trim() {
                    "relative" => SpawnerNoise::Relative,
                    "absolute" => SpawnerNoise::Absolute,
                    "off" => SpawnerNoise::Off,
                    _ => return Err(Error::argument(format!("invalid value '{value}' for {key}"))),
                }
            }
            "dtw_window" => m.dtw_window = parse_num(key, value)?,
            "dba_iterations" => m.dba_iterations = parse_num(key, value)?,
            "dgw_batch" => m.dgw_batch = parse_num(key, value)?,
            "use_shape_dtw_for_dgw" => m.use_shape_dtw_for_dgw = parse_flag(key, value)?,
            "descriptor_len" => m.descriptor_len = parse_num(key, value)?,
            _ => {
                return Err(Error::argument(format!(
                    "unknown parameter '{key}'; valid keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` string.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::argument(format!("expected key=value, got '{pair}'")))?;
        self.set(key.trim(), value)
    }

    pub fn validate(&self) -> Result<()> {
        self.transform.validate()?;
        self.mixing.validate()
    }
}

fn partner<R: Rng + ?Sized>(members: &[usize], index: usize, rng: &mut R) -> usize {
    let k = rng.random_range(0..members.len() - 1);
    let pos = members.iter().position(|&m| m == index).unwrap();
    members[if k >= pos { k + 1 } else { k }]
}

/// Generates one pattern from pattern `index` with the given generator.
pub fn augment_one<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    index: usize,
    method: Method,
    params: &AugmentParams,
    members: &[usize],
    rng: &mut R,
) -> Result<(TimeSeries, Option<Warning>)> {
    let x = &ds.series()[index];
    let tp = &params.transform;
    let mp = &params.mixing;
    if method.is_mixing() && members.len() < 2 {
        let w = Warning::SingletonClass {
            index,
            class: ds.labels()[index],
        };
        return Ok((x.clone(), Some(w)));
    }
    let out = match method {
        Method::None => x.clone(),
        Method::Jittering => transforms::jitter(x, tp, rng),
        Method::Rotation if x.dims() == 1 => transforms::flip(x),
        Method::Rotation => transforms::rotate(x, tp, rng)?,
        Method::Scaling => transforms::scale(x, tp, rng),
        Method::MagnitudeWarping => transforms::magnitude_warp(x, tp, rng)?,
        Method::Permutation => transforms::permute(x, tp, rng)?,
        Method::Slicing => transforms::window_slice(x, tp, rng)?,
        Method::TimeWarping => transforms::time_warp(x, tp, rng)?,
        Method::WindowWarping => transforms::window_warp(x, tp, rng)?,
        Method::Spawner => {
            let other = partner(members, index, rng);
            mixing::spawner(x, &ds.series()[other], mp, rng)?.series
        }
        Method::Wdba => return mixing::wdba_asd(ds, index, mp),
        Method::Rgw => {
            let teacher = partner(members, index, rng);
            mixing::rgw(x, &ds.series()[teacher], &mp.dtw_config())?
        }
        Method::Dgw => mixing::dgw(ds, index, mp, rng)?,
    };
    Ok((out, None))
}

/// Generated patterns plus any per-pattern fallbacks that occurred.
#[derive(Debug, Clone)]
pub struct Augmented {
    pub dataset: LabeledDataset,
    pub warnings: Vec<Warning>,
}

/// Generates `multiplier` new patterns per input pattern.
///
/// Generation `g = i * multiplier + r` (pattern `i`, replica `r`) draws from
/// substream `g` of `master_seed`, and results are emitted in `(i, r)` order,
/// so the output depends only on the inputs and not on `workers`. `None`
/// uses the global rayon pool; `Some(1)` runs on the calling thread.
pub fn augment_dataset(
    ds: &LabeledDataset,
    method: Method,
    params: &AugmentParams,
    multiplier: usize,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Augmented> {
    if multiplier == 0 {
        return Err(Error::argument("multiplier must be positive"));
    }
    params.validate()?;
    let members: Vec<Vec<usize>> = (0..ds.n_classes()).map(|c| ds.class_members(c)).collect();
    let total = ds.len() * multiplier;
    // these ignore the generator, so each reference is computed once and repeated
    let stride = if method.is_deterministic() { multiplier } else { 1 };
    let generate = |k: usize| {
        let g = k * stride;
        let i = g / multiplier;
        let mut rng = SeedSpec::new(master_seed, g as u64).rng();
        augment_one(ds, i, method, params, &members[ds.labels()[i]], &mut rng)
    };
    let jobs = total / stride;
    let computed: Vec<Result<(TimeSeries, Option<Warning>)>> = match workers {
        Some(1) => (0..jobs).map(generate).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::argument(format!("cannot start {n} workers: {e}")))?
            .install(|| (0..jobs).into_par_iter().map(generate).collect()),
        None => (0..jobs).into_par_iter().map(generate).collect(),
    };
    let computed = computed.into_iter().collect::<Result<Vec<_>>>()?;

    let mut series = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    let mut warnings = Vec::new();
    for (g, (s, w)) in computed
        .into_iter()
        .flat_map(|r| std::iter::repeat_n(r, stride))
        .enumerate()
    {
        series.push(s);
        labels.push(ds.labels()[g / multiplier]);
        if let Some(w) = w {
            // one warning per source pattern is enough
            if g % multiplier == 0 {
                log::warn!("{w}");
                warnings.push(w);
            }
        }
    }
    let dataset = ds.with_series(series, labels)?;
    Ok(Augmented { dataset, warnings })
}

/// `<name>_<method>_x<multiplier>_TRAIN.tsv`
pub fn output_file_name(name: &str, method: Method, multiplier: usize) -> String {
    format!("{name}_{}_x{multiplier}_TRAIN.tsv", method.name())
}
