use std::path::{Path, PathBuf};

use tsaug::augment::{AugmentParams, Method};
use tsaug::dataset::{load_tsv, preprocess, LabeledDataset};
use tsaug::{Error, Result};
use walkdir::WalkDir;

pub fn parse_params(overrides: &[String]) -> Result<AugmentParams> {
    let mut params = AugmentParams::default();
    for pair in overrides {
        params.set_pair(pair)?;
    }
    params.validate()?;
    Ok(params)
}

pub fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    names.iter().map(|n| n.parse()).collect()
}

fn test_sibling(train: &Path) -> Option<PathBuf> {
    let name = train.file_name()?.to_str()?;
    let test = name.strip_suffix("_TRAIN.tsv")?;
    let path = train.with_file_name(format!("{test}_TEST.tsv"));
    path.is_file().then_some(path)
}

/// Loads a TRAIN file. Unless `raw`, values are min-max scaled to the
/// training range and padded to the longest series of the TRAIN/TEST pair.
pub fn load_train(path: &Path, raw: bool) -> Result<LabeledDataset> {
    let train = load_tsv(path)?;
    if raw {
        return Ok(train);
    }
    let test = match test_sibling(path) {
        Some(p) => load_tsv(p)?,
        None => train.clone(),
    };
    let out = preprocess(&train, &test);
    if let Some(w) = out.warning {
        log::warn!("{}: {w}", path.display());
    }
    Ok(out.train)
}

/// Whether `file_name` looks like `<name>_<method>_x<multiplier>_TRAIN.tsv`.
fn is_augmented(file_name: &str) -> bool {
    let Some(stem) = file_name.strip_suffix("_TRAIN.tsv") else {
        return false;
    };
    let Some((head, mult)) = stem.rsplit_once("_x") else {
        return false;
    };
    if mult.is_empty() || !mult.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    std::iter::once(Method::None)
        .chain(Method::ALL)
        .any(|m| head.ends_with(&format!("_{}", m.name())))
}

/// Expands directories into the `*_TRAIN.tsv` files below them, sorted,
/// skipping augmented outputs.
pub fn train_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = WalkDir::new(input)
                .sort_by_file_name()
                .into_iter()
                .filter_map(|e| e.ok())
                .map(|e| e.into_path())
                .filter(|p| {
                    p.is_file()
                        && p.file_name()
                            .and_then(|n| n.to_str())
                            .is_some_and(|n| n.ends_with("_TRAIN.tsv") && !is_augmented(n))
                })
                .collect();
            if found.is_empty() {
                return Err(Error::Format(format!(
                    "no *_TRAIN.tsv files under {}",
                    input.display()
                )));
            }
            files.append(&mut found);
        } else {
            files.push(input.clone());
        }
    }
    Ok(files)
}

pub fn out_dir(configured: &Option<PathBuf>, input: Option<&Path>) -> PathBuf {
    match (configured, input) {
        (Some(dir), _) => dir.clone(),
        (None, Some(path)) => path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
        (None, None) => PathBuf::from("."),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
