//! Labeled datasets in the UCR archive TSV layout, plus the preprocessing
//! applied before augmentation: train-range min-max scaling, NaN imputation
//! and zero padding.
//!
//! A TSV line is `label<TAB>v1<TAB>v2...`; `NaN` marks a missing value and
//! lines may have different lengths before padding.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result, Warning};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Test,
}

impl Split {
    pub fn suffix(self) -> &'static str {
        match self {
            Split::Train => "TRAIN",
            Split::Test => "TEST",
        }
    }
}

/// Train-set range used for min-max scaling to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormState {
    pub train_min: f64,
    pub train_max: f64,
}

impl NormState {
    pub fn is_degenerate(&self) -> bool {
        self.train_max <= self.train_min
    }

    pub fn apply(&self, v: f64) -> f64 {
        if v.is_nan() {
            return v;
        }
        if self.is_degenerate() {
            return 0.0;
        }
        2.0 * (v - self.train_min) / (self.train_max - self.train_min) - 1.0
    }

    pub fn invert(&self, v: f64) -> f64 {
        if self.is_degenerate() {
            return self.train_min;
        }
        (v + 1.0) * (self.train_max - self.train_min) / 2.0 + self.train_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub split: Split,
    series: Vec<TimeSeries>,
    labels: Vec<usize>,
    /// Original label text for each class index, ordered by numeric value.
    classes: Vec<String>,
    pub norm_state: Option<NormState>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        split: Split,
        series: Vec<TimeSeries>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::argument("dataset has no series"));
        }
        if series.len() != labels.len() {
            return Err(Error::argument(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::argument(format!(
                "label index {l} but only {} classes",
                classes.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            split,
            series,
            labels,
            classes,
            norm_state: None,
        })
    }

    /// Dataset whose class names are the label indices themselves.
    pub fn from_indexed(
        name: impl Into<String>,
        series: Vec<TimeSeries>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let classes = (0..n_classes).map(|c| c.to_string()).collect();
        Self::new(name, Split::Train, series, labels, classes)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Indices of the patterns in class `class`, ascending.
    pub fn class_members(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_classes()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Common length of all series, if they share one.
    pub fn uniform_length(&self) -> Option<usize> {
        let t = self.series[0].len();
        self.series.iter().all(|s| s.len() == t).then_some(t)
    }

    pub fn max_length(&self) -> usize {
        self.series.iter().map(TimeSeries::len).max().unwrap_or(0)
    }

    /// Same metadata with new patterns and labels (e.g. generated ones).
    pub fn with_series(&self, series: Vec<TimeSeries>, labels: Vec<usize>) -> Result<Self> {
        let mut ds = Self::new(self.name.clone(), self.split, series, labels, self.classes.clone())?;
        ds.norm_state = self.norm_state;
        Ok(ds)
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut ds = self.clone();
        ds.series = self.series.iter().map(|s| s.map(&f)).collect();
        ds
    }
}

/// Splits `Coffee_TRAIN.tsv` into (`Coffee`, Train).
pub fn name_and_split(path: &Path) -> (String, Split) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for split in [Split::Train, Split::Test] {
        if let Some(name) = stem.strip_suffix(&format!("_{}", split.suffix())) {
            return (name.to_string(), split);
        }
    }
    (stem, Split::Train)
}

pub fn load_tsv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let (name, split) = name_and_split(path);
    let file = fs::File::open(path)?;
    parse_tsv(BufReader::new(file), name, split)
}

/// Parses UCR-format TSV text. Labels are remapped to `0..C` in ascending
/// numeric order of the original labels.
pub fn parse_tsv<R: Read>(reader: R, name: impl Into<String>, split: Split) -> Result<LabeledDataset> {
    let mut raw_labels: Vec<(f64, String)> = Vec::new();
    let mut series = Vec::new();
    for (ln, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let lineno = ln + 1;
        let mut fields = line.split('\t');
        let label_tok = fields.next().unwrap_or_default().trim();
        let label: f64 = label_tok.parse().map_err(|_| Error::Parse {
            line: lineno,
            column: 1,
            message: format!("invalid label {label_tok:?}"),
        })?;
        if !label.is_finite() {
            return Err(Error::Parse {
                line: lineno,
                column: 1,
                message: format!("label must be a finite number, got {label_tok:?}"),
            });
        }
        let mut values = Vec::new();
        for (k, tok) in fields.enumerate() {
            let tok = tok.trim();
            let v = if tok.eq_ignore_ascii_case("nan") {
                f64::NAN
            } else {
                match tok.parse::<f64>() {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        return Err(Error::Parse {
                            line: lineno,
                            column: k + 2,
                            message: format!("invalid value {tok:?}"),
                        })
                    }
                }
            };
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                column: 2,
                message: "line has a label but no values".into(),
            });
        }
        series.push(TimeSeries::with_missing(values, 1)?);
        raw_labels.push((label, label_tok.to_string()));
    }
    if series.is_empty() {
        return Err(Error::Format("file contains no series".into()));
    }

    let mut distinct: Vec<(f64, String)> = Vec::new();
    for (v, text) in &raw_labels {
        if !distinct.iter().any(|(d, _)| d == v) {
            distinct.push((*v, text.clone()));
        }
    }
    distinct.sort_by(|a, b| a.0.total_cmp(&b.0));
    let labels = raw_labels
        .iter()
        .map(|(v, _)| distinct.iter().position(|(d, _)| d == v).unwrap())
        .collect();
    let classes = distinct.into_iter().map(|(_, t)| t).collect();
    LabeledDataset::new(name, split, series, labels, classes)
}

/// Canonical value text: 6 significant digits in `%g` style.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp) as usize;
    trim_fraction(&format!("{v:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_tsv<W: Write>(ds: &LabeledDataset, mut out: W) -> Result<()> {
    let mut line = String::new();
    for (s, &l) in ds.series().iter().zip(ds.labels()) {
        if s.dims() != 1 {
            return Err(Error::dimension("TSV output holds univariate series only"));
        }
        line.clear();
        line.push_str(&ds.classes()[l]);
        for &v in s.values() {
            line.push('\t');
            let _ = write!(line, "{}", format_value(v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_tsv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_tsv(ds, std::io::BufWriter::new(file))
}

/// Global min and max over the non-missing values of `ds`.
pub fn fit_minmax(ds: &LabeledDataset) -> NormState {
    let (lo, hi) = ds
        .series()
        .iter()
        .flat_map(|s| s.values().iter().copied())
        .filter(|v| !v.is_nan())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        // every value missing
        return NormState {
            train_min: 0.0,
            train_max: 0.0,
        };
    }
    NormState {
        train_min: lo,
        train_max: hi,
    }
}

/// Applies `state` to every value of `ds` and records it.
pub fn apply_minmax(ds: &LabeledDataset, state: NormState) -> LabeledDataset {
    let mut out = ds.map_values(|v| state.apply(v));
    out.norm_state = Some(state);
    out
}

/// Inverse of [`apply_minmax`] using the recorded state.
pub fn invert_minmax(ds: &LabeledDataset) -> Result<LabeledDataset> {
    let state = ds
        .norm_state
        .ok_or_else(|| Error::argument("dataset carries no normalization state"))?;
    let mut out = ds.map_values(|v| state.invert(v));
    out.norm_state = None;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub warning: Option<Warning>,
}

/// Maps both splits with `v -> 2 (v - min) / (max - min) - 1` where min and
/// max come from the training split only.
pub fn normalize_minmax(train: &LabeledDataset, test: &LabeledDataset) -> Normalized {
    let state = fit_minmax(train);
    let warning = state.is_degenerate().then(|| {
        let w = Warning::DegenerateRange {
            value: state.train_min,
        };
        log::warn!("{}: {w}", train.name);
        w
    });
    Normalized {
        train: apply_minmax(train, state),
        test: apply_minmax(test, state),
        warning,
    }
}

/// Replaces missing values with 0 and right-pads every series with 0 to `len`.
pub fn pad_and_impute_to(ds: &LabeledDataset, len: usize) -> LabeledDataset {
    let mut out = ds.clone();
    out.series = ds
        .series()
        .iter()
        .map(|s| {
            let d = s.dims();
            let mut v: Vec<f64> = s
                .values()
                .iter()
                .map(|&x| if x.is_nan() { 0.0 } else { x })
                .collect();
            v.resize(len.max(s.len()) * d, 0.0);
            TimeSeries::from_parts(v, d)
        })
        .collect();
    out
}

/// [`pad_and_impute_to`] with the longest series of `ds`.
pub fn pad_and_impute(ds: &LabeledDataset) -> LabeledDataset {
    pad_and_impute_to(ds, ds.max_length())
}

/// Pads both splits to the longest series across the pair.
pub fn pad_and_impute_pair(
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> (LabeledDataset, LabeledDataset) {
    let len = train.max_length().max(test.max_length());
    (pad_and_impute_to(train, len), pad_and_impute_to(test, len))
}

/// Normalization followed by padding, so padded zeros are not rescaled.
pub fn preprocess(train: &LabeledDataset, test: &LabeledDataset) -> Normalized {
    let n = normalize_minmax(train, test);
    let (train, test) = pad_and_impute_pair(&n.train, &n.test);
    Normalized {
        train,
        test,
        warning: n.warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        parse_tsv(text.as_bytes(), "t", Split::Train)
    }

    #[test]
    fn parses_line() {
        let ds = parse("2\t0.1\t0.2\t0.3\n").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.series()[0].values(), &[0.1, 0.2, 0.3]);
        assert_eq!(ds.classes(), &["2".to_string()]);
        assert_eq!(ds.labels(), &[0]);
    }

    #[test]
    fn remaps_labels_in_sorted_order() {
        let ds = parse("1\t0\n-1\t1\n1\t2\n").unwrap();
        assert_eq!(ds.labels(), &[1, 0, 1]);
        assert_eq!(ds.classes(), &["-1".to_string(), "1".to_string()]);
        let ds = parse("10\t0\n2\t1\n").unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }

    #[test]
    fn keeps_nan_placeholder() {
        let ds = parse("0\t1\tNaN\t3\n0\t1\n").unwrap();
        assert!(ds.series()[0].values()[1].is_nan());
        assert_eq!(ds.series()[1].len(), 1);
    }

    #[test]
    fn parse_errors_name_position() {
        match parse("0\t1\t2\n1\t3\tabc\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x\t1\n"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse(""), Err(Error::Format(_))));
        assert!(matches!(parse("\n\n"), Err(Error::Format(_))));
    }

    #[test]
    fn file_name_conventions() {
        assert_eq!(name_and_split(Path::new("a/Coffee_TRAIN.tsv")), ("Coffee".into(), Split::Train));
        assert_eq!(name_and_split(Path::new("Gun_Point_TEST.tsv")), ("Gun_Point".into(), Split::Test));
        assert_eq!(name_and_split(Path::new("x.tsv")), ("x".into(), Split::Train));
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.1), "0.1");
        assert_eq!(format_value(-1.0), "-1");
        assert_eq!(format_value(1.0 / 3.0), "0.333333");
        assert_eq!(format_value(123456.7), "123457");
        assert_eq!(format_value(1234567.0), "1.23457e+06");
        assert_eq!(format_value(0.000012345), "1.2345e-05");
        assert_eq!(format_value(0.0001), "0.0001");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(f64::NAN), "NaN");
    }

    #[test]
    fn minmax_contract() {
        let train = parse("0\t0\t1\n1\t2\t0.5\n").unwrap();
        let test = parse("0\t3\t1\n").unwrap();
        let n = normalize_minmax(&train, &test);
        assert!(n.warning.is_none());
        assert_eq!(n.train.series()[0].values(), &[-1.0, 0.0]);
        assert_eq!(n.train.series()[1].values(), &[1.0, -0.5]);
        assert_eq!(n.test.series()[0].values(), &[2.0, 0.0]);
        let back = invert_minmax(&n.test).unwrap();
        assert_eq!(back.series()[0].values(), &[3.0, 1.0]);
    }

    #[test]
    fn minmax_degenerate() {
        let train = parse("0\t4\t4\n").unwrap();
        let n = normalize_minmax(&train, &train);
        assert_eq!(n.warning, Some(Warning::DegenerateRange { value: 4.0 }));
        assert!(n.train.series()[0].values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn padding_and_imputation() {
        let ds = parse("0\t1\t2\t3\n1\t1\tNaN\t3\t4\t5\n").unwrap();
        let p = pad_and_impute(&ds);
        assert_eq!(p.series()[0].values(), &[1.0, 2.0, 3.0, 0.0, 0.0]);
        assert_eq!(p.series()[1].values(), &[1.0, 0.0, 3.0, 4.0, 5.0]);
        assert_eq!(pad_and_impute(&p), p);
        let (a, b) = pad_and_impute_pair(&parse("0\t1\n").unwrap(), &parse("0\t1\t2\t3\n").unwrap());
        assert_eq!((a.series()[0].len(), b.series()[0].len()), (3, 3));
    }

    #[test]
    fn preprocess_pads_after_scaling() {
        let train = parse("0\t0\t2\t4\n0\t4\n").unwrap();
        let n = preprocess(&train, &train);
        assert_eq!(n.train.series()[1].values(), &[1.0, 0.0, 0.0]);
        assert_eq!(n.train.series()[0].values(), &[-1.0, 0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn canonical_tsv_round_trips(rows in prop::collection::vec((0u8..4, prop::collection::vec(-1e4f64..1e4, 1..20)), 1..10)) {
            let mut text = String::new();
            for (label, values) in &rows {
                text.push_str(&label.to_string());
                for v in values {
                    text.push('\t');
                    text.push_str(&format_value(*v));
                }
                text.push('\n');
            }
            let ds = parse(&text).unwrap();
            let mut out = Vec::new();
            write_tsv(&ds, &mut out).unwrap();
            prop_assert_eq!(String::from_utf8(out).unwrap(), text);
        }

        #[test]
        fn minmax_inverse_recovers(values in prop::collection::vec(-1e3f64..1e3, 2..50)) {
            let ds = LabeledDataset::from_indexed("p", vec![TimeSeries::univariate(values.clone()).unwrap()], vec![0]).unwrap();
            let state = fit_minmax(&ds);
            prop_assume!(!state.is_degenerate());
            let back = invert_minmax(&apply_minmax(&ds, state)).unwrap();
            for (a, b) in back.series()[0].values().iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
