use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;
use tsaug::analysis::{self, corr_report, pca_project, property_report, DeltaAcc, PropertyReport};
use tsaug::augment::{augment_dataset, augment_one, output_file_name, Method};
use tsaug::dataset::save_tsv;
use tsaug::rng::SeedSpec;
use tsaug::{Error, Result};

use crate::inputs::{ensure_dir, load_train, out_dir, parse_methods, parse_params, train_files};
use crate::svg::{self, OverlayPanel, ScatterPoint};
use crate::{Command, Common, PlotKind};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Augment {
            method,
            multiplier,
            workers,
            common,
            input,
        } => augment(&method, multiplier, workers, &common, &input),
        Command::Plot {
            kind,
            methods,
            index,
            multiplier,
            common,
            input,
        } => match kind {
            PlotKind::Overlay => plot_overlay(&methods, index, &common, &input),
            PlotKind::Pca => plot_pca(&methods, multiplier, &common, &input),
        },
        Command::Bench {
            methods,
            multiplier,
            out,
            common,
            inputs,
        } => bench(&methods, multiplier, out, &common, &inputs),
        Command::Analyze { out, common, inputs } => analyze(out, &common, &inputs),
        Command::Correlate {
            delta_acc,
            out,
            common,
            inputs,
        } => correlate(&delta_acc, out, &common, &inputs),
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn augment(
    method: &str,
    multiplier: usize,
    workers: Option<usize>,
    common: &Common,
    input: &Path,
) -> Result<()> {
    let method: Method = method.parse()?;
    let params = parse_params(&common.overrides)?;
    if multiplier == 0 {
        return Err(Error::Argument("multiplier must be positive".into()));
    }
    let ds = load_train(input, common.raw)?;
    let start = Instant::now();
    let out = augment_dataset(&ds, method, &params, multiplier, common.seed, workers)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dir = out_dir(&common.out_dir, Some(input));
    ensure_dir(&dir)?;
    let path = dir.join(output_file_name(&ds.name, method, multiplier));
    save_tsv(&out.dataset, &path)?;
    println!(
        "generated {} patterns with {method} in {elapsed:.3} s -> {}",
        out.dataset.len(),
        path.display()
    );
    if !out.warnings.is_empty() {
        println!("{} pattern(s) copied unchanged (no partner in class)", out.warnings.len());
    }
    Ok(())
}

fn plot_overlay(methods: &[String], index: usize, common: &Common, input: &Path) -> Result<()> {
    let methods = parse_methods(methods)?;
    let params = parse_params(&common.overrides)?;
    let ds = load_train(input, common.raw)?;
    if index >= ds.len() {
        return Err(Error::Argument(format!(
            "pattern index {index} out of range ({} patterns)",
            ds.len()
        )));
    }
    let original = ds.series()[index].channel(0);
    let members = ds.class_members(ds.labels()[index]);
    let mut generated = Vec::with_capacity(methods.len());
    for &m in &methods {
        // same stream as the first replica of `augment --multiplier 1`
        let mut rng = SeedSpec::new(common.seed, index as u64).rng();
        let (series, _) = augment_one(&ds, index, m, &params, &members, &mut rng)?;
        generated.push(series.channel(0));
    }

    let dir = out_dir(&common.out_dir, Some(input));
    ensure_dir(&dir)?;
    let stem = format!("{}_overlay", ds.name);
    let mut csv = csv_writer(&dir.join(format!("{stem}.csv")))?;
    csv.write_record(["method", "series", "t", "value"]).map_err(csv_error)?;
    for (m, gen) in methods.iter().zip(&generated) {
        for (kind, values) in [("original", &original), ("generated", gen)] {
            for (t, v) in values.iter().enumerate() {
                csv.write_record([m.name(), kind, &t.to_string(), &v.to_string()])
                    .map_err(csv_error)?;
            }
        }
    }
    csv.flush()?;
    let panels: Vec<OverlayPanel> = methods
        .iter()
        .zip(&generated)
        .map(|(m, g)| OverlayPanel {
            title: m.name(),
            original: &original,
            generated: g,
        })
        .collect();
    let svg_path = dir.join(format!("{stem}.svg"));
    write_text(&svg_path, &svg::overlay(&panels))?;
    println!("wrote {}", svg_path.display());
    Ok(())
}

fn plot_pca(methods: &[String], multiplier: usize, common: &Common, input: &Path) -> Result<()> {
    let methods = parse_methods(methods)?;
    let params = parse_params(&common.overrides)?;
    let ds = load_train(input, common.raw)?;
    let dir = out_dir(&common.out_dir, Some(input));
    ensure_dir(&dir)?;
    for method in methods {
        let generated = augment_dataset(&ds, method, &params, multiplier, common.seed, None)?.dataset;
        let all: Vec<_> = ds.series().iter().chain(generated.series()).cloned().collect();
        let pca = pca_project(&all, 2)?;
        let labels: Vec<usize> = ds.labels().iter().chain(generated.labels()).copied().collect();

        let stem = format!("{}_{}_pca", ds.name, method.name());
        let mut csv = csv_writer(&dir.join(format!("{stem}.csv")))?;
        csv.write_record(["kind", "index", "label", "pc1", "pc2"]).map_err(csv_error)?;
        let mut points = Vec::with_capacity(all.len());
        for (k, coords) in pca.coords.iter().enumerate() {
            let is_generated = k >= ds.len();
            let index = if is_generated { k - ds.len() } else { k };
            let kind = if is_generated { "generated" } else { "original" };
            csv.write_record([
                kind,
                &index.to_string(),
                &ds.classes()[labels[k]],
                &coords[0].to_string(),
                &coords[1].to_string(),
            ])
            .map_err(csv_error)?;
            points.push(ScatterPoint {
                x: coords[0],
                y: coords[1],
                class: labels[k],
                generated: is_generated,
            });
        }
        csv.flush()?;
        let svg_path = dir.join(format!("{stem}.svg"));
        let title = format!("{} / {}: PCA of originals and generated patterns", ds.name, method);
        write_text(&svg_path, &svg::scatter(&title, &points))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn bench(
    methods: &[String],
    multiplier: usize,
    out: Option<PathBuf>,
    common: &Common,
    inputs: &[PathBuf],
) -> Result<()> {
    let methods = if methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        parse_methods(methods)?
    };
    let params = parse_params(&common.overrides)?;
    let files = train_files(inputs)?;
    let mut reports = Vec::with_capacity(files.len());
    for file in &files {
        let ds = load_train(file, common.raw)?;
        let report = analysis::bench(&ds, &methods, &params, multiplier, common.seed)?;
        reports.push(report);
    }
    let path = out.unwrap_or_else(|| out_dir(&common.out_dir, None).join("bench.csv"));
    let mut csv = csv_writer(&path)?;
    let mut head = vec!["method".to_string()];
    head.extend(reports.iter().map(|r| r.dataset.clone()));
    csv.write_record(&head).map_err(csv_error)?;
    for (k, m) in methods.iter().enumerate() {
        let mut row = vec![m.name().to_string()];
        row.extend(reports.iter().map(|r| format!("{:.6}", r.seconds[k].1)));
        println!("{}", row.join("\t"));
        csv.write_record(&row).map_err(csv_error)?;
    }
    csv.flush()?;
    println!("{}", analysis::machine_note());
    println!("wrote {}", path.display());
    Ok(())
}

fn load_properties(common: &Common, inputs: &[PathBuf]) -> Result<Vec<PropertyReport>> {
    let files = train_files(inputs)?;
    files
        .iter()
        .map(|file| {
            let ds = load_train(file, common.raw)?;
            let (report, warnings) = property_report(&ds)?;
            for w in warnings {
                log::warn!("{}: {w}", ds.name);
            }
            Ok(report)
        })
        .collect()
}

fn analyze(out: Option<PathBuf>, common: &Common, inputs: &[PathBuf]) -> Result<()> {
    let reports = load_properties(common, inputs)?;
    let path = out.unwrap_or_else(|| out_dir(&common.out_dir, None).join("properties.csv"));
    let mut csv = csv_writer(&path)?;
    let mut head = vec!["dataset"];
    head.extend(PropertyReport::COLUMNS);
    csv.write_record(&head).map_err(csv_error)?;
    for r in &reports {
        csv.write_record([
            r.dataset.clone(),
            r.n_train.to_string(),
            r.patterns_per_class.to_string(),
            r.length.to_string(),
            r.dataset_variance.to_string(),
            r.intra_class_variance.to_string(),
        ])
        .map_err(csv_error)?;
    }
    csv.flush()?;
    println!("wrote {} dataset report(s) to {}", reports.len(), path.display());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct DeltaRow {
    dataset: String,
    method: String,
    delta_acc: f64,
}

fn read_delta_acc(path: &Path) -> Result<Vec<DeltaAcc>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["dataset", "method", "delta_acc"] {
        return Err(Error::Format(format!(
            "{}: expected header dataset,method,delta_acc",
            path.display()
        )));
    }
    reader
        .deserialize::<DeltaRow>()
        .enumerate()
        .map(|(k, row)| {
            let row = row.map_err(|e| Error::Parse {
                line: k + 2,
                column: 0,
                message: e.to_string(),
            })?;
            Ok(DeltaAcc {
                dataset: row.dataset,
                method: row.method,
                delta_acc: row.delta_acc,
            })
        })
        .collect()
}

fn correlate(delta_acc: &Path, out: Option<PathBuf>, common: &Common, inputs: &[PathBuf]) -> Result<()> {
    let deltas = read_delta_acc(delta_acc)?;
    let reports = load_properties(common, inputs)?;
    let table = corr_report(&reports, &deltas)?;
    let path = out.unwrap_or_else(|| out_dir(&common.out_dir, None).join("correlations.csv"));
    let mut csv = csv_writer(&path)?;
    let mut head = vec!["method"];
    head.extend(PropertyReport::COLUMNS);
    csv.write_record(&head).map_err(csv_error)?;
    for (method, row) in table.methods.iter().zip(&table.rows) {
        let mut record = vec![method.clone()];
        record.extend(row.iter().map(|c| c.map_or_else(String::new, |v| v.to_string())));
        csv.write_record(&record).map_err(csv_error)?;
    }
    csv.flush()?;
    println!("wrote {} method row(s) to {}", table.methods.len(), path.display());
    Ok(())
}
