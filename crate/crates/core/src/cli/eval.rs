//! `eval`: segmentation scores over a dataset directory, or width errors
//! against an annotation CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::io::{csv_bytes, find_image, list_images, read_mask, read_rgb, write_file, RunManifest, write_json};
use super::measure::analyze;
use super::{CliResult, EvalArgs, Failure};
use crate::caliper::estimate_vessel;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    confusion, load_annotations, match_widths, seg_scores, width_error, AnnotationRecord, SegReport, SegReportRow,
    WidthReport, WidthReportRow,
};
use crate::segment::segment_vessels;

fn missing(path: PathBuf) -> Error {
    Error::Io { path, source: std::io::Error::new(std::io::ErrorKind::NotFound, "ground truth file not found") }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

struct DriveItem {
    image: PathBuf,
    manual: PathBuf,
    fov: Option<PathBuf>,
    prediction: Option<PathBuf>,
}

/// Pairs each `images/<id>_<rest>` with `1st_manual/<id>_manual1` and,
/// when present, `mask/<id>_<rest>_mask`.
fn drive_items(root: &Path, predictions: Option<&Path>) -> Result<Vec<DriveItem>> {
    let images = list_images(&root.join("images"))?;
    images
        .into_iter()
        .map(|image| {
            let s = stem(&image);
            let id = s.split('_').next().unwrap_or(&s).to_string();
            let manual_dir = root.join("1st_manual");
            let manual = find_image(&manual_dir, &format!("{id}_manual1"))
                .ok_or_else(|| missing(manual_dir.join(format!("{id}_manual1.gif"))))?;
            let fov = find_image(&root.join("mask"), &format!("{s}_mask"));
            let prediction = match predictions {
                Some(dir) => Some(find_image(dir, &s).ok_or_else(|| missing(dir.join(format!("{s}.png"))))?),
                None => None,
            };
            Ok(DriveItem { image, manual, fov, prediction })
        })
        .collect()
}

fn score_drive(item: &DriveItem, cfg: &RunConfig) -> Result<SegReportRow> {
    let truth = read_mask(&item.manual)?;
    let (pred, computed_fov) = match &item.prediction {
        Some(p) => (read_mask(p)?, None),
        None => {
            let seg = segment_vessels(&read_rgb(&item.image)?, &cfg.segmentation)?;
            (seg.vessel_mask, Some(seg.fov_mask))
        }
    };
    let fov = match (&item.fov, computed_fov) {
        (Some(p), _) => read_mask(p)?,
        (None, Some(f)) => f,
        (None, None) => crate::raster::BinaryMask::filled(truth.width(), truth.height(), true),
    };
    let s = seg_scores(&confusion(&pred, &truth, &fov)?)?;
    Ok(SegReportRow {
        image: stem(&item.image),
        accuracy: s.accuracy,
        sensitivity: s.sensitivity,
        specificity: s.specificity,
    })
}

#[derive(Serialize)]
struct WidthCsvRow {
    image: String,
    segment: String,
    matched: usize,
    unmatched: usize,
    mu_mean: f64,
    sigma_mean: f64,
    mu_error: f64,
    sigma_error: f64,
}

impl From<&WidthReportRow> for WidthCsvRow {
    fn from(r: &WidthReportRow) -> Self {
        Self {
            image: r.image.clone(),
            segment: r.segment.to_string(),
            matched: r.matched,
            unmatched: r.unmatched,
            mu_mean: r.mu_mean,
            sigma_mean: r.sigma_mean,
            mu_error: r.mu_error,
            sigma_error: r.sigma_error,
        }
    }
}

fn resolve_image(dir: &Path, name: &str) -> Result<PathBuf> {
    let direct = dir.join(name);
    if direct.is_file() {
        return Ok(direct);
    }
    find_image(dir, name).ok_or_else(|| missing(direct))
}

/// Measures every annotated segment of one image. Segments that cannot be
/// measured come back as messages instead of rows.
fn score_review(
    path: &Path,
    image: &str,
    segments: &[(usize, &[AnnotationRecord])],
    cfg: &RunConfig,
) -> Result<(Vec<WidthReportRow>, Vec<String>)> {
    let a = analyze(read_rgb(path)?, cfg)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &(segment, recs) in segments {
        let mid = &recs[recs.len() / 2];
        let measured = estimate_vessel(
            &a.image.g,
            &a.centerlines.paths,
            (mid.cx, mid.cy),
            a.stages.result.max_diameter,
            &cfg.caliper,
        )
        .and_then(|e| {
            let pts = &a.centerlines.paths[e.path_index].points;
            let m = match_widths(pts, &e.diameters.widths, recs, cfg.match_radius);
            let st = width_error(&m.comparison, cfg.mean_error_form)?;
            Ok(WidthReportRow {
                image: image.to_string(),
                segment,
                matched: m.comparison.len(),
                unmatched: m.unmatched,
                mu_mean: st.mu_mean,
                sigma_mean: st.sigma_mean,
                mu_error: st.mu_error,
                sigma_error: st.sigma_error,
            })
        });
        match measured {
            Ok(r) => rows.push(r),
            Err(e) => skipped.push(format!("{image} segment {segment}: {e}")),
        }
    }
    Ok((rows, skipped))
}

pub(super) fn eval(args: &EvalArgs, cfg: &RunConfig, mut inputs: Vec<PathBuf>) -> CliResult {
    let out = &args.out;
    match (&args.drive, &args.review) {
        (Some(root), None) => {
            let items = drive_items(root, args.predictions.as_deref())?;
            let rows = items.par_iter().map(|i| score_drive(i, cfg)).collect::<Result<Vec<_>>>()?;
            let report = SegReport::from_rows(rows)?;
            let mut table = report.rows.clone();
            table.push(SegReportRow {
                image: "average".into(),
                accuracy: report.average.accuracy,
                sensitivity: report.average.sensitivity,
                specificity: report.average.specificity,
            });
            for i in &items {
                inputs.extend([Some(&i.image), Some(&i.manual), i.fov.as_ref(), i.prediction.as_ref()].into_iter().flatten().cloned());
            }
            let manifest = RunManifest::new("eval", args, cfg, &inputs)?;
            write_file(&out.join("seg_report.csv"), &csv_bytes(&table)?)?;
            write_json(&out.join("seg_report.json"), &report)?;
            manifest.write(out)?;
            println!("{}", serde_json::json!({ "images": report.rows.len(), "average": report.average }));
            Ok(())
        }
        (None, Some(csv_path)) => {
            let ann = load_annotations(csv_path)?;
            let dir = match &args.images {
                Some(d) => d.clone(),
                None => csv_path.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            let mut by_image: BTreeMap<&str, Vec<(usize, &[AnnotationRecord])>> = BTreeMap::new();
            for ((image, segment), recs) in &ann.segments {
                by_image.entry(image.as_str()).or_default().push((*segment, recs.as_slice()));
            }
            let jobs = by_image
                .into_iter()
                .map(|(image, segs)| Ok((resolve_image(&dir, image)?, image, segs)))
                .collect::<Result<Vec<_>>>()?;
            let results = jobs
                .par_iter()
                .map(|(path, image, segs)| score_review(path, image, segs, cfg))
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            let mut skipped = Vec::new();
            for (r, s) in results {
                rows.extend(r);
                skipped.extend(s);
            }
            for s in &skipped {
                eprintln!("warning: skipped {s}");
            }
            let report = WidthReport::from_rows(rows).map_err(Failure::from)?;
            let mut table: Vec<WidthCsvRow> = report.rows.iter().map(WidthCsvRow::from).collect();
            let a = &report.average;
            table.push(WidthCsvRow {
                image: "average".into(),
                segment: String::new(),
                matched: report.rows.iter().map(|r| r.matched).sum(),
                unmatched: report.rows.iter().map(|r| r.unmatched).sum(),
                mu_mean: a.mu_mean,
                sigma_mean: a.sigma_mean,
                mu_error: a.mu_error,
                sigma_error: a.sigma_error,
            });
            inputs.insert(0, csv_path.clone());
            inputs.extend(jobs.iter().map(|j| j.0.clone()));
            let manifest = RunManifest::new("eval", args, cfg, &inputs)?;
            write_file(&out.join("width_report.csv"), &csv_bytes(&table)?)?;
            write_json(&out.join("width_report.json"), &report)?;
            manifest.write(out)?;
            println!(
                "{}",
                serde_json::json!({ "segments": report.rows.len(), "skipped": skipped, "average": report.average })
            );
            Ok(())
        }
        _ => Err(Failure::usage("give exactly one of --drive and --review")),
    }
}
