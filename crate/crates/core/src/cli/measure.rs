//! `segment` and `measure`.

use std::path::PathBuf;

use serde::Serialize;

use super::draw::{palette, Canvas};
use super::io::{csv_bytes, read_rgb, write_file, write_gray_png, write_json, write_mask_png, write_rgb_png, RunManifest};
use super::{exit, CliResult, Failure, MeasureArgs, SegmentArgs};
use crate::caliper::{estimate_path, estimate_vessel};
use crate::config::RunConfig;
use crate::segment::{segment_vessels_staged, RgbImage, SegmentationStages};
use crate::skeleton::{extract_centerlines, CenterlineMap, CenterlinePath};

pub(super) struct Analysis {
    pub image: RgbImage,
    pub stages: SegmentationStages,
    pub centerlines: CenterlineMap,
}

pub(super) fn analyze(image: RgbImage, cfg: &RunConfig) -> crate::Result<Analysis> {
    let stages = segment_vessels_staged(&image, &cfg.segmentation)?;
    let centerlines = extract_centerlines(&stages.result.vessel_mask, &cfg.skeleton);
    Ok(Analysis { image, stages, centerlines })
}

/// Dimmed green channel with the vessel mask tinted, each centerline path
/// drawn in its palette color and labeled with its id.
pub(super) fn overlay(a: &Analysis) -> Canvas {
    let mut c = Canvas::from_gray(&a.image.g, 0.6);
    for (x, y) in a.stages.result.vessel_mask.points() {
        c.blend(x, y, [40, 90, 255], 0.35);
    }
    for p in &a.centerlines.paths {
        for &(x, y) in &p.points {
            c.set(x as i64, y as i64, palette(p.id));
        }
    }
    let scale = if a.image.width() >= 400 { 2 } else { 1 };
    for p in &a.centerlines.paths {
        let (mx, my) = p.midpoint();
        c.number(p.id, mx as i64 + 3 * scale, my as i64 - 6 * scale, scale, palette(p.id));
    }
    c
}

#[derive(Serialize)]
struct SegmentRow {
    id: usize,
    points: usize,
    is_loop: bool,
    mid_x: usize,
    mid_y: usize,
}

pub(super) fn segment(args: &SegmentArgs, cfg: &RunConfig, mut inputs: Vec<PathBuf>) -> CliResult {
    let a = analyze(read_rgb(&args.input)?, cfg)?;
    inputs.insert(0, args.input.clone());
    let manifest = RunManifest::new("segment", args, cfg, &inputs)?;

    let rows: Vec<SegmentRow> = a
        .centerlines
        .paths
        .iter()
        .map(|p| {
            let (mid_x, mid_y) = p.midpoint();
            SegmentRow { id: p.id, points: p.len(), is_loop: p.is_loop, mid_x, mid_y }
        })
        .collect();
    let ov = overlay(&a);
    let out = &args.out;
    let r = &a.stages.result;
    write_mask_png(&out.join("vessel_mask.png"), &r.vessel_mask)?;
    write_mask_png(&out.join("fov_mask.png"), &r.fov_mask)?;
    write_rgb_png(&out.join("centerline_overlay.png"), ov.width, ov.height, &ov.rgb)?;
    write_file(&out.join("segments.csv"), &csv_bytes(&rows)?)?;
    if args.debug {
        let s = &a.stages;
        let dir = out.join("stages");
        write_gray_png(&dir.join("a_green.png"), &s.green)?;
        write_gray_png(&dir.join("b_enhanced.png"), &s.enhanced)?;
        write_gray_png(&dir.join("c_background_removed.png"), &s.background_removed)?;
        write_mask_png(&dir.join("d_thresholded.png"), &s.thresholded)?;
        write_mask_png(&dir.join("e_cleaned.png"), &s.cleaned)?;
        write_mask_png(&dir.join("f_vessels.png"), &r.vessel_mask)?;
    }
    manifest.write(out)?;
    println!(
        "{}",
        serde_json::json!({
            "segments": rows.len(),
            "vessel_pixels": r.vessel_mask.count(),
            "max_diameter": r.max_diameter,
        })
    );
    Ok(())
}

#[derive(Serialize)]
struct WidthRow {
    point: usize,
    cx: usize,
    cy: usize,
    width_px: f64,
}

#[derive(Serialize)]
struct MeasureSummary {
    segment: usize,
    points: usize,
    mean: f64,
    min: f64,
    max: f64,
}

pub(super) fn measure(args: &MeasureArgs, cfg: &RunConfig, mut inputs: Vec<PathBuf>) -> CliResult {
    let a = analyze(read_rgb(&args.input)?, cfg)?;
    let paths = &a.centerlines.paths;
    let maxd = a.stages.result.max_diameter;
    let (path, stack, repaired, diameters): (&CenterlinePath, _, _, _) = match (args.at, args.segment) {
        (Some(p), None) => {
            let e = estimate_vessel(&a.image.g, paths, (p.x, p.y), maxd, &cfg.caliper)?;
            (&paths[e.path_index], e.stack, e.repaired, e.diameters)
        }
        (None, Some(id)) => {
            let path = paths.iter().find(|p| p.id == id).ok_or_else(|| Failure {
                code: exit::DOMAIN,
                message: format!("no segment with id {id} ({} segments found)", paths.len()),
            })?;
            let (stack, _, repaired, d) = estimate_path(&a.image.g, path, maxd, &cfg.caliper)?;
            (path, stack, repaired, d)
        }
        _ => return Err(Failure::usage("give exactly one of --at and --segment")),
    };
    inputs.insert(0, args.input.clone());
    let manifest = RunManifest::new("measure", args, cfg, &inputs)?;

    let rows: Vec<WidthRow> = path
        .points
        .iter()
        .zip(&diameters.widths)
        .enumerate()
        .map(|(point, (&(cx, cy), &width_px))| WidthRow { point, cx, cy, width_px })
        .collect();
    let summary = MeasureSummary {
        segment: path.id,
        points: rows.len(),
        mean: diameters.mean(),
        min: diameters.min(),
        max: diameters.max(),
    };
    let out = &args.out;
    write_file(&out.join("widths.csv"), &csv_bytes(&rows)?)?;
    write_gray_png(&out.join("profile_stack.png"), &stack.to_gray())?;
    write_gray_png(&out.join("repaired_mask.png"), &repaired.to_gray())?;
    write_json(&out.join("summary.json"), &summary)?;
    manifest.write(out)?;
    println!("{}", serde_json::to_string(&summary).expect("plain struct"));
    Ok(())
}
