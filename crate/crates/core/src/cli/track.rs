//! `track`.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::draw::{palette, Canvas};
use super::io::{list_frames, read_rgb, write_file, write_json, write_rgb_png, RunManifest};
use super::{CliResult, TrackArgs};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::pulse::{analyze, pearson, track_many, DiameterSeries, ExtremumKind, PulseReport};

#[derive(Serialize)]
struct VesselResult {
    at: [f64; 2],
    mean_width: f64,
    /// `None` when the smoothed series has fewer than two extrema.
    report: Option<PulseReport>,
    note: Option<String>,
}

#[derive(Serialize)]
struct TrackReport {
    frames: usize,
    fps: f64,
    vessels: Vec<VesselResult>,
    /// Correlation of the first two smoothed series, when there are two or more.
    smoothed_correlation: Option<f64>,
}

fn series_csv(raw: &[DiameterSeries], smooth: &[Option<DiameterSeries>]) -> Result<Vec<u8>> {
    let err = |e: csv::Error| Error::validation("series.csv", e.to_string());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["frame".to_string(), "time_s".to_string()];
    for k in 1..=raw.len() {
        header.push(format!("raw_{k}"));
        header.push(format!("smoothed_{k}"));
    }
    w.write_record(&header).map_err(err)?;
    for i in 0..raw[0].len() {
        let mut rec = vec![i.to_string(), format!("{:.6}", i as f64 / raw[0].fps)];
        for (r, s) in raw.iter().zip(smooth) {
            rec.push(format!("{:.6}", r.values[i]));
            rec.push(s.as_ref().map(|s| format!("{:.6}", s.values[i])).unwrap_or_default());
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::validation("series.csv", e.to_string()))
}

/// Raw series as thin lines, smoothed series as thick lines, extrema as
/// squares (filled for maxima, hollow for minima).
fn plot(raw: &[DiameterSeries], smooth: &[Option<DiameterSeries>], reports: &[Option<PulseReport>]) -> Canvas {
    let (w, h, m) = (900usize, 420usize, 40.0);
    let mut c = Canvas::new(w, h, [255, 255, 255]);
    let all = raw.iter().flat_map(|s| s.values.iter()).chain(smooth.iter().flatten().flat_map(|s| s.values.iter()));
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let n = raw[0].len().max(2);
    let px = |i: usize| m + (w as f64 - 2.0 * m) * i as f64 / (n - 1) as f64;
    let py = |v: f64| h as f64 - m - (h as f64 - 2.0 * m) * (v - lo) / span;
    let axis = [90, 90, 90];
    c.line((m, m), (m, h as f64 - m), axis, 1);
    c.line((m, h as f64 - m), (w as f64 - m, h as f64 - m), axis, 1);
    for (k, r) in raw.iter().enumerate() {
        let col = palette(k + 1);
        let faint = col.map(|v| (v as u16 + 2 * 255).div_ceil(3) as u8);
        for i in 1..r.len() {
            c.line((px(i - 1), py(r.values[i - 1])), (px(i), py(r.values[i])), faint, 1);
        }
        if let Some(s) = &smooth[k] {
            for i in 1..s.len() {
                c.line((px(i - 1), py(s.values[i - 1])), (px(i), py(s.values[i])), col, 3);
            }
            for e in reports[k].iter().flat_map(|r| r.extrema.iter()) {
                let (x, y) = (px(e.index) as i64, py(s.values[e.index]) as i64);
                c.fill_rect(x - 4, y - 4, 9, 9, [0, 0, 0]);
                if e.kind == ExtremumKind::Min {
                    c.fill_rect(x - 2, y - 2, 5, 5, [255, 255, 255]);
                }
            }
        }
    }
    c
}

pub(super) fn track(args: &TrackArgs, cfg: &RunConfig, mut inputs: Vec<PathBuf>) -> CliResult {
    let mut cfg = cfg.clone();
    if let Some(f) = args.fps {
        cfg.fps = f;
        cfg.validate()?;
    }
    let files = list_frames(&args.frames)?;
    if files.len() < 2 {
        return Err(Error::TooShort { len: files.len(), min: 2 }.into());
    }
    let frames = files.par_iter().map(|p| read_rgb(p)).collect::<Result<Vec<_>>>()?;
    let clicks: Vec<(f64, f64)> = args.at.iter().map(|p| (p.x, p.y)).collect();
    let raw = track_many(&frames, &clicks, &cfg.track_params())?;

    let mut smooth = Vec::new();
    let mut reports = Vec::new();
    let mut vessels = Vec::new();
    for (s, p) in raw.iter().zip(&args.at) {
        let (sm, rep, note) = match analyze(s, &cfg.smoothing, cfg.heart_rate_formula) {
            Ok((sm, rep)) => (Some(sm), Some(rep), None),
            Err(e @ Error::InsufficientPulsation) => {
                let sm = crate::pulse::smooth(s, &cfg.smoothing).ok();
                (sm, None, Some(e.to_string()))
            }
            Err(e) => (None, None, Some(e.to_string())),
        };
        vessels.push(VesselResult {
            at: [p.x, p.y],
            mean_width: s.values.iter().sum::<f64>() / s.len() as f64,
            report: rep.clone(),
            note,
        });
        smooth.push(sm);
        reports.push(rep);
    }
    let smoothed_correlation = match (smooth.first(), smooth.get(1)) {
        (Some(Some(a)), Some(Some(b))) => pearson(&a.values, &b.values),
        _ => None,
    };
    let report = TrackReport { frames: frames.len(), fps: cfg.fps, vessels, smoothed_correlation };

    inputs.splice(0..0, files);
    let manifest = RunManifest::new("track", args, &cfg, &inputs)?;
    let out = &args.out;
    write_file(&out.join("series.csv"), &series_csv(&raw, &smooth)?)?;
    write_json(&out.join("pulse_report.json"), &report)?;
    let pl = plot(&raw, &smooth, &reports);
    write_rgb_png(&out.join("pulse_plot.png"), pl.width, pl.height, &pl.rgb)?;
    manifest.write(out)?;
    println!("{}", serde_json::to_string(&report).expect("plain struct"));
    Ok(())
}
