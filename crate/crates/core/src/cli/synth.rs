//! `synth`.

use std::path::PathBuf;

use super::io::{write_file, write_mask_png, write_rgb_png, RunManifest};
use super::{CliResult, SynthArgs};
use crate::config::{load_scene, scene_to_ini, RunConfig};
use crate::error::{Error, Result};
use crate::metrics::write_annotations;
use crate::synthgen::{render, render_sequence, truth_records, SyntheticFrame};

fn frame_name(i: usize) -> String {
    format!("frame_{i:04}.png")
}

fn truth_series_csv(frames: &[SyntheticFrame], fps: f64) -> Result<Vec<u8>> {
    let err = |e: csv::Error| Error::validation("series_truth.csv", e.to_string());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["frame".to_string(), "time_s".to_string()];
    header.extend(frames[0].vessels.iter().map(|v| format!("width_{}", v.id)));
    w.write_record(&header).map_err(err)?;
    for (i, f) in frames.iter().enumerate() {
        let mut rec = vec![i.to_string(), format!("{:.6}", i as f64 / fps)];
        rec.extend(f.vessels.iter().map(|v| format!("{:.6}", v.mean_width())));
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::validation("series_truth.csv", e.to_string()))
}

pub(super) fn synth(args: &SynthArgs, cfg: &RunConfig, mut inputs: Vec<PathBuf>) -> CliResult {
    let mut scene = load_scene(&args.scene)?;
    if let Some(s) = args.seed {
        scene.seed = s;
    }
    let frames = if scene.frame_count() >= 2 {
        render_sequence(&scene)?.frames
    } else {
        vec![render(&scene)?]
    };
    inputs.insert(0, args.scene.clone());
    let manifest = RunManifest::new("synth", args, cfg, &inputs)?;

    let out = &args.out;
    let mut truth = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let name = frame_name(i);
        write_rgb_png(&out.join("frames").join(&name), f.image.width(), f.image.height(), &f.image.to_interleaved())?;
        write_mask_png(&out.join("masks").join(&name), &f.mask)?;
        truth.extend(truth_records(&name, &f.vessels));
    }
    let mut buf = Vec::new();
    write_annotations(&mut buf, &truth)?;
    write_file(&out.join("truth.csv"), &buf)?;
    if frames.len() >= 2 {
        write_file(&out.join("series_truth.csv"), &truth_series_csv(&frames, scene.fps)?)?;
    }
    write_file(&out.join("scene.ini"), scene_to_ini(&scene).as_bytes())?;
    manifest.write(out)?;
    println!("{}", serde_json::json!({ "frames": frames.len(), "vessels": scene.vessels.len(), "seed": scene.seed }));
    Ok(())
}
