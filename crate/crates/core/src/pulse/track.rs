//! Following one vessel through a pre-aligned frame sequence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiameterSeries;
use crate::caliper::{estimate_path, CaliperParams};
use crate::error::{Error, Result};
use crate::segment::{green_channel, segment_vessels, RgbImage, SegmentationParams};
use crate::skeleton::{extract_centerlines, select_nearest, CenterlinePath, SkeletonParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackParams {
    pub segmentation: SegmentationParams,
    pub skeleton: SkeletonParams,
    pub caliper: CaliperParams,
    /// Search radius around the previous frame's path midpoint.
    pub carry_radius: f64,
    pub fps: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            segmentation: SegmentationParams::default(),
            skeleton: SkeletonParams::default(),
            caliper: CaliperParams::default(),
            carry_radius: 20.0,
            fps: 30.0,
        }
    }
}

struct FrameAnalysis {
    green: crate::raster::GrayImage,
    paths: Vec<CenterlinePath>,
    max_diameter: f64,
}

fn analyze_frame(frame: &RgbImage, params: &TrackParams) -> Result<FrameAnalysis> {
    let seg = segment_vessels(frame, &params.segmentation)?;
    let paths = extract_centerlines(&seg.vessel_mask, &params.skeleton).paths;
    Ok(FrameAnalysis {
        green: green_channel(frame),
        paths,
        max_diameter: seg.max_diameter,
    })
}

/// Mean diameter per frame of the vessel nearest to `click` in frame 0.
pub fn track(frames: &[RgbImage], click: (f64, f64), params: &TrackParams) -> Result<DiameterSeries> {
    Ok(track_many(frames, &[click], params)?.remove(0))
}

/// Tracks several vessels at once; frames are analyzed in parallel and
/// each vessel is then followed in frame order.
pub fn track_many(frames: &[RgbImage], clicks: &[(f64, f64)], params: &TrackParams) -> Result<Vec<DiameterSeries>> {
    if frames.len() < 2 {
        return Err(Error::TooShort { len: frames.len(), min: 2 });
    }
    if !(params.fps > 0.0) {
        return Err(Error::invalid("fps", "must be positive"));
    }
    let analyses: Vec<FrameAnalysis> = frames
        .par_iter()
        .map(|f| analyze_frame(f, params))
        .collect::<Result<_>>()?;
    clicks
        .iter()
        .map(|&click| {
            let mut values = Vec::with_capacity(frames.len());
            let mut anchor = click;
            for (k, a) in analyses.iter().enumerate() {
                let radius = if k == 0 { params.caliper.click_radius } else { params.carry_radius };
                let idx = match select_nearest(&a.paths, anchor) {
                    Ok((i, d)) if d <= radius => i,
                    _ if k == 0 => return Err(Error::NoVessel { near: Some(click) }),
                    _ => return Err(Error::TrackingLost { frame: k }),
                };
                let path = &a.paths[idx];
                let (_, _, _, d) = estimate_path(&a.green, path, a.max_diameter, &params.caliper)?;
                values.push(d.mean());
                let m = path.midpoint();
                anchor = (m.0 as f64, m.1 as f64);
            }
            Ok(DiameterSeries::new(values, params.fps))
        })
        .collect()
}
