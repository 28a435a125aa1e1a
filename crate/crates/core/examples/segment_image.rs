//! Segments a fundus image and reports each pipeline stage.
//!
//! `cargo run --example segment_image [IMAGE]`; without an argument a
//! synthetic fundus with three vessels is used.

use fundus_pulse::cli::read_rgb;
use fundus_pulse::segment::{segment_vessels_staged, SegmentationParams};
use fundus_pulse::synthgen::{render, Curve, SceneSpec, VesselSpec};

fn main() -> fundus_pulse::Result<()> {
    let image = match std::env::args_os().nth(1) {
        Some(p) => read_rgb(p.as_ref())?,
        None => {
            let scene = SceneSpec {
                width: 320,
                height: 240,
                fov_radius: Some(115.0),
                noise_sigma: 3.0,
                vessels: vec![
                    VesselSpec::new(Curve::Polyline(vec![(70.0, 120.0), (250.0, 100.0)]), 10.0, 70.0),
                    VesselSpec::new(Curve::Polyline(vec![(160.0, 110.0), (200.0, 40.0)]), 6.0, 85.0),
                    VesselSpec::new(
                        Curve::Quadratic { start: (90.0, 190.0), control: (160.0, 140.0), end: (230.0, 180.0) },
                        7.0,
                        80.0,
                    ),
                ],
                ..SceneSpec::default()
            };
            render(&scene)?.image
        }
    };
    let s = segment_vessels_staged(&image, &SegmentationParams::default())?;
    let (lo, hi) = s.enhanced.min_max();
    println!("image            {}x{}", image.width(), image.height());
    println!("enhanced range   {lo}..{hi}");
    println!("thresholded      {} px", s.thresholded.count());
    println!("after cleanup    {} px", s.cleaned.count());
    println!("field of view    {} px", s.result.fov_mask.count());
    println!("vessel pixels    {} px", s.result.vessel_mask.count());
    println!("max diameter     {:.1} px", s.result.max_diameter);
    Ok(())
}
