//! Scores a segmentation against the generator's exact vessel mask inside
//! the field of view.

use fundus_pulse::metrics::{confusion, seg_scores};
use fundus_pulse::segment::{segment_vessels, SegmentationParams};
use fundus_pulse::synthgen::{render, Curve, SceneSpec, VesselSpec};

fn main() -> fundus_pulse::Result<()> {
    let scene = SceneSpec {
        width: 300,
        height: 300,
        fov_radius: Some(140.0),
        noise_sigma: 4.0,
        vessels: vec![
            VesselSpec::new(Curve::Polyline(vec![(40.0, 150.0), (260.0, 140.0)]), 11.0, 70.0),
            VesselSpec::new(Curve::Polyline(vec![(150.0, 145.0), (200.0, 50.0)]), 6.0, 90.0),
            VesselSpec::new(
                Curve::Quadratic { start: (70.0, 230.0), control: (150.0, 170.0), end: (240.0, 220.0) },
                4.0,
                100.0,
            ),
        ],
        ..SceneSpec::default()
    };
    let frame = render(&scene)?;
    let seg = segment_vessels(&frame.image, &SegmentationParams::default())?;
    let c = confusion(&seg.vessel_mask, &frame.mask, &seg.fov_mask)?;
    let s = seg_scores(&c)?;
    println!("tp {} fp {} tn {} fn {}", c.tp, c.fp, c.tn, c.fn_);
    println!(
        "accuracy {:.2}%  sensitivity {:.2}%  specificity {:.2}%",
        100.0 * s.accuracy,
        100.0 * s.sensitivity,
        100.0 * s.specificity
    );
    Ok(())
}
