//! Thins a vessel mask, bridges gaps, removes junctions and lists the
//! resulting centerline segments.

use fundus_pulse::segment::{segment_vessels, SegmentationParams};
use fundus_pulse::skeleton::{extract_centerlines, SkeletonParams};
use fundus_pulse::synthgen::{render, Curve, SceneSpec, VesselSpec};

fn main() -> fundus_pulse::Result<()> {
    // a trunk with one branch leaving from its middle
    let scene = SceneSpec {
        vessels: vec![
            VesselSpec::new(Curve::Polyline(vec![(30.0, 140.0), (226.0, 120.0)]), 9.0, 70.0),
            VesselSpec::new(Curve::Polyline(vec![(128.0, 130.0), (190.0, 30.0)]), 6.0, 80.0),
        ],
        noise_sigma: 3.0,
        ..SceneSpec::default()
    };
    let frame = render(&scene)?;
    let seg = segment_vessels(&frame.image, &SegmentationParams::default())?;
    let map = extract_centerlines(&seg.vessel_mask, &SkeletonParams::default());
    println!("skeleton pixels  {}", map.thinned.count());
    println!("after gap close  {}", map.closed.count());
    println!("junctions        {:?}", map.bifurcations.points);
    for p in &map.paths {
        let (a, b) = (p.points[0], p.points[p.len() - 1]);
        println!("segment {:2}: {:3} px  {:?} -> {:?}{}", p.id, p.len(), a, b, if p.is_loop { "  (loop)" } else { "" });
    }
    Ok(())
}
