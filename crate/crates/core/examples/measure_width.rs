//! Measures a vessel with a bright central reflex and compares the
//! per-point widths with the generator's exact values.

use fundus_pulse::caliper::{estimate_vessel, CaliperParams};
use fundus_pulse::metrics::{match_widths, width_error, MeanErrorForm};
use fundus_pulse::segment::{segment_vessels, SegmentationParams};
use fundus_pulse::skeleton::{extract_centerlines, SkeletonParams};
use fundus_pulse::synthgen::{render, truth_records, CentralReflex, Curve, SceneSpec, VesselSpec, WidthProfile};

fn main() -> fundus_pulse::Result<()> {
    let mut v = VesselSpec::new(
        Curve::Quadratic { start: (30.0, 90.0), control: (128.0, 200.0), end: (226.0, 100.0) },
        9.0,
        60.0,
    );
    v.width = WidthProfile::Sinusoidal { base: 9.0, amplitude: 1.5, period: 120.0 };
    v.clr = Some(CentralReflex { width: 2.0, boost: 20.0 });
    let scene = SceneSpec { vessels: vec![v], noise_sigma: 4.0, seed: 3, ..SceneSpec::default() };
    let frame = render(&scene)?;

    let seg = segment_vessels(&frame.image, &SegmentationParams::default())?;
    let paths = extract_centerlines(&seg.vessel_mask, &SkeletonParams::default()).paths;
    let truth = &frame.vessels[0];
    let click = truth.points[truth.points.len() / 2];
    let est = estimate_vessel(&frame.image.g, &paths, click, seg.max_diameter, &CaliperParams::default())?;
    let holes = (0..est.clustered.mask.cols())
        .filter(|&c| !est.clustered.mask.get(est.stack.center_row(), c))
        .count();
    println!("profile stack    {} x {}", est.stack.rows(), est.stack.cols());
    println!("reflex holes     {holes} columns before repair");
    println!(
        "widths           mean {:.2}, min {}, max {}",
        est.diameters.mean(),
        est.diameters.min(),
        est.diameters.max()
    );

    let recs = truth_records("demo", &frame.vessels);
    let m = match_widths(&paths[est.path_index].points, &est.diameters.widths, &recs, 3.0);
    let st = width_error(&m.comparison, MeanErrorForm::Mean)?;
    println!("matched          {} points ({} unmatched)", m.comparison.len(), m.unmatched);
    println!("error            mu {:+.2} px, sigma {:.2} px", st.mu_error, st.sigma_error);
    Ok(())
}
