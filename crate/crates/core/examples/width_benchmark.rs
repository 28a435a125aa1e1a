//! Runs the twenty-vessel synthetic width benchmark and prints the error
//! statistics of every vessel.

use fundus_pulse::caliper::{estimate_vessel, CaliperParams};
use fundus_pulse::metrics::{match_widths, width_error, MeanErrorForm};
use fundus_pulse::segment::{segment_vessels, SegmentationParams};
use fundus_pulse::skeleton::{extract_centerlines, SkeletonParams};
use fundus_pulse::synthgen::{render, truth_records, width_benchmark};

fn main() -> fundus_pulse::Result<()> {
    println!(" #  width  reflex  matched   mu_err  sigma_err");
    let mut within = 0;
    for (k, scene) in width_benchmark().iter().enumerate() {
        let frame = render(scene)?;
        let truth = &frame.vessels[0];
        let seg = segment_vessels(&frame.image, &SegmentationParams::default())?;
        let paths = extract_centerlines(&seg.vessel_mask, &SkeletonParams::default()).paths;
        let click = truth.points[truth.points.len() / 2];
        let reflex = if scene.vessels[0].clr.is_some() { "yes" } else { "no" };
        let stats = estimate_vessel(&frame.image.g, &paths, click, seg.max_diameter, &CaliperParams::default())
            .and_then(|e| {
                let recs = truth_records("bench", &frame.vessels);
                let m = match_widths(&paths[e.path_index].points, &e.diameters.widths, &recs, 3.0);
                Ok((m.comparison.len(), width_error(&m.comparison, MeanErrorForm::Mean)?))
            });
        match stats {
            Ok((n, st)) => {
                let ok = st.sigma_error <= 1.0 && st.mu_error.abs() <= 1.5;
                within += ok as usize;
                println!(
                    "{k:2}  {:5.2}  {reflex:>6}  {n:7}  {:+7.2}  {:9.2}{}",
                    truth.mean_width(),
                    st.mu_error,
                    st.sigma_error,
                    if ok { "" } else { "  *" }
                );
            }
            Err(e) => println!("{k:2}  {:5.2}  {reflex:>6}  {e}  *", truth.mean_width()),
        }
    }
    println!("{within}/20 within |mu| <= 1.5 px and sigma <= 1.0 px (* marks the rest)");
    Ok(())
}
