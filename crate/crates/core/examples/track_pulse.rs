//! Follows two vessels pulsating half a cycle apart through a synthetic
//! sequence and estimates the heart rate from each.

use fundus_pulse::pulse::{analyze, pearson, track_many, HeartRateFormula, SmoothingParams, TrackParams};
use fundus_pulse::synthgen::{render_sequence, Curve, Pulsation, SceneSpec, VesselSpec};

fn vessel(y0: f64, phase: f64) -> VesselSpec {
    let mut v = VesselSpec::new(Curve::Polyline(vec![(30.0, y0), (226.0, y0 + 25.0)]), 10.0, 80.0);
    v.pulsation = Some(Pulsation { amplitude: 1.5, frequency: 1.1, phase });
    v
}

fn main() -> fundus_pulse::Result<()> {
    let scene = SceneSpec {
        vessels: vec![vessel(50.0, 0.0), vessel(190.0, std::f64::consts::PI)],
        duration: 4.0,
        noise_sigma: 2.0,
        ..SceneSpec::default()
    };
    let seq = render_sequence(&scene)?;
    let frames: Vec<_> = seq.frames.iter().map(|f| f.image.clone()).collect();
    let series = track_many(&frames, &[(128.0, 62.0), (128.0, 202.0)], &TrackParams::default())?;

    let mut smoothed = Vec::new();
    for (k, s) in series.iter().enumerate() {
        let (sm, rep) = analyze(s, &SmoothingParams::default(), HeartRateFormula::TwiceSeparation)?;
        let r = pearson(&s.values, &seq.series[k].values).unwrap_or(f64::NAN);
        println!(
            "vessel {}: {} frames, {} extrema, {:.1} bpm (true {:.1}), r vs truth {:.3}",
            k + 1,
            s.len(),
            rep.extrema.len(),
            rep.heart_rate_bpm,
            60.0 * 1.1,
            r
        );
        smoothed.push(sm);
    }
    let r = pearson(&smoothed[0].values, &smoothed[1].values).unwrap_or(f64::NAN);
    println!("smoothed series correlation {r:.3}");
    Ok(())
}
