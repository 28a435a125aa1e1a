//! Smoothing, extremum detection and the two period conventions on a noisy
//! sampled sinusoid.

use fundus_pulse::pulse::{
    find_extrema, heart_rate, smooth, trim_edge_extrema, DiameterSeries, HeartRateFormula, PulseReport,
    SmoothingParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> fundus_pulse::Result<()> {
    let (fps, f) = (30.0, 1.25);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 0.3).expect("valid sigma");
    let values: Vec<f64> = (0..150)
        .map(|i| 12.0 + (std::f64::consts::TAU * f * i as f64 / fps).sin() + noise.sample(&mut rng))
        .collect();
    let raw = DiameterSeries::new(values, fps);
    println!("raw extrema      {}", find_extrema(&raw.values)?.len());

    let sm = smooth(&raw, &SmoothingParams::default())?;
    let ex = trim_edge_extrema(&sm.values, &find_extrema(&sm.values)?);
    println!("smoothed extrema {:?}", ex.iter().map(|e| e.index).collect::<Vec<_>>());
    for formula in [HeartRateFormula::TwiceSeparation, HeartRateFormula::Separation] {
        let r = heart_rate(&ex, fps, formula)?;
        println!("{formula:<13} {:.1} bpm (signal is {:.0} bpm)", r.heart_rate_bpm, 60.0 * f);
    }

    // the two conventions disagree by a factor of two
    let r = PulseReport::from_separation(0.687, HeartRateFormula::TwiceSeparation, Vec::new());
    println!("separation 0.687 s: {:.2} bpm or {:.2} bpm", r.bpm_twice_separation, r.bpm_separation);
    Ok(())
}
