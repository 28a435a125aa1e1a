//! Randomized invariants over small inputs.

use fundus_pulse::caliper::{lloyd_kmeans3, measure_diameters, repair_profile, VesselProfileMask, WidthMode};
use fundus_pulse::pulse::{find_extrema, heart_rate, HeartRateFormula};
use fundus_pulse::raster::{distance_transform, BinaryMask};
use proptest::prelude::*;

fn profile(rows: usize, cols: usize, bits: &[bool]) -> VesselProfileMask {
    let mut m = VesselProfileMask::new(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, bits[(r * cols + c) % bits.len()]);
        }
    }
    m
}

proptest! {
    #[test]
    fn extrema_alternate_and_increase(values in prop::collection::vec(-50.0f64..50.0, 3..80)) {
        if let Ok(ex) = find_extrema(&values) {
            for w in ex.windows(2) {
                prop_assert!(w[0].index < w[1].index);
                prop_assert!(w[0].kind != w[1].kind);
            }
        }
    }

    #[test]
    fn heart_rate_ignores_affine_rescaling(
        // centi-pixel steps, so rescaling cannot round two samples together
        values in prop::collection::vec((0i32..2000).prop_map(|v| v as f64 / 100.0), 6..60),
        scale in 0.1f64..10.0,
        offset in -100.0f64..100.0,
    ) {
        let moved: Vec<f64> = values.iter().map(|v| v * scale + offset).collect();
        let (a, b) = (find_extrema(&values), find_extrema(&moved));
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(&a, &b);
            let ra = heart_rate(&a, 30.0, HeartRateFormula::TwiceSeparation).unwrap();
            let rb = heart_rate(&b, 30.0, HeartRateFormula::TwiceSeparation).unwrap();
            prop_assert_eq!(ra.heart_rate_bpm, rb.heart_rate_bpm);
            prop_assert!((ra.heart_rate_bpm * ra.period - 60.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lloyd_objective_never_rises(values in prop::collection::vec(0.0f64..255.0, 3..200)) {
        let (_, history) = lloyd_kmeans3(&values, 50, 0.5);
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
        }
    }

    #[test]
    fn repaired_profile_is_symmetric_and_widths_bounded(
        rows in 1usize..25,
        cols in 1usize..40,
        bits in prop::collection::vec(any::<bool>(), 1..300),
        join in 0usize..30,
    ) {
        let rows = rows | 1;
        let m = profile(rows, cols, &bits);
        let rep = repair_profile(&m, join);
        prop_assert_eq!(&rep, &rep.flipped());
        for mode in [WidthMode::CenterRun, WidthMode::TotalCount] {
            let d = measure_diameters(&rep, mode);
            prop_assert_eq!(d.len(), cols);
            prop_assert!(d.widths.iter().all(|&w| (0.0..=rows as f64).contains(&w)));
        }
    }

    #[test]
    fn distance_is_zero_exactly_off_the_mask(
        w in 1usize..30,
        h in 1usize..30,
        bits in prop::collection::vec(any::<bool>(), 1..400),
    ) {
        let m = BinaryMask::from_fn(w, h, |x, y| bits[(y * w + x) % bits.len()]);
        let d = distance_transform(&m);
        for y in 0..h {
            for x in 0..w {
                if m.get(x, y) {
                    prop_assert!(d.get(x, y) >= 1.0);
                } else {
                    prop_assert_eq!(d.get(x, y), 0.0);
                }
            }
        }
    }
}
