use super::GrayImage;
use crate::error::{Error, Result};

/// Bilinear interpolation at a real-valued position.
///
/// Coordinates must lie inside `[0, width-1] × [0, height-1]`.
pub fn bilinear_sample(img: &GrayImage, x: f64, y: f64) -> Result<f64> {
    let (w, h) = (img.width(), img.height());
    if !(x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64) {
        return Err(Error::OutOfRange {
            x,
            y,
            width: w,
            height: h,
        });
    }
    let x0 = (x.floor() as usize).min(w - 1);
    let y0 = (y.floor() as usize).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p = |xx, yy| img.get(xx, yy) as f64;
    let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
    let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
    Ok(top * (1.0 - fy) + bottom * fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corners() -> GrayImage {
        GrayImage::from_vec(2, 2, vec![0, 10, 20, 30]).unwrap()
    }

    #[test]
    fn exact_at_integer_coordinates() {
        let img = GrayImage::from_fn(6, 8, |x, y| (x * 13 + y * 7) as u8);
        assert_eq!(bilinear_sample(&img, 3.0, 5.0).unwrap(), img.get(3, 5) as f64);
        assert_eq!(bilinear_sample(&img, 5.0, 7.0).unwrap(), img.get(5, 7) as f64);
    }

    #[test]
    fn corner_examples() {
        assert_eq!(bilinear_sample(&corners(), 0.5, 0.5).unwrap(), 15.0);
        assert_eq!(bilinear_sample(&corners(), 0.25, 0.0).unwrap(), 2.5);
    }

    #[test]
    fn out_of_range() {
        assert!(bilinear_sample(&corners(), -0.1, 0.0).is_err());
        assert!(bilinear_sample(&corners(), 0.0, 1.01).is_err());
        assert!(bilinear_sample(&corners(), f64::NAN, 0.0).is_err());
    }

    #[test]
    fn piecewise_linear_along_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let img = GrayImage::from_fn(10, 10, |_, _| rng.random());
        for _ in 0..200 {
            let x0 = rng.random_range(0..9) as f64;
            let y = rng.random_range(0.0..9.0);
            let (a, b) = (rng.random_range(0.0..1.0f64), rng.random_range(0.0..1.0f64));
            let (t0, t1) = (a.min(b), a.max(b));
            let tm = 0.5 * (t0 + t1);
            let s = |t: f64| bilinear_sample(&img, x0 + t, y).unwrap();
            assert!((s(tm) - 0.5 * (s(t0) + s(t1))).abs() < 1e-9);
        }
    }
}
