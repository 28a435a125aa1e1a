//! Neighborhood filters with edge replication at the borders.

use super::GrayImage;
use crate::error::{Error, Result};

fn check_odd(name: &'static str, size: usize, min: usize) -> Result<()> {
    if size < min || size.is_multiple_of(2) {
        return Err(Error::invalid(
            name,
            format!("size must be odd and at least {min}, got {size}"),
        ));
    }
    Ok(())
}

/// Median over a `size`×`size` window.
pub fn median_filter(img: &GrayImage, size: usize) -> Result<GrayImage> {
    check_odd("median size", size, 3)?;
    let r = (size / 2) as isize;
    let (w, h) = (img.width(), img.height());
    let mut window = Vec::with_capacity(size * size);
    let mut out = GrayImage::new(w, h);
    let mid = size * size / 2;
    for y in 0..h as isize {
        for x in 0..w as isize {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    window.push(img.get_clamped(x + dx, y + dy));
                }
            }
            let (_, m, _) = window.select_nth_unstable(mid);
            out.set(x as usize, y as usize, *m);
        }
    }
    Ok(out)
}

/// Standard deviation implied by a Gaussian kernel size.
pub fn gaussian_sigma(size: usize) -> f64 {
    0.3 * ((size as f64 - 1.0) * 0.5 - 1.0) + 0.8
}

/// Normalized 1-D Gaussian weights of length `size`.
pub fn gaussian_kernel(size: usize) -> Result<Vec<f64>> {
    check_odd("gaussian size", size, 1)?;
    let sigma = gaussian_sigma(size);
    let r = (size / 2) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Separable Gaussian blur, kernel size `size`.
pub fn gaussian_blur(img: &GrayImage, size: usize) -> Result<GrayImage> {
    let kernel = gaussian_kernel(size)?;
    let blurred = gaussian_blur_real(img, &kernel);
    let data = blurred
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_vec(img.width(), img.height(), data)
}

/// Unrounded separable convolution; returns row-major values.
pub(crate) fn gaussian_blur_real(img: &GrayImage, kernel: &[f64]) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let r = (kernel.len() / 2) as isize;
    let src = img.as_slice();

    let mut horiz = vec![0.0f64; w * h];
    let mut row = vec![0.0f64; w + 2 * r as usize];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        for (i, slot) in row.iter_mut().enumerate() {
            let x = (i as isize - r).clamp(0, w as isize - 1) as usize;
            *slot = line[x] as f64;
        }
        for x in 0..w {
            horiz[y * w + x] = kernel
                .iter()
                .zip(&row[x..x + kernel.len()])
                .map(|(k, v)| k * v)
                .sum();
        }
    }

    let mut out = vec![0.0f64; w * h];
    let mut acc = vec![0.0f64; w];
    for y in 0..h as isize {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (ki, k) in kernel.iter().enumerate() {
            let sy = (y + ki as isize - r).clamp(0, h as isize - 1) as usize;
            let line = &horiz[sy * w..(sy + 1) * w];
            for (a, v) in acc.iter_mut().zip(line) {
                *a += k * v;
            }
        }
        out[y as usize * w..(y as usize + 1) * w].copy_from_slice(&acc);
    }
    out
}
