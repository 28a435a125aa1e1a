//! Contrast limited adaptive histogram equalization.
//!
//! The image is split into `grid`×`grid` tiles. Each tile gets a 256-bin
//! histogram whose bins are clipped at `clip_limit` times the uniform bin
//! height; the clipped mass is spread evenly over all bins in a single pass.
//! Every pixel is then mapped through the four nearest tile lookup tables and
//! blended bilinearly by its position relative to the tile centers.

use super::GrayImage;
use crate::error::{Error, Result};

const BINS: usize = 256;

/// Tile boundaries along one axis: `bounds[i]..bounds[i + 1]` is tile `i`.
fn tile_bounds(len: usize, tiles: usize) -> Vec<usize> {
    (0..=tiles).map(|i| i * len / tiles).collect()
}

/// For a coordinate, the pair of tiles to blend and the weight of the second.
fn blend_coeffs(bounds: &[usize]) -> Vec<(usize, usize, f64)> {
    let tiles = bounds.len() - 1;
    let centers: Vec<f64> = (0..tiles)
        .map(|i| (bounds[i] + bounds[i + 1] - 1) as f64 * 0.5)
        .collect();
    let len = bounds[tiles];
    (0..len)
        .map(|p| {
            let p = p as f64;
            if p <= centers[0] {
                return (0, 0, 0.0);
            }
            if p >= centers[tiles - 1] {
                return (tiles - 1, tiles - 1, 0.0);
            }
            let i = centers.partition_point(|&c| c <= p) - 1;
            let t = (p - centers[i]) / (centers[i + 1] - centers[i]);
            (i, i + 1, t)
        })
        .collect()
}

fn tile_lut(img: &GrayImage, x0: usize, x1: usize, y0: usize, y1: usize, clip_limit: f64) -> [f64; BINS] {
    let mut hist = [0.0f64; BINS];
    for y in y0..y1 {
        for x in x0..x1 {
            hist[img.get(x, y) as usize] += 1.0;
        }
    }
    let n = ((x1 - x0) * (y1 - y0)) as f64;
    let clip = clip_limit * n / BINS as f64;
    let mut excess = 0.0;
    for h in hist.iter_mut() {
        if *h > clip {
            excess += *h - clip;
            *h = clip;
        }
    }
    let bonus = excess / BINS as f64;
    let mut lut = [0.0f64; BINS];
    let mut cum = 0.0;
    for (v, h) in hist.iter().enumerate() {
        cum += h + bonus;
        lut[v] = (255.0 * cum / n).min(255.0);
    }
    lut
}

/// Applies CLAHE with a `grid`×`grid` tiling.
pub fn clahe(img: &GrayImage, grid: usize, clip_limit: f64) -> Result<GrayImage> {
    if grid == 0 || grid > img.width() || grid > img.height() {
        return Err(Error::invalid(
            "clahe grid",
            format!(
                "{grid}x{grid} tiles do not fit a {}x{} image",
                img.width(),
                img.height()
            ),
        ));
    }
    if !(clip_limit > 0.0) {
        return Err(Error::invalid("clahe clip limit", "must be positive"));
    }
    let xb = tile_bounds(img.width(), grid);
    let yb = tile_bounds(img.height(), grid);
    let mut luts = Vec::with_capacity(grid * grid);
    for ty in 0..grid {
        for tx in 0..grid {
            luts.push(tile_lut(img, xb[tx], xb[tx + 1], yb[ty], yb[ty + 1], clip_limit));
        }
    }
    let xc = blend_coeffs(&xb);
    let yc = blend_coeffs(&yb);

    let mut out = GrayImage::new(img.width(), img.height());
    for (y, &(ty0, ty1, fy)) in yc.iter().enumerate() {
        for (x, &(tx0, tx1, fx)) in xc.iter().enumerate() {
            let v = img.get(x, y) as usize;
            let top = luts[ty0 * grid + tx0][v] * (1.0 - fx) + luts[ty0 * grid + tx1][v] * fx;
            let bottom = luts[ty1 * grid + tx0][v] * (1.0 - fx) + luts[ty1 * grid + tx1][v] * fx;
            let mapped = top * (1.0 - fy) + bottom * fy;
            out.set(x, y, mapped.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}
