//! Unsupervised vessel segmentation.
//!
//! green channel → CLAHE → background subtraction → global threshold →
//! small-blob removal → field-of-view masking. The widest vessel diameter is
//! bounded by twice the largest value of the distance transform of the
//! resulting mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{
    clahe, distance_transform, erode, gaussian_blur, median_filter, remove_small_components,
    BinaryMask, Connectivity, GrayImage, StructuringElement,
};

/// Three-channel image with channels kept as separate planes (R, G, B).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub r: GrayImage,
    pub g: GrayImage,
    pub b: GrayImage,
}

impl RgbImage {
    pub fn new(r: GrayImage, g: GrayImage, b: GrayImage) -> Result<Self> {
        for c in [&g, &b] {
            if c.width() != r.width() || c.height() != r.height() {
                return Err(Error::Shape(r.width(), r.height(), c.width(), c.height()));
            }
        }
        Ok(Self { r, g, b })
    }

    pub fn from_gray(gray: GrayImage) -> Self {
        Self {
            r: gray.clone(),
            g: gray.clone(),
            b: gray,
        }
    }

    /// Builds an image from interleaved RGB bytes.
    pub fn from_interleaved(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * 3 {
            return Err(Error::invalid("rgb data", "length must be width*height*3"));
        }
        let plane = |c: usize| bytes.iter().skip(c).step_by(3).copied().collect::<Vec<u8>>();
        Ok(Self {
            r: GrayImage::from_vec(width, height, plane(0))?,
            g: GrayImage::from_vec(width, height, plane(1))?,
            b: GrayImage::from_vec(width, height, plane(2))?,
        })
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let (r, g, b) = (self.r.as_slice(), self.g.as_slice(), self.b.as_slice());
        let mut out = Vec::with_capacity(r.len() * 3);
        for i in 0..r.len() {
            out.extend_from_slice(&[r[i], g[i], b[i]]);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.g.width()
    }

    pub fn height(&self) -> usize {
        self.g.height()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    pub clahe_grid: usize,
    pub clahe_clip: f64,
    pub median_size: usize,
    pub gaussian_size: usize,
    pub global_threshold: u8,
    pub min_blob_area: usize,
    pub fov_threshold: u8,
    pub fov_erode_radius: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            clahe_grid: 9,
            clahe_clip: 3.0,
            median_size: 5,
            gaussian_size: 55,
            global_threshold: 8,
            min_blob_area: 200,
            fov_threshold: 10,
            fov_erode_radius: 5,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        let odd = |name: &'static str, v: usize, min: usize| {
            if v < min || v.is_multiple_of(2) {
                Err(Error::invalid(name, format!("must be odd and >= {min}, got {v}")))
            } else {
                Ok(())
            }
        };
        odd("median_size", self.median_size, 3)?;
        odd("gaussian_size", self.gaussian_size, 1)?;
        if self.clahe_grid == 0 {
            return Err(Error::invalid("clahe_grid", "must be positive"));
        }
        if !(self.clahe_clip > 0.0) {
            return Err(Error::invalid("clahe_clip", "must be positive"));
        }
        if self.min_blob_area == 0 {
            return Err(Error::invalid("min_blob_area", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub vessel_mask: BinaryMask,
    pub fov_mask: BinaryMask,
    /// Twice the largest distance-transform value of `vessel_mask`, in px.
    pub max_diameter: f64,
}

/// Every intermediate image of the segmentation, in pipeline order.
#[derive(Debug, Clone)]
pub struct SegmentationStages {
    pub green: GrayImage,
    pub enhanced: GrayImage,
    pub background_removed: GrayImage,
    pub thresholded: BinaryMask,
    pub cleaned: BinaryMask,
    pub result: SegmentationResult,
}

pub fn green_channel(img: &RgbImage) -> GrayImage {
    img.g.clone()
}

pub fn fov_mask(gray: &GrayImage, params: &SegmentationParams) -> BinaryMask {
    let r = params.fov_erode_radius;
    erode(&gray.threshold_above(params.fov_threshold), &StructuringElement::ellipse(r, r))
}

/// Estimates the background with a small median and a large Gaussian filter
/// and returns `background - enhanced`, truncated at zero.
pub fn subtract_background(enhanced: &GrayImage, params: &SegmentationParams) -> Result<GrayImage> {
    let background = gaussian_blur(&median_filter(enhanced, params.median_size)?, params.gaussian_size)?;
    let data = background
        .as_slice()
        .iter()
        .zip(enhanced.as_slice())
        .map(|(&b, &e)| b.saturating_sub(e))
        .collect();
    GrayImage::from_vec(enhanced.width(), enhanced.height(), data)
}

pub fn max_diameter(vessel_mask: &BinaryMask) -> f64 {
    2.0 * distance_transform(vessel_mask).max()
}

pub fn segment_vessels(img: &RgbImage, params: &SegmentationParams) -> Result<SegmentationResult> {
    segment_vessels_staged(img, params).map(|s| s.result)
}

pub fn segment_vessels_staged(img: &RgbImage, params: &SegmentationParams) -> Result<SegmentationStages> {
    params.validate()?;
    let green = green_channel(img);
    let fov = fov_mask(&green, params);
    let enhanced = clahe(&green, params.clahe_grid, params.clahe_clip)?;
    let background_removed = subtract_background(&enhanced, params)?;
    let thresholded = background_removed.threshold_above(params.global_threshold);
    let cleaned = remove_small_components(&thresholded, params.min_blob_area, Connectivity::Eight);
    let vessel_mask = cleaned.and(&fov);
    let max_diameter = max_diameter(&vessel_mask);
    Ok(SegmentationStages {
        green,
        enhanced,
        background_removed,
        thresholded,
        cleaned,
        result: SegmentationResult {
            vessel_mask,
            fov_mask: fov,
            max_diameter,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solid(w: usize, h: usize, rgb: (u8, u8, u8)) -> RgbImage {
        RgbImage::new(
            GrayImage::filled(w, h, rgb.0),
            GrayImage::filled(w, h, rgb.1),
            GrayImage::filled(w, h, rgb.2),
        )
        .unwrap()
    }

    #[test]
    fn green_channel_extraction() {
        assert_eq!(green_channel(&solid(4, 3, (0, 200, 0))), GrayImage::filled(4, 3, 200));
        assert_eq!(green_channel(&solid(4, 3, (200, 0, 0))), GrayImage::filled(4, 3, 0));
    }

    #[test]
    fn fov_of_black_and_bright_images() {
        let p = SegmentationParams::default();
        assert!(fov_mask(&GrayImage::filled(30, 30, 0), &p).is_empty());
        let full = fov_mask(&GrayImage::filled(30, 30, 200), &p);
        assert!(!full.get(0, 0) && !full.get(4, 15) && !full.get(29, 15));
        assert!(full.get(5, 15) && full.get(15, 15) && full.get(24, 24));
    }

    #[test]
    fn fov_of_disk_is_eroded_disk() {
        let p = SegmentationParams::default();
        let disk = GrayImage::from_fn(121, 121, |x, y| {
            let (dx, dy) = (x as f64 - 60.0, y as f64 - 60.0);
            if dx * dx + dy * dy <= 2500.0 { 180 } else { 0 }
        });
        let m = fov_mask(&disk, &p);
        for y in 0..121 {
            for x in 0..121 {
                let r = ((x as f64 - 60.0).powi(2) + (y as f64 - 60.0).powi(2)).sqrt();
                if r <= 44.0 {
                    assert!(m.get(x, y), "({x},{y}) r={r}");
                }
                if r > 46.0 {
                    assert!(!m.get(x, y), "({x},{y}) r={r}");
                }
            }
        }
    }

    #[test]
    fn background_subtraction_polarity() {
        let p = SegmentationParams::default();
        let flat = GrayImage::filled(80, 80, 120);
        assert!(subtract_background(&flat, &p).unwrap().as_slice().iter().all(|&v| v == 0));

        let dark = GrayImage::from_fn(120, 120, |_, y| if (58..62).contains(&y) { 60 } else { 150 });
        let out = subtract_background(&dark, &p).unwrap();
        let line: f64 = (0..120).map(|x| out.get(x, 60) as f64).sum::<f64>() / 120.0;
        let field: f64 = (0..120).map(|x| out.get(x, 10) as f64).sum::<f64>() / 120.0;
        assert!(line > 20.0 && field < 3.0, "line {line} field {field}");

        let bright = GrayImage::from_fn(120, 120, |_, y| if (58..62).contains(&y) { 220 } else { 150 });
        let out = subtract_background(&bright, &p).unwrap();
        assert!((0..120).all(|x| out.get(x, 60) == 0));
    }

    #[test]
    fn blank_fundus_has_no_vessels() {
        let r = segment_vessels(&solid(100, 90, (180, 120, 40)), &SegmentationParams::default()).unwrap();
        assert!(r.vessel_mask.is_empty());
        assert_eq!(r.max_diameter, 0.0);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let img = solid(40, 40, (0, 100, 0));
        let p = SegmentationParams {
            median_size: 4,
            ..Default::default()
        };
        assert!(segment_vessels(&img, &p).is_err());
        let p = SegmentationParams {
            clahe_grid: 50,
            ..Default::default()
        };
        assert!(segment_vessels(&img, &p).is_err());
    }
}
