//! Binary morphology with flat structuring elements.

use super::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeShape {
    /// Filled ellipse with integer semi-axes `a` (x) and `b` (y).
    Ellipse { a: usize, b: usize },
    /// Digital line through the center with `length` pixels at `angle_deg`
    /// (counter-clockwise, y axis pointing down).
    Line { length: usize, angle_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuringElement {
    shape: SeShape,
    offsets: Vec<(isize, isize)>,
}

impl StructuringElement {
    pub fn point() -> Self {
        Self::ellipse(0, 0)
    }

    pub fn ellipse(a: usize, b: usize) -> Self {
        let (ai, bi) = (a as isize, b as isize);
        let mut offsets = Vec::new();
        for dy in -bi..=bi {
            for dx in -ai..=ai {
                let nx = if a == 0 { 0.0 } else { dx as f64 / a as f64 };
                let ny = if b == 0 { 0.0 } else { dy as f64 / b as f64 };
                if nx * nx + ny * ny <= 1.0 + 1e-12 {
                    offsets.push((dx, dy));
                }
            }
        }
        Self {
            shape: SeShape::Ellipse { a, b },
            offsets,
        }
    }

    /// Line element rasterized by stepping the dominant axis one pixel at a
    /// time and rounding the minor coordinate (Bresenham through the center).
    pub fn line(length: usize, angle_deg: f64) -> Self {
        let length = length.max(1);
        let theta = angle_deg.to_radians();
        let (dx, dy) = (theta.cos(), -theta.sin());
        let lo = -(((length - 1) / 2) as isize);
        let hi = (length / 2) as isize;
        let mut offsets: Vec<(isize, isize)> = Vec::with_capacity(length);
        for t in lo..=hi {
            let t = t as f64;
            let p = if dx.abs() >= dy.abs() {
                ((t * dx.signum()) as isize, (t * (dy / dx.abs())).round() as isize)
            } else {
                ((t * (dx / dy.abs())).round() as isize, (t * dy.signum()) as isize)
            };
            if !offsets.contains(&p) {
                offsets.push(p);
            }
        }
        Self {
            shape: SeShape::Line { length, angle_deg },
            offsets,
        }
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    fn extent(&self) -> usize {
        self.offsets
            .iter()
            .map(|&(x, y)| x.unsigned_abs().max(y.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    Close,
}

pub fn morphology(mask: &BinaryMask, op: MorphOp, se: &StructuringElement) -> BinaryMask {
    match op {
        MorphOp::Erode => erode(mask, se),
        MorphOp::Dilate => dilate(mask, se),
        MorphOp::Close => close(mask, se),
    }
}

/// `x` is set iff `x - s` is set for some offset `s`.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let mut out = BinaryMask::new(mask.width(), mask.height());
    for (x, y) in mask.points() {
        for &(dx, dy) in se.offsets() {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx >= 0 && ny >= 0 && nx < w && ny < h {
                out.set(nx as usize, ny as usize, true);
            }
        }
    }
    out
}

/// `x` survives iff `x + s` is set for every offset `s`; outside the image
/// counts as background.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let mut out = BinaryMask::new(mask.width(), mask.height());
    for (x, y) in mask.points() {
        let keep = se
            .offsets()
            .iter()
            .all(|&(dx, dy)| mask.get_or_false(x as isize + dx, y as isize + dy));
        if keep {
            out.set(x, y, true);
        }
    }
    out
}

/// Dilation followed by erosion, evaluated on a canvas padded by the element
/// extent so that the result always contains the input.
pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let pad = se.extent();
    if pad == 0 {
        return erode(&dilate(mask, se), se);
    }
    let (w, h) = (mask.width(), mask.height());
    let mut padded = BinaryMask::new(w + 2 * pad, h + 2 * pad);
    for (x, y) in mask.points() {
        padded.set(x + pad, y + pad, true);
    }
    let closed = erode(&dilate(&padded, se), se);
    BinaryMask::from_fn(w, h, |x, y| closed.get(x + pad, y + pad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mask(w: usize, h: usize, p: f64, rng: &mut ChaCha8Rng) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| rng.random_bool(p))
    }

    #[test]
    fn line_element_has_requested_pixel_count() {
        for angle in (0..180).step_by(15) {
            let se = StructuringElement::line(9, angle as f64);
            assert_eq!(se.offsets().len(), 9, "angle {angle}: {:?}", se.offsets());
            assert!(se.offsets().contains(&(0, 0)));
            for &(x, y) in se.offsets() {
                assert!(se.offsets().contains(&(-x, -y)), "angle {angle} not symmetric");
            }
        }
        let horiz = StructuringElement::line(9, 0.0);
        assert!(horiz.offsets().iter().all(|&(_, y)| y == 0));
        let vert = StructuringElement::line(9, 90.0);
        assert!(vert.offsets().iter().all(|&(x, _)| x == 0));
    }

    #[test]
    fn ellipse_is_symmetric_and_centered() {
        let se = StructuringElement::ellipse(3, 2);
        assert!(se.offsets().contains(&(0, 0)));
        for &(x, y) in se.offsets() {
            assert!(se.offsets().contains(&(-x, y)));
            assert!(se.offsets().contains(&(x, -y)));
        }
        assert_eq!(StructuringElement::point().offsets(), &[(0, 0)]);
    }

    #[test]
    fn point_element_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_mask(16, 16, 0.4, &mut rng);
        let p = StructuringElement::point();
        for op in [MorphOp::Erode, MorphOp::Dilate, MorphOp::Close] {
            assert_eq!(morphology(&m, op, &p), m);
        }
    }

    #[test]
    fn closing_bridges_single_pixel_gap() {
        let mut m = BinaryMask::new(20, 5);
        for x in 2..18 {
            if x != 9 {
                m.set(x, 2, true);
            }
        }
        let c = close(&m, &StructuringElement::line(9, 0.0));
        assert!(c.get(9, 2));
        assert!((2..18).all(|x| c.get(x, 2)));
    }

    #[test]
    fn erosion_matches_set_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let se = StructuringElement::ellipse(2, 2);
        for _ in 0..20 {
            let m = random_mask(16, 16, 0.75, &mut rng);
            let e = erode(&m, &se);
            for y in 0..16 {
                for x in 0..16 {
                    let expect = se.offsets().iter().all(|&(dx, dy)| {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        (0..16).contains(&nx) && (0..16).contains(&ny) && m.get(nx as usize, ny as usize)
                    });
                    assert_eq!(e.get(x, y), expect);
                }
            }
        }
    }

    #[test]
    fn closing_contains_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for i in 0..100 {
            let m = random_mask(16, 16, 0.3, &mut rng);
            let se = if i % 2 == 0 {
                StructuringElement::ellipse(2, 1)
            } else {
                StructuringElement::line(9, (i * 15 % 180) as f64)
            };
            let c = close(&m, &se);
            assert!(m.is_subset_of(&c));
            assert!(erode(&m, &se).is_subset_of(&m));
            assert!(m.is_subset_of(&dilate(&m, &se)));
        }
    }
}
