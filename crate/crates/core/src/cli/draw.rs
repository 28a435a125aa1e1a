//! Tiny RGB canvas for overlays and plots.

use crate::raster::GrayImage;

/// Fixed segment palette; ids cycle through it.
pub const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
];

pub fn palette(id: usize) -> [u8; 3] {
    PALETTE[id.saturating_sub(1) % PALETTE.len()]
}

/// 3×5 digit glyphs, one row per byte, high bit on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        Self { width, height, rgb: fill.repeat(width * height) }
    }

    /// Gray image scaled by `gain` into all three channels.
    pub fn from_gray(img: &GrayImage, gain: f64) -> Self {
        let mut c = Self::new(img.width(), img.height(), [0, 0, 0]);
        for (i, &v) in img.as_slice().iter().enumerate() {
            let g = (v as f64 * gain).round().clamp(0.0, 255.0) as u8;
            c.rgb[3 * i..3 * i + 3].copy_from_slice(&[g, g, g]);
        }
        c
    }

    pub fn set(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = 3 * (y as usize * self.width + x as usize);
            self.rgb[i..i + 3].copy_from_slice(&color);
        }
    }

    pub fn blend(&mut self, x: usize, y: usize, color: [u8; 3], alpha: f64) {
        let i = 3 * (y * self.width + x);
        for k in 0..3 {
            let v = self.rgb[i + k] as f64 * (1.0 - alpha) + color[k] as f64 * alpha;
            self.rgb[i + k] = v.round() as u8;
        }
    }

    pub fn fill_rect(&mut self, x: i64, y: i64, w: i64, h: i64, color: [u8; 3]) {
        for yy in y..y + h {
            for xx in x..x + w {
                self.set(xx, yy, color);
            }
        }
    }

    /// Bresenham line of the given pixel thickness.
    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), color: [u8; 3], thickness: i64) {
        let (mut x0, mut y0) = (a.0.round() as i64, a.1.round() as i64);
        let (x1, y1) = (b.0.round() as i64, b.1.round() as i64);
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let mut err = dx + dy;
        let off = (thickness - 1) / 2;
        loop {
            self.fill_rect(x0 - off, y0 - off, thickness, thickness, color);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Draws `n` in digits of height `5 * scale` with the top-left at (x, y),
    /// on a dark backing box.
    pub fn number(&mut self, n: usize, x: i64, y: i64, scale: i64, color: [u8; 3]) {
        let text = n.to_string();
        let w = (text.len() as i64) * 4 * scale + scale;
        self.fill_rect(x - scale, y - scale, w + scale, 7 * scale, [0, 0, 0]);
        for (k, ch) in text.bytes().enumerate() {
            let glyph = DIGITS[(ch - b'0') as usize];
            let gx = x + k as i64 * 4 * scale;
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..3 {
                    if bits >> (2 - col) & 1 == 1 {
                        self.fill_rect(gx + col * scale, y + row as i64 * scale, scale, scale, color);
                    }
                }
            }
        }
    }
}
