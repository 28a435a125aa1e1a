use super::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        }
    }
}

/// Component labels, `0` for background and `1..=count` in raster order of
/// each component's first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    areas: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.areas.len()
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Area of component `label` (1-based).
    pub fn area(&self, label: u32) -> usize {
        self.areas[label as usize - 1]
    }

    pub fn areas(&self) -> &[usize] {
        &self.areas
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Mask of components whose label satisfies `keep`.
    pub fn select(&self, mut keep: impl FnMut(u32, usize) -> bool) -> BinaryMask {
        let flags: Vec<bool> = (1..=self.count() as u32)
            .map(|l| keep(l, self.area(l)))
            .collect();
        BinaryMask::from_fn(self.width, self.height, |x, y| {
            let l = self.label(x, y);
            l != 0 && flags[l as usize - 1]
        })
    }
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Components {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![0u32; w * h];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    let offsets = connectivity.offsets();
    for start in 0..w * h {
        if labels[start] != 0 || !mask.as_slice()[start] {
            continue;
        }
        let label = areas.len() as u32 + 1;
        let mut area = 0;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            area += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_or_false(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
        areas.push(area);
    }
    Components {
        width: w,
        height: h,
        labels,
        areas,
    }
}

/// Drops components smaller than `min_area` pixels.
pub fn remove_small_components(mask: &BinaryMask, min_area: usize, connectivity: Connectivity) -> BinaryMask {
    connected_components(mask, connectivity).select(|_, area| area >= min_area)
}
