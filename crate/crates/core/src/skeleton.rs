//! Centerline extraction from a vessel mask.
//!
//! Zhang-Suen thinning, gap closing with rotated line elements, junction
//! detection by crossing number, junction removal, short-segment pruning and
//! ordered path tracing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{close, connected_components, BinaryMask, Connectivity, StructuringElement};

/// Neighbor offsets in the order N, NE, E, SE, S, SW, W, NW.
const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    /// Pixel length of the line element used to bridge broken centerlines.
    pub gap_se_length: usize,
    /// Angular step of the rotated line elements, degrees.
    pub gap_angle_step: f64,
    /// Paths with fewer pixels than this are discarded.
    pub prune_length: usize,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        Self {
            gap_se_length: 9,
            gap_angle_step: 15.0,
            prune_length: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterlinePath {
    pub id: usize,
    /// Ordered, 8-adjacent pixel coordinates.
    pub points: Vec<(usize, usize)>,
    /// Traced from a component with no endpoint.
    pub is_loop: bool,
}

impl CenterlinePath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn midpoint(&self) -> (usize, usize) {
        self.points[self.points.len() / 2]
    }

    /// Smallest Euclidean distance from `p` to any pixel of the path.
    pub fn distance_to(&self, p: (f64, f64)) -> f64 {
        self.points
            .iter()
            .map(|&(x, y)| (x as f64 - p.0).powi(2) + (y as f64 - p.1).powi(2))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BifurcationSet {
    pub points: Vec<(usize, usize)>,
}

/// All stages of centerline extraction.
#[derive(Debug, Clone)]
pub struct CenterlineMap {
    pub thinned: BinaryMask,
    pub closed: BinaryMask,
    pub bifurcations: BifurcationSet,
    pub paths: Vec<CenterlinePath>,
}

#[inline]
fn ring_bits(m: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let mut b = [false; 8];
    for (k, &(dx, dy)) in RING.iter().enumerate() {
        b[k] = m.get_or_false(x as isize + dx, y as isize + dy);
    }
    b
}

/// Number of 0→1 transitions walking once around the 8-neighborhood.
pub fn crossing_number(m: &BinaryMask, x: usize, y: usize) -> usize {
    let b = ring_bits(m, x, y);
    (0..8).filter(|&k| !b[k] && b[(k + 1) % 8]).count()
}

fn neighbor_count(m: &BinaryMask, x: usize, y: usize) -> usize {
    ring_bits(m, x, y).iter().filter(|&&b| b).count()
}

/// Yokoi connectivity number for 8-connected foreground; a pixel is simple
/// (removable without changing topology) iff it equals 1.
fn yokoi8(b: &[bool; 8]) -> usize {
    // reorder to E, NE, N, NW, W, SW, S, SE
    let x = [b[2], b[1], b[0], b[7], b[6], b[5], b[4], b[3]];
    let nb = |k: usize| !x[k % 8];
    [0usize, 2, 4, 6]
        .iter()
        .filter(|&&k| nb(k) && !(nb(k + 1) && nb(k + 2)))
        .count()
}

fn zhang_suen_pass(m: &mut BinaryMask, candidates: &mut Vec<(usize, usize)>, first: bool) -> bool {
    let mut delete = Vec::new();
    for &(x, y) in candidates.iter() {
        if !m.get(x, y) {
            continue;
        }
        let p = ring_bits(m, x, y);
        let b = p.iter().filter(|&&v| v).count();
        // B >= 3 rather than 2 keeps 2-px diagonal runs from eroding away
        // from their ends
        if !(3..=6).contains(&b) {
            continue;
        }
        let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
        if a != 1 {
            continue;
        }
        // p[0]=N(P2) p[2]=E(P4) p[4]=S(P6) p[6]=W(P8)
        let ok = if first {
            !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
        } else {
            !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
        };
        if ok {
            delete.push((x, y));
        }
    }
    // Marked pixels are removed one at a time, sparsest first, and only while
    // they are still simple non-endpoints, so 2-px-thick parts (diagonal
    // runs in particular) can neither vanish nor split.
    delete.sort_by_key(|&(x, y)| neighbor_count(m, x, y));
    let mut changed = false;
    for &(x, y) in &delete {
        let b = ring_bits(m, x, y);
        if b.iter().filter(|&&v| v).count() >= 2 && yokoi8(&b) == 1 {
            m.set(x, y, false);
            changed = true;
        }
    }
    candidates.retain(|&(x, y)| m.get(x, y));
    changed
}

/// Removes pixels that are redundant for 8-connectivity (staircase corners).
/// Each raster pass deletes only pixels with no neighbor deleted in the same
/// pass, so thick ends shed one pixel per pass instead of unravelling.
fn remove_redundant(m: &mut BinaryMask) {
    loop {
        let mut removed = BinaryMask::new(m.width(), m.height());
        let mut changed = false;
        let pts: Vec<(usize, usize)> = m.points().collect();
        for (x, y) in pts {
            if ring_bits(&removed, x, y).iter().any(|&b| b) {
                continue;
            }
            let b = ring_bits(m, x, y);
            let n = b.iter().filter(|&&v| v).count();
            if n >= 2 && yokoi8(&b) == 1 {
                m.set(x, y, false);
                removed.set(x, y, true);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Zhang-Suen thinning to convergence followed by removal of redundant
/// staircase pixels, giving a minimal 8-connected 1-px skeleton that keeps
/// the component structure of the input.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let mut m = mask.clone();
    let mut candidates: Vec<(usize, usize)> = m.points().collect();
    loop {
        let a = zhang_suen_pass(&mut m, &mut candidates, true);
        let b = zhang_suen_pass(&mut m, &mut candidates, false);
        if !a && !b {
            break;
        }
    }
    remove_redundant(&mut m);
    m
}

/// Background pixels in 4-connected pieces that do not reach the border.
fn enclosed_background(m: &BinaryMask) -> BinaryMask {
    let bg = connected_components(&m.not(), Connectivity::Four);
    let (w, h) = (m.width(), m.height());
    let mut open = vec![false; bg.count() + 1];
    for x in 0..w {
        open[bg.label(x, 0) as usize] = true;
        open[bg.label(x, h - 1) as usize] = true;
    }
    for y in 0..h {
        open[bg.label(0, y) as usize] = true;
        open[bg.label(w - 1, y) as usize] = true;
    }
    BinaryMask::from_fn(w, h, |x, y| {
        let l = bg.label(x, y);
        l != 0 && !open[l as usize]
    })
}

/// Bridges small breaks: union of closings with a line element rotated in
/// `angle_step` increments over 180°, then re-thinned. Closing the acute
/// angle between two branches can trap background pixels; holes that were
/// open in `skel` are filled before thinning so they do not survive as
/// spurious loops.
pub fn close_centerline_gaps(skel: &BinaryMask, se_length: usize, angle_step: f64) -> BinaryMask {
    if skel.is_empty() {
        return skel.clone();
    }
    let mut acc = skel.clone();
    let steps = (180.0 / angle_step).round().max(1.0) as usize;
    for i in 0..steps {
        let se = StructuringElement::line(se_length, i as f64 * angle_step);
        acc = acc.or(&close(skel, &se));
    }
    let trapped = enclosed_background(&acc).and(&enclosed_background(skel).not());
    thin(&acc.or(&trapped))
}

/// Skeleton pixels whose crossing number is at least 3.
pub fn detect_bifurcations(skel: &BinaryMask) -> BifurcationSet {
    BifurcationSet {
        points: skel
            .points()
            .filter(|&(x, y)| crossing_number(skel, x, y) >= 3)
            .collect(),
    }
}

fn trace_component(m: &BinaryMask, pixels: &[(usize, usize)]) -> (Vec<(usize, usize)>, bool) {
    let start = pixels.iter().copied().find(|&(x, y)| neighbor_count(m, x, y) == 1);
    let is_loop = start.is_none();
    let start = start.unwrap_or(pixels[0]);
    let mut visited = std::collections::HashSet::with_capacity(pixels.len());
    let mut path = vec![start];
    visited.insert(start);
    let mut cur = start;
    // 4-neighbors first, then diagonals
    let order = [0usize, 2, 4, 6, 1, 3, 5, 7];
    loop {
        let next = order.iter().find_map(|&k| {
            let (dx, dy) = RING[k];
            let (nx, ny) = (cur.0 as isize + dx, cur.1 as isize + dy);
            if m.get_or_false(nx, ny) && !visited.contains(&(nx as usize, ny as usize)) {
                Some((nx as usize, ny as usize))
            } else {
                None
            }
        });
        match next {
            Some(p) => {
                visited.insert(p);
                path.push(p);
                cur = p;
            }
            None => break,
        }
    }
    (path, is_loop)
}

/// Removes every junction together with its 3×3 neighborhood, drops
/// components shorter than `min_length` and traces the rest end to end.
pub fn prune_and_trace(skel: &BinaryMask, bifs: &BifurcationSet, min_length: usize) -> Vec<CenterlinePath> {
    let mut m = skel.clone();
    for &(x, y) in &bifs.points {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if m.get_or_false(nx, ny) {
                    m.set(nx as usize, ny as usize, false);
                }
            }
        }
    }
    let comps = connected_components(&m, Connectivity::Eight);
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); comps.count()];
    for (x, y) in m.points() {
        members[comps.label(x, y) as usize - 1].push((x, y));
    }
    let mut paths = Vec::new();
    for pixels in members.into_iter().filter(|p| p.len() >= min_length) {
        let (points, is_loop) = trace_component(&m, &pixels);
        if points.len() >= min_length {
            paths.push(CenterlinePath {
                id: paths.len() + 1,
                points,
                is_loop,
            });
        }
    }
    paths
}

pub fn extract_centerlines(vessel_mask: &BinaryMask, params: &SkeletonParams) -> CenterlineMap {
    let thinned = thin(vessel_mask);
    let closed = close_centerline_gaps(&thinned, params.gap_se_length, params.gap_angle_step);
    let bifurcations = detect_bifurcations(&closed);
    let paths = prune_and_trace(&closed, &bifurcations, params.prune_length);
    CenterlineMap {
        thinned,
        closed,
        bifurcations,
        paths,
    }
}

/// Index of the path with the pixel closest to `click`, and that distance.
/// Ties go to the lower id.
pub fn select_nearest(paths: &[CenterlinePath], click: (f64, f64)) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64, usize)> = None;
    for (i, p) in paths.iter().enumerate() {
        let d = p.distance_to(click);
        let better = match best {
            None => true,
            Some((_, bd, bid)) => d < bd || (d == bd && p.id < bid),
        };
        if better {
            best = Some((i, d, p.id));
        }
    }
    best.map(|(i, d, _)| (i, d))
        .ok_or(Error::NoVessel { near: Some(click) })
}
