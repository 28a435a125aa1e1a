//! Vessel diameter estimation along a centerline.
//!
//! Intensities are sampled on normals to the centerline and stacked into an
//! image (one column per centerline point). The stack is clustered into three
//! intensity classes, the darkest class is taken as vessel, the mask is
//! repaired (reflex holes, mirror symmetry, short gaps) and the vessel run
//! through the center row is counted per column.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{bilinear_sample, GrayImage};
use crate::skeleton::{select_nearest, CenterlinePath};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMode {
    /// Length of the 1-run containing the center row.
    #[default]
    CenterRun,
    /// Total number of 1s in the column.
    TotalCount,
}

impl std::str::FromStr for WidthMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center_run" => Ok(Self::CenterRun),
            "total_count" => Ok(Self::TotalCount),
            _ => Err(Error::invalid("width mode", format!("`{s}` (expected center_run or total_count)"))),
        }
    }
}

impl std::fmt::Display for WidthMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CenterRun => "center_run",
            Self::TotalCount => "total_count",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaliperParams {
    /// Normal length as a multiple of the maximum vessel diameter.
    pub normal_factor: f64,
    /// Number of centerline points in the tangent fit.
    pub tangent_window: usize,
    pub kmeans_max_iter: usize,
    /// Lloyd iterations stop once no centroid moves more than this.
    pub kmeans_tol: f64,
    /// Horizontal gaps shorter than this are joined during repair.
    pub row_join: usize,
    pub width_mode: WidthMode,
    /// A click farther than this from every centerline selects nothing.
    pub click_radius: f64,
}

impl Default for CaliperParams {
    fn default() -> Self {
        Self {
            normal_factor: 1.5,
            tangent_window: 6,
            kmeans_max_iter: 50,
            kmeans_tol: 0.5,
            row_join: 20,
            width_mode: WidthMode::CenterRun,
            click_radius: 50.0,
        }
    }
}

impl CaliperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.normal_factor > 0.0) {
            return Err(Error::validation("caliper.normal_factor", "must be positive"));
        }
        if self.tangent_window < 2 {
            return Err(Error::validation("caliper.tangent_window", "must be at least 2"));
        }
        if self.kmeans_max_iter == 0 {
            return Err(Error::validation("caliper.kmeans_max_iter", "must be at least 1"));
        }
        if !(self.kmeans_tol >= 0.0) {
            return Err(Error::validation("caliper.kmeans_tol", "must be non-negative"));
        }
        if !(self.click_radius >= 0.0) {
            return Err(Error::validation("caliper.click_radius", "must be non-negative"));
        }
        Ok(())
    }
}

/// Tangent angle in `[0, π)` at point `i`, from a total least squares line
/// through `window` consecutive points centered on `i`. Near the path ends
/// the window is shifted inward rather than shortened.
pub fn tangent_at(points: &[(usize, usize)], i: usize, window: usize) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegeneratePath(n));
    }
    let w = window.clamp(2, n);
    let start = i.saturating_sub(w / 2).min(n - w);
    let pts = &points[start..start + w];
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x as f64, b + y as f64));
    let (mx, my) = (mx / w as f64, my / w as f64);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        let (dx, dy) = (x as f64 - mx, y as f64 - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let mut a = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    if a < 0.0 {
        a += std::f64::consts::PI;
    }
    if a >= std::f64::consts::PI {
        a -= std::f64::consts::PI;
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalLine {
    pub center: (f64, f64),
    /// Unit vector perpendicular to the local tangent.
    pub direction: (f64, f64),
    pub half_length: f64,
    pub samples: usize,
}

impl NormalLine {
    /// Position of sample `k` (0-based); the center is sample `(samples-1)/2`.
    pub fn sample_point(&self, k: usize) -> (f64, f64) {
        let t = k as f64 - ((self.samples - 1) / 2) as f64;
        (self.center.0 + t * self.direction.0, self.center.1 + t * self.direction.1)
    }
}

/// Number of samples along each normal: `ceil(factor·max_diameter)`, made odd.
pub fn normal_samples(max_diameter: f64, factor: f64) -> usize {
    let n = (factor * max_diameter).ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Normals for every path point, oriented consistently to the left of the
/// direction of travel.
pub fn normals(path: &[(usize, usize)], max_diameter: f64, params: &CaliperParams) -> Result<Vec<NormalLine>> {
    let n = path.len();
    if n < 2 {
        return Err(Error::DegeneratePath(n));
    }
    let samples = normal_samples(max_diameter, params.normal_factor);
    (0..n)
        .map(|i| {
            let a = tangent_at(path, i, params.tangent_window)?;
            let (mut tx, mut ty) = (a.cos(), a.sin());
            let (p, q) = (path[i.saturating_sub(1)], path[(i + 1).min(n - 1)]);
            let (dx, dy) = (q.0 as f64 - p.0 as f64, q.1 as f64 - p.1 as f64);
            if tx * dx + ty * dy < 0.0 {
                tx = -tx;
                ty = -ty;
            }
            Ok(NormalLine {
                center: (path[i].0 as f64, path[i].1 as f64),
                direction: (-ty, tx),
                half_length: ((samples - 1) / 2) as f64,
                samples,
            })
        })
        .collect()
}

/// Intensities along the normals; column `c` is path point `c`, row
/// `(rows-1)/2` is the centerline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileStack {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl ProfileStack {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn center_row(&self) -> usize {
        (self.rows - 1) / 2
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.cols + col]
    }

    /// A column with no valid sample lies entirely outside the image.
    pub fn column_valid(&self, col: usize) -> bool {
        (0..self.rows).any(|r| self.is_valid(r, col))
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.valid).filter(|(_, &ok)| ok).map(|(&v, _)| v)
    }

    /// Rendered as an 8-bit image with the same orientation.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.cols, self.rows, |c, r| self.value(r, c).round().clamp(0.0, 255.0) as u8)
    }
}

pub fn build_profile_stack(
    img: &GrayImage,
    path: &[(usize, usize)],
    max_diameter: f64,
    params: &CaliperParams,
) -> Result<ProfileStack> {
    if !(max_diameter > 0.0) {
        return Err(Error::invalid("max_diameter", format!("must be positive, got {max_diameter}")));
    }
    let lines = normals(path, max_diameter, params)?;
    let rows = lines[0].samples;
    let cols = lines.len();
    let mut values = vec![0.0; rows * cols];
    let mut valid = vec![false; rows * cols];
    for (c, line) in lines.iter().enumerate() {
        for r in 0..rows {
            let (x, y) = line.sample_point(r);
            if let Ok(v) = bilinear_sample(img, x, y) {
                values[r * cols + c] = v;
                valid[r * cols + c] = true;
            }
        }
    }
    let all: Vec<f64> = values.iter().zip(&valid).filter(|(_, &ok)| ok).map(|(&v, _)| v).collect();
    let global = if all.is_empty() { 0.0 } else { all.iter().sum::<f64>() / all.len() as f64 };
    for r in 0..rows {
        let row = r * cols..(r + 1) * cols;
        let (sum, n) = values[row.clone()]
            .iter()
            .zip(&valid[row.clone()])
            .filter(|(_, &ok)| ok)
            .fold((0.0, 0usize), |(s, n), (&v, _)| (s + v, n + 1));
        let fill = if n > 0 { sum / n as f64 } else { global };
        for i in row {
            if !valid[i] {
                values[i] = fill;
            }
        }
    }
    Ok(ProfileStack { rows, cols, values, valid })
}

/// Binary grid with the shape of a profile stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VesselProfileMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl VesselProfileMask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, bits: vec![false; rows * cols] }
    }

    /// Builds a mask from rows of '0'/'1' characters.
    pub fn from_rows(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let bits = rows.iter().flat_map(|r| r.chars().map(|c| c == '1')).collect();
        Self { rows: rows.len(), cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.bits[row * self.cols + col] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn flipped(&self) -> Self {
        let mut out = Self::new(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(self.rows - 1 - r, c, self.get(r, c));
            }
        }
        out
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        *self == self.flipped()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.cols, self.rows, |c, r| if self.get(r, c) { 255 } else { 0 })
    }
}

/// Result of one-dimensional k-means with three clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans3 {
    /// Ascending centroids.
    pub centroids: [f64; 3],
    /// Values at or below this belong to the lowest cluster.
    pub low_cut: f64,
    /// Sum of squared distances to the assigned centroid after each step.
    pub objective_history: Vec<f64>,
    /// Fewer than three distinct values.
    pub degenerate: bool,
}

fn nearest(c: &[f64; 3], v: f64) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if (v - c[k]).abs() < (v - c[best]).abs() {
            best = k;
        }
    }
    best
}

fn objective(c: &[f64; 3], values: &[f64]) -> f64 {
    values.iter().map(|&v| (v - c[nearest(c, v)]).powi(2)).sum()
}

/// Lloyd iterations from centroids at the minimum, median and maximum.
pub fn lloyd_kmeans3(values: &[f64], max_iter: usize, tol: f64) -> ([f64; 3], Vec<f64>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut c = [sorted[0], sorted[(n - 1) / 2], sorted[n - 1]];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let mut sum = [0.0; 3];
        let mut cnt = [0usize; 3];
        for &v in values {
            let k = nearest(&c, v);
            sum[k] += v;
            cnt[k] += 1;
        }
        let mut next = c;
        for k in 0..3 {
            if cnt[k] > 0 {
                next[k] = sum[k] / cnt[k] as f64;
            }
        }
        let shift = (0..3).map(|k| (next[k] - c[k]).abs()).fold(0.0, f64::max);
        c = next;
        history.push(objective(&c, values));
        if shift < tol {
            break;
        }
    }
    (c, history)
}

/// Globally optimal partition of sorted weighted points into three
/// contiguous groups, minimizing the within-group sum of squares.
/// Returns the group end indices `(a, b)` (groups `..a`, `a..b`, `b..`) and
/// the cost.
fn optimal_3_partition(v: &[f64], w: &[f64]) -> (usize, usize, f64) {
    let m = v.len();
    let mut s0 = vec![0.0; m + 1];
    let mut s1 = vec![0.0; m + 1];
    let mut s2 = vec![0.0; m + 1];
    for i in 0..m {
        s0[i + 1] = s0[i] + w[i];
        s1[i + 1] = s1[i] + w[i] * v[i];
        s2[i + 1] = s2[i] + w[i] * v[i] * v[i];
    }
    let cost = |l: usize, r: usize| -> f64 {
        let ww = s0[r] - s0[l];
        if ww <= 0.0 {
            return 0.0;
        }
        let s = s1[r] - s1[l];
        (s2[r] - s2[l] - s * s / ww).max(0.0)
    };
    // two[j]: best split of the first j points into two non-empty groups
    let mut two = vec![f64::INFINITY; m + 1];
    let mut arg = vec![0usize; m + 1];
    fn solve(
        lo: usize,
        hi: usize,
        opt_lo: usize,
        opt_hi: usize,
        cost: &dyn Fn(usize, usize) -> f64,
        two: &mut [f64],
        arg: &mut [usize],
    ) {
        if lo > hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let mut best = (f64::INFINITY, opt_lo);
        for a in opt_lo..=opt_hi.min(mid - 1) {
            let c = cost(0, a) + cost(a, mid);
            if c < best.0 {
                best = (c, a);
            }
        }
        two[mid] = best.0;
        arg[mid] = best.1;
        if mid > lo {
            solve(lo, mid - 1, opt_lo, best.1, cost, two, arg);
        }
        solve(mid + 1, hi, best.1, opt_hi, cost, two, arg);
    }
    solve(2, m - 1, 1, m - 2, &cost, &mut two, &mut arg);
    let mut best = (f64::INFINITY, 0, 0);
    for b in 2..m {
        let c = two[b] + cost(b, m);
        if c < best.0 {
            best = (c, arg[b], b);
        }
    }
    (best.1, best.2, best.0)
}

/// Three-cluster 1-D k-means. Lloyd's iterations are run first; the exact
/// contiguous partition replaces them when it reaches a lower objective.
pub fn kmeans3(values: &[f64], max_iter: usize, tol: f64) -> KMeans3 {
    assert!(!values.is_empty(), "kmeans3 needs at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    let mut weight: Vec<f64> = Vec::new();
    for &v in &sorted {
        if distinct.last() == Some(&v) {
            *weight.last_mut().unwrap() += 1.0;
        } else {
            distinct.push(v);
            weight.push(1.0);
        }
    }
    let (mut c, mut history) = lloyd_kmeans3(values, max_iter, tol);
    let degenerate = distinct.len() < 3;
    if !degenerate {
        let (a, b, cost) = optimal_3_partition(&distinct, &weight);
        let last = history.last().copied().unwrap_or(f64::INFINITY);
        if cost < last - 1e-9 * last.abs().max(1.0) {
            let mean = |l: usize, r: usize| {
                let ws: f64 = weight[l..r].iter().sum();
                distinct[l..r].iter().zip(&weight[l..r]).map(|(v, w)| v * w).sum::<f64>() / ws
            };
            c = [mean(0, a), mean(a, b), mean(b, distinct.len())];
            history.push(objective(&c, values));
        }
    }
    let mut order = c;
    order.sort_by(f64::total_cmp);
    let low = order[0];
    let low_cut = sorted
        .iter()
        .copied()
        .filter(|&v| (v - low).abs() <= (v - order[1]).abs() && (v - low).abs() <= (v - order[2]).abs())
        .fold(f64::NEG_INFINITY, f64::max);
    KMeans3 {
        centroids: order,
        low_cut,
        objective_history: history,
        degenerate,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileClustering {
    pub mask: VesselProfileMask,
    pub kmeans: KMeans3,
    pub low_contrast: bool,
}

/// Marks valid cells in the darkest of three intensity clusters.
pub fn cluster_profiles(stack: &ProfileStack, params: &CaliperParams) -> ProfileClustering {
    let values: Vec<f64> = stack.valid_values().collect();
    let mut mask = VesselProfileMask::new(stack.rows(), stack.cols());
    if values.is_empty() {
        return ProfileClustering {
            mask,
            kmeans: KMeans3 {
                centroids: [0.0; 3],
                low_cut: f64::NEG_INFINITY,
                objective_history: Vec::new(),
                degenerate: true,
            },
            low_contrast: true,
        };
    }
    let km = kmeans3(&values, params.kmeans_max_iter, params.kmeans_tol);
    for r in 0..stack.rows() {
        for c in 0..stack.cols() {
            if stack.is_valid(r, c) && stack.value(r, c) <= km.low_cut {
                mask.set(r, c, true);
            }
        }
    }
    ProfileClustering {
        mask,
        low_contrast: km.degenerate,
        kmeans: km,
    }
}

/// Fills 0-runs bounded on both sides along one line of cells.
fn fill_bounded(line: &mut [bool], max_gap: usize) {
    let mut last_one: Option<usize> = None;
    for i in 0..line.len() {
        if line[i] {
            if let Some(j) = last_one {
                let gap = i - j - 1;
                if gap > 0 && gap < max_gap {
                    line[j + 1..i].iter_mut().for_each(|b| *b = true);
                }
            }
            last_one = Some(i);
        }
    }
}

/// Column hole filling, AND with the mirror about the center row, then
/// joining of row gaps shorter than `row_join`.
pub fn repair_profile(mask: &VesselProfileMask, row_join: usize) -> VesselProfileMask {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut m = mask.clone();
    for c in 0..cols {
        let mut col: Vec<bool> = (0..rows).map(|r| m.get(r, c)).collect();
        fill_bounded(&mut col, usize::MAX);
        for (r, &b) in col.iter().enumerate() {
            m.set(r, c, b);
        }
    }
    let flip = m.flipped();
    for i in 0..m.bits.len() {
        m.bits[i] &= flip.bits[i];
    }
    for r in 0..rows {
        fill_bounded(&mut m.bits[r * cols..(r + 1) * cols], row_join);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterProfile {
    pub widths: Vec<f64>,
}

impl DiameterProfile {
    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.widths.is_empty() {
            return 0.0;
        }
        self.widths.iter().sum::<f64>() / self.widths.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.widths.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn measure_diameters(mask: &VesselProfileMask, mode: WidthMode) -> DiameterProfile {
    let center = mask.rows().saturating_sub(1) / 2;
    let widths = (0..mask.cols())
        .map(|c| {
            let col: Vec<bool> = (0..mask.rows()).map(|r| mask.get(r, c)).collect();
            let w = match mode {
                WidthMode::TotalCount => col.iter().filter(|&&b| b).count(),
                WidthMode::CenterRun if col.get(center) == Some(&true) => {
                    let up = col[..center].iter().rev().take_while(|&&b| b).count();
                    let down = col[center + 1..].iter().take_while(|&&b| b).count();
                    up + 1 + down
                }
                WidthMode::CenterRun => {
                    let (mut best, mut run) = (0, 0);
                    for &b in &col {
                        run = if b { run + 1 } else { 0 };
                        best = best.max(run);
                    }
                    best
                }
            };
            w as f64
        })
        .collect();
    DiameterProfile { widths }
}

/// Every intermediate of a diameter estimate along one path.
#[derive(Debug, Clone)]
pub struct VesselEstimate {
    /// Index of the measured path in the input slice.
    pub path_index: usize,
    /// Distance from the click to the path, px.
    pub click_distance: f64,
    pub stack: ProfileStack,
    pub clustered: ProfileClustering,
    pub repaired: VesselProfileMask,
    pub diameters: DiameterProfile,
}

/// Measures one path: stack, cluster, repair, count.
pub fn estimate_path(
    img: &GrayImage,
    path: &CenterlinePath,
    max_diameter: f64,
    params: &CaliperParams,
) -> Result<(ProfileStack, ProfileClustering, VesselProfileMask, DiameterProfile)> {
    let stack = build_profile_stack(img, &path.points, max_diameter, params)?;
    let clustered = cluster_profiles(&stack, params);
    if clustered.low_contrast {
        return Err(Error::LowContrast);
    }
    let repaired = repair_profile(&clustered.mask, params.row_join);
    let diameters = measure_diameters(&repaired, params.width_mode);
    Ok((stack, clustered, repaired, diameters))
}

/// Selects the path nearest to `click` and measures its diameters.
pub fn estimate_vessel(
    img: &GrayImage,
    paths: &[CenterlinePath],
    click: (f64, f64),
    max_diameter: f64,
    params: &CaliperParams,
) -> Result<VesselEstimate> {
    let (path_index, click_distance) = select_nearest(paths, click)?;
    if click_distance > params.click_radius {
        return Err(Error::NoVessel { near: Some(click) });
    }
    let (stack, clustered, repaired, diameters) = estimate_path(img, &paths[path_index], max_diameter, params)?;
    Ok(VesselEstimate {
        path_index,
        click_distance,
        stack,
        clustered,
        repaired,
        diameters,
    })
}
