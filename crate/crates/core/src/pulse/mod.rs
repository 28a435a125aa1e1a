//! Diameter time series: smoothing, extrema and heart-rate estimation.

mod track;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::track::{track, track_many, TrackParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VesselKind {
    Artery,
    Vein,
    #[default]
    Unknown,
}

impl std::str::FromStr for VesselKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "artery" => Ok(VesselKind::Artery),
            "vein" => Ok(VesselKind::Vein),
            "unknown" | "" => Ok(VesselKind::Unknown),
            other => Err(format!("unknown vessel kind `{other}`")),
        }
    }
}

impl std::fmt::Display for VesselKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VesselKind::Artery => "artery",
            VesselKind::Vein => "vein",
            VesselKind::Unknown => "unknown",
        })
    }
}

/// Mean vessel width (px) per frame at a fixed frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterSeries {
    pub values: Vec<f64>,
    pub fps: f64,
    pub vessel_kind: VesselKind,
}

impl DiameterSeries {
    pub fn new(values: Vec<f64>, fps: f64) -> Self {
        Self {
            values,
            fps,
            vessel_kind: VesselKind::Unknown,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub sg_window: usize,
    pub sg_order: usize,
    pub lowpass_hz: f64,
    pub lowpass_taps: usize,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            sg_window: 5,
            sg_order: 2,
            lowpass_hz: 2.0,
            lowpass_taps: 31,
        }
    }
}

/// Kaiser window shape used for the low-pass kernel.
const KAISER_BETA: f64 = 3.5;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Weights that evaluate the least-squares polynomial of `order` through
/// samples at offsets `0..window` at position `at`.
fn sg_weights(window: usize, order: usize, at: f64) -> Vec<f64> {
    let m = order + 1;
    // normal matrix of the Vandermonde system
    let mut ata = vec![vec![0.0; m]; m];
    for i in 0..window {
        for r in 0..m {
            for c in 0..m {
                ata[r][c] += (i as f64).powi((r + c) as i32);
            }
        }
    }
    let e: Vec<f64> = (0..m).map(|p| at.powi(p as i32)).collect();
    // w_i = e^T (A^T A)^-1 a_i
    let z = solve(ata, e);
    (0..window)
        .map(|i| (0..m).map(|p| z[p] * (i as f64).powi(p as i32)).sum())
        .collect()
}

/// Savitzky-Golay smoothing; the first and last half-windows are evaluated
/// from the polynomial fitted to the boundary window.
pub fn savitzky_golay(values: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) || order >= window {
        return Err(Error::invalid("sg_window", "window must be odd and larger than the order"));
    }
    let n = values.len();
    if n < window {
        return Err(Error::TooShort { len: n, min: window });
    }
    let half = window / 2;
    let center = sg_weights(window, order, half as f64);
    let mut out = vec![0.0; n];
    for i in half..n - half {
        out[i] = center
            .iter()
            .zip(&values[i - half..=i + half])
            .map(|(w, v)| w * v)
            .sum();
    }
    for i in 0..half {
        let w = sg_weights(window, order, i as f64);
        out[i] = w.iter().zip(&values[..window]).map(|(w, v)| w * v).sum();
        let w = sg_weights(window, order, (window - 1 - i) as f64);
        out[n - 1 - i] = w.iter().zip(&values[n - window..]).map(|(w, v)| w * v).sum();
    }
    Ok(out)
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc low-pass kernel with unit DC gain.
pub fn lowpass_kernel(taps: usize, cutoff_hz: f64, fps: f64) -> Vec<f64> {
    let fc = cutoff_hz / fps;
    let mid = (taps as f64 - 1.0) / 2.0;
    let denom = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..taps)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (std::f64::consts::TAU * fc * t).sin() / (std::f64::consts::PI * t)
            };
            let r = if mid > 0.0 { t / mid } else { 0.0 };
            sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect();
    let s: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= s);
    h
}

/// Centered convolution with odd-reflection padding at both ends.
fn convolve_reflect(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len() as isize;
    let r = (h.len() / 2) as isize;
    let at = |i: isize| -> f64 {
        if i < 0 {
            let k = (-i).min(n - 1);
            2.0 * x[0] - x[k as usize]
        } else if i >= n {
            let k = (i - (n - 1)).min(n - 1);
            2.0 * x[(n - 1) as usize] - x[(n - 1 - k) as usize]
        } else {
            x[i as usize]
        }
    };
    (0..n)
        .map(|i| h.iter().enumerate().map(|(k, w)| w * at(i + k as isize - r)).sum())
        .collect()
}

/// Forward-backward application of the low-pass kernel (zero phase).
pub fn lowpass_zero_phase(values: &[f64], fps: f64, cutoff_hz: f64, taps: usize) -> Vec<f64> {
    let h = lowpass_kernel(taps, cutoff_hz, fps);
    let forward = convolve_reflect(values, &h);
    let mut rev: Vec<f64> = forward.into_iter().rev().collect();
    rev = convolve_reflect(&rev, &h);
    rev.reverse();
    rev
}

pub fn smooth(series: &DiameterSeries, params: &SmoothingParams) -> Result<DiameterSeries> {
    let min = params.sg_window + 1;
    if series.len() < min {
        return Err(Error::TooShort {
            len: series.len(),
            min,
        });
    }
    let sg = savitzky_golay(&series.values, params.sg_window, params.sg_order)?;
    let values = lowpass_zero_phase(&sg, series.fps, params.lowpass_hz, params.lowpass_taps);
    Ok(DiameterSeries {
        values,
        fps: series.fps,
        vessel_kind: series.vessel_kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub kind: ExtremumKind,
}

/// Strict local extrema in alternating order.
///
/// Runs of equal values count as one sample located at the run midpoint.
/// When two extrema of the same kind follow each other, the weaker one is
/// dropped.
pub fn find_extrema(values: &[f64]) -> Result<Vec<Extremum>> {
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match runs.last_mut() {
            Some(last) if last.2 == v => last.1 = i,
            _ => runs.push((i, i, v)),
        }
    }
    let mut out: Vec<(Extremum, f64)> = Vec::new();
    for k in 1..runs.len().saturating_sub(1) {
        let (s, e, v) = runs[k];
        let (prev, next) = (runs[k - 1].2, runs[k + 1].2);
        let kind = if v > prev && v > next {
            ExtremumKind::Max
        } else if v < prev && v < next {
            ExtremumKind::Min
        } else {
            continue;
        };
        let ex = Extremum {
            index: (s + e) / 2,
            kind,
        };
        match out.last_mut() {
            Some((last, lv)) if last.kind == kind => {
                let stronger = match kind {
                    ExtremumKind::Max => v > *lv,
                    ExtremumKind::Min => v < *lv,
                };
                if stronger {
                    *last = ex;
                    *lv = v;
                }
            }
            _ => out.push((ex, v)),
        }
    }
    if out.len() < 2 {
        return Err(Error::InsufficientPulsation);
    }
    Ok(out.into_iter().map(|(e, _)| e).collect())
}

/// How the pulse period is derived from the mean min-to-max separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeartRateFormula {
    /// `period = 2 * separation`.
    #[default]
    TwiceSeparation,
    /// `period = separation`.
    Separation,
}

impl std::str::FromStr for HeartRateFormula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "period=2*sep" | "twice_separation" => Ok(Self::TwiceSeparation),
            "period=sep" | "separation" => Ok(Self::Separation),
            other => Err(format!("unknown heart-rate formula `{other}` (expected period=2*sep or period=sep)")),
        }
    }
}

impl std::fmt::Display for HeartRateFormula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TwiceSeparation => "period=2*sep",
            Self::Separation => "period=sep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseReport {
    /// Mean time between consecutive extrema, seconds.
    pub mean_separation: f64,
    pub period: f64,
    pub heart_rate_bpm: f64,
    pub formula: HeartRateFormula,
    /// Rate under `period = 2 * separation`.
    pub bpm_twice_separation: f64,
    /// Rate under `period = separation`.
    pub bpm_separation: f64,
    pub extrema: Vec<Extremum>,
}

impl PulseReport {
    pub fn from_separation(mean_separation: f64, formula: HeartRateFormula, extrema: Vec<Extremum>) -> Self {
        let period = match formula {
            HeartRateFormula::TwiceSeparation => 2.0 * mean_separation,
            HeartRateFormula::Separation => mean_separation,
        };
        Self {
            mean_separation,
            period,
            heart_rate_bpm: 60.0 / period,
            formula,
            bpm_twice_separation: 60.0 / (2.0 * mean_separation),
            bpm_separation: 60.0 / mean_separation,
            extrema,
        }
    }
}

pub fn heart_rate(extrema: &[Extremum], fps: f64, formula: HeartRateFormula) -> Result<PulseReport> {
    if extrema.len() < 2 {
        return Err(Error::InsufficientPulsation);
    }
    let gaps: f64 = extrema
        .windows(2)
        .map(|w| (w[1].index - w[0].index) as f64)
        .sum();
    let mean_separation = gaps / (extrema.len() - 1) as f64 / fps;
    Ok(PulseReport::from_separation(mean_separation, formula, extrema.to_vec()))
}

/// Share of the series range an end extremum must rebound by, toward the
/// nearest end of the series, to count as a turning point.
pub const EDGE_REBOUND: f64 = 0.1;

/// Drops a first or last extremum that is only a filter transient: one
/// from which the series barely moves before it ends.
pub fn trim_edge_extrema(values: &[f64], extrema: &[Extremum]) -> Vec<Extremum> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let floor = EDGE_REBOUND * (hi - lo);
    let mut out = extrema.to_vec();
    if let (Some(last), Some(&end)) = (out.last(), values.last()) {
        if (end - values[last.index]).abs() < floor {
            out.pop();
        }
    }
    if let (Some(first), Some(&start)) = (out.first(), values.first()) {
        if (start - values[first.index]).abs() < floor {
            out.remove(0);
        }
    }
    out
}

/// Smooth, locate extrema, discard end transients and estimate the heart
/// rate in one go.
pub fn analyze(
    series: &DiameterSeries,
    params: &SmoothingParams,
    formula: HeartRateFormula,
) -> Result<(DiameterSeries, PulseReport)> {
    let smoothed = smooth(series, params)?;
    let extrema = trim_edge_extrema(&smoothed.values, &find_extrema(&smoothed.values)?);
    let report = heart_rate(&extrema, series.fps, formula)?;
    Ok((smoothed, report))
}

/// Pearson correlation coefficient; `None` for constant or mismatched input.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
