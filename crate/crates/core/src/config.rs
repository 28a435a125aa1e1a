//! Plain-text configuration: `key = value` lines grouped under `[section]`
//! headers. Lines starting with `#` or `;` are comments, and `#` also ends a
//! line early. Sections may repeat, which scene files use for their
//! `[vessel]` blocks.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::caliper::{CaliperParams, WidthMode};
use crate::error::{Error, Result};
use crate::metrics::MeanErrorForm;
use crate::pulse::{HeartRateFormula, SmoothingParams, TrackParams, VesselKind};
use crate::segment::SegmentationParams;
use crate::skeleton::SkeletonParams;
use crate::synthgen::{CentralReflex, Curve, Pulsation, SceneSpec, VesselSpec, WidthProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IniEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IniSection {
    /// Empty for keys that precede the first header.
    pub name: String,
    pub line: usize,
    pub entries: Vec<IniEntry>,
}

impl IniSection {
    pub fn get(&self, key: &str) -> Option<&IniEntry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IniDocument {
    pub sections: Vec<IniSection>,
}

pub fn parse_ini(text: &str) -> Result<IniDocument> {
    let mut doc = IniDocument::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() || s.starts_with(';') {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, message: "unterminated section header".into() })?
                .trim();
            if name.is_empty() {
                return Err(Error::Parse { line, message: "empty section name".into() });
            }
            doc.sections.push(IniSection { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{s}`") })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Parse { line, message: "missing key".into() });
        }
        if doc.sections.is_empty() {
            doc.sections.push(IniSection { name: String::new(), line, entries: Vec::new() });
        }
        let sec = doc.sections.last_mut().unwrap();
        sec.entries.push(IniEntry { key: key.to_string(), value: v.trim().to_string(), line });
    }
    Ok(doc)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn value<T: FromStr>(field: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::validation(field, format!("cannot parse `{raw}` as {}", std::any::type_name::<T>())))
}

fn parse_point(field: &str, raw: &str) -> Result<(f64, f64)> {
    let (x, y) = raw
        .split_once(',')
        .ok_or_else(|| Error::validation(field, format!("expected `x,y`, got `{raw}`")))?;
    Ok((value(field, x.trim())?, value(field, y.trim())?))
}

fn parse_points(field: &str, raw: &str) -> Result<Vec<(f64, f64)>> {
    raw.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_point(field, p))
        .collect()
}

/// Rewrites a bare-name parameter error into a `section.name` field error.
fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::validation(format!("{section}.{name}"), reason),
        other => other,
    }
}

/// Every tunable of a run, with defaults equal to the published method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub segmentation: SegmentationParams,
    pub skeleton: SkeletonParams,
    pub caliper: CaliperParams,
    pub smoothing: SmoothingParams,
    pub fps: f64,
    /// Search radius for re-finding the tracked vessel in later frames.
    pub carry_radius: f64,
    pub heart_rate_formula: HeartRateFormula,
    pub mean_error_form: MeanErrorForm,
    /// Annotation points farther than this from every measured point are unmatched.
    pub match_radius: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrackParams::default();
        Self {
            segmentation: t.segmentation,
            skeleton: t.skeleton,
            caliper: t.caliper,
            smoothing: SmoothingParams::default(),
            fps: t.fps,
            carry_radius: t.carry_radius,
            heart_rate_formula: HeartRateFormula::default(),
            mean_error_form: MeanErrorForm::Mean,
            match_radius: 3.0,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ini(&read_text(path)?)
    }

    /// Starts from the defaults and applies every key in `text`.
    pub fn from_ini(text: &str) -> Result<Self> {
        let doc = parse_ini(text)?;
        let mut cfg = Self::default();
        for sec in &doc.sections {
            for e in &sec.entries {
                cfg.set(&sec.name, &e.key, &e.value)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one value addressed by section and key.
    pub fn set(&mut self, section: &str, key: &str, raw: &str) -> Result<()> {
        let field = format!("{section}.{key}");
        let f = field.as_str();
        let s = &mut self.segmentation;
        let k = &mut self.skeleton;
        let c = &mut self.caliper;
        let p = &mut self.smoothing;
        match (section, key) {
            ("segmentation", "clahe_grid") => s.clahe_grid = value(f, raw)?,
            ("segmentation", "clahe_clip") => s.clahe_clip = value(f, raw)?,
            ("segmentation", "median_size") => s.median_size = value(f, raw)?,
            ("segmentation", "gaussian_size") => s.gaussian_size = value(f, raw)?,
            ("segmentation", "global_threshold") => s.global_threshold = value(f, raw)?,
            ("segmentation", "min_blob_area") => s.min_blob_area = value(f, raw)?,
            ("segmentation", "fov_threshold") => s.fov_threshold = value(f, raw)?,
            ("segmentation", "fov_erode_radius") => s.fov_erode_radius = value(f, raw)?,
            ("skeleton", "gap_se_length") => k.gap_se_length = value(f, raw)?,
            ("skeleton", "gap_angle_step") => k.gap_angle_step = value(f, raw)?,
            ("skeleton", "prune_length") => k.prune_length = value(f, raw)?,
            ("caliper", "normal_factor") => c.normal_factor = value(f, raw)?,
            ("caliper", "tangent_window") => c.tangent_window = value(f, raw)?,
            ("caliper", "kmeans_max_iter") => c.kmeans_max_iter = value(f, raw)?,
            ("caliper", "kmeans_tol") => c.kmeans_tol = value(f, raw)?,
            ("caliper", "row_join") => c.row_join = value(f, raw)?,
            ("caliper", "width_mode") => {
                c.width_mode = WidthMode::from_str(raw).map_err(|e| Error::validation(f, e.to_string()))?
            }
            ("caliper", "click_radius") => c.click_radius = value(f, raw)?,
            ("pulse", "sg_window") => p.sg_window = value(f, raw)?,
            ("pulse", "sg_order") => p.sg_order = value(f, raw)?,
            ("pulse", "lowpass_hz") => p.lowpass_hz = value(f, raw)?,
            ("pulse", "lowpass_taps") => p.lowpass_taps = value(f, raw)?,
            ("pulse", "fps") => self.fps = value(f, raw)?,
            ("pulse", "carry_radius") => self.carry_radius = value(f, raw)?,
            ("pulse", "heart_rate_formula") => {
                self.heart_rate_formula = HeartRateFormula::from_str(raw).map_err(|e| Error::validation(f, e))?
            }
            ("eval", "mean_error_form") => {
                self.mean_error_form = MeanErrorForm::from_str(raw).map_err(|e| Error::validation(f, e.to_string()))?
            }
            ("eval", "match_radius") => self.match_radius = value(f, raw)?,
            ("run", "seed") => self.seed = value(f, raw)?,
            _ => return Err(Error::validation(f, "unknown setting")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.segmentation.validate().map_err(|e| in_section("segmentation", e))?;
        self.caliper.validate()?;
        let k = &self.skeleton;
        if k.gap_se_length == 0 {
            return Err(Error::validation("skeleton.gap_se_length", "must be positive"));
        }
        if !(k.gap_angle_step > 0.0 && k.gap_angle_step <= 180.0) {
            return Err(Error::validation("skeleton.gap_angle_step", "must lie in (0, 180]"));
        }
        let p = &self.smoothing;
        if p.sg_window.is_multiple_of(2) || p.sg_order >= p.sg_window {
            return Err(Error::validation("pulse.sg_window", "must be odd and larger than pulse.sg_order"));
        }
        if !(self.fps > 0.0) {
            return Err(Error::validation("pulse.fps", "must be positive"));
        }
        if !(p.lowpass_hz > 0.0 && p.lowpass_hz < self.fps / 2.0) {
            return Err(Error::validation("pulse.lowpass_hz", "must lie between 0 and half the frame rate"));
        }
        if p.lowpass_taps.is_multiple_of(2) {
            return Err(Error::validation("pulse.lowpass_taps", "must be odd"));
        }
        if !(self.carry_radius > 0.0) {
            return Err(Error::validation("pulse.carry_radius", "must be positive"));
        }
        if !(self.match_radius > 0.0) {
            return Err(Error::validation("eval.match_radius", "must be positive"));
        }
        Ok(())
    }

    pub fn track_params(&self) -> TrackParams {
        TrackParams {
            segmentation: self.segmentation.clone(),
            skeleton: self.skeleton,
            caliper: self.caliper,
            carry_radius: self.carry_radius,
            fps: self.fps,
        }
    }

    /// The full configuration in the same text format; parsing it back
    /// yields an equal value.
    pub fn to_ini(&self) -> String {
        let s = &self.segmentation;
        let k = &self.skeleton;
        let c = &self.caliper;
        let p = &self.smoothing;
        let mut o = String::new();
        let _ = writeln!(o, "[segmentation]");
        let _ = writeln!(o, "clahe_grid = {}", s.clahe_grid);
        let _ = writeln!(o, "clahe_clip = {}", s.clahe_clip);
        let _ = writeln!(o, "median_size = {}", s.median_size);
        let _ = writeln!(o, "gaussian_size = {}", s.gaussian_size);
        let _ = writeln!(o, "global_threshold = {}", s.global_threshold);
        let _ = writeln!(o, "min_blob_area = {}", s.min_blob_area);
        let _ = writeln!(o, "fov_threshold = {}", s.fov_threshold);
        let _ = writeln!(o, "fov_erode_radius = {}", s.fov_erode_radius);
        let _ = writeln!(o, "\n[skeleton]");
        let _ = writeln!(o, "gap_se_length = {}", k.gap_se_length);
        let _ = writeln!(o, "gap_angle_step = {}", k.gap_angle_step);
        let _ = writeln!(o, "prune_length = {}", k.prune_length);
        let _ = writeln!(o, "\n[caliper]");
        let _ = writeln!(o, "normal_factor = {}", c.normal_factor);
        let _ = writeln!(o, "tangent_window = {}", c.tangent_window);
        let _ = writeln!(o, "kmeans_max_iter = {}", c.kmeans_max_iter);
        let _ = writeln!(o, "kmeans_tol = {}", c.kmeans_tol);
        let _ = writeln!(o, "row_join = {}", c.row_join);
        let _ = writeln!(o, "width_mode = {}", c.width_mode);
        let _ = writeln!(o, "click_radius = {}", c.click_radius);
        let _ = writeln!(o, "\n[pulse]");
        let _ = writeln!(o, "sg_window = {}", p.sg_window);
        let _ = writeln!(o, "sg_order = {}", p.sg_order);
        let _ = writeln!(o, "lowpass_hz = {}", p.lowpass_hz);
        let _ = writeln!(o, "lowpass_taps = {}", p.lowpass_taps);
        let _ = writeln!(o, "fps = {}", self.fps);
        let _ = writeln!(o, "carry_radius = {}", self.carry_radius);
        let _ = writeln!(o, "heart_rate_formula = {}", self.heart_rate_formula);
        let _ = writeln!(o, "\n[eval]");
        let _ = writeln!(o, "mean_error_form = {}", self.mean_error_form);
        let _ = writeln!(o, "match_radius = {}", self.match_radius);
        let _ = writeln!(o, "\n[run]");
        let _ = writeln!(o, "seed = {}", self.seed);
        o
    }
}

/// Reads a scene description: one `[scene]` block and any number of
/// `[vessel]` blocks. Field errors name the offending key, for example
/// `vessels[1].pulse_frequency`.
pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let doc = parse_ini(text)?;
    let mut scene = SceneSpec::default();
    let mut vessel_blocks = Vec::new();
    for sec in &doc.sections {
        match sec.name.as_str() {
            "scene" => {
                for e in &sec.entries {
                    let field = format!("scene.{}", e.key);
                    let (f, raw) = (field.as_str(), e.value.as_str());
                    match e.key.as_str() {
                        "width" => scene.width = value(f, raw)?,
                        "height" => scene.height = value(f, raw)?,
                        "background" => scene.background = value(f, raw)?,
                        "gradient" => scene.gradient = value(f, raw)?,
                        "noise_sigma" => scene.noise_sigma = value(f, raw)?,
                        "fov_radius" => scene.fov_radius = Some(value(f, raw)?),
                        "fps" => scene.fps = value(f, raw)?,
                        "duration" => scene.duration = value(f, raw)?,
                        "seed" => scene.seed = value(f, raw)?,
                        _ => return Err(Error::validation(f, "unknown setting")),
                    }
                }
            }
            "vessel" => vessel_blocks.push(sec),
            other => {
                return Err(Error::Parse { line: sec.line, message: format!("unknown section [{other}]") });
            }
        }
    }
    for (i, sec) in vessel_blocks.into_iter().enumerate() {
        scene.vessels.push(parse_vessel(i, sec)?);
    }
    scene.validate()?;
    Ok(scene)
}

pub fn load_scene(path: &Path) -> Result<SceneSpec> {
    parse_scene(&read_text(path)?)
}

fn parse_vessel(i: usize, sec: &IniSection) -> Result<VesselSpec> {
    const KEYS: [&str; 15] = [
        "points", "start", "control", "end", "width", "width_end", "width_amplitude", "width_period",
        "intensity", "clr_width", "clr_boost", "pulse_amplitude", "pulse_frequency", "pulse_phase", "kind",
    ];
    let field = |k: &str| format!("vessels[{i}].{k}");
    for e in &sec.entries {
        if !KEYS.contains(&e.key.as_str()) {
            return Err(Error::validation(field(&e.key), "unknown setting"));
        }
    }
    let get = |k: &str| sec.get(k).map(|e| e.value.as_str());
    let num = |k: &str| -> Result<Option<f64>> { get(k).map(|r| value(&field(k), r)).transpose() };
    let need = |k: &str| -> Result<f64> { num(k)?.ok_or_else(|| Error::validation(field(k), "missing")) };

    let curve = match (get("points"), get("start"), get("control"), get("end")) {
        (Some(p), None, None, None) => Curve::Polyline(parse_points(&field("points"), p)?),
        (None, Some(s), Some(c), Some(e)) => Curve::Quadratic {
            start: parse_point(&field("start"), s)?,
            control: parse_point(&field("control"), c)?,
            end: parse_point(&field("end"), e)?,
        },
        _ => {
            return Err(Error::validation(
                field("points"),
                "give either `points` or all of `start`, `control` and `end`",
            ))
        }
    };
    let base = need("width")?;
    let width = match (num("width_end")?, num("width_amplitude")?, num("width_period")?) {
        (None, None, None) => WidthProfile::Constant(base),
        (Some(end), None, None) => WidthProfile::Taper { start: base, end },
        (None, Some(amplitude), Some(period)) => {
            if !(period > 0.0) {
                return Err(Error::validation(field("width_period"), "must be positive"));
            }
            WidthProfile::Sinusoidal { base, amplitude, period }
        }
        _ => {
            return Err(Error::validation(
                field("width"),
                "use `width_end` for a taper or `width_amplitude` with `width_period` for a modulation",
            ))
        }
    };
    let mut v = VesselSpec::new(curve, base, need("intensity")?);
    v.width = width;
    v.clr = match (num("clr_width")?, num("clr_boost")?) {
        (None, None) => None,
        (Some(width), Some(boost)) => Some(CentralReflex { width, boost }),
        _ => return Err(Error::validation(field("clr_width"), "`clr_width` and `clr_boost` go together")),
    };
    v.pulsation = match (num("pulse_amplitude")?, num("pulse_frequency")?) {
        (None, None) => None,
        (Some(amplitude), Some(frequency)) => Some(Pulsation {
            amplitude,
            frequency,
            phase: num("pulse_phase")?.unwrap_or(0.0),
        }),
        _ => {
            return Err(Error::validation(
                field("pulse_frequency"),
                "`pulse_amplitude` and `pulse_frequency` go together",
            ))
        }
    };
    if let Some(k) = get("kind") {
        v.kind = VesselKind::from_str(k).map_err(|e| Error::validation(field("kind"), e))?;
    }
    Ok(v)
}

fn fmt_point(p: (f64, f64)) -> String {
    format!("{},{}", p.0, p.1)
}

/// Serializes a scene back to the text format read by [`parse_scene`].
pub fn scene_to_ini(scene: &SceneSpec) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "[scene]");
    let _ = writeln!(o, "width = {}", scene.width);
    let _ = writeln!(o, "height = {}", scene.height);
    let _ = writeln!(o, "background = {}", scene.background);
    let _ = writeln!(o, "gradient = {}", scene.gradient);
    let _ = writeln!(o, "noise_sigma = {}", scene.noise_sigma);
    if let Some(r) = scene.fov_radius {
        let _ = writeln!(o, "fov_radius = {r}");
    }
    let _ = writeln!(o, "fps = {}", scene.fps);
    let _ = writeln!(o, "duration = {}", scene.duration);
    let _ = writeln!(o, "seed = {}", scene.seed);
    for v in &scene.vessels {
        let _ = writeln!(o, "\n[vessel]");
        match &v.curve {
            Curve::Polyline(p) => {
                let pts: Vec<String> = p.iter().map(|&q| fmt_point(q)).collect();
                let _ = writeln!(o, "points = {}", pts.join("; "));
            }
            Curve::Quadratic { start, control, end } => {
                let _ = writeln!(o, "start = {}", fmt_point(*start));
                let _ = writeln!(o, "control = {}", fmt_point(*control));
                let _ = writeln!(o, "end = {}", fmt_point(*end));
            }
        }
        match v.width {
            WidthProfile::Constant(w) => {
                let _ = writeln!(o, "width = {w}");
            }
            WidthProfile::Taper { start, end } => {
                let _ = writeln!(o, "width = {start}\nwidth_end = {end}");
            }
            WidthProfile::Sinusoidal { base, amplitude, period } => {
                let _ = writeln!(o, "width = {base}\nwidth_amplitude = {amplitude}\nwidth_period = {period}");
            }
        }
        let _ = writeln!(o, "intensity = {}", v.intensity);
        if let Some(c) = v.clr {
            let _ = writeln!(o, "clr_width = {}\nclr_boost = {}", c.width, c.boost);
        }
        if let Some(p) = v.pulsation {
            let _ = writeln!(
                o,
                "pulse_amplitude = {}\npulse_frequency = {}\npulse_phase = {}",
                p.amplitude, p.frequency, p.phase
            );
        }
        let _ = writeln!(o, "kind = {}", v.kind);
    }
    o
}
