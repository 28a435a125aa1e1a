//! Segmentation scores, width-error statistics and annotation files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// Pixel-wise confusion counts restricted to `fov`.
pub fn confusion(pred: &BinaryMask, truth: &BinaryMask, fov: &BinaryMask) -> Result<ConfusionCounts> {
    pred.check_shape(truth)?;
    pred.check_shape(fov)?;
    let mut c = ConfusionCounts::default();
    for ((&p, &t), &f) in pred.as_slice().iter().zip(truth.as_slice()).zip(fov.as_slice()) {
        if !f {
            continue;
        }
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegScores {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

pub fn seg_scores(c: &ConfusionCounts) -> Result<SegScores> {
    let ratio = |num: u64, den: u64, name: &'static str| {
        if den == 0 {
            Err(Error::UndefinedMetric(name))
        } else {
            Ok(num as f64 / den as f64)
        }
    };
    Ok(SegScores {
        accuracy: ratio(c.tp + c.tn, c.total(), "accuracy")?,
        sensitivity: ratio(c.tp, c.tp + c.fn_, "sensitivity")?,
        specificity: ratio(c.tn, c.tn + c.fp, "specificity")?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthComparison {
    pub estimated: Vec<f64>,
    pub truth: Vec<f64>,
}

impl WidthComparison {
    pub fn new(estimated: Vec<f64>, truth: Vec<f64>) -> Result<Self> {
        if estimated.len() != truth.len() {
            return Err(Error::invalid(
                "width comparison",
                format!("{} estimates vs {} truth values", estimated.len(), truth.len()),
            ));
        }
        Ok(Self { estimated, truth })
    }

    pub fn len(&self) -> usize {
        self.estimated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimated.is_empty()
    }

    /// χ_i = ω_i − ψ_i.
    pub fn diffs(&self) -> Vec<f64> {
        self.estimated.iter().zip(&self.truth).map(|(w, p)| w - p).collect()
    }
}

/// How the mean width error is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanErrorForm {
    /// Arithmetic mean of χ_i.
    #[default]
    Mean,
    /// Mean of 1/χ_i, as the formula is typeset; undefined when any χ_i = 0.
    Reciprocal,
}

impl std::str::FromStr for MeanErrorForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "reciprocal" => Ok(Self::Reciprocal),
            _ => Err(Error::invalid("mean error form", format!("`{s}` (expected mean or reciprocal)"))),
        }
    }
}

impl std::fmt::Display for MeanErrorForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mean => "mean",
            Self::Reciprocal => "reciprocal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthErrorStats {
    pub mu_mean: f64,
    pub sigma_mean: f64,
    pub mu_error: f64,
    pub sigma_error: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64], center: f64) -> f64 {
    (v.iter().map(|x| (x - center).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn width_error(w: &WidthComparison, form: MeanErrorForm) -> Result<WidthErrorStats> {
    if w.len() < 2 {
        return Err(Error::TooFewPoints(w.len()));
    }
    let chi = w.diffs();
    let mu_error = match form {
        MeanErrorForm::Mean => mean(&chi),
        MeanErrorForm::Reciprocal => {
            if chi.contains(&0.0) {
                return Err(Error::UndefinedMetric("reciprocal mean error"));
            }
            chi.iter().map(|c| 1.0 / c).sum::<f64>() / chi.len() as f64
        }
    };
    let mu_mean = mean(&w.estimated);
    Ok(WidthErrorStats {
        mu_mean,
        sigma_mean: sample_std(&w.estimated, mu_mean),
        mu_error,
        sigma_error: sample_std(&chi, mu_error),
    })
}

/// One annotated width: row of `image,segment,point,cx,cy,width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image: String,
    pub segment: usize,
    pub point: usize,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
}

/// Annotations grouped by `(image, segment)`, each group ordered by point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthAnnotation {
    pub segments: BTreeMap<(String, usize), Vec<AnnotationRecord>>,
}

impl GroundTruthAnnotation {
    pub fn from_records(records: Vec<AnnotationRecord>) -> Self {
        let mut segments: BTreeMap<(String, usize), Vec<AnnotationRecord>> = BTreeMap::new();
        for r in records {
            segments.entry((r.image.clone(), r.segment)).or_default().push(r);
        }
        for v in segments.values_mut() {
            v.sort_by_key(|r| r.point);
        }
        Self { segments }
    }

    pub fn len(&self) -> usize {
        self.segments.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &AnnotationRecord> {
        self.segments.values().flatten()
    }
}

pub fn parse_annotations<R: std::io::Read>(reader: R) -> Result<GroundTruthAnnotation> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let rec: AnnotationRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if !(rec.width > 0.0) || !rec.width.is_finite() {
            return Err(Error::validation(
                format!("line {line}: width"),
                format!("must be positive, got {}", rec.width),
            ));
        }
        if !(rec.cx >= 0.0 && rec.cy >= 0.0 && rec.cx.is_finite() && rec.cy.is_finite()) {
            return Err(Error::validation(
                format!("line {line}: cx,cy"),
                format!("({}, {}) is not an image coordinate", rec.cx, rec.cy),
            ));
        }
        records.push(rec);
    }
    Ok(GroundTruthAnnotation::from_records(records))
}

pub fn load_annotations(path: &Path) -> Result<GroundTruthAnnotation> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_annotations(file)
}

pub fn write_annotations<W: std::io::Write>(writer: W, records: &[AnnotationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| Error::invalid("annotation csv", e.to_string()))?;
    }
    w.flush().map_err(|e| Error::invalid("annotation csv", e.to_string()))?;
    Ok(())
}

/// Annotated widths paired with estimates at the nearest centerline point.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedWidths {
    pub comparison: WidthComparison,
    /// Annotations with no centerline point within the match radius.
    pub unmatched: usize,
}

/// Pairs each annotation with the estimated width at the nearest centerline
/// point within `radius` px.
pub fn match_widths(
    points: &[(usize, usize)],
    widths: &[f64],
    annotations: &[AnnotationRecord],
    radius: f64,
) -> MatchedWidths {
    let mut estimated = Vec::new();
    let mut truth = Vec::new();
    let mut unmatched = 0;
    for a in annotations {
        let nearest = points
            .iter()
            .zip(widths)
            .map(|(&(x, y), &w)| ((x as f64 - a.cx).hypot(y as f64 - a.cy), w))
            .min_by(|p, q| p.0.total_cmp(&q.0));
        match nearest {
            Some((d, w)) if d <= radius => {
                estimated.push(w);
                truth.push(a.width);
            }
            _ => unmatched += 1,
        }
    }
    MatchedWidths {
        comparison: WidthComparison { estimated, truth },
        unmatched,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegReportRow {
    pub image: String,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Per-image segmentation scores plus their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegReport {
    pub rows: Vec<SegReportRow>,
    pub average: SegScores,
}

impl SegReport {
    pub fn from_rows(rows: Vec<SegReportRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::UndefinedMetric("average segmentation score"));
        }
        let n = rows.len() as f64;
        let average = SegScores {
            accuracy: rows.iter().map(|r| r.accuracy).sum::<f64>() / n,
            sensitivity: rows.iter().map(|r| r.sensitivity).sum::<f64>() / n,
            specificity: rows.iter().map(|r| r.specificity).sum::<f64>() / n,
        };
        Ok(Self { rows, average })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReportRow {
    pub image: String,
    pub segment: usize,
    pub matched: usize,
    pub unmatched: usize,
    pub mu_mean: f64,
    pub sigma_mean: f64,
    pub mu_error: f64,
    pub sigma_error: f64,
}

/// Per-segment width statistics plus their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub rows: Vec<WidthReportRow>,
    pub average: WidthErrorStats,
}

impl WidthReport {
    pub fn from_rows(rows: Vec<WidthReportRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::UndefinedMetric("average width error"));
        }
        let n = rows.len() as f64;
        let avg = |f: fn(&WidthReportRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        let average = WidthErrorStats {
            mu_mean: avg(|r| r.mu_mean),
            sigma_mean: avg(|r| r.sigma_mean),
            mu_error: avg(|r| r.mu_error),
            sigma_error: avg(|r| r.sigma_error),
        };
        Ok(Self { rows, average })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_and_inverted_predictions() {
        let truth = BinaryMask::from_fn(10, 10, |x, _| x == 0);
        let fov = BinaryMask::filled(10, 10, true);
        let c = confusion(&truth, &truth, &fov).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 10, fp: 0, tn: 90, fn_: 0 });
        let s = seg_scores(&c).unwrap();
        assert_eq!((s.accuracy, s.sensitivity, s.specificity), (1.0, 1.0, 1.0));
        let inv = confusion(&truth.not(), &truth, &fov).unwrap();
        assert_eq!((inv.tp, inv.tn), (0, 0));
    }

    #[test]
    fn confusion_matches_pixel_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = BinaryMask::from_fn(8, 8, |_, _| rng.random_bool(0.5));
            let t = BinaryMask::from_fn(8, 8, |_, _| rng.random_bool(0.5));
            let f = BinaryMask::from_fn(8, 8, |_, _| rng.random_bool(0.8));
            let c = confusion(&p, &t, &f).unwrap();
            let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
            for y in 0..8 {
                for x in 0..8 {
                    if !f.get(x, y) {
                        continue;
                    }
                    match (p.get(x, y), t.get(x, y)) {
                        (true, true) => tp += 1,
                        (true, false) => fp += 1,
                        (false, false) => tn += 1,
                        (false, true) => fn_ += 1,
                    }
                }
            }
            assert_eq!(c, ConfusionCounts { tp, fp, tn, fn_ });
            assert_eq!(c.total() as usize, f.count());
            if let Ok(s) = seg_scores(&c) {
                let (pos, neg) = ((c.tp + c.fn_) as f64, (c.tn + c.fp) as f64);
                let weighted = (s.sensitivity * pos + s.specificity * neg) / (pos + neg);
                assert!((s.accuracy - weighted).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = BinaryMask::new(4, 4);
        let b = BinaryMask::new(4, 5);
        assert!(matches!(confusion(&a, &b, &a), Err(Error::Shape(..))));
    }

    #[test]
    fn score_formulas() {
        let s = seg_scores(&ConfusionCounts { tp: 3, fn_: 1, tn: 5, fp: 1 }).unwrap();
        assert!((s.accuracy - 0.8).abs() < 1e-12);
        assert!((s.sensitivity - 0.75).abs() < 1e-12);
        assert!((s.specificity - 5.0 / 6.0).abs() < 1e-12);
        let e = seg_scores(&ConfusionCounts { tp: 0, fn_: 0, tn: 5, fp: 0 });
        assert!(matches!(e, Err(Error::UndefinedMetric("sensitivity"))));
    }

    #[test]
    fn width_error_values() {
        let same = WidthComparison::new(vec![5.0; 4], vec![5.0; 4]).unwrap();
        let s = width_error(&same, MeanErrorForm::Mean).unwrap();
        assert_eq!((s.mu_error, s.sigma_error), (0.0, 0.0));
        assert!(width_error(&same, MeanErrorForm::Reciprocal).is_err());

        let w = WidthComparison::new(vec![6.0, 8.0], vec![5.0, 6.0]).unwrap();
        let s = width_error(&w, MeanErrorForm::Mean).unwrap();
        assert!((s.mu_error - 1.5).abs() < 1e-12);
        assert!((s.sigma_error - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((s.mu_mean - 7.0).abs() < 1e-12);
        let r = width_error(&w, MeanErrorForm::Reciprocal).unwrap();
        assert!((r.mu_error - 0.75).abs() < 1e-12);

        let one = WidthComparison::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(width_error(&one, MeanErrorForm::Mean), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn width_error_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let est: Vec<f64> = (0..30).map(|_| rng.random_range(4.0..15.0)).collect();
        let tru: Vec<f64> = (0..30).map(|_| rng.random_range(4.0..15.0)).collect();
        let base = width_error(&WidthComparison::new(est.clone(), tru.clone()).unwrap(), MeanErrorForm::Mean).unwrap();
        let shifted = WidthComparison::new(est.iter().map(|v| v + 3.0).collect(), tru.iter().map(|v| v + 3.0).collect()).unwrap();
        let s = width_error(&shifted, MeanErrorForm::Mean).unwrap();
        assert!((s.sigma_error - base.sigma_error).abs() < 1e-9);
        let scaled = WidthComparison::new(est.iter().map(|v| v * -2.0).collect(), tru.iter().map(|v| v * -2.0).collect()).unwrap();
        let s = width_error(&scaled, MeanErrorForm::Mean).unwrap();
        assert!((s.sigma_error - 2.0 * base.sigma_error).abs() < 1e-9);
        let rev = WidthComparison::new(est.iter().rev().copied().collect(), tru.iter().rev().copied().collect()).unwrap();
        let s = width_error(&rev, MeanErrorForm::Mean).unwrap();
        assert!((s.sigma_error - base.sigma_error).abs() < 1e-9);
        assert!((s.mu_error - base.mu_error).abs() < 1e-9);
    }

    #[test]
    fn annotation_parsing() {
        let ok = "image,segment,point,cx,cy,width\na,1,0,10,10,5.5\na,1,1,11,10,5.0\nb,2,0,3,4,7\n";
        let g = parse_annotations(ok.as_bytes()).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.segments.len(), 2);

        let bad = "image,segment,point,cx,cy,width\na,1,0,10,10,5.5\na,1,1,11,10,-1\n";
        match parse_annotations(bad.as_bytes()) {
            Err(Error::Validation { field, .. }) => assert!(field.contains("line 3"), "{field}"),
            other => panic!("{other:?}"),
        }
        let malformed = "image,segment,point,cx,cy,width\na,1,0,10,10,5.5\na,x,1,11,10,4\n";
        assert!(matches!(parse_annotations(malformed.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn annotation_round_trip() {
        let recs = vec![
            AnnotationRecord { image: "s".into(), segment: 1, point: 0, cx: 1.25, cy: 2.5, width: 6.125 },
            AnnotationRecord { image: "s".into(), segment: 1, point: 1, cx: 2.25, cy: 2.5, width: 6.25 },
        ];
        let mut buf = Vec::new();
        write_annotations(&mut buf, &recs).unwrap();
        let g = parse_annotations(buf.as_slice()).unwrap();
        assert_eq!(g.records().cloned().collect::<Vec<_>>(), recs);
    }

    #[test]
    fn matching_within_radius() {
        let points = vec![(0, 0), (1, 0), (2, 0), (3, 0)];
        let widths = vec![4.0, 5.0, 6.0, 7.0];
        let ann = vec![
            AnnotationRecord { image: "i".into(), segment: 1, point: 0, cx: 2.2, cy: 1.0, width: 6.5 },
            AnnotationRecord { image: "i".into(), segment: 1, point: 1, cx: 20.0, cy: 20.0, width: 6.5 },
        ];
        let m = match_widths(&points, &widths, &ann, 3.0);
        assert_eq!(m.comparison.estimated, vec![6.0]);
        assert_eq!(m.unmatched, 1);
    }
}
