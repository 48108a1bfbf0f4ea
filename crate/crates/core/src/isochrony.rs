//! Annotation-based isochrony metrics.
//!
//! The raw and normalised Pairwise Variability Indices are distances between
//! the two shifted subvectors `DA = (d1..d{n-1})` and `DB = (d2..dn)` of a
//! duration vector: rPVI is a scaled Manhattan distance and nPVI a scaled
//! Canberra distance, which is why
//!
//! ```text
//! rpvi(D) = 100 * manhattan(DA, DB) / (n - 1)
//! npvi(D) = 200 * canberra(DA, DB) / (n - 1)
//! ```
//!
//! hold exactly. Both discard the sign of each difference, so they measure
//! evenness of duration rather than alternation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Overlap between neighbouring intervals tolerated in an annotation tier.
pub const OVERLAP_TOLERANCE_S: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

impl Interval {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Labelled, non-overlapping intervals in ascending time order.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTier {
    name: String,
    intervals: Vec<Interval>,
}

impl AnnotationTier {
    pub fn new(name: impl Into<String>, intervals: Vec<Interval>) -> Result<Self> {
        for (i, iv) in intervals.iter().enumerate() {
            if !(iv.end > iv.start) || !iv.start.is_finite() || !iv.end.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "interval {i} ({}..{}) must have end > start",
                    iv.start, iv.end
                )));
            }
        }
        for (i, w) in intervals.windows(2).enumerate() {
            if w[1].start < w[0].start {
                return Err(Error::InvalidInput(format!(
                    "interval {} starts before interval {i}",
                    i + 1
                )));
            }
            if w[1].start < w[0].end - OVERLAP_TOLERANCE_S {
                return Err(Error::InvalidInput(format!(
                    "interval {} overlaps interval {i}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            intervals,
        })
    }

    /// Reads a `start_s,end_s,label` CSV. A non-numeric first row is taken
    /// as a header; lines starting with `#` are skipped.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse_csv(&text, name).map_err(|(line, message)| Error::Annotation {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    fn parse_csv(text: &str, name: String) -> std::result::Result<Self, (u64, String)> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut intervals = Vec::new();
        for (index, record) in reader.records().enumerate() {
            let line = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
            let record = record.map_err(|e| (0, e.to_string()))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() < 2 {
                return Err((line(&record), "expected start_s,end_s[,label]".into()));
            }
            let start = record[0].parse::<f64>();
            let end = record[1].parse::<f64>();
            let (start, end) = match (start, end) {
                (Ok(s), Ok(e)) => (s, e),
                _ if index == 0 => continue,
                _ => return Err((line(&record), "non-numeric start or end".into())),
            };
            intervals.push(Interval {
                start,
                end,
                label: record.get(2).unwrap_or("").to_string(),
            });
        }
        Self::new(name, intervals).map_err(|e| (0, e.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Durations of the labelled intervals; gaps between them are not included.
    pub fn durations(&self) -> Vec<f64> {
        self.intervals.iter().map(Interval::duration).collect()
    }
}

/// At least two strictly positive durations.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationVector(Vec<f64>);

impl DurationVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooShort(format!(
                "duration vector needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("duration {v} must be > 0")));
        }
        Ok(Self(values))
    }

    pub fn from_tier(tier: &AnnotationTier) -> Result<Self> {
        Self::new(tier.durations())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * factor).collect())
    }
}

/// `(d1..d{n-1}, d2..dn)`.
pub fn shifted_subvectors(d: &DurationVector) -> (&[f64], &[f64]) {
    let v = d.values();
    (&v[..v.len() - 1], &v[1..])
}

/// Raw Pairwise Variability Index.
pub fn rpvi(d: &DurationVector) -> f64 {
    let v = d.values();
    let sum: f64 = v.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    100.0 * sum / (v.len() - 1) as f64
}

/// Normalised Pairwise Variability Index, in `[0, 200)`.
pub fn npvi(d: &DurationVector) -> f64 {
    let v = d.values();
    let sum: f64 = v
        .windows(2)
        .map(|w| (w[0] - w[1]).abs() / ((w[0] + w[1]) / 2.0))
        .sum();
    100.0 * sum / (v.len() - 1) as f64
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub fn manhattan(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn canberra(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let denom = x.abs() + y.abs();
            if denom > 0.0 {
                Ok((x - y).abs() / denom)
            } else {
                Err(Error::InvalidInput("Canberra term with |a| + |b| = 0".into()))
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierRates {
    pub count: usize,
    pub total_s: f64,
    pub mean_s: f64,
    pub rate_hz: f64,
}

/// Count, total and mean interval duration, and units per second.
pub fn rates_from_annotation(tier: &AnnotationTier) -> Result<TierRates> {
    if tier.is_empty() {
        return Err(Error::InvalidInput(format!("tier {:?} has no intervals", tier.name())));
    }
    let count = tier.len();
    let total_s: f64 = tier.durations().iter().sum();
    Ok(TierRates {
        count,
        total_s,
        mean_s: total_s / count as f64,
        rate_hz: count as f64 / total_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantPrediction {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
}

/// Expected R-formant range from a word (slower) and syllable (faster) rate.
/// The rates are swapped if given in the wrong order.
pub fn predict_formant_range(word_rate: f64, syllable_rate: f64) -> Result<FormantPrediction> {
    if !(word_rate > 0.0 && syllable_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rates must be > 0 (got {word_rate}, {syllable_rate})"
        )));
    }
    let (lo, hi) = if word_rate <= syllable_rate {
        (word_rate, syllable_rate)
    } else {
        (syllable_rate, word_rate)
    };
    Ok(FormantPrediction {
        lo,
        hi,
        center: (lo + hi) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deviation {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

/// Counts of z-scored adjacent pairs per sign quadrant. Zero counts as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QuadrantCounts {
    pub neg_neg: usize,
    pub neg_pos: usize,
    pub pos_neg: usize,
    pub pos_pos: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WagnerScatter {
    /// `(z(d_k), z(d_{k+1}))` for `k = 1..n-1`.
    pub pairs: Vec<(f64, f64)>,
    pub quadrants: QuadrantCounts,
}

/// Z-scored adjacent-duration pairs and their quadrant tallies.
pub fn wagner_pairs(d: &DurationVector, deviation: Deviation) -> Result<WagnerScatter> {
    let v = d.values();
    if v.len() < 3 {
        return Err(Error::TooShort(format!(
            "Wagner scatter needs at least 3 durations, got {}",
            v.len()
        )));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    let denom = match deviation {
        Deviation::Population => n,
        Deviation::Sample => n - 1.0,
    };
    let sd = (ss / denom).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("duration vector"));
    }
    let z: Vec<f64> = v.iter().map(|x| (x - mean) / sd).collect();
    let pairs: Vec<(f64, f64)> = z.windows(2).map(|w| (w[0], w[1])).collect();
    let mut quadrants = QuadrantCounts::default();
    for &(a, b) in &pairs {
        match (a >= 0.0, b >= 0.0) {
            (false, false) => quadrants.neg_neg += 1,
            (false, true) => quadrants.neg_pos += 1,
            (true, false) => quadrants.pos_neg += 1,
            (true, true) => quadrants.pos_pos += 1,
        }
    }
    Ok(WagnerScatter { pairs, quadrants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DurationVector {
        DurationVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn subvectors() {
        let d = dv(&[2.0, 4.0, 2.0, 4.0, 2.0, 4.0]);
        let (a, b) = shifted_subvectors(&d);
        assert_eq!(a, &[2.0, 4.0, 2.0, 4.0, 2.0]);
        assert_eq!(b, &[4.0, 2.0, 4.0, 2.0, 4.0]);
        let d = dv(&[1.0, 3.0]);
        assert_eq!(shifted_subvectors(&d), (&[1.0][..], &[3.0][..]));
        assert!(DurationVector::new(vec![1.0]).is_err());
        assert!(DurationVector::new(vec![1.0, 0.0]).is_err());
        assert!(DurationVector::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn rpvi_values() {
        assert_eq!(rpvi(&dv(&[2.0, 4.0, 2.0, 4.0, 2.0, 4.0])), 200.0);
        assert_eq!(rpvi(&dv(&[2.0, 4.0, 6.0, 8.0, 10.0, 12.0])), 200.0);
        assert_eq!(rpvi(&dv(&[5.0; 4])), 0.0);
        assert_eq!(rpvi(&dv(&[1.0, 3.0, 2.0])), 150.0);
    }

    #[test]
    fn npvi_values() {
        let alt = npvi(&dv(&[2.0, 4.0, 2.0, 4.0, 2.0, 4.0]));
        let geo = npvi(&dv(&[2.0, 4.0, 8.0, 16.0, 32.0, 64.0]));
        assert!((alt - 66.67).abs() <= 0.01);
        assert!((geo - 66.67).abs() <= 0.01);
        assert!((alt - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(npvi(&dv(&[7.0; 3])), 0.0);
        assert_eq!(npvi(&dv(&[1.0, 3.0])), 100.0);
    }

    #[test]
    fn distances() {
        let a = [2.0, 4.0, 2.0, 4.0, 2.0];
        let b = [4.0, 2.0, 4.0, 2.0, 4.0];
        assert_eq!(manhattan(&a, &b).unwrap(), 10.0);
        assert_eq!(manhattan(&a, &a).unwrap(), 0.0);
        assert_eq!(manhattan(&[0.0], &[3.0]).unwrap(), 3.0);
        assert!((canberra(&a, &b).unwrap() - 5.0 / 3.0).abs() < 1e-9);
        assert_eq!(canberra(&a, &a).unwrap(), 0.0);
        assert_eq!(canberra(&[1.0], &[3.0]).unwrap(), 0.5);
        assert!(manhattan(&[1.0], &[1.0, 2.0]).is_err());
        assert!(canberra(&[1.0], &[1.0, 2.0]).is_err());
        assert!(canberra(&[0.0], &[0.0]).is_err());
    }

    fn tier(durations: &[f64]) -> AnnotationTier {
        let mut t = 0.0;
        let intervals = durations
            .iter()
            .map(|&d| {
                let iv = Interval { start: t, end: t + d, label: "x".into() };
                t += d + 0.05;
                iv
            })
            .collect();
        AnnotationTier::new("t", intervals).unwrap()
    }

    #[test]
    fn rates() {
        let r = rates_from_annotation(&tier(&[9.667 / 30.0; 30])).unwrap();
        assert_eq!(r.count, 30);
        assert!((r.total_s - 9.667).abs() < 1e-9);
        assert!((r.mean_s - 0.322).abs() < 0.001);
        assert!((r.rate_hz - 3.10).abs() <= 0.01);
        assert!((r.rate_hz * r.total_s - 30.0).abs() < 1e-9);
        let r = rates_from_annotation(&tier(&[1.0])).unwrap();
        assert_eq!(r.rate_hz, 1.0);
        let r = rates_from_annotation(&tier(&[0.25; 10])).unwrap();
        assert!((r.rate_hz - 4.0).abs() < 1e-12);
        let empty = AnnotationTier::new("e", vec![]).unwrap();
        assert!(rates_from_annotation(&empty).is_err());
    }

    #[test]
    fn prediction() {
        let p = predict_formant_range(3.1, 6.21).unwrap();
        assert_eq!((p.lo, p.hi), (3.1, 6.21));
        assert!((p.center - 4.655).abs() < 1e-12);
        assert_eq!(format!("{:.1}", p.center), "4.7");
        let p = predict_formant_range(4.0, 4.0).unwrap();
        assert_eq!((p.lo, p.hi, p.center), (4.0, 4.0, 4.0));
        assert_eq!(predict_formant_range(6.0, 2.0).unwrap().center, 4.0);
        assert!(predict_formant_range(0.0, 2.0).is_err());
    }

    #[test]
    fn wagner_example() {
        let w = wagner_pairs(&dv(&[2.0, 4.0, 2.0, 4.0]), Deviation::Population).unwrap();
        assert_eq!(w.pairs, vec![(-1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)]);
        assert_eq!(
            w.quadrants,
            QuadrantCounts { neg_neg: 0, neg_pos: 2, pos_neg: 1, pos_pos: 0 }
        );
        assert!(matches!(
            wagner_pairs(&dv(&[3.0; 5]), Deviation::Population),
            Err(Error::ZeroVariance(_))
        ));
        assert!(wagner_pairs(&dv(&[1.0, 2.0]), Deviation::Population).is_err());
    }

    #[test]
    fn wagner_increasing_never_pos_neg() {
        let d = dv(&[1.0, 1.5, 2.5, 2.6, 4.0, 7.0, 7.5]);
        for dev in [Deviation::Population, Deviation::Sample] {
            let w = wagner_pairs(&d, dev).unwrap();
            assert_eq!(w.quadrants.pos_neg, 0);
            assert_eq!(w.pairs.len(), 6);
        }
    }

    #[test]
    fn zero_z_counts_as_positive() {
        // mean 2, z of the middle value is exactly 0
        let w = wagner_pairs(&dv(&[1.0, 2.0, 3.0]), Deviation::Population).unwrap();
        assert_eq!(w.quadrants.neg_pos, 1);
        assert_eq!(w.quadrants.pos_pos, 1);
    }

    #[test]
    fn csv_parsing() {
        let text = "# counting\nstart_s,end_s,label\n0.0,0.5,one\n\n0.6,0.9,\"two, three\"\n1.0,1.2\n";
        let t = AnnotationTier::parse_csv(text, "w".into()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.intervals()[1].label, "two, three");
        assert_eq!(t.intervals()[2].label, "");
        let no_header = "0,1,a\n1,2,b\n";
        assert_eq!(AnnotationTier::parse_csv(no_header, "w".into()).unwrap().len(), 2);
        assert!(AnnotationTier::parse_csv("0,1,a\nx,2,b\n", "w".into()).is_err());
        assert!(AnnotationTier::parse_csv("0,1,a\n0.5,2,b\n", "w".into()).is_err());
        assert!(AnnotationTier::parse_csv("1,0.5,a\n", "w".into()).is_err());
        // touching within tolerance is fine
        assert!(AnnotationTier::parse_csv("0,1,a\n0.9999995,2,b\n", "w".into()).is_ok());
    }
}
