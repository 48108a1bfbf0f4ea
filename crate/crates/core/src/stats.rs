//! Correlation and distance machinery: Pearson's r, pairwise distance
//! matrices over R-formant profiles, Hamming distance and the Mantel
//! permutation test.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isochrony::manhattan;
use crate::profile::RFormantProfile;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Pearson product-moment correlation, clamped to `[-1, 1]`.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort("Pearson's r needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::ZeroVariance("first vector"));
    }
    if !(syy > 0.0) {
        return Err(Error::ZeroVariance("second vector"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Labelled symmetric matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = labels.len();
        if m < 2 {
            return Err(Error::TooShort(format!("distance matrix needs 2 labels, got {m}")));
        }
        if rows.len() != m || rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInput(format!("distance matrix must be {m} x {m}")));
        }
        for i in 0..m {
            if rows[i][i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..m {
                let v = rows[i][j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("bad distance {v} at ({i}, {j})")));
                }
                if (v - rows[j][i]).abs() > SYMMETRY_TOLERANCE * v.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            labels,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix from a pairwise function evaluated once per `i < j`.
    pub fn from_fn(
        labels: Vec<String>,
        mut dist: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let m = labels.len();
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let d = dist(i, j)?;
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
        Self::new(labels, rows)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.size())
    }

    /// Strict upper triangle in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let m = self.size();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect()
    }

    /// Rows and columns reordered so that new index `k` is old `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let m = self.size();
        let mut values = Vec::with_capacity(m * m);
        for &i in order {
            for &j in order {
                values.push(self.get(i, j));
            }
        }
        Self {
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            values,
        }
    }

    /// CSV with a header row and a label column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(self.rows()) {
            out.push_str(&csv_field(label));
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Manhattan,
    Hamming,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Manhattan => "manhattan",
            Metric::Hamming => "hamming",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "manhattan" => Ok(Metric::Manhattan),
            "hamming" => Ok(Metric::Hamming),
            _ => Err(Error::InvalidParameter(format!(
                "unknown metric {s:?} (expected manhattan or hamming)"
            ))),
        }
    }
}

/// Number of positions that differ once both vectors are rounded to two
/// decimal places.
pub fn hamming_distance(a: &[f64], b: &[f64]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let q = |v: f64| (v * 100.0).round();
    Ok(a.iter().zip(b).filter(|(x, y)| q(**x) != q(**y)).count())
}

pub fn metric_distance(metric: Metric, a: &[f64], b: &[f64]) -> Result<f64> {
    match metric {
        Metric::Manhattan => manhattan(a, b),
        Metric::Hamming => hamming_distance(a, b).map(|d| d as f64),
    }
}

/// Pairwise distances between the bin vectors of same-domain profiles.
pub fn distance_matrix(profiles: &[RFormantProfile], metric: Metric) -> Result<DistanceMatrix> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::TooShort("no profiles".into()))?;
    for p in profiles {
        if p.domain != first.domain {
            return Err(Error::InvalidInput(format!(
                "mixed domains: {} and {}",
                first.domain, p.domain
            )));
        }
        if p.bins.len() != first.bins.len() {
            return Err(Error::LengthMismatch {
                left: first.bins.len(),
                right: p.bins.len(),
            });
        }
    }
    let labels = profiles.iter().map(|p| p.label.clone()).collect();
    DistanceMatrix::from_fn(labels, |i, j| {
        metric_distance(metric, &profiles[i].bins, &profiles[j].bins)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MantelResult {
    pub r: f64,
    pub p: f64,
    pub permutations: usize,
}

impl MantelResult {
    pub fn significance(&self) -> &'static str {
        significance(self.p)
    }
}

/// `**` for p <= 0.01, `*` for p <= 0.05, otherwise `ns`.
pub fn significance(p: f64) -> &'static str {
    if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else {
        "ns"
    }
}

/// Two-tailed Mantel test between two distance matrices.
///
/// `r` is Pearson's r between the strict upper triangles. Each permutation
/// reorders the rows and columns of `b` jointly; `p` counts permutations with
/// `|r_perm| >= |r|`, plus one for the observed ordering, over
/// `permutations + 1`. The permutation stream is a ChaCha8 generator seeded
/// with `seed`.
pub fn mantel(
    a: &DistanceMatrix,
    b: &DistanceMatrix,
    permutations: usize,
    seed: u64,
) -> Result<MantelResult> {
    if a.labels() != b.labels() {
        return Err(Error::InvalidInput("Mantel matrices must share labels and order".into()));
    }
    let m = a.size();
    if m < 3 {
        return Err(Error::TooShort(format!("Mantel test needs m >= 3, got {m}")));
    }
    if permutations < 99 {
        return Err(Error::InvalidParameter(format!(
            "Mantel test needs at least 99 permutations, got {permutations}"
        )));
    }
    let x = a.upper_triangle();
    let r = pearson_r(&x, &b.upper_triangle())?;
    let threshold = r.abs() * (1.0 - 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    let mut y = Vec::with_capacity(x.len());
    let mut extreme = 0usize;
    for _ in 0..permutations {
        order.shuffle(&mut rng);
        y.clear();
        for i in 0..m {
            for j in i + 1..m {
                y.push(b.get(order[i], order[j]));
            }
        }
        // a permuted triangle with zero variance cannot arise: it is a
        // rearrangement of the observed one
        let rp = pearson_r(&x, &y)?;
        if rp.abs() >= threshold {
            extreme += 1;
        }
    }
    Ok(MantelResult {
        r,
        p: (1 + extreme) as f64 / (1 + permutations) as f64,
        permutations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub pair: String,
    pub count: usize,
    pub mean_r: f64,
    pub min_label: String,
    pub min_r: f64,
    pub max_label: String,
    pub max_r: f64,
}

/// Mean, minimum and maximum of per-utterance correlations. Ties go to the
/// first label in sort order.
pub fn correlation_summary(
    per_utterance_r: &BTreeMap<String, f64>,
    pair_name: &str,
) -> Result<CorrelationSummary> {
    let mut entries = per_utterance_r.iter();
    let (first_label, &first_r) = entries
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("no correlations for {pair_name}")))?;
    let mut min = (first_label, first_r);
    let mut max = (first_label, first_r);
    for (label, &r) in entries {
        if r < min.1 {
            min = (label, r);
        }
        if r > max.1 {
            max = (label, r);
        }
    }
    let count = per_utterance_r.len();
    Ok(CorrelationSummary {
        pair: pair_name.to_string(),
        count,
        mean_r: per_utterance_r.values().sum::<f64>() / count as f64,
        min_label: min.0.clone(),
        min_r: min.1,
        max_label: max.0.clone(),
        max_r: max.1,
    })
}
