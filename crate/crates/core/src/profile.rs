//! R-formant extraction from a detrended low-frequency spectrum.
//!
//! The dominant frequencies are chosen by rank over the band samples (no
//! local-maximum requirement unless [`PeakSelection::LocalMaxima`] is asked
//! for). Their min-shifted residuals weight a fixed-width histogram over the
//! band, normalised to a probability vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lts::{Domain, LongTermSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub freq: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSelection {
    /// Rank all band samples by residual.
    #[default]
    Rank,
    /// Rank only samples that are local maxima of the residual.
    LocalMaxima,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RFormantProfile {
    pub label: String,
    pub domain: Domain,
    pub band: (f64, f64),
    pub n_bins: usize,
    /// Descending by weight, ties by ascending frequency.
    pub peaks: Vec<Peak>,
    pub bins: Vec<f64>,
}

impl RFormantProfile {
    pub fn has_mass(&self) -> bool {
        self.bins.iter().any(|&b| b > 0.0)
    }
}

fn residual_of(spec: &LongTermSpectrum) -> Result<&[f64]> {
    spec.residual()
        .ok_or_else(|| Error::InvalidInput("spectrum has not been detrended".into()))
}

/// The `n` band samples with the largest residuals.
///
/// Weights are residuals minus the band minimum, so they are nonnegative.
pub fn top_n_frequencies(spec: &LongTermSpectrum, n: usize) -> Result<Vec<Peak>> {
    top_n_with(spec, n, PeakSelection::Rank)
}

pub fn top_n_with(spec: &LongTermSpectrum, n: usize, selection: PeakSelection) -> Result<Vec<Peak>> {
    let residual = residual_of(spec)?;
    if n > residual.len() {
        return Err(Error::InvalidParameter(format!(
            "{n} peaks requested from a band of {} samples",
            residual.len()
        )));
    }
    let min = residual.iter().copied().fold(f64::INFINITY, f64::min);
    let mut order: Vec<usize> = match selection {
        PeakSelection::Rank => (0..residual.len()).collect(),
        PeakSelection::LocalMaxima => (0..residual.len())
            .filter(|&i| {
                (i == 0 || residual[i] >= residual[i - 1])
                    && (i + 1 == residual.len() || residual[i] >= residual[i + 1])
            })
            .collect(),
    };
    // stable sort keeps ascending frequency among equal residuals
    order.sort_by(|&a, &b| residual[b].total_cmp(&residual[a]));
    Ok(order
        .into_iter()
        .take(n)
        .map(|i| Peak {
            freq: spec.freqs()[i],
            weight: residual[i] - min,
        })
        .collect())
}

/// Frequencies of the `n_bars` most prominent band samples, ascending.
pub fn rhythm_bars(spec: &LongTermSpectrum, n_bars: usize) -> Result<Vec<f64>> {
    let mut freqs: Vec<f64> = top_n_frequencies(spec, n_bars)?
        .into_iter()
        .map(|p| p.freq)
        .collect();
    freqs.sort_by(f64::total_cmp);
    Ok(freqs)
}

/// Histogram of peak weights over `n_bins` equal-width bins spanning `band`.
///
/// A peak at `hi` falls in the last bin. The result sums to 1 unless every
/// weight is zero, in which case it is all zeros.
pub fn weighted_bins(peaks: &[Peak], band: (f64, f64), n_bins: usize) -> Result<Vec<f64>> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty band {lo}..{hi}")));
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
    }
    let tol = 1e-9 * (hi - lo).max(1.0);
    let width = (hi - lo) / n_bins as f64;
    let mut bins = vec![0.0; n_bins];
    for p in peaks {
        if p.freq < lo - tol || p.freq > hi + tol {
            return Err(Error::InvalidInput(format!(
                "peak at {} Hz outside band {lo}..{hi}",
                p.freq
            )));
        }
        if !(p.weight >= 0.0) {
            return Err(Error::InvalidInput(format!("negative peak weight {}", p.weight)));
        }
        let idx = (((p.freq - lo) / width).floor().max(0.0) as usize).min(n_bins - 1);
        bins[idx] += p.weight;
    }
    let total: f64 = bins.iter().sum();
    if total > 0.0 {
        bins.iter_mut().for_each(|b| *b /= total);
    }
    Ok(bins)
}

/// Top-`n` peaks and their `n_bins` histogram for one detrended spectrum.
pub fn profile(spec: &LongTermSpectrum, n: usize, n_bins: usize) -> Result<RFormantProfile> {
    profile_with(spec, n, n_bins, PeakSelection::Rank)
}

pub fn profile_with(
    spec: &LongTermSpectrum,
    n: usize,
    n_bins: usize,
    selection: PeakSelection,
) -> Result<RFormantProfile> {
    let band = spec
        .band()
        .ok_or_else(|| Error::InvalidInput("spectrum has not been detrended".into()))?;
    let peaks = top_n_with(spec, n, selection)?;
    let bins = weighted_bins(&peaks, band, n_bins)?;
    Ok(RFormantProfile {
        label: spec.label().to_string(),
        domain: spec.domain(),
        band,
        n_bins,
        peaks,
        bins,
    })
}

/// Dominant R-formant cluster among a set of peaks.
///
/// Starting from the strongest peak, neighbouring peaks (in frequency order)
/// are absorbed while the gap to the next one is at most `max_gap` Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantCluster {
    pub lo: f64,
    pub hi: f64,
    /// Midpoint of `lo` and `hi`.
    pub mid: f64,
    /// Weight-averaged frequency of the cluster members.
    pub centroid: f64,
    pub members: usize,
}

pub fn dominant_cluster(peaks: &[Peak], max_gap: f64) -> Option<FormantCluster> {
    let strongest = peaks.first()?;
    let mut sorted: Vec<Peak> = peaks.to_vec();
    sorted.sort_by(|a, b| a.freq.total_cmp(&b.freq));
    let start = sorted.iter().position(|p| p.freq == strongest.freq)?;
    let gap_ok = |a: &Peak, b: &Peak| (b.freq - a.freq) <= max_gap + 1e-9;
    let mut first = start;
    while first > 0 && gap_ok(&sorted[first - 1], &sorted[first]) {
        first -= 1;
    }
    let mut last = start;
    while last + 1 < sorted.len() && gap_ok(&sorted[last], &sorted[last + 1]) {
        last += 1;
    }
    let members = &sorted[first..=last];
    let (lo, hi) = (members[0].freq, members[members.len() - 1].freq);
    let weight: f64 = members.iter().map(|p| p.weight).sum();
    let centroid = if weight > 0.0 {
        members.iter().map(|p| p.freq * p.weight).sum::<f64>() / weight
    } else {
        (lo + hi) / 2.0
    };
    Some(FormantCluster {
        lo,
        hi,
        mid: (lo + hi) / 2.0,
        centroid,
        members: members.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(points: &[(f64, f64)], band: (f64, f64)) -> LongTermSpectrum {
        let freqs = points.iter().map(|p| p.0).collect();
        let residual = points.iter().map(|p| p.1).collect();
        LongTermSpectrum::from_parts(
            Domain::Ams,
            "u",
            freqs,
            vec![1.0; points.len()],
            Some(residual),
            Some(band),
        )
        .unwrap()
    }

    fn example() -> LongTermSpectrum {
        spec(&[(2.0, 0.1), (4.2, 0.9), (4.4, 0.7), (7.0, 0.4)], (1.0, 10.0))
    }

    #[test]
    fn top_two_by_rank() {
        let peaks = top_n_frequencies(&example(), 2).unwrap();
        let freqs: Vec<f64> = peaks.iter().map(|p| p.freq).collect();
        assert_eq!(freqs, vec![4.2, 4.4]);
        assert!((peaks[0].weight - 0.8).abs() < 1e-12);
        assert!((peaks[1].weight - 0.6).abs() < 1e-12);
        assert!(top_n_frequencies(&example(), 0).unwrap().is_empty());
        assert!(top_n_frequencies(&example(), 5).is_err());
    }

    #[test]
    fn ties_by_ascending_frequency() {
        let s = spec(&[(1.0, 0.5), (2.0, 0.9), (3.0, 0.5), (4.0, 0.9)], (1.0, 4.0));
        let freqs: Vec<f64> = top_n_frequencies(&s, 4).unwrap().iter().map(|p| p.freq).collect();
        assert_eq!(freqs, vec![2.0, 4.0, 1.0, 3.0]);
    }

    #[test]
    fn local_maxima_selection() {
        let s = spec(
            &[(1.0, 0.1), (2.0, 0.9), (3.0, 0.8), (4.0, 0.2), (5.0, 0.5), (6.0, 0.3)],
            (1.0, 6.0),
        );
        let freqs: Vec<f64> = top_n_with(&s, 3, PeakSelection::LocalMaxima)
            .unwrap()
            .iter()
            .map(|p| p.freq)
            .collect();
        assert_eq!(freqs, vec![2.0, 5.0]);
    }

    #[test]
    fn bars_ascending() {
        assert_eq!(rhythm_bars(&example(), 2).unwrap(), vec![4.2, 4.4]);
        assert_eq!(rhythm_bars(&example(), 4).unwrap(), vec![2.0, 4.2, 4.4, 7.0]);
        assert_eq!(rhythm_bars(&example(), 3).unwrap(), vec![4.2, 4.4, 7.0]);
    }

    #[test]
    fn bins_hand_example() {
        let peaks = [
            Peak { freq: 4.2, weight: 0.9 },
            Peak { freq: 4.5, weight: 0.8 },
            Peak { freq: 7.1, weight: 0.3 },
        ];
        let bins = weighted_bins(&peaks, (1.0, 11.0), 10).unwrap();
        let mut expected = vec![0.0; 10];
        expected[3] = 0.85;
        expected[6] = 0.15;
        for (b, e) in bins.iter().zip(&expected) {
            assert!((b - e).abs() < 1e-12, "{bins:?}");
        }
    }

    #[test]
    fn bins_single_peak_and_clamp() {
        let bins = weighted_bins(&[Peak { freq: 10.0, weight: 0.4 }], (1.0, 10.0), 10).unwrap();
        assert_eq!(bins[9], 1.0);
        assert_eq!(bins.iter().sum::<f64>(), 1.0);
        let bins = weighted_bins(&[Peak { freq: 1.0, weight: 2.0 }], (1.0, 10.0), 10).unwrap();
        assert_eq!(bins[0], 1.0);
        assert_eq!(weighted_bins(&[], (1.0, 10.0), 10).unwrap(), vec![0.0; 10]);
        let zero = [Peak { freq: 5.0, weight: 0.0 }];
        assert_eq!(weighted_bins(&zero, (1.0, 10.0), 4).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn bins_errors() {
        assert!(weighted_bins(&[], (2.0, 2.0), 10).is_err());
        assert!(weighted_bins(&[], (1.0, 2.0), 0).is_err());
        assert!(weighted_bins(&[Peak { freq: 12.0, weight: 1.0 }], (1.0, 10.0), 10).is_err());
    }

    #[test]
    fn profile_composition() {
        let p = profile(&example(), 0, 10).unwrap();
        assert_eq!(p.bins, vec![0.0; 10]);
        assert!(!p.has_mass());
        let p = profile(&example(), 3, 9).unwrap();
        assert_eq!(p.label, "u");
        assert_eq!(p.domain, Domain::Ams);
        assert_eq!(p.band, (1.0, 10.0));
        assert!((p.bins.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(p, profile(&example(), 3, 9).unwrap());
        let bare = LongTermSpectrum::from_parts(Domain::Ams, "b", vec![1.0], vec![1.0], None, None)
            .unwrap();
        assert!(profile(&bare, 1, 10).is_err());
    }

    #[test]
    fn cluster_around_strongest() {
        let peaks = [
            Peak { freq: 4.4, weight: 1.0 },
            Peak { freq: 4.2, weight: 0.8 },
            Peak { freq: 8.6, weight: 0.7 },
            Peak { freq: 4.6, weight: 0.5 },
            Peak { freq: 4.0, weight: 0.3 },
        ];
        let c = dominant_cluster(&peaks, 0.4).unwrap();
        assert_eq!((c.lo, c.hi, c.members), (4.0, 4.6, 4));
        assert!((c.mid - 4.3).abs() < 1e-12);
        let expected = (4.4 + 4.2 * 0.8 + 4.6 * 0.5 + 4.0 * 0.3) / 2.6;
        assert!((c.centroid - expected).abs() < 1e-12);
        assert!(dominant_cluster(&[], 0.4).is_none());
    }
}
