//! Long-term spectra and log-domain detrending.
//!
//! A long-term spectrum is a single full-length FFT of a mean-removed series
//! (no window, no segmentation), so its resolution is `1 / duration`. The
//! low-frequency band used for R-formant work is log-normalised and detrended
//! by subtracting a least-squares line, leaving a near-flat baseline.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio_io::SignalBuffer;
use crate::demodulation::Track;
use crate::error::{Error, Result};

/// Floor added to linear magnitudes before `log10`.
pub const LOG_FLOOR: f64 = 1e-12;

/// Shortest series accepted for a long-term spectrum, in seconds.
pub const MIN_DURATION_S: f64 = 1.0;

/// Below this duration a long-term spectrum is computed with a warning.
pub const RECOMMENDED_DURATION_S: f64 = 3.0;

/// Modulation domain of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Domain {
    /// Rectified signal (amplitude modulation).
    Ams,
    /// Peak-picked amplitude envelope.
    Aems,
    /// Continuous F0 contour (frequency modulation).
    Fems,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Ams, Domain::Aems, Domain::Fems];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Ams => "AMS",
            Domain::Aems => "AEMS",
            Domain::Fems => "FEMS",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Domain::Ams => "ams",
            Domain::Aems => "aems",
            Domain::Fems => "fems",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ams" => Ok(Domain::Ams),
            "aems" => Ok(Domain::Aems),
            "fems" => Ok(Domain::Fems),
            _ => Err(Error::InvalidParameter(format!(
                "unknown domain {s:?} (expected ams, aems or fems)"
            ))),
        }
    }
}

/// Anything uniformly sampled that a long-term spectrum can be taken of.
pub trait UniformSeries {
    fn values(&self) -> &[f64];
    fn rate(&self) -> f64;
    fn label(&self) -> &str {
        ""
    }
}

impl UniformSeries for SignalBuffer {
    fn values(&self) -> &[f64] {
        self.samples()
    }
    fn rate(&self) -> f64 {
        SignalBuffer::rate(self)
    }
    fn label(&self) -> &str {
        SignalBuffer::label(self)
    }
}

impl UniformSeries for Track {
    fn values(&self) -> &[f64] {
        Track::values(self)
    }
    fn rate(&self) -> f64 {
        Track::rate(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTermSpectrum {
    domain: Domain,
    label: String,
    freqs: Vec<f64>,
    magnitude: Vec<f64>,
    residual: Option<Vec<f64>>,
    band: Option<(f64, f64)>,
}

impl LongTermSpectrum {
    /// Builds a detrended spectrum from explicit parts.
    ///
    /// Lengths must agree and `freqs` must be strictly ascending.
    pub fn from_parts(
        domain: Domain,
        label: impl Into<String>,
        freqs: Vec<f64>,
        magnitude: Vec<f64>,
        residual: Option<Vec<f64>>,
        band: Option<(f64, f64)>,
    ) -> Result<Self> {
        if freqs.len() != magnitude.len() {
            return Err(Error::LengthMismatch {
                left: freqs.len(),
                right: magnitude.len(),
            });
        }
        if let Some(r) = &residual {
            if r.len() != freqs.len() {
                return Err(Error::LengthMismatch {
                    left: freqs.len(),
                    right: r.len(),
                });
            }
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("frequencies must be strictly ascending".into()));
        }
        if magnitude.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::InvalidInput("magnitudes must be nonnegative".into()));
        }
        Ok(Self {
            domain,
            label: label.into(),
            freqs,
            magnitude,
            residual,
            band,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn residual(&self) -> Option<&[f64]> {
        self.residual.as_deref()
    }

    pub fn band(&self) -> Option<(f64, f64)> {
        self.band
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Frequency step (`1 / duration` for FFT-derived spectra).
    pub fn delta_f(&self) -> Option<f64> {
        match self.freqs.as_slice() {
            [a, b, ..] => Some(b - a),
            _ => None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Multiplies every linear magnitude by `gain` and drops any residual.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            magnitude: self.magnitude.iter().map(|m| m * gain).collect(),
            residual: None,
            band: None,
            ..self.clone()
        }
    }
}

/// Long-term magnitude spectrum of a series.
///
/// The series mean is removed, one real FFT of the whole series is taken, and
/// the magnitudes of the bins from 0 Hz to Nyquist are returned with
/// `delta_f = rate / len`.
pub fn long_term_spectrum(series: &impl UniformSeries, domain: Domain) -> Result<LongTermSpectrum> {
    let values = series.values();
    let rate = series.rate();
    if values.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    let n = values.len();
    let duration = n as f64 / rate;
    if duration < MIN_DURATION_S {
        return Err(Error::TooShort(format!(
            "{duration:.3} s series; a long-term spectrum needs at least {MIN_DURATION_S} s"
        )));
    }
    if duration < RECOMMENDED_DURATION_S {
        log::warn!(
            "{} {domain}: {duration:.2} s is shorter than the recommended {RECOMMENDED_DURATION_S} s",
            series.label()
        );
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buffer: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let bins = n / 2 + 1;
    let freqs = (0..bins).map(|k| k as f64 * rate / n as f64).collect();
    let magnitude = buffer[..bins].iter().map(|c| c.norm()).collect();
    Ok(LongTermSpectrum {
        domain,
        label: series.label().to_string(),
        freqs,
        magnitude,
        residual: None,
        band: None,
    })
}

/// Least-squares line `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (&xi, &yi)| {
        (sxy + (xi - mx) * (yi - my), sxx + (xi - mx) * (xi - mx))
    });
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Residuals of `y` about its least-squares line over `x`.
pub fn detrend(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (slope, intercept) = linear_fit(x, y);
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| yi - (slope * xi + intercept))
        .collect()
}

fn band_tolerance(f: f64) -> f64 {
    1e-9 * f.abs().max(1.0)
}

/// Restricts a spectrum to `[lo, hi]` Hz and replaces its residual with the
/// detrended `log10` magnitudes over that band.
pub fn normalize_log_detrend(spec: &LongTermSpectrum, band: (f64, f64)) -> Result<LongTermSpectrum> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("band {lo}..{hi} needs lo < hi")));
    }
    let (first, last) = match (spec.freqs.first(), spec.freqs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidInput("empty spectrum".into())),
    };
    if lo < first - band_tolerance(first) || hi > last + band_tolerance(last) {
        return Err(Error::InvalidParameter(format!(
            "band {lo}..{hi} Hz outside spectrum range {first}..{last} Hz"
        )));
    }
    let keep: Vec<usize> = spec
        .freqs
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= lo - band_tolerance(lo) && f <= hi + band_tolerance(hi))
        .map(|(i, _)| i)
        .collect();
    if keep.len() < 3 {
        return Err(Error::TooShort(format!(
            "band {lo}..{hi} Hz holds {} frequency samples; at least 3 are needed",
            keep.len()
        )));
    }
    let freqs: Vec<f64> = keep.iter().map(|&i| spec.freqs[i]).collect();
    let magnitude: Vec<f64> = keep.iter().map(|&i| spec.magnitude[i]).collect();
    let log_mag: Vec<f64> = magnitude.iter().map(|m| (m + LOG_FLOOR).log10()).collect();
    let residual = detrend(&freqs, &log_mag);
    Ok(LongTermSpectrum {
        domain: spec.domain,
        label: spec.label.clone(),
        freqs,
        magnitude,
        residual: Some(residual),
        band: Some(band),
    })
}

/// `(residual - min(residual))^2`, for plotting only.
pub fn square_for_display(spec: &LongTermSpectrum) -> Result<Vec<f64>> {
    let residual = spec
        .residual()
        .ok_or_else(|| Error::InvalidInput("spectrum has no residual".into()))?;
    let min = residual.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(residual.iter().map(|r| (r - min).powi(2)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demodulation::TrackKind;
    use std::f64::consts::PI;

    fn track(values: Vec<f64>, rate: f64) -> Track {
        Track::new(values, rate, TrackKind::F0Continuous).unwrap()
    }

    #[test]
    fn resolution_is_inverse_duration() {
        let t = track(vec![0.0; 1000], 200.0);
        let spec = long_term_spectrum(&t, Domain::Ams).unwrap();
        assert!((spec.delta_f().unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(spec.len(), 501);
        assert_eq!(*spec.freqs().last().unwrap(), 100.0);
        let steps: Vec<f64> = spec.freqs().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|s| ((s - 0.2) / 0.2).abs() < 1e-9));
    }

    #[test]
    fn constant_series_has_zero_spectrum() {
        let t = track(vec![3.5; 600], 200.0);
        let spec = long_term_spectrum(&t, Domain::Aems).unwrap();
        assert!(spec.magnitude().iter().all(|&m| m < 1e-9));
    }

    #[test]
    fn single_tone_peak() {
        let rate = 100.0;
        let values = (0..1000)
            .map(|i| (2.0 * PI * 3.0 * i as f64 / rate).sin())
            .collect();
        let spec = long_term_spectrum(&track(values, rate), Domain::Fems).unwrap();
        let (k, _) = spec
            .magnitude()
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
        assert!((spec.freqs()[k] - 3.0).abs() <= 0.1);
    }

    #[test]
    fn parseval_identity() {
        let rate = 50.0;
        let values: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let energy: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let spec = long_term_spectrum(&track(values.clone(), rate), Domain::Ams).unwrap();
        let m = spec.magnitude();
        let n = values.len() as f64;
        let last = m.len() - 1;
        let interior: f64 = m[1..last].iter().map(|x| x * x).sum();
        let two_sided = m[0].powi(2) + 2.0 * interior + m[last].powi(2);
        assert!((two_sided - n * energy).abs() <= 1e-9 * n * energy);
        let one_sided: f64 = m.iter().map(|x| x * x).sum();
        assert!(one_sided <= n * energy * (1.0 + 1e-12));
    }

    #[test]
    fn lts_errors() {
        assert!(matches!(
            long_term_spectrum(&track(vec![1.0; 100], 200.0), Domain::Ams),
            Err(Error::TooShort(_))
        ));
    }

    fn exact_spectrum(freqs: Vec<f64>, mag: impl Fn(f64) -> f64) -> LongTermSpectrum {
        let magnitude = freqs.iter().map(|&f| mag(f)).collect();
        LongTermSpectrum::from_parts(Domain::Ams, "x", freqs, magnitude, None, None).unwrap()
    }

    fn grid(step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 * step).collect()
    }

    #[test]
    fn exact_log_line_detrends_to_zero() {
        let spec = exact_spectrum(grid(0.2, 60), |f| 10f64.powf(2.0 * f + 1.0));
        let out = normalize_log_detrend(&spec, (1.0, 10.0)).unwrap();
        assert_eq!(out.freqs().first(), Some(&1.0));
        assert!((out.freqs().last().unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(out.len(), 46);
        assert!(out.residual().unwrap().iter().all(|r| r.abs() < 1e-9));
        assert_eq!(out.band(), Some((1.0, 10.0)));
    }

    #[test]
    fn residual_has_zero_mean_and_flat_fit() {
        let spec = exact_spectrum(grid(0.2, 60), |f| 1.0 + (3.0 * f).sin().abs() * f);
        let out = normalize_log_detrend(&spec, (1.0, 10.0)).unwrap();
        let r = out.residual().unwrap();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        assert!(mean.abs() < 1e-9);
        let (a, b) = linear_fit(out.freqs(), r);
        assert!(a.abs() < 1e-6 && b.abs() < 1e-6);
    }

    #[test]
    fn decay_removed_and_bump_found() {
        let df = 0.2;
        let spec = exact_spectrum(grid(df, 60), |f| {
            1.0 / f.max(0.1) + 0.3 * (-((f - 4.0) / 0.3).powi(2)).exp()
        });
        let out = normalize_log_detrend(&spec, (1.0, 10.0)).unwrap();
        let r = out.residual().unwrap();
        let k = (0..r.len()).fold(0, |b, i| if r[i] > r[b] { i } else { b });
        assert!((out.freqs()[k] - 4.0).abs() <= df + 1e-9);
    }

    #[test]
    fn detrend_gain_invariant_and_idempotent() {
        let spec = exact_spectrum(grid(0.2, 60), |f| 0.5 + (f * 1.7).cos().powi(2));
        let a = normalize_log_detrend(&spec, (1.0, 10.0)).unwrap();
        let b = normalize_log_detrend(&spec.scaled(123.4), (1.0, 10.0)).unwrap();
        for (x, y) in a.residual().unwrap().iter().zip(b.residual().unwrap()) {
            assert!((x - y).abs() < 1e-9);
        }
        let again = detrend(a.freqs(), a.residual().unwrap());
        for (x, y) in again.iter().zip(a.residual().unwrap()) {
            assert!((x - y).abs() < 1e-9);
        }
        let twice = normalize_log_detrend(&a, (1.0, 10.0)).unwrap();
        assert_eq!(twice.residual(), a.residual());
    }

    #[test]
    fn detrend_errors() {
        let spec = exact_spectrum(grid(0.2, 60), |_| 1.0);
        assert!(normalize_log_detrend(&spec, (5.0, 5.0)).is_err());
        assert!(normalize_log_detrend(&spec, (1.0, 50.0)).is_err());
        assert!(matches!(
            normalize_log_detrend(&spec, (1.0, 1.3)),
            Err(Error::TooShort(_))
        ));
        assert!(normalize_log_detrend(&spec, (0.0, 11.8)).is_ok());
    }

    #[test]
    fn display_squaring() {
        let mk = |r: Vec<f64>| {
            let n = r.len();
            LongTermSpectrum::from_parts(
                Domain::Ams,
                "d",
                grid(1.0, n),
                vec![1.0; n],
                Some(r),
                Some((0.0, (n - 1) as f64)),
            )
            .unwrap()
        };
        assert_eq!(square_for_display(&mk(vec![0.0; 4])).unwrap(), vec![0.0; 4]);
        assert_eq!(
            square_for_display(&mk(vec![0.0, 1.0, 2.0])).unwrap(),
            vec![0.0, 1.0, 4.0]
        );
        let shifted = square_for_display(&mk(vec![-3.0, -1.0, 0.5, 2.0])).unwrap();
        assert_eq!(shifted, vec![0.0, 4.0, 12.25, 25.0]);
        let bare = exact_spectrum(grid(1.0, 3), |_| 1.0);
        assert!(square_for_display(&bare).is_err());
    }

    #[test]
    fn domain_parsing() {
        assert_eq!("AmS".parse::<Domain>().unwrap(), Domain::Ams);
        assert_eq!("fems".parse::<Domain>().unwrap(), Domain::Fems);
        assert!("xyz".parse::<Domain>().is_err());
        assert_eq!(Domain::Aems.to_string(), "AEMS");
    }
}
