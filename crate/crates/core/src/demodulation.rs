//! Amplitude and frequency demodulation.
//!
//! Three modulation series are derived from a [`SignalBuffer`]:
//!
//! - the rectified (absolute) signal, whose low-frequency content carries the
//!   amplitude modulation;
//! - a peak-picked amplitude envelope sampled at the hop rate;
//! - an F0 track from the average magnitude difference function (AMDF).

use serde::{Deserialize, Serialize};

use crate::audio_io::SignalBuffer;
use crate::error::{Error, Result};

/// Frames whose RMS is at or below this are unvoiced regardless of AMDF shape.
pub const VOICING_RMS_FLOOR: f64 = 1e-4;

/// A lag whose AMDF lies within this fraction of the (mean - min) range above
/// the global minimum competes with the global minimum; the shortest such lag
/// wins so that multiples of the true period are not reported.
const SUBHARMONIC_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackKind {
    Envelope,
    F0Raw,
    F0Continuous,
}

/// A uniformly sampled derived series: an amplitude envelope or an F0 contour.
///
/// For `F0Raw` tracks `0.0` marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    values: Vec<f64>,
    rate: f64,
    kind: TrackKind,
}

impl Track {
    pub fn new(values: Vec<f64>, rate: f64, kind: TrackKind) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("track rate {rate} must be > 0")));
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("empty track".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite track value".into()));
        }
        if matches!(kind, TrackKind::Envelope | TrackKind::F0Raw) && values.iter().any(|&v| v < 0.0)
        {
            return Err(Error::InvalidInput(format!("negative value in {kind:?} track")));
        }
        Ok(Self { values, rate, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn kind(&self) -> TrackKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.rate
    }

    /// Fraction of frames with a nonzero value (meaningful for `F0Raw`).
    pub fn voiced_fraction(&self) -> f64 {
        self.values.iter().filter(|&&v| v > 0.0).count() as f64 / self.values.len() as f64
    }
}

/// Absolute value of every sample.
pub fn rectify(sig: &SignalBuffer) -> SignalBuffer {
    sig.map_samples(f64::abs)
}

/// Peak-picking moving window over a rectified signal.
///
/// Output frame `j` is the maximum of the samples in a `window_ms` window
/// centred on `j * hop_ms`; windows are clipped at the signal bounds.
pub fn envelope_peak_pick(rectified: &SignalBuffer, window_ms: f64, hop_ms: f64) -> Result<Track> {
    if !(hop_ms > 0.0 && window_ms >= hop_ms) {
        return Err(Error::InvalidParameter(format!(
            "envelope needs window_ms >= hop_ms > 0 (got {window_ms}, {hop_ms})"
        )));
    }
    let rate = rectified.rate();
    let samples = rectified.samples();
    let window = ((window_ms * rate / 1000.0).round() as usize).max(1);
    if samples.len() < window {
        return Err(Error::TooShort(format!(
            "{} samples is shorter than one {window_ms} ms window",
            samples.len()
        )));
    }
    let hop_s = hop_ms / 1000.0;
    let half = window / 2;
    let frames = ((rectified.duration() / hop_s).ceil() as usize).max(1);
    let values: Vec<f64> = (0..frames)
        .map(|j| {
            let centre = (j as f64 * hop_s * rate).round() as usize;
            let start = centre.saturating_sub(half);
            let end = (centre + window - half).min(samples.len());
            samples[start.min(end)..end]
                .iter()
                .fold(0.0_f64, |m, &s| m.max(s.abs()))
        })
        .collect();
    Track::new(values, 1000.0 / hop_ms, TrackKind::Envelope)
}

/// Parameters of the AMDF pitch tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmdfParams {
    pub f0_min: f64,
    pub f0_max: f64,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub voicing_ratio: f64,
}

impl Default for AmdfParams {
    fn default() -> Self {
        Self {
            f0_min: 60.0,
            f0_max: 400.0,
            frame_ms: 40.0,
            hop_ms: 10.0,
            voicing_ratio: 0.35,
        }
    }
}

impl AmdfParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.f0_min > 0.0 && p.f0_min < p.f0_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < f0_min < f0_max (got {}, {})",
                p.f0_min, p.f0_max
            )));
        }
        if !(p.hop_ms > 0.0) {
            return Err(Error::InvalidParameter(format!("hop_ms {} must be > 0", p.hop_ms)));
        }
        if p.frame_ms < 2000.0 / p.f0_min {
            return Err(Error::InvalidParameter(format!(
                "frame_ms {} must span two periods of f0_min ({} ms)",
                p.frame_ms,
                2000.0 / p.f0_min
            )));
        }
        if !(p.voicing_ratio > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "voicing_ratio {} must be > 0",
                p.voicing_ratio
            )));
        }
        Ok(())
    }
}

/// Mean absolute difference between a frame and its copy shifted by `lag`.
pub fn amdf(frame: &[f64], lag: usize) -> f64 {
    let n = frame.len() - lag;
    frame[..n]
        .iter()
        .zip(&frame[lag..])
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / n as f64
}

/// Frame-wise F0 estimation by the average magnitude difference function.
///
/// Frame `j` starts at sample `j * hop`. The lag search covers periods between
/// `1/f0_max` and `1/f0_min`. A frame is voiced when the AMDF valley depth
/// `min / mean` is below `voicing_ratio` and its RMS exceeds
/// [`VOICING_RMS_FLOOR`]; voiced frames report `rate / lag`, unvoiced `0.0`.
pub fn amdf_f0(sig: &SignalBuffer, params: &AmdfParams) -> Result<Track> {
    params.validate()?;
    let rate = sig.rate();
    let frame_len = (params.frame_ms * rate / 1000.0).round() as usize;
    let hop = ((params.hop_ms * rate / 1000.0).round() as usize).max(1);
    let lag_min = ((rate / params.f0_max).ceil() as usize).max(1);
    let lag_max = (rate / params.f0_min).floor() as usize;
    if lag_max < lag_min || lag_max >= frame_len {
        return Err(Error::InvalidParameter(format!(
            "lag range {lag_min}..={lag_max} does not fit a {frame_len}-sample frame at {rate} Hz"
        )));
    }
    let samples = sig.samples();
    if samples.len() < frame_len {
        return Err(Error::TooShort(format!(
            "{} samples is shorter than one {} ms frame",
            samples.len(),
            params.frame_ms
        )));
    }
    let frames = (samples.len() - frame_len) / hop + 1;
    let values = (0..frames)
        .map(|j| {
            let frame = &samples[j * hop..j * hop + frame_len];
            frame_f0(frame, rate, lag_min, lag_max, params.voicing_ratio)
        })
        .collect();
    Track::new(values, 1000.0 / params.hop_ms, TrackKind::F0Raw)
}

fn frame_f0(frame: &[f64], rate: f64, lag_min: usize, lag_max: usize, voicing_ratio: f64) -> f64 {
    let rms = (frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64).sqrt();
    if rms <= VOICING_RMS_FLOOR {
        return 0.0;
    }
    let curve: Vec<f64> = (lag_min..=lag_max).map(|lag| amdf(frame, lag)).collect();
    let mean = curve.iter().sum::<f64>() / curve.len() as f64;
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    if !(mean > 0.0) || min / mean >= voicing_ratio {
        return 0.0;
    }
    let threshold = min + SUBHARMONIC_TOLERANCE * (mean - min);
    let is_local_min = |i: usize| {
        (i == 0 || curve[i] <= curve[i - 1]) && (i + 1 == curve.len() || curve[i] <= curve[i + 1])
    };
    let best = (0..curve.len())
        .find(|&i| curve[i] <= threshold && is_local_min(i))
        .unwrap_or_else(|| {
            // the global minimum is always a local minimum, so this is unreachable
            curve.iter().position(|&v| v == min).unwrap_or(0)
        });
    rate / (lag_min + best) as f64
}

/// Scale applied to F0 values before interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F0Scale {
    #[default]
    Hz,
    /// Natural log of Hz.
    LogHz,
}

/// Fills unvoiced gaps in a raw F0 track and removes its mean.
///
/// Interior gaps are linearly interpolated between the flanking voiced values;
/// leading and trailing gaps hold the nearest voiced value.
pub fn continuize_f0(f0: &Track) -> Result<Track> {
    continuize_f0_scaled(f0, F0Scale::Hz)
}

pub fn continuize_f0_scaled(f0: &Track, scale: F0Scale) -> Result<Track> {
    if f0.kind() != TrackKind::F0Raw {
        return Err(Error::InvalidInput(format!(
            "continuize_f0 needs an F0Raw track, got {:?}",
            f0.kind()
        )));
    }
    let voiced: Vec<(usize, f64)> = f0
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| {
            let v = match scale {
                F0Scale::Hz => v,
                F0Scale::LogHz => v.ln(),
            };
            (i, v)
        })
        .collect();
    let (&(first_i, first_v), &(last_i, last_v)) = match (voiced.first(), voiced.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::AllUnvoiced),
    };
    let mut filled = vec![0.0; f0.len()];
    filled[..=first_i].fill(first_v);
    filled[last_i..].fill(last_v);
    for pair in voiced.windows(2) {
        let ((i0, v0), (i1, v1)) = (pair[0], pair[1]);
        let span = (i1 - i0) as f64;
        for (k, slot) in filled[i0..=i1].iter_mut().enumerate() {
            *slot = v0 + (v1 - v0) * k as f64 / span;
        }
    }
    let mean = filled.iter().sum::<f64>() / filled.len() as f64;
    filled.iter_mut().for_each(|v| *v -= mean);
    Track::new(filled, f0.rate(), TrackKind::F0Continuous)
}
