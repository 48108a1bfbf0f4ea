//! `key = value` analysis configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demodulation::{AmdfParams, F0Scale};
use crate::error::{Error, Result};
use crate::isochrony::Deviation;
use crate::profile::PeakSelection;
use crate::stats::Metric;

/// Environment variable consulted for a config path when `--config` is absent.
pub const CONFIG_ENV: &str = "RFORMANT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub trim_s: f64,
    pub resample_hz: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub n_peaks: usize,
    pub n_bars: usize,
    pub n_bins: usize,
    pub envelope_window_ms: f64,
    pub envelope_hop_ms: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub f0_frame_ms: f64,
    pub f0_hop_ms: f64,
    pub voicing_ratio: f64,
    pub mantel_permutations: usize,
    pub seed: u64,
    pub metric: Metric,
    pub peak_selection: PeakSelection,
    pub f0_scale: F0Scale,
    pub z_deviation: Deviation,
    pub spectrogram: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            trim_s: 5.0,
            resample_hz: 200.0,
            band_lo_hz: 1.0,
            band_hi_hz: 10.0,
            n_peaks: 6,
            n_bars: 16,
            n_bins: 10,
            envelope_window_ms: 20.0,
            envelope_hop_ms: 5.0,
            f0_min_hz: 60.0,
            f0_max_hz: 400.0,
            f0_frame_ms: 40.0,
            f0_hop_ms: 10.0,
            voicing_ratio: 0.35,
            mantel_permutations: 9999,
            seed: 0,
            metric: Metric::Manhattan,
            peak_selection: PeakSelection::Rank,
            f0_scale: F0Scale::Hz,
            z_deviation: Deviation::Population,
            spectrogram: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: cannot parse {value:?}"))
}

impl AnalysisConfig {
    pub fn band(&self) -> (f64, f64) {
        (self.band_lo_hz, self.band_hi_hz)
    }

    pub fn amdf(&self) -> AmdfParams {
        AmdfParams {
            f0_min: self.f0_min_hz,
            f0_max: self.f0_max_hz,
            frame_ms: self.f0_frame_ms,
            hop_ms: self.f0_hop_ms,
            voicing_ratio: self.voicing_ratio,
        }
    }

    /// Sets one field from its textual form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "trim_s" => self.trim_s = parse_num(key, value)?,
            "resample_hz" => self.resample_hz = parse_num(key, value)?,
            "band_lo_hz" => self.band_lo_hz = parse_num(key, value)?,
            "band_hi_hz" => self.band_hi_hz = parse_num(key, value)?,
            "n_peaks" => self.n_peaks = parse_num(key, value)?,
            "n_bars" => self.n_bars = parse_num(key, value)?,
            "n_bins" => self.n_bins = parse_num(key, value)?,
            "envelope_window_ms" => self.envelope_window_ms = parse_num(key, value)?,
            "envelope_hop_ms" => self.envelope_hop_ms = parse_num(key, value)?,
            "f0_min_hz" => self.f0_min_hz = parse_num(key, value)?,
            "f0_max_hz" => self.f0_max_hz = parse_num(key, value)?,
            "f0_frame_ms" => self.f0_frame_ms = parse_num(key, value)?,
            "f0_hop_ms" => self.f0_hop_ms = parse_num(key, value)?,
            "voicing_ratio" => self.voicing_ratio = parse_num(key, value)?,
            "mantel_permutations" => self.mantel_permutations = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "metric" => self.metric = value.parse().map_err(|e: Error| e.to_string())?,
            "peak_selection" => {
                self.peak_selection = match value {
                    "rank" => PeakSelection::Rank,
                    "local_maxima" => PeakSelection::LocalMaxima,
                    _ => return Err(format!("peak_selection: expected rank or local_maxima, got {value:?}")),
                }
            }
            "f0_scale" => {
                self.f0_scale = match value {
                    "hz" => F0Scale::Hz,
                    "log_hz" => F0Scale::LogHz,
                    _ => return Err(format!("f0_scale: expected hz or log_hz, got {value:?}")),
                }
            }
            "z_deviation" => {
                self.z_deviation = match value {
                    "population" => Deviation::Population,
                    "sample" => Deviation::Sample,
                    _ => return Err(format!("z_deviation: expected population or sample, got {value:?}")),
                }
            }
            "spectrogram" => {
                self.spectrogram = match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(format!("spectrogram: expected true or false, got {value:?}")),
                }
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                origin: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trim_s", self.trim_s),
            ("resample_hz", self.resample_hz),
            ("envelope_window_ms", self.envelope_window_ms),
            ("envelope_hop_ms", self.envelope_hop_ms),
            ("f0_min_hz", self.f0_min_hz),
            ("f0_max_hz", self.f0_max_hz),
            ("f0_frame_ms", self.f0_frame_ms),
            ("f0_hop_ms", self.f0_hop_ms),
            ("voicing_ratio", self.voicing_ratio),
        ];
        if let Some((k, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("{k} = {v} must be > 0")));
        }
        if !(self.band_lo_hz >= 0.0 && self.band_lo_hz < self.band_hi_hz) {
            return Err(Error::InvalidParameter(format!(
                "band {}..{} Hz needs 0 <= lo < hi",
                self.band_lo_hz, self.band_hi_hz
            )));
        }
        if self.band_hi_hz > self.resample_hz / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "band_hi_hz {} exceeds the Nyquist frequency of resample_hz {}",
                self.band_hi_hz, self.resample_hz
            )));
        }
        if self.n_bins == 0 {
            return Err(Error::InvalidParameter("n_bins must be >= 1".into()));
        }
        if self.envelope_window_ms < self.envelope_hop_ms {
            return Err(Error::InvalidParameter(
                "envelope_window_ms must be >= envelope_hop_ms".into(),
            ));
        }
        self.amdf().validate()
    }
}
