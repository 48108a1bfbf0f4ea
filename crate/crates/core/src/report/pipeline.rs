//! Per-clip analysis: signal to AMS, AEMS and FEMS profiles.

use serde::{Deserialize, Serialize};

use crate::audio_io::{resample, SignalBuffer};
use crate::demodulation::{amdf_f0, continuize_f0_scaled, envelope_peak_pick, rectify, Track};
use crate::error::{Error, Result};
use crate::lts::{long_term_spectrum, normalize_log_detrend, Domain, LongTermSpectrum, UniformSeries};
use crate::profile::{profile_with, rhythm_bars, RFormantProfile};
use crate::stats::pearson_r;

use super::config::AnalysisConfig;

/// Version of the report JSON layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Detrended band spectrum of one domain and what is extracted from it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainAnalysis {
    pub spectrum: LongTermSpectrum,
    pub profile: RFormantProfile,
    pub rhythm_bars: Vec<f64>,
}

/// Everything computed for one clip, including the intermediate series needed
/// for plotting.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub signal: SignalBuffer,
    pub envelope: Track,
    pub f0_raw: Option<Track>,
    pub ams: DomainAnalysis,
    pub aems: DomainAnalysis,
    /// `Err` holds the reason the FEMS could not be formed (e.g. no voicing).
    pub fems: std::result::Result<DomainAnalysis, String>,
}

impl Analysis {
    pub fn label(&self) -> &str {
        self.signal.label()
    }

    pub fn domain(&self, domain: Domain) -> Option<&DomainAnalysis> {
        match domain {
            Domain::Ams => Some(&self.ams),
            Domain::Aems => Some(&self.aems),
            Domain::Fems => self.fems.as_ref().ok(),
        }
    }
}

fn analyze_domain(
    series: &impl UniformSeries,
    domain: Domain,
    label: &str,
    cfg: &AnalysisConfig,
) -> Result<DomainAnalysis> {
    let lts = long_term_spectrum(series, domain)?.with_label(label);
    let spectrum = normalize_log_detrend(&lts, cfg.band())?;
    let profile = profile_with(&spectrum, cfg.n_peaks, cfg.n_bins, cfg.peak_selection)?;
    let bars = rhythm_bars(&spectrum, cfg.n_bars.min(spectrum.len()))?;
    Ok(DomainAnalysis {
        spectrum,
        profile,
        rhythm_bars: bars,
    })
}

/// Runs the full per-clip pipeline on an already loaded (and trimmed) signal.
///
/// - AMS: rectify, block-mean decimate to `resample_hz`, long-term spectrum;
/// - AEMS: peak-picked envelope of the rectified signal, long-term spectrum;
/// - FEMS: AMDF F0, gap filling and mean removal, long-term spectrum.
///
/// Each spectrum is detrended over the configured band and profiled.
pub fn analyze_signal(sig: &SignalBuffer, cfg: &AnalysisConfig) -> Result<Analysis> {
    cfg.validate()?;
    let label = sig.label();
    let rectified = rectify(sig);
    let decimated = resample(&rectified, cfg.resample_hz)?;
    let ams = analyze_domain(&decimated, Domain::Ams, label, cfg)?;

    let envelope = envelope_peak_pick(&rectified, cfg.envelope_window_ms, cfg.envelope_hop_ms)?;
    let aems = analyze_domain(&envelope, Domain::Aems, label, cfg)?;

    let f0_raw = amdf_f0(sig, &cfg.amdf()).ok();
    let fems = match &f0_raw {
        None => Err("clip too short for F0 analysis".to_string()),
        Some(raw) => match continuize_f0_scaled(raw, cfg.f0_scale) {
            Ok(cont) => analyze_domain(&cont, Domain::Fems, label, cfg).map_err(|e| e.to_string()),
            Err(Error::AllUnvoiced) => Err("all frames unvoiced".to_string()),
            Err(e) => Err(e.to_string()),
        },
    };
    Ok(Analysis {
        signal: sig.clone(),
        envelope,
        f0_raw,
        ams,
        aems,
        fems,
    })
}

/// Serialisable summary of one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainEntry {
    pub domain: Domain,
    pub present: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_f_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<RFormantProfile>,
    #[serde(default)]
    pub rhythm_bars: Vec<f64>,
}

impl DomainEntry {
    fn present(d: &DomainAnalysis) -> Self {
        Self {
            domain: d.profile.domain,
            present: true,
            reason: None,
            delta_f_hz: d.spectrum.delta_f(),
            band_samples: Some(d.spectrum.len()),
            profile: Some(d.profile.clone()),
            rhythm_bars: d.rhythm_bars.clone(),
        }
    }

    fn absent(domain: Domain, reason: &str) -> Self {
        Self {
            domain,
            present: false,
            reason: Some(reason.to_string()),
            delta_f_hz: None,
            band_samples: None,
            profile: None,
            rhythm_bars: Vec::new(),
        }
    }
}

/// Pearson's r between the bin vectors of two domains of one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub pair: String,
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Domain pairs in the order used by every correlation table.
pub const DOMAIN_PAIRS: [(Domain, Domain); 3] = [
    (Domain::Aems, Domain::Fems),
    (Domain::Ams, Domain::Aems),
    (Domain::Ams, Domain::Fems),
];

pub fn pair_name(a: Domain, b: Domain) -> String {
    format!("{a}:{b}")
}

/// The per-clip JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub schema: u32,
    pub label: String,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub f0_voiced_fraction: f64,
    pub domains: Vec<DomainEntry>,
    pub correlations: Vec<PairCorrelation>,
    pub config: AnalysisConfig,
}

impl UtteranceReport {
    pub fn from_analysis(a: &Analysis, cfg: &AnalysisConfig) -> Self {
        let domains = vec![
            DomainEntry::present(&a.ams),
            DomainEntry::present(&a.aems),
            match &a.fems {
                Ok(d) => DomainEntry::present(d),
                Err(reason) => DomainEntry::absent(Domain::Fems, reason),
            },
        ];
        let correlations = DOMAIN_PAIRS
            .iter()
            .map(|&(x, y)| {
                let pair = pair_name(x, y);
                match (a.domain(x), a.domain(y)) {
                    (Some(dx), Some(dy)) => match pearson_r(&dx.profile.bins, &dy.profile.bins) {
                        Ok(r) => PairCorrelation { pair, r: Some(r), reason: None },
                        Err(e) => PairCorrelation { pair, r: None, reason: Some(e.to_string()) },
                    },
                    _ => PairCorrelation {
                        pair,
                        r: None,
                        reason: Some("domain absent".into()),
                    },
                }
            })
            .collect();
        Self {
            schema: REPORT_SCHEMA,
            label: a.label().to_string(),
            sample_rate_hz: a.signal.rate(),
            duration_s: a.signal.duration(),
            f0_voiced_fraction: a.f0_raw.as_ref().map_or(0.0, Track::voiced_fraction),
            domains,
            correlations,
            config: cfg.clone(),
        }
    }

    pub fn entry(&self, domain: Domain) -> Option<&DomainEntry> {
        self.domains.iter().find(|d| d.domain == domain)
    }

    pub fn profile(&self, domain: Domain) -> Option<&RFormantProfile> {
        self.entry(domain).and_then(|d| d.profile.as_ref())
    }

    pub fn correlation(&self, pair: &str) -> Option<f64> {
        self.correlations.iter().find(|c| c.pair == pair).and_then(|c| c.r)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &std::path::Path) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| Error::Report {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Report {
                path: path.to_path_buf(),
                message: format!("unsupported schema {}", report.schema),
            });
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
