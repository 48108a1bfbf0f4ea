//! Rhythm formant analysis of speech recordings.
//!
//! The crate demodulates a recording into three low-frequency domains and
//! compares their long-term spectra:
//!
//! - **AMS**: spectrum of the rectified signal (amplitude modulation);
//! - **AEMS**: spectrum of a peak-picked amplitude envelope;
//! - **FEMS**: spectrum of the AMDF fundamental-frequency contour.
//!
//! Each spectrum is log-normalised and detrended over a low-frequency band
//! (1 to 10 Hz by default). The highest-ranking frequencies form an
//! R-formant profile: a handful of "rhythm bars" plus a magnitude-weighted
//! histogram that can be correlated across domains, compared with the Mantel
//! test, or clustered with UPGMA. Annotation-based isochrony metrics (rPVI,
//! nPVI, Wagner quadrants) and the rate-based formant prediction live in
//! [`isochrony`].
//!
//! ```no_run
//! use rformant::report::{analyze_signal, AnalysisConfig};
//!
//! let cfg = AnalysisConfig::default();
//! let clip = rformant::audio_io::load_wav("clip.wav", Some(cfg.trim_s))?;
//! let report = analyze_signal(&clip, &cfg)?;
//! println!("{:?}", report.ams.profile.bins);
//! # Ok::<(), rformant::Error>(())
//! ```

pub mod audio_io;
pub mod cluster;
pub mod demodulation;
mod error;
pub mod isochrony;
pub mod lts;
pub mod profile;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
