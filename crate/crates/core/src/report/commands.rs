//! Batch commands: analyze, compare, cluster, pvi and calibrate.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio_io::{load_wav, SignalBuffer};
use crate::cluster::{to_newick, upgma, Dendrogram};
use crate::error::{Error, Result};
use crate::isochrony::{
    npvi, predict_formant_range, rates_from_annotation, rpvi, wagner_pairs, AnnotationTier,
    DurationVector, FormantPrediction, Interval, QuadrantCounts, TierRates,
};
use crate::lts::{square_for_display, Domain, LongTermSpectrum};
use crate::profile::{dominant_cluster, FormantCluster, Peak, RFormantProfile};
use crate::stats::{correlation_summary, distance_matrix, mantel, CorrelationSummary, DistanceMatrix, MantelResult};

use super::config::AnalysisConfig;
use super::pipeline::{analyze_signal, pair_name, Analysis, UtteranceReport, DOMAIN_PAIRS};
use super::svg;

/// Result of a command plus the files it wrote and anything worth warning
/// about. `partial` is set when some requested output could not be formed.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub value: T,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub partial: bool,
}

struct OutDir {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn finish<T>(self, value: T, warnings: Vec<String>, partial: bool) -> Outcome<T> {
        Outcome {
            value,
            files: self.files,
            warnings,
            partial,
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), num)
}

fn csv_bytes<I>(header: &[String], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

fn json_bytes<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serialises");
    s.push('\n');
    s
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// `label,domain,bin_0..bin_{n-1}`.
pub fn bins_header(n_bins: usize) -> Vec<String> {
    let mut h = strings(&["label", "domain"]);
    h.extend((0..n_bins).map(|i| format!("bin_{i}")));
    h
}

fn bins_row(label: &str, domain: Domain, bins: Option<&[f64]>, n_bins: usize) -> Vec<String> {
    let mut row = vec![label.to_string(), domain.to_string()];
    match bins {
        Some(b) => row.extend(b.iter().map(|&v| num(v))),
        None => row.extend(std::iter::repeat_n(String::new(), n_bins)),
    }
    row
}

/// `freq_hz,magnitude,residual` for a detrended band spectrum.
pub fn spectrum_csv(spec: &LongTermSpectrum) -> Vec<u8> {
    let residual = spec.residual().unwrap_or(&[]);
    let rows = spec.freqs().iter().enumerate().map(|(i, &f)| {
        vec![
            num(f),
            num(spec.magnitude()[i]),
            residual.get(i).map_or_else(String::new, |&r| num(r)),
        ]
    });
    csv_bytes(&strings(&["freq_hz", "magnitude", "residual"]), rows)
}

fn check_unique<'a>(labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut prev: Option<&str> = None;
    for l in labels {
        if prev == Some(l) {
            return Err(Error::InvalidInput(format!("duplicate label {l:?}")));
        }
        prev = Some(l);
    }
    Ok(())
}

const SPECTROGRAM_FRAME_S: f64 = 0.025;
const SPECTROGRAM_HOP_S: f64 = 0.010;
const SPECTROGRAM_MAX_HZ: f64 = 5000.0;
const SPECTROGRAM_RANGE_DB: f64 = 60.0;
const SPECTROGRAM_MAX_COLS: usize = 200;
const SPECTROGRAM_MAX_ROWS: usize = 64;

/// Magnitude STFT with Hann frames, pooled to at most 200 x 64 cells and
/// mapped to `[0, 1]` over a 60 dB range. Display only.
pub fn spectrogram_cells(sig: &SignalBuffer) -> (Vec<Vec<f64>>, f64) {
    let rate = sig.rate();
    let x = sig.samples();
    let frame = ((SPECTROGRAM_FRAME_S * rate).round() as usize).max(2);
    let hop = ((SPECTROGRAM_HOP_S * rate).round() as usize).max(1);
    let max_hz = SPECTROGRAM_MAX_HZ.min(rate / 2.0);
    if x.len() < frame {
        return (Vec::new(), max_hz);
    }
    let nfft = frame.next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let window: Vec<f64> = (0..frame)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (frame - 1) as f64).cos())
        .collect();
    let kmax = ((max_hz * nfft as f64 / rate).floor() as usize).min(nfft / 2).max(1);
    let n_frames = (x.len() - frame) / hop + 1;
    let mut frames_db: Vec<Vec<f64>> = Vec::with_capacity(n_frames);
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    for j in 0..n_frames {
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (i, w) in window.iter().enumerate() {
            buf[i].re = x[j * hop + i] * w;
        }
        fft.process(&mut buf);
        frames_db.push((0..kmax).map(|k| buf[k].norm()).collect());
    }
    let cols = n_frames.min(SPECTROGRAM_MAX_COLS);
    let rows = kmax.min(SPECTROGRAM_MAX_ROWS);
    let mut cells = vec![vec![0.0; cols]; rows];
    for (c, col) in (0..cols).map(|c| (c, c * n_frames / cols..(c + 1) * n_frames / cols)) {
        for r in 0..rows {
            let ks = r * kmax / rows..(r + 1) * kmax / rows;
            let mut sum = 0.0;
            let mut count = 0usize;
            for f in col.clone() {
                for k in ks.clone() {
                    sum += frames_db[f][k];
                    count += 1;
                }
            }
            cells[r][c] = 20.0 * (sum / count.max(1) as f64 + 1e-12).log10();
        }
    }
    let peak = cells.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in cells.iter_mut().flatten() {
        *v = ((*v - (peak - SPECTROGRAM_RANGE_DB)) / SPECTROGRAM_RANGE_DB).clamp(0.0, 1.0);
    }
    (cells, max_hz)
}

fn clip_files(a: &Analysis, report: &UtteranceReport, cfg: &AnalysisConfig) -> Result<Vec<(String, Vec<u8>)>> {
    let label = a.label();
    let mut out = vec![(format!("{label}.json"), report.to_json().into_bytes())];
    let mut bin_rows = Vec::new();
    for domain in Domain::ALL {
        let Some(d) = a.domain(domain) else { continue };
        let key = domain.key();
        out.push((format!("{label}_{key}_spectrum.csv"), spectrum_csv(&d.spectrum)));
        bin_rows.push(bins_row(label, domain, Some(&d.profile.bins), cfg.n_bins));
        let display = square_for_display(&d.spectrum)?;
        out.push((
            format!("{label}_{key}_spectrum.svg"),
            svg::spectrum_with_bars(&format!("{label} {domain}"), d.spectrum.freqs(), &display, &d.rhythm_bars)
                .into_bytes(),
        ));
        out.push((
            format!("{label}_{key}_bins.svg"),
            svg::bin_histogram(&format!("{label} {domain} R-formant bins"), &d.profile).into_bytes(),
        ));
    }
    out.push((format!("{label}_bins.csv"), csv_bytes(&bins_header(cfg.n_bins), bin_rows)));
    out.push((
        format!("{label}_waveform.svg"),
        svg::waveform_with_envelope(
            &format!("{label} waveform and envelope"),
            a.signal.samples(),
            a.signal.rate(),
            a.envelope.values(),
            a.envelope.rate(),
        )
        .into_bytes(),
    ));
    if let Some(f0) = &a.f0_raw {
        out.push((
            format!("{label}_f0.svg"),
            svg::f0_track(&format!("{label} F0"), f0.values(), f0.rate()).into_bytes(),
        ));
    }
    if cfg.spectrogram {
        let (cells, max_hz) = spectrogram_cells(&a.signal);
        out.push((
            format!("{label}_spectrogram.svg"),
            svg::spectrogram(&format!("{label} spectrogram"), &cells, a.signal.duration(), max_hz).into_bytes(),
        ));
    }
    Ok(out)
}

/// Analyzes every WAV, writing per-clip JSON, CSV and SVG files plus one
/// combined `bins_<domain>.csv` per domain. Clips run on up to `jobs`
/// threads (0 picks the default); output order is by label.
pub fn cmd_analyze(
    paths: &[PathBuf],
    cfg: &AnalysisConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<Outcome<Vec<UtteranceReport>>> {
    cfg.validate()?;
    if paths.is_empty() {
        return Err(Error::InvalidInput("no input files".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut analyses: Vec<(Analysis, UtteranceReport)> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| {
                let sig = load_wav(p, Some(cfg.trim_s))?;
                let a = analyze_signal(&sig, cfg)?;
                let r = UtteranceReport::from_analysis(&a, cfg);
                Ok((a, r))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    analyses.sort_by(|x, y| x.1.label.cmp(&y.1.label));
    check_unique(analyses.iter().map(|(_, r)| r.label.as_str()))?;

    let rendered: Vec<Vec<(String, Vec<u8>)>> = pool.install(|| {
        analyses
            .par_iter()
            .map(|(a, r)| clip_files(a, r, cfg))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = OutDir::create(out_dir)?;
    for (name, bytes) in rendered.into_iter().flatten() {
        out.write(&name, bytes)?;
    }
    for domain in Domain::ALL {
        let rows = analyses.iter().map(|(a, _)| {
            let bins = a.domain(domain).map(|d| d.profile.bins.as_slice());
            bins_row(a.label(), domain, bins, cfg.n_bins)
        });
        out.write(
            &format!("bins_{}.csv", domain.key()),
            csv_bytes(&bins_header(cfg.n_bins), rows),
        )?;
    }
    let warnings = analyses
        .iter()
        .filter_map(|(a, _)| a.fems.as_ref().err().map(|why| format!("{}: FEMS absent ({why})", a.label())))
        .collect();
    let reports = analyses.into_iter().map(|(_, r)| r).collect();
    Ok(out.finish(reports, warnings, false))
}

/// Loads report JSON files sorted by label; duplicate labels are an error.
pub fn load_reports(paths: &[PathBuf]) -> Result<Vec<UtteranceReport>> {
    let mut reports = paths.iter().map(UtteranceReport::load).collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.label.cmp(&b.label));
    check_unique(reports.iter().map(|r| r.label.as_str()))?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub pair: String,
    pub summary: Option<CorrelationSummary>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MantelRow {
    pub pair: String,
    pub result: Option<MantelResult>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub summaries: Vec<SummaryRow>,
    pub mantel: Vec<MantelRow>,
}

pub const SUMMARY_COLUMNS: [&str; 7] = ["pair", "count", "mean_r", "min_label", "min_r", "max_label", "max_r"];
pub const MANTEL_COLUMNS: [&str; 6] = ["pair", "r", "p", "significance", "permutations", "metric"];

/// Cross-domain comparison of at least three reports: per-pair Pearson
/// summaries and Mantel tests between the domain distance matrices.
pub fn compare_reports(reports: &[UtteranceReport], cfg: &AnalysisConfig) -> Result<Comparison> {
    if reports.len() < 3 {
        return Err(Error::TooShort(format!(
            "compare needs at least 3 reports, got {}",
            reports.len()
        )));
    }
    let mut summaries = Vec::new();
    let mut mantel_rows = Vec::new();
    for (x, y) in DOMAIN_PAIRS {
        let pair = pair_name(x, y);
        let per_clip: BTreeMap<String, f64> = reports
            .iter()
            .filter_map(|r| r.correlation(&pair).map(|v| (r.label.clone(), v)))
            .collect();
        summaries.push(match correlation_summary(&per_clip, &pair) {
            Ok(s) => SummaryRow { pair: pair.clone(), summary: Some(s), reason: None },
            Err(e) => SummaryRow { pair: pair.clone(), summary: None, reason: Some(e.to_string()) },
        });

        let (px, py): (Vec<RFormantProfile>, Vec<RFormantProfile>) = reports
            .iter()
            .filter_map(|r| Some((r.profile(x)?.clone(), r.profile(y)?.clone())))
            .unzip();
        let result = distance_matrix(&px, cfg.metric)
            .and_then(|a| Ok((a, distance_matrix(&py, cfg.metric)?)))
            .and_then(|(a, b)| mantel(&a, &b, cfg.mantel_permutations, cfg.seed));
        mantel_rows.push(match result {
            Ok(m) => MantelRow { pair, result: Some(m), reason: None },
            Err(e) => MantelRow { pair, result: None, reason: Some(e.to_string()) },
        });
    }
    Ok(Comparison {
        summaries,
        mantel: mantel_rows,
    })
}

/// Writes `correlations.csv` (per clip), `correlation_summary.csv` and
/// `mantel.csv`. Rows that cannot be computed are written as `NA` and make
/// the outcome partial.
pub fn cmd_compare(paths: &[PathBuf], cfg: &AnalysisConfig, out_dir: &Path) -> Result<Outcome<Comparison>> {
    cfg.validate()?;
    let reports = load_reports(paths)?;
    let cmp = compare_reports(&reports, cfg)?;
    let mut warnings = Vec::new();

    let mut header = strings(&["label"]);
    header.extend(DOMAIN_PAIRS.iter().map(|&(x, y)| pair_name(x, y)));
    let per_clip = reports.iter().map(|r| {
        let mut row = vec![r.label.clone()];
        row.extend(DOMAIN_PAIRS.iter().map(|&(x, y)| opt_num(r.correlation(&pair_name(x, y)))));
        row
    });
    let per_clip = csv_bytes(&header, per_clip.collect::<Vec<_>>());

    let summary_rows = cmp.summaries.iter().map(|row| match &row.summary {
        Some(s) => vec![
            s.pair.clone(),
            s.count.to_string(),
            num(s.mean_r),
            s.min_label.clone(),
            num(s.min_r),
            s.max_label.clone(),
            num(s.max_r),
        ],
        None => {
            warnings.push(format!("{}: no correlations ({})", row.pair, row.reason.as_deref().unwrap_or("")));
            vec![row.pair.clone(), "0".into(), "NA".into(), String::new(), "NA".into(), String::new(), "NA".into()]
        }
    });
    let summary = csv_bytes(&strings(&SUMMARY_COLUMNS), summary_rows.collect::<Vec<_>>());

    let mantel_rows = cmp.mantel.iter().map(|row| match &row.result {
        Some(m) => vec![
            row.pair.clone(),
            num(m.r),
            num(m.p),
            m.significance().to_string(),
            m.permutations.to_string(),
            cfg.metric.to_string(),
        ],
        None => {
            warnings.push(format!("{}: Mantel test skipped ({})", row.pair, row.reason.as_deref().unwrap_or("")));
            vec![
                row.pair.clone(),
                "NA".into(),
                "NA".into(),
                "NA".into(),
                cfg.mantel_permutations.to_string(),
                cfg.metric.to_string(),
            ]
        }
    });
    let mantel_csv = csv_bytes(&strings(&MANTEL_COLUMNS), mantel_rows.collect::<Vec<_>>());

    let mut out = OutDir::create(out_dir)?;
    out.write("correlations.csv", per_clip)?;
    out.write("correlation_summary.csv", summary)?;
    out.write("mantel.csv", mantel_csv)?;
    let partial = !warnings.is_empty();
    Ok(out.finish(cmp, warnings, partial))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub domain: Domain,
    pub distances: DistanceMatrix,
    pub tree: Dendrogram,
    pub newick: String,
}

/// UPGMA over one domain's bin vectors. Reports lacking the domain are
/// left out with a warning.
pub fn cmd_cluster(
    paths: &[PathBuf],
    domain: Domain,
    cfg: &AnalysisConfig,
    out_dir: &Path,
) -> Result<Outcome<Clustering>> {
    let reports = load_reports(paths)?;
    let mut warnings = Vec::new();
    let mut profiles = Vec::new();
    for r in &reports {
        match r.profile(domain) {
            Some(p) => profiles.push(RFormantProfile { label: r.label.clone(), ..p.clone() }),
            None => warnings.push(format!("{}: {domain} absent, excluded", r.label)),
        }
    }
    if profiles.len() < 2 {
        return Err(Error::TooShort(format!(
            "clustering needs at least 2 reports with {domain}, got {}",
            profiles.len()
        )));
    }
    let distances = distance_matrix(&profiles, cfg.metric)?;
    let tree = upgma(&distances)?;
    let newick = to_newick(&tree);
    let key = domain.key();
    let mut out = OutDir::create(out_dir)?;
    out.write(&format!("distance_{key}.csv"), distances.to_csv())?;
    out.write(&format!("dendrogram_{key}.nwk"), format!("{newick}\n"))?;
    out.write(
        &format!("dendrogram_{key}.svg"),
        svg::dendrogram(&format!("{domain} UPGMA, {} distance", cfg.metric), &tree, &profiles),
    )?;
    let partial = !warnings.is_empty();
    Ok(out.finish(
        Clustering {
            domain,
            distances,
            tree,
            newick,
        },
        warnings,
        partial,
    ))
}

/// Time unit of annotation files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    S,
    Ms,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::S => 1.0,
            TimeUnit::Ms => 1e-3,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeUnit::S => "s",
            TimeUnit::Ms => "ms",
        })
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(TimeUnit::S),
            "ms" => Ok(TimeUnit::Ms),
            _ => Err(Error::InvalidParameter(format!("unknown unit {s:?} (expected s or ms)"))),
        }
    }
}

/// Re-expresses a tier in seconds.
pub fn tier_in_seconds(tier: &AnnotationTier, unit: TimeUnit) -> Result<AnnotationTier> {
    let k = unit.seconds();
    let intervals = tier
        .intervals()
        .iter()
        .map(|iv| Interval {
            start: iv.start * k,
            end: iv.end * k,
            label: iv.label.clone(),
        })
        .collect();
    AnnotationTier::new(tier.name(), intervals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PviReport {
    pub tier: String,
    pub unit: TimeUnit,
    /// Raw PVI in the annotation's time unit.
    pub rpvi: f64,
    pub npvi: f64,
    pub rates: TierRates,
    pub wagner_quadrants: Option<QuadrantCounts>,
}

/// Isochrony metrics for one annotation tier.
pub fn pvi_report(tier: &AnnotationTier, unit: TimeUnit, cfg: &AnalysisConfig) -> Result<(PviReport, Vec<(f64, f64)>)> {
    let d = DurationVector::from_tier(tier)?;
    let rates = rates_from_annotation(&tier_in_seconds(tier, unit)?)?;
    let wagner = if d.len() >= 3 { Some(wagner_pairs(&d, cfg.z_deviation)?) } else { None };
    let report = PviReport {
        tier: tier.name().to_string(),
        unit,
        rpvi: rpvi(&d),
        npvi: npvi(&d),
        rates,
        wagner_quadrants: wagner.as_ref().map(|w| w.quadrants),
    };
    Ok((report, wagner.map(|w| w.pairs).unwrap_or_default()))
}

/// Writes `pvi_<tier>.json` and, when there are at least three intervals,
/// `wagner_<tier>.csv` and `wagner_<tier>.svg`.
pub fn cmd_pvi(path: &Path, unit: TimeUnit, cfg: &AnalysisConfig, out_dir: &Path) -> Result<Outcome<PviReport>> {
    let tier = AnnotationTier::from_csv(path)?;
    let (report, pairs) = pvi_report(&tier, unit, cfg)?;
    let mut out = OutDir::create(out_dir)?;
    let name = tier.name();
    out.write(&format!("pvi_{name}.json"), json_bytes(&report))?;
    let mut warnings = Vec::new();
    if pairs.is_empty() {
        warnings.push(format!("{name}: fewer than 3 intervals, no Wagner scatter"));
    } else {
        let d = tier.durations();
        let rows = pairs.iter().enumerate().map(|(k, &(za, zb))| {
            vec![(k + 1).to_string(), num(d[k]), num(d[k + 1]), num(za), num(zb)]
        });
        out.write(
            &format!("wagner_{name}.csv"),
            csv_bytes(&strings(&["k", "d_k", "d_k1", "z_k", "z_k1"]), rows.collect::<Vec<_>>()),
        )?;
        out.write(
            &format!("wagner_{name}.svg"),
            svg::wagner_scatter(&format!("{name} Wagner scatter"), &pairs),
        )?;
    }
    Ok(out.finish(report, warnings, false))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub label: String,
    pub words: TierRates,
    pub syllables: TierRates,
    pub predicted: FormantPrediction,
    /// Top-ranked AMS frequencies.
    pub peaks: Vec<Peak>,
    /// Contiguous run of top peaks around the strongest one.
    pub cluster: FormantCluster,
    pub measured_hz: f64,
    pub error_hz: f64,
}

/// Compares the R-formant predicted from word and syllable rates with the
/// dominant AMS peak cluster of a clip. Peaks at most two frequency steps
/// apart belong to one cluster; its midpoint is the measured value.
pub fn calibrate(
    sig: &SignalBuffer,
    words: &AnnotationTier,
    syllables: &AnnotationTier,
    cfg: &AnalysisConfig,
) -> Result<CalibrationReport> {
    let a = analyze_signal(sig, cfg)?;
    let w = rates_from_annotation(words)?;
    let s = rates_from_annotation(syllables)?;
    let predicted = predict_formant_range(w.rate_hz, s.rate_hz)?;
    let peaks = a.ams.profile.peaks.clone();
    let step = a.ams.spectrum.delta_f().unwrap_or(0.0);
    let cluster = dominant_cluster(&peaks, 2.0 * step)
        .ok_or_else(|| Error::InvalidInput("no AMS peaks (n_peaks = 0?)".into()))?;
    Ok(CalibrationReport {
        label: sig.label().to_string(),
        words: w,
        syllables: s,
        predicted,
        peaks,
        cluster,
        measured_hz: cluster.mid,
        error_hz: (predicted.center - cluster.mid).abs(),
    })
}

/// Runs [`calibrate`] on files and writes `calibration_<label>.json`.
pub fn cmd_calibrate(
    wav: &Path,
    words: &Path,
    syllables: &Path,
    unit: TimeUnit,
    cfg: &AnalysisConfig,
    out_dir: &Path,
) -> Result<Outcome<CalibrationReport>> {
    cfg.validate()?;
    let sig = load_wav(wav, Some(cfg.trim_s))?;
    let w = tier_in_seconds(&AnnotationTier::from_csv(words)?, unit)?;
    let s = tier_in_seconds(&AnnotationTier::from_csv(syllables)?, unit)?;
    let report = calibrate(&sig, &w, &s, cfg)?;
    let mut out = OutDir::create(out_dir)?;
    out.write(&format!("calibration_{}.json", report.label), json_bytes(&report))?;
    Ok(out.finish(report, Vec::new(), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::write_wav_i16;
    use crate::synth;

    fn tier(name: &str, durations: &[f64]) -> AnnotationTier {
        let mut t = 0.0;
        let intervals = durations
            .iter()
            .map(|&d| {
                let iv = Interval { start: t, end: t + d, label: "x".into() };
                t += d;
                iv
            })
            .collect();
        AnnotationTier::new(name, intervals).unwrap()
    }

    #[test]
    fn pvi_alternating() {
        let t = tier("alt", &[2.0, 4.0, 2.0, 4.0, 2.0, 4.0]);
        let (r, pairs) = pvi_report(&t, TimeUnit::Ms, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.rpvi, 200.0);
        assert!((r.npvi - 66.6667).abs() < 1e-3);
        assert!((r.rates.rate_hz - 6.0 / 0.018).abs() < 1e-9);
        assert_eq!(pairs.len(), 5);
        let q = r.wagner_quadrants.unwrap();
        assert_eq!((q.neg_pos, q.pos_neg), (3, 2));
    }

    #[test]
    fn pvi_single_interval_fails() {
        let t = tier("one", &[0.3]);
        assert!(pvi_report(&t, TimeUnit::S, &AnalysisConfig::default()).is_err());
    }

    #[test]
    fn calibration_degenerate_match() {
        let sig = synth::am_tone(0.8, 440.0, 4.0, 1.0, 8000.0, 5.0, "am").unwrap();
        let w = tier("w", &[0.25; 20]);
        let s = tier("s", &[0.25; 20]);
        let r = calibrate(&sig, &w, &s, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.predicted.center, 4.0);
        assert!(r.error_hz <= 0.25, "{r:?}");
    }

    #[test]
    fn analyze_writes_combined_bins() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for (i, f) in [3.0, 4.0, 5.0].iter().enumerate() {
            let sig = synth::am_tone(0.5, 300.0, *f, 1.0, 8000.0, 3.0, "x").unwrap();
            let p = dir.path().join(format!("clip{i}.wav"));
            write_wav_i16(&p, &sig).unwrap();
            paths.push(p);
        }
        let out = dir.path().join("out");
        let cfg = AnalysisConfig::default();
        let o = cmd_analyze(&paths, &cfg, &out, 2).unwrap();
        assert_eq!(o.value.len(), 3);
        let text = std::fs::read_to_string(out.join("bins_ams.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("label,domain,bin_0,"));
        assert!(lines[1].starts_with("clip0,AMS,"));
        assert_eq!(lines[1].split(',').count(), 12);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(check_unique(["a", "b", "b"].into_iter()).is_err());
        assert!(check_unique(["a", "b", "c"].into_iter()).is_ok());
    }
}
