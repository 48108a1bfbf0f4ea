//! Predicted R-formant from annotated word and syllable rates versus the
//! dominant AMS peaks of an isochronous pulse train.

use rformant::isochrony::{AnnotationTier, Interval};
use rformant::report::{calibrate, AnalysisConfig};
use rformant::synth;

fn tier(name: &str, count: usize, total_s: f64) -> rformant::Result<AnnotationTier> {
    let d = total_s / count as f64;
    let intervals = (0..count)
        .map(|i| Interval { start: i as f64 * d, end: (i + 1) as f64 * d, label: format!("{name}{i}") })
        .collect();
    AnnotationTier::new(name, intervals)
}

fn main() -> rformant::Result<()> {
    let pulse_hz = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4.35);
    let sig = synth::pulse_train(0.8, 440.0, pulse_hz, 1.0, 16000.0, 5.0, "counting")?;
    let words = tier("word", 30, 9.667)?;
    let syllables = tier("syllable", 60, 9.667)?;
    let r = calibrate(&sig, &words, &syllables, &AnalysisConfig::default())?;
    println!("word rate      {:.2} Hz", r.words.rate_hz);
    println!("syllable rate  {:.2} Hz", r.syllables.rate_hz);
    println!("predicted      {:.2} Hz ({:.2}..{:.2})", r.predicted.center, r.predicted.lo, r.predicted.hi);
    println!("measured       {:.2} Hz ({:.2}..{:.2}, {} peaks)", r.measured_hz, r.cluster.lo, r.cluster.hi, r.cluster.members);
    println!("difference     {:.2} Hz", r.error_hz);
    Ok(())
}
