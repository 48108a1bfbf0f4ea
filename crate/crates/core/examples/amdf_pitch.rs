//! AMDF pitch tracking, gap filling and the FEMS of a vibrato tone.

use std::f64::consts::PI;

use rformant::audio_io::SignalBuffer;
use rformant::demodulation::{amdf_f0, continuize_f0, AmdfParams};
use rformant::lts::{long_term_spectrum, normalize_log_detrend, Domain};
use rformant::profile::top_n_frequencies;

fn main() -> rformant::Result<()> {
    let rate = 16000.0;
    // 150 Hz tone with a 5 Hz, 10 Hz-deep vibrato, silent for 0.5 s in the middle
    let mut phase = 0.0;
    let samples: Vec<f64> = (0..(5.0 * rate) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            phase += 2.0 * PI * (150.0 + 10.0 * (2.0 * PI * 5.0 * t).sin()) / rate;
            if (2.0..2.5).contains(&t) { 0.0 } else { 0.5 * phase.sin() }
        })
        .collect();
    let sig = SignalBuffer::new(samples, rate, "vibrato")?;

    let raw = amdf_f0(&sig, &AmdfParams::default())?;
    let voiced: Vec<f64> = raw.values().iter().copied().filter(|&v| v > 0.0).collect();
    let (lo, hi) = voiced.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!(
        "{} frames at {} Hz, {:.0}% voiced, F0 range {lo:.1}..{hi:.1} Hz",
        raw.len(),
        raw.rate(),
        raw.voiced_fraction() * 100.0
    );

    let cont = continuize_f0(&raw)?;
    let fems = normalize_log_detrend(&long_term_spectrum(&cont, Domain::Fems)?, (1.0, 10.0))?;
    let top = top_n_frequencies(&fems, 3)?;
    println!("FEMS top frequencies: {:?}", top.iter().map(|p| (p.freq * 100.0).round() / 100.0).collect::<Vec<_>>());
    Ok(())
}
