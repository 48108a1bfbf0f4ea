//! AMS and AEMS of an amplitude-modulated tone: the modulation rate appears as
//! the strongest low-frequency peak.

use rformant::demodulation::{envelope_peak_pick, rectify};
use rformant::lts::{long_term_spectrum, normalize_log_detrend, square_for_display, Domain};
use rformant::profile::{profile, rhythm_bars};
use rformant::{audio_io::resample, synth};

fn main() -> rformant::Result<()> {
    let mod_hz = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let sig = synth::am_tone(0.8, 440.0, mod_hz, 1.0, 16000.0, 5.0, "am")?;
    let rectified = rectify(&sig);

    let ams = long_term_spectrum(&resample(&rectified, 200.0)?, Domain::Ams)?;
    let aems = long_term_spectrum(&envelope_peak_pick(&rectified, 20.0, 5.0)?, Domain::Aems)?;
    for spec in [ams, aems] {
        let band = normalize_log_detrend(&spec, (1.0, 10.0))?;
        let p = profile(&band, 6, 10)?;
        println!("{} (resolution {:.2} Hz)", spec.domain(), spec.delta_f().unwrap_or(0.0));
        println!("  top peaks: {:?}", p.peaks.iter().map(|pk| pk.freq).collect::<Vec<_>>());
        println!("  rhythm bars: {:?}", rhythm_bars(&band, 8)?);
        println!("  bins: {:?}", p.bins.iter().map(|b| (b * 100.0).round() / 100.0).collect::<Vec<_>>());
        let display = square_for_display(&band)?;
        let (i, _) = display
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        println!("  display maximum at {:.1} Hz", band.freqs()[i]);
    }
    Ok(())
}
