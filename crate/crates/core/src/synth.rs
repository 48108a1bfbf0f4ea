//! Deterministic test signals: tones, sawtooths, amplitude-modulated carriers
//! and isochronous pulse trains.

use std::f64::consts::PI;

use crate::audio_io::SignalBuffer;
use crate::error::{Error, Result};

fn sample_count(rate: f64, seconds: f64) -> Result<usize> {
    if !(rate > 0.0 && seconds > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need rate > 0 and seconds > 0 (got {rate}, {seconds})"
        )));
    }
    Ok((rate * seconds).round() as usize)
}

fn generate(
    rate: f64,
    seconds: f64,
    label: &str,
    f: impl Fn(f64) -> f64,
) -> Result<SignalBuffer> {
    let n = sample_count(rate, seconds)?;
    let samples = (0..n).map(|i| f(i as f64 / rate)).collect();
    SignalBuffer::from_clipped(samples, rate, label)
}

pub fn silence(rate: f64, seconds: f64, label: &str) -> Result<SignalBuffer> {
    generate(rate, seconds, label, |_| 0.0)
}

pub fn sine(amplitude: f64, freq: f64, rate: f64, seconds: f64, label: &str) -> Result<SignalBuffer> {
    generate(rate, seconds, label, |t| amplitude * (2.0 * PI * freq * t).sin())
}

/// Rising sawtooth in `[-amplitude, amplitude)`.
pub fn sawtooth(
    amplitude: f64,
    freq: f64,
    rate: f64,
    seconds: f64,
    label: &str,
) -> Result<SignalBuffer> {
    let n = sample_count(rate, seconds)?;
    let period = rate / freq;
    let samples = (0..n)
        .map(|i| {
            let phase = (i as f64 % period) / period;
            amplitude * (2.0 * phase - 1.0)
        })
        .collect();
    SignalBuffer::from_clipped(samples, rate, label)
}

/// Sinusoidal carrier with sinusoidal amplitude modulation.
///
/// The envelope is `(1 + depth * sin(2 pi mod_hz t)) / (1 + depth)`, so
/// `depth = 1` is 100 % modulation and the peak amplitude is `amplitude`.
pub fn am_tone(
    amplitude: f64,
    carrier_hz: f64,
    mod_hz: f64,
    depth: f64,
    rate: f64,
    seconds: f64,
    label: &str,
) -> Result<SignalBuffer> {
    generate(rate, seconds, label, |t| {
        let env = (1.0 + depth * (2.0 * PI * mod_hz * t).sin()) / (1.0 + depth);
        amplitude * env * (2.0 * PI * carrier_hz * t).sin()
    })
}

/// Carrier gated by an isochronous train of raised-cosine bursts.
///
/// Each period of `1 / pulse_hz` seconds opens with a Hann-shaped burst lasting
/// `duty` of the period; the rest of the period is silent. `duty = 1` gives a
/// fully modulated raised-cosine envelope.
pub fn pulse_train(
    amplitude: f64,
    carrier_hz: f64,
    pulse_hz: f64,
    duty: f64,
    rate: f64,
    seconds: f64,
    label: &str,
) -> Result<SignalBuffer> {
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(Error::InvalidParameter(format!("duty {duty} must be in (0, 1]")));
    }
    generate(rate, seconds, label, |t| {
        let phase = (t * pulse_hz).fract() / duty;
        let env = if phase < 1.0 {
            0.5 * (1.0 - (2.0 * PI * phase).cos())
        } else {
            0.0
        };
        amplitude * env * (2.0 * PI * carrier_hz * t).sin()
    })
}
