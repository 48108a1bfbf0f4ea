//! WAV decoding, trimming and resampling into [`SignalBuffer`]s.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Uniformly sampled audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    rate: f64,
    label: String,
}

impl SignalBuffer {
    /// Builds a buffer, rejecting an empty sample vector, a nonpositive rate
    /// and samples outside `[-1, 1]`.
    pub fn new(samples: Vec<f64>, rate: f64, label: impl Into<String>) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample rate {rate} must be > 0")));
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if let Some(s) = samples.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
            return Err(Error::InvalidInput(format!("sample {s} outside [-1, 1]")));
        }
        Ok(Self {
            samples,
            rate,
            label: label.into(),
        })
    }

    /// Builds a buffer after clipping every sample into `[-1, 1]`.
    pub fn from_clipped(samples: Vec<f64>, rate: f64, label: impl Into<String>) -> Result<Self> {
        let samples = samples
            .into_iter()
            .map(|s| if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) })
            .collect();
        Self::new(samples, rate, label)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in seconds, `len / rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn map_samples(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| f(s)).collect(),
            rate: self.rate,
            label: self.label.clone(),
        }
    }

    /// Keeps at most the first `seconds` of audio. Longer requests return the
    /// whole buffer unchanged.
    pub fn trimmed(&self, seconds: f64) -> Result<Self> {
        if !(seconds > 0.0) {
            return Err(Error::InvalidParameter(format!("trim {seconds} s must be > 0")));
        }
        let keep = ((seconds * self.rate).round() as usize).clamp(1, self.samples.len());
        Ok(Self {
            samples: self.samples[..keep].to_vec(),
            rate: self.rate,
            label: self.label.clone(),
        })
    }
}

/// Decodes a PCM (8/16/24-bit integer or 32-bit float) mono or stereo WAV file.
///
/// Stereo is mixed down by the per-frame channel mean. When `trim_s` is given
/// only the first `min(trim_s, duration)` seconds are kept. The label is the
/// file stem.
pub fn load_wav(path: impl AsRef<Path>, trim_s: Option<f64>) -> Result<SignalBuffer> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(std::io::BufReader::new(file)).map_err(|source| Error::Wav {
        path: path.to_path_buf(),
        source,
    })?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::UnsupportedEncoding(format!("{channels} channels")));
    }
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (8 | 16 | 24)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{format:?} {bits}-bit")));
        }
    };
    if interleaved.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sig = SignalBuffer::from_clipped(mono, f64::from(spec.sample_rate), label)?;
    match trim_s {
        Some(seconds) => sig.trimmed(seconds),
        None => Ok(sig),
    }
}

/// Writes a buffer as 16-bit mono PCM. The rate is rounded to whole Hz.
pub fn write_wav_i16(path: impl AsRef<Path>, sig: &SignalBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: sig.rate().round() as u32,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let to_err = |source| match source {
        hound::Error::IoError(e) => Error::io(path, e),
        source => Error::Wav {
            path: path.to_path_buf(),
            source,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(to_err)?;
    for &s in sig.samples() {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(to_err)?;
    }
    writer.finalize().map_err(to_err)
}

/// Changes the sample rate.
///
/// Downsampling by an integer factor `k` replaces each `k`-sample block by its
/// mean (a trailing partial block is dropped). Any other ratio uses linear
/// interpolation. Both paths preserve a constant (DC) level exactly.
pub fn resample(sig: &SignalBuffer, target_rate: f64) -> Result<SignalBuffer> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target rate {target_rate} must be > 0"
        )));
    }
    let rate = sig.rate();
    if (target_rate - rate).abs() <= 1e-9 * rate {
        return Ok(sig.clone());
    }
    let ratio = rate / target_rate;
    let k = ratio.round();
    let samples: Vec<f64> = if ratio > 1.0 && (ratio - k).abs() <= 1e-9 * ratio {
        let k = k as usize;
        sig.samples()
            .chunks_exact(k)
            .map(|block| block.iter().sum::<f64>() / k as f64)
            .collect()
    } else {
        let src = sig.samples();
        let last = (src.len() - 1) as f64;
        let count = (last / ratio).floor() as usize + 1;
        (0..count)
            .map(|j| {
                let x = (j as f64 * ratio).min(last);
                let i = x.floor() as usize;
                let frac = x - i as f64;
                if i + 1 < src.len() {
                    src[i] + frac * (src[i + 1] - src[i])
                } else {
                    src[i]
                }
            })
            .collect()
    };
    if samples.is_empty() {
        return Err(Error::TooShort(format!(
            "{} samples cannot be decimated by {}",
            sig.len(),
            k
        )));
    }
    SignalBuffer::from_clipped(samples, target_rate, sig.label())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(path: &Path, spec: WavSpec, frames: &[Vec<i32>]) {
        let mut w = WavWriter::create(path, spec).unwrap();
        for frame in frames {
            for &s in frame {
                match spec.bits_per_sample {
                    8 => w.write_sample(s as i8).unwrap(),
                    16 => w.write_sample(s as i16).unwrap(),
                    _ => w.write_sample(s).unwrap(),
                }
            }
        }
        w.finalize().unwrap();
    }

    fn int_spec(channels: u16, rate: u32, bits: u16) -> WavSpec {
        WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: bits,
            sample_format: SampleFormat::Int,
        }
    }

    #[test]
    fn zero_file_loads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("silence.wav");
        write_raw(&path, int_spec(1, 16000, 16), &vec![vec![0]; 16000]);
        let sig = load_wav(&path, None).unwrap();
        assert_eq!(sig.len(), 16000);
        assert_eq!(sig.rate(), 16000.0);
        assert_eq!(sig.label(), "silence");
        assert!(sig.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn stereo_antiphase_mixes_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let frames: Vec<Vec<i32>> = (0..100).map(|i| vec![i * 100, -i * 100]).collect();
        write_raw(&path, int_spec(2, 8000, 16), &frames);
        let sig = load_wav(&path, None).unwrap();
        assert_eq!(sig.len(), 100);
        assert!(sig.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn mixdown_is_channel_order_invariant() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");
        let frames: Vec<Vec<i32>> = (0..64).map(|i| vec![i * 37 - 900, 500 - i * 11]).collect();
        let swapped: Vec<Vec<i32>> = frames.iter().map(|f| vec![f[1], f[0]]).collect();
        write_raw(&a, int_spec(2, 8000, 16), &frames);
        write_raw(&b, int_spec(2, 8000, 16), &swapped);
        assert_eq!(
            load_wav(&a, None).unwrap().samples(),
            load_wav(&b, None).unwrap().samples()
        );
    }

    #[test]
    fn integer_depths_scale_into_unit_range() {
        let dir = tempfile::tempdir().unwrap();
        for (bits, max) in [(8u16, 127i32), (16, 32767), (24, 8_388_607)] {
            let path = dir.path().join(format!("b{bits}.wav"));
            let min = -max - 1;
            write_raw(&path, int_spec(1, 1000, bits), &[vec![min], vec![0], vec![max]]);
            let sig = load_wav(&path, None).unwrap();
            assert_eq!(sig.samples()[0], -1.0);
            assert_eq!(sig.samples()[1], 0.0);
            let expect = f64::from(max) / f64::from(1u32 << (bits - 1));
            assert!((sig.samples()[2] - expect).abs() < 1e-12, "{bits}-bit");
        }
    }

    #[test]
    fn float_wav_is_clipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 100,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for s in [0.25f32, 1.5, -2.0] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        let sig = load_wav(&path, None).unwrap();
        assert_eq!(sig.samples(), &[0.25, 1.0, -1.0]);
    }

    #[test]
    fn trim_to_five_seconds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.wav");
        write_raw(&path, int_spec(1, 8000, 16), &vec![vec![100]; 12 * 8000]);
        let sig = load_wav(&path, Some(5.0)).unwrap();
        assert_eq!(sig.len(), 40000);
        assert_eq!(sig.duration(), 5.0);
        let whole = load_wav(&path, Some(60.0)).unwrap();
        assert_eq!(whole.duration(), 12.0);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.wav");
        write_raw(&empty, int_spec(1, 8000, 16), &[]);
        assert!(matches!(load_wav(&empty, None), Err(Error::EmptyAudio)));

        let junk = dir.path().join("junk.wav");
        std::fs::write(&junk, b"RIFF\x10\x00\x00\x00WAVEfmt ").unwrap();
        assert!(matches!(load_wav(&junk, None), Err(Error::Wav { .. })));

        let truncated = dir.path().join("trunc.wav");
        write_raw(&truncated, int_spec(1, 8000, 16), &vec![vec![5]; 1000]);
        let bytes = std::fs::read(&truncated).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() - 501]).unwrap();
        assert!(load_wav(&truncated, None).is_err());

        let quad = dir.path().join("quad.wav");
        write_raw(&quad, int_spec(4, 8000, 16), &[vec![0, 0, 0, 0]]);
        assert!(matches!(
            load_wav(&quad, None),
            Err(Error::UnsupportedEncoding(_))
        ));

        let i32wav = dir.path().join("i32.wav");
        write_raw(&i32wav, int_spec(1, 8000, 32), &[vec![0]]);
        assert!(matches!(
            load_wav(&i32wav, None),
            Err(Error::UnsupportedEncoding(_))
        ));

        assert!(matches!(
            load_wav(dir.path().join("missing.wav"), None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn resample_identity_and_dc() {
        let sig = SignalBuffer::new(vec![0.1, -0.3, 0.7, 0.2], 16000.0, "x").unwrap();
        assert_eq!(resample(&sig, 16000.0).unwrap(), sig);

        let dc = SignalBuffer::new(vec![0.5; 16000 * 5], 16000.0, "dc").unwrap();
        let down = resample(&dc, 200.0).unwrap();
        assert_eq!(down.len(), 1000);
        assert_eq!(down.rate(), 200.0);
        assert!(down.samples().iter().all(|&s| (s - 0.5).abs() < 1e-15));

        let odd = resample(&dc, 300.7).unwrap();
        assert!(odd.samples().iter().all(|&s| (s - 0.5).abs() < 1e-15));
        let up = resample(&sig, 48000.0).unwrap();
        assert_eq!(up.samples()[0], 0.1);
        assert_eq!(up.samples()[3], -0.3);
        assert_eq!(up.samples()[6], 0.7);
        assert!((up.samples()[1] - (0.1 + (-0.4) / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn block_mean_decimation() {
        let sig = SignalBuffer::new(vec![0.0, 1.0, 0.5, 0.5, 0.2, 0.4, 0.9], 6.0, "b").unwrap();
        let out = resample(&sig, 3.0).unwrap();
        assert_eq!(out.samples(), &[0.5, 0.5, 0.30000000000000004]);
    }

    #[test]
    fn resample_rejects_bad_rate() {
        let sig = SignalBuffer::new(vec![0.0; 10], 100.0, "r").unwrap();
        assert!(resample(&sig, 0.0).is_err());
        assert!(resample(&sig, -5.0).is_err());
        assert!(resample(&sig, 1.0).is_err());
    }

    #[test]
    fn load_then_identity_resample_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.wav");
        let orig: Vec<f64> = (0..800).map(|i| 0.8 * (i as f64 * 0.05).sin()).collect();
        let sig = SignalBuffer::new(orig.clone(), 8000.0, "q").unwrap();
        write_wav_i16(&path, &sig).unwrap();
        let loaded = load_wav(&path, None).unwrap();
        let same = resample(&loaded, 8000.0).unwrap();
        for (a, b) in orig.iter().zip(same.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }
}
