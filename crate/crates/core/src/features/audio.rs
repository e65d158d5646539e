use std::path::Path;

use super::FeatureError;

/// Mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, FeatureError> {
        if sample_rate == 0 {
            return Err(FeatureError::InvalidAudio("zero sample rate".into()));
        }
        if samples.is_empty() {
            return Err(FeatureError::InvalidAudio("empty buffer".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(FeatureError::InvalidAudio(format!(
                "sample {i} = {} outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(AudioBuffer {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Reads a 16-bit PCM mono RIFF/WAVE file.
pub fn read_wav(path: &Path) -> Result<AudioBuffer, FeatureError> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(FeatureError::InvalidAudio(format!(
            "{}: expected 16-bit PCM mono, got {} channel(s), {} bits, {:?}",
            path.display(),
            spec.channels,
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<Result<Vec<_>, _>>()?;
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Writes a 16-bit PCM mono RIFF/WAVE file, rounding to the nearest code.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<(), FeatureError> {
    std::fs::write(path, encode_wav(audio)?)?;
    Ok(())
}

/// The bytes [`write_wav`] would write.
pub fn encode_wav(audio: &AudioBuffer) -> Result<Vec<u8>, FeatureError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = std::io::Cursor::new(Vec::new());
    let mut writer = hound::WavWriter::new(&mut buf, spec)?;
    for &s in &audio.samples {
        let code = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(code)?;
    }
    writer.finalize()?;
    Ok(buf.into_inner())
}
