use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::dct::DctMatrix;
use super::deltas::append_deltas;
use super::{AudioBuffer, FeatureError, FeatureMatrix, LOG_FLOOR};

/// Linear-frequency cepstral coefficient front-end settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LfccConfig {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub fft_size: usize,
    pub n_filters: usize,
    pub n_cepstral: usize,
    pub delta_window: usize,
    pub deltas: bool,
}

impl Default for LfccConfig {
    fn default() -> Self {
        LfccConfig {
            frame_length_ms: 20.0,
            frame_shift_ms: 10.0,
            fft_size: 512,
            n_filters: 20,
            n_cepstral: 20,
            delta_window: 2,
            deltas: true,
        }
    }
}

impl LfccConfig {
    /// `(frame_length, frame_shift)` in samples.
    pub fn frame_samples(&self, sample_rate: u32) -> Result<(usize, usize), FeatureError> {
        let to_samples = |ms: f64| (ms * sample_rate as f64 / 1000.0).round() as usize;
        let len = to_samples(self.frame_length_ms);
        let shift = to_samples(self.frame_shift_ms);
        if len == 0 || shift == 0 || shift > len {
            return Err(FeatureError::InvalidConfig(format!(
                "need 0 < frame_shift <= frame_length, got {shift} and {len} samples"
            )));
        }
        if self.fft_size < len {
            return Err(FeatureError::InvalidConfig(format!(
                "fft_size {} shorter than the {len}-sample frame",
                self.fft_size
            )));
        }
        if self.n_filters == 0 || self.n_cepstral == 0 || self.n_cepstral > self.n_filters {
            return Err(FeatureError::InvalidConfig(format!(
                "need 0 < n_cepstral <= n_filters, got {} and {}",
                self.n_cepstral, self.n_filters
            )));
        }
        if self.delta_window == 0 {
            return Err(FeatureError::InvalidConfig("delta_window must be positive".into()));
        }
        Ok((len, shift))
    }

    pub fn output_dims(&self) -> usize {
        if self.deltas {
            3 * self.n_cepstral
        } else {
            self.n_cepstral
        }
    }
}

/// Triangular filters with edges equally spaced on `0..=fs/2`; row `j` peaks
/// at `(j + 1) · fs / (2 (n_filters + 1))`. Each row has `fft_size / 2 + 1`
/// weights over the one-sided spectrum.
pub fn linear_filterbank(n_filters: usize, fft_size: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let nyquist = sample_rate as f64 / 2.0;
    let edge = |i: usize| nyquist * i as f64 / (n_filters + 1) as f64;
    let n_bins = fft_size / 2 + 1;
    (0..n_filters)
        .map(|j| {
            let (lo, mid, hi) = (edge(j), edge(j + 1), edge(j + 2));
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * sample_rate as f64 / fft_size as f64;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= mid {
                        (f - lo) / (mid - lo)
                    } else {
                        (hi - f) / (hi - mid)
                    }
                })
                .collect()
        })
        .collect()
}

/// Symmetric Hamming window.
fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Floored log filterbank energies, one row per frame.
pub fn lfcc_log_energies(
    audio: &AudioBuffer,
    cfg: &LfccConfig,
) -> Result<FeatureMatrix, FeatureError> {
    let (len, shift) = cfg.frame_samples(audio.sample_rate())?;
    let x = audio.samples();
    if x.len() < len {
        return Err(FeatureError::InputTooShort {
            needed: len,
            got: x.len(),
        });
    }
    let frames = (x.len() - len) / shift + 1;
    let window = hamming(len);
    let bank = linear_filterbank(cfg.n_filters, cfg.fft_size, audio.sample_rate());
    let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_size];
    let mut power = vec![0.0; cfg.fft_size / 2 + 1];
    let mut values = Vec::with_capacity(frames * cfg.n_filters);
    for t in 0..frames {
        let frame = &x[t * shift..t * shift + len];
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(if i < len { frame[i] * window[i] } else { 0.0 }, 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for row in &bank {
            let e: f64 = row.iter().zip(&power).map(|(w, p)| w * p).sum();
            values.push(e.max(LOG_FLOOR).ln());
        }
    }
    FeatureMatrix::new(frames, cfg.n_filters, values)
}

/// LFCCs: Hamming-windowed frames → power spectrum → linear triangular
/// filterbank → log with floor → orthonormal DCT-II with C0 kept → Δ, ΔΔ.
pub fn lfcc(audio: &AudioBuffer, cfg: &LfccConfig) -> Result<FeatureMatrix, FeatureError> {
    let energies = lfcc_log_energies(audio, cfg)?;
    let dct = DctMatrix::new(cfg.n_filters, 0, cfg.n_cepstral);
    let mut values = Vec::with_capacity(energies.frames() * cfg.n_cepstral);
    for row in energies.rows() {
        dct.apply(row, &mut values);
    }
    let stat = FeatureMatrix::new(energies.frames(), cfg.n_cepstral, values)?;
    Ok(if cfg.deltas {
        append_deltas(&stat, cfg.delta_window)
    } else {
        stat
    })
}
