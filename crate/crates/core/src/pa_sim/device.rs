use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::conv::fft_convolve;
use super::{PaSimError, Quality};
use crate::features::AudioBuffer;

/// Stopband attenuation of the device band-pass.
const STOPBAND_DB: f64 = 60.0;

/// Widest transition band used at either edge.
const MAX_TRANSITION_HZ: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayDeviceSpec {
    pub quality: Quality,
    /// `(low, high)` in Hz. `low = 0` and `high = fs/2` disable the edges.
    pub passband: (f64, f64),
    /// Soft-clipping drive `g`; zero is linear.
    pub nonlinearity_drive: f64,
}

impl ReplayDeviceSpec {
    pub fn validate(&self, sample_rate: u32) -> Result<(), PaSimError> {
        let (lo, hi) = self.passband;
        let nyquist = sample_rate as f64 / 2.0;
        if !(lo >= 0.0 && lo < hi && hi <= nyquist) {
            return Err(PaSimError::InvalidDevice(format!(
                "passband ({lo}, {hi}) not inside (0, {nyquist}]"
            )));
        }
        if !(self.nonlinearity_drive >= 0.0 && self.nonlinearity_drive.is_finite()) {
            return Err(PaSimError::InvalidDevice(format!(
                "drive {}",
                self.nonlinearity_drive
            )));
        }
        Ok(())
    }

    /// Whether the device leaves its input untouched.
    pub fn is_transparent(&self, sample_rate: u32) -> bool {
        self.nonlinearity_drive == 0.0
            && self.passband.0 <= 0.0
            && self.passband.1 >= sample_rate as f64 / 2.0
    }
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Odd-length linear-phase Kaiser band-pass for the device passband, or
/// `None` when both edges are disabled.
///
/// The passband edges sit at `low` and `high`; cutoffs are placed half a
/// transition band outside them so the passband itself is flat.
pub fn device_filter(passband: (f64, f64), sample_rate: u32) -> Option<Vec<f64>> {
    let fs = sample_rate as f64;
    let nyquist = fs / 2.0;
    let (lo, hi) = passband;
    let lo_edge = lo > 0.0;
    let hi_edge = hi < nyquist;
    if !lo_edge && !hi_edge {
        return None;
    }
    let lo_width = if lo_edge { lo.min(MAX_TRANSITION_HZ) } else { f64::INFINITY };
    let hi_width = if hi_edge {
        (nyquist - hi).min(MAX_TRANSITION_HZ)
    } else {
        f64::INFINITY
    };
    let width = lo_width.min(hi_width);
    // Kaiser design: taps ≈ (A − 8) / (2.285 Δω), β = 0.1102 (A − 8.7).
    let dw = 2.0 * PI * width / fs;
    let mut taps = ((STOPBAND_DB - 8.0) / (2.285 * dw)).ceil() as usize + 1;
    if taps % 2 == 0 {
        taps += 1;
    }
    let beta = 0.1102 * (STOPBAND_DB - 8.7);
    let f_hi = if hi_edge { (hi + hi_width / 2.0) / fs } else { 0.5 };
    let f_lo = if lo_edge { (lo - lo_width / 2.0) / fs } else { 0.0 };
    let half = (taps / 2) as f64;
    let norm = bessel_i0(beta);
    let h = (0..taps)
        .map(|i| {
            let n = i as f64 - half;
            let ideal = if n == 0.0 {
                2.0 * (f_hi - f_lo)
            } else {
                ((2.0 * PI * f_hi * n).sin() - (2.0 * PI * f_lo * n).sin()) / (PI * n)
            };
            let ratio = n / half;
            ideal * bessel_i0(beta * (1.0 - ratio * ratio).max(0.0).sqrt()) / norm
        })
        .collect();
    Some(h)
}

/// Band-pass then `tanh(g x) / tanh(g)`; output has the input's length.
///
/// A filtered signal whose peak exceeds 1 is scaled to unit peak before the
/// clipper, which keeps the output within [−1, 1].
pub fn apply_device_samples(
    x: &[f64],
    device: &ReplayDeviceSpec,
    sample_rate: u32,
) -> Result<Vec<f64>, PaSimError> {
    device.validate(sample_rate)?;
    let mut y = match device_filter(device.passband, sample_rate) {
        Some(h) => {
            let full = fft_convolve(x, &h);
            let delay = h.len() / 2;
            full[delay..delay + x.len()].to_vec()
        }
        None => x.to_vec(),
    };
    let peak = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak > 1.0 {
        y.iter_mut().for_each(|v| *v /= peak);
    }
    let g = device.nonlinearity_drive;
    if g > 0.0 {
        let t = g.tanh();
        y.iter_mut().for_each(|v| *v = (g * *v).tanh() / t);
    }
    Ok(y)
}

pub fn apply_replay_device(
    audio: &AudioBuffer,
    device: &ReplayDeviceSpec,
) -> Result<AudioBuffer, PaSimError> {
    let y = apply_device_samples(audio.samples(), device, audio.sample_rate())?;
    Ok(AudioBuffer::new(y, audio.sample_rate())?)
}
