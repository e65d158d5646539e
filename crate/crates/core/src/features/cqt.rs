use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::{AudioBuffer, CqccConfig, FeatureError};

/// Bin layout of a constant-Q transform.
#[derive(Debug, Clone, PartialEq)]
pub struct CqtGeometry {
    /// Centre frequencies `f_min · 2^(k/B)` in Hz.
    pub freqs: Vec<f64>,
    /// Hann window length of each bin, `ceil(Q · fs / f_k)` samples.
    pub window_lengths: Vec<usize>,
    /// Quality factor `f_k / Δf_k = 1 / (2^(1/B) − 1)`.
    pub q: f64,
    pub hop: usize,
    pub sample_rate: u32,
    pub bins_per_octave: usize,
}

impl CqtGeometry {
    pub fn bins(&self) -> usize {
        self.freqs.len()
    }

    /// Window length of the lowest bin.
    pub fn longest_window(&self) -> usize {
        self.window_lengths[0]
    }
}

pub fn cqt_geometry(cfg: &CqccConfig, sample_rate: u32) -> Result<CqtGeometry, FeatureError> {
    let (f_min, f_max) = cfg.frequency_range(sample_rate)?;
    let b = cfg.bins_per_octave as f64;
    // Every k with f_k strictly below f_max; the small slack absorbs rounding
    // when the ratio is a whole number of bins.
    let n_bins = (b * (f_max / f_min).log2() - 1e-9).ceil() as usize;
    if n_bins == 0 {
        return Err(FeatureError::InvalidConfig(
            "frequency range narrower than one bin".into(),
        ));
    }
    let q = 1.0 / (2f64.powf(1.0 / b) - 1.0);
    let fs = sample_rate as f64;
    let freqs: Vec<f64> = (0..n_bins)
        .map(|k| f_min * 2f64.powf(k as f64 / b))
        .collect();
    let window_lengths = freqs.iter().map(|f| (q * fs / f).ceil() as usize).collect();
    Ok(CqtGeometry {
        freqs,
        window_lengths,
        q,
        hop: cfg.hop,
        sample_rate,
        bins_per_octave: cfg.bins_per_octave,
    })
}

/// Frame-major complex constant-Q coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CqtMatrix {
    pub geometry: CqtGeometry,
    frames: usize,
    values: Vec<Complex64>,
}

impl CqtMatrix {
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.geometry.bins()
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.values[frame * self.bins() + bin]
    }

    pub fn frame(&self, frame: usize) -> &[Complex64] {
        let k = self.bins();
        &self.values[frame * k..(frame + 1) * k]
    }
}

/// Constant-Q transform by per-bin windowed inner products.
///
/// Frame `n` is centred on sample `n · hop`; bin `k` uses a periodic Hann window
/// `w(j) = ½ − ½ cos(2πj / N_k)` starting at `n · hop − ⌊N_k / 2⌋`, with samples
/// outside the signal taken as zero:
///
/// `X[n, k] = (1 / N_k) Σ_j x(n·hop − ⌊N_k/2⌋ + j) · w(j) · e^{−i 2π f_k (j − ⌊N_k/2⌋) / fs}`
///
/// The Hann-weighted kernel is a sum of three complex exponentials, so each bin
/// is evaluated exactly from three prefix sums of the modulated signal.
pub fn cqt(audio: &AudioBuffer, cfg: &CqccConfig) -> Result<CqtMatrix, FeatureError> {
    let geometry = cqt_geometry(cfg, audio.sample_rate())?;
    let x = audio.samples();
    if x.len() < geometry.longest_window() {
        return Err(FeatureError::InputTooShort {
            needed: geometry.longest_window(),
            got: x.len(),
        });
    }
    if geometry.hop == 0 {
        return Err(FeatureError::InvalidConfig("hop must be positive".into()));
    }
    let frames = (x.len() - 1) / geometry.hop + 1;
    let fs = audio.sample_rate() as f64;
    let columns: Vec<Vec<Complex64>> = geometry
        .freqs
        .par_iter()
        .zip(geometry.window_lengths.par_iter())
        .map(|(&f, &n)| bin_response(x, f / fs, n, geometry.hop, frames))
        .collect();

    let bins = geometry.bins();
    let mut values = vec![Complex64::new(0.0, 0.0); frames * bins];
    for (k, col) in columns.iter().enumerate() {
        for (t, v) in col.iter().enumerate() {
            values[t * bins + k] = *v;
        }
    }
    Ok(CqtMatrix {
        geometry,
        frames,
        values,
    })
}

/// Interval after which running phasors are recomputed from scratch.
const PHASOR_RESYNC: usize = 256;

fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

fn bin_response(x: &[f64], norm_freq: f64, n: usize, hop: usize, frames: usize) -> Vec<Complex64> {
    use std::f64::consts::TAU;
    let omega = TAU * norm_freq;
    let beta = TAU / n as f64;
    let len = x.len();

    // Prefix sums of x(m)·e^{−iθm} for θ = ω, ω − β, ω + β.
    let zero = Complex64::new(0.0, 0.0);
    let mut p0 = vec![zero; len + 1];
    let mut pm = vec![zero; len + 1];
    let mut pp = vec![zero; len + 1];
    let step_a = cis(-omega);
    let step_b = cis(-beta);
    let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for m in 0..len {
        if m % PHASOR_RESYNC == 0 {
            a = cis(-omega * m as f64);
            b = cis(-beta * m as f64);
        }
        let xm = x[m];
        p0[m + 1] = p0[m] + a * xm;
        pm[m + 1] = pm[m] + a * b.conj() * xm;
        pp[m + 1] = pp[m] + a * b * xm;
        a *= step_a;
        b *= step_b;
    }

    let half = (n / 2) as isize;
    let centre = cis(omega * half as f64) / n as f64;
    (0..frames)
        .map(|t| {
            let start = (t * hop) as isize - half;
            let lo = start.clamp(0, len as isize) as usize;
            let hi = (start + n as isize).clamp(0, len as isize) as usize;
            let s = start as f64;
            let d0 = p0[hi] - p0[lo];
            let dm = pm[hi] - pm[lo];
            let dp = pp[hi] - pp[lo];
            let sum = cis(omega * s) * d0 * 0.5
                - cis((omega - beta) * s) * dm * 0.25
                - cis((omega + beta) * s) * dp * 0.25;
            sum * centre
        })
        .collect()
}
