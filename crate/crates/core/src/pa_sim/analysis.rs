//! Measurements on rendered signals.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Broadband T60 by Schroeder backward integration with a least-squares line
/// fitted to the energy decay curve between −5 and −35 dB.
pub fn schroeder_t60(h: &[f64], sample_rate: u32) -> Option<f64> {
    let mut edc = vec![0.0; h.len()];
    let mut acc = 0.0;
    for i in (0..h.len()).rev() {
        acc += h[i] * h[i];
        edc[i] = acc;
    }
    let total = *edc.first()?;
    if total <= 0.0 {
        return None;
    }
    let db: Vec<f64> = edc.iter().map(|e| 10.0 * (e / total).log10()).collect();
    let start = db.iter().position(|&v| v <= -5.0)?;
    let end = db.iter().position(|&v| v <= -35.0)?;
    if end <= start + 1 {
        return None;
    }
    let fs = sample_rate as f64;
    let n = (end - start) as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (i, &y) in db.iter().enumerate().take(end).skip(start) {
        let t = i as f64 / fs;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    (slope < 0.0).then(|| -60.0 / slope)
}

/// Welch power spectrum with Hann frames of `n_fft` samples and 50 % overlap.
pub fn welch_psd(x: &[f64], n_fft: usize) -> Vec<f64> {
    let hop = n_fft / 2;
    let window: Vec<f64> = (0..n_fft)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n_fft as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let mut psd = vec![0.0; n_fft / 2 + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let mut frames = 0usize;
    let mut start = 0;
    loop {
        for (i, b) in buf.iter_mut().enumerate() {
            let v = x.get(start + i).copied().unwrap_or(0.0);
            *b = Complex64::new(v * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (p, c) in psd.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
        frames += 1;
        start += hop;
        if start + n_fft > x.len() {
            break;
        }
    }
    psd.iter_mut().for_each(|p| *p /= frames as f64);
    psd
}

/// Spectral flatness (geometric over arithmetic mean) of the output/source
/// power ratio in `band`; 1 means the chain colours nothing in that band.
pub fn transfer_flatness(
    source: &[f64],
    output: &[f64],
    sample_rate: u32,
    band: (f64, f64),
    n_fft: usize,
) -> f64 {
    let ps = welch_psd(source, n_fft);
    let po = welch_psd(output, n_fft);
    let bin_hz = sample_rate as f64 / n_fft as f64;
    let ratios: Vec<f64> = ps
        .iter()
        .zip(&po)
        .enumerate()
        .filter(|(k, _)| {
            let f = *k as f64 * bin_hz;
            f >= band.0 && f <= band.1
        })
        .map(|(_, (s, o))| (o / s.max(1e-300)).max(1e-300))
        .collect();
    let n = ratios.len() as f64;
    let geo = (ratios.iter().map(|r| r.ln()).sum::<f64>() / n).exp();
    let arith = ratios.iter().sum::<f64>() / n;
    geo / arith
}

/// RMS difference in dB between two Welch spectra.
pub fn log_spectral_distance(a: &[f64], b: &[f64], n_fft: usize) -> f64 {
    let pa = welch_psd(a, n_fft);
    let pb = welch_psd(b, n_fft);
    let floor = 1e-20;
    let sq: f64 = pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| (10.0 * (x.max(floor) / y.max(floor)).log10()).powi(2))
        .sum();
    (sq / pa.len() as f64).sqrt()
}
