//! Brute-force reference implementations, written from the definitions and
//! sharing no code with the library.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

/// Error rates at threshold `s`: misses are bona fide scores below `s`, false
/// alarms are spoof scores at or above it.
pub fn rates_at(bonafide: &[f64], spoof: &[f64], s: f64) -> (f64, f64) {
    let miss = bonafide.iter().filter(|&&x| x < s).count();
    let fa = spoof.iter().filter(|&&x| x >= s).count();
    (miss as f64 / bonafide.len() as f64, fa as f64 / spoof.len() as f64)
}

/// Every distinct operating point, from accept-all to reject-all.
pub fn operating_points(bonafide: &[f64], spoof: &[f64]) -> Vec<(f64, f64)> {
    let mut thresholds: Vec<f64> = bonafide.iter().chain(spoof).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);
    let mut points = vec![(0.0, 1.0)];
    points.extend(thresholds.iter().map(|&s| rates_at(bonafide, spoof, s)));
    points
}

pub fn min_tdcf(bonafide: &[f64], spoof: &[f64], beta: f64) -> f64 {
    operating_points(bonafide, spoof)
        .iter()
        .map(|&(m, f)| beta * m + f)
        .fold(f64::INFINITY, f64::min)
}

/// Rate where the miss and false-alarm curves cross, interpolating linearly
/// between the two operating points that straddle the diagonal.
pub fn eer(bonafide: &[f64], spoof: &[f64]) -> f64 {
    let pts = operating_points(bonafide, spoof);
    let i = pts.iter().position(|&(m, f)| m >= f).unwrap();
    let (m1, f1) = pts[i];
    if m1 == f1 {
        return m1;
    }
    let (m0, f0) = pts[i - 1];
    let t = (f0 - m0) / ((m1 - m0) - (f1 - f0));
    m0 + t * (m1 - m0)
}

/// Constant-Q coefficients by direct summation.
pub struct NaiveCqt {
    pub freqs: Vec<f64>,
    /// `[frame][bin]`
    pub values: Vec<Vec<Complex64>>,
}

pub fn cqt(x: &[f64], fs: f64, bins_per_octave: usize, f_min: f64, f_max: f64, hop: usize) -> NaiveCqt {
    let b = bins_per_octave as f64;
    let q = 1.0 / (2f64.powf(1.0 / b) - 1.0);
    let mut freqs = Vec::new();
    loop {
        let f = f_min * 2f64.powf(freqs.len() as f64 / b);
        if f >= f_max * (1.0 - 1e-12) {
            break;
        }
        freqs.push(f);
    }
    let frames = (x.len() - 1) / hop + 1;
    let values = (0..frames)
        .map(|t| {
            freqs
                .iter()
                .map(|&f| {
                    let n = (q * fs / f).ceil() as i64;
                    let half = n / 2;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        let idx = (t * hop) as i64 - half + j;
                        if idx < 0 || idx >= x.len() as i64 {
                            continue;
                        }
                        let w = 0.5 - 0.5 * (2.0 * PI * j as f64 / n as f64).cos();
                        let phase = -2.0 * PI * f * (j - half) as f64 / fs;
                        acc += Complex64::from_polar(x[idx as usize] * w, phase);
                    }
                    acc / n as f64
                })
                .collect()
        })
        .collect();
    NaiveCqt { freqs, values }
}

/// Natural cubic spline by a dense linear solve for the knot second
/// derivatives, evaluated at `at`.
pub fn natural_spline(x: &[f64], y: &[f64], at: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    for i in 1..n - 1 {
        a[i][i - 1] = h[i - 1];
        a[i][i] = 2.0 * (h[i - 1] + h[i]);
        a[i][i + 1] = h[i];
        a[i][n] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    let m = gauss_solve(a);
    at.iter()
        .map(|&t| {
            let i = (0..n - 1).rev().find(|&i| x[i] <= t).unwrap_or(0);
            let (xl, xr, hh) = (x[i], x[i + 1], h[i]);
            m[i] * (xr - t).powi(3) / (6.0 * hh)
                + m[i + 1] * (t - xl).powi(3) / (6.0 * hh)
                + (y[i] / hh - m[i] * hh / 6.0) * (xr - t)
                + (y[i + 1] / hh - m[i + 1] * hh / 6.0) * (t - xl)
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut out = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * out[k]).sum();
        out[row] = (a[row][n] - s) / a[row][row];
    }
    out
}

/// Orthonormal DCT-II coefficients `first .. first + count`.
pub fn dct(y: &[f64], first: usize, count: usize) -> Vec<f64> {
    let m = y.len() as f64;
    (first..first + count)
        .map(|q| {
            let s = if q == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            s * y
                .iter()
                .enumerate()
                .map(|(n, v)| v * (PI * q as f64 * (2.0 * n as f64 + 1.0) / (2.0 * m)).cos())
                .sum::<f64>()
        })
        .collect()
}

/// Rows `[c, Δc, ΔΔc]` with regression window `w` and replicated edges.
pub fn with_deltas(rows: &[Vec<f64>], w: usize) -> Vec<Vec<f64>> {
    let reg = |m: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let last = m.len() as i64 - 1;
        let denom: f64 = 2.0 * (1..=w).map(|k| (k * k) as f64).sum::<f64>();
        (0..m.len() as i64)
            .map(|t| {
                (0..m[0].len())
                    .map(|d| {
                        (1..=w as i64)
                            .map(|k| {
                                let f = m[(t + k).min(last) as usize][d];
                                let b = m[(t - k).max(0) as usize][d];
                                k as f64 * (f - b)
                            })
                            .sum::<f64>()
                            / denom
                    })
                    .collect()
            })
            .collect()
    };
    let d1 = reg(rows);
    let d2 = reg(&d1);
    rows.iter()
        .zip(&d1)
        .zip(&d2)
        .map(|((a, b), c)| a.iter().chain(b).chain(c).copied().collect())
        .collect()
}

pub fn cqcc(cq: &NaiveCqt, points: usize, n_cep: usize, include_c0: bool, delta_window: usize) -> Vec<Vec<f64>> {
    let k = cq.freqs.len();
    let (lo, hi) = (cq.freqs[0], cq.freqs[k - 1]);
    let at: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let first = usize::from(!include_c0);
    let stat: Vec<Vec<f64>> = cq
        .values
        .iter()
        .map(|frame| {
            let lp: Vec<f64> = frame.iter().map(|c| c.norm_sqr().max(1e-10).ln()).collect();
            dct(&natural_spline(&cq.freqs, &lp, &at), first, n_cep)
        })
        .collect();
    with_deltas(&stat, delta_window)
}

/// LFCC log filterbank energies with a direct DFT of each frame.
pub fn lfcc_log_energies(x: &[f64], fs: f64, len: usize, shift: usize, nfft: usize, n_filters: usize) -> Vec<Vec<f64>> {
    let frames = (x.len() - len) / shift + 1;
    let edges: Vec<f64> = (0..n_filters + 2)
        .map(|i| (fs / 2.0) * i as f64 / (n_filters + 1) as f64)
        .collect();
    (0..frames)
        .map(|t| {
            let frame: Vec<f64> = (0..len)
                .map(|i| {
                    let w = 0.54 - 0.46 * (2.0 * PI * i as f64 / (len - 1) as f64).cos();
                    x[t * shift + i] * w
                })
                .collect();
            let power: Vec<f64> = (0..=nfft / 2)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, v) in frame.iter().enumerate() {
                        acc += Complex64::from_polar(*v, -2.0 * PI * (k * i) as f64 / nfft as f64);
                    }
                    acc.norm_sqr()
                })
                .collect();
            (0..n_filters)
                .map(|j| {
                    let (a, b, c) = (edges[j], edges[j + 1], edges[j + 2]);
                    let e: f64 = power
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let f = k as f64 * fs / nfft as f64;
                            let w = ((f - a) / (b - a)).min((c - f) / (c - b)).max(0.0);
                            w * p
                        })
                        .sum();
                    e.max(1e-10).ln()
                })
                .collect()
        })
        .collect()
}

pub fn lfcc(x: &[f64], fs: f64, len: usize, shift: usize, nfft: usize, n_filters: usize, n_cep: usize, w: usize) -> Vec<Vec<f64>> {
    let stat: Vec<Vec<f64>> = lfcc_log_energies(x, fs, len, shift, nfft, n_filters)
        .iter()
        .map(|e| dct(e, 0, n_cep))
        .collect();
    with_deltas(&stat, w)
}

/// Hann-tapered sinc over 32 samples either side of the centre.
pub fn windowed_sinc(t: f64) -> f64 {
    if t.abs() >= 32.0 {
        return 0.0;
    }
    let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
    (0.5 + 0.5 * (PI * t / 32.0).cos()) * sinc
}

/// Images reachable by at most `order` successive wall mirrorings, each kept
/// with the fewest mirrorings that produce it.
pub fn mirror_images(dims: [f64; 3], source: [f64; 3], order: usize) -> Vec<([f64; 3], usize)> {
    let key = |p: [f64; 3]| p.map(|v| (v * 1e9).round() as i64);
    let mut seen = BTreeMap::new();
    seen.insert(key(source), (source, 0));
    let mut frontier = vec![source];
    for n in 1..=order {
        let mut next = Vec::new();
        for p in &frontier {
            for axis in 0..3 {
                for wall in [0.0, dims[axis]] {
                    let mut q = *p;
                    q[axis] = 2.0 * wall - p[axis];
                    if let std::collections::btree_map::Entry::Vacant(e) = seen.entry(key(q)) {
                        e.insert((q, n));
                        next.push(q);
                    }
                }
            }
        }
        frontier = next;
    }
    seen.into_values().collect()
}

/// Impulse response of a set of images, brute force over every sample.
pub fn render_images(images: &[([f64; 3], usize)], mic: [f64; 3], r: f64, fs: f64, c: f64, len: usize) -> Vec<f64> {
    let mut h = vec![0.0; len];
    for (p, n) in images {
        let d = ((p[0] - mic[0]).powi(2) + (p[1] - mic[1]).powi(2) + (p[2] - mic[2]).powi(2)).sqrt();
        let tau = 32.0 + d * fs / c;
        let amp = r.powi(*n as i32) / (4.0 * PI * d);
        for (i, v) in h.iter_mut().enumerate() {
            *v += amp * windowed_sinc(i as f64 - tau);
        }
    }
    h
}

/// T60 from the Schroeder energy decay curve: least-squares slope of the
/// decay in dB over the span from 5 to 35 dB below the total energy.
pub fn schroeder_t60(h: &[f64], fs: f64) -> Option<f64> {
    let total: f64 = h.iter().map(|v| v * v).sum();
    let mut remaining = total;
    let mut pts = Vec::new();
    for (i, v) in h.iter().enumerate() {
        let db = 10.0 * (remaining / total).log10();
        if db <= -35.0 {
            break;
        }
        if db <= -5.0 {
            pts.push((i as f64 / fs, db));
        }
        remaining -= v * v;
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -60.0 / slope)
}
