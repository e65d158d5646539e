use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Full linear convolution, length `a.len() + b.len() − 1`.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let load = |x: &[f64]| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for (dst, &s) in v.iter_mut().zip(x) {
            dst.re = s;
        }
        v
    };
    let mut fa = load(a);
    let mut fb = load(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    fa.truncate(out_len);
    fa.into_iter().map(|c| c.re / n as f64).collect()
}
