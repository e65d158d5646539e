use super::FeatureMatrix;

/// Appends regression deltas and accelerations.
///
/// `Δ_t = Σ_{n=1..W} n (c_{t+n} − c_{t−n}) / (2 Σ n²)` with edge frames
/// replicated; `ΔΔ` applies the same operator to `Δ`. Output rows are
/// `[static, Δ, ΔΔ]`.
pub fn append_deltas(m: &FeatureMatrix, window: usize) -> FeatureMatrix {
    let window = window.max(1);
    let delta = regression(m, window);
    let accel = regression(&delta, window);
    let dims = m.dims();
    let mut values = Vec::with_capacity(m.frames() * dims * 3);
    for t in 0..m.frames() {
        values.extend_from_slice(m.row(t));
        values.extend_from_slice(delta.row(t));
        values.extend_from_slice(accel.row(t));
    }
    FeatureMatrix::new(m.frames(), dims * 3, values).expect("finite by construction")
}

fn regression(m: &FeatureMatrix, window: usize) -> FeatureMatrix {
    let frames = m.frames();
    let dims = m.dims();
    let denom = 2.0 * (1..=window).map(|n| (n * n) as f64).sum::<f64>();
    let last = frames.saturating_sub(1) as isize;
    let at = |t: isize| m.row(t.clamp(0, last) as usize);
    let mut values = vec![0.0; frames * dims];
    for t in 0..frames as isize {
        let out = &mut values[t as usize * dims..(t as usize + 1) * dims];
        for n in 1..=window as isize {
            let (fwd, back) = (at(t + n), at(t - n));
            for d in 0..dims {
                out[d] += n as f64 * (fwd[d] - back[d]);
            }
        }
        for v in out.iter_mut() {
            *v /= denom;
        }
    }
    FeatureMatrix::new(frames, dims, values).expect("finite by construction")
}
