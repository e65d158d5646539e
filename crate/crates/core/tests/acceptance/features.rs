//! Front-end criteria against the stepwise oracles.

use spoofkit::features::{
    append_deltas, cqcc, cqt, lfcc, lfcc_log_energies, CqccConfig, FeatureMatrix, LfccConfig,
};

use crate::fixtures::{test_signal, tone};
use crate::{all, oracle, Outcome};

fn rel_dev(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let num = got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = want.iter().map(|v| v.abs()).fold(0.0, f64::max);
    num / den
}

fn flat(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn cqcc_config(bins: usize, f_min: f64, f_max: f64) -> CqccConfig {
    CqccConfig {
        bins_per_octave: bins,
        f_min: Some(f_min),
        f_max: Some(f_max),
        n_cepstral: 20,
        ..CqccConfig::default()
    }
}

/// Reduced CQT geometries: the default one needs 8.8 s of audio per
/// fixture, too slow for a direct-summation oracle.
fn cqt_cases() -> Vec<Outcome> {
    let cases = [(12, 60.0, 8000.0, 16000), (24, 200.0, 8000.0, 16000), (16, 100.0, 4000.0, 8000)];
    let mut worst_cqt = 0.0f64;
    let mut worst_cqcc = 0.0f64;
    for (i, &(b, lo, hi, fs)) in cases.iter().enumerate() {
        let audio = test_signal(70 + i as u64, fs as usize, fs);
        let cfg = cqcc_config(b, lo, hi);
        let got = cqt(&audio, &cfg).unwrap();
        let naive = oracle::cqt(audio.samples(), fs as f64, b, lo, hi, cfg.hop);
        assert_eq!(got.bins(), naive.freqs.len(), "bin count");
        assert_eq!(got.frames(), naive.values.len(), "frame count");
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (t, frame) in naive.values.iter().enumerate() {
            for (k, want) in frame.iter().enumerate() {
                num = num.max((got.get(t, k) - want).norm());
                den = den.max(want.norm());
            }
        }
        worst_cqt = worst_cqt.max(num / den);

        let points = cfg.resample_points(fs).unwrap();
        let want = oracle::cqcc(&naive, points, cfg.n_cepstral, cfg.include_c0, cfg.delta_window);
        let got = cqcc(&audio, &cfg).unwrap();
        worst_cqcc = worst_cqcc.max(rel_dev(got.values(), &flat(&want)));
    }
    vec![
        Outcome::check(worst_cqt < 1e-6, format!("CQT rel. deviation {worst_cqt:.1e}")),
        Outcome::check(worst_cqcc < 1e-6, format!("CQCC rel. deviation {worst_cqcc:.1e}")),
    ]
}

fn lfcc_cases() -> Outcome {
    let mut worst = 0.0f64;
    for (i, fs) in [16000u32, 8000].into_iter().enumerate() {
        let cfg = LfccConfig {
            fft_size: if fs == 16000 { 512 } else { 256 },
            ..LfccConfig::default()
        };
        let audio = test_signal(90 + i as u64, fs as usize, fs);
        let (len, shift) = cfg.frame_samples(fs).unwrap();
        let want = oracle::lfcc(
            audio.samples(),
            fs as f64,
            len,
            shift,
            cfg.fft_size,
            cfg.n_filters,
            cfg.n_cepstral,
            cfg.delta_window,
        );
        worst = worst.max(rel_dev(lfcc(&audio, &cfg).unwrap().values(), &flat(&want)));
    }
    Outcome::check(worst < 1e-6, format!("LFCC rel. deviation {worst:.1e}"))
}

fn tone_peaks() -> Outcome {
    let cfg = cqcc_config(24, 200.0, 8000.0);
    let geometry = spoofkit::features::cqt_geometry(&cfg, 16000).unwrap();
    let mut misses = Vec::new();
    for k in (0..geometry.bins()).step_by(9) {
        let audio = tone(geometry.freqs[k], 16000, 16000);
        let m = cqt(&audio, &cfg).unwrap();
        let mid = m.frames() / 2;
        let peak = (0..m.bins())
            .max_by(|&a, &b| m.get(mid, a).norm().total_cmp(&m.get(mid, b).norm()))
            .unwrap();
        if peak != k {
            misses.push(format!("cqt {k}->{peak}"));
        }
    }
    let lf = LfccConfig::default();
    for j in [0usize, 5, 11, 19] {
        let centre = 8000.0 * (j + 1) as f64 / (lf.n_filters + 1) as f64;
        let e = lfcc_log_energies(&tone(centre, 8000, 16000), &lf).unwrap();
        let row = e.row(e.frames() / 2);
        let peak = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        if peak != j {
            misses.push(format!("lfcc {j}->{peak}"));
        }
    }
    Outcome::check(misses.is_empty(), format!("bin-centre tones peak at their bin, misses {misses:?}"))
}

fn constant_deltas() -> Outcome {
    let row = vec![1.5, -2.0, 0.3, 7.25, -1e-3];
    let m = FeatureMatrix::from_rows(&vec![row.clone(); 40]).unwrap();
    let mut nonzero = 0;
    for w in 1..=4 {
        let d = append_deltas(&m, w);
        nonzero += d.rows().flat_map(|r| r[row.len()..].to_vec()).filter(|&v| v != 0.0).count();
    }
    Outcome::check(nonzero == 0, format!("constant frames give {nonzero} nonzero delta values"))
}

pub fn oracle_equivalence() -> Outcome {
    let mut parts = cqt_cases();
    parts.extend([lfcc_cases(), tone_peaks(), constant_deltas()]);
    all(parts)
}
