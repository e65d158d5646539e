//! Criteria on DET, EER, t-DCF and β.

use spoofkit::metrics::{beta, det_curve, eer, min_tdcf, AsvErrorRates, CostModel};

use crate::fixtures::{rng, score_fixtures};
use crate::{all, oracle, Outcome};
use rand::Rng;

fn eer_of(b: &[f64], s: &[f64]) -> f64 {
    eer(&det_curve(b, s).unwrap()).rate
}

pub fn tdcf_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut largest = 0;
    for f in score_fixtures() {
        let got = min_tdcf(&f.bonafide, &f.spoof, f.beta).unwrap().min_tdcf;
        worst = worst.max((got - oracle::min_tdcf(&f.bonafide, &f.spoof, f.beta)).abs());
        largest = largest.max(f.bonafide.len().max(f.spoof.len()));
    }
    Outcome::check(
        worst <= 1e-12,
        format!("100 sets up to {largest} scores per class, max deviation {worst:.1e}"),
    )
}

pub fn eer_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for f in score_fixtures() {
        worst = worst.max((eer_of(&f.bonafide, &f.spoof) - oracle::eer(&f.bonafide, &f.spoof)).abs());
    }
    let fixtures = score_fixtures();
    let mut degenerate = Vec::new();
    for f in fixtures.iter().take(12) {
        degenerate.push(eer_of(&f.bonafide, &f.bonafide));
    }
    let off: Vec<f64> = degenerate.iter().copied().filter(|&e| e != 0.5).collect();
    all(vec![
        Outcome::check(worst <= 1e-12, format!("max deviation {worst:.1e}")),
        Outcome::check(
            off.is_empty(),
            format!("identical classes give 0.5 in {}/12 sets {off:?}", 12 - off.len()),
        ),
    ])
}

pub fn tdcf_extremes() -> Outcome {
    let mut r = rng(3);
    let mut betas = vec![0.1, 0.5, 1.0, 2.0, 10.0, 30.0];
    betas.extend((0..20).map(|_| 0.1 * 300f64.powf(r.random::<f64>())));
    let constant = vec![0.25; 300];
    let constant_spoof = vec![0.25; 700];
    let bona: Vec<f64> = (0..500).map(|_| r.random_range(1.0..2.0)).collect();
    let spoof: Vec<f64> = (0..500).map(|_| r.random_range(-2.0..1.0)).collect();
    let mut bad = Vec::new();
    for &b in &betas {
        let c = min_tdcf(&constant, &constant_spoof, b).unwrap().min_tdcf;
        let p = min_tdcf(&bona, &spoof, b).unwrap().min_tdcf;
        if c != b.min(1.0) || p != 0.0 {
            bad.push((b, c, p));
        }
    }
    Outcome::check(
        bad.is_empty(),
        format!("{} β values, constant CM = min(1, β) and separating CM = 0 exactly, mismatches {bad:?}", betas.len()),
    )
}

pub fn beta_proportionality() -> Outcome {
    let cost = CostModel::default();
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p_miss_asv = r.random_range(0.01..0.1);
        let p_fa_asv = r.random_range(0.005..0.05);
        let accept = r.random_range(0.005..0.09);
        let rates = |fa: f64| AsvErrorRates {
            threshold: 0.0,
            p_miss_asv,
            p_fa_asv,
            p_miss_spoof_asv: 1.0 - fa,
        };
        let base = beta(&cost, &rates(accept)).unwrap();
        for k in [0.5, 2.0, 10.0] {
            let scaled = beta(&cost, &rates(k * accept)).unwrap();
            worst = worst.max((scaled * k / base - 1.0).abs());
        }
    }
    Outcome::check(worst <= 1e-12, format!("50 operating points, k in {{0.5, 2, 10}}, max relative deviation {worst:.1e}"))
}

pub fn transform_invariance() -> Outcome {
    let mut worst_eer = 0.0f64;
    let mut worst_tdcf = 0.0f64;
    for f in score_fixtures() {
        let e = eer_of(&f.bonafide, &f.spoof);
        let t = min_tdcf(&f.bonafide, &f.spoof, f.beta).unwrap().min_tdcf;
        for g in [|x: f64| 2.0 * x + 1.0, f64::tanh] {
            let b: Vec<f64> = f.bonafide.iter().map(|&x| g(x)).collect();
            let s: Vec<f64> = f.spoof.iter().map(|&x| g(x)).collect();
            worst_eer = worst_eer.max((eer_of(&b, &s) - e).abs());
            worst_tdcf = worst_tdcf.max((min_tdcf(&b, &s, f.beta).unwrap().min_tdcf - t).abs());
        }
    }
    Outcome::check(
        worst_eer <= 1e-12 && worst_tdcf <= 1e-12,
        format!("2x + 1 and tanh over 100 sets, max EER change {worst_eer:.1e}, max t-DCF change {worst_tdcf:.1e}"),
    )
}
