//! Image-source impulse response criterion.

use std::f64::consts::PI;

use spoofkit::pa_sim::{bonafide_rir, rir_image_method, sample_config, CategoryTable, PaCategoryLabel, RoomSpec};

use crate::{all, oracle, Outcome};

const FS: u32 = 16000;

fn order_zero() -> Outcome {
    let room = RoomSpec::new([6.0, 4.5, 3.0], 0.4).unwrap();
    let c = room.speed_of_sound;
    let cases = [
        ([1.0, 1.0, 1.5], [1.0 + 50.0 * c / 16000.0, 1.0, 1.5]),
        ([1.0, 1.0, 1.5], [2.0, 1.0, 1.5]),
        ([0.7, 3.1, 1.2], [4.9, 0.4, 2.6]),
        ([3.0, 2.0, 1.0], [3.2, 2.1, 1.05]),
    ];
    let mut worst = 0.0f64;
    let mut peak_errors = Vec::new();
    for (s, m) in cases {
        let h = rir_image_method(&room, s, m, 0, FS).unwrap();
        let d = spoofkit::pa_sim::distance(s, m);
        let tau = 32.0 + d * FS as f64 / c;
        let scale = 1.0 / (4.0 * PI * d);
        for (i, v) in h.iter().enumerate() {
            worst = worst.max((v - scale * oracle::windowed_sinc(i as f64 - tau)).abs() / scale);
        }
        let peak = (0..h.len()).max_by(|&a, &b| h[a].abs().total_cmp(&h[b].abs())).unwrap();
        if peak != tau.round() as usize {
            peak_errors.push((peak, tau));
        }
    }
    Outcome::check(
        worst <= 1e-12 && peak_errors.is_empty(),
        format!(
            "order 0: single pulse at 32 + d fs / c scaled by 1/(4 pi d), max rel. deviation {worst:.1e}, misplaced peaks {peak_errors:?}"
        ),
    )
}

fn order_two() -> Outcome {
    let rooms = [
        (RoomSpec::new([4.0, 5.0, 3.0], 0.4).unwrap(), [1.2, 3.3, 1.6], [3.1, 0.9, 1.1]),
        (RoomSpec::new([7.3, 3.2, 2.7], 0.6).unwrap(), [6.5, 0.4, 2.2], [0.8, 2.9, 0.3]),
        (RoomSpec::new([2.2, 2.0, 2.5], 0.2).unwrap().with_reflection(0.93), [1.0, 1.0, 1.0], [1.9, 0.2, 2.3]),
    ];
    let mut worst = 0.0f64;
    for (room, s, m) in rooms {
        let h = rir_image_method(&room, s, m, 2, FS).unwrap();
        let images = oracle::mirror_images(room.dims, s, 2);
        let want = oracle::render_images(&images, m, room.reflection_coefficient(), FS as f64, room.speed_of_sound, h.len() + 200);
        let peak = want.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (i, w) in want.iter().enumerate() {
            let got = h.get(i).copied().unwrap_or(0.0);
            worst = worst.max((got - w).abs() / peak);
        }
    }
    Outcome::check(worst <= 1e-12, format!("order 2 vs mirror enumeration, max rel. deviation {worst:.1e}"))
}

fn t60_mid_categories() -> Outcome {
    let table = CategoryTable::default();
    let mut errors = Vec::new();
    let mut per_cat = Vec::new();
    for acoustic in ["bba", "bbb", "bbc"] {
        let cat = PaCategoryLabel::parse(acoustic, "AA").unwrap();
        let mut e = Vec::new();
        for seed in 0..10u64 {
            let cfg = sample_config(&table, cat, 0x760 + seed).unwrap();
            let h = bonafide_rir(&cfg).unwrap();
            let est = oracle::schroeder_t60(&h, FS as f64).unwrap_or(0.0);
            e.push(est / cfg.room.t60 - 1.0);
        }
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let worst = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        per_cat.push(format!("{acoustic} mean {:+.0}% worst {:.0}%", 100.0 * mean, 100.0 * worst));
        errors.extend(e);
    }
    let within = errors.iter().filter(|e| e.abs() <= 0.3).count();
    Outcome::check(
        within == errors.len(),
        format!("Schroeder T60 within 30% in {within}/{} RIRs ({})", errors.len(), per_cat.join(", ")),
    )
}

pub fn rir_correctness() -> Outcome {
    all(vec![order_zero(), order_two(), t60_mid_categories()])
}
