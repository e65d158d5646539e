#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spoofkit::features::{write_wav, AudioBuffer};

pub struct Run {
    pub ok: bool,
    pub stdout: String,
    pub stderr: String,
}

pub fn spoofkit(args: &[&str]) -> Run {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_spoofkit"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        ok: out.status.success(),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Deterministic value in [0, 1).
pub fn hash01(i: u64) -> f64 {
    let mut x = i.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D);
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// Roughly standard normal (sum of twelve uniforms).
pub fn gauss(i: u64) -> f64 {
    (0..12).map(|k| hash01(i * 12 + k)).sum::<f64>() - 6.0
}

/// Harmonic "voice" for bona fide, broadband noise for spoof.
pub fn utterance(bonafide: bool, seed: u64, n: usize) -> AudioBuffer {
    let fs = 16000.0;
    let f0 = 110.0 + 40.0 * hash01(seed);
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let noise = hash01(seed * 1_000_003 + i as u64) - 0.5;
            if bonafide {
                let voiced: f64 = (1..=8).map(|h| (std::f64::consts::TAU * f0 * h as f64 * t).sin() / h as f64).sum();
                0.15 * voiced + 0.01 * noise
            } else {
                0.3 * noise
            }
        })
        .collect();
    AudioBuffer::new(samples, 16000).unwrap()
}

pub fn write_audio(dir: &Path, id: &str, audio: &AudioBuffer) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let path = dir.join(format!("{id}.wav"));
    write_wav(&path, audio).unwrap();
    path
}

pub fn write(path: &Path, text: &str) -> PathBuf {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d).unwrap();
    }
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

/// Toy LA-style corpus: `n` bona fide and `n` spoof utterances with an audio
/// list and protocol that reference them.
pub fn toy_corpus(root: &Path, n: usize) -> (PathBuf, PathBuf) {
    let mut list = String::new();
    let mut protocol = String::new();
    for i in 0..2 * n {
        let bona = i < n;
        let id = format!("LA_T_{i:07}");
        let path = write_audio(&root.join("wav"), &id, &utterance(bona, i as u64, 4000));
        list.push_str(&format!("{id} {}\n", path.display()));
        if bona {
            protocol.push_str(&format!("SPK{} {id} - bonafide bonafide\n", i % 3));
        } else {
            protocol.push_str(&format!("SPK{} {id} - A0{} spoof\n", i % 3, 1 + i % 2));
        }
    }
    (write(&root.join("audio.lst"), &list), write(&root.join("protocol.txt"), &protocol))
}
