use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::PaSimError;

pub const SPEED_OF_SOUND: f64 = 343.0;

/// Half-width of the windowed-sinc kernel. Every response is delayed by this
/// many samples so the kernel of the direct path fits before it.
pub const SINC_HALF_WIDTH: usize = 32;

/// Sources closer than this to the microphone are rejected.
pub const MIN_SOURCE_DISTANCE: f64 = 0.05;

/// Upper bound on the automatically chosen reflection order.
pub const MAX_ORDER_CAP: usize = 30;

/// Omitted image energy bound used to pick the reflection order (−60 dB).
const OMITTED_ENERGY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    /// `(length, width, height)` in metres.
    pub dims: [f64; 3],
    pub t60: f64,
    #[serde(default = "default_speed")]
    pub speed_of_sound: f64,
    /// Pressure reflection coefficient shared by all walls. `None` derives it
    /// from `t60` with Eyring's formula.
    #[serde(default)]
    pub reflection: Option<f64>,
}

fn default_speed() -> f64 {
    SPEED_OF_SOUND
}

impl RoomSpec {
    pub fn new(dims: [f64; 3], t60: f64) -> Result<Self, PaSimError> {
        let room = RoomSpec {
            dims,
            t60,
            speed_of_sound: SPEED_OF_SOUND,
            reflection: None,
        };
        room.validate()?;
        Ok(room)
    }

    /// Same room with a fixed wall reflection coefficient.
    pub fn with_reflection(mut self, r: f64) -> Self {
        self.reflection = Some(r);
        self
    }

    pub fn validate(&self) -> Result<(), PaSimError> {
        if self.dims.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(PaSimError::InvalidRoom(format!("dimensions {:?}", self.dims)));
        }
        if !(self.t60 > 0.0 && self.t60.is_finite()) {
            return Err(PaSimError::InvalidRoom(format!("t60 {}", self.t60)));
        }
        if !(self.speed_of_sound > 0.0) {
            return Err(PaSimError::InvalidRoom("speed of sound must be positive".into()));
        }
        if let Some(r) = self.reflection {
            if !(0.0..1.0).contains(&r) {
                return Err(PaSimError::InvalidRoom(format!("reflection coefficient {r}")));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [l, w, h] = self.dims;
        2.0 * (l * w + l * h + w * h)
    }

    /// Wall pressure reflection coefficient.
    ///
    /// Eyring: `T60 = 24 ln10 · V / (−c S ln(1 − α))` with energy reflection
    /// `1 − α = r²`, hence `ln r = −12 ln10 · V / (c S T60)`.
    pub fn reflection_coefficient(&self) -> f64 {
        self.reflection.unwrap_or_else(|| {
            (-12.0 * std::f64::consts::LN_10 * self.volume()
                / (self.speed_of_sound * self.surface() * self.t60))
                .exp()
        })
    }

    /// Smallest order whose omitted image energy (≈ `r^(2(N+1))` of the total)
    /// is below −60 dB, capped at `cap`.
    pub fn auto_max_order(&self, cap: usize) -> usize {
        let r = self.reflection_coefficient();
        if r <= 0.0 {
            return 0;
        }
        let n = (OMITTED_ENERGY.ln() / (2.0 * r.ln())).ceil() as usize;
        n.saturating_sub(1).min(cap)
    }

    /// True when the point keeps at least `clearance` metres from every wall.
    pub fn contains(&self, p: [f64; 3], clearance: f64) -> bool {
        p.iter()
            .zip(&self.dims)
            .all(|(&x, &d)| x >= clearance && x <= d - clearance)
    }
}

/// One virtual source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Image {
    pub position: [f64; 3],
    pub reflections: usize,
}

/// Image sources with at most `max_order` wall reflections.
///
/// Along each axis an image is `(1 − 2q) · s + 2 m L` for `q ∈ {0, 1}` and
/// integer `m`, reached after `|m − q| + |m|` reflections.
pub fn image_sources(dims: [f64; 3], source: [f64; 3], max_order: usize) -> Vec<Image> {
    let per_axis: Vec<Vec<(f64, usize)>> = (0..3)
        .map(|a| {
            let bound = max_order as i64 / 2 + 1;
            let mut v = Vec::new();
            for q in 0..2i64 {
                for m in -bound..=bound {
                    let count = ((m - q).abs() + m.abs()) as usize;
                    if count <= max_order {
                        let x = (1 - 2 * q) as f64 * source[a] + 2.0 * m as f64 * dims[a];
                        v.push((x, count));
                    }
                }
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    for &(x, cx) in &per_axis[0] {
        for &(y, cy) in &per_axis[1] {
            if cx + cy > max_order {
                continue;
            }
            for &(z, cz) in &per_axis[2] {
                if cx + cy + cz <= max_order {
                    out.push(Image {
                        position: [x, y, z],
                        reflections: cx + cy + cz,
                    });
                }
            }
        }
    }
    out
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Windowed-sinc kernel value at offset `t` samples from the pulse centre.
pub fn sinc_kernel(t: f64) -> f64 {
    let w = SINC_HALF_WIDTH as f64;
    if t.abs() >= w {
        return 0.0;
    }
    let window = 0.5 * (1.0 + (PI * t / w).cos());
    let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
    window * sinc
}

/// Adds `amplitude` at fractional position `centre` (in samples) to `h`.
pub(crate) fn add_pulse(h: &mut [f64], centre: f64, amplitude: f64) {
    let w = SINC_HALF_WIDTH as i64;
    let base = centre.floor() as i64;
    for n in base - w + 1..=base + w {
        if n < 0 || n as usize >= h.len() {
            continue;
        }
        h[n as usize] += amplitude * sinc_kernel(n as f64 - centre);
    }
}

/// Image-source room impulse response at `sample_rate`.
///
/// Each image contributes `r^n / (4π d)` centred at `SINC_HALF_WIDTH + d fs / c`
/// samples.
pub fn rir_image_method(
    room: &RoomSpec,
    source: [f64; 3],
    mic: [f64; 3],
    max_order: usize,
    sample_rate: u32,
) -> Result<Vec<f64>, PaSimError> {
    room.validate()?;
    for (name, p) in [("source", source), ("microphone", mic)] {
        if !room.contains(p, 0.0) {
            return Err(PaSimError::OutsideRoom(name, p));
        }
    }
    let direct = distance(source, mic);
    if direct < MIN_SOURCE_DISTANCE {
        return Err(PaSimError::SourceTooClose(direct));
    }
    let r = room.reflection_coefficient();
    let order = if r == 0.0 { 0 } else { max_order };
    let images = image_sources(room.dims, source, order);
    let fs = sample_rate as f64;
    let c = room.speed_of_sound;
    let far = images
        .iter()
        .map(|im| distance(im.position, mic))
        .fold(0.0, f64::max);
    let len = (far * fs / c).ceil() as usize + 2 * SINC_HALF_WIDTH + 1;
    let mut h = vec![0.0; len];
    for im in &images {
        let d = distance(im.position, mic);
        let amp = r.powi(im.reflections as i32) / (4.0 * PI * d);
        add_pulse(&mut h, SINC_HALF_WIDTH as f64 + d * fs / c, amp);
    }
    Ok(h)
}
