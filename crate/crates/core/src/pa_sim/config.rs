use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::category::{CategoryTable, PaCategoryLabel, Range};
use super::device::ReplayDeviceSpec;
use super::room::{distance, RoomSpec};
use super::PaSimError;

/// Position draws attempted before a category is declared infeasible.
const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Known (training/development) or unknown (evaluation) seed space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedMode {
    Train,
    Eval,
}

impl SeedMode {
    fn tag(self) -> u8 {
        match self {
            SeedMode::Train => 0,
            SeedMode::Eval => 1,
        }
    }
}

/// Per-trial seed from `SHA-256(mode, master_seed, trial_id)`. The top bit
/// carries the mode, so the two seed spaces never intersect.
pub fn trial_seed(mode: SeedMode, master_seed: u64, trial_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(b"spoofkit/pa_sim/trial\0");
    h.update([mode.tag()]);
    h.update(master_seed.to_le_bytes());
    h.update(trial_id.as_bytes());
    let digest = h.finalize();
    let raw = u64::from_le_bytes(digest[..8].try_into().unwrap());
    (raw >> 1) | (u64::from(mode.tag()) << 63)
}

pub fn seed_mode(seed: u64) -> SeedMode {
    if seed >> 63 == 1 {
        SeedMode::Eval
    } else {
        SeedMode::Train
    }
}

/// Fully resolved rendering parameters for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaConfig {
    pub category: PaCategoryLabel,
    pub room: RoomSpec,
    pub talker_pos: [f64; 3],
    pub mic_pos: [f64; 3],
    pub attacker_pos: [f64; 3],
    pub device: ReplayDeviceSpec,
    pub max_order: usize,
    pub sample_rate: u32,
    pub rng_seed: u64,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    const DIGITS: &[u8; 16] = b"0123456789abcdef";
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push(DIGITS[(b >> 4) as usize] as char);
        s.push(DIGITS[(b & 15) as usize] as char);
    }
    s
}

impl PaConfig {
    /// SHA-256 (hex) of the concrete acoustic and device parameters. The seed
    /// is excluded, so equal hashes mean equal rendering conditions.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value
            .as_object_mut()
            .expect("config is an object")
            .remove("rng_seed");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

fn draw(rng: &mut ChaCha8Rng, r: Range) -> f64 {
    r.at(rng.random::<f64>())
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn offset(p: [f64; 3], dir: [f64; 3], d: f64) -> [f64; 3] {
    [p[0] + d * dir[0], p[1] + d * dir[1], p[2] + d * dir[2]]
}

/// Draws a concrete configuration for `category`.
///
/// Draw order is fixed: floor area, aspect ratio, height, T60, then
/// positions by rejection sampling, then device parameters. Configurations
/// that differ only in device quality therefore share their geometry.
pub fn sample_config(
    table: &CategoryTable,
    category: PaCategoryLabel,
    seed: u64,
) -> Result<PaConfig, PaSimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = draw(&mut rng, table.room_area.get(category.room_size));
    let aspect = draw(&mut rng, table.aspect_ratio);
    let height = draw(&mut rng, table.height);
    let t60 = draw(&mut rng, table.t60.get(category.reverberation));
    let room = RoomSpec {
        dims: [(area * aspect).sqrt(), (area / aspect).sqrt(), height],
        t60,
        speed_of_sound: table.speed_of_sound,
        reflection: None,
    };
    room.validate()?;

    let clearance = table.wall_clearance;
    let mic_range = table.talker_to_mic.get(category.talker_to_mic);
    let attacker_range = table.attacker_to_talker.get(category.attacker_to_talker);
    let inner = |rng: &mut ChaCha8Rng, axis: usize| {
        Range(clearance, room.dims[axis] - clearance).at(rng.random::<f64>())
    };
    let mut placed = None;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let talker = [inner(&mut rng, 0), inner(&mut rng, 1), inner(&mut rng, 2)];
        let mic_dir = unit_vector(&mut rng);
        let mic = offset(talker, mic_dir, draw(&mut rng, mic_range));
        let att_dir = unit_vector(&mut rng);
        let attacker = offset(talker, att_dir, draw(&mut rng, attacker_range));
        if room.contains(mic, clearance)
            && room.contains(attacker, clearance)
            && distance(attacker, mic) >= table.min_attacker_to_mic
        {
            placed = Some((talker, mic, attacker));
            break;
        }
    }
    let (talker_pos, mic_pos, attacker_pos) = placed.ok_or_else(|| {
        PaSimError::Infeasible(format!(
            "no placement for {category} after {MAX_PLACEMENT_ATTEMPTS} attempts"
        ))
    })?;

    let dev = table.device.get(category.device_quality);
    let low = draw(&mut rng, dev.low);
    let high = draw(&mut rng, dev.high);
    let drive = draw(&mut rng, dev.drive);
    let device = ReplayDeviceSpec {
        quality: category.device_quality,
        passband: (low, high),
        nonlinearity_drive: drive,
    };
    device.validate(table.sample_rate)?;

    Ok(PaConfig {
        category,
        room,
        talker_pos,
        mic_pos,
        attacker_pos,
        device,
        max_order: room.auto_max_order(table.max_order_cap),
        sample_rate: table.sample_rate,
        rng_seed: seed,
    })
}
