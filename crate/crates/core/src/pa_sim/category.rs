use std::fmt;

use serde::{Deserialize, Serialize};

use super::PaSimError;
use crate::protocol::{TrialKey, TrialRecord};

/// Category level; `A` is the smallest range (or best device).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    A,
    B,
    C,
}

/// Replay device quality, `A` best.
pub type Quality = Level;

impl Level {
    pub const ALL: [Level; 3] = [Level::A, Level::B, Level::C];

    fn from_char(c: char) -> Option<Level> {
        match c.to_ascii_uppercase() {
            'A' => Some(Level::A),
            'B' => Some(Level::B),
            'C' => Some(Level::C),
            _ => None,
        }
    }

    fn upper(self) -> char {
        match self {
            Level::A => 'A',
            Level::B => 'B',
            Level::C => 'C',
        }
    }

    fn lower(self) -> char {
        self.upper().to_ascii_lowercase()
    }
}

/// Acoustic triple (lower case in protocols) and replay pair (upper case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PaCategoryLabel {
    pub room_size: Level,
    pub reverberation: Level,
    pub talker_to_mic: Level,
    pub attacker_to_talker: Level,
    pub device_quality: Quality,
}

impl PaCategoryLabel {
    /// Environment identifier such as `abc`.
    pub fn acoustic_id(&self) -> String {
        [self.room_size, self.reverberation, self.talker_to_mic]
            .iter()
            .map(|l| l.lower())
            .collect()
    }

    /// Replay attack label such as `AB`.
    pub fn replay_id(&self) -> String {
        [self.attacker_to_talker, self.device_quality]
            .iter()
            .map(|l| l.upper())
            .collect()
    }

    /// Parses an environment id (`abc`) and a replay id (`AB`).
    pub fn parse(acoustic: &str, replay: &str) -> Result<Self, PaSimError> {
        let levels = |s: &str, n: usize, upper: bool| -> Option<Vec<Level>> {
            let chars: Vec<char> = s.chars().collect();
            if chars.len() != n || chars.iter().any(|c| c.is_ascii_uppercase() != upper) {
                return None;
            }
            chars.into_iter().map(Level::from_char).collect()
        };
        let a = levels(acoustic, 3, false)
            .ok_or_else(|| PaSimError::InvalidCategory(format!("environment id `{acoustic}`")))?;
        let r = levels(replay, 2, true)
            .ok_or_else(|| PaSimError::InvalidCategory(format!("replay id `{replay}`")))?;
        Ok(PaCategoryLabel {
            room_size: a[0],
            reverberation: a[1],
            talker_to_mic: a[2],
            attacker_to_talker: r[0],
            device_quality: r[1],
        })
    }

    /// Category of a protocol trial: the environment id comes from the
    /// system column, the replay id from the attack column. Bona fide trials
    /// carry no replay pair and get `AA`, which their rendering never uses.
    pub fn from_record(rec: &TrialRecord) -> Result<Self, PaSimError> {
        let replay = match rec.key {
            TrialKey::Bonafide => "AA",
            TrialKey::Spoof => rec.attack_label.as_str(),
        };
        Self::parse(&rec.system_id, replay)
    }

    /// All 27 × 9 acoustic and replay combinations.
    pub fn all() -> Vec<PaCategoryLabel> {
        let mut out = Vec::with_capacity(243);
        for room_size in Level::ALL {
            for reverberation in Level::ALL {
                for talker_to_mic in Level::ALL {
                    for attacker_to_talker in Level::ALL {
                        for device_quality in Level::ALL {
                            out.push(PaCategoryLabel {
                                room_size,
                                reverberation,
                                talker_to_mic,
                                attacker_to_talker,
                                device_quality,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for PaCategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.acoustic_id(), self.replay_id())
    }
}

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    pub fn lo(&self) -> f64 {
        self.0
    }

    pub fn hi(&self) -> f64 {
        self.1
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.0 && x <= self.1
    }

    /// `lo + u (hi − lo)` for `u ∈ [0, 1)`; degenerate ranges return `lo`.
    pub fn at(&self, u: f64) -> f64 {
        self.0 + u * (self.1 - self.0)
    }

    fn check(&self, name: &str) -> Result<(), PaSimError> {
        if !(self.0.is_finite() && self.1.is_finite() && self.0 <= self.1) {
            return Err(PaSimError::InvalidTable(format!(
                "{name}: [{}, {}] is not an interval",
                self.0, self.1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRanges {
    pub a: Range,
    pub b: Range,
    pub c: Range,
}

impl LevelRanges {
    pub fn get(&self, level: Level) -> Range {
        match level {
            Level::A => self.a,
            Level::B => self.b,
            Level::C => self.c,
        }
    }

    fn check_ordered(&self, name: &str) -> Result<(), PaSimError> {
        for (l, r) in [(Level::A, self.a), (Level::B, self.b), (Level::C, self.c)] {
            r.check(&format!("{name}.{}", l.lower()))?;
            if r.lo() <= 0.0 {
                return Err(PaSimError::InvalidTable(format!(
                    "{name}.{} must be positive",
                    l.lower()
                )));
            }
        }
        if self.a.hi() > self.b.lo() || self.b.hi() > self.c.lo() {
            return Err(PaSimError::InvalidTable(format!(
                "{name}: ranges must be ordered a ≤ b ≤ c"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRange {
    /// Lower passband edge in Hz.
    pub low: Range,
    /// Upper passband edge in Hz.
    pub high: Range,
    pub drive: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRanges {
    #[serde(rename = "A")]
    pub a: DeviceRange,
    #[serde(rename = "B")]
    pub b: DeviceRange,
    #[serde(rename = "C")]
    pub c: DeviceRange,
}

impl DeviceRanges {
    pub fn get(&self, q: Quality) -> DeviceRange {
        match q {
            Level::A => self.a,
            Level::B => self.b,
            Level::C => self.c,
        }
    }
}

/// Parameter ranges per category level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryTable {
    pub sample_rate: u32,
    pub speed_of_sound: f64,
    /// Floor area in m².
    pub room_area: LevelRanges,
    /// Length / width ratio.
    pub aspect_ratio: Range,
    pub height: Range,
    pub t60: LevelRanges,
    pub talker_to_mic: LevelRanges,
    pub attacker_to_talker: LevelRanges,
    pub device: DeviceRanges,
    /// Minimum distance from any wall, metres.
    pub wall_clearance: f64,
    /// Minimum loudspeaker-to-microphone distance, metres.
    pub min_attacker_to_mic: f64,
    pub max_order_cap: usize,
}

impl Default for CategoryTable {
    fn default() -> Self {
        let dev = |lo: f64, hi: f64, g: f64| DeviceRange {
            low: Range(lo, lo),
            high: Range(hi, hi),
            drive: Range(g, g),
        };
        let tiers = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| LevelRanges {
            a: Range(a.0, a.1),
            b: Range(b.0, b.1),
            c: Range(c.0, c.1),
        };
        CategoryTable {
            sample_rate: 16000,
            speed_of_sound: super::SPEED_OF_SOUND,
            room_area: tiers((2.0, 5.0), (5.0, 10.0), (10.0, 20.0)),
            aspect_ratio: Range(1.0, 2.0),
            height: Range(2.5, 3.0),
            t60: tiers((0.05, 0.25), (0.25, 0.5), (0.5, 0.75)),
            talker_to_mic: tiers((0.1, 0.5), (0.5, 1.0), (1.0, 1.5)),
            attacker_to_talker: tiers((0.1, 0.5), (0.5, 1.0), (1.0, 1.5)),
            device: DeviceRanges {
                a: dev(20.0, 8000.0, 0.1),
                b: dev(100.0, 6000.0, 1.0),
                c: dev(300.0, 4000.0, 3.0),
            },
            wall_clearance: 0.1,
            min_attacker_to_mic: 0.1,
            max_order_cap: super::MAX_ORDER_CAP,
        }
    }
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl CategoryTable {
    /// Parses a TOML overlay; keys absent from it keep their defaults and
    /// unknown keys are rejected by name.
    pub fn from_toml_str(text: &str) -> Result<Self, PaSimError> {
        let overlay: toml::Value = toml::from_str(text)?;
        let mut base = toml::Value::try_from(CategoryTable::default())
            .map_err(|e| PaSimError::InvalidTable(e.to_string()))?;
        merge(&mut base, overlay);
        let table: CategoryTable = base.try_into()?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("table serializes")
    }

    pub fn validate(&self) -> Result<(), PaSimError> {
        if self.sample_rate == 0 || !(self.speed_of_sound > 0.0) {
            return Err(PaSimError::InvalidTable(
                "sample_rate and speed_of_sound must be positive".into(),
            ));
        }
        self.room_area.check_ordered("room_area")?;
        self.t60.check_ordered("t60")?;
        self.talker_to_mic.check_ordered("talker_to_mic")?;
        self.attacker_to_talker.check_ordered("attacker_to_talker")?;
        self.aspect_ratio.check("aspect_ratio")?;
        self.height.check("height")?;
        if self.aspect_ratio.lo() < 1.0 || self.height.lo() <= 2.0 * self.wall_clearance {
            return Err(PaSimError::InvalidTable(
                "aspect_ratio must be ≥ 1 and height must exceed twice the clearance".into(),
            ));
        }
        if !(self.wall_clearance >= 0.0) || !(self.min_attacker_to_mic >= super::MIN_SOURCE_DISTANCE)
        {
            return Err(PaSimError::InvalidTable(format!(
                "min_attacker_to_mic must be at least {} m",
                super::MIN_SOURCE_DISTANCE
            )));
        }
        if self.talker_to_mic.a.lo() < super::MIN_SOURCE_DISTANCE {
            return Err(PaSimError::InvalidTable(format!(
                "talker_to_mic.a must start at {} m or more",
                super::MIN_SOURCE_DISTANCE
            )));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        for q in Level::ALL {
            let d = self.device.get(q);
            let name = format!("device.{}", q.upper());
            d.low.check(&format!("{name}.low"))?;
            d.high.check(&format!("{name}.high"))?;
            d.drive.check(&format!("{name}.drive"))?;
            if d.low.lo() < 0.0 || d.low.hi() >= d.high.lo() || d.high.hi() > nyquist || d.drive.lo() < 0.0 {
                return Err(PaSimError::InvalidTable(format!(
                    "{name}: need 0 ≤ low < high ≤ {nyquist} and drive ≥ 0"
                )));
            }
        }
        // Better devices: wider passband and lower drive.
        for (better, worse) in [(Level::A, Level::B), (Level::B, Level::C)] {
            let (x, y) = (self.device.get(better), self.device.get(worse));
            if x.low.hi() > y.low.lo() || x.high.lo() < y.high.hi() || x.drive.hi() > y.drive.lo() {
                return Err(PaSimError::InvalidTable(format!(
                    "device.{} must have a wider passband and lower drive than device.{}",
                    better.upper(),
                    worse.upper()
                )));
            }
        }
        Ok(())
    }
}
