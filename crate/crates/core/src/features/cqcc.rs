use serde::{Deserialize, Serialize};

use super::cqt::cqt;
use super::dct::DctMatrix;
use super::deltas::append_deltas;
use super::spline::NaturalCubicSpline;
use super::{AudioBuffer, FeatureError, FeatureMatrix, LOG_FLOOR};

/// Constant-Q cepstral coefficient front-end settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CqccConfig {
    pub bins_per_octave: usize,
    /// Lowest bin frequency; defaults to `f_max / 2^9`.
    pub f_min: Option<f64>,
    /// Upper frequency limit; defaults to the Nyquist frequency.
    pub f_max: Option<f64>,
    /// Frame hop in samples.
    pub hop: usize,
    pub n_cepstral: usize,
    /// Linearly spaced resampling points per octave of the analysed range.
    pub resample_points_per_octave: usize,
    pub include_c0: bool,
    pub delta_window: usize,
    pub deltas: bool,
}

impl Default for CqccConfig {
    fn default() -> Self {
        CqccConfig {
            bins_per_octave: 96,
            f_min: None,
            f_max: None,
            hop: 160,
            n_cepstral: 30,
            resample_points_per_octave: 16,
            include_c0: true,
            delta_window: 2,
            deltas: true,
        }
    }
}

impl CqccConfig {
    /// Resolved `(f_min, f_max)` for a sample rate.
    pub fn frequency_range(&self, sample_rate: u32) -> Result<(f64, f64), FeatureError> {
        let nyquist = sample_rate as f64 / 2.0;
        let f_max = self.f_max.unwrap_or(nyquist);
        let f_min = self.f_min.unwrap_or(f_max / 512.0);
        if !(f_min > 0.0 && f_min < f_max && f_max <= nyquist) {
            return Err(FeatureError::InvalidConfig(format!(
                "need 0 < f_min < f_max <= {nyquist}, got f_min = {f_min}, f_max = {f_max}"
            )));
        }
        if self.bins_per_octave == 0 || self.hop == 0 || self.n_cepstral == 0 {
            return Err(FeatureError::InvalidConfig(
                "bins_per_octave, hop and n_cepstral must be positive".into(),
            ));
        }
        if self.resample_points_per_octave == 0 || self.delta_window == 0 {
            return Err(FeatureError::InvalidConfig(
                "resample_points_per_octave and delta_window must be positive".into(),
            ));
        }
        Ok((f_min, f_max))
    }

    /// Number of linearly spaced points after uniform resampling.
    pub fn resample_points(&self, sample_rate: u32) -> Result<usize, FeatureError> {
        let (f_min, f_max) = self.frequency_range(sample_rate)?;
        Ok((self.resample_points_per_octave as f64 * (f_max / f_min).log2()).round() as usize)
    }

    pub fn output_dims(&self) -> usize {
        if self.deltas {
            3 * self.n_cepstral
        } else {
            self.n_cepstral
        }
    }
}

/// Static CQCCs: `|CQT|²` → log with floor → spline resampling of the
/// geometric axis onto linearly spaced frequencies → orthonormal DCT-II.
pub fn cqcc_static(audio: &AudioBuffer, cfg: &CqccConfig) -> Result<FeatureMatrix, FeatureError> {
    let spectrum = cqt(audio, cfg)?;
    let geometry = &spectrum.geometry;
    let bins = geometry.bins();
    if bins < 2 {
        return Err(FeatureError::InvalidConfig("CQCC needs at least two bins".into()));
    }
    let points = cfg.resample_points(audio.sample_rate())?;
    let first = usize::from(!cfg.include_c0);
    if points < 2 || points < first + cfg.n_cepstral {
        return Err(FeatureError::InvalidConfig(format!(
            "{points} resampling points cannot yield {} cepstra",
            cfg.n_cepstral
        )));
    }
    let f_lo = geometry.freqs[0];
    let f_hi = geometry.freqs[bins - 1];
    let linear: Vec<f64> = (0..points)
        .map(|i| f_lo + (f_hi - f_lo) * i as f64 / (points - 1) as f64)
        .collect();
    let dct = DctMatrix::new(points, first, cfg.n_cepstral);

    let mut values = Vec::with_capacity(spectrum.frames() * cfg.n_cepstral);
    let mut log_power = vec![0.0; bins];
    let mut resampled = vec![0.0; points];
    for t in 0..spectrum.frames() {
        for (lp, c) in log_power.iter_mut().zip(spectrum.frame(t)) {
            *lp = c.norm_sqr().max(LOG_FLOOR).ln();
        }
        let spline = NaturalCubicSpline::new(&geometry.freqs, &log_power)?;
        for (r, &f) in resampled.iter_mut().zip(&linear) {
            *r = spline.eval(f);
        }
        dct.apply(&resampled, &mut values);
    }
    FeatureMatrix::new(spectrum.frames(), cfg.n_cepstral, values)
}

/// CQCCs with optional Δ and ΔΔ appended.
pub fn cqcc(audio: &AudioBuffer, cfg: &CqccConfig) -> Result<FeatureMatrix, FeatureError> {
    let stat = cqcc_static(audio, cfg)?;
    Ok(if cfg.deltas {
        append_deltas(&stat, cfg.delta_window)
    } else {
        stat
    })
}
