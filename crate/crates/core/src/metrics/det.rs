use serde::{Deserialize, Serialize};

use super::{check_scores, extended_f64, MetricsError};

/// Empirical miss / false-alarm trade-off.
///
/// Candidate thresholds are `-inf`, every distinct pooled score in ascending
/// order, and `+inf`. At threshold `s`, `p_miss` is the fraction of bona fide
/// scores `< s` and `p_fa` the fraction of spoof scores `>= s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetCurve {
    pub thresholds: Vec<f64>,
    pub p_miss: Vec<f64>,
    pub p_fa: Vec<f64>,
    /// Bona fide scores strictly below each threshold.
    pub miss_counts: Vec<usize>,
    /// Spoof scores at or above each threshold.
    pub fa_counts: Vec<usize>,
    pub n_bonafide: usize,
    pub n_spoof: usize,
}

pub fn det_curve(bonafide: &[f64], spoof: &[f64]) -> Result<DetCurve, MetricsError> {
    check_scores(bonafide, "bonafide")?;
    check_scores(spoof, "spoof")?;

    let mut bona = bonafide.to_vec();
    let mut spf = spoof.to_vec();
    bona.sort_by(f64::total_cmp);
    spf.sort_by(f64::total_cmp);

    let mut pooled: Vec<f64> = bona.iter().chain(spf.iter()).copied().collect();
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();

    let n_points = pooled.len() + 2;
    let mut thresholds = Vec::with_capacity(n_points);
    let mut miss_counts = Vec::with_capacity(n_points);
    let mut fa_counts = Vec::with_capacity(n_points);

    thresholds.push(f64::NEG_INFINITY);
    miss_counts.push(0);
    fa_counts.push(spf.len());

    // Sweep: `ib` bona fide and `is` spoof scores lie strictly below `t`.
    let (mut ib, mut is) = (0usize, 0usize);
    for &t in &pooled {
        while ib < bona.len() && bona[ib] < t {
            ib += 1;
        }
        while is < spf.len() && spf[is] < t {
            is += 1;
        }
        thresholds.push(t);
        miss_counts.push(ib);
        fa_counts.push(spf.len() - is);
    }

    thresholds.push(f64::INFINITY);
    miss_counts.push(bona.len());
    fa_counts.push(0);

    let nb = bona.len() as f64;
    let ns = spf.len() as f64;
    Ok(DetCurve {
        p_miss: miss_counts.iter().map(|&c| c as f64 / nb).collect(),
        p_fa: fa_counts.iter().map(|&c| c as f64 / ns).collect(),
        thresholds,
        miss_counts,
        fa_counts,
        n_bonafide: bona.len(),
        n_spoof: spf.len(),
    })
}

impl DetCurve {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// CSV export with header `threshold,p_miss,p_fa`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,p_miss,p_fa\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                extended_f64::display(self.thresholds[i]),
                self.p_miss[i],
                self.p_fa[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eer {
    pub rate: f64,
    #[serde(with = "extended_f64")]
    pub threshold: f64,
}

/// Equal error rate of a DET curve.
///
/// `d = p_miss - p_fa` is non-decreasing along the curve, from -1 to +1. If an
/// empirical point has `d == 0` its rate is returned, with the threshold at the
/// midpoint of the score interval that realises that point. Otherwise the
/// crossing is linearly interpolated on the segment between the last point
/// with `d < 0` and the first with `d > 0`; the threshold is the score at which
/// the curve jumps between those two points.
///
/// The crossing is evaluated from the integer counts as one reduced fraction,
/// so symmetric cases such as identical class distributions give exactly 0.5.
pub fn eer(curve: &DetCurve) -> Eer {
    let (nb, ns) = (curve.n_bonafide as i128, curve.n_spoof as i128);
    // `d` scaled by `nb · ns`: exact in integers.
    let d = |i: usize| curve.miss_counts[i] as i128 * ns - curve.fa_counts[i] as i128 * nb;
    let i = (0..curve.len())
        .find(|&i| d(i) >= 0)
        .expect("DET curve ends at p_miss = 1, p_fa = 0");
    if d(i) == 0 {
        // `i >= 2`: the first two points always have p_fa = 1, p_miss = 0.
        return Eer {
            rate: curve.p_miss[i],
            threshold: 0.5 * (curve.thresholds[i - 1] + curve.thresholds[i]),
        };
    }
    let (d0, d1) = (d(i - 1), d(i));
    let (m0, m1) = (curve.miss_counts[i - 1] as i128, curve.miss_counts[i] as i128);
    // m0 + t (m1 - m0) with t = -d0 / (d1 - d0), over nb.
    let num = m0 * d1 - m1 * d0;
    let den = (d1 - d0) * nb;
    let g = gcd(num, den);
    Eer {
        rate: (num / g) as f64 / (den / g) as f64,
        threshold: curve.thresholds[i - 1],
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs().max(1)
}
