//! `evaluate`: tandem report for one CM score file.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use spoofkit::metrics::{
    det_curve, evaluate_tandem, extended_f64, AttackResult, CostModel, DetCurve, TandemEvaluation,
    TandemOptions, POOLED_LABEL,
};
use spoofkit::protocol::{join, parse_protocol, parse_scores, ScoreKey, ScoreKind, ScoreSet};

use crate::config::RunConfig;
use crate::output::{read_text, Outputs};
use crate::plot::det_svg;

/// Bumped whenever a field of the JSON report changes.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub attack: String,
    pub beta: f64,
    pub min_tdcf: f64,
    #[serde(with = "extended_f64")]
    pub min_tdcf_threshold: f64,
    /// Fractions, not percentages.
    pub cm_eer: f64,
    pub asv_eer_under_attack: f64,
    pub p_miss_spoof_asv: f64,
    pub n_spoof_cm: usize,
    pub high_penalty: bool,
}

impl AttackRow {
    pub fn from_result(r: &AttackResult) -> Self {
        AttackRow {
            attack: r.tdcf.attack_label.clone(),
            beta: r.tdcf.beta,
            min_tdcf: r.tdcf.min_tdcf,
            min_tdcf_threshold: r.tdcf.argmin_threshold,
            cm_eer: r.cm_eer.rate,
            asv_eer_under_attack: r.asv_eer_under_attack,
            p_miss_spoof_asv: r.asv_rates.p_miss_spoof_asv,
            n_spoof_cm: r.n_spoof_cm,
            high_penalty: r.high_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub cost: CostModel,
    pub options: TandemOptions,
    pub asv_threshold: f64,
    pub asv_eer: f64,
    pub n_bonafide_cm: usize,
    /// CM scores outside the protocol, ignored.
    pub dropped_scores: usize,
    pub pooled: AttackRow,
    pub per_attack: Vec<AttackRow>,
}

impl EvaluationReport {
    pub fn new(ev: &TandemEvaluation, cfg: &RunConfig, dropped: usize) -> Self {
        EvaluationReport {
            schema_version: REPORT_VERSION,
            cost: cfg.cost,
            options: cfg.tandem,
            asv_threshold: ev.asv_threshold,
            asv_eer: ev.asv_eer,
            n_bonafide_cm: ev.n_bonafide_cm,
            dropped_scores: dropped,
            pooled: AttackRow::from_result(&ev.pooled),
            per_attack: ev.per_attack.iter().map(AttackRow::from_result).collect(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &AttackRow> {
        std::iter::once(&self.pooled).chain(&self.per_attack)
    }

    /// `min t-DCF` to four decimals and EERs in percent to two.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("attack\tbeta\tmin_tdcf\tcm_eer_pct\tasv_eer_under_attack_pct\tn_spoof\thigh_penalty\n");
        for r in self.rows() {
            s.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.2}\t{:.2}\t{}\t{}\n",
                r.attack,
                r.beta,
                r.min_tdcf,
                100.0 * r.cm_eer,
                100.0 * r.asv_eer_under_attack,
                r.n_spoof_cm,
                r.high_penalty
            ));
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "pooled min t-DCF {:.4}, CM EER {:.2}%, ASV EER {:.2}%",
            self.pooled.min_tdcf,
            100.0 * self.pooled.cm_eer,
            100.0 * self.asv_eer
        )
    }
}

pub fn load_scores(path: &Path, kind: ScoreKind) -> Result<ScoreSet> {
    parse_scores(&read_text(path)?, kind).with_context(|| format!("score file {}", path.display()))
}

/// CM scores restricted to `protocol` when one is given; returns the number of
/// dropped records.
pub fn load_cm(path: &Path, protocol: Option<&Path>) -> Result<(ScoreSet, usize)> {
    let cm = load_scores(path, ScoreKind::Cm)?;
    match protocol {
        None => Ok((cm, 0)),
        Some(p) => {
            let trials = parse_protocol(&read_text(p)?).with_context(|| format!("protocol {}", p.display()))?;
            let j = join(&trials, &cm)
                .with_context(|| format!("joining {} to protocol {}", path.display(), p.display()))?;
            Ok((j.scores, j.dropped))
        }
    }
}

/// Pooled curve followed by one curve per attack.
pub fn det_curves(cm: &ScoreSet) -> Result<Vec<(String, DetCurve)>> {
    let bona = cm.scores_with_key(ScoreKey::Bonafide);
    let mut out = vec![(
        POOLED_LABEL.to_string(),
        det_curve(&bona, &cm.scores_with_key(ScoreKey::Spoof))?,
    )];
    for attack in cm.attack_labels() {
        let c = det_curve(&bona, &cm.spoof_scores_for(&attack))?;
        out.push((attack, c));
    }
    Ok(out)
}

pub fn det_csv(curves: &[(String, DetCurve)]) -> String {
    let mut s = String::from("attack,threshold,p_miss,p_fa\n");
    for (name, c) in curves {
        for line in c.to_csv().lines().skip(1) {
            s.push_str(name);
            s.push(',');
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

pub fn evaluate(cm: &ScoreSet, asv: &ScoreSet, cfg: &RunConfig, dropped: usize) -> Result<EvaluationReport> {
    let ev = evaluate_tandem(cm, asv, &cfg.cost, &cfg.tandem)?;
    Ok(EvaluationReport::new(&ev, cfg, dropped))
}

pub fn run(
    cm_path: &Path,
    asv_path: &Path,
    protocol: Option<&Path>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(Outputs, EvaluationReport)> {
    let (cm, dropped) = load_cm(cm_path, protocol)?;
    let asv = load_scores(asv_path, ScoreKind::Asv)?;
    let report = evaluate(&cm, &asv, cfg, dropped)?;
    let curves = det_curves(&cm)?;

    let mut outputs = Outputs::new();
    outputs.add_json(out_dir.join("report.json"), &report);
    outputs.add(out_dir.join("report.tsv"), report.to_tsv());
    outputs.add(out_dir.join("det.csv"), det_csv(&curves));
    if cfg.report.plot {
        let series: Vec<(String, &DetCurve)> = curves.iter().map(|(n, c)| (n.clone(), c)).collect();
        outputs.add(out_dir.join("det.svg"), det_svg("CM DET", &series));
    }
    Ok((outputs, report))
}
