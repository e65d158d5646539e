//! `rank`: evaluate several submissions against the same ASV scores.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spoofkit::metrics::{DetCurve, CostModel, TandemOptions, POOLED_LABEL};
use spoofkit::protocol::{ScoreKind, ScoreSet};

use crate::config::RunConfig;
use crate::evaluate::{det_curves, evaluate, load_cm, load_scores, AttackRow, EvaluationReport, REPORT_VERSION};
use crate::output::{parent_dir, read_text, resolve, Outputs};
use crate::plot::det_svg;
use crate::stats::{five_number, median};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubmissionLabel {
    Primary,
    Single,
}

impl fmt::Display for SubmissionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubmissionLabel::Primary => "primary",
            SubmissionLabel::Single => "single",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionEntry {
    pub team_id: String,
    pub label: SubmissionLabel,
    pub score_file: PathBuf,
}

/// Submission list lines hold `TEAM_ID LABEL SCORE_FILE`, with `LABEL` one of
/// `primary` or `single`. Relative paths are taken from the list's directory.
pub fn parse_submissions(text: &str, base: &Path) -> Result<Vec<SubmissionEntry>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [team, label, file] = parts.as_slice() else {
            bail!("submission list line {}: expected 'TEAM_ID LABEL SCORE_FILE'", i + 1);
        };
        let label = match *label {
            "primary" => SubmissionLabel::Primary,
            "single" => SubmissionLabel::Single,
            other => bail!("submission list line {}: unknown label '{other}'", i + 1),
        };
        if !seen.insert(team.to_string()) {
            bail!("submission list line {}: duplicate team_id '{team}'", i + 1);
        }
        out.push(SubmissionEntry {
            team_id: team.to_string(),
            label,
            score_file: resolve(base, file),
        });
    }
    if out.is_empty() {
        bail!("submission list is empty");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub team_id: String,
    pub label: SubmissionLabel,
    pub pooled: AttackRow,
    pub per_attack: Vec<AttackRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub schema_version: u32,
    pub cost: CostModel,
    pub options: TandemOptions,
    pub asv_eer: f64,
    pub entries: Vec<RankedEntry>,
}

/// Pooled min t-DCF, then pooled CM EER, then team id.
pub fn rank_order(a: (&str, &AttackRow), b: (&str, &AttackRow)) -> Ordering {
    a.1.min_tdcf
        .total_cmp(&b.1.min_tdcf)
        .then(a.1.cm_eer.total_cmp(&b.1.cm_eer))
        .then_with(|| a.0.cmp(b.0))
}

pub fn rank_reports(subs: &[SubmissionEntry], reports: Vec<EvaluationReport>, cfg: &RunConfig) -> Ranking {
    let asv_eer = reports.first().map_or(f64::NAN, |r| r.asv_eer);
    let mut rows: Vec<(SubmissionEntry, EvaluationReport)> = subs.iter().cloned().zip(reports).collect();
    rows.sort_by(|a, b| rank_order((&a.0.team_id, &a.1.pooled), (&b.0.team_id, &b.1.pooled)));
    let entries = rows
        .into_iter()
        .enumerate()
        .map(|(i, (s, r))| RankedEntry {
            rank: i + 1,
            team_id: s.team_id,
            label: s.label,
            pooled: r.pooled,
            per_attack: r.per_attack,
        })
        .collect();
    Ranking {
        schema_version: REPORT_VERSION,
        cost: cfg.cost,
        options: cfg.tandem,
        asv_eer,
        entries,
    }
}

impl Ranking {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("rank\tteam_id\tlabel\tmin_tdcf\tcm_eer_pct\n");
        for e in &self.entries {
            s.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{:.2}\n",
                e.rank,
                e.team_id,
                e.label,
                e.pooled.min_tdcf,
                100.0 * e.pooled.cm_eer
            ));
        }
        s
    }

    fn row<'a>(e: &'a RankedEntry, condition: &str) -> Option<&'a AttackRow> {
        if condition == POOLED_LABEL {
            Some(&e.pooled)
        } else {
            e.per_attack.iter().find(|r| r.attack == condition)
        }
    }

    /// Per condition (pooled, then each attack): quartiles of min t-DCF over
    /// the best `top_n` entries, the ASV EER under that attack, and the median
    /// CM EER over all entries.
    pub fn boxplot_csv(&self, top_n: usize) -> String {
        let attacks: BTreeSet<&str> = self
            .entries
            .iter()
            .flat_map(|e| e.per_attack.iter().map(|r| r.attack.as_str()))
            .collect();
        let mut s = String::from("condition,n,min,q1,median,q3,max,asv_eer_pct,median_cm_eer_pct\n");
        for cond in std::iter::once(POOLED_LABEL).chain(attacks) {
            let top: Vec<f64> = self
                .entries
                .iter()
                .take(top_n)
                .filter_map(|e| Self::row(e, cond).map(|r| r.min_tdcf))
                .collect();
            let all: Vec<&AttackRow> = self.entries.iter().filter_map(|e| Self::row(e, cond)).collect();
            if top.is_empty() {
                continue;
            }
            let f = five_number(&top);
            let eers: Vec<f64> = all.iter().map(|r| r.cm_eer).collect();
            s.push_str(&format!(
                "{cond},{},{},{},{},{},{},{:.2},{:.2}\n",
                top.len(),
                f.min,
                f.q1,
                f.median,
                f.q3,
                f.max,
                100.0 * all[0].asv_eer_under_attack,
                100.0 * median(&eers)
            ));
        }
        s
    }
}

fn load_submission(
    s: &SubmissionEntry,
    asv: &ScoreSet,
    protocol: Option<&Path>,
    cfg: &RunConfig,
) -> Result<(EvaluationReport, DetCurve)> {
    let (cm, dropped) = load_cm(&s.score_file, protocol)?;
    let report = evaluate(&cm, asv, cfg, dropped)?;
    let pooled = det_curves(&cm)?.swap_remove(0).1;
    Ok((report, pooled))
}

pub fn run(
    submissions: &Path,
    asv_path: &Path,
    protocol: Option<&Path>,
    cfg: &RunConfig,
    out_dir: &Path,
) -> Result<(Outputs, Ranking)> {
    let subs = parse_submissions(&read_text(submissions)?, &parent_dir(submissions))?;
    let asv = load_scores(asv_path, ScoreKind::Asv)?;
    let evaluated = subs
        .par_iter()
        .map(|s| {
            load_submission(s, &asv, protocol, cfg).with_context(|| format!("submission '{}'", s.team_id))
        })
        .collect::<Result<Vec<_>>>()?;
    let (reports, curves): (Vec<_>, Vec<_>) = evaluated.into_iter().unzip();
    let ranking = rank_reports(&subs, reports, cfg);

    let mut outputs = Outputs::new();
    outputs.add_json(out_dir.join("ranking.json"), &ranking);
    outputs.add(out_dir.join("ranking.tsv"), ranking.to_tsv());
    outputs.add(out_dir.join("boxplot.csv"), ranking.boxplot_csv(cfg.report.top_n));
    if cfg.report.plot {
        let series: Vec<(String, &DetCurve)> = ranking
            .entries
            .iter()
            .take(cfg.report.top_n)
            .map(|e| {
                let i = subs.iter().position(|s| s.team_id == e.team_id).expect("ranked team was submitted");
                (e.team_id.clone(), &curves[i])
            })
            .collect();
        outputs.add(out_dir.join("det.svg"), det_svg("Pooled CM DET", &series));
    }
    Ok((outputs, ranking))
}
