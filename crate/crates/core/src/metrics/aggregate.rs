//! Cross-participant summaries: min/max CCC table, CCC distributions, and
//! trend percentages averaged per participant and pooled over frames.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AgreementStats, TrendFrequency, sum};
use crate::corruption::{Condition, CorruptionKind};
use crate::error::{Error, Result};
use crate::predictor::Dimension;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantCcc {
    pub participant: String,
    pub ccc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: Condition,
    pub dimension: Dimension,
    pub participants: usize,
    pub ccc_min: f64,
    pub ccc_max: f64,
    pub ccc_mean: f64,
    pub ccc_median: f64,
    /// Per-participant values, in input order.
    pub ccc_distribution: Vec<ParticipantCcc>,
    /// Unweighted mean of per-participant percentages.
    pub trend_participant_mean: TrendFrequency,
    /// Percentages over all paired frames of all participants.
    pub trend_pooled: TrendFrequency,
    pub pooled_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<ConditionSummary>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Groups per-participant statistics by condition and dimension, in canonical
/// condition order.
pub fn aggregate(stats: &[AgreementStats]) -> Result<Summary> {
    if stats.is_empty() {
        return Err(Error::validation("nothing to aggregate: no participant statistics"));
    }
    let mut groups: BTreeMap<(Condition, Dimension), Vec<&AgreementStats>> = BTreeMap::new();
    for s in stats {
        groups.entry((s.condition, s.dimension)).or_default().push(s);
    }
    let cells = groups
        .into_iter()
        .map(|((condition, dimension), group)| {
            let mut values: Vec<f64> = group.iter().map(|s| s.ccc).collect();
            values.sort_by(f64::total_cmp);
            let k = group.len() as f64;
            let mean_of = |f: fn(&AgreementStats) -> f64| sum(group.iter().map(|s| f(s))) / k;
            let (pos, neg, n) = group.iter().fold((0, 0, 0), |(p, q, n), s| {
                let (sp, sq) = s.trend_counts();
                (p + sp, q + sq, n + s.n)
            });
            ConditionSummary {
                condition,
                dimension,
                participants: group.len(),
                ccc_min: values[0],
                ccc_max: values[values.len() - 1],
                ccc_mean: sum(values.iter().copied()) / k,
                ccc_median: median(&values),
                ccc_distribution: group
                    .iter()
                    .map(|s| ParticipantCcc {
                        participant: s.participant.clone(),
                        ccc: s.ccc,
                    })
                    .collect(),
                trend_participant_mean: TrendFrequency {
                    pos_pct: mean_of(|s| s.pos_pct),
                    neg_pct: mean_of(|s| s.neg_pct),
                    zero_pct: mean_of(|s| s.zero_pct),
                },
                trend_pooled: if n == 0 {
                    TrendFrequency {
                        pos_pct: 0.0,
                        neg_pct: 0.0,
                        zero_pct: 100.0,
                    }
                } else {
                    TrendFrequency::from_counts(pos, neg, n)
                },
                pooled_n: n,
            }
        })
        .collect();
    Ok(Summary { cells })
}

/// One line of the min/max CCC table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub condition: CorruptionKind,
    pub arousal_min_ccc: Option<f64>,
    pub arousal_max_ccc: Option<f64>,
    pub valence_min_ccc: Option<f64>,
    pub valence_max_ccc: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 5] = [
    "condition",
    "arousal_min_ccc",
    "arousal_max_ccc",
    "valence_min_ccc",
    "valence_max_ccc",
];

impl Summary {
    pub fn cell(&self, condition: Condition, dimension: Dimension) -> Option<&ConditionSummary> {
        self.cells
            .iter()
            .find(|c| c.condition == condition && c.dimension == dimension)
    }

    /// Min/max table rows for `conditions`, in the given order.
    pub fn table(&self, conditions: &[CorruptionKind]) -> Vec<SummaryRow> {
        conditions
            .iter()
            .map(|&kind| {
                let get = |dim| self.cell(Condition::Corrupted(kind), dim);
                let (a, v) = (get(Dimension::Arousal), get(Dimension::Valence));
                SummaryRow {
                    condition: kind,
                    arousal_min_ccc: a.map(|c| c.ccc_min),
                    arousal_max_ccc: a.map(|c| c.ccc_max),
                    valence_min_ccc: v.map(|c| c.ccc_min),
                    valence_max_ccc: v.map(|c| c.ccc_max),
                }
            })
            .collect()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the table as CSV. Values use shortest round-trip decimal formatting.
pub fn write_summary_csv(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::validation(format!("summary CSV: {e}"));
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.condition.as_str().to_string(),
            fmt_opt(r.arousal_min_ccc),
            fmt_opt(r.arousal_max_ccc),
            fmt_opt(r.valence_min_ccc),
            fmt_opt(r.valence_max_ccc),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::validation(format!("summary CSV: {e}")))
}

/// Parses a summary CSV, requiring the exact header.
pub fn read_summary_csv(input: impl Read) -> Result<Vec<SummaryRow>> {
    let csv_err = |e: csv::Error| Error::validation(format!("summary CSV: {e}"));
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(Error::validation(format!(
            "summary CSV header must be {}, got {}",
            SUMMARY_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}
