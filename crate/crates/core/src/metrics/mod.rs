//! Agreement between original-frame and condition-frame predictions.
//!
//! Moments are population moments (divide by `n`) throughout. Sums use
//! Neumaier compensation so long sequences keep full precision.

pub mod aggregate;

use serde::{Deserialize, Serialize};

use crate::corruption::Condition;
use crate::error::{Error, Result};
use crate::predictor::{AffectSequence, Dimension};

pub use aggregate::{ConditionSummary, Summary, SummaryRow, aggregate};

/// Compensated summation.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            comp += (total - t) + v;
        } else {
            comp += (v - t) + total;
        }
        total = t;
    }
    total + comp
}

/// Time step where both sequences hold a valid sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedSample {
    pub frame_index: u64,
    pub original: (f64, f64),
    pub condition: (f64, f64),
}

impl PairedSample {
    fn get(&self, dim: Dimension) -> (f64, f64) {
        match dim {
            Dimension::Arousal => (self.original.0, self.condition.0),
            Dimension::Valence => (self.original.1, self.condition.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paired {
    pub participant_id: String,
    pub condition: Condition,
    pub pairs: Vec<PairedSample>,
}

impl Paired {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// (original, condition) value columns for one dimension.
    pub fn columns(&self, dim: Dimension) -> (Vec<f64>, Vec<f64>) {
        self.pairs.iter().map(|p| p.get(dim)).unzip()
    }
}

/// Inner join on frame index with pairwise deletion of invalid samples.
pub fn align(orig: &AffectSequence, cond: &AffectSequence) -> Result<Paired> {
    if orig.participant_id != cond.participant_id {
        return Err(Error::validation(format!(
            "cannot align participant `{}` with `{}`",
            orig.participant_id, cond.participant_id
        )));
    }
    let (a, b) = (orig.samples(), cond.samples());
    let (mut i, mut j) = (0, 0);
    let mut pairs = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        let (x, y) = (&a[i], &b[j]);
        match x.frame_index.cmp(&y.frame_index) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if x.valid && y.valid {
                    pairs.push(PairedSample {
                        frame_index: x.frame_index,
                        original: (x.arousal.unwrap(), x.valence.unwrap()),
                        condition: (y.arousal.unwrap(), y.valence.unwrap()),
                    });
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(Paired {
        participant_id: orig.participant_id.clone(),
        condition: cond.condition,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub frame_index: u64,
    pub original: f64,
    pub condition_value: f64,
    pub delta: f64,
}

/// Signed per-frame differences `condition - original`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSeries {
    pub participant_id: String,
    pub condition: Condition,
    pub dimension: Dimension,
    pub points: Vec<DeviationPoint>,
}

impl DeviationSeries {
    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.delta)
    }
}

pub fn deviation(paired: &Paired, dimension: Dimension) -> DeviationSeries {
    let points = paired
        .pairs
        .iter()
        .map(|p| {
            let (original, condition_value) = p.get(dimension);
            DeviationPoint {
                frame_index: p.frame_index,
                original,
                condition_value,
                delta: condition_value - original,
            }
        })
        .collect();
    DeviationSeries {
        participant_id: paired.participant_id.clone(),
        condition: paired.condition,
        dimension,
        points,
    }
}

/// Share of over-, under- and unchanged estimates, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFrequency {
    pub pos_pct: f64,
    pub neg_pct: f64,
    pub zero_pct: f64,
}

impl TrendFrequency {
    pub fn from_counts(pos: usize, neg: usize, n: usize) -> Self {
        let pct = |k: usize| 100.0 * k as f64 / n as f64;
        let (pos_pct, neg_pct) = (pct(pos), pct(neg));
        TrendFrequency {
            pos_pct,
            neg_pct,
            zero_pct: pct(n - pos - neg),
        }
    }
}

/// Deltas above `zero_tolerance` count as positive, below `-zero_tolerance` as negative.
pub fn trend_frequency(
    deltas: impl IntoIterator<Item = f64>,
    zero_tolerance: f64,
) -> Result<TrendFrequency> {
    let (mut pos, mut neg, mut n) = (0usize, 0usize, 0usize);
    for d in deltas {
        n += 1;
        if d > zero_tolerance {
            pos += 1;
        } else if d < -zero_tolerance {
            neg += 1;
        }
    }
    if n == 0 {
        return Err(Error::validation("trend frequency of an empty series"));
    }
    Ok(TrendFrequency::from_counts(pos, neg, n))
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments> {
    if x.len() != y.len() {
        return Err(Error::validation(format!(
            "sequence lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::validation(format!(
            "at least 2 paired samples required, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = sum(x.iter().copied()) / n;
    let mean_y = sum(y.iter().copied()) / n;
    let var_x = sum(x.iter().map(|v| (v - mean_x) * (v - mean_x))) / n;
    let var_y = sum(y.iter().map(|v| (v - mean_y) * (v - mean_y))) / n;
    let cov = sum(x.iter().zip(y).map(|(a, b)| (a - mean_x) * (b - mean_y))) / n;
    Ok(Moments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov,
    })
}

/// Pearson coefficient; `degenerate` is set (and `value` is 0) when either input is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let m = moments(x, y)?;
    let scale = m.var_x * m.var_y;
    if scale <= 0.0 {
        return Ok(Correlation {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        value: (m.cov / scale.sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Concordance correlation coefficient in covariance form:
/// `2 cov(x, y) / (var x + var y + (mean x - mean y)^2)`.
///
/// Two constant sequences with equal means give 1; one constant sequence gives 0.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = moments(x, y)?;
    let diff = m.mean_x - m.mean_y;
    let denom = m.var_x + m.var_y + diff * diff;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((2.0 * m.cov / denom).clamp(-1.0, 1.0))
}

/// Agreement statistics for one participant x condition x dimension cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub participant: String,
    pub condition: Condition,
    pub dimension: Dimension,
    pub ccc: f64,
    pub pearson: f64,
    pub pearson_degenerate: bool,
    pub pos_pct: f64,
    pub neg_pct: f64,
    pub zero_pct: f64,
    pub mean_delta: f64,
    pub min_delta: f64,
    pub max_delta: f64,
    pub n: usize,
}

impl AgreementStats {
    pub fn trend(&self) -> TrendFrequency {
        TrendFrequency {
            pos_pct: self.pos_pct,
            neg_pct: self.neg_pct,
            zero_pct: self.zero_pct,
        }
    }

    /// Recovers (positive, negative) counts from the stored percentages.
    pub fn trend_counts(&self) -> (usize, usize) {
        let count = |pct: f64| (pct * self.n as f64 / 100.0).round() as usize;
        (count(self.pos_pct), count(self.neg_pct))
    }
}

pub fn agreement(paired: &Paired, dimension: Dimension, zero_tolerance: f64) -> Result<AgreementStats> {
    let (orig, cond) = paired.columns(dimension);
    let r = pearson(&orig, &cond)?;
    let concordance = ccc(&orig, &cond)?;
    let dev = deviation(paired, dimension);
    let trend = trend_frequency(dev.deltas(), zero_tolerance)?;
    let n = dev.points.len();
    let min_delta = dev.deltas().fold(f64::INFINITY, f64::min);
    let max_delta = dev.deltas().fold(f64::NEG_INFINITY, f64::max);
    Ok(AgreementStats {
        participant: paired.participant_id.clone(),
        condition: paired.condition,
        dimension,
        ccc: concordance,
        pearson: r.value,
        pearson_degenerate: r.degenerate,
        pos_pct: trend.pos_pct,
        neg_pct: trend.neg_pct,
        zero_pct: trend.zero_pct,
        mean_delta: sum(dev.deltas()) / n as f64,
        min_delta,
        max_delta,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::CorruptionKind;
    use crate::predictor::AffectSample;

    fn seq(cond: Condition, samples: &[(u64, f64, f64)]) -> AffectSequence {
        AffectSequence::new(
            "p01",
            cond,
            samples.iter().map(|&(i, a, v)| AffectSample::valid(i, a, v)).collect(),
        )
        .unwrap()
    }

    const LIGHTER: Condition = Condition::Corrupted(CorruptionKind::Lighter);

    #[test]
    fn align_full_overlap() {
        let o = seq(Condition::Original, &[(0, 0.1, 0.2), (1, 0.3, 0.4), (2, 0.5, 0.6)]);
        let c = seq(LIGHTER, &[(0, 0.1, 0.2), (1, 0.3, 0.4), (2, 0.5, 0.6)]);
        assert_eq!(align(&o, &c).unwrap().len(), 3);
    }

    #[test]
    fn align_intersection() {
        let o = seq(Condition::Original, &[(0, 0.0, 0.0), (1, 0.1, 0.1), (2, 0.2, 0.2)]);
        let c = seq(LIGHTER, &[(1, 0.0, 0.0), (2, 0.1, 0.1), (3, 0.2, 0.2)]);
        let p = align(&o, &c).unwrap();
        let idx: Vec<u64> = p.pairs.iter().map(|s| s.frame_index).collect();
        assert_eq!(idx, vec![1, 2]);
    }

    #[test]
    fn align_pairwise_deletion() {
        let o = seq(Condition::Original, &[(0, 0.0, 0.0), (1, 0.1, 0.1)]);
        let c = AffectSequence::new(
            "p01",
            LIGHTER,
            vec![AffectSample::valid(0, 0.2, 0.2), AffectSample::invalid(1)],
        )
        .unwrap();
        let p = align(&o, &c).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.pairs[0].frame_index, 0);
    }

    #[test]
    fn align_participant_mismatch() {
        let o = seq(Condition::Original, &[(0, 0.0, 0.0)]);
        let c = AffectSequence::new("p02", LIGHTER, vec![]).unwrap();
        assert!(align(&o, &c).is_err());
    }

    #[test]
    fn deviation_examples() {
        let o = seq(Condition::Original, &[(0, 0.3, 0.5), (1, 0.5, 0.0)]);
        let c = seq(LIGHTER, &[(0, 0.5, 0.5), (1, -0.5, 0.0)]);
        let d = deviation(&align(&o, &c).unwrap(), Dimension::Arousal);
        let deltas: Vec<f64> = d.deltas().collect();
        assert!((deltas[0] - 0.2).abs() < 1e-15);
        assert_eq!(deltas[1], -1.0);
        let v = deviation(&align(&o, &c).unwrap(), Dimension::Valence);
        assert!(v.deltas().all(|d| d == 0.0));
    }

    #[test]
    fn trend_examples() {
        let t = trend_frequency([0.1, -0.1, 0.2, 0.3], 0.0).unwrap();
        assert_eq!((t.pos_pct, t.neg_pct, t.zero_pct), (75.0, 25.0, 0.0));
        let t = trend_frequency([0.0; 5], 0.0).unwrap();
        assert_eq!((t.pos_pct, t.neg_pct, t.zero_pct), (0.0, 0.0, 100.0));
        let t = trend_frequency([0.005, -0.2], 0.01).unwrap();
        assert_eq!((t.pos_pct, t.neg_pct, t.zero_pct), (0.0, 50.0, 50.0));
        assert!(trend_frequency(std::iter::empty(), 0.0).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap().value - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap().value + 1.0).abs() < 1e-15);
        // cov = 1.0, var = 1.25 for both: 1 / 1.25
        let r = pearson(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.value - 0.8).abs() < 1e-15);
        let d = pearson(&x, &[2.0; 4]).unwrap();
        assert!(d.degenerate && d.value == 0.0);
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&x, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ccc_examples() {
        let x = [-1.0, 0.0, 1.0];
        assert_eq!(ccc(&x, &x).unwrap(), 1.0);
        assert_eq!(ccc(&x, &[1.0, 0.0, -1.0]).unwrap(), -1.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
        assert!((ccc(&x, &shifted).unwrap() - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(ccc(&x, &[0.3; 3]).unwrap(), 0.0);
        assert_eq!(ccc(&[0.3; 3], &[0.3; 3]).unwrap(), 1.0);
        assert_eq!(ccc(&[0.3; 3], &[0.2; 3]).unwrap(), 0.0);
        assert!(ccc(&[], &[]).is_err());
    }

    #[test]
    fn self_agreement_cell() {
        let o = seq(Condition::Original, &[(0, 0.1, 0.2), (1, 0.4, -0.3), (2, -0.2, 0.9)]);
        let c = AffectSequence::new("p01", LIGHTER, o.samples().to_vec()).unwrap();
        let s = agreement(&align(&o, &c).unwrap(), Dimension::Arousal, 0.0).unwrap();
        assert_eq!(s.ccc, 1.0);
        assert_eq!((s.pos_pct, s.neg_pct, s.zero_pct), (0.0, 0.0, 100.0));
        assert_eq!(s.n, 3);
    }

    #[test]
    fn compensated_sum() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(v), 2.0);
    }
}
