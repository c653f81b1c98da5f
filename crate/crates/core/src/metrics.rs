//! State-based evaluation: change-set extraction, positive/negative F1,
//! trend-aware accuracy, the rule-based call comparator, error rate, and
//! Jensen-Shannon divergence.
//!
//! Expected attribute changes come from diffing two consecutive truth
//! states; model-induced changes come from diffing the model's own
//! consecutive states. Accuracy compares the model's resulting values
//! against the truth targets, by trend for paths marked ambiguous.

use crate::registry::ApiCall;
use crate::state::{classify_trend, diff_snapshots, AttrPath, WorldSnapshot};
use crate::value::AttrValue;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("snapshots do not share a device set: {0}")]
    DeviceSetMismatch(String),
    #[error("no attributes require modification (invalid scenario turn)")]
    NothingToChange,
    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("label vectors are empty")]
    EmptyInput,
    #[error("distributions have different support: {left} vs {right}")]
    SupportMismatch { left: usize, right: usize },
    #[error("distribution is not normalized: sum {sum}")]
    NotNormalized { sum: f64 },
    #[error("distribution has a negative entry: {value}")]
    NegativeEntry { value: f64 },
    #[error("no turn reports to aggregate")]
    NoTurns,
}

/// Partition of attribute paths into should-change and should-stay sets,
/// with the model's observed changes and both sides' values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSets {
    pub should_change: BTreeSet<AttrPath>,
    pub should_unchange: BTreeSet<AttrPath>,
    pub model_changed: BTreeSet<AttrPath>,
    /// Model-side (before, after) per path.
    pub model_values: BTreeMap<AttrPath, (AttrValue, AttrValue)>,
    /// Truth-side (before, after) per path.
    pub truth_values: BTreeMap<AttrPath, (AttrValue, AttrValue)>,
}

/// Derive change sets from two consecutive truth states and the model's
/// corresponding pair. All four snapshots must share a device set.
pub fn compute_change_sets(
    truth_prev: &WorldSnapshot,
    truth_next: &WorldSnapshot,
    model_prev: &WorldSnapshot,
    model_next: &WorldSnapshot,
) -> Result<ChangeSets, MetricsError> {
    let truth_ids = truth_prev.device_ids();
    for (name, snapshot) in [
        ("truth_next", truth_next),
        ("model_prev", model_prev),
        ("model_next", model_next),
    ] {
        if snapshot.device_ids() != truth_ids {
            return Err(MetricsError::DeviceSetMismatch(name.to_string()));
        }
    }

    let truth_diff =
        diff_snapshots(truth_prev, truth_next).map_err(|e| MetricsError::DeviceSetMismatch(e.to_string()))?;
    let model_diff =
        diff_snapshots(model_prev, model_next).map_err(|e| MetricsError::DeviceSetMismatch(e.to_string()))?;

    let should_change = truth_diff.changed_paths();
    let all_paths: BTreeSet<AttrPath> = truth_prev.paths();
    let should_unchange: BTreeSet<AttrPath> =
        all_paths.difference(&should_change).cloned().collect();

    let mut model_values = BTreeMap::new();
    let mut truth_values = BTreeMap::new();
    for path in &all_paths {
        let mp = model_prev.value_at(path);
        let mn = model_next.value_at(path);
        if let (Some(before), Some(after)) = (mp, mn) {
            model_values.insert(path.clone(), (before.clone(), after.clone()));
        }
        let tp = truth_prev.value_at(path);
        let tn = truth_next.value_at(path);
        if let (Some(before), Some(after)) = (tp, tn) {
            truth_values.insert(path.clone(), (before.clone(), after.clone()));
        }
    }

    Ok(ChangeSets {
        should_change,
        should_unchange,
        model_changed: model_diff.changed_paths(),
        model_values,
        truth_values,
    })
}

/// Raw evaluation counters for one turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricCounters {
    /// Should change and was changed by the model.
    pub tp: u64,
    /// Should stay unchanged but was changed by the model.
    pub fp: u64,
    /// Should stay unchanged and was preserved.
    pub negative_tp: u64,
    /// Should stay unchanged but was changed (preservation misses).
    pub negative_fp: u64,
    pub total_should_changed: u64,
    pub total_should_unchanged: u64,
    /// Should-change paths whose resulting value (or trend) is correct.
    pub n_correct: u64,
    /// Total paths requiring modification.
    pub n_total: u64,
}

impl ChangeSets {
    /// Count the turn's counters. Paths in `trend_scored` that are
    /// numeric on both sides score by change direction; every other
    /// path scores by exact match against the truth target. A
    /// should-change path the model left untouched counts incorrect.
    pub fn counters(&self, trend_scored: &BTreeSet<AttrPath>) -> Result<MetricCounters, MetricsError> {
        if self.should_change.is_empty() {
            return Err(MetricsError::NothingToChange);
        }

        let tp = self.should_change.intersection(&self.model_changed).count() as u64;
        let fp = self.should_unchange.intersection(&self.model_changed).count() as u64;
        let negative_tp = self.should_unchange.len() as u64 - fp;
        let negative_fp = fp;

        let mut n_correct = 0u64;
        for path in &self.should_change {
            if self.path_correct(path, trend_scored.contains(path)) {
                n_correct += 1;
            }
        }

        Ok(MetricCounters {
            tp,
            fp,
            negative_tp,
            negative_fp,
            total_should_changed: self.should_change.len() as u64,
            total_should_unchanged: self.should_unchange.len() as u64,
            n_correct,
            n_total: self.should_change.len() as u64,
        })
    }

    fn path_correct(&self, path: &AttrPath, trend_scored: bool) -> bool {
        // Correctness requires the model to have modified the path in
        // this round; an untouched attribute that happens to hold the
        // target value does not count.
        if !self.model_changed.contains(path) {
            return false;
        }
        let Some((model_before, model_after)) = self.model_values.get(path) else {
            return false;
        };
        let Some((truth_before, truth_after)) = self.truth_values.get(path) else {
            return false;
        };
        if trend_scored {
            let model_trend = classify_trend(model_before, model_after);
            let truth_trend = classify_trend(truth_before, truth_after);
            if let (Ok(model_trend), Ok(truth_trend)) = (model_trend, truth_trend) {
                return model_trend == truth_trend;
            }
            // Non-numeric paths fall back to exact matching even when
            // annotated for trend scoring.
        }
        model_after == truth_after
    }
}

fn ratio(numerator: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// F1 over the attributes that should change: precision against every
/// model modification, recall against the required set. Denominator
/// zeros score zero.
pub fn f1_positive(c: &MetricCounters) -> f64 {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.total_should_changed);
    harmonic(precision, recall)
}

/// F1 over the attributes that should stay unchanged and were preserved.
pub fn f1_negative(c: &MetricCounters) -> f64 {
    let precision = ratio(c.negative_tp, c.negative_tp + c.negative_fp);
    let recall = ratio(c.negative_tp, c.total_should_unchanged);
    harmonic(precision, recall)
}

/// Share of required modifications that landed on the correct value
/// (or the correct trend for ambiguous numeric requests).
pub fn accuracy(c: &MetricCounters) -> f64 {
    ratio(c.n_correct, c.n_total)
}

/// Metrics for one turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnMetrics {
    pub f1_positive: f64,
    pub f1_negative: f64,
    pub accuracy: f64,
    pub counters: MetricCounters,
}

impl TurnMetrics {
    pub fn from_counters(counters: MetricCounters) -> Self {
        TurnMetrics {
            f1_positive: f1_positive(&counters),
            f1_negative: f1_negative(&counters),
            accuracy: accuracy(&counters),
            counters,
        }
    }

    /// Evaluate one turn from the four relevant snapshots.
    pub fn evaluate(
        truth_prev: &WorldSnapshot,
        truth_next: &WorldSnapshot,
        model_prev: &WorldSnapshot,
        model_next: &WorldSnapshot,
        trend_scored: &BTreeSet<AttrPath>,
    ) -> Result<TurnMetrics, MetricsError> {
        let sets = compute_change_sets(truth_prev, truth_next, model_prev, model_next)?;
        Ok(TurnMetrics::from_counters(sets.counters(trend_scored)?))
    }
}

/// One scored turn with its provenance labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnReport {
    pub scenario_id: String,
    pub domain: String,
    pub turn: usize,
    #[serde(flatten)]
    pub metrics: TurnMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub f1_positive: f64,
    pub f1_negative: f64,
    pub accuracy: f64,
    pub turns: usize,
}

/// Aggregated evaluation: unweighted per-turn means, with per-domain
/// rollups keyed by the scenarios' domain labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub overall: MetricSummary,
    pub per_domain: BTreeMap<String, MetricSummary>,
    pub per_turn: Vec<TurnReport>,
}

fn summarize<'a>(turns: impl Iterator<Item = &'a TurnReport>) -> MetricSummary {
    let mut f1p = 0.0;
    let mut f1n = 0.0;
    let mut acc = 0.0;
    let mut count = 0usize;
    for report in turns {
        f1p += report.metrics.f1_positive;
        f1n += report.metrics.f1_negative;
        acc += report.metrics.accuracy;
        count += 1;
    }
    let denom = count.max(1) as f64;
    MetricSummary {
        f1_positive: f1p / denom,
        f1_negative: f1n / denom,
        accuracy: acc / denom,
        turns: count,
    }
}

/// Average metrics across all interaction turns, weighting turns
/// equally regardless of attribute count.
pub fn aggregate(turns: Vec<TurnReport>) -> Result<MetricReport, MetricsError> {
    if turns.is_empty() {
        return Err(MetricsError::NoTurns);
    }
    let overall = summarize(turns.iter());
    let domains: BTreeSet<String> = turns.iter().map(|t| t.domain.clone()).collect();
    let per_domain = domains
        .into_iter()
        .map(|domain| {
            let summary = summarize(turns.iter().filter(|t| t.domain == domain));
            (domain, summary)
        })
        .collect();
    Ok(MetricReport {
        overall,
        per_domain,
        per_turn: turns,
    })
}

impl MetricReport {
    /// Canonical machine-readable form.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Aligned-column table for humans.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<[String; 5]> = Vec::new();
        rows.push([
            "scenario".into(),
            "turn".into(),
            "F1+".into(),
            "F1-".into(),
            "acc".into(),
        ]);
        for turn in &self.per_turn {
            rows.push([
                turn.scenario_id.clone(),
                turn.turn.to_string(),
                format!("{:.4}", turn.metrics.f1_positive),
                format!("{:.4}", turn.metrics.f1_negative),
                format!("{:.4}", turn.metrics.accuracy),
            ]);
        }
        for (domain, summary) in &self.per_domain {
            rows.push([
                format!("[{domain}]"),
                summary.turns.to_string(),
                format!("{:.4}", summary.f1_positive),
                format!("{:.4}", summary.f1_negative),
                format!("{:.4}", summary.accuracy),
            ]);
        }
        rows.push([
            "[overall]".into(),
            self.overall.turns.to_string(),
            format!("{:.4}", self.overall.f1_positive),
            format!("{:.4}", self.overall.f1_negative),
            format!("{:.4}", self.overall.accuracy),
        ]);

        let mut widths = [0usize; 5];
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        for (index, row) in rows.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, cell)| format!("{:width$}", cell, width = widths[i]))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if index == 0 {
                out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 8));
                out.push('\n');
            }
        }
        out
    }
}

/// Legacy comparator: true iff the produced calls match the expected
/// sequence exactly in names, full argument maps, and call count.
pub fn rule_based_evaluate(expected: &[ApiCall], produced: &[ApiCall]) -> bool {
    expected.len() == produced.len()
        && expected
            .iter()
            .zip(produced)
            .all(|(e, p)| e.api_name == p.api_name && e.args == p.args)
}

/// Proportion of disagreements between an automatic evaluator's verdicts
/// and expert annotations.
pub fn error_rate(auto: &[bool], expert: &[bool]) -> Result<f64, MetricsError> {
    if auto.len() != expert.len() {
        return Err(MetricsError::LengthMismatch {
            left: auto.len(),
            right: expert.len(),
        });
    }
    if auto.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let disagreements = auto
        .iter()
        .zip(expert)
        .filter(|(a, e)| a != e)
        .count();
    Ok(disagreements as f64 / auto.len() as f64)
}

/// A validated probability vector over a finite label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    const TOLERANCE: f64 = 1e-9;

    pub fn new(probabilities: Vec<f64>) -> Result<Self, MetricsError> {
        for &p in &probabilities {
            if p < 0.0 {
                return Err(MetricsError::NegativeEntry { value: p });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > Self::TOLERANCE {
            return Err(MetricsError::NotNormalized { sum });
        }
        Ok(Distribution(probabilities))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = MetricsError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

/// Jensen-Shannon divergence in natural-log units: the average of the
/// KL divergences of each distribution from their midpoint, with
/// 0·ln 0 taken as 0. Bounded by ln 2.
pub fn jsd(p: &Distribution, q: &Distribution) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::SupportMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let kl_to_mid = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&ai, &bi)| {
                if ai == 0.0 {
                    0.0
                } else {
                    let mid = 0.5 * (ai + bi);
                    ai * (ai / mid).ln()
                }
            })
            .sum()
    };
    let divergence =
        0.5 * kl_to_mid(p.as_slice(), q.as_slice()) + 0.5 * kl_to_mid(q.as_slice(), p.as_slice());
    Ok(divergence.max(0.0))
}
