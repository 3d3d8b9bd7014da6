//! Ranking candidate encoders and measuring how well scores predict
//! observed performance.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tuning {
    Frozen,
    Tuned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Cls,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    pub tuning: Tuning,
    pub repr: Representation,
}

impl Default for Setting {
    fn default() -> Self {
        Self {
            tuning: Tuning::Frozen,
            repr: Representation::Mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub model_id: String,
    pub score: f64,
    #[serde(default)]
    pub performance: Option<f64>,
}

impl CandidateScore {
    pub fn new(model_id: impl Into<String>, score: f64, performance: Option<f64>) -> Self {
        Self {
            model_id: model_id.into(),
            score,
            performance,
        }
    }
}

/// How ranks are derived for the weighted Kendall statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauVariant {
    /// Average of the statistic under the (x, y) and (y, x) orderings.
    #[default]
    Symmetric,
    /// Ranks from the (y, x) ordering only.
    RankByY,
}

/// Numeric order with signed zeros equal; NaN falls back to the total order.
fn cmp_value(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| a.total_cmp(&b))
}

/// Descending by score; equal scores ordered by model id.
pub fn rank_models(scores: &[CandidateScore]) -> Vec<CandidateScore> {
    let mut out = scores.to_vec();
    out.sort_by(|a, b| {
        cmp_value(b.score, a.score)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    out
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFewEntries {
            needed: 2,
            got: x.len(),
        });
    }
    for (what, v) in [("x", x), ("y", y)] {
        if let Some(index) = v.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what, index });
        }
    }
    Ok(())
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let mx = numeric::mean(x);
    let my = numeric::mean(y);
    let (mut sxx, mut syy, mut sxy) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    let (sxx, syy) = (sxx.value(), syy.value());
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok((sxy.value() / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Rank (0 = top) of each element under decreasing lexicographic order of
/// `(primary, secondary)`; full ties keep input order.
fn lexicographic_ranks(primary: &[f64], secondary: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..primary.len()).collect();
    order.sort_by(|&a, &b| {
        cmp_value(primary[b], primary[a])
            .then_with(|| cmp_value(secondary[b], secondary[a]))
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0; primary.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos;
    }
    ranks
}

fn sign(d: f64) -> f64 {
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Weighted concordance under fixed ranks with additive hyperbolic weights
/// `1/(r_i+1) + 1/(r_j+1)`. Tied pairs add weight but no concordance.
fn weighted_concordance(x: &[f64], y: &[f64], ranks: &[usize]) -> f64 {
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let w = 1.0 / (ranks[i] + 1) as f64 + 1.0 / (ranks[j] + 1) as f64;
            num.add(w * sign(x[i] - x[j]) * sign(y[i] - y[j]));
            den.add(w);
        }
    }
    num.value() / den.value()
}

/// Weighted Kendall τ_w with additive hyperbolic weights, symmetric over
/// the two lexicographic orderings.
pub fn weighted_kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    weighted_kendall_tau_with(x, y, TauVariant::Symmetric)
}

pub fn weighted_kendall_tau_with(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64> {
    check_pair(x, y)?;
    let by_y = weighted_concordance(x, y, &lexicographic_ranks(y, x));
    let tau = match variant {
        TauVariant::RankByY => by_y,
        TauVariant::Symmetric => {
            let by_x = weighted_concordance(x, y, &lexicographic_ranks(x, y));
            0.5 * (by_x + by_y)
        }
    };
    Ok(tau.clamp(-1.0, 1.0))
}

/// Probability that the higher-ranked of two models performs better.
pub fn prob_better(tau_w: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&tau_w) {
        return Err(Error::OutOfRange(tau_w));
    }
    Ok((tau_w + 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub model_id: String,
    pub score: f64,
    pub performance: Option<f64>,
    /// 1-based position in the ranking.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tau_variant: TauVariant,
    /// The only field that differs between otherwise identical runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub dataset: String,
    pub setting: Setting,
    pub candidates: Vec<RankedCandidate>,
    pub pearson_rho: Option<f64>,
    pub weighted_tau: Option<f64>,
    pub prob_better: Option<f64>,
    pub n_candidates: usize,
    pub meta: ReportMeta,
}

fn check_unique(candidates: &[CandidateScore]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (index, c) in candidates.iter().enumerate() {
        if !seen.insert(c.model_id.as_str()) {
            return Err(Error::DuplicateModel(c.model_id.clone()));
        }
        if !c.score.is_finite() {
            return Err(Error::NonFinite {
                what: "score",
                index,
            });
        }
        if c.performance.is_some_and(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                what: "performance",
                index,
            });
        }
    }
    Ok(())
}

fn ranked(sorted: &[CandidateScore]) -> Vec<RankedCandidate> {
    sorted
        .iter()
        .enumerate()
        .map(|(i, c)| RankedCandidate {
            model_id: c.model_id.clone(),
            score: c.score,
            performance: c.performance,
            rank: i + 1,
        })
        .collect()
}

/// Ranking without correlation statistics, for pools of any size or with
/// missing performance numbers.
pub fn ranking_only(
    dataset: &str,
    setting: Setting,
    candidates: &[CandidateScore],
) -> Result<RankingReport> {
    if candidates.is_empty() {
        return Err(Error::TooFewEntries { needed: 1, got: 0 });
    }
    check_unique(candidates)?;
    let sorted = rank_models(candidates);
    Ok(RankingReport {
        dataset: dataset.to_string(),
        setting,
        candidates: ranked(&sorted),
        pearson_rho: None,
        weighted_tau: None,
        prob_better: None,
        n_candidates: sorted.len(),
        meta: ReportMeta::default(),
    })
}

/// Full report: ranking plus ρ, τ_w and the probability of a better choice.
/// Statistics are computed over the ranked order, so the result does not
/// depend on the order candidates are supplied in.
pub fn evaluate_ranking(
    dataset: &str,
    setting: Setting,
    candidates: &[CandidateScore],
    variant: TauVariant,
) -> Result<RankingReport> {
    if candidates.len() < 2 {
        return Err(Error::TooFewEntries {
            needed: 2,
            got: candidates.len(),
        });
    }
    let missing: Vec<String> = candidates
        .iter()
        .filter(|c| c.performance.is_none())
        .map(|c| c.model_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPerformance(missing));
    }
    let mut report = ranking_only(dataset, setting, candidates)?;
    let scores: Vec<f64> = report.candidates.iter().map(|c| c.score).collect();
    let perf: Vec<f64> = report
        .candidates
        .iter()
        .map(|c| c.performance.unwrap())
        .collect();
    let tau = weighted_kendall_tau_with(&scores, &perf, variant)?;
    report.pearson_rho = Some(pearson(&scores, &perf)?);
    report.weighted_tau = Some(tau);
    report.prob_better = Some(prob_better(tau)?);
    report.meta.tau_variant = variant;
    Ok(report)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    model_id: String,
    score: f64,
    #[serde(default)]
    performance: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct PerformanceRow {
    model_id: String,
    performance: f64,
}

/// Reads `model_id,score[,performance]`.
pub fn read_scores_csv(path: &Path) -> Result<Vec<CandidateScore>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    reader
        .deserialize::<ScoreRow>()
        .map(|row| {
            let row = row?;
            Ok(CandidateScore::new(row.model_id, row.score, row.performance))
        })
        .collect()
}

/// Reads `model_id,performance`.
pub fn read_performance_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    reader
        .deserialize::<PerformanceRow>()
        .map(|row| {
            let row = row?;
            Ok((row.model_id, row.performance))
        })
        .collect()
}

/// Attaches performance numbers by model id, replacing any already present.
pub fn attach_performance(candidates: &mut [CandidateScore], perf: &[(String, f64)]) {
    for c in candidates.iter_mut() {
        if let Some((_, p)) = perf.iter().find(|(id, _)| *id == c.model_id) {
            c.performance = Some(*p);
        }
    }
}
