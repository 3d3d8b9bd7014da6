use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use logme_core::rank::{ranking_only, RankingReport};
use logme_core::{evaluate_ranking, CandidateScore, Setting, SolverConfig, TauVariant};

use crate::args::{LabelKindArg, RankArgs};
use crate::failure::{Failure, Outcome};
use crate::score::{self, ScoreReport};
use crate::{require_input, write_json, Meta};

/// Jobs file for `rank`. Paths are relative to the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobsFile {
    pub dataset: String,
    #[serde(default)]
    pub setting: Setting,
    #[serde(default)]
    pub tau_variant: TauVariant,
    #[serde(default)]
    pub solver: SolverOverrides,
    pub models: Vec<ModelJob>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJob {
    pub model_id: String,
    pub features: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Observed task performance, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub performance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFailure {
    pub model_id: String,
    #[serde(flatten)]
    pub failure: Failure,
}

/// Ranking report plus the models that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOutput {
    #[serde(flatten)]
    pub report: RankingReport,
    pub failures: Vec<ModelFailure>,
}

/// File name for a model's score JSON; hub ids contain '/'.
pub fn score_file_name(model_id: &str) -> String {
    let safe: String = model_id
        .chars()
        .map(|c| match c {
            '/' => '~',
            c if c.is_ascii_alphanumeric() || "-_.".contains(c) => c,
            _ => '_',
        })
        .collect();
    format!("{safe}.score.json")
}

fn score_model(base: &Path, job: &ModelJob, config: &SolverConfig) -> Result<ScoreReport, Failure> {
    let labels = job.labels.as_ref().map(|l| base.join(l));
    let kind = LabelKindArg::Classes.into();
    let data = score::load(&base.join(&job.features), labels.as_deref(), kind)?;
    let mut report = score::score(&data, config)?;
    report.model_id = Some(job.model_id.clone());
    Ok(report)
}

fn score_all(base: &Path, jobs: &[ModelJob], config: &SolverConfig) -> Vec<Result<ScoreReport, Failure>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(|j| score_model(base, j, config)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(|j| score_model(base, j, config)).collect()
    }
}

fn check_unique_ids(jobs: &[ModelJob]) -> Result<(), Failure> {
    let mut names: Vec<String> = jobs.iter().map(|j| score_file_name(&j.model_id)).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Failure::new(
            "DuplicateModel",
            format!("two models map to the output file {}", w[0]),
        ));
    }
    Ok(())
}

pub fn run(args: &RankArgs) -> Result<Outcome, Failure> {
    require_input(&args.manifest)?;
    let jobs: JobsFile = serde_json::from_slice(&fs::read(&args.manifest)?)?;
    if jobs.models.is_empty() {
        return Err(Failure::new("TooFewEntries", "the jobs file lists no models"));
    }
    check_unique_ids(&jobs.models)?;
    let mut config = SolverConfig::default();
    config.tol = jobs.solver.tol.unwrap_or(config.tol);
    config.max_iter = jobs.solver.max_iter.unwrap_or(config.max_iter);
    let config = args.solver.apply(config);
    config.validate()?;

    let base = args.manifest.parent().unwrap_or(Path::new(""));
    let results = score_all(base, &jobs.models, &config);

    fs::create_dir_all(&args.out)?;
    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for (job, result) in jobs.models.iter().zip(results) {
        match result {
            Ok(report) => {
                write_json(&args.out.join(score_file_name(&job.model_id)), &report)?;
                candidates.push(CandidateScore::new(&job.model_id, report.logme, job.performance));
            }
            Err(failure) => failures.push(ModelFailure {
                model_id: job.model_id.clone(),
                failure,
            }),
        }
    }
    for f in &failures {
        eprintln!("{}", serde_json::to_string(f)?);
    }
    if candidates.is_empty() {
        return Err(Failure::new(
            "AllModelsFailed",
            format!("none of the {} models could be scored", jobs.models.len()),
        ));
    }

    let with_stats = candidates.len() >= 2 && candidates.iter().all(|c| c.performance.is_some());
    let mut report = if with_stats {
        evaluate_ranking(&jobs.dataset, jobs.setting, &candidates, jobs.tau_variant)?
    } else {
        ranking_only(&jobs.dataset, jobs.setting, &candidates)?
    };
    report.meta.tau_variant = jobs.tau_variant;
    report.meta.timestamp = Meta::now().timestamp;
    let output = RankOutput { report, failures };
    write_json(&args.out.join("report.json"), &output)?;

    for c in &output.report.candidates {
        println!("{:>3}  {:<40} {:.4}", c.rank, c.model_id, c.score);
    }
    if output.failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}
