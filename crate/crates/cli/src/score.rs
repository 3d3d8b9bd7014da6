use std::path::Path;

use serde::{Deserialize, Serialize};

use logme_core::store::{read_csv_dataset, read_labels, read_manifest_labels, LabelKind};
use logme_core::{logme_score, read_feature_store, FeatureMatrix, SolverConfig, TargetVector};

use crate::args::ScoreArgs;
use crate::failure::{Failure, Outcome};
use crate::{require_input, Meta};

/// Output of scoring one feature store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_id: Option<String>,
    pub logme: f64,
    /// Per-class scores for classification, a single entry for regression.
    pub per_class: Vec<f64>,
    pub converged: bool,
    /// Largest iteration count over the per-class solves.
    pub iterations: usize,
    pub n: usize,
    pub h: usize,
    pub meta: Meta,
}

pub struct Dataset {
    pub features: FeatureMatrix,
    pub targets: TargetVector,
    pub model_id: Option<String>,
    pub dataset_id: Option<String>,
}

/// Loads features and labels from a store (labels from `labels` or the
/// manifest) or from a CSV file.
pub fn load(features: &Path, labels: Option<&Path>, kind: LabelKind) -> Result<Dataset, Failure> {
    require_input(features)?;
    if let Some(l) = labels {
        require_input(l)?;
    }
    if features.extension().is_some_and(|e| e == "csv") {
        let (f, t) = read_csv_dataset(features, kind)?;
        return Ok(Dataset {
            features: f,
            targets: t,
            model_id: None,
            dataset_id: None,
        });
    }
    let path = logme_core::store::resolve_features_path(features)?;
    let (f, manifest) = read_feature_store(&path)?;
    let targets = match labels {
        Some(l) => read_labels(l)?,
        None => read_manifest_labels(&path, &manifest)?.ok_or_else(|| {
            Failure::new(
                "MissingLabels",
                format!("{} names no label file; pass --labels", path.display()),
            )
        })?,
    };
    Ok(Dataset {
        features: f,
        targets,
        model_id: Some(manifest.model_id),
        dataset_id: Some(manifest.dataset_id),
    })
}

pub fn score(data: &Dataset, config: &SolverConfig) -> Result<ScoreReport, Failure> {
    let s = logme_score(&data.features, &data.targets, config)?;
    Ok(ScoreReport {
        model_id: data.model_id.clone(),
        dataset_id: data.dataset_id.clone(),
        logme: s.score,
        per_class: s.per_target.iter().map(|r| r.logme).collect(),
        converged: s.per_target.iter().all(|r| r.converged),
        iterations: s.per_target.iter().map(|r| r.iterations).max().unwrap_or(0),
        n: data.features.n_rows(),
        h: data.features.n_cols(),
        meta: Meta::now(),
    })
}

pub fn run(args: &ScoreArgs) -> Result<Outcome, Failure> {
    let config = args.solver.apply(SolverConfig::default());
    config.validate()?;
    let data = load(&args.features, args.labels.as_deref(), args.label_kind.into())?;
    let report = score(&data, &config)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(Outcome::Success)
}
