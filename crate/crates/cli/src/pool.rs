use std::path::Path;

use logme_core::store::{
    labels_path, read_alignment, read_manifest_labels, read_token_store, write_labels, Granularity,
};
use logme_core::{
    pool_cls, pool_mean_sequence, pool_mean_token, write_feature_store, Error, FeatureMatrix,
    PoolingStrategy, StoreManifest, TargetVector,
};

use crate::args::PoolArgs;
use crate::failure::{Failure, Outcome};
use crate::require_input;

pub fn run(args: &PoolArgs) -> Result<Outcome, Failure> {
    if args.out.extension().is_some_and(|e| e == "json" || e == "lglb") {
        return Err(Failure::new(
            "InvalidArgument",
            "--out names the feature file; its manifest and labels are written next to it",
        ));
    }
    require_input(&args.input)?;
    if let Some(a) = &args.alignment {
        require_input(a)?;
    }
    let input = logme_core::store::resolve_features_path(&args.input)?;
    let (store, manifest) = read_token_store(&input)?;
    let strategy = PoolingStrategy::from(args.strategy);

    let (features, labels) = match strategy {
        PoolingStrategy::ClsToken => (pool_cls(&store)?, sequence_labels(&input, &manifest)?),
        PoolingStrategy::MeanSequence => (
            pool_mean_sequence(&store, args.include_cls)?,
            sequence_labels(&input, &manifest)?,
        ),
        PoolingStrategy::MeanToken => {
            let path = args.alignment.as_deref().ok_or_else(|| {
                Failure::new("MissingAlignment", "mean-token pooling needs --alignment")
            })?;
            let (f, t) = pool_mean_token(&store, &read_alignment(path)?)?;
            (f, Some(t))
        }
    };
    check_rows(&features, labels.as_ref())?;

    let mut out = manifest.clone();
    out.pooling = strategy.into();
    out.granularity = match strategy {
        PoolingStrategy::MeanToken => Granularity::Token,
        _ => Granularity::Sequence,
    };
    out.layout_path = None;
    out.checksum = None;
    out.labels_path = None;
    if let Some(d) = args.dtype {
        out.dtype = d.into();
    }
    if strategy == PoolingStrategy::MeanSequence {
        out.extra.insert("include_cls".into(), args.include_cls.into());
        let n_excluded = store.excluded().iter().filter(|&&e| e).count();
        out.extra.insert("excluded_subwords".into(), n_excluded.into());
    }
    if let Some(t) = &labels {
        let lpath = labels_path(&args.out);
        write_labels(&lpath, t)?;
        out.labels_path = lpath.file_name().map(|n| n.to_string_lossy().into_owned());
    }
    let written = write_feature_store(&args.out, &features, &out)?;
    println!(
        "pooled {} x {} ({:?}) into {}",
        written.n_rows,
        written.n_cols,
        strategy,
        args.out.display()
    );
    Ok(Outcome::Success)
}

fn sequence_labels(input: &Path, manifest: &StoreManifest) -> Result<Option<TargetVector>, Failure> {
    Ok(read_manifest_labels(input, manifest)?)
}

fn check_rows(features: &FeatureMatrix, labels: Option<&TargetVector>) -> Result<(), Failure> {
    match labels {
        Some(t) if t.len() != features.n_rows() => Err(Error::LengthMismatch {
            expected: features.n_rows(),
            got: t.len(),
        }
        .into()),
        _ => Ok(()),
    }
}
