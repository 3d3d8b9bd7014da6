use logme_core::rank::{attach_performance, read_performance_csv, read_scores_csv, RankingReport, Setting};
use logme_core::evaluate_ranking;

use crate::args::CorrelateArgs;
use crate::failure::{Failure, Outcome};
use crate::{require_input, write_json, Meta};

pub fn report(args: &CorrelateArgs) -> Result<RankingReport, Failure> {
    require_input(&args.scores)?;
    if let Some(p) = &args.perf {
        require_input(p)?;
    }
    let mut candidates = read_scores_csv(&args.scores)?;
    if let Some(perf) = &args.perf {
        attach_performance(&mut candidates, &read_performance_csv(perf)?);
    }
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.scores
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let setting = Setting {
        tuning: args.tuning.into(),
        repr: args.repr.into(),
    };
    Ok(evaluate_ranking(&dataset, setting, &candidates, args.tau_variant.into())?)
}

pub fn run(args: &CorrelateArgs) -> Result<Outcome, Failure> {
    let mut report = report(args)?;
    report.meta.timestamp = Meta::now().timestamp;
    write_json(&args.out, &report)?;
    println!(
        "{}: rho = {:.3}, tau_w = {:.3}, prob_better = {:.3} over {} models",
        report.dataset,
        report.pearson_rho.unwrap_or(f64::NAN),
        report.weighted_tau.unwrap_or(f64::NAN),
        report.prob_better.unwrap_or(f64::NAN),
        report.n_candidates
    );
    Ok(Outcome::Success)
}
