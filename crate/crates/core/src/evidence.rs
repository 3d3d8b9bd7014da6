//! Maximum log-evidence of a Bayesian linear model from features to targets.
//!
//! The model is `y = Fw + ε` with an isotropic prior `w ~ N(0, α⁻¹I)` and
//! noise `ε ~ N(0, β⁻¹I)`. One eigendecomposition of `FᵀF` (or `FFᵀ` when
//! there are fewer rows than columns) reduces every evidence evaluation to
//! `O(min(n, h))`, and the MacKay fixed-point updates for `(α, β)` run on
//! those cached spectra.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{FeatureMatrix, TargetVector};
use crate::numeric::{self, CompensatedSum};

/// Eigenvalues below `SPECTRAL_EPS * max` are treated as exactly zero.
pub const SPECTRAL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when the relative change of the log-evidence drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Upper bound for α and β; the lower bound is its reciprocal.
    pub precision_clamp: f64,
    /// Floor for `‖m‖²` and the residual in update denominators.
    pub min_variance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 100,
            precision_clamp: 1e12,
            min_variance: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.precision_clamp > 1.0 && self.precision_clamp.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "precision_clamp must be > 1, got {}",
                self.precision_clamp
            )));
        }
        if !(self.min_variance > 0.0 && self.min_variance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "min_variance must be > 0, got {}",
                self.min_variance
            )));
        }
        Ok(())
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(1.0 / self.precision_clamp, self.precision_clamp)
    }
}

/// Spectrum of `F` plus the projections of one target column onto its left
/// singular vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Squared singular values, descending, length `min(n, h)`.
    pub sigma: Vec<f64>,
    /// `z_i = u_iᵀ y`; zero wherever `sigma_i` is zero.
    pub z: Vec<f64>,
    /// `‖y‖² − ‖z‖²`, clamped at zero.
    pub residual_energy: f64,
    pub n: usize,
    pub h: usize,
}

/// Terms of the log-evidence at a fixed `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvidenceTerms {
    pub log_evidence: f64,
    /// `‖m‖²` of the posterior mean weights.
    pub m_norm_sq: f64,
    /// `‖Fm − y‖²`.
    pub residual_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceResult {
    pub alpha: f64,
    pub beta: f64,
    pub m_norm_sq: f64,
    pub residual_sq: f64,
    pub log_evidence: f64,
    pub logme: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogmeScore {
    pub score: f64,
    pub per_target: Vec<EvidenceResult>,
}

#[derive(Debug, Clone)]
enum Basis {
    /// Right singular vectors `v_i` (length h); `z_i = v_iᵀFᵀy / √σ_i`.
    Right(Vec<Vec<f64>>),
    /// Left singular vectors `u_i` (length n); `z_i = u_iᵀy`.
    Left(Vec<Vec<f64>>),
}

/// Target-independent part of the decomposition, shared by all columns.
#[derive(Debug, Clone)]
pub struct FeatureSpectrum {
    n: usize,
    h: usize,
    sigma: Vec<f64>,
    basis: Basis,
}

impl FeatureSpectrum {
    pub fn compute(features: &FeatureMatrix) -> Self {
        let (n, h) = (features.n_rows(), features.n_cols());
        let (dim, gram) = if n >= h {
            (h, features.gram())
        } else {
            (n, features.outer_gram())
        };
        let eig = DMatrix::from_row_slice(dim, dim, &gram).symmetric_eigen();

        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .total_cmp(&eig.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let max = eig.eigenvalues[order[0]].max(0.0);
        let sigma: Vec<f64> = order
            .iter()
            .map(|&i| {
                let s = eig.eigenvalues[i];
                if s <= SPECTRAL_EPS * max {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        let vectors = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        let basis = if n >= h {
            Basis::Right(vectors)
        } else {
            Basis::Left(vectors)
        };
        Self { n, h, sigma, basis }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.sigma.iter().filter(|&&s| s > 0.0).count()
    }

    /// Projects one target column. `features` must be the matrix this
    /// spectrum was computed from.
    pub fn project(&self, features: &FeatureMatrix, y: &[f64]) -> SpectralDecomposition {
        debug_assert_eq!(y.len(), self.n);
        let z: Vec<f64> = match &self.basis {
            Basis::Right(v) => {
                let fty = features.transpose_mul(y);
                v.iter()
                    .zip(&self.sigma)
                    .map(|(vi, &s)| {
                        if s > 0.0 {
                            numeric::dot(vi, &fty) / s.sqrt()
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            Basis::Left(u) => u
                .iter()
                .zip(&self.sigma)
                .map(|(ui, &s)| if s > 0.0 { numeric::dot(ui, y) } else { 0.0 })
                .collect(),
        };
        let y_sq = numeric::norm_sq(y);
        let z_sq = numeric::norm_sq(&z);
        // round-off can push this slightly below zero
        let residual_energy = (y_sq - z_sq).max(0.0);
        SpectralDecomposition {
            sigma: self.sigma.clone(),
            z,
            residual_energy,
            n: self.n,
            h: self.h,
        }
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// Decomposes `F` and projects a single target column.
pub fn spectral_decompose(features: &FeatureMatrix, y: &[f64]) -> Result<SpectralDecomposition> {
    if y.len() != features.n_rows() {
        return Err(Error::LengthMismatch {
            expected: features.n_rows(),
            got: y.len(),
        });
    }
    check_finite(y, "targets")?;
    Ok(FeatureSpectrum::compute(features).project(features, y))
}

/// Closed-form log-evidence `ln p(y | F, α, β)`.
pub fn log_evidence(decomp: &SpectralDecomposition, alpha: f64, beta: f64) -> Result<EvidenceTerms> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::NonPositivePrecision { alpha, beta });
    }
    Ok(evidence_terms(decomp, alpha, beta))
}

fn evidence_terms(d: &SpectralDecomposition, alpha: f64, beta: f64) -> EvidenceTerms {
    let n = d.n as f64;
    let h = d.h as f64;
    let mut m_sq = CompensatedSum::new();
    let mut res_sq = CompensatedSum::new();
    let mut log_det = CompensatedSum::new();
    for (&s, &z) in d.sigma.iter().zip(&d.z) {
        let denom = alpha + beta * s;
        let zz = z * z;
        m_sq.add(beta * beta * s * zz / (denom * denom));
        res_sq.add(alpha * alpha * zz / (denom * denom));
        log_det.add(denom.ln());
    }
    res_sq.add(d.residual_energy);
    // directions with zero singular value contribute ln α each
    let tail = d.h.saturating_sub(d.sigma.len());
    log_det.add(tail as f64 * alpha.ln());

    let m_norm_sq = m_sq.value();
    let residual_sq = res_sq.value();
    let mut total = CompensatedSum::new();
    total.extend([
        0.5 * n * beta.ln(),
        0.5 * h * alpha.ln(),
        -0.5 * n * (2.0 * PI).ln(),
        -0.5 * beta * residual_sq,
        -0.5 * alpha * m_norm_sq,
        -0.5 * log_det.value(),
    ]);
    EvidenceTerms {
        log_evidence: total.value(),
        m_norm_sq,
        residual_sq,
    }
}

/// Fixed-point evidence maximization starting from `α = β = 1`.
pub fn maximize_evidence(decomp: &SpectralDecomposition, cfg: &SolverConfig) -> Result<EvidenceResult> {
    maximize_evidence_traced(decomp, cfg).map(|(r, _)| r)
}

/// Like [`maximize_evidence`], also returning the log-evidence of every
/// visited iterate (the starting point first).
pub fn maximize_evidence_traced(
    decomp: &SpectralDecomposition,
    cfg: &SolverConfig,
) -> Result<(EvidenceResult, Vec<f64>)> {
    cfg.validate()?;
    if decomp.n < 2 {
        return Err(Error::InvalidShape(format!(
            "evidence needs at least 2 instances, got {}",
            decomp.n
        )));
    }
    let n = decomp.n as f64;
    let (mut alpha, mut beta) = (1.0, 1.0);
    let mut current = evidence_terms(decomp, alpha, beta);
    let mut best = (alpha, beta, current);
    let mut trace = vec![current.log_evidence];
    let mut iterations = 0;
    let mut settled = false;

    while iterations < cfg.max_iter {
        let gamma = numeric::sum(
            decomp
                .sigma
                .iter()
                .map(|&s| beta * s / (alpha + beta * s)),
        );
        alpha = cfg.clamp(gamma / current.m_norm_sq.max(cfg.min_variance));
        beta = cfg.clamp((n - gamma) / current.residual_sq.max(cfg.min_variance));
        iterations += 1;

        let next = evidence_terms(decomp, alpha, beta);
        let change =
            (next.log_evidence - current.log_evidence).abs() / next.log_evidence.abs().max(1.0);
        current = next;
        trace.push(current.log_evidence);
        if current.log_evidence > best.2.log_evidence {
            best = (alpha, beta, current);
        }
        if change < cfg.tol {
            settled = true;
            break;
        }
    }

    let (alpha, beta, terms) = best;
    let at_bound = |x: f64| x >= cfg.precision_clamp || x <= 1.0 / cfg.precision_clamp;
    let result = EvidenceResult {
        alpha,
        beta,
        m_norm_sq: terms.m_norm_sq,
        residual_sq: terms.residual_sq,
        log_evidence: terms.log_evidence,
        logme: terms.log_evidence / n,
        iterations,
        converged: settled && !at_bound(alpha) && !at_bound(beta),
    };
    Ok((result, trace))
}

/// LogME of `features` for `targets`: the per-instance maximum log-evidence,
/// averaged over one-hot columns for class targets.
pub fn logme_score(
    features: &FeatureMatrix,
    targets: &TargetVector,
    cfg: &SolverConfig,
) -> Result<LogmeScore> {
    cfg.validate()?;
    if targets.len() != features.n_rows() {
        return Err(Error::LengthMismatch {
            expected: features.n_rows(),
            got: targets.len(),
        });
    }
    if features.n_rows() < 2 {
        return Err(Error::InvalidShape(format!(
            "scoring needs at least 2 instances, got {}",
            features.n_rows()
        )));
    }
    let columns = match targets {
        TargetVector::Classes { num_classes, .. } if *num_classes < 2 => {
            return Err(Error::SingleClass(*num_classes))
        }
        TargetVector::Scalars(v) => {
            check_finite(v, "targets")?;
            targets.columns()
        }
        TargetVector::Classes { .. } => targets.columns(),
    };

    let spectrum = FeatureSpectrum::compute(features);
    let per_target = numeric::map_slice(&columns, |y| {
        maximize_evidence(&spectrum.project(features, y), cfg)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let logmes: Vec<f64> = per_target.iter().map(|r| r.logme).collect();
    Ok(LogmeScore {
        score: numeric::mean(&logmes),
        per_target,
    })
}
