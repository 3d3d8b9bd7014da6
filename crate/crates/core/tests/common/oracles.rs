//! Reference implementations that share no code path with the library.

use nalgebra::{DMatrix, DVector};

use logme_core::evidence::{log_evidence, SpectralDecomposition};
use logme_core::FeatureMatrix;

fn to_dmatrix(f: &FeatureMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(f.n_rows(), f.n_cols(), f.values())
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Returns
/// eigenvalues descending with matching eigenvectors as columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-26 * a.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Squared singular values and `|u_iᵀy|` via Jacobi on `FᵀF`.
pub fn spectral_oracle(f: &FeatureMatrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let fm = to_dmatrix(f);
    let (vals, vecs) = jacobi_eigen(&(fm.transpose() * &fm));
    let yv = DVector::from_column_slice(y);
    let z = (0..vals.len())
        .map(|i| {
            let u = &fm * vecs.column(i) / vals[i].sqrt();
            u.dot(&yv).abs()
        })
        .collect();
    (vals, z)
}

/// Log-evidence from the explicit matrices `A = αI + βFᵀF`,
/// `m = βA⁻¹Fᵀy`. Returns `(L, ‖m‖², ‖Fm − y‖²)`.
pub fn dense_log_evidence(f: &FeatureMatrix, y: &[f64], alpha: f64, beta: f64) -> (f64, f64, f64) {
    let (n, h) = (f.n_rows() as f64, f.n_cols());
    let fm = to_dmatrix(f);
    let yv = DVector::from_column_slice(y);
    let a = DMatrix::<f64>::identity(h, h) * alpha + (fm.transpose() * &fm) * beta;
    let lu = a.clone().lu();
    let m = lu.solve(&(fm.transpose() * &yv * beta)).unwrap();
    let resid = (&fm * &m - &yv).norm_squared();
    let m_sq = m.norm_squared();
    let log_det = lu.determinant().ln();
    let l = 0.5 * n * beta.ln() + 0.5 * h as f64 * alpha.ln()
        - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * beta * resid
        - 0.5 * alpha * m_sq
        - 0.5 * log_det;
    (l, m_sq, resid)
}

#[derive(Debug, Clone, Copy)]
pub struct GridOptimum {
    pub ln_alpha: f64,
    pub ln_beta: f64,
    pub log_evidence: f64,
    /// The coarse argmax sat on the edge of the search box.
    pub on_boundary: bool,
}

/// Two-stage grid search of the log-evidence over `(ln α, ln β)`: a coarse
/// 200 x 200 grid on `[-10, 10]²`, then repeated 21 x 21 zooms.
pub fn grid_optimum(d: &SpectralDecomposition) -> GridOptimum {
    let eval = |la: f64, lb: f64| log_evidence(d, la.exp(), lb.exp()).unwrap().log_evidence;
    let steps = 200;
    let step = 20.0 / (steps - 1) as f64;
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for i in 0..steps {
        for j in 0..steps {
            let l = eval(-10.0 + i as f64 * step, -10.0 + j as f64 * step);
            if l > best.2 {
                best = (i, j, l);
            }
        }
    }
    let on_boundary = best.0 == 0 || best.1 == 0 || best.0 == steps - 1 || best.1 == steps - 1;
    let (mut ca, mut cb, mut cl) = (
        -10.0 + best.0 as f64 * step,
        -10.0 + best.1 as f64 * step,
        best.2,
    );
    let mut span = step;
    for _ in 0..8 {
        let (mut ba, mut bb) = (ca, cb);
        for i in 0..=20 {
            for j in 0..=20 {
                let la = ca - span + i as f64 * span / 10.0;
                let lb = cb - span + j as f64 * span / 10.0;
                let l = eval(la, lb);
                if l > cl {
                    (ba, bb, cl) = (la, lb, l);
                }
            }
        }
        (ca, cb) = (ba, bb);
        span /= 10.0;
    }
    GridOptimum {
        ln_alpha: ca,
        ln_beta: cb,
        log_evidence: cl,
        on_boundary,
    }
}

/// Product-moment correlation by the textbook two-pass formula.
pub fn pearson_textbook(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Weighted τ by enumerating ordered pairs `(i, j), i != j` under a given
/// ranking (each unordered pair counted twice).
fn tau_for_ranking(x: &[f64], y: &[f64], order: &[usize]) -> f64 {
    let n = x.len();
    let mut pos = vec![0usize; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = 1.0 / (pos[i] as f64 + 1.0) + 1.0 / (pos[j] as f64 + 1.0);
            let c = (x[i] - x[j]) * (y[i] - y[j]);
            num += w * if c > 0.0 { 1.0 } else if c < 0.0 { -1.0 } else { 0.0 };
            den += w;
        }
    }
    num / den
}

fn decreasing_order(a: &[f64], b: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| {
        (a[j], b[j])
            .partial_cmp(&(a[i], b[i]))
            .unwrap()
            .then(i.cmp(&j))
    });
    idx
}

/// Symmetric additive-hyperbolic weighted τ.
pub fn weighted_tau_enumerated(x: &[f64], y: &[f64]) -> f64 {
    0.5 * (tau_for_ranking(x, y, &decreasing_order(x, y))
        + tau_for_ranking(x, y, &decreasing_order(y, x)))
}
