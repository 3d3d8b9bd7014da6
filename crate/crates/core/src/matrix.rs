use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};

/// Dense row-major matrix of instance features, one row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidShape(format!(
                "feature matrix must be non-empty, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                expected: n_rows * n_cols,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "features",
                index,
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::LengthMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, values)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::new(n_rows, n_cols, vec![0.0; n_rows * n_cols])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    /// `FᵀF` as a dense row-major `h x h` matrix.
    ///
    /// Computed in fixed 64-column panels of the upper triangle and mirrored.
    /// The GEMM kernel accumulates each entry over rows in a fixed blocked
    /// order, so the result does not depend on how panels are scheduled.
    pub fn gram(&self) -> Vec<f64> {
        const PANEL: usize = 64;
        let (n, h) = (self.n_rows, self.n_cols);
        let n_panels = h.div_ceil(PANEL);
        let panels = numeric::map_range(n_panels, |p| {
            let j0 = p * PANEL;
            let j1 = (j0 + PANEL).min(h);
            let width = j1 - j0;
            // rows 0..j1, columns j0..j1
            let mut block = vec![0.0; j1 * width];
            // SAFETY: all pointers/strides describe in-bounds views of
            // `self.values` (n x h, row-major) and `block` (j1 x width).
            unsafe {
                matrixmultiply::dgemm(
                    j1,
                    n,
                    width,
                    1.0,
                    self.values.as_ptr(),
                    1,
                    h as isize,
                    self.values.as_ptr().add(j0),
                    h as isize,
                    1,
                    0.0,
                    block.as_mut_ptr(),
                    width as isize,
                    1,
                );
            }
            block
        });

        let mut gram = vec![0.0; h * h];
        for (p, block) in panels.iter().enumerate() {
            let j0 = p * PANEL;
            let width = (j0 + PANEL).min(h) - j0;
            for i in 0..(j0 + width) {
                for dj in 0..width {
                    let j = j0 + dj;
                    if i <= j {
                        let v = block[i * width + dj];
                        gram[i * h + j] = v;
                        gram[j * h + i] = v;
                    }
                }
            }
        }
        gram
    }

    /// `FFᵀ` as a dense row-major `n x n` matrix.
    pub fn outer_gram(&self) -> Vec<f64> {
        let (n, h) = (self.n_rows, self.n_cols);
        let mut out = vec![0.0; n * n];
        // SAFETY: strides describe F (n x h row-major), Fᵀ, and out (n x n).
        unsafe {
            matrixmultiply::dgemm(
                n,
                h,
                n,
                1.0,
                self.values.as_ptr(),
                h as isize,
                1,
                self.values.as_ptr(),
                1,
                h as isize,
                0.0,
                out.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        // exact symmetry for the eigensolver
        for i in 0..n {
            for j in 0..i {
                out[i * n + j] = out[j * n + i];
            }
        }
        out
    }

    /// `Fᵀy` with compensated accumulation over rows.
    pub fn transpose_mul(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.n_rows);
        let mut acc = vec![CompensatedSum::new(); self.n_cols];
        for (row, &yr) in self.rows().zip(y) {
            if yr == 0.0 {
                continue;
            }
            for (a, &x) in acc.iter_mut().zip(row) {
                a.add(x * yr);
            }
        }
        acc.iter().map(CompensatedSum::value).collect()
    }

    /// `F v` for a length-`h` vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.rows().map(|row| numeric::dot(row, v)).collect()
    }
}

/// Per-instance targets.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetVector {
    Classes { labels: Vec<u32>, num_classes: usize },
    Scalars(Vec<f64>),
}

impl TargetVector {
    /// Class labels in `[0, num_classes)`; every class must occur.
    pub fn classes(labels: Vec<u32>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::SingleClass(num_classes));
        }
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            let slot = seen.get_mut(l as usize).ok_or(Error::ClassOutOfRange {
                class: l,
                num_classes,
            })?;
            *slot = true;
        }
        if let Some(class) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyClass { class, num_classes });
        }
        Ok(TargetVector::Classes {
            labels,
            num_classes,
        })
    }

    /// Class labels with `num_classes = max(label) + 1`.
    pub fn classes_inferred(labels: Vec<u32>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m as usize + 1);
        Self::classes(labels, k)
    }

    pub fn scalars(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "targets",
                index,
            });
        }
        Ok(TargetVector::Scalars(values))
    }

    pub fn len(&self) -> usize {
        match self {
            TargetVector::Classes { labels, .. } => labels.len(),
            TargetVector::Scalars(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Target columns to regress on: one 0/1 column per class, or the
    /// scalars themselves.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        match self {
            TargetVector::Classes {
                labels,
                num_classes,
            } => (0..*num_classes)
                .map(|c| {
                    labels
                        .iter()
                        .map(|&l| if l as usize == c { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect(),
            TargetVector::Scalars(v) => vec![v.clone()],
        }
    }
}
