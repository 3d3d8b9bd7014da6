//! Instance features from token-level embeddings.
//!
//! Classification tasks use one row per sequence (the [CLS] slot, or the mean
//! over content subwords); structured prediction uses one row per token,
//! averaging the subwords each token was split into.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{FeatureMatrix, TargetVector};
use crate::numeric::{self, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingStrategy {
    ClsToken,
    MeanSequence,
    MeanToken,
}

/// Subword embeddings of a corpus, concatenated sequence after sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEmbeddingStore {
    dim: usize,
    values: Vec<f64>,
    offsets: Vec<usize>,
    has_cls: bool,
    /// Per-subword flag for special tokens left out of means. Empty when
    /// nothing is excluded.
    excluded: Vec<bool>,
}

impl TokenEmbeddingStore {
    pub fn new(
        dim: usize,
        values: Vec<f64>,
        offsets: Vec<usize>,
        has_cls: bool,
        excluded: Vec<bool>,
    ) -> Result<Self> {
        if dim == 0 || values.is_empty() || values.len() % dim != 0 {
            return Err(Error::InvalidShape(format!(
                "{} values do not form rows of width {dim}",
                values.len()
            )));
        }
        let n_subwords = values.len() / dim;
        if offsets.first() != Some(&0) {
            return Err(Error::InvalidLayout("first sequence offset must be 0".into()));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLayout("sequence offsets must be strictly increasing".into()));
        }
        if *offsets.last().unwrap() >= n_subwords {
            return Err(Error::InvalidLayout(format!(
                "last sequence starts at {} but the store holds {n_subwords} subwords",
                offsets.last().unwrap()
            )));
        }
        if !excluded.is_empty() && excluded.len() != n_subwords {
            return Err(Error::LengthMismatch {
                expected: n_subwords,
                got: excluded.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "embeddings",
                index,
            });
        }
        Ok(Self {
            dim,
            values,
            offsets,
            has_cls,
            excluded,
        })
    }

    /// Builds a store from per-sequence subword embeddings.
    pub fn from_sequences(sequences: &[Vec<Vec<f64>>], has_cls: bool) -> Result<Self> {
        let dim = sequences
            .first()
            .and_then(|s| s.first())
            .map_or(0, Vec::len);
        let mut values = Vec::new();
        let mut offsets = Vec::with_capacity(sequences.len());
        let mut n = 0;
        for seq in sequences {
            offsets.push(n);
            for sub in seq {
                if sub.len() != dim {
                    return Err(Error::LengthMismatch {
                        expected: dim,
                        got: sub.len(),
                    });
                }
                values.extend_from_slice(sub);
                n += 1;
            }
        }
        Self::new(dim, values, offsets, has_cls, Vec::new())
    }

    pub fn with_excluded(mut self, excluded: Vec<bool>) -> Result<Self> {
        if excluded.len() != self.n_subwords() {
            return Err(Error::LengthMismatch {
                expected: self.n_subwords(),
                got: excluded.len(),
            });
        }
        self.excluded = excluded;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_subwords(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn n_sequences(&self) -> usize {
        self.offsets.len()
    }

    pub fn has_cls(&self) -> bool {
        self.has_cls
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Absolute subword positions of sequence `i`.
    pub fn sequence_range(&self, i: usize) -> Range<usize> {
        let end = self
            .offsets
            .get(i + 1)
            .copied()
            .unwrap_or_else(|| self.n_subwords());
        self.offsets[i]..end
    }

    pub fn subword(&self, pos: usize) -> &[f64] {
        &self.values[pos * self.dim..(pos + 1) * self.dim]
    }

    fn is_excluded(&self, pos: usize) -> bool {
        self.excluded.get(pos).copied().unwrap_or(false)
    }

    fn mean_of(&self, positions: impl Iterator<Item = usize>) -> Option<Vec<f64>> {
        let mut acc = vec![CompensatedSum::new(); self.dim];
        let mut count = 0usize;
        for pos in positions {
            for (a, &x) in acc.iter_mut().zip(self.subword(pos)) {
                a.add(x);
            }
            count += 1;
        }
        (count > 0).then(|| acc.iter().map(|a| a.value() / count as f64).collect())
    }
}

fn rows_to_matrix(rows: Vec<Vec<f64>>, dim: usize) -> Result<FeatureMatrix> {
    let n = rows.len();
    FeatureMatrix::new(n, dim, rows.concat())
}

/// One row per sequence: the embedding in the sequence's first slot.
pub fn pool_cls(store: &TokenEmbeddingStore) -> Result<FeatureMatrix> {
    if !store.has_cls {
        return Err(Error::MissingClsSlot);
    }
    let rows = numeric::map_range(store.n_sequences(), |i| {
        store.subword(store.offsets[i]).to_vec()
    });
    rows_to_matrix(rows, store.dim)
}

/// One row per sequence: the mean of its subword embeddings. The [CLS] slot
/// is skipped unless `include_cls` is set; excluded special tokens are
/// always skipped.
pub fn pool_mean_sequence(store: &TokenEmbeddingStore, include_cls: bool) -> Result<FeatureMatrix> {
    let skip_first = store.has_cls && !include_cls;
    let rows = numeric::map_range(store.n_sequences(), |i| {
        let range = store.sequence_range(i);
        let first = range.start;
        store
            .mean_of(range.filter(|&p| {
                if p == first && store.has_cls {
                    !skip_first
                } else {
                    !store.is_excluded(p)
                }
            }))
            .ok_or(Error::EmptyAfterExclusion { sequence: i })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    rows_to_matrix(rows, store.dim)
}

/// Subword spans of each word/token, with one label per token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordAlignment {
    /// Size of the label vocabulary; inferred from the labels when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_classes: Option<usize>,
    pub sequences: Vec<SequenceAlignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceAlignment {
    /// `[start, end)` positions relative to the sequence start.
    pub spans: Vec<[usize; 2]>,
    pub labels: Vec<u32>,
}

impl SubwordAlignment {
    pub fn n_tokens(&self) -> usize {
        self.sequences.iter().map(|s| s.spans.len()).sum()
    }

    pub fn validate(&self, store: &TokenEmbeddingStore) -> Result<()> {
        if self.sequences.len() != store.n_sequences() {
            return Err(Error::InvalidLayout(format!(
                "alignment covers {} sequences, store has {}",
                self.sequences.len(),
                store.n_sequences()
            )));
        }
        let first_allowed = usize::from(store.has_cls);
        for (i, seq) in self.sequences.iter().enumerate() {
            if seq.spans.len() != seq.labels.len() {
                return Err(Error::LabelCountMismatch {
                    sequence: i,
                    spans: seq.spans.len(),
                    labels: seq.labels.len(),
                });
            }
            let len = store.sequence_range(i).len();
            let mut floor = first_allowed;
            for &[start, end] in &seq.spans {
                if start < floor || end <= start || end > len {
                    return Err(Error::SpanOutOfBounds {
                        sequence: i,
                        start,
                        end,
                        len,
                    });
                }
                floor = end;
            }
        }
        Ok(())
    }
}

/// One row per token, averaging the token's subwords; rows follow
/// (sequence, token) order and come with the aligned labels.
pub fn pool_mean_token(
    store: &TokenEmbeddingStore,
    alignment: &SubwordAlignment,
) -> Result<(FeatureMatrix, TargetVector)> {
    alignment.validate(store)?;
    let per_sequence = numeric::map_slice(
        &alignment.sequences.iter().enumerate().collect::<Vec<_>>(),
        |&(i, seq)| {
            let base = store.offsets[i];
            seq.spans
                .iter()
                .map(|&[s, e]| {
                    store
                        .mean_of(base + s..base + e)
                        .expect("validated spans are non-empty")
                })
                .collect::<Vec<_>>()
        },
    );
    let rows: Vec<Vec<f64>> = per_sequence.into_iter().flatten().collect();
    let labels: Vec<u32> = alignment
        .sequences
        .iter()
        .flat_map(|s| s.labels.iter().copied())
        .collect();
    let targets = match alignment.num_classes {
        Some(k) => TargetVector::classes(labels, k)?,
        None => TargetVector::classes_inferred(labels)?,
    };
    Ok((rows_to_matrix(rows, store.dim)?, targets))
}
