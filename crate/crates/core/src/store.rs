//! Binary interchange files and their JSON manifests.
//!
//! Feature file (little-endian):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `LGFS`                   |
//! | 4      | 2    | version (1)                    |
//! | 6      | 1    | dtype (0 = f32, 1 = f64)       |
//! | 7      | 1    | has_cls                        |
//! | 8      | 8    | n_rows                         |
//! | 16     | 8    | n_cols                         |
//! | 24     | 40   | reserved, zero                 |
//! | 64     | ...  | row-major values               |
//!
//! Label file: magic `LGLB`, version u16, kind u8 (0 = class u32,
//! 1 = scalar f64), reserved u8, num_classes u32, n u64, then the payload.
//!
//! Every binary file is paired with a JSON document: a [`StoreManifest`]
//! next to each feature file (`<stem>.json`), a [`SequenceLayout`] for
//! token-level stores, and a [`SubwordAlignment`] for token tasks.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{FeatureMatrix, TargetVector};
use crate::pooling::{PoolingStrategy, SubwordAlignment, TokenEmbeddingStore};

pub const FEATURE_MAGIC: &[u8; 4] = b"LGFS";
pub const LABEL_MAGIC: &[u8; 4] = b"LGLB";
pub const FORMAT_VERSION: u16 = 1;
pub const FEATURE_HEADER_LEN: usize = 64;
pub const LABEL_HEADER_LEN: usize = 20;
/// Upper bound on `rows x columns` accepted from CSV input.
pub const CSV_MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn tag(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            t => Err(Error::UnsupportedDtype(t)),
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Raw,
    ClsToken,
    MeanSequence,
    MeanToken,
}

impl From<PoolingStrategy> for Pooling {
    fn from(p: PoolingStrategy) -> Self {
        match p {
            PoolingStrategy::ClsToken => Pooling::ClsToken,
            PoolingStrategy::MeanSequence => Pooling::MeanSequence,
            PoolingStrategy::MeanToken => Pooling::MeanToken,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Sequence,
    Token,
}

/// Metadata document stored next to every feature file. Paths are relative
/// to the manifest's directory. Keys this crate does not know about are
/// kept in `extra` and written back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub model_id: String,
    pub dataset_id: String,
    pub pooling: Pooling,
    pub granularity: Granularity,
    pub has_cls: bool,
    #[serde(default)]
    pub pair_packed: bool,
    #[serde(default)]
    pub features_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout_path: Option<String>,
    pub dtype: Dtype,
    #[serde(default)]
    pub n_rows: u64,
    #[serde(default)]
    pub n_cols: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sequences: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl StoreManifest {
    pub fn new(
        model_id: impl Into<String>,
        dataset_id: impl Into<String>,
        pooling: Pooling,
        granularity: Granularity,
        has_cls: bool,
    ) -> Self {
        Self {
            model_id: model_id.into(),
            dataset_id: dataset_id.into(),
            pooling,
            granularity,
            has_cls,
            pair_packed: false,
            features_path: String::new(),
            labels_path: None,
            layout_path: None,
            dtype: Dtype::F64,
            n_rows: 0,
            n_cols: 0,
            n_sequences: None,
            checksum: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(path, bytes)?;
        Ok(())
    }
}

/// Offsets (and special-token positions) of a token-level store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceLayout {
    pub offsets: Vec<usize>,
    /// Absolute subword positions excluded from sequence means.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureHeader {
    pub dtype: Dtype,
    pub has_cls: bool,
    pub n_rows: u64,
    pub n_cols: u64,
}

/// Path of the manifest that accompanies a feature file.
pub fn manifest_path(features: &Path) -> PathBuf {
    features.with_extension("json")
}

/// Accepts either a feature file or its manifest and returns the feature
/// file path.
pub fn resolve_features_path(path: &Path) -> Result<PathBuf> {
    if path.extension().is_some_and(|e| e == "json") {
        let manifest = StoreManifest::read(path)?;
        Ok(sibling(path, &manifest.features_path))
    } else {
        Ok(path.to_path_buf())
    }
}

fn sibling(anchor: &Path, name: &str) -> PathBuf {
    anchor.parent().unwrap_or(Path::new("")).join(name)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn checksum_hex(payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn encode_features(matrix: &FeatureMatrix, dtype: Dtype, has_cls: bool) -> Vec<u8> {
    let payload = matrix.values().len() * dtype.width();
    let mut buf = Vec::with_capacity(FEATURE_HEADER_LEN + payload);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(dtype.tag());
    buf.push(has_cls as u8);
    buf.extend_from_slice(&(matrix.n_rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(matrix.n_cols() as u64).to_le_bytes());
    buf.resize(FEATURE_HEADER_LEN, 0);
    match dtype {
        Dtype::F32 => {
            for &v in matrix.values() {
                buf.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        Dtype::F64 => {
            for &v in matrix.values() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    buf
}

fn le_u16(b: &[u8]) -> u16 {
    u16::from_le_bytes(b[..2].try_into().unwrap())
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b[..4].try_into().unwrap())
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b[..8].try_into().unwrap())
}

fn expect_len(bytes: &[u8], expected: u64) -> Result<()> {
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::TruncatedFile { expected, found });
    }
    if found > expected {
        return Err(Error::InvalidShape(format!(
            "{} trailing bytes after payload",
            found - expected
        )));
    }
    Ok(())
}

pub fn parse_feature_header(bytes: &[u8]) -> Result<FeatureHeader> {
    if bytes.len() < 4 || &bytes[..4] != FEATURE_MAGIC {
        return Err(Error::BadMagic { expected: "LGFS" });
    }
    if bytes.len() < FEATURE_HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: FEATURE_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = le_u16(&bytes[4..]);
    if version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    Ok(FeatureHeader {
        dtype: Dtype::from_tag(bytes[6])?,
        has_cls: bytes[7] != 0,
        n_rows: le_u64(&bytes[8..]),
        n_cols: le_u64(&bytes[16..]),
    })
}

/// Parses a complete feature file. `f32` payloads are widened exactly.
pub fn decode_features(bytes: &[u8]) -> Result<(FeatureMatrix, FeatureHeader)> {
    let header = parse_feature_header(bytes)?;
    let cells = header
        .n_rows
        .checked_mul(header.n_cols)
        .ok_or_else(|| Error::InvalidShape("row x column count overflows".into()))?;
    let width = header.dtype.width() as u64;
    expect_len(bytes, FEATURE_HEADER_LEN as u64 + cells * width)?;
    let payload = &bytes[FEATURE_HEADER_LEN..];
    let values: Vec<f64> = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    let matrix = FeatureMatrix::new(header.n_rows as usize, header.n_cols as usize, values)?;
    Ok((matrix, header))
}

/// Writes the feature file at `path` and its manifest next to it. Counts,
/// dtype, `features_path` and the payload checksum are filled in; the
/// finished manifest is returned.
pub fn write_feature_store(
    path: &Path,
    matrix: &FeatureMatrix,
    manifest: &StoreManifest,
) -> Result<StoreManifest> {
    let bytes = encode_features(matrix, manifest.dtype, manifest.has_cls);
    let mut out = manifest.clone();
    out.features_path = file_name(path);
    out.n_rows = matrix.n_rows() as u64;
    out.n_cols = matrix.n_cols() as u64;
    out.checksum = Some(checksum_hex(&bytes[FEATURE_HEADER_LEN..]));

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    out.write(&manifest_path(path))?;
    Ok(out)
}

/// Reads a feature file and its manifest, checking that they agree.
pub fn read_feature_store(path: &Path) -> Result<(FeatureMatrix, StoreManifest)> {
    let path = resolve_features_path(path)?;
    let manifest = StoreManifest::read(&manifest_path(&path))?;
    let bytes = fs::read(&path)?;
    let (matrix, header) = decode_features(&bytes)?;

    let mismatch = |field, m: String, f: String| Error::ManifestMismatch {
        field,
        manifest: m,
        file: f,
    };
    if manifest.n_rows != header.n_rows {
        return Err(mismatch("n_rows", manifest.n_rows.to_string(), header.n_rows.to_string()));
    }
    if manifest.n_cols != header.n_cols {
        return Err(mismatch("n_cols", manifest.n_cols.to_string(), header.n_cols.to_string()));
    }
    if manifest.dtype != header.dtype {
        return Err(mismatch(
            "dtype",
            format!("{:?}", manifest.dtype),
            format!("{:?}", header.dtype),
        ));
    }
    if manifest.has_cls != header.has_cls {
        return Err(mismatch(
            "has_cls",
            manifest.has_cls.to_string(),
            header.has_cls.to_string(),
        ));
    }
    if let Some(expected) = &manifest.checksum {
        let actual = checksum_hex(&bytes[FEATURE_HEADER_LEN..]);
        if *expected != actual {
            return Err(Error::ChecksumMismatch {
                expected: expected.clone(),
                actual,
            });
        }
    }
    Ok((matrix, manifest))
}

pub fn encode_labels(targets: &TargetVector) -> Vec<u8> {
    let mut buf = Vec::with_capacity(LABEL_HEADER_LEN + targets.len() * 8);
    buf.extend_from_slice(LABEL_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    match targets {
        TargetVector::Classes {
            labels,
            num_classes,
        } => {
            buf.push(0);
            buf.push(0);
            buf.extend_from_slice(&(*num_classes as u32).to_le_bytes());
            buf.extend_from_slice(&(labels.len() as u64).to_le_bytes());
            for &l in labels {
                buf.extend_from_slice(&l.to_le_bytes());
            }
        }
        TargetVector::Scalars(values) => {
            buf.push(1);
            buf.push(0);
            buf.extend_from_slice(&0u32.to_le_bytes());
            buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for &v in values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    buf
}

pub fn decode_labels(bytes: &[u8]) -> Result<TargetVector> {
    if bytes.len() < 4 || &bytes[..4] != LABEL_MAGIC {
        return Err(Error::BadMagic { expected: "LGLB" });
    }
    if bytes.len() < LABEL_HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: LABEL_HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = le_u16(&bytes[4..]);
    if version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let kind = bytes[6];
    let num_classes = le_u32(&bytes[8..]) as usize;
    let n = le_u64(&bytes[12..]);
    let payload = &bytes[LABEL_HEADER_LEN..];
    match kind {
        0 => {
            expect_len(bytes, LABEL_HEADER_LEN as u64 + 4 * n)?;
            let labels = payload
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            TargetVector::classes(labels, num_classes)
        }
        1 => {
            expect_len(bytes, LABEL_HEADER_LEN as u64 + 8 * n)?;
            let values = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            TargetVector::scalars(values)
        }
        t => Err(Error::UnsupportedDtype(t)),
    }
}

pub fn write_labels(path: &Path, targets: &TargetVector) -> Result<()> {
    fs::write(path, encode_labels(targets))?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<TargetVector> {
    decode_labels(&fs::read(path)?)
}

fn layout_path(features: &Path) -> PathBuf {
    let stem = features
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    features.with_file_name(format!("{stem}.layout.json"))
}

/// Writes a token-level store: the subword matrix, its sequence layout and
/// the manifest.
pub fn write_token_store(
    path: &Path,
    store: &TokenEmbeddingStore,
    manifest: &StoreManifest,
) -> Result<StoreManifest> {
    let layout = SequenceLayout {
        offsets: store.offsets().to_vec(),
        excluded: store
            .excluded()
            .iter()
            .enumerate()
            .filter_map(|(i, &e)| e.then_some(i))
            .collect(),
    };
    let lpath = layout_path(path);
    fs::write(&lpath, serde_json::to_vec(&layout)?)?;

    let matrix = FeatureMatrix::new(store.n_subwords(), store.dim(), store.values().to_vec())?;
    let mut m = manifest.clone();
    m.granularity = Granularity::Token;
    m.pooling = Pooling::Raw;
    m.has_cls = store.has_cls();
    m.layout_path = Some(file_name(&lpath));
    m.n_sequences = Some(store.n_sequences() as u64);
    write_feature_store(path, &matrix, &m)
}

pub fn read_token_store(path: &Path) -> Result<(TokenEmbeddingStore, StoreManifest)> {
    let path = resolve_features_path(path)?;
    let (matrix, manifest) = read_feature_store(&path)?;
    let lname = manifest
        .layout_path
        .as_deref()
        .ok_or_else(|| Error::InvalidLayout("manifest has no layout_path".into()))?;
    let layout: SequenceLayout = serde_json::from_slice(&fs::read(sibling(&path, lname))?)?;
    if let Some(n) = manifest.n_sequences {
        if n != layout.offsets.len() as u64 {
            return Err(Error::ManifestMismatch {
                field: "n_sequences",
                manifest: n.to_string(),
                file: layout.offsets.len().to_string(),
            });
        }
    }
    let n_subwords = matrix.n_rows();
    let dim = matrix.n_cols();
    let mut excluded = Vec::new();
    if !layout.excluded.is_empty() {
        excluded = vec![false; n_subwords];
        for &p in &layout.excluded {
            *excluded.get_mut(p).ok_or_else(|| {
                Error::InvalidLayout(format!("excluded position {p} out of range"))
            })? = true;
        }
    }
    let store = TokenEmbeddingStore::new(
        dim,
        matrix.into_values(),
        layout.offsets,
        manifest.has_cls,
        excluded,
    )?;
    Ok((store, manifest))
}

/// Path of the label file written next to a feature file.
pub fn labels_path(features: &Path) -> PathBuf {
    features.with_extension("lglb")
}

/// Labels named by a manifest, resolved relative to the feature file.
pub fn read_manifest_labels(features: &Path, manifest: &StoreManifest) -> Result<Option<TargetVector>> {
    manifest
        .labels_path
        .as_deref()
        .map(|name| read_labels(&sibling(features, name)))
        .transpose()
}

pub fn read_alignment(path: &Path) -> Result<SubwordAlignment> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

pub fn write_alignment(path: &Path, alignment: &SubwordAlignment) -> Result<()> {
    fs::write(path, serde_json::to_vec(alignment)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Classes,
    Scalars,
}

/// Reads a CSV with a header row, one instance per line and the label in
/// the last column.
pub fn read_csv_dataset(path: &Path, kind: LabelKind) -> Result<(FeatureMatrix, TargetVector)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let n_fields = reader.headers()?.len();
    if n_fields < 2 {
        return Err(Error::Csv("need at least one feature column and a label".into()));
    }
    let n_cols = n_fields - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if values.len() + n_fields > CSV_MAX_CELLS {
            return Err(Error::InvalidShape(format!(
                "CSV input exceeds {CSV_MAX_CELLS} cells"
            )));
        }
        for field in record.iter().take(n_cols) {
            values.push(field.parse::<f64>().map_err(|e| {
                Error::Csv(format!("row {}: `{field}`: {e}", line + 2))
            })?);
        }
        let label = record.get(n_cols).unwrap_or_default();
        labels.push(
            label
                .parse::<f64>()
                .map_err(|e| Error::Csv(format!("row {}: label `{label}`: {e}", line + 2)))?,
        );
    }
    let n_rows = labels.len();
    let matrix = FeatureMatrix::new(n_rows, n_cols, values)?;
    let targets = match kind {
        LabelKind::Scalars => TargetVector::scalars(labels)?,
        LabelKind::Classes => {
            let classes = labels
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    if l >= 0.0 && l.fract() == 0.0 && l <= u32::MAX as f64 {
                        Ok(l as u32)
                    } else {
                        Err(Error::Csv(format!("row {}: label {l} is not a class index", i + 2)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            TargetVector::classes_inferred(classes)?
        }
    };
    Ok((matrix, targets))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> StoreManifest {
        StoreManifest::new("m", "d", Pooling::MeanSequence, Granularity::Sequence, false)
    }

    #[test]
    fn two_by_two_f64_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.lgfs");
        let m = FeatureMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let written = write_feature_store(&path, &m, &manifest()).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 64 + 32);
        assert_eq!(&bytes[..4], b"LGFS");
        assert_eq!(&bytes[4..8], &[1, 0, 1, 0]);
        assert_eq!(le_u64(&bytes[8..]), 2);
        assert_eq!(le_u64(&bytes[16..]), 2);
        assert!(bytes[24..64].iter().all(|&b| b == 0));
        assert_eq!(&bytes[64..72], &1.0f64.to_le_bytes());
        let (back, mf) = read_feature_store(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(mf, written);
        assert_eq!(mf.features_path, "x.lgfs");
        // manifest can stand in for the feature path
        let (via_manifest, _) = read_feature_store(&dir.path().join("x.json")).unwrap();
        assert_eq!(via_manifest, m);
    }

    #[test]
    fn f32_widening_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.lgfs");
        let narrow = [0.1f32, -3.75, 1e-7, 123456.79];
        let m = FeatureMatrix::new(2, 2, narrow.iter().map(|&v| v as f64).collect()).unwrap();
        let mut mf = manifest();
        mf.dtype = Dtype::F32;
        write_feature_store(&path, &m, &mf).unwrap();
        assert_eq!(fs::metadata(&path).unwrap().len(), 64 + 16);
        let (back, _) = read_feature_store(&path).unwrap();
        for (a, b) in back.values().iter().zip(narrow) {
            assert_eq!(a.to_bits(), (b as f64).to_bits());
        }
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.lgfs");
        let m = FeatureMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        write_feature_store(&path, &m, &manifest()).unwrap();
        let good = fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        fs::write(&path, &bad).unwrap();
        assert_eq!(read_feature_store(&path).unwrap_err().code(), "BadMagic");

        fs::write(&path, &good[..80]).unwrap();
        assert_eq!(read_feature_store(&path).unwrap_err().code(), "TruncatedFile");

        let mut bad = good.clone();
        bad[4] = 2;
        fs::write(&path, &bad).unwrap();
        assert_eq!(read_feature_store(&path).unwrap_err().code(), "VersionUnsupported");

        let mut bad = good.clone();
        bad[70] ^= 1;
        fs::write(&path, &bad).unwrap();
        assert_eq!(read_feature_store(&path).unwrap_err().code(), "ChecksumMismatch");

        fs::write(&path, &good).unwrap();
        let mut mf = StoreManifest::read(&manifest_path(&path)).unwrap();
        mf.n_rows = 3;
        mf.write(&manifest_path(&path)).unwrap();
        let err = read_feature_store(&path).unwrap_err();
        assert!(matches!(err, Error::ManifestMismatch { field: "n_rows", .. }));
    }

    #[test]
    fn unknown_manifest_keys_survive() {
        let json = r#"{"model_id":"a","dataset_id":"b","pooling":"raw","granularity":"token",
            "has_cls":true,"dtype":"f32","truncated_sequences":3}"#;
        let m: StoreManifest = serde_json::from_str(json).unwrap();
        assert_eq!(m.extra["truncated_sequences"], 3);
        let again: StoreManifest =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn labels_round_trip_and_validate() {
        let t = TargetVector::classes(vec![2, 0, 1, 1], 3).unwrap();
        assert_eq!(decode_labels(&encode_labels(&t)).unwrap(), t);
        let s = TargetVector::scalars(vec![0.5, -1.0]).unwrap();
        let bytes = encode_labels(&s);
        assert_eq!(bytes.len(), 20 + 16);
        assert_eq!(decode_labels(&bytes).unwrap(), s);
        assert_eq!(decode_labels(&bytes[..30]).unwrap_err().code(), "TruncatedFile");
        assert_eq!(decode_labels(b"LGFS0000").unwrap_err().code(), "BadMagic");
    }

    #[test]
    fn token_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tok.lgfs");
        let store = TokenEmbeddingStore::new(
            2,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec![0, 2],
            true,
            vec![false, true, false],
        )
        .unwrap();
        let mut mf = manifest();
        mf.dtype = Dtype::F32;
        write_token_store(&path, &store, &mf).unwrap();
        let (back, m) = read_token_store(&path).unwrap();
        assert_eq!(back, store);
        assert_eq!(m.granularity, Granularity::Token);
        assert_eq!(m.n_sequences, Some(2));
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "f0,f1,label\n1.0,2.0,0\n3.0,4.5,1\n0.5,0.5,1\n").unwrap();
        let (m, t) = read_csv_dataset(&path, LabelKind::Classes).unwrap();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.row(1), &[3.0, 4.5]);
        assert_eq!(
            t,
            TargetVector::Classes {
                labels: vec![0, 1, 1],
                num_classes: 2
            }
        );
        let (_, s) = read_csv_dataset(&path, LabelKind::Scalars).unwrap();
        assert_eq!(s, TargetVector::Scalars(vec![0.0, 1.0, 1.0]));
        fs::write(&path, "f0,label\n1.0,0.5\n2.0,1\n").unwrap();
        assert_eq!(
            read_csv_dataset(&path, LabelKind::Classes).unwrap_err().code(),
            "Csv"
        );
    }
}
