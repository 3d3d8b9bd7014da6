//! Helpers for driving the `logme` binary against generated stores.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

use logme_cli::Failure;
use logme_core::store::{labels_path, write_labels, write_token_store, Granularity, Pooling};
use logme_core::{
    write_feature_store, Dtype, FeatureMatrix, StoreManifest, TargetVector, TokenEmbeddingStore,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn logme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logme"))
        .args(args)
        .env_remove("LOGME_THREADS")
        .output()
        .expect("binary runs")
}

pub fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// The single JSON error line on standard error.
pub fn failure(out: &Output) -> Failure {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not an error line ({e}): {text}"))
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Drops every `meta.timestamp` so runs can be compared.
pub fn without_timestamp(mut v: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(map) => {
                if let Some(Value::Object(meta)) = map.get_mut("meta") {
                    meta.remove("timestamp");
                }
                map.values_mut().for_each(strip);
            }
            Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

/// Labels `argmax` of a noisy random projection, with every class present.
pub fn argmax_labels(rng: &mut ChaCha8Rng, f: &FeatureMatrix, k: usize, noise: f64) -> Vec<u32> {
    let h = f.n_cols();
    let w = normals(rng, h * k);
    let mut labels: Vec<u32> = f
        .rows()
        .map(|row| {
            let scores: Vec<f64> = (0..k)
                .map(|c| {
                    (0..h).map(|j| row[j] * w[j * k + c]).sum::<f64>()
                        + noise * rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            (0..k).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap() as u32
        })
        .collect();
    for c in 0..k {
        if !labels.contains(&(c as u32)) {
            labels[c] = c as u32;
        }
    }
    labels
}

/// Writes a feature store plus labels and returns the feature path.
pub fn write_store(
    dir: &Path,
    name: &str,
    f: &FeatureMatrix,
    t: &TargetVector,
    dtype: Dtype,
) -> PathBuf {
    let path = dir.join(format!("{name}.lgfs"));
    let lpath = labels_path(&path);
    write_labels(&lpath, t).unwrap();
    let mut m = StoreManifest::new(name, "synthetic", Pooling::MeanSequence, Granularity::Sequence, false);
    m.dtype = dtype;
    m.labels_path = Some(lpath.file_name().unwrap().to_string_lossy().into_owned());
    write_feature_store(&path, f, &m).unwrap();
    path
}

/// Random classification store with `k` classes.
pub fn classification_store(dir: &Path, name: &str, seed: u64, n: usize, h: usize, k: usize) -> PathBuf {
    let mut r = rng(seed);
    let f = FeatureMatrix::new(n, h, normals(&mut r, n * h)).unwrap();
    let labels = argmax_labels(&mut r, &f, k, 0.5);
    write_store(dir, name, &f, &TargetVector::classes(labels, k).unwrap(), Dtype::F64)
}

/// Two sequences with a [CLS] slot: 4 and 3 subwords, width 3. Sequence
/// labels 0 and 1 are attached.
pub fn token_store(dir: &Path, has_cls: bool) -> PathBuf {
    let seqs = vec![
        vec![vec![1.0, 0.0, 2.0], vec![2.0, 4.0, 6.0], vec![0.0, 2.0, 2.0], vec![3.0, 3.0, 3.0]],
        vec![vec![5.0, 5.0, 5.0], vec![1.0, 1.0, 1.0], vec![7.0, -1.0, 0.5]],
    ];
    let store = TokenEmbeddingStore::from_sequences(&seqs, has_cls).unwrap();
    let path = dir.join("tokens.lgfs");
    let lpath = dir.join("tokens.lglb");
    write_labels(&lpath, &TargetVector::classes(vec![0, 1], 2).unwrap()).unwrap();
    let mut m = StoreManifest::new("toy-encoder", "toy", Pooling::Raw, Granularity::Token, has_cls);
    m.labels_path = Some("tokens.lglb".into());
    write_token_store(&path, &store, &m).unwrap();
    path
}

/// Word spans for [`token_store`]: 2 + 2 tokens.
pub fn token_alignment(dir: &Path) -> PathBuf {
    let path = dir.join("align.json");
    std::fs::write(
        &path,
        r#"{"num_classes": 3, "sequences": [
            {"spans": [[1, 3], [3, 4]], "labels": [0, 2]},
            {"spans": [[1, 2], [2, 3]], "labels": [1, 0]}
        ]}"#,
    )
    .unwrap();
    path
}
