//! Seeded synthetic datasets and client partitioning.
//!
//! Each dataset is a Gaussian mixture: class `k` is centred on a random unit
//! direction scaled by `4 * (1 - complexity) + 0.5`, and every feature gets
//! standard normal noise on top. Harder modalities therefore produce more
//! overlapping classes.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SaflError};
use crate::seed::rng_from;

/// Data medium of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Vision,
    Text,
    TimeSeries,
    Audio,
    Sensor,
    MedicalVision,
    Multimodal,
}

impl Modality {
    pub const ALL: [Modality; 7] = [
        Modality::Vision,
        Modality::Text,
        Modality::TimeSeries,
        Modality::Audio,
        Modality::Sensor,
        Modality::MedicalVision,
        Modality::Multimodal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Vision => "vision",
            Modality::Text => "text",
            Modality::TimeSeries => "time_series",
            Modality::Audio => "audio",
            Modality::Sensor => "sensor",
            Modality::MedicalVision => "medical_vision",
            Modality::Multimodal => "multimodal",
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Feature dimension used for a modality's synthetic stand-in.
pub fn feature_dim(modality: Modality) -> usize {
    match modality {
        Modality::Vision | Modality::MedicalVision => 64,
        Modality::Text => 50,
        Modality::Audio => 40,
        Modality::TimeSeries => 32,
        Modality::Sensor => 16,
        // vision (64) + sensor-style side channel (16)
        Modality::Multimodal => 80,
    }
}

/// Class separation for a complexity in `[0, 1]`.
pub fn class_separation(complexity: f64) -> f64 {
    4.0 * (1.0 - complexity) + 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub size: usize,
    pub modality: Modality,
    pub classes: usize,
    pub complexity: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(SaflError::InvalidSpec {
                name: self.name.clone(),
                reason,
            })
        };
        if self.classes < 2 {
            return fail(format!("classes must be >= 2, got {}", self.classes));
        }
        if self.size < self.classes {
            return fail(format!(
                "size {} is smaller than class count {}",
                self.size, self.classes
            ));
        }
        if !(0.0..=1.0).contains(&self.complexity) {
            return fail(format!("complexity {} outside [0, 1]", self.complexity));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        feature_dim(self.modality)
    }
}

/// A labeled feature matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    dim: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset from raw parts, checking shapes and labels.
    pub fn from_parts(
        spec: DatasetSpec,
        dim: usize,
        features: Vec<f64>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if features.len() != labels.len() * dim {
            return Err(SaflError::DimensionMismatch {
                context: "dataset features",
                expected: labels.len() * dim,
                got: features.len(),
            });
        }
        if labels.len() != spec.size {
            return Err(SaflError::DimensionMismatch {
                context: "dataset rows",
                expected: spec.size,
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= spec.classes) {
            return Err(SaflError::OutOfRange(format!(
                "label {bad} >= class count {}",
                spec.classes
            )));
        }
        Ok(Self {
            spec,
            dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.spec.classes
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.spec.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        let mut spec = self.spec.clone();
        spec.size = rows.len();
        Dataset {
            spec,
            dim: self.dim,
            features,
            labels,
        }
    }

    /// Shuffled `(train, holdout)` split with `train_frac` of the rows in train.
    pub fn split(&self, train_frac: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(SaflError::OutOfRange(format!(
                "train fraction {train_frac} outside (0, 1)"
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rng_from(seed));
        let cut = ((self.len() as f64) * train_frac).round() as usize;
        let cut = cut.clamp(1, self.len().saturating_sub(1).max(1));
        Ok((self.subset(&idx[..cut]), self.subset(&idx[cut..])))
    }

    /// Writes the dataset as CSV with header `f0..f{d-1},label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dim).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generates the Gaussian-mixture stand-in described by `spec`.
///
/// Draw order is fixed (class directions, label shuffle, noise) and does not
/// depend on `complexity`, so two specs differing only in complexity share
/// the same directions and noise.
pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.feature_dim();
    let k = spec.classes;
    let n = spec.size;
    let scale = class_separation(spec.complexity);
    let mut rng = rng_from(spec.seed);

    let mut means = Vec::with_capacity(k * d);
    for _ in 0..k {
        let dir = loop {
            let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
            }
        };
        means.extend(dir.into_iter().map(|x| x * scale));
    }

    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    labels.shuffle(&mut rng);

    let mut features = Vec::with_capacity(n * d);
    for &l in &labels {
        let mean = &means[l * d..(l + 1) * d];
        for &m in mean {
            let z: f64 = rng.sample(StandardNormal);
            features.push(m + z);
        }
    }

    Dataset::from_parts(spec.clone(), d, features, labels)
}

/// One client's slice of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub dataset: Dataset,
    pub origin: String,
}

/// Shuffles then splits rows evenly across `n_clients`; the remainder goes to
/// the lowest client ids.
pub fn partition(dataset: &Dataset, n_clients: usize, seed: u64) -> Result<Vec<ClientShard>> {
    if dataset.is_empty() {
        return Err(SaflError::Empty("dataset to partition"));
    }
    if n_clients == 0 {
        return Err(SaflError::Config("n_clients must be >= 1".into()));
    }
    if n_clients > dataset.len() {
        return Err(SaflError::Config(format!(
            "cannot split {} samples across {} clients",
            dataset.len(),
            n_clients
        )));
    }
    let mut idx: Vec<usize> = (0..dataset.len()).collect();
    idx.shuffle(&mut rng_from(seed));

    let base = dataset.len() / n_clients;
    let rem = dataset.len() % n_clients;
    let mut start = 0;
    let mut shards = Vec::with_capacity(n_clients);
    for client_id in 0..n_clients {
        let take = base + usize::from(client_id < rem);
        shards.push(ClientShard {
            client_id,
            dataset: dataset.subset(&idx[start..start + take]),
            origin: dataset.spec.name.clone(),
        });
        start += take;
    }
    Ok(shards)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(size: usize, classes: usize, complexity: f64, seed: u64) -> DatasetSpec {
        DatasetSpec {
            name: "t".into(),
            size,
            modality: Modality::Sensor,
            classes,
            complexity,
            seed,
        }
    }

    #[test]
    fn feature_dims() {
        assert_eq!(feature_dim(Modality::Sensor), 16);
        assert_eq!(feature_dim(Modality::Multimodal), 80);
        assert_eq!(feature_dim(Modality::TimeSeries), 32);
    }

    #[test]
    fn balanced_round_robin() {
        let ds = generate(&spec(500, 5, 0.4, 7)).unwrap();
        assert_eq!(ds.len(), 500);
        assert_eq!(ds.features().len(), 500 * 16);
        assert_eq!(ds.class_counts(), vec![100; 5]);

        let ds = generate(&spec(13, 4, 0.4, 7)).unwrap();
        let counts = ds.class_counts();
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&spec(3, 5, 0.1, 0)).is_err());
        assert!(generate(&spec(10, 1, 0.1, 0)).is_err());
        assert!(generate(&spec(10, 2, 1.5, 0)).is_err());
    }

    #[test]
    fn regeneration_is_identical() {
        let a = generate(&spec(200, 3, 0.2, 11)).unwrap();
        let b = generate(&spec(200, 3, 0.2, 11)).unwrap();
        let bits = |d: &Dataset| d.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.labels(), b.labels());
        let c = generate(&spec(200, 3, 0.2, 12)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn partition_sizes() {
        let ds = generate(&spec(600, 3, 0.5, 1)).unwrap();
        let shards = partition(&ds, 6, 9).unwrap();
        assert!(shards.iter().all(|s| s.dataset.len() == 100));

        let ds = generate(&spec(13, 2, 0.5, 1)).unwrap();
        let sizes: Vec<_> = partition(&ds, 6, 9)
            .unwrap()
            .iter()
            .map(|s| s.dataset.len())
            .collect();
        assert_eq!(sizes, vec![3, 2, 2, 2, 2, 2]);

        assert!(partition(&ds, 14, 0).is_err());
        assert!(partition(&ds, 0, 0).is_err());
    }

    #[test]
    fn single_client_gets_everything() {
        let ds = generate(&spec(50, 2, 0.5, 3)).unwrap();
        let shards = partition(&ds, 1, 4).unwrap();
        assert_eq!(shards.len(), 1);
        assert_eq!(shards[0].dataset.len(), 50);
        let mut a: Vec<_> = shards[0].dataset.labels().to_vec();
        let mut b: Vec<_> = ds.labels().to_vec();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(shards[0].origin, "t");
    }

    #[test]
    fn holdout_split_covers_rows() {
        let ds = generate(&spec(100, 2, 0.5, 3)).unwrap();
        let (train, test) = ds.split(0.8, 1).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
    }

    #[test]
    fn csv_header() {
        let ds = generate(&spec(4, 2, 0.5, 3)).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("f0,f1,"));
        assert!(header.ends_with("f15,label"));
        assert_eq!(text.lines().count(), 5);
    }
}
