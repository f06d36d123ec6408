#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use safl::{Dataset, DatasetSpec, MlpLayout, Modality};

/// Cross-entropy of a one-hidden-layer ReLU net, written directly from the
/// layout description and independent of the crate's forward pass.
pub fn naive_loss(p: &[f64], l: MlpLayout, x: &[f64], y: usize) -> f64 {
    let (d, h, k) = (l.input, l.hidden, l.classes);
    let w1 = |i: usize, j: usize| p[i * h + j];
    let b1 = |j: usize| p[d * h + j];
    let w2 = |j: usize, c: usize| p[d * h + h + j * k + c];
    let b2 = |c: usize| p[d * h + h + h * k + c];
    let hidden: Vec<f64> = (0..h)
        .map(|j| (b1(j) + (0..d).map(|i| x[i] * w1(i, j)).sum::<f64>()).max(0.0))
        .collect();
    let logits: Vec<f64> = (0..k)
        .map(|c| b2(c) + (0..h).map(|j| hidden[j] * w2(j, c)).sum::<f64>())
        .collect();
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    lse - logits[y]
}

pub fn naive_mean_loss(p: &[f64], l: MlpLayout, feats: &[f64], labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(r, &y)| naive_loss(p, l, &feats[r * l.input..(r + 1) * l.input], y))
        .sum::<f64>()
        / labels.len() as f64
}

/// Nearest-centroid classifier fitted on the data itself.
pub fn nearest_centroid_accuracy(ds: &Dataset) -> f64 {
    let (d, k) = (ds.dim(), ds.classes());
    let mut centroids = vec![0.0; k * d];
    let counts = ds.class_counts();
    for i in 0..ds.len() {
        let c = ds.label(i);
        for (j, v) in ds.row(i).iter().enumerate() {
            centroids[c * d + j] += v / counts[c] as f64;
        }
    }
    let correct = (0..ds.len())
        .filter(|&i| {
            let x = ds.row(i);
            let best = (0..k)
                .min_by(|&a, &b| {
                    let da: f64 = (0..d).map(|j| (x[j] - centroids[a * d + j]).powi(2)).sum();
                    let db: f64 = (0..d).map(|j| (x[j] - centroids[b * d + j]).powi(2)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            best == ds.label(i)
        })
        .count();
    correct as f64 / ds.len() as f64
}

/// Two well-separated Gaussian blobs in `d` dimensions, built without the
/// crate's generator.
pub fn two_blobs(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = safl::seed::rng_from(seed);
    let mut feats = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let centre = if y == 0 { 2.25 } else { -2.25 };
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            feats.push(if j == 0 { centre + z } else { z });
        }
        labels.push(y);
    }
    let spec = DatasetSpec {
        name: "blobs".into(),
        size: n,
        modality: Modality::Sensor,
        classes: 2,
        complexity: 0.0,
        seed,
    };
    Dataset::from_parts(spec, d, feats, labels).unwrap()
}

pub fn random_instance(
    rng: &mut impl Rng,
    d: usize,
    h: usize,
    k: usize,
    n: usize,
) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let l = MlpLayout::new(d, h, k);
    let params: Vec<f64> = (0..l.param_count())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let feats: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    (params, feats, labels)
}

/// Largest per-coordinate relative error between the analytic gradient and
/// central finite differences of `naive_mean_loss`.
pub fn max_fd_rel_error(params: &[f64], l: MlpLayout, feats: &[f64], labels: &[usize]) -> f64 {
    let pv = safl::ParamVector::from_values(l, params.to_vec()).unwrap();
    let (_, grad) = safl::loss_and_grad(&pv, feats, labels).unwrap();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    let mut p = params.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + step;
        let up = naive_mean_loss(&p, l, feats, labels);
        p[i] = orig - step;
        let down = naive_mean_loss(&p, l, feats, labels);
        p[i] = orig;
        let fd = (up - down) / (2.0 * step);
        let a = grad.values()[i];
        let denom = a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max((a - fd).abs() / denom);
    }
    worst
}
