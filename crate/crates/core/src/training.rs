//! One-hidden-layer ReLU classifier with softmax cross-entropy, trained with
//! plain mini-batch SGD.
//!
//! Parameters live in a single flat vector so they can be exchanged,
//! aggregated and byte-counted without knowing the layer structure. Layout:
//! `W1` (`input x hidden`, row-major), `b1`, `W2` (`hidden x classes`,
//! row-major), `b2`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adaptation::AdaptiveParams;
use crate::datagen::Dataset;
use crate::error::{Result, SaflError};
use crate::seed::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpLayout {
    pub input: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl MlpLayout {
    pub fn new(input: usize, hidden: usize, classes: usize) -> Self {
        Self {
            input,
            hidden,
            classes,
        }
    }

    pub fn param_count(&self) -> usize {
        self.input * self.hidden + self.hidden + self.hidden * self.classes + self.classes
    }

    fn b1_offset(&self) -> usize {
        self.input * self.hidden
    }

    fn w2_offset(&self) -> usize {
        self.b1_offset() + self.hidden
    }

    fn b2_offset(&self) -> usize {
        self.w2_offset() + self.hidden * self.classes
    }

    /// Index ranges of the two bias blocks.
    pub fn bias_ranges(&self) -> [std::ops::Range<usize>; 2] {
        [
            self.b1_offset()..self.w2_offset(),
            self.b2_offset()..self.param_count(),
        ]
    }
}

/// Flat model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    layout: MlpLayout,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(layout: MlpLayout) -> Self {
        Self {
            layout,
            values: vec![0.0; layout.param_count()],
        }
    }

    pub fn from_values(layout: MlpLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.param_count() {
            return Err(SaflError::DimensionMismatch {
                context: "parameter vector",
                expected: layout.param_count(),
                got: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> MlpLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// SCAFFOLD control variate; same length as the model's parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVariate(pub Vec<f64>);

impl ControlVariate {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_assign(&mut self, other: &ControlVariate) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(layout: MlpLayout, seed: u64) -> ParamVector {
    let mut rng = rng_from(seed);
    let mut params = ParamVector::zeros(layout);
    let MlpLayout {
        input,
        hidden,
        classes,
    } = layout;
    let lim1 = (6.0 / (input + hidden) as f64).sqrt();
    let lim2 = (6.0 / (hidden + classes) as f64).sqrt();
    let (w1, rest) = params.values.split_at_mut(input * hidden);
    for w in w1 {
        *w = rng.random_range(-lim1..lim1);
    }
    let w2 = &mut rest[hidden..hidden + hidden * classes];
    for w in w2 {
        *w = rng.random_range(-lim2..lim2);
    }
    params
}

pub fn model_bytes(params: &ParamVector) -> u64 {
    params.len() as u64 * 8
}

/// Per-call scratch for forward/backward passes.
struct Scratch {
    pre: Vec<f64>,
    act: Vec<f64>,
    probs: Vec<f64>,
    dact: Vec<f64>,
}

impl Scratch {
    fn new(layout: MlpLayout) -> Self {
        Self {
            pre: vec![0.0; layout.hidden],
            act: vec![0.0; layout.hidden],
            probs: vec![0.0; layout.classes],
            dact: vec![0.0; layout.hidden],
        }
    }
}

/// Forward pass; leaves logits-turned-probabilities in `s.probs` and returns
/// the sample's cross-entropy.
fn forward(p: &[f64], layout: MlpLayout, x: &[f64], label: usize, s: &mut Scratch) -> f64 {
    let MlpLayout {
        input,
        hidden,
        classes,
    } = layout;
    let b1 = &p[layout.b1_offset()..layout.w2_offset()];
    let w2 = &p[layout.w2_offset()..layout.b2_offset()];
    let b2 = &p[layout.b2_offset()..];

    s.pre.copy_from_slice(b1);
    for i in 0..input {
        let xi = x[i];
        if xi != 0.0 {
            let row = &p[i * hidden..(i + 1) * hidden];
            for (z, w) in s.pre.iter_mut().zip(row) {
                *z += xi * w;
            }
        }
    }
    for (a, z) in s.act.iter_mut().zip(&s.pre) {
        *a = z.max(0.0);
    }

    s.probs.copy_from_slice(b2);
    for j in 0..hidden {
        let aj = s.act[j];
        if aj != 0.0 {
            let row = &w2[j * classes..(j + 1) * classes];
            for (o, w) in s.probs.iter_mut().zip(row) {
                *o += aj * w;
            }
        }
    }

    let max = s.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let target = s.probs[label];
    let mut sum = 0.0;
    for o in s.probs.iter_mut() {
        *o = (*o - max).exp();
        sum += *o;
    }
    for o in s.probs.iter_mut() {
        *o /= sum;
    }
    sum.ln() + max - target
}

/// Adds the gradient of one sample's loss, scaled by `scale`, into `grad`.
/// Expects `s` to hold the state left by `forward` on the same sample.
fn backward(
    p: &[f64],
    layout: MlpLayout,
    x: &[f64],
    label: usize,
    scale: f64,
    s: &mut Scratch,
    grad: &mut [f64],
) {
    let MlpLayout {
        input,
        hidden,
        classes,
    } = layout;
    let w2 = &p[layout.w2_offset()..layout.b2_offset()];

    // dL/dlogits = softmax - onehot
    s.probs[label] -= 1.0;
    for o in s.probs.iter_mut() {
        *o *= scale;
    }

    let (g_w1b1, g_rest) = grad.split_at_mut(layout.w2_offset());
    let (g_w2, g_b2) = g_rest.split_at_mut(hidden * classes);
    for (g, d) in g_b2.iter_mut().zip(&s.probs) {
        *g += d;
    }
    for j in 0..hidden {
        let aj = s.act[j];
        let wrow = &w2[j * classes..(j + 1) * classes];
        let mut da = 0.0;
        for (w, p) in wrow.iter().zip(&s.probs) {
            da += w * p;
        }
        s.dact[j] = if s.pre[j] > 0.0 { da } else { 0.0 };
        if aj != 0.0 {
            let grow = &mut g_w2[j * classes..(j + 1) * classes];
            for (g, d) in grow.iter_mut().zip(&s.probs) {
                *g += aj * d;
            }
        }
    }

    let (g_w1, g_b1) = g_w1b1.split_at_mut(input * hidden);
    for (g, d) in g_b1.iter_mut().zip(&s.dact) {
        *g += d;
    }
    for i in 0..input {
        let xi = x[i];
        if xi != 0.0 {
            let grow = &mut g_w1[i * hidden..(i + 1) * hidden];
            for (g, d) in grow.iter_mut().zip(&s.dact) {
                *g += xi * d;
            }
        }
    }
}

fn check_data(layout: MlpLayout, data: &Dataset) -> Result<()> {
    if data.dim() != layout.input {
        return Err(SaflError::DimensionMismatch {
            context: "feature dimension",
            expected: layout.input,
            got: data.dim(),
        });
    }
    if data.classes() > layout.classes {
        return Err(SaflError::DimensionMismatch {
            context: "class count",
            expected: layout.classes,
            got: data.classes(),
        });
    }
    Ok(())
}

/// Mean loss and its gradient over the selected rows of `data`.
fn batch_loss_and_grad(
    params: &ParamVector,
    data: &Dataset,
    rows: &[usize],
    grad: &mut [f64],
    s: &mut Scratch,
) -> f64 {
    let layout = params.layout;
    let p = &params.values;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for &r in rows {
        let (x, y) = (data.row(r), data.label(r));
        loss += forward(p, layout, x, y, s);
        backward(p, layout, x, y, scale, s, grad);
    }
    loss * scale
}

/// Mean cross-entropy over `features` (row-major) and its exact gradient.
pub fn loss_and_grad(
    params: &ParamVector,
    features: &[f64],
    labels: &[usize],
) -> Result<(f64, ParamVector)> {
    let layout = params.layout;
    if labels.is_empty() {
        return Err(SaflError::Empty("batch"));
    }
    if features.len() != labels.len() * layout.input {
        return Err(SaflError::DimensionMismatch {
            context: "batch features",
            expected: labels.len() * layout.input,
            got: features.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= layout.classes) {
        return Err(SaflError::OutOfRange(format!(
            "label {bad} >= class count {}",
            layout.classes
        )));
    }
    let mut s = Scratch::new(layout);
    let mut grad = ParamVector::zeros(layout);
    let scale = 1.0 / labels.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in features.chunks_exact(layout.input).zip(labels) {
        loss += forward(&params.values, layout, x, y, &mut s);
        backward(
            &params.values,
            layout,
            x,
            y,
            scale,
            &mut s,
            &mut grad.values,
        );
    }
    Ok((loss * scale, grad))
}

/// Which local objective a client optimises.
#[derive(Debug, Clone, Copy)]
pub enum LocalVariant<'a> {
    /// Plain SGD (FedAvg clients).
    Plain,
    /// Adds `mu * (w - w_start)` to every gradient (FedProx clients).
    Prox { mu: f64 },
    /// Adds `server - client` to every gradient and reports a control delta
    /// (SCAFFOLD clients).
    Scaffold {
        server: &'a ControlVariate,
        client: &'a ControlVariate,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub final_local_loss: f64,
    pub samples_seen: usize,
    pub local_steps: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub params: ParamVector,
    pub stats: TrainStats,
    /// `c_i' - c_i` for SCAFFOLD clients.
    pub delta_control: Option<ControlVariate>,
}

/// Runs `ap.epochs` of shuffled mini-batch SGD starting from `params`.
///
/// The final short batch of each epoch is trained. `final_local_loss` is the
/// sample-weighted mean of the batch losses seen during the last epoch.
pub fn local_train(
    params: &ParamVector,
    shard: &Dataset,
    ap: AdaptiveParams,
    variant: LocalVariant<'_>,
    seed: u64,
) -> Result<LocalOutcome> {
    let AdaptiveParams { epochs, batch, lr } = ap;
    if shard.is_empty() {
        return Err(SaflError::Empty("client shard"));
    }
    if batch == 0 {
        return Err(SaflError::Config("batch size must be positive".into()));
    }
    let layout = params.layout;
    check_data(layout, shard)?;
    if let LocalVariant::Scaffold { server, client } = variant {
        for cv in [server, client] {
            if cv.len() != params.len() {
                return Err(SaflError::DimensionMismatch {
                    context: "control variate",
                    expected: params.len(),
                    got: cv.len(),
                });
            }
        }
    }

    let started = Instant::now();
    let start = params.clone();
    let mut w = params.clone();
    let mut grad = vec![0.0; params.len()];
    let mut s = Scratch::new(layout);
    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..shard.len()).collect();

    let correction: Option<Vec<f64>> = match variant {
        LocalVariant::Scaffold { server, client } => Some(
            server
                .0
                .iter()
                .zip(&client.0)
                .map(|(c, ci)| c - ci)
                .collect(),
        ),
        _ => None,
    };

    let mut steps = 0usize;
    let mut last_epoch_loss = 0.0;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for rows in order.chunks(batch) {
            let loss = batch_loss_and_grad(&w, shard, rows, &mut grad, &mut s);
            epoch_loss += loss * rows.len() as f64;

            match variant {
                LocalVariant::Prox { mu } if mu != 0.0 => {
                    for ((g, wi), w0) in grad.iter_mut().zip(&w.values).zip(&start.values) {
                        *g += mu * (wi - w0);
                    }
                }
                _ => {}
            }
            if let Some(corr) = &correction {
                for (g, c) in grad.iter_mut().zip(corr) {
                    *g += c;
                }
            }
            for (wi, g) in w.values.iter_mut().zip(&grad) {
                *wi -= lr * g;
            }
            steps += 1;
            if !w.is_finite() {
                return Err(SaflError::NonFinite { epoch, step: steps });
            }
        }
        last_epoch_loss = epoch_loss / shard.len() as f64;
    }

    let delta_control = match variant {
        LocalVariant::Scaffold { server, .. } => {
            let denom = steps as f64 * lr;
            let delta = server
                .0
                .iter()
                .zip(start.values.iter().zip(&w.values))
                .map(|(c, (w0, wl))| {
                    let drift = if denom > 0.0 { (w0 - wl) / denom } else { 0.0 };
                    drift - c
                })
                .collect();
            Some(ControlVariate(delta))
        }
        _ => None,
    };

    Ok(LocalOutcome {
        params: w,
        stats: TrainStats {
            final_local_loss: last_epoch_loss,
            samples_seen: epochs * shard.len(),
            local_steps: steps,
            wall_time: started.elapsed().as_secs_f64(),
        },
        delta_control,
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub loss: f64,
}

/// Accuracy and mean cross-entropy of `params` over the whole dataset.
pub fn evaluate(params: &ParamVector, data: &Dataset) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(SaflError::Empty("evaluation dataset"));
    }
    let layout = params.layout;
    check_data(layout, data)?;
    let mut s = Scratch::new(layout);
    let mut correct = 0usize;
    let mut loss = 0.0;
    for i in 0..data.len() {
        let y = data.label(i);
        loss += forward(&params.values, layout, data.row(i), y, &mut s);
        if argmax(&s.probs) == y {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        loss: loss / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, DatasetSpec, Modality};

    fn ap(epochs: usize, batch: usize, lr: f64) -> AdaptiveParams {
        AdaptiveParams { epochs, batch, lr }
    }

    fn toy_data(n: usize, seed: u64, complexity: f64) -> Dataset {
        generate(&DatasetSpec {
            name: "toy".into(),
            size: n,
            modality: Modality::Sensor,
            classes: 3,
            complexity,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn layout_and_init() {
        let layout = MlpLayout::new(4, 3, 2);
        let p = init_model(layout, 1);
        assert_eq!(p.len(), 23);
        assert_eq!(p, init_model(layout, 1));
        assert_ne!(p, init_model(layout, 2));
        for r in layout.bias_ranges() {
            assert!(p.values()[r].iter().all(|&b| b == 0.0));
        }
        let lim = (6.0f64 / 7.0).sqrt();
        assert!(p.values()[..12].iter().all(|w| w.abs() <= lim));
    }

    #[test]
    fn model_byte_counts() {
        assert_eq!(
            model_bytes(&ParamVector::zeros(MlpLayout::new(4, 3, 2))),
            184
        );
        assert_eq!(
            model_bytes(&ParamVector::zeros(MlpLayout::new(64, 32, 20))),
            21_920
        );
    }

    #[test]
    fn zero_params_give_uniform_loss() {
        let layout = MlpLayout::new(3, 4, 5);
        let p = ParamVector::zeros(layout);
        let feats = [0.3, -1.0, 2.0, 1.0, 1.0, 1.0];
        let (loss, _) = loss_and_grad(&p, &feats, &[0, 4]).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn duplicated_rows_leave_loss_unchanged() {
        let layout = MlpLayout::new(3, 4, 2);
        let p = init_model(layout, 5);
        let feats = [0.3, -1.0, 2.0, 1.0, 0.5, -0.2];
        let labels = [0, 1];
        let mut f2 = feats.to_vec();
        f2.extend_from_slice(&feats);
        let (l1, g1) = loss_and_grad(&p, &feats, &labels).unwrap();
        let (l2, g2) = loss_and_grad(&p, &f2, &[0, 1, 0, 1]).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        for (a, b) in g1.values().iter().zip(g2.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_errors() {
        let p = ParamVector::zeros(MlpLayout::new(3, 2, 2));
        assert!(loss_and_grad(&p, &[1.0, 2.0], &[0]).is_err());
        assert!(loss_and_grad(&p, &[], &[]).is_err());
        assert!(loss_and_grad(&p, &[1.0, 2.0, 3.0], &[2]).is_err());
        let data = toy_data(30, 1, 0.0);
        let wrong = ParamVector::zeros(MlpLayout::new(5, 2, 3));
        assert!(evaluate(&wrong, &data).is_err());
    }

    #[test]
    fn zero_lr_is_identity() {
        let data = toy_data(40, 2, 0.3);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let out = local_train(&p, &data, ap(2, 8, 0.0), LocalVariant::Plain, 4).unwrap();
        assert_eq!(out.params, p);
        assert_eq!(out.stats.samples_seen, 80);
        assert_eq!(out.stats.local_steps, 10);
    }

    #[test]
    fn full_batch_single_step_matches_gradient() {
        let data = toy_data(30, 2, 0.3);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let lr = 0.05;
        let out = local_train(&p, &data, ap(1, 64, lr), LocalVariant::Plain, 4).unwrap();
        let (_, g) = loss_and_grad(&p, data.features(), data.labels()).unwrap();
        for ((w, w0), gi) in out.params.values().iter().zip(p.values()).zip(g.values()) {
            assert!((w - (w0 - lr * gi)).abs() < 1e-14);
        }
    }

    #[test]
    fn prox_with_zero_mu_matches_plain() {
        let data = toy_data(50, 2, 0.5);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let a = local_train(&p, &data, ap(2, 7, 0.02), LocalVariant::Plain, 9).unwrap();
        let b = local_train(&p, &data, ap(2, 7, 0.02), LocalVariant::Prox { mu: 0.0 }, 9).unwrap();
        let bits = |o: &LocalOutcome| {
            o.params
                .values()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn prox_pulls_toward_start() {
        let data = toy_data(60, 2, 0.2);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let dist = |o: &LocalOutcome| {
            o.params
                .values()
                .iter()
                .zip(p.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let plain = local_train(&p, &data, ap(3, 8, 0.05), LocalVariant::Plain, 1).unwrap();
        let prox =
            local_train(&p, &data, ap(3, 8, 0.05), LocalVariant::Prox { mu: 5.0 }, 1).unwrap();
        assert!(dist(&prox) < dist(&plain));
    }

    #[test]
    fn scaffold_zero_controls_match_plain_and_report_drift() {
        let data = toy_data(50, 2, 0.5);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let zero = ControlVariate::zeros(p.len());
        let lr = 0.02;
        let plain = local_train(&p, &data, ap(2, 10, lr), LocalVariant::Plain, 9).unwrap();
        let sc = local_train(
            &p,
            &data,
            ap(2, 10, lr),
            LocalVariant::Scaffold {
                server: &zero,
                client: &zero,
            },
            9,
        )
        .unwrap();
        assert_eq!(plain.params, sc.params);
        let k = sc.stats.local_steps as f64;
        let delta = sc.delta_control.unwrap();
        for ((d, w0), wl) in delta.0.iter().zip(p.values()).zip(sc.params.values()) {
            assert!((d - (w0 - wl) / (k * lr)).abs() < 1e-12);
        }
        assert!(plain.delta_control.is_none());
    }

    #[test]
    fn local_train_is_deterministic() {
        let data = toy_data(50, 2, 0.5);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        let a = local_train(&p, &data, ap(2, 8, 0.02), LocalVariant::Plain, 9).unwrap();
        let b = local_train(&p, &data, ap(2, 8, 0.02), LocalVariant::Plain, 9).unwrap();
        assert_eq!(a.params, b.params);
        let c = local_train(&p, &data, ap(2, 8, 0.02), LocalVariant::Plain, 10).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn divergence_is_reported() {
        let data = toy_data(20, 2, 0.0);
        let mut p = init_model(MlpLayout::new(16, 8, 3), 3);
        p.values_mut()[0] = f64::MAX;
        let err = local_train(&p, &data, ap(1, 4, 1e300), LocalVariant::Plain, 1).unwrap_err();
        assert!(matches!(err, SaflError::NonFinite { .. }));
    }

    #[test]
    fn empty_shard_rejected() {
        let data = toy_data(20, 2, 0.0).subset(&[]);
        let p = init_model(MlpLayout::new(16, 8, 3), 3);
        assert!(local_train(&p, &data, ap(1, 4, 0.1), LocalVariant::Plain, 1).is_err());
        assert!(evaluate(&p, &data).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn evaluation_counts() {
        // Constant predictor of class 0: zero weights, b2 favours class 0.
        let layout = MlpLayout::new(2, 1, 2);
        let mut p = ParamVector::zeros(layout);
        let b2 = layout.bias_ranges()[1].clone();
        p.values_mut()[b2.start] = 1.0;
        let spec = DatasetSpec {
            name: "four".into(),
            size: 4,
            modality: Modality::Sensor,
            classes: 2,
            complexity: 0.0,
            seed: 0,
        };
        let data = Dataset::from_parts(spec, 2, vec![0.0; 8], vec![0, 0, 1, 1]).unwrap();
        assert_eq!(evaluate(&p, &data).unwrap().accuracy, 0.5);
        let zero = ParamVector::zeros(layout);
        assert!((evaluate(&zero, &data).unwrap().loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn perfect_logits_score_one() {
        // hidden = relu(x), logits = hidden * 10: one-hot inputs map to their class.
        let layout = MlpLayout::new(2, 2, 2);
        let mut v = vec![0.0; layout.param_count()];
        v[0] = 1.0; // W1[0][0]
        v[3] = 1.0; // W1[1][1]
        let w2 = 4 + 2;
        v[w2] = 10.0; // W2[0][0]
        v[w2 + 3] = 10.0; // W2[1][1]
        let p = ParamVector::from_values(layout, v).unwrap();
        let spec = DatasetSpec {
            name: "onehot".into(),
            size: 4,
            modality: Modality::Sensor,
            classes: 2,
            complexity: 0.0,
            seed: 0,
        };
        let data = Dataset::from_parts(
            spec,
            2,
            vec![1.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 3.0],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        let ev = evaluate(&p, &data).unwrap();
        assert_eq!(ev.accuracy, 1.0);
        assert!(ev.loss < 1e-3);
    }
}
