//! Dense multilayer perceptron trained from scratch: ReLU hidden layers, a
//! two-neuron softmax output, focal or class-balanced cross-entropy loss,
//! adaptive-moment gradient descent with early stopping, and an optional
//! non-negative-weight constraint that makes every logit a convex function
//! of the input.

use super::{balanced_accuracy, MlError, Prediction};
use crate::geometry::Behaviour;
use crate::linalg::Mat;
use crate::sampling::{Label, LabelledPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Hidden and output layer widths; the input width comes from the data.
pub const HIDDEN_LAYERS: [usize; 3] = [64, 16, 4];
pub const OUTPUT_NEURONS: usize = 2;

/// Focal loss parameters `FL(p) = −α (1−p)^γ log p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalLossParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for FocalLossParams {
    fn default() -> Self {
        FocalLossParams { alpha: 1e-2, gamma: 2.0 }
    }
}

/// Focal loss of the predicted probability of the true class.
pub fn focal_loss(p: f64, params: &FocalLossParams) -> f64 {
    let p = p.max(1e-12);
    -params.alpha * (1.0 - p).powf(params.gamma) * p.ln()
}

/// Class-balanced binary cross entropy: mean of the class-conditional mean
/// log losses, i.e. class terms reweighted by inverse class frequency.
pub fn balanced_bce(class1_probs: &[f64], labels: &[Label]) -> Result<f64, MlError> {
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (&p, &l) in class1_probs.iter().zip(labels) {
        let p = p.clamp(1e-12, 1.0 - 1e-12);
        let idx = l.as_u8() as usize;
        sums[idx] += match l {
            Label::Quantum => -p.ln(),
            Label::NotQuantum => -(1.0 - p).ln(),
        };
        counts[idx] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(MlError::SingleClassBatch);
    }
    Ok(0.5 * (sums[0] / counts[0] as f64 + sums[1] / counts[1] as f64))
}

/// Loss used during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossKind {
    Focal(FocalLossParams),
    BalancedBce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub loss: LossKind,
    pub seed: u64,
    pub epochs_run: usize,
    pub best_validation_score: f64,
}

/// Fitted multilayer perceptron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// weights[l] maps layer l activations (cols) to layer l+1 (rows)
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    pub convex_constrained: bool,
    pub training_meta: TrainingMeta,
}

impl MlpModel {
    pub fn feature_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Pre-softmax outputs.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        if x.len() != self.feature_dim() {
            return Err(MlError::DimensionMismatch { expected: self.feature_dim(), got: x.len() });
        }
        let mut act = x.to_vec();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut next = b.clone();
            for (row, slot) in w.iter().zip(next.iter_mut()) {
                *slot += crate::linalg::dot(row, &act);
            }
            if l + 1 < self.weights.len() {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            act = next;
        }
        Ok(act)
    }

    /// Softmax class probabilities `[p(not quantum), p(quantum)]`.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        Ok(softmax(&self.logits(x)?))
    }

    pub fn predict(&self, b: &Behaviour) -> Result<Prediction, MlError> {
        let p = self.probabilities(b.coords())?;
        let label = Label::from_bool(p[1] >= p[0]);
        Ok(Prediction { label, score: p[1] })
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
    let exps: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Training configuration; defaults follow the architecture and optimizer
/// choices documented on [`train_mlp`].
#[derive(Debug, Clone)]
pub struct MlpConfig {
    pub loss: LossKind,
    pub convex: bool,
    pub restarts: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
}

impl MlpConfig {
    pub fn new(loss: LossKind, seed: u64) -> Self {
        MlpConfig {
            loss,
            convex: false,
            restarts: 10,
            seed,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 500,
            patience: 20,
        }
    }
}

/// Network state during training, flat parameter vector view for the
/// optimizer.
struct Net {
    sizes: Vec<usize>,
    weights: Vec<Mat>,
    biases: Vec<Vec<f64>>,
}

impl Net {
    fn init(sizes: &[usize], rng: &mut ChaCha8Rng) -> Net {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let scale = (2.0 / fan_in as f64).sqrt();
            let mut w = Mat::zeros(fan_out, fan_in);
            for r in 0..fan_out {
                for c in 0..fan_in {
                    let g: f64 = StandardNormal.sample(rng);
                    w[(r, c)] = scale * g;
                }
            }
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Net { sizes: sizes.to_vec(), weights, biases }
    }

    /// Forward pass keeping post-activation values per layer.
    fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let prev = &acts[l];
            let mut next = b.clone();
            for (row, slot) in (0..w.rows()).map(|r| w.row(r)).zip(next.iter_mut()) {
                *slot += crate::linalg::dot(row, prev);
            }
            if l < last {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            acts.push(next);
        }
        acts
    }

    /// Gradient of the per-sample loss with respect to all parameters,
    /// accumulated into `gw`/`gb`. Returns the sample loss.
    fn accumulate_gradient(
        &self,
        x: &[f64],
        label: Label,
        loss: &LossKind,
        class_weights: &[f64; 2],
        gw: &mut [Mat],
        gb: &mut [Vec<f64>],
    ) -> f64 {
        let acts = self.forward(x);
        let logits = acts.last().expect("forward output");
        let probs = softmax(logits);
        let t = label.as_u8() as usize;
        let p_t = probs[t].max(1e-12);

        // dL/dz for the softmax layer
        let (loss_value, mut delta) = match loss {
            LossKind::Focal(params) => {
                let one_m = 1.0 - p_t;
                let value = focal_loss(p_t, params);
                // dL/dp_t, then through the softmax Jacobian
                let dl_dp = -params.alpha
                    * (-params.gamma * one_m.powf(params.gamma - 1.0) * p_t.ln()
                        + one_m.powf(params.gamma) / p_t);
                let delta: Vec<f64> = (0..OUTPUT_NEURONS)
                    .map(|k| {
                        let dp_dz = p_t * (if k == t { 1.0 } else { 0.0 } - probs[k]);
                        dl_dp * dp_dz
                    })
                    .collect();
                (value, delta)
            }
            LossKind::BalancedBce => {
                let w = class_weights[t];
                let value = -w * p_t.ln();
                let delta: Vec<f64> = (0..OUTPUT_NEURONS)
                    .map(|k| w * (probs[k] - if k == t { 1.0 } else { 0.0 }))
                    .collect();
                (value, delta)
            }
        };

        for l in (0..self.weights.len()).rev() {
            let prev = &acts[l];
            for (r, &d) in delta.iter().enumerate() {
                gb[l][r] += d;
                let grow = gw[l].row_mut(r);
                for (slot, &a) in grow.iter_mut().zip(prev) {
                    *slot += d * a;
                }
            }
            if l > 0 {
                let mut next_delta = vec![0.0; self.sizes[l]];
                for (r, &d) in delta.iter().enumerate() {
                    let wrow = self.weights[l].row(r);
                    for (nd, &w) in next_delta.iter_mut().zip(wrow) {
                        *nd += d * w;
                    }
                }
                // ReLU gate
                for (nd, &a) in next_delta.iter_mut().zip(&acts[l]) {
                    if a <= 0.0 {
                        *nd = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
        loss_value
    }

    fn to_model(&self, convex: bool, meta: TrainingMeta) -> MlpModel {
        MlpModel {
            layer_sizes: self.sizes.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| (0..w.rows()).map(|r| w.row(r).to_vec()).collect())
                .collect(),
            biases: self.biases.clone(),
            convex_constrained: convex,
            training_meta: meta,
        }
    }
}

/// Adam state per parameter tensor.
struct Adam {
    m_w: Vec<Mat>,
    v_w: Vec<Mat>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    step: u64,
}

impl Adam {
    fn new(net: &Net) -> Adam {
        Adam {
            m_w: net.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect(),
            v_w: net.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect(),
            m_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            step: 0,
        }
    }

    fn update(&mut self, net: &mut Net, gw: &[Mat], gb: &[Vec<f64>], lr: f64, convex: bool) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.step += 1;
        let bc1 = 1.0 - B1.powi(self.step as i32);
        let bc2 = 1.0 - B2.powi(self.step as i32);
        for l in 0..net.weights.len() {
            for r in 0..net.weights[l].rows() {
                for c in 0..net.weights[l].cols() {
                    let g = gw[l][(r, c)];
                    let m = &mut self.m_w[l][(r, c)];
                    *m = B1 * *m + (1.0 - B1) * g;
                    let v = &mut self.v_w[l][(r, c)];
                    *v = B2 * *v + (1.0 - B2) * g * g;
                    let upd = lr * (*m / bc1) / ((*v / bc2).sqrt() + EPS);
                    let w = &mut net.weights[l][(r, c)];
                    *w -= upd;
                    // convexity: project every weight beyond the first affine
                    // layer onto the non-negative orthant
                    if convex && l > 0 && *w < 0.0 {
                        *w = 0.0;
                    }
                }
            }
            for r in 0..net.biases[l].len() {
                let g = gb[l][r];
                let m = &mut self.m_b[l][r];
                *m = B1 * *m + (1.0 - B1) * g;
                let v = &mut self.v_b[l][r];
                *v = B2 * *v + (1.0 - B2) * g * g;
                net.biases[l][r] -= lr * (*m / bc1) / ((*v / bc2).sqrt() + EPS);
            }
        }
    }
}

/// Train with multiple restarts, keeping the restart with the best
/// validation balanced accuracy.
///
/// Optimizer: adaptive moment estimation, learning rate 1e-3, batch 64, at
/// most 500 epochs with early stopping (patience 20) on the validation
/// balanced accuracy. The convex mode clamps negative weights of every
/// layer beyond the first to zero after each update, which keeps each logit
/// convex without constraining the input-space affine map.
pub fn train_mlp(
    train: &[LabelledPoint],
    validation: &[LabelledPoint],
    cfg: &MlpConfig,
) -> Result<MlpModel, MlError> {
    if train.is_empty() || validation.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let dim = train[0].b.coords().len();
    if dim != 4 && dim != 8 {
        return Err(MlError::DimensionMismatch { expected: 4, got: dim });
    }
    if cfg.restarts == 0 || cfg.restarts > 10 {
        return Err(MlError::BadConfig(format!("restarts {} not in 1..=10", cfg.restarts)));
    }
    let mut sizes = vec![dim];
    sizes.extend_from_slice(&HIDDEN_LAYERS);
    sizes.push(OUTPUT_NEURONS);

    // inverse class frequency weights for the balanced loss
    let n1 = train.iter().filter(|p| p.label == Label::Quantum).count();
    let n0 = train.len() - n1;
    let class_weights = [
        if n0 > 0 { train.len() as f64 / (2.0 * n0 as f64) } else { 1.0 },
        if n1 > 0 { train.len() as f64 / (2.0 * n1 as f64) } else { 1.0 },
    ];

    let mut best: Option<(f64, MlpModel)> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let (net, epochs, val_score) =
            train_single(&sizes, train, validation, cfg, &class_weights, &mut rng)?;
        if best.as_ref().is_none_or(|(b, _)| val_score > *b) {
            let meta = TrainingMeta {
                loss: cfg.loss,
                seed: cfg.seed,
                epochs_run: epochs,
                best_validation_score: val_score,
            };
            best = Some((val_score, net.to_model(cfg.convex, meta)));
        }
    }
    Ok(best.expect("at least one restart").1)
}

fn train_single(
    sizes: &[usize],
    train: &[LabelledPoint],
    validation: &[LabelledPoint],
    cfg: &MlpConfig,
    class_weights: &[f64; 2],
    rng: &mut ChaCha8Rng,
) -> Result<(Net, usize, f64), MlError> {
    let mut net = Net::init(sizes, rng);
    let mut adam = Adam::new(&net);
    if cfg.convex {
        for l in 1..net.weights.len() {
            for r in 0..net.weights[l].rows() {
                for c in 0..net.weights[l].cols() {
                    let w = &mut net.weights[l][(r, c)];
                    *w = w.abs();
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best_score = f64::NEG_INFINITY;
    let mut best_snapshot: Option<(Vec<Mat>, Vec<Vec<f64>>)> = None;
    let mut since_best = 0usize;
    let mut epochs_run = 0;

    for epoch in 0..cfg.max_epochs {
        epochs_run = epoch + 1;
        // deterministic shuffle per epoch
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut gw: Vec<Mat> =
            net.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect();
        let mut gb: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        for chunk in order.chunks(cfg.batch_size) {
            for g in gw.iter_mut() {
                g.scale(0.0);
            }
            for g in gb.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            let mut batch_loss = 0.0;
            for &idx in chunk {
                let p = &train[idx];
                batch_loss += net.accumulate_gradient(
                    p.b.coords(),
                    p.label,
                    &cfg.loss,
                    class_weights,
                    &mut gw,
                    &mut gb,
                );
            }
            if !batch_loss.is_finite() {
                return Err(MlError::DivergedLoss);
            }
            let scale = 1.0 / chunk.len() as f64;
            for g in gw.iter_mut() {
                g.scale(scale);
            }
            for g in gb.iter_mut() {
                g.iter_mut().for_each(|v| *v *= scale);
            }
            adam.update(&mut net, &gw, &gb, cfg.learning_rate, cfg.convex);
        }

        // early stopping on validation balanced accuracy
        let preds: Vec<Label> = validation
            .iter()
            .map(|p| {
                let probs = softmax(&net.forward(p.b.coords()).last().unwrap().clone());
                Label::from_bool(probs[1] >= probs[0])
            })
            .collect();
        let truth: Vec<Label> = validation.iter().map(|p| p.label).collect();
        let score = balanced_accuracy(&preds, &truth)?;
        if score > best_score {
            best_score = score;
            best_snapshot = Some((net.weights.clone(), net.biases.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if let Some((w, b)) = best_snapshot {
        net.weights = w;
        net.biases = b;
    }
    Ok((net, epochs_run, best_score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Space;
    use crate::sampling::{Method, PointMeta};
    use approx::assert_relative_eq;

    fn lp(coords: Vec<f64>, quantum: bool) -> LabelledPoint {
        LabelledPoint {
            b: Behaviour::new_unchecked(Space::Corr4, coords),
            label: Label::from_bool(quantum),
            meta: PointMeta {
                method: Method::Uniform,
                epsilon: None,
                sigma: None,
                seed: 0,
                oracle: "test".into(),
            },
        }
    }

    fn toy_split(n: usize, seed: u64) -> (Vec<LabelledPoint>, Vec<LabelledPoint>) {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gen = |rng: &mut ChaCha8Rng| {
            let c: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let label = c[0] > 0.0;
            lp(c, label)
        };
        let train: Vec<_> = (0..n).map(|_| gen(&mut rng)).collect();
        let val: Vec<_> = (0..n / 4).map(|_| gen(&mut rng)).collect();
        (train, val)
    }

    #[test]
    fn focal_loss_reference_values() {
        let params = FocalLossParams::default();
        assert_eq!(focal_loss(1.0, &params), 0.0);
        assert_relative_eq!(
            focal_loss(0.5, &params),
            0.01 * 0.25 * std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        // γ = 0, α = 1 reduces to plain cross entropy
        let ce = FocalLossParams { alpha: 1.0, gamma: 0.0 };
        assert_relative_eq!(focal_loss(0.3, &ce), -(0.3f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn balanced_bce_requires_both_classes() {
        let labels = vec![Label::Quantum; 5];
        assert!(matches!(
            balanced_bce(&[0.9, 0.8, 0.7, 0.9, 0.6], &labels),
            Err(MlError::SingleClassBatch)
        ));
        let labels = vec![Label::Quantum, Label::NotQuantum];
        let loss = balanced_bce(&[0.9, 0.1], &labels).unwrap();
        assert_relative_eq!(loss, -(0.9f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn softmax_normalises() {
        let p = softmax(&[0.3, -1.5]);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(p.iter().all(|&v| v > 0.0));
        // invariant under shifts
        let q = softmax(&[100.3, 98.5]);
        assert_relative_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sizes = [4usize, 6, 4, 2];
        for loss in [
            LossKind::Focal(FocalLossParams::default()),
            LossKind::BalancedBce,
        ] {
            let mut net = Net::init(&sizes, &mut rng);
            let weights = [0.7, 1.3];
            for _ in 0..10 {
                let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let label = Label::from_bool(rng.random::<bool>());
                for _ in 0..10 {
                    let l = rng.random_range(0..net.weights.len());
                    let r = rng.random_range(0..net.weights[l].rows());
                    let c = rng.random_range(0..net.weights[l].cols());

                    let mut gw: Vec<Mat> =
                        net.weights.iter().map(|w| Mat::zeros(w.rows(), w.cols())).collect();
                    let mut gb: Vec<Vec<f64>> =
                        net.biases.iter().map(|b| vec![0.0; b.len()]).collect();
                    net.accumulate_gradient(&x, label, &loss, &weights, &mut gw, &mut gb);
                    let analytic = gw[l][(r, c)];

                    let h = 1e-5;
                    let orig = net.weights[l][(r, c)];
                    net.weights[l][(r, c)] = orig + h;
                    let f_plus = sample_loss(&net, &x, label, &loss, &weights);
                    net.weights[l][(r, c)] = orig - h;
                    let f_minus = sample_loss(&net, &x, label, &loss, &weights);
                    net.weights[l][(r, c)] = orig;
                    let numeric = (f_plus - f_minus) / (2.0 * h);

                    let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                    assert!(
                        (analytic - numeric).abs() / denom <= 1e-4,
                        "{loss:?} grad mismatch at ({l},{r},{c}): {analytic} vs {numeric}"
                    );
                }
            }
        }
    }

    fn sample_loss(
        net: &Net,
        x: &[f64],
        label: Label,
        loss: &LossKind,
        weights: &[f64; 2],
    ) -> f64 {
        let acts = net.forward(x);
        let probs = softmax(acts.last().unwrap());
        let t = label.as_u8() as usize;
        match loss {
            LossKind::Focal(p) => focal_loss(probs[t], p),
            LossKind::BalancedBce => -weights[t] * probs[t].max(1e-12).ln(),
        }
    }

    #[test]
    fn trains_linearly_separable_toy_problem() {
        let (train, val) = toy_split(600, 21);
        let mut cfg = MlpConfig::new(LossKind::Focal(FocalLossParams::default()), 3);
        cfg.restarts = 2;
        cfg.max_epochs = 120;
        let model = train_mlp(&train, &val, &cfg).unwrap();
        let hits = val
            .iter()
            .filter(|p| model.predict(&p.b).unwrap().label == p.label)
            .count();
        assert!(
            hits as f64 / val.len() as f64 >= 0.99,
            "validation accuracy {hits}/{}",
            val.len()
        );
    }

    #[test]
    fn convex_mode_keeps_deep_weights_nonnegative() {
        let (train, val) = toy_split(300, 22);
        let mut cfg = MlpConfig::new(LossKind::BalancedBce, 4);
        cfg.convex = true;
        cfg.restarts = 1;
        cfg.max_epochs = 30;
        let model = train_mlp(&train, &val, &cfg).unwrap();
        for w in model.weights.iter().skip(1) {
            for row in w {
                for &v in row {
                    assert!(v >= 0.0, "negative deep weight {v} in convex mode");
                }
            }
        }
    }

    #[test]
    fn convex_model_has_convex_logits() {
        use rand::{Rng, SeedableRng};
        let (train, val) = toy_split(300, 23);
        let mut cfg = MlpConfig::new(LossKind::BalancedBce, 5);
        cfg.convex = true;
        cfg.restarts = 1;
        cfg.max_epochs = 30;
        let model = train_mlp(&train, &val, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let t: f64 = rng.random();
            let mid: Vec<f64> =
                x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let fx = model.logits(&x).unwrap();
            let fy = model.logits(&y).unwrap();
            let fm = model.logits(&mid).unwrap();
            for k in 0..OUTPUT_NEURONS {
                assert!(
                    fm[k] <= t * fx[k] + (1.0 - t) * fy[k] + 1e-9,
                    "logit {k} not convex"
                );
            }
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let (train, val) = toy_split(200, 24);
        let mut cfg = MlpConfig::new(LossKind::Focal(FocalLossParams::default()), 9);
        cfg.restarts = 2;
        cfg.max_epochs = 15;
        let m1 = train_mlp(&train, &val, &cfg).unwrap();
        let m2 = train_mlp(&train, &val, &cfg).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn rejects_bad_configs_and_dims() {
        let (train, val) = toy_split(50, 25);
        let mut cfg = MlpConfig::new(LossKind::BalancedBce, 1);
        cfg.restarts = 11;
        assert!(matches!(train_mlp(&train, &val, &cfg), Err(MlError::BadConfig(_))));
        let model = {
            let mut c2 = MlpConfig::new(LossKind::BalancedBce, 1);
            c2.restarts = 1;
            c2.max_epochs = 2;
            train_mlp(&train, &val, &c2).unwrap()
        };
        let b8 = Behaviour::origin(Space::Full8);
        assert!(matches!(
            model.predict(&b8),
            Err(MlError::DimensionMismatch { expected: 4, got: 8 })
        ));
    }
}
