//! From-scratch classifiers for the quantum-membership problem: an
//! RBF-kernel SVM trained by sequential minimal optimization and a dense
//! multilayer perceptron, plus dataset splitting, binary metrics and the
//! symmetry-reduced composite predictor for the full scenario.

pub mod mlp;
pub mod svm;

pub use mlp::{
    balanced_bce, focal_loss, train_mlp, FocalLossParams, LossKind, MlpConfig, MlpModel,
};
pub use svm::{train_svm, SvmGrid, SvmModel};

use crate::geometry::{self, Behaviour, GeometryError};
use crate::sampling::{Label, LabelledPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("batch contains a single class")]
    SingleClassBatch,
    #[error("loss diverged to a non-finite value")]
    DivergedLoss,
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("SMO failed to satisfy the KKT conditions within the pass budget")]
    MaxPasses,
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Classifier output: the label and a monotone score (class-1 probability
/// for the MLP, signed margin for the SVM).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

/// A trained classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Svm(SvmModel),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn feature_dim(&self) -> usize {
        match self {
            TrainedModel::Svm(m) => m.feature_dim,
            TrainedModel::Mlp(m) => m.feature_dim(),
        }
    }

    pub fn predict(&self, b: &Behaviour) -> Result<Prediction, MlError> {
        match self {
            TrainedModel::Svm(m) => m.predict(b),
            TrainedModel::Mlp(m) => m.predict(b),
        }
    }
}

/// Train/validation/test partition with recorded proportions.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Vec<LabelledPoint>,
    pub validation: Vec<LabelledPoint>,
    pub test: Vec<LabelledPoint>,
    pub proportions: (f64, f64, f64),
}

impl SplitDataset {
    /// Deterministic shuffled split; default proportions are 70/15/15 for
    /// train/validation/test.
    pub fn split(points: Vec<LabelledPoint>, seed: u64) -> SplitDataset {
        Self::split_with(points, (0.70, 0.15, 0.15), seed)
    }

    pub fn split_with(
        mut points: Vec<LabelledPoint>,
        proportions: (f64, f64, f64),
        seed: u64,
    ) -> SplitDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..points.len()).rev() {
            let j = rng.random_range(0..=i);
            points.swap(i, j);
        }
        let n = points.len();
        let n_train = (proportions.0 * n as f64).round() as usize;
        let n_val = (proportions.1 * n as f64).round() as usize;
        let n_train = n_train.min(n);
        let n_val = n_val.min(n - n_train);
        let test = points.split_off(n_train + n_val);
        let validation = points.split_off(n_train);
        SplitDataset { train: points, validation, test, proportions }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Binary confusion counts in the order (true positive, false positive,
/// true negative, false negative), with Quantum as the positive class.
pub fn confusion(preds: &[Label], truth: &[Label]) -> (usize, usize, usize, usize) {
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fnn = 0;
    for (&p, &t) in preds.iter().zip(truth) {
        match (p, t) {
            (Label::Quantum, Label::Quantum) => tp += 1,
            (Label::Quantum, Label::NotQuantum) => fp += 1,
            (Label::NotQuantum, Label::NotQuantum) => tn += 1,
            (Label::NotQuantum, Label::Quantum) => fnn += 1,
        }
    }
    (tp, fp, tn, fnn)
}

pub fn accuracy(preds: &[Label], truth: &[Label]) -> f64 {
    if preds.is_empty() {
        return 0.0;
    }
    let (tp, _, tn, _) = confusion(preds, truth);
    (tp + tn) as f64 / preds.len() as f64
}

/// Mean of the two class recalls. Errors when a class is absent.
pub fn balanced_accuracy(preds: &[Label], truth: &[Label]) -> Result<f64, MlError> {
    let (tp, fp, tn, fnn) = confusion(preds, truth);
    let pos = tp + fnn;
    let neg = tn + fp;
    if pos == 0 || neg == 0 {
        return Err(MlError::SingleClassBatch);
    }
    Ok(0.5 * (tp as f64 / pos as f64 + tn as f64 / neg as f64))
}

pub fn precision(preds: &[Label], truth: &[Label]) -> f64 {
    let (tp, fp, _, _) = confusion(preds, truth);
    if tp + fp == 0 {
        return 0.0;
    }
    tp as f64 / (tp + fp) as f64
}

pub fn recall(preds: &[Label], truth: &[Label]) -> f64 {
    let (tp, _, _, fnn) = confusion(preds, truth);
    if tp + fnn == 0 {
        return 0.0;
    }
    tp as f64 / (tp + fnn) as f64
}

pub fn f1(preds: &[Label], truth: &[Label]) -> f64 {
    let p = precision(preds, truth);
    let r = recall(preds, truth);
    if p + r == 0.0 {
        return 0.0;
    }
    2.0 * p * r / (p + r)
}

/// Composite predictor for the full scenario: a behaviour satisfying every
/// local constraint is quantum; otherwise it is mapped into the canonical
/// non-local simplex by the relabelling symmetry that maximises the CHSH
/// value, and the simplex-trained model decides.
pub fn composite_full8_predict(model: &TrainedModel, b: &Behaviour) -> Result<Label, MlError> {
    if geometry::local_membership(b)? {
        return Ok(Label::Quantum);
    }
    let (variant, _) = geometry::max_chsh_variant(b);
    let canonical = geometry::relabel(b, variant);
    Ok(model.predict(&canonical)?.label)
}

/// Small deterministic model + dataset for cross-module tests.
#[cfg(test)]
pub fn smo_like_test_model() -> (TrainedModel, Vec<LabelledPoint>) {
    use crate::geometry::Space;
    use crate::sampling::{Method, PointMeta};
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let points: Vec<LabelledPoint> = (0..300)
        .map(|_| {
            let coords: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let label = Label::from_bool(coords[0] > 0.0);
            LabelledPoint {
                b: Behaviour::new_unchecked(Space::Corr4, coords),
                label,
                meta: PointMeta {
                    method: Method::Uniform,
                    epsilon: None,
                    sigma: None,
                    seed: 404,
                    oracle: "test".into(),
                },
            }
        })
        .collect();
    let model = TrainedModel::Svm(svm::smo_train(&points, 10.0, 1.0).expect("training"));
    (model, points)
}
