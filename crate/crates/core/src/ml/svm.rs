//! RBF-kernel support vector machine trained by sequential minimal
//! optimization with second-order working-set selection and a bounded
//! kernel-row cache.

use super::{MlError, Prediction};
use crate::geometry::Behaviour;
use crate::sampling::{Label, LabelledPoint};
use serde::{Deserialize, Serialize};

/// Working-set selection tolerance: training stops once the maximal KKT
/// violation drops below this.
pub const KKT_TOL: f64 = 1e-3;

/// Fitted SVM: decision function `f(x) = Σ coef_i K(sv_i, x) + bias` with
/// `coef_i = α_i y_i` and the RBF kernel `exp(-γ ‖x − z‖²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel_gamma: f64,
    pub c: f64,
    pub feature_dim: usize,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64, MlError> {
        if x.len() != self.feature_dim {
            return Err(MlError::DimensionMismatch { expected: self.feature_dim, got: x.len() });
        }
        let mut f = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coefficients) {
            f += coef * rbf(self.kernel_gamma, sv, x);
        }
        Ok(f)
    }

    pub fn predict(&self, b: &Behaviour) -> Result<Prediction, MlError> {
        let f = self.decision(b.coords())?;
        Ok(Prediction { label: Label::from_bool(f >= 0.0), score: f })
    }
}

#[inline]
fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Hyperparameter grid for the validation search.
#[derive(Debug, Clone)]
pub struct SvmGrid {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
}

impl Default for SvmGrid {
    fn default() -> Self {
        SvmGrid {
            c_values: vec![0.1, 1.0, 10.0, 100.0, 1000.0],
            gamma_values: vec![0.01, 0.1, 1.0, 10.0],
        }
    }
}

/// Train one SVM per grid cell and keep the validation-accuracy maximiser
/// (ties resolved by grid order).
pub fn train_svm(
    train: &[LabelledPoint],
    validation: &[LabelledPoint],
    grid: &SvmGrid,
) -> Result<SvmModel, MlError> {
    if train.is_empty() || validation.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let cells: Vec<(f64, f64)> = grid
        .c_values
        .iter()
        .flat_map(|&c| grid.gamma_values.iter().map(move |&g| (c, g)))
        .collect();
    if cells.is_empty() {
        return Err(MlError::EmptyGrid);
    }
    let fits = crate::exec::map(&cells, |&(c, gamma)| {
        let model = smo_train(train, c, gamma)?;
        let mut hits = 0usize;
        for p in validation {
            if model.predict(&p.b)?.label == p.label {
                hits += 1;
            }
        }
        Ok::<_, MlError>((model, hits))
    });
    let mut best: Option<(SvmModel, usize)> = None;
    for fit in fits {
        let (model, hits) = fit?;
        if best.as_ref().is_none_or(|(_, h)| hits > *h) {
            best = Some((model, hits));
        }
    }
    Ok(best.expect("at least one grid cell").0)
}

/// Sequential minimal optimization on the dual problem
/// `min ½ αᵀQα − Σα, 0 ≤ α ≤ C, Σ y_i α_i = 0` with `Q_ij = y_i y_j K_ij`.
pub fn smo_train(points: &[LabelledPoint], c: f64, gamma: f64) -> Result<SvmModel, MlError> {
    let n = points.len();
    if n < 2 {
        return Err(MlError::EmptyDataset);
    }
    let dim = points[0].b.coords().len();
    let x: Vec<&[f64]> = points.iter().map(|p| p.b.coords()).collect();
    let y: Vec<f64> = points
        .iter()
        .map(|p| if p.label == Label::Quantum { 1.0 } else { -1.0 })
        .collect();

    let mut cache = RowCache::new(n, gamma);
    let mut alpha = vec![0.0f64; n];
    // gradient of the dual objective; at α = 0 this is the linear term
    let mut grad = vec![-1.0f64; n];

    let max_iter = 200_000.max(50 * n);
    let mut converged = false;
    for _ in 0..max_iter {
        // first index: maximal -y·grad over I_up
        let mut i_best = usize::MAX;
        let mut m_up = f64::NEG_INFINITY;
        for t in 0..n {
            let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            if up {
                let v = -y[t] * grad[t];
                if v > m_up {
                    m_up = v;
                    i_best = t;
                }
            }
        }
        if i_best == usize::MAX {
            break;
        }
        let k_i = cache.row(i_best, &x).to_vec();
        let k_ii = k_i[i_best];

        // second index: most negative second-order gain among violators
        let mut j_best = usize::MAX;
        let mut obj_best = f64::INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let low = (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
            if !low {
                continue;
            }
            let v = -y[t] * grad[t];
            m_low = m_low.min(v);
            let b_t = m_up - v;
            if b_t > 0.0 {
                let k_tt = cache.diag(t, &x);
                let quad = (k_ii + k_tt - 2.0 * y[i_best] * y[t] * k_i[t]).max(1e-12);
                let gain = -(b_t * b_t) / quad;
                if gain < obj_best {
                    obj_best = gain;
                    j_best = t;
                }
            }
        }
        if m_up - m_low <= KKT_TOL || j_best == usize::MAX {
            converged = true;
            break;
        }
        let (i, j) = (i_best, j_best);
        let k_j = cache.row(j, &x).to_vec();
        let quad = (k_i[i] + k_j[j] - 2.0 * y[i] * y[j] * k_i[j]).max(1e-12);
        let old_ai = alpha[i];
        let old_aj = alpha[j];

        if (y[i] - y[j]).abs() > 0.5 {
            // opposite labels
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if diff <= 0.0 && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if alpha[i] > c {
                alpha[j] -= alpha[i] - c;
                alpha[i] = c;
            }
            if alpha[j] > c {
                alpha[i] -= alpha[j] - c;
                alpha[j] = c;
            }
        } else {
            // same label
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c && alpha[i] > c {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if sum <= c && alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c && alpha[j] > c {
                alpha[j] = c;
                alpha[i] = sum - c;
            } else if sum <= c && alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_ai = alpha[i] - old_ai;
        let d_aj = alpha[j] - old_aj;
        if d_ai.abs() < 1e-15 && d_aj.abs() < 1e-15 {
            converged = true;
            break;
        }
        for t in 0..n {
            grad[t] += y[t] * (y[i] * d_ai * k_i[t] + y[j] * d_aj * k_j[t]);
        }
    }
    if !converged {
        return Err(MlError::MaxPasses);
    }

    // bias from the free support vectors; midpoint of the violation bounds
    // when none are strictly free
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..n {
        if alpha[t] > 1e-9 && alpha[t] < c - 1e-9 {
            free_sum += -y[t] * grad[t];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0) {
                m_up = m_up.max(v);
            }
            if (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0) {
                m_low = m_low.min(v);
            }
        }
        0.5 * (m_up + m_low)
    };

    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 1e-12 {
            support_vectors.push(x[t].to_vec());
            dual_coefficients.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel { support_vectors, dual_coefficients, bias, kernel_gamma: gamma, c, feature_dim: dim })
}

/// Maximal KKT violation `m(α) − M(α)` of a trained model re-evaluated on
/// its training set; test hook for the convergence contract.
pub fn kkt_violation(model: &SvmModel, points: &[LabelledPoint]) -> Result<f64, MlError> {
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for p in points {
        let y = if p.label == Label::Quantum { 1.0 } else { -1.0 };
        let f = model.decision(p.b.coords())?;
        // recover α for this point if it is a support vector
        let alpha = model
            .support_vectors
            .iter()
            .zip(&model.dual_coefficients)
            .find(|(sv, _)| sv.as_slice() == p.b.coords())
            .map(|(_, &c)| c * y)
            .unwrap_or(0.0);
        let grad = y * (f - model.bias) - 1.0;
        let v = -y * grad;
        if (y > 0.0 && alpha < model.c - 1e-9) || (y < 0.0 && alpha > 1e-9) {
            m_up = m_up.max(v);
        }
        if (y < 0.0 && alpha < model.c - 1e-9) || (y > 0.0 && alpha > 1e-9) {
            m_low = m_low.min(v);
        }
    }
    Ok(m_up - m_low)
}

/// Lazily filled kernel-row cache with a fixed capacity and least-recently
/// used eviction.
struct RowCache {
    gamma: f64,
    n: usize,
    rows: Vec<Option<(u64, Vec<f64>)>>,
    capacity: usize,
    stored: usize,
    clock: u64,
}

impl RowCache {
    fn new(n: usize, gamma: f64) -> Self {
        let capacity = (64 * 1024 * 1024 / (8 * n.max(1))).clamp(64, n.max(64));
        RowCache { gamma, n, rows: vec![None; n], capacity, stored: 0, clock: 0 }
    }

    fn diag(&mut self, _t: usize, _x: &[&[f64]]) -> f64 {
        // RBF kernel: K(x, x) = 1
        1.0
    }

    fn row(&mut self, i: usize, x: &[&[f64]]) -> &[f64] {
        self.clock += 1;
        if self.rows[i].is_none() {
            if self.stored >= self.capacity {
                // evict the least recently used row
                let victim = self
                    .rows
                    .iter()
                    .enumerate()
                    .filter_map(|(k, r)| r.as_ref().map(|(stamp, _)| (*stamp, k)))
                    .min()
                    .map(|(_, k)| k);
                if let Some(v) = victim {
                    self.rows[v] = None;
                    self.stored -= 1;
                }
            }
            let row: Vec<f64> = (0..self.n).map(|t| rbf(self.gamma, x[i], x[t])).collect();
            self.rows[i] = Some((self.clock, row));
            self.stored += 1;
        } else if let Some(entry) = self.rows[i].as_mut() {
            entry.0 = self.clock;
        }
        &self.rows[i].as_ref().expect("just inserted").1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Space;
    use crate::sampling::{Method, PointMeta};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    /// XOR-style checkerboard in the first two coordinates.
    fn xor_data(n: usize, seed: u64) -> Vec<LabelledPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let a = rng.random::<f64>() * 2.0 - 1.0;
                let b = rng.random::<f64>() * 2.0 - 1.0;
                lp(vec![a, b, 0.0, 0.0], (a * b) >= 0.0)
            })
            .collect()
    }

    #[test]
    fn smo_solves_xor_pattern() {
        let data = xor_data(300, 3);
        let model = smo_train(&data, 10.0, 1.0).unwrap();
        let hits = data
            .iter()
            .filter(|p| model.predict(&p.b).unwrap().label == p.label)
            .count();
        assert!(hits as f64 / data.len() as f64 >= 0.95, "train accuracy {hits}/300");
    }

    #[test]
    fn smo_satisfies_kkt_and_dual_constraints() {
        let data = xor_data(200, 4);
        let model = smo_train(&data, 5.0, 2.0).unwrap();
        // Σ α_i y_i = 0 within tolerance (signed coefficients sum to zero)
        let signed_sum: f64 = model.dual_coefficients.iter().sum();
        assert!(signed_sum.abs() < 1e-9, "Σ α y = {signed_sum}");
        // box constraint
        for &coef in &model.dual_coefficients {
            assert!(coef.abs() <= model.c + 1e-12);
        }
        let viol = kkt_violation(&model, &data).unwrap();
        assert!(viol <= KKT_TOL + 1e-9, "KKT violation {viol}");
    }

    #[test]
    fn free_support_vectors_sit_on_the_margin() {
        let data = xor_data(200, 5);
        let model = smo_train(&data, 5.0, 2.0).unwrap();
        let mut checked = 0;
        for (sv, &coef) in model.support_vectors.iter().zip(&model.dual_coefficients) {
            let alpha = coef.abs();
            if alpha > 1e-6 && alpha < model.c - 1e-6 {
                let y = coef.signum();
                let f = model.decision(sv).unwrap();
                assert!((y * f - 1.0).abs() < 5e-3, "free SV margin y·f = {}", y * f);
                checked += 1;
            }
        }
        assert!(checked > 0, "expected at least one free support vector");
    }

    #[test]
    fn grid_search_picks_a_working_cell() {
        let train = xor_data(300, 6);
        let val = xor_data(120, 7);
        let grid = SvmGrid { c_values: vec![0.1, 10.0], gamma_values: vec![0.05, 2.0] };
        let model = train_svm(&train, &val, &grid).unwrap();
        let hits =
            val.iter().filter(|p| model.predict(&p.b).unwrap().label == p.label).count();
        assert!(hits as f64 / val.len() as f64 >= 0.9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let data = xor_data(50, 8);
        let model = smo_train(&data, 1.0, 1.0).unwrap();
        let b8 = Behaviour::origin(Space::Full8);
        assert!(matches!(
            model.predict(&b8),
            Err(MlError::DimensionMismatch { expected: 4, got: 8 })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let data = xor_data(150, 9);
        let m1 = smo_train(&data, 5.0, 1.0).unwrap();
        let m2 = smo_train(&data, 5.0, 1.0).unwrap();
        assert_eq!(m1, m2);
    }
}
