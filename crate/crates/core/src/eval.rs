//! Evaluation suites: spread tests around the quantum boundary, 2D slice
//! grids and slice accuracies, Monte Carlo relative volumes, and aggregate
//! metric reports.

use crate::geometry::{self, Behaviour, Space};
use crate::ml::{self, TrainedModel};
use crate::npa::NpaLevel;
use crate::sampling::{self, Label, LabelledPoint, OracleError, SpreadConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Sampling(#[from] sampling::SamplingError),
    #[error(transparent)]
    Ml(#[from] ml::MlError),
    #[error("oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("slice basis is not orthonormal (|e1·e2| = {dot}, norms {n1}, {n2})")]
    BadBasis { dot: f64, n1: f64, n2: f64 },
    #[error("empty evaluation set")]
    Empty,
}

/// A membership decision function; models and analytic oracles both fit.
pub type Classifier<'a> = &'a (dyn Fn(&Behaviour) -> Result<bool, OracleError> + Sync);

/// Classifier from the analytic TLM test (correlation space, total on
/// points outside the correlator cube).
pub fn tlm_classifier(b: &Behaviour) -> Result<bool, OracleError> {
    Ok(geometry::corr4_quantum(&b.to_corr4()))
}

/// Classifier from the local polytope; errors outside non-signalling.
pub fn local_classifier(b: &Behaviour) -> Result<bool, OracleError> {
    Ok(geometry::local_membership(b)?)
}

/// Classifier from a trained model's raw prediction.
pub fn model_classifier(model: &TrainedModel) -> impl Fn(&Behaviour) -> Result<bool, OracleError> + Sync + '_ {
    move |b: &Behaviour| {
        model
            .predict(b)
            .map(|p| p.label == Label::Quantum)
            .map_err(|e| OracleError(e.to_string()))
    }
}

/// A 2D affine slice through behaviour space with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct SliceSpec {
    pub name: String,
    pub space: Space,
    pub origin: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub grid_resolution: usize,
    pub bounds: [[f64; 2]; 2],
}

impl SliceSpec {
    pub fn new(
        name: impl Into<String>,
        space: Space,
        origin: Vec<f64>,
        e1: Vec<f64>,
        e2: Vec<f64>,
        grid_resolution: usize,
        bounds: [[f64; 2]; 2],
    ) -> Result<SliceSpec, EvalError> {
        let dot = crate::linalg::dot(&e1, &e2).abs();
        let n1 = crate::linalg::norm2(&e1);
        let n2 = crate::linalg::norm2(&e2);
        if dot > 1e-12 || (n1 - 1.0).abs() > 1e-12 || (n2 - 1.0).abs() > 1e-12 {
            return Err(EvalError::BadBasis { dot, n1, n2 });
        }
        Ok(SliceSpec { name: name.into(), space, origin, e1, e2, grid_resolution, bounds })
    }

    pub fn point(&self, u: f64, v: f64) -> Behaviour {
        let coords: Vec<f64> = self
            .origin
            .iter()
            .zip(self.e1.iter().zip(&self.e2))
            .map(|(o, (a, b))| o + u * a + v * b)
            .collect();
        Behaviour::new_unchecked(self.space, coords)
    }
}

/// Correlation slice spanned by two orthogonal PR-box directions.
pub fn slice_pr_pair(grid_resolution: usize) -> SliceSpec {
    SliceSpec::new(
        "slice1",
        Space::Corr4,
        vec![0.0; 4],
        vec![0.5, 0.5, 0.5, -0.5],
        vec![-0.5, 0.5, 0.5, 0.5],
        grid_resolution,
        [[-2.0, 2.0], [-2.0, 2.0]],
    )
    .expect("orthonormal by construction")
}

/// Correlation slice with the first three correlators equal; the remaining
/// axis runs along ⟨A₁B₁⟩.
pub fn slice_three_equal(grid_resolution: usize) -> SliceSpec {
    let s3 = 3.0f64.sqrt();
    SliceSpec::new(
        "slice2",
        Space::Corr4,
        vec![0.0; 4],
        vec![1.0 / s3, 1.0 / s3, 1.0 / s3, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        grid_resolution,
        [[-s3, s3], [-1.0, 1.0]],
    )
    .expect("orthonormal by construction")
}

/// Full-space slice through the PR box with a marginal direction. This is a
/// documented stand-in: it exercises nonzero marginals but is not the
/// externally defined slice some plots in the literature use.
pub fn slice_full8_pr(grid_resolution: usize) -> SliceSpec {
    let s2 = 2.0f64.sqrt();
    SliceSpec::new(
        "full8pr",
        Space::Full8,
        vec![0.0; 8],
        vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, -0.5],
        vec![1.0 / s2, 1.0 / s2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        grid_resolution,
        [[-2.0, 2.0], [-s2, s2]],
    )
    .expect("orthonormal by construction")
}

/// One grid cell of a slice: `label` is None outside the non-signalling
/// polytope (marked and excluded from classification).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlicePoint {
    pub u: f64,
    pub v: f64,
    pub label: Option<u8>,
}

/// Classify every in-polytope grid point of the slice.
pub fn slice_grid(spec: &SliceSpec, classifier: Classifier) -> Result<Vec<SlicePoint>, EvalError> {
    let ns = geometry::ns_system(spec.space);
    let r = spec.grid_resolution.max(2);
    let coords: Vec<(f64, f64)> = (0..r)
        .flat_map(|i| {
            let u = spec.bounds[0][0]
                + (spec.bounds[0][1] - spec.bounds[0][0]) * i as f64 / (r - 1) as f64;
            (0..r).map(move |j| {
                let v = spec.bounds[1][0]
                    + (spec.bounds[1][1] - spec.bounds[1][0]) * j as f64 / (r - 1) as f64;
                (u, v)
            })
        })
        .collect();
    let cells = crate::exec::map(&coords, |&(u, v)| {
        let b = spec.point(u, v);
        if !ns.contains(b.coords(), 1e-12) {
            return Ok(SlicePoint { u, v, label: None });
        }
        let quantum = classifier(&b)?;
        Ok::<_, OracleError>(SlicePoint { u, v, label: Some(Label::from_bool(quantum).as_u8()) })
    });
    cells.into_iter().collect::<Result<Vec<_>, _>>().map_err(EvalError::from)
}

/// Fraction of in-polytope grid points where the model agrees with the
/// ground-truth oracle.
pub fn slice_accuracy(
    spec: &SliceSpec,
    model: Classifier,
    ground_truth: Classifier,
) -> Result<f64, EvalError> {
    let got = slice_grid(spec, model)?;
    let want = slice_grid(spec, ground_truth)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for (g, w) in got.iter().zip(&want) {
        if let (Some(a), Some(b)) = (g.label, w.label) {
            total += 1;
            if a == b {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(EvalError::Empty);
    }
    Ok(hits as f64 / total as f64)
}

/// Accuracy of a model against spread-sample labels at the given width.
pub fn spread_test(
    model: Classifier,
    space: Space,
    level: NpaLevel,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts =
        sampling::spread_sample(space, &SpreadConfig::new(sigma), level, n, seed, &mut rng)?;
    let preds = crate::exec::map(&pts, |p| model(&p.b));
    let mut hits = 0usize;
    for (p, pred) in pts.iter().zip(preds) {
        if Label::from_bool(pred?) == p.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / pts.len() as f64)
}

/// Region samplers for Monte Carlo volume estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Uniform over the non-signalling polytope of the space.
    NsUniform(Space),
    /// Uniform over the canonical non-local simplex (full space).
    Simplex,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeStats {
    pub ratio: f64,
    pub stderr: f64,
    pub mean_time_per_point: f64,
    pub n: usize,
}

/// Monte Carlo acceptance fraction of `oracle` over the region, with the
/// binomial standard error and the mean per-point oracle time.
pub fn volume_ratio(
    region: Region,
    oracle: Classifier,
    n: usize,
    seed: u64,
) -> Result<VolumeStats, EvalError> {
    if n == 0 {
        return Err(EvalError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Behaviour> = match region {
        Region::NsUniform(space) => {
            let sys = geometry::ns_system(space);
            let raw = sampling::hit_and_run(
                &sys,
                &vec![0.0; space.dim()],
                n,
                sampling::DEFAULT_THINNING,
                &mut rng,
            )?;
            raw.into_iter().map(|c| Behaviour::new_unchecked(space, c)).collect()
        }
        Region::Simplex => sampling::sample_simplex(n, &mut rng),
    };
    let start = Instant::now();
    let verdicts = crate::exec::map(&points, |b| oracle(b));
    let elapsed = start.elapsed().as_secs_f64();
    let mut inside = 0usize;
    for v in verdicts {
        if v? {
            inside += 1;
        }
    }
    let ratio = inside as f64 / n as f64;
    Ok(VolumeStats {
        ratio,
        stderr: (ratio * (1.0 - ratio) / n as f64).sqrt(),
        mean_time_per_point: elapsed / n as f64,
        n,
    })
}

/// Aggregate evaluation of a model: headline metrics on the test split and
/// any extra suites requested.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_suite: BTreeMap<String, f64>,
    pub runtime_seconds: f64,
}

/// Extra evaluation suites for [`full_report`].
#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    pub include_train: bool,
    pub unbalanced: Option<Vec<LabelledPoint>>,
    /// (sigma, n) pairs for spread tests at the given level.
    pub spreads: Vec<(f64, usize)>,
    pub spread_level: Option<NpaLevel>,
    /// (slice, ground truth name) pairs evaluated against the TLM oracle.
    pub slices: Vec<SliceSpec>,
    pub seed: u64,
}

pub fn full_report(
    model: &TrainedModel,
    data: &ml::SplitDataset,
    suites: &SuiteConfig,
) -> Result<EvalReport, EvalError> {
    let start = Instant::now();
    if data.test.is_empty() {
        return Err(EvalError::Empty);
    }
    let set_metrics = |points: &[LabelledPoint]| -> Result<(Vec<Label>, Vec<Label>), EvalError> {
        let preds = crate::exec::map(points, |p| model.predict(&p.b).map(|q| q.label));
        let preds: Result<Vec<Label>, _> = preds.into_iter().collect();
        Ok((preds?, points.iter().map(|p| p.label).collect()))
    };

    let (preds, truth) = set_metrics(&data.test)?;
    let mut per_suite = BTreeMap::new();
    if suites.include_train {
        let (tp, tt) = set_metrics(&data.train)?;
        per_suite.insert("train".to_string(), ml::accuracy(&tp, &tt));
    }
    if let Some(unbalanced) = &suites.unbalanced {
        let (up, ut) = set_metrics(unbalanced)?;
        per_suite.insert("unbalanced".to_string(), ml::accuracy(&up, &ut));
    }
    if let Some(level) = suites.spread_level {
        let space = if model.feature_dim() == 4 { Space::Corr4 } else { Space::Full8 };
        let mf = model_classifier(model);
        for &(sigma, n) in &suites.spreads {
            let acc = spread_test(&mf, space, level, sigma, n, suites.seed)?;
            per_suite.insert(format!("spread:{sigma}"), acc);
        }
    }
    for spec in &suites.slices {
        let mf = model_classifier(model);
        let acc = slice_accuracy(spec, &mf, &tlm_classifier)?;
        per_suite.insert(format!("slice:{}", spec.name), acc);
    }

    Ok(EvalReport {
        accuracy: ml::accuracy(&preds, &truth),
        balanced_accuracy: ml::balanced_accuracy(&preds, &truth).unwrap_or(f64::NAN),
        precision: ml::precision(&preds, &truth),
        recall: ml::recall(&preds, &truth),
        f1: ml::f1(&preds, &truth),
        per_suite,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
