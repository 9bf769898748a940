//! Dataset generation: uniform hit-and-run sampling over the non-signalling
//! polytope (unbalanced or class-balanced), the non-local simplex sampler,
//! boundary-offset pair generation, direction filtering, and the shell/spread
//! sampler used by the spread test.

use crate::geometry::{self, Behaviour, ChshVariant, GeometryError, HalfspaceSystem, Space};
use crate::linalg::norm2;
use crate::npa::{self, NpaError, NpaLevel};
use rand::Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Hit-and-run steps discarded before the first emitted point.
pub const BURN_IN: usize = 1000;
/// Default chord steps between emitted points.
pub const DEFAULT_THINNING: usize = 50;
/// Default relative thickness of the boundary harvesting shell.
pub const DEFAULT_SHELL_THICKNESS: f64 = 0.01;
/// Smallest admissible boundary-pair offset; below this the paired points
/// are no longer reliably separated by the level oracle.
pub const MIN_EPSILON: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum SamplingError {
    #[error("hit-and-run start point is not strictly interior (slack {0})")]
    StartNotInterior(f64),
    #[error("balanced sampling requires an even count, got {0}")]
    OddBalancedCount(usize),
    #[error("offset epsilon {0} below the minimum {MIN_EPSILON}")]
    EpsilonTooSmall(f64),
    #[error("spread sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Npa(#[from] NpaError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Error surfaced by a membership oracle closure.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct OracleError(pub String);

impl From<GeometryError> for OracleError {
    fn from(e: GeometryError) -> Self {
        OracleError(e.to_string())
    }
}

impl From<NpaError> for OracleError {
    fn from(e: NpaError) -> Self {
        OracleError(e.to_string())
    }
}

/// Binary class of a point: inside the quantum set (1) or not (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Quantum,
    NotQuantum,
}

impl Label {
    pub fn from_bool(quantum: bool) -> Self {
        if quantum {
            Label::Quantum
        } else {
            Label::NotQuantum
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Quantum => 1,
            Label::NotQuantum => 0,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(Label::Quantum),
            0 => Some(Label::NotQuantum),
            _ => None,
        }
    }
}

/// How a labelled point was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Uniform,
    Balanced,
    Offset,
    Spread,
    Simplex,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Uniform => "uniform",
            Method::Balanced => "balanced",
            Method::Offset => "offset",
            Method::Spread => "spread",
            Method::Simplex => "simplex",
        };
        f.write_str(s)
    }
}

/// Provenance carried by every generated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub method: Method,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub seed: u64,
    /// Which oracle produced the label ("tlm", "local", "npa:1ab", ...).
    pub oracle: String,
}

/// A behaviour with its binary class and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledPoint {
    pub b: Behaviour,
    pub label: Label,
    pub meta: PointMeta,
}

/// Boundary-offset pair configuration.
#[derive(Debug, Clone, Copy)]
pub struct OffsetConfig {
    pub epsilon: f64,
    pub level: NpaLevel,
}

impl OffsetConfig {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.epsilon < MIN_EPSILON {
            return Err(SamplingError::EpsilonTooSmall(self.epsilon));
        }
        Ok(())
    }
}

/// Spread sampler configuration.
#[derive(Debug, Clone, Copy)]
pub struct SpreadConfig {
    /// Standard deviation of the multiplicative normal shift.
    pub sigma: f64,
    /// Relative shell thickness for boundary harvesting.
    pub shell_thickness: f64,
}

impl SpreadConfig {
    pub fn new(sigma: f64) -> Self {
        SpreadConfig { sigma, shell_thickness: DEFAULT_SHELL_THICKNESS }
    }
}

// ---------------------------------------------------------------------------
// hit-and-run
// ---------------------------------------------------------------------------

/// Uniform sampling in the polytope `sys` by the hit-and-run random walk:
/// from the current point, pick an isotropic direction, intersect the chord
/// with every facet and jump to a uniform point on it. `thinning` chord steps
/// separate consecutive outputs; [`BURN_IN`] steps are discarded up front.
pub fn hit_and_run<R: Rng>(
    sys: &HalfspaceSystem,
    start: &[f64],
    n: usize,
    thinning: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>, SamplingError> {
    let slack = sys.min_slack(start);
    if slack <= 0.0 {
        return Err(SamplingError::StartNotInterior(slack));
    }
    let dim = sys.dim();
    let mut x = start.to_vec();
    let mut out = Vec::with_capacity(n);
    let step = |x: &mut Vec<f64>, rng: &mut R| {
        let u = random_direction(dim, rng);
        let (lo, hi) = chord_range(sys, x, &u);
        let t = lo + (hi - lo) * rng.random::<f64>();
        for (xi, ui) in x.iter_mut().zip(&u) {
            *xi += t * ui;
        }
    };
    for _ in 0..BURN_IN {
        step(&mut x, rng);
    }
    for _ in 0..n {
        for _ in 0..thinning.max(1) {
            step(&mut x, rng);
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Parameter range of the chord `{x + t·u}` inside the polytope.
pub fn chord_range(sys: &HalfspaceSystem, x: &[f64], u: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (normal, &offset) in sys.normals().iter().zip(sys.offsets()) {
        let denom = crate::linalg::dot(normal, u);
        if denom.abs() < 1e-300 {
            continue;
        }
        let t = (offset - crate::linalg::dot(normal, x)) / denom;
        if denom > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
    }
    (lo, hi)
}

/// Isotropic unit vector via a normalized Gaussian draw.
pub fn random_direction<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

// ---------------------------------------------------------------------------
// labelled samplers
// ---------------------------------------------------------------------------

/// Uniform points in the non-signalling polytope labelled by `oracle`.
/// Balanced mode keeps accumulating until each class holds exactly `n/2`
/// points, discarding surplus points of the already-full class.
pub fn sample_uniform<R, F>(
    space: Space,
    n: usize,
    oracle: F,
    oracle_name: &str,
    balanced: bool,
    seed: u64,
    rng: &mut R,
) -> Result<Vec<LabelledPoint>, SamplingError>
where
    R: Rng,
    F: Fn(&Behaviour) -> Result<bool, OracleError> + Sync,
{
    let sys = geometry::ns_system(space);
    let origin = vec![0.0; space.dim()];
    let method = if balanced { Method::Balanced } else { Method::Uniform };
    let meta = PointMeta {
        method,
        epsilon: None,
        sigma: None,
        seed,
        oracle: oracle_name.to_string(),
    };

    if !balanced {
        let raw = hit_and_run(&sys, &origin, n, DEFAULT_THINNING, rng)?;
        let behaviours: Vec<Behaviour> =
            raw.into_iter().map(|c| Behaviour::new_unchecked(space, c)).collect();
        let labels = crate::exec::map(&behaviours, |b| oracle(b));
        let mut out = Vec::with_capacity(n);
        for (b, l) in behaviours.into_iter().zip(labels) {
            let label = Label::from_bool(l?);
            out.push(LabelledPoint { b, label, meta: meta.clone() });
        }
        return Ok(out);
    }

    if n % 2 != 0 {
        return Err(SamplingError::OddBalancedCount(n));
    }
    let per_class = n / 2;
    let mut quantum = Vec::with_capacity(per_class);
    let mut rest = Vec::with_capacity(per_class);
    let chunk = 256;
    while quantum.len() < per_class || rest.len() < per_class {
        let raw = hit_and_run(&sys, &origin, chunk, DEFAULT_THINNING, rng)?;
        let behaviours: Vec<Behaviour> =
            raw.into_iter().map(|c| Behaviour::new_unchecked(space, c)).collect();
        let labels = crate::exec::map(&behaviours, |b| oracle(b));
        for (b, l) in behaviours.into_iter().zip(labels) {
            let label = Label::from_bool(l?);
            let bucket = match label {
                Label::Quantum => &mut quantum,
                Label::NotQuantum => &mut rest,
            };
            if bucket.len() < per_class {
                bucket.push(LabelledPoint { b, label, meta: meta.clone() });
            }
        }
    }
    // interleave deterministically: quantum then rest, in generation order
    quantum.extend(rest);
    Ok(quantum)
}

/// The eight deterministic local vertices saturating the canonical CHSH
/// facet, followed by the PR box: the vertex set of the non-local simplex.
pub fn simplex_vertices() -> Vec<Behaviour> {
    let mut verts: Vec<Behaviour> = Behaviour::deterministic_vertices()
        .into_iter()
        .filter(|v| (geometry::chsh_value(v, ChshVariant::canonical()) - 2.0).abs() < 1e-12)
        .collect();
    debug_assert_eq!(verts.len(), 8);
    verts.push(Behaviour::pr_box());
    verts
}

/// Uniform points in the 8-simplex spanned by the saturating local vertices
/// and the PR box, via flat Dirichlet weights.
pub fn sample_simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<Behaviour> {
    let verts = simplex_vertices();
    let dirichlet = Dirichlet::<f64, 9>::new([1.0; 9]).expect("valid parameters");
    (0..n)
        .map(|_| {
            let w: [f64; 9] = dirichlet.sample(rng);
            mix(&verts, &w)
        })
        .collect()
}

fn mix(verts: &[Behaviour], weights: &[f64]) -> Behaviour {
    let mut coords = vec![0.0; 8];
    for (v, &w) in verts.iter().zip(weights) {
        for (c, vc) in coords.iter_mut().zip(v.coords()) {
            *c += w * vc;
        }
    }
    Behaviour::new_unchecked(Space::Full8, coords)
}

// ---------------------------------------------------------------------------
// direction filtering
// ---------------------------------------------------------------------------

/// Facets of the local polytope: the 16 positivity facets followed by the
/// 8 CHSH facets (offset 2), canonical variant first among the latter.
fn local_facets() -> HalfspaceSystem {
    let ns = geometry::ns_system(Space::Full8);
    let mut normals = ns.normals().to_vec();
    let mut offsets = ns.offsets().to_vec();
    for v in ChshVariant::all() {
        let mut n = vec![0.0; 8];
        n[4..].copy_from_slice(&v.coefficients());
        normals.push(n);
        offsets.push(2.0);
    }
    HalfspaceSystem::new(normals, offsets)
}

/// Index of the canonical CHSH facet in [`local_facets`].
const CANONICAL_FACET: usize = 16;

/// Keep only directions whose ray from the origin exits the local polytope
/// through the canonical CHSH facet.
pub fn filter_to_facet(dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let facets = local_facets();
    let keep = crate::exec::map(dirs, |u| ray_exits_through_canonical(&facets, u));
    dirs.iter()
        .zip(keep)
        .filter_map(|(u, k)| if k { Some(u.clone()) } else { None })
        .collect()
}

fn ray_exits_through_canonical(facets: &HalfspaceSystem, u: &[f64]) -> bool {
    let mut best_t = f64::INFINITY;
    let mut best_idx = usize::MAX;
    for (idx, (normal, &offset)) in facets.normals().iter().zip(facets.offsets()).enumerate() {
        let denom = crate::linalg::dot(normal, u);
        if denom > 1e-15 {
            let t = offset / denom;
            if t < best_t {
                best_t = t;
                best_idx = idx;
            }
        }
    }
    best_idx == CANONICAL_FACET
}

/// Draw isotropic directions until `n` of them pass [`filter_to_facet`].
pub fn sample_facet_directions<R: Rng>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let facets = local_facets();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = random_direction(8, rng);
        if ray_exits_through_canonical(&facets, &u) {
            out.push(u);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// boundary pairs and the spread sampler
// ---------------------------------------------------------------------------

/// Boundary training pair along `u`: find the boundary point of the level's
/// relaxation on the ray, then offset it in and out by `1 ∓ ε`. The inner
/// point is labelled quantum, the outer one not; an outer point leaving the
/// non-signalling polytope keeps its label (it is outside the quantum set a
/// fortiori).
pub fn boundary_pair(
    u: &[f64],
    cfg: &OffsetConfig,
    seed: u64,
) -> Result<(LabelledPoint, LabelledPoint), SamplingError> {
    cfg.validate()?;
    let space = if u.len() == 4 { Space::Corr4 } else { Space::Full8 };
    let ub = Behaviour::new_unchecked(space, u.to_vec());
    let lambda = npa::max_lambda(&ub, cfg.level)?;
    let meta = PointMeta {
        method: Method::Offset,
        epsilon: Some(cfg.epsilon),
        sigma: None,
        seed,
        oracle: format!("npa:{}", cfg.level),
    };
    let inner = ub.scaled(lambda * (1.0 - cfg.epsilon));
    let outer = ub.scaled(lambda * (1.0 + cfg.epsilon));
    Ok((
        LabelledPoint { b: inner, label: Label::Quantum, meta: meta.clone() },
        LabelledPoint { b: outer, label: Label::NotQuantum, meta },
    ))
}

/// Spread sample: harvest boundary points whose directions are distributed
/// like the uniform measure on a thin shell around the level's boundary,
/// then shift each multiplicatively by `1 + N(0, σ)`. The label records the
/// sign of the draw (negative = inside).
///
/// Shell harvesting is rejection from uniform non-signalling samples: a
/// point `x` is kept when its radius is within `shell_thickness` of the
/// boundary radius along `x`'s own direction.
pub fn spread_sample<R: Rng>(
    space: Space,
    cfg: &SpreadConfig,
    level: NpaLevel,
    n: usize,
    seed: u64,
    rng: &mut R,
) -> Result<Vec<LabelledPoint>, SamplingError> {
    if cfg.sigma <= 0.0 {
        return Err(SamplingError::BadSigma(cfg.sigma));
    }
    let sys = geometry::ns_system(space);
    let origin = vec![0.0; space.dim()];
    let mut out = Vec::with_capacity(n);
    let chunk = 512;
    while out.len() < n {
        let raw = hit_and_run(&sys, &origin, chunk, DEFAULT_THINNING, rng)?;
        // boundary radius along each candidate's direction, in parallel
        let lambdas = crate::exec::map(&raw, |x| {
            let r = norm2(x);
            if r < 1e-9 {
                return Ok(None);
            }
            let u: Vec<f64> = x.iter().map(|c| c / r).collect();
            let lam = npa::max_lambda(&Behaviour::new_unchecked(space, u), level)?;
            Ok::<_, NpaError>(Some((r, lam)))
        });
        for (x, lam) in raw.iter().zip(lambdas) {
            if out.len() >= n {
                break;
            }
            let Some((r, lambda)) = lam? else { continue };
            if (r / lambda - 1.0).abs() > cfg.shell_thickness {
                continue;
            }
            let g: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.sigma;
            let label = Label::from_bool(g < 0.0);
            let scale = lambda / r * (1.0 + g);
            let b = Behaviour::new_unchecked(space, x.iter().map(|c| c * scale).collect());
            out.push(LabelledPoint {
                b,
                label,
                meta: PointMeta {
                    method: Method::Spread,
                    epsilon: None,
                    sigma: Some(cfg.sigma),
                    seed,
                    oracle: format!("npa:{level}"),
                },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{local_membership, tlm_satisfied};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chord_range_in_cube() {
        let sys = geometry::ns_system(Space::Corr4);
        let (lo, hi) = chord_range(&sys, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0]);
        assert_relative_eq!(lo, -1.0);
        assert_relative_eq!(hi, 1.0);
    }

    #[test]
    fn hit_and_run_rejects_exterior_start() {
        let sys = geometry::ns_system(Space::Corr4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            hit_and_run(&sys, &[2.0, 0.0, 0.0, 0.0], 1, 1, &mut rng),
            Err(SamplingError::StartNotInterior(_))
        ));
    }

    #[test]
    fn hit_and_run_cube_moments() {
        let sys = geometry::ns_system(Space::Corr4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20000;
        let pts = hit_and_run(&sys, &[0.0; 4], n, 10, &mut rng).unwrap();
        for k in 0..4 {
            let mean: f64 = pts.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            let var: f64 = pts.iter().map(|p| p[k] * p[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.03, "coordinate {k} mean {mean}");
            assert!((var - 1.0 / 3.0).abs() < 0.03, "coordinate {k} variance {var}");
        }
    }

    #[test]
    fn hit_and_run_stays_inside_ns() {
        let sys = geometry::ns_system(Space::Full8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = hit_and_run(&sys, &[0.0; 8], 2000, 5, &mut rng).unwrap();
        for p in &pts {
            assert!(sys.contains(p, 1e-9));
        }
    }

    #[test]
    fn random_direction_is_unit_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let u = random_direction(8, &mut rng);
            assert!((norm2(&u) - 1.0).abs() < 1e-12);
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(random_direction(4, &mut r1), random_direction(4, &mut r2));
    }

    #[test]
    fn direction_mean_is_isotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 20000;
        let mut mean = vec![0.0; 4];
        for _ in 0..n {
            let u = random_direction(4, &mut rng);
            for (m, c) in mean.iter_mut().zip(&u) {
                *m += c / n as f64;
            }
        }
        for m in mean {
            assert!(m.abs() < 0.02);
        }
    }

    #[test]
    fn balanced_sampling_has_exact_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = sample_uniform(
            Space::Corr4,
            200,
            |b| Ok(tlm_satisfied(b)?),
            "tlm",
            true,
            7,
            &mut rng,
        )
        .unwrap();
        assert_eq!(pts.len(), 200);
        let q = pts.iter().filter(|p| p.label == Label::Quantum).count();
        assert_eq!(q, 100);
        assert!(matches!(
            sample_uniform(Space::Corr4, 201, |b| Ok(tlm_satisfied(b)?), "tlm", true, 7, &mut rng),
            Err(SamplingError::OddBalancedCount(201))
        ));
    }

    #[test]
    fn unbalanced_corr4_quantum_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 5000;
        let pts = sample_uniform(
            Space::Corr4,
            n,
            |b| Ok(tlm_satisfied(b)?),
            "tlm",
            false,
            8,
            &mut rng,
        )
        .unwrap();
        let q = pts.iter().filter(|p| p.label == Label::Quantum).count() as f64 / n as f64;
        assert!((q - 0.925).abs() < 0.02, "quantum fraction {q}");
    }

    #[test]
    fn simplex_vertices_and_affine_chsh() {
        let verts = simplex_vertices();
        assert_eq!(verts.len(), 9);
        // PR box weight 1 → CHSH 4
        let mut w = [0.0; 9];
        w[8] = 1.0;
        let b = mix(&verts, &w);
        assert_relative_eq!(geometry::chsh_value(&b, ChshVariant::canonical()), 4.0);
        // uniform weights → (8·2 + 4)/9
        let b = mix(&verts, &[1.0 / 9.0; 9]);
        assert_relative_eq!(
            geometry::chsh_value(&b, ChshVariant::canonical()),
            20.0 / 9.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn simplex_sample_is_nonlocal_and_ns() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = sample_simplex(2000, &mut rng);
        let ns = geometry::ns_system(Space::Full8);
        for p in &pts {
            let v = geometry::chsh_value(p, ChshVariant::canonical());
            assert!(v >= 2.0 - 1e-12, "CHSH value {v} below the facet");
            assert!(v <= 4.0 + 1e-12);
            assert!(ns.contains(p.coords(), 1e-9));
        }
    }

    #[test]
    fn facet_filter_keeps_pr_direction_and_drops_its_opposite() {
        let pr = Behaviour::pr_box();
        let n = norm2(pr.coords());
        let toward: Vec<f64> = pr.coords().iter().map(|c| c / n).collect();
        let away: Vec<f64> = toward.iter().map(|c| -c).collect();
        let kept = filter_to_facet(&[toward.clone(), away]);
        assert_eq!(kept, vec![toward]);
    }

    #[test]
    fn facet_directions_sampler_terminates_and_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let dirs = sample_facet_directions(5, &mut rng);
        assert_eq!(dirs.len(), 5);
        assert_eq!(filter_to_facet(&dirs).len(), 5);
    }

    #[test]
    fn boundary_pair_brackets_the_tlm_boundary() {
        let u = [0.5, 0.5, 0.5, -0.5];
        let cfg = OffsetConfig { epsilon: 1e-3, level: NpaLevel::Pure(1) };
        let (inner, outer) = boundary_pair(&u, &cfg, 0).unwrap();
        assert_eq!(inner.label, Label::Quantum);
        assert_eq!(outer.label, Label::NotQuantum);
        assert!(crate::geometry::tlm_margin(&inner.b).unwrap() < 0.0);
        assert!(crate::geometry::tlm_margin(&outer.b).unwrap() > 0.0);
    }

    #[test]
    fn boundary_pair_rejects_degenerate_epsilon() {
        let cfg = OffsetConfig { epsilon: 0.0, level: NpaLevel::Pure(1) };
        assert!(matches!(
            boundary_pair(&[1.0, 0.0, 0.0, 0.0], &cfg, 0),
            Err(SamplingError::EpsilonTooSmall(_))
        ));
    }

    #[test]
    fn boundary_pairs_agree_with_tlm_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = OffsetConfig { epsilon: 1e-3, level: NpaLevel::Pure(1) };
        for _ in 0..50 {
            let u = random_direction(4, &mut rng);
            let (inner, outer) = boundary_pair(&u, &cfg, 0).unwrap();
            assert!(crate::geometry::corr4_quantum(&inner.b));
            assert!(!crate::geometry::corr4_quantum(&outer.b));
        }
    }

    #[test]
    fn spread_points_hug_the_boundary_and_labels_match_tlm() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = SpreadConfig::new(1e-2);
        let pts =
            spread_sample(Space::Corr4, &cfg, NpaLevel::Pure(1), 200, 12, &mut rng).unwrap();
        assert_eq!(pts.len(), 200);
        let mut agree = 0;
        for p in &pts {
            let t = crate::geometry::corr4_quantum(&p.b);
            if Label::from_bool(t) == p.label {
                agree += 1;
            }
        }
        // mislabels can only come from draw magnitudes below the shell
        // curvature error, which are rare
        assert!(agree >= 195, "only {agree}/200 spread labels agree with the TLM oracle");
    }

    #[test]
    fn local_fraction_in_full8_uniform_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 4000;
        let pts = sample_uniform(
            Space::Full8,
            n,
            |b| Ok(local_membership(b)?),
            "local",
            false,
            13,
            &mut rng,
        )
        .unwrap();
        let frac = pts.iter().filter(|p| p.label == Label::Quantum).count() as f64 / n as f64;
        assert!((frac - 0.9412).abs() < 0.02, "local fraction {frac}");
    }
}
