//! Exact, SDP-free geometry of the CHSH scenario: the non-signalling
//! polytope, the local polytope, CHSH functionals and the TLM analytic
//! boundary of the quantum set in correlation space.
//!
//! Coordinates follow one canonical order everywhere. A full behaviour is
//! `[⟨A₀⟩, ⟨A₁⟩, ⟨B₀⟩, ⟨B₁⟩, ⟨A₀B₀⟩, ⟨A₀B₁⟩, ⟨A₁B₀⟩, ⟨A₁B₁⟩]`; the
//! correlation-space variant keeps only the last four entries.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance below which a TLM margin counts as "inside or on the boundary".
pub const TLM_TOL: f64 = 1e-9;
/// Coordinates may exceed [-1, 1] by at most this much before arcsin input
/// is rejected instead of clamped.
pub const ARCSIN_CLAMP: f64 = 1e-12;
/// Slack tolerance for CHSH-facet membership of the local polytope.
pub const LOCAL_TOL: f64 = 1e-9;
/// Slack tolerance for non-signalling facet membership.
pub const NS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("coordinate {value} outside arcsin domain [-1, 1]")]
    Domain { value: f64 },
    #[error("behaviour violates the non-signalling polytope (worst slack {slack})")]
    NotNonSignalling { slack: f64 },
    #[error("expected a behaviour in {expected:?} space, got {got:?}")]
    WrongSpace { expected: Space, got: Space },
    #[error("coordinate vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
}

/// Which representation a behaviour lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// Correlators only, 4 coordinates.
    Corr4,
    /// Marginals and correlators, 8 coordinates.
    Full8,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Corr4 => 4,
            Space::Full8 => 8,
        }
    }
}

/// A point in correlation space (4 coordinates) or the full CHSH space
/// (8 coordinates); the universal feature vector of this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Behaviour {
    space: Space,
    coords: Vec<f64>,
}

impl Behaviour {
    /// Build a behaviour, validating length and the `[-1, 1]` box.
    pub fn new(space: Space, coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() != space.dim() {
            return Err(GeometryError::BadLength { expected: space.dim(), got: coords.len() });
        }
        for &c in &coords {
            if !c.is_finite() || c.abs() > 1.0 + ARCSIN_CLAMP {
                return Err(GeometryError::Domain { value: c });
            }
        }
        Ok(Behaviour { space, coords })
    }

    /// Build without the box check; used for points that may sit slightly
    /// outside the cube, e.g. offset training points.
    pub fn new_unchecked(space: Space, coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), space.dim());
        Behaviour { space, coords }
    }

    pub fn origin(space: Space) -> Self {
        Behaviour { space, coords: vec![0.0; space.dim()] }
    }

    /// The canonical PR box `[0, 0, 0, 0, 1, 1, 1, -1]`.
    pub fn pr_box() -> Self {
        Behaviour { space: Space::Full8, coords: vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, -1.0] }
    }

    /// Full behaviour of the deterministic local strategy with outcome signs
    /// `a0, a1, b0, b1 ∈ {±1}`.
    pub fn deterministic(a0: f64, a1: f64, b0: f64, b1: f64) -> Self {
        Behaviour {
            space: Space::Full8,
            coords: vec![a0, a1, b0, b1, a0 * b0, a0 * b1, a1 * b0, a1 * b1],
        }
    }

    /// All 16 deterministic local behaviours.
    pub fn deterministic_vertices() -> Vec<Behaviour> {
        let mut out = Vec::with_capacity(16);
        for bits in 0..16u32 {
            let s = |k: u32| if bits >> k & 1 == 0 { 1.0 } else { -1.0 };
            out.push(Behaviour::deterministic(s(0), s(1), s(2), s(3)));
        }
        out
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The four correlators `⟨A_xB_y⟩` in canonical order.
    pub fn correlators(&self) -> &[f64] {
        match self.space {
            Space::Corr4 => &self.coords,
            Space::Full8 => &self.coords[4..],
        }
    }

    /// The marginals `[⟨A₀⟩, ⟨A₁⟩, ⟨B₀⟩, ⟨B₁⟩]`; zero in correlation space.
    pub fn marginals(&self) -> [f64; 4] {
        match self.space {
            Space::Corr4 => [0.0; 4],
            Space::Full8 => [self.coords[0], self.coords[1], self.coords[2], self.coords[3]],
        }
    }

    /// Project to correlation space (drops the marginals).
    pub fn to_corr4(&self) -> Behaviour {
        Behaviour { space: Space::Corr4, coords: self.correlators().to_vec() }
    }

    /// Embed into the full space with zero marginals.
    pub fn to_full8(&self) -> Behaviour {
        match self.space {
            Space::Full8 => self.clone(),
            Space::Corr4 => {
                let mut coords = vec![0.0; 8];
                coords[4..].copy_from_slice(&self.coords);
                Behaviour { space: Space::Full8, coords }
            }
        }
    }

    /// Joint outcome probabilities `p(a, b | x, y)` recovered by inverting
    /// the marginal/correlator parametrisation. Outcomes are ordered
    /// `(+1,+1), (+1,-1), (-1,+1), (-1,-1)` for each setting pair `(x, y)`.
    pub fn probabilities(&self) -> [[f64; 4]; 4] {
        let full = self.to_full8();
        let m = &full.coords;
        let mut p = [[0.0; 4]; 4];
        for x in 0..2 {
            for y in 0..2 {
                let ax = m[x];
                let by = m[2 + y];
                let axby = m[4 + 2 * x + y];
                for (k, (sa, sb)) in
                    [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate()
                {
                    p[2 * x + y][k] = 0.25 * (1.0 + sa * ax + sb * by + sa * sb * axby);
                }
            }
        }
        p
    }

    pub fn scaled(&self, t: f64) -> Behaviour {
        Behaviour { space: self.space, coords: self.coords.iter().map(|c| c * t).collect() }
    }
}

/// Facet system `normal · x ≤ offset`, one row per facet.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceSystem {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl HalfspaceSystem {
    pub fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Self {
        assert_eq!(normals.len(), offsets.len(), "row count must equal offsets length");
        HalfspaceSystem { normals, offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.normals.first().map_or(0, Vec::len)
    }

    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Slack `offset - normal·x` of every facet at `x`.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, &o)| o - crate::linalg::dot(n, x))
            .collect()
    }

    /// Smallest facet slack at `x`; non-negative iff `x` is inside.
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.slacks(x).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.min_slack(x) >= -tol
    }
}

/// Non-signalling facet system for the given space: the 16 positivity facets
/// of the full scenario, or the 8 cube facets `|⟨A_xB_y⟩| ≤ 1` in
/// correlation space.
pub fn ns_system(space: Space) -> HalfspaceSystem {
    match space {
        Space::Corr4 => {
            let mut normals = Vec::with_capacity(8);
            for k in 0..4 {
                for sign in [1.0, -1.0] {
                    let mut n = vec![0.0; 4];
                    n[k] = sign;
                    normals.push(n);
                }
            }
            HalfspaceSystem::new(normals, vec![1.0; 8])
        }
        Space::Full8 => {
            // (-1)^(a+b+1) ⟨A_xB_y⟩ + (-1)^a ⟨A_x⟩ + (-1)^b ⟨B_y⟩ ≤ 1
            // over outcome labels a, b ∈ {0, 1} and settings x, y ∈ {0, 1}.
            let mut normals = Vec::with_capacity(16);
            for a in 0..2i32 {
                for b in 0..2i32 {
                    for x in 0..2usize {
                        for y in 0..2usize {
                            let mut n = vec![0.0; 8];
                            n[x] = f64::from((-1i32).pow(a as u32));
                            n[2 + y] = f64::from((-1i32).pow(b as u32));
                            n[4 + 2 * x + y] = f64::from((-1i32).pow((a + b + 1) as u32));
                            normals.push(n);
                        }
                    }
                }
            }
            HalfspaceSystem::new(normals, vec![1.0; 16])
        }
    }
}

/// One of the 8 CHSH facets: `overall_sign` times the sum of the four
/// correlators with a minus at `minus_position`. The canonical variant is
/// `⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩` (minus position 3, sign +1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChshVariant {
    pub minus_position: usize,
    pub overall_sign: i8,
}

impl ChshVariant {
    pub fn new(minus_position: usize, overall_sign: i8) -> Self {
        assert!(minus_position < 4);
        assert!(overall_sign == 1 || overall_sign == -1);
        ChshVariant { minus_position, overall_sign }
    }

    pub const fn canonical() -> Self {
        ChshVariant { minus_position: 3, overall_sign: 1 }
    }

    /// All 8 distinct variants, canonical first.
    pub fn all() -> [ChshVariant; 8] {
        let mut out = [ChshVariant::canonical(); 8];
        let mut k = 0;
        for sign in [1i8, -1] {
            for pos in [3usize, 2, 1, 0] {
                out[k] = ChshVariant { minus_position: pos, overall_sign: sign };
                k += 1;
            }
        }
        out
    }

    /// Signs applied to the four correlators, canonical order.
    pub fn coefficients(&self) -> [f64; 4] {
        let s = f64::from(self.overall_sign);
        let mut c = [s; 4];
        c[self.minus_position] = -s;
        c
    }
}

/// Signed CHSH combination of `b` for the given variant.
pub fn chsh_value(b: &Behaviour, v: ChshVariant) -> f64 {
    let corr = b.correlators();
    v.coefficients().iter().zip(corr).map(|(c, x)| c * x).sum()
}

/// TLM margin: max over the four cyclic sign patterns of
/// `|Σ ± arcsin⟨A_xB_y⟩| − π`. Negative strictly inside the quantum set in
/// correlation space, zero on the boundary, positive outside.
pub fn tlm_margin(b: &Behaviour) -> Result<f64, GeometryError> {
    let corr = b.correlators();
    let mut asins = [0.0; 4];
    for (slot, &c) in asins.iter_mut().zip(corr) {
        if c.abs() > 1.0 + ARCSIN_CLAMP {
            return Err(GeometryError::Domain { value: c });
        }
        *slot = c.clamp(-1.0, 1.0).asin();
    }
    let total: f64 = asins.iter().sum();
    let mut worst = f64::NEG_INFINITY;
    for minus_pos in 0..4 {
        // flip one term: sum - 2*asin[minus_pos]
        let margin = (total - 2.0 * asins[minus_pos]).abs() - PI;
        worst = worst.max(margin);
    }
    Ok(worst)
}

/// Whether `b` satisfies all TLM inequalities within [`TLM_TOL`].
pub fn tlm_satisfied(b: &Behaviour) -> Result<bool, GeometryError> {
    Ok(tlm_margin(b)? <= TLM_TOL)
}

/// Quantum membership of a correlation point including the cube facets:
/// points outside the correlator cube are outside the quantum set, points
/// inside are classified by the TLM inequalities. Total on all inputs, which
/// matters for offset and spread points that step past the cube.
pub fn corr4_quantum(b: &Behaviour) -> bool {
    tlm_satisfied(b).unwrap_or(false)
}

/// Local-polytope membership of a full behaviour: positivity facets plus the
/// 8 CHSH inequalities characterise L in this scenario.
pub fn local_membership(b: &Behaviour) -> Result<bool, GeometryError> {
    let full = b.to_full8();
    let slack = ns_system(Space::Full8).min_slack(full.coords());
    if slack < -NS_TOL {
        return Err(GeometryError::NotNonSignalling { slack });
    }
    Ok(ChshVariant::all().iter().all(|&v| chsh_value(&full, v) <= 2.0 + LOCAL_TOL))
}

/// Apply the relabelling symmetry carrying the canonical CHSH facet to the
/// facet of variant `v`. Each map is an involution composed of setting swaps
/// and a double outcome flip on Bob's side, so it preserves non-signalling
/// and local membership.
pub fn relabel(b: &Behaviour, v: ChshVariant) -> Behaviour {
    let mut out = b.clone();
    // moving the minus from position 3 to `minus_position`:
    //   3 -> nothing, 2 -> swap Bob's settings, 1 -> swap Alice's settings,
    //   0 -> swap both
    let swap_alice = v.minus_position == 1 || v.minus_position == 0;
    let swap_bob = v.minus_position == 2 || v.minus_position == 0;
    match out.space {
        Space::Full8 => {
            if swap_alice {
                out.coords.swap(0, 1);
                out.coords.swap(4, 6);
                out.coords.swap(5, 7);
            }
            if swap_bob {
                out.coords.swap(2, 3);
                out.coords.swap(4, 5);
                out.coords.swap(6, 7);
            }
            if v.overall_sign < 0 {
                // flip both of Bob's outcomes
                for k in [2, 3, 4, 5, 6, 7] {
                    out.coords[k] = -out.coords[k];
                }
            }
        }
        Space::Corr4 => {
            if swap_alice {
                out.coords.swap(0, 2);
                out.coords.swap(1, 3);
            }
            if swap_bob {
                out.coords.swap(0, 1);
                out.coords.swap(2, 3);
            }
            if v.overall_sign < 0 {
                for c in &mut out.coords {
                    *c = -*c;
                }
            }
        }
    }
    out
}

/// The variant whose CHSH value at `b` is largest (ties broken by the fixed
/// ordering of [`ChshVariant::all`]).
pub fn max_chsh_variant(b: &Behaviour) -> (ChshVariant, f64) {
    let mut best = (ChshVariant::canonical(), f64::NEG_INFINITY);
    for v in ChshVariant::all() {
        let val = chsh_value(b, v);
        if val > best.1 {
            best = (v, val);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQ2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn corr(c: [f64; 4]) -> Behaviour {
        Behaviour::new(Space::Corr4, c.to_vec()).unwrap()
    }

    #[test]
    fn tlm_margin_at_reference_points() {
        assert_relative_eq!(tlm_margin(&corr([0.0; 4])).unwrap(), -PI, epsilon = 1e-12);
        let tsirelson = corr([SQ2_INV, SQ2_INV, SQ2_INV, -SQ2_INV]);
        assert!(tlm_margin(&tsirelson).unwrap().abs() <= 1e-12);
        let pr = corr([1.0, 1.0, 1.0, -1.0]);
        assert_relative_eq!(tlm_margin(&pr).unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn tlm_satisfied_at_reference_points() {
        assert!(tlm_satisfied(&corr([0.0; 4])).unwrap());
        assert!(!tlm_satisfied(&corr([1.0, 1.0, 1.0, -1.0])).unwrap());
        // 4·arcsin(0.74) > π by direct arithmetic
        assert!(4.0 * 0.74f64.asin() > PI);
        assert!(!tlm_satisfied(&corr([0.74, 0.74, 0.74, -0.74])).unwrap());
    }

    #[test]
    fn tlm_domain_handling() {
        // within clamp tolerance: accepted
        let b = Behaviour::new_unchecked(Space::Corr4, vec![1.0 + 5e-13, 0.0, 0.0, 0.0]);
        assert!(tlm_margin(&b).is_ok());
        // beyond: rejected
        let b = Behaviour::new_unchecked(Space::Corr4, vec![1.0 + 1e-9, 0.0, 0.0, 0.0]);
        assert!(matches!(tlm_margin(&b), Err(GeometryError::Domain { .. })));
    }

    #[test]
    fn ns_system_shapes() {
        let full = ns_system(Space::Full8);
        assert_eq!(full.len(), 16);
        for n in full.normals() {
            let nonzero: Vec<f64> = n.iter().copied().filter(|v| *v != 0.0).collect();
            assert_eq!(nonzero.len(), 3);
            assert!(nonzero.iter().all(|v| v.abs() == 1.0));
        }
        assert!(full.offsets().iter().all(|&o| o == 1.0));
        // origin has slack exactly 1 on every facet
        let slacks = full.slacks(&[0.0; 8]);
        assert!(slacks.iter().all(|&s| (s - 1.0).abs() < 1e-15));

        let corr = ns_system(Space::Corr4);
        assert_eq!(corr.len(), 8);
        assert_eq!(corr.dim(), 4);
    }

    #[test]
    fn ns_rows_are_distinct() {
        let full = ns_system(Space::Full8);
        for i in 0..16 {
            for j in (i + 1)..16 {
                assert_ne!(full.normals()[i], full.normals()[j]);
            }
        }
    }

    #[test]
    fn probabilities_normalise_and_match_positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // random mixtures of deterministic vertices are valid behaviours
        let verts = Behaviour::deterministic_vertices();
        for _ in 0..200 {
            let mut w: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
            let tot: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= tot);
            let mut coords = vec![0.0; 8];
            for (wi, v) in w.iter().zip(&verts) {
                for (c, vc) in coords.iter_mut().zip(v.coords()) {
                    *c += wi * vc;
                }
            }
            let b = Behaviour::new(Space::Full8, coords).unwrap();
            let p = b.probabilities();
            for setting in &p {
                let sum: f64 = setting.iter().sum();
                assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
                assert!(setting.iter().all(|&q| q >= -1e-12));
            }
            assert!(ns_system(Space::Full8).contains(b.coords(), 1e-12));
        }
    }

    #[test]
    fn chsh_values_at_reference_points() {
        let can = ChshVariant::canonical();
        assert_relative_eq!(chsh_value(&Behaviour::pr_box(), can), 4.0);
        let tsirelson = corr([SQ2_INV, SQ2_INV, SQ2_INV, -SQ2_INV]);
        assert_relative_eq!(chsh_value(&tsirelson, can), 2.0 * 2.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(chsh_value(&Behaviour::origin(Space::Full8), can), 0.0);
    }

    #[test]
    fn local_membership_reference_points() {
        assert!(local_membership(&Behaviour::origin(Space::Full8)).unwrap());
        assert!(!local_membership(&Behaviour::pr_box()).unwrap());
        let tsirelson = corr([SQ2_INV, SQ2_INV, SQ2_INV, -SQ2_INV]).to_full8();
        assert!(!local_membership(&tsirelson).unwrap());
        // outside ns: error
        let bad = Behaviour::new_unchecked(Space::Full8, vec![1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(local_membership(&bad), Err(GeometryError::NotNonSignalling { .. })));
    }

    #[test]
    fn relabel_identity_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let coords: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let b = Behaviour::new(Space::Full8, coords).unwrap();
            assert_eq!(relabel(&b, ChshVariant::canonical()), b);
            for v in ChshVariant::all() {
                let twice = relabel(&relabel(&b, v), v);
                for (x, y) in twice.coords().iter().zip(b.coords()) {
                    assert_relative_eq!(x, y, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn relabel_carries_canonical_value_to_variant() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let coords: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let b = Behaviour::new(Space::Full8, coords).unwrap();
            for v in ChshVariant::all() {
                assert_relative_eq!(
                    chsh_value(&relabel(&b, v), v),
                    chsh_value(&b, ChshVariant::canonical()),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn relabel_generates_the_eight_pr_boxes() {
        let pr = Behaviour::pr_box();
        let images: Vec<Behaviour> = ChshVariant::all().iter().map(|&v| relabel(&pr, v)).collect();
        for (i, bi) in images.iter().enumerate() {
            // each attains 4 on its own facet
            assert_relative_eq!(chsh_value(bi, ChshVariant::all()[i]), 4.0, epsilon = 1e-12);
            assert!(ns_system(Space::Full8).contains(bi.coords(), 1e-12));
            for bj in images.iter().skip(i + 1) {
                assert_ne!(bi.coords(), bj.coords(), "PR images must be pairwise distinct");
            }
        }
    }

    #[test]
    fn relabel_preserves_ns_and_local_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let verts = Behaviour::deterministic_vertices();
        for _ in 0..100 {
            let mut w: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
            let tot: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= tot);
            let mut coords = vec![0.0; 8];
            for (wi, v) in w.iter().zip(&verts) {
                for (c, vc) in coords.iter_mut().zip(v.coords()) {
                    *c += wi * vc;
                }
            }
            let b = Behaviour::new(Space::Full8, coords).unwrap();
            for v in ChshVariant::all() {
                let r = relabel(&b, v);
                assert!(ns_system(Space::Full8).contains(r.coords(), 1e-12));
                assert!(local_membership(&r).unwrap());
            }
        }
    }

    #[test]
    fn tlm_margin_invariant_under_relabelling() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let coords: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let b = Behaviour::new(Space::Corr4, coords).unwrap();
            let m0 = tlm_margin(&b).unwrap();
            for v in ChshVariant::all() {
                let m = tlm_margin(&relabel(&b, v)).unwrap();
                assert_relative_eq!(m, m0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tlm_implies_chsh_below_tsirelson() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let bound = 2.0 * 2.0f64.sqrt() + 1e-9;
        let mut hits = 0;
        for _ in 0..5000 {
            let coords: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let b = Behaviour::new(Space::Corr4, coords).unwrap();
            if tlm_satisfied(&b).unwrap() {
                hits += 1;
                for v in ChshVariant::all() {
                    assert!(chsh_value(&b, v) <= bound);
                }
            }
        }
        assert!(hits > 1000, "sampler should hit the quantum region often");
    }

    #[test]
    fn local_zero_marginal_points_satisfy_tlm() {
        // mixing a vertex with its all-outcome-flipped partner zeroes the
        // marginals and keeps the correlators
        let verts = Behaviour::deterministic_vertices();
        for v in &verts {
            let m = v.marginals();
            let flipped = Behaviour::deterministic(-m[0], -m[1], -m[2], -m[3]);
            let mixed: Vec<f64> = v
                .coords()
                .iter()
                .zip(flipped.coords())
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let b = Behaviour::new(Space::Full8, mixed).unwrap();
            assert!(local_membership(&b).unwrap());
            assert!(tlm_satisfied(&b.to_corr4()).unwrap());
        }
    }

    #[test]
    fn max_chsh_variant_picks_the_violated_facet() {
        for v in ChshVariant::all() {
            let pr_v = relabel(&Behaviour::pr_box(), v);
            let (best, val) = max_chsh_variant(&pr_v);
            assert_eq!(best, v);
            assert_relative_eq!(val, 4.0, epsilon = 1e-12);
        }
    }
}
