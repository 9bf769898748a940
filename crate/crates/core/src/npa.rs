//! NPA moment-matrix relaxations of the quantum set for the CHSH scenario.
//!
//! Moment matrices Γ_ij = ⟨w_i† w_j⟩ are built over words in the dichotomic
//! observables A₀, A₁, B₀, B₁ (A_x² = B_y² = 1, parties commute). The
//! real-symmetric variant is used throughout: a free moment and its adjoint
//! share one variable, which is the standard choice for membership questions
//! in this scenario. Queries run through the [`crate::sdp`] solver.

use crate::geometry::{Behaviour, Space};
use crate::sdp::{self, Block, SdpOptions, SdpProblem, SdpStatus, MAX_BLOCK_DIM};
use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

/// Default slack tolerance for membership decisions: a behaviour counts as
/// inside the level when the max-slack optimum is at least `-MEMBERSHIP_TOL`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NpaError {
    #[error("moment matrix for {0:?} exceeds the {MAX_BLOCK_DIM}x{MAX_BLOCK_DIM} design ceiling")]
    LevelTooLarge(NpaLevel),
    #[error("direction must be a unit vector (norm {0})")]
    NotUnitDirection(f64),
    #[error("functional length {got} does not match space dimension {expected}")]
    BadFunctional { expected: usize, got: usize },
    #[error("SDP terminated with status {0:?}")]
    Sdp(SdpStatus),
    #[error(transparent)]
    Sdp2(#[from] sdp::SdpError),
}

/// Product of alternating letters from one party's observables.
///
/// Letters are `0` or `1` (the measurement setting); adjacent equal letters
/// cancel because the observables square to the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word {
    alice: Vec<u8>,
    bob: Vec<u8>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    /// Build from raw letter strings and canonicalize.
    pub fn new(alice: &[u8], bob: &[u8]) -> Self {
        canonicalize(&Word { alice: alice.to_vec(), bob: bob.to_vec() })
    }

    pub fn alice(&self) -> &[u8] {
        &self.alice
    }

    pub fn bob(&self) -> &[u8] {
        &self.bob
    }

    pub fn len(&self) -> usize {
        self.alice.len() + self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty() && self.bob.is_empty()
    }

    /// Reverse of the word; the observables are Hermitian so this is the
    /// adjoint.
    pub fn adjoint(&self) -> Word {
        let mut w = self.clone();
        w.alice.reverse();
        w.bob.reverse();
        w
    }

    /// `self† · other`, fully reduced.
    pub fn adjoint_times(&self, other: &Word) -> Word {
        let mut alice = self.alice.clone();
        alice.reverse();
        alice.extend_from_slice(&other.alice);
        let mut bob = self.bob.clone();
        bob.reverse();
        bob.extend_from_slice(&other.bob);
        canonicalize(&Word { alice, bob })
    }
}

/// Normal form: cancel adjacent duplicate letters within each party
/// (X² = 1); parties are stored separately since they commute. Idempotent.
pub fn canonicalize(w: &Word) -> Word {
    Word { alice: reduce(&w.alice), bob: reduce(&w.bob) }
}

fn reduce(letters: &[u8]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Hierarchy level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NpaLevel {
    /// All words of total length ≤ n.
    Pure(u32),
    /// Level 1 plus the four products A_xB_y; 9×9 in this scenario.
    OnePlusAB,
}

impl std::fmt::Display for NpaLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NpaLevel::Pure(n) => write!(f, "{n}"),
            NpaLevel::OnePlusAB => write!(f, "1ab"),
        }
    }
}

impl std::str::FromStr for NpaLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "1ab" | "1+ab" => Ok(NpaLevel::OnePlusAB),
            other => other
                .parse::<u32>()
                .ok()
                .filter(|&n| n >= 1)
                .map(NpaLevel::Pure)
                .ok_or_else(|| format!("unknown NPA level '{s}' (expected 1, 1ab, 2, 3, ...)")),
        }
    }
}

impl NpaLevel {
    /// Word list for this level, in canonical order (by total length, Alice
    /// letters before Bob letters).
    pub fn words(self) -> Vec<Word> {
        match self {
            NpaLevel::Pure(n) => {
                let mut out = vec![Word::identity()];
                for total in 1..=n as usize {
                    for alice_len in (0..=total).rev() {
                        let bob_len = total - alice_len;
                        for wa in alternating(alice_len) {
                            for wb in alternating(bob_len) {
                                out.push(Word { alice: wa.clone(), bob: wb });
                            }
                        }
                    }
                }
                out
            }
            NpaLevel::OnePlusAB => {
                let mut out = NpaLevel::Pure(1).words();
                for x in 0..2u8 {
                    for y in 0..2u8 {
                        out.push(Word { alice: vec![x], bob: vec![y] });
                    }
                }
                out
            }
        }
    }
}

/// Alternating strings of the given length over {0, 1}; two for each
/// positive length, starting with 0 first.
fn alternating(len: usize) -> Vec<Vec<u8>> {
    if len == 0 {
        return vec![vec![]];
    }
    [0u8, 1]
        .iter()
        .map(|&start| (0..len).map(|k| (start as usize + k) as u8 & 1).collect())
        .collect()
}

/// What a moment-matrix cell holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    /// A fixed number (1 on the diagonal; 0 for marginals pinned by Corr4).
    Const(f64),
    /// Index into the behaviour coordinate vector.
    Coord(usize),
    /// Index of a free moment variable.
    Free(usize),
}

/// Symbolic moment matrix for a level: word list plus a symmetric map from
/// cells to behaviour coordinates, constants or free moments.
#[derive(Debug, Clone)]
pub struct MomentStructure {
    level: NpaLevel,
    space: Space,
    words: Vec<Word>,
    entries: Vec<Entry>,
    num_free: usize,
}

impl MomentStructure {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn level(&self) -> NpaLevel {
        self.level
    }

    pub fn entry(&self, i: usize, j: usize) -> Entry {
        self.entries[i * self.words.len() + j]
    }
}

/// Build the moment structure for a level, deduplicating words after
/// canonicalization and classifying every cell `w_i† w_j`.
pub fn build_structure(level: NpaLevel, space: Space) -> Result<MomentStructure, NpaError> {
    let mut words = Vec::new();
    for w in level.words() {
        let c = canonicalize(&w);
        if !words.contains(&c) {
            words.push(c);
        }
    }
    let n = words.len();
    if n > MAX_BLOCK_DIM {
        return Err(NpaError::LevelTooLarge(level));
    }

    let mut free_keys: BTreeMap<Word, usize> = BTreeMap::new();
    let mut entries = vec![Entry::Const(0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let w = words[i].adjoint_times(&words[j]);
            entries[i * n + j] = classify(&w, space, &mut free_keys);
        }
    }
    let num_free = free_keys.len();
    Ok(MomentStructure { level, space, words, entries, num_free })
}

fn classify(w: &Word, space: Space, free_keys: &mut BTreeMap<Word, usize>) -> Entry {
    match (w.alice.len(), w.bob.len()) {
        (0, 0) => Entry::Const(1.0),
        (1, 0) => match space {
            Space::Full8 => Entry::Coord(w.alice[0] as usize),
            Space::Corr4 => Entry::Const(0.0),
        },
        (0, 1) => match space {
            Space::Full8 => Entry::Coord(2 + w.bob[0] as usize),
            Space::Corr4 => Entry::Const(0.0),
        },
        (1, 1) => {
            let k = 2 * w.alice[0] as usize + w.bob[0] as usize;
            match space {
                Space::Full8 => Entry::Coord(4 + k),
                Space::Corr4 => Entry::Coord(k),
            }
        }
        _ => {
            // real-symmetric variant: a moment and its adjoint share a variable
            let key = w.clone().min(w.adjoint());
            let next = free_keys.len();
            Entry::Free(*free_keys.entry(key).or_insert(next))
        }
    }
}

fn structure_cached(level: NpaLevel, space: Space) -> Result<&'static MomentStructure, NpaError> {
    static CACHE: OnceLock<Mutex<Vec<((NpaLevel, Space), &'static MomentStructure)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut guard = cache.lock().unwrap();
    if let Some((_, s)) = guard.iter().find(|(k, _)| *k == (level, space)) {
        return Ok(s);
    }
    let built: &'static MomentStructure = Box::leak(Box::new(build_structure(level, space)?));
    guard.push(((level, space), built));
    Ok(built)
}

/// How behaviour-coordinate cells enter the assembled SDP.
enum CoordMode<'a> {
    /// Fixed numbers from a behaviour.
    Fixed(&'a [f64]),
    /// `λ · u` with λ the given variable.
    Ray { lambda_var: usize, u: &'a [f64] },
    /// Coordinate k is variable k.
    Variable,
}

/// Assemble the moment-matrix LMI `Γ ⪰ 0` (optionally shifted by `-t I`).
fn moment_block(
    s: &MomentStructure,
    num_vars: usize,
    mode: &CoordMode,
    free_offset: usize,
    t_var: Option<usize>,
) -> Block {
    let n = s.dim();
    let mut block = Block::new(n, num_vars);
    for i in 0..n {
        for j in i..n {
            match s.entry(i, j) {
                Entry::Const(v) => block.set_constant(i, j, v),
                Entry::Free(f) => block.add_coeff(free_offset + f, i, j, 1.0),
                Entry::Coord(k) => match mode {
                    CoordMode::Fixed(b) => block.set_constant(i, j, b[k]),
                    CoordMode::Ray { lambda_var, u } => block.add_coeff(*lambda_var, i, j, u[k]),
                    CoordMode::Variable => block.add_coeff(k, i, j, 1.0),
                },
            }
        }
    }
    if let Some(t) = t_var {
        for i in 0..n {
            block.add_coeff(t, i, i, -1.0);
        }
    }
    block
}

fn solve_level(problem: &SdpProblem, init: &[f64]) -> Result<sdp::SdpSolution, NpaError> {
    let sol = sdp::solve_with_init(problem, SdpOptions::default(), init)?;
    match sol.status {
        SdpStatus::Optimal => Ok(sol),
        other => Err(NpaError::Sdp(other)),
    }
}

/// Membership slack `t* = max t s.t. Γ(b, y) − t·I ⪰ 0` over the free
/// moments. Non-negative (within tolerance) exactly when `b` lies in the
/// level's relaxation.
pub fn membership_slack(b: &Behaviour, level: NpaLevel) -> Result<f64, NpaError> {
    let s = structure_cached(level, b.space())?;
    let t_var = s.num_free();
    let m = t_var + 1;
    let mut obj = vec![0.0; m];
    obj[t_var] = -1.0;
    let mut p = SdpProblem::new(obj);
    p.add_block(moment_block(s, m, &CoordMode::Fixed(b.coords()), 0, Some(t_var)));

    // strictly feasible start: zero moments, t below the smallest eigenvalue
    let gamma0 = p.blocks()[0].eval(&vec![0.0; m]);
    let lam_min = crate::linalg::min_eigenvalue(&gamma0)
        .map_err(|_| NpaError::Sdp(SdpStatus::NumericalFailure))?;
    let mut init = vec![0.0; m];
    init[t_var] = lam_min - 1.0;
    let sol = solve_level(&p, &init)?;
    Ok(sol.y[t_var])
}

/// Membership decision at the default tolerance [`MEMBERSHIP_TOL`].
pub fn member_at(b: &Behaviour, level: NpaLevel) -> Result<bool, NpaError> {
    member_with_tol(b, level, MEMBERSHIP_TOL)
}

pub fn member_with_tol(b: &Behaviour, level: NpaLevel, tol: f64) -> Result<bool, NpaError> {
    Ok(membership_slack(b, level)? >= -tol)
}

/// Largest λ ≥ 0 with `λ·u` inside the level's relaxation, solved as a
/// single SDP with λ as a variable.
pub fn max_lambda(u: &Behaviour, level: NpaLevel) -> Result<f64, NpaError> {
    let norm = crate::linalg::norm2(u.coords());
    if (norm - 1.0).abs() > 1e-12 {
        return Err(NpaError::NotUnitDirection(norm));
    }
    let s = structure_cached(level, u.space())?;
    let m = s.num_free() + 1;
    let lambda_var = 0usize;
    let mut obj = vec![0.0; m];
    obj[lambda_var] = -1.0;
    let mut p = SdpProblem::new(obj);
    p.add_block(moment_block(s, m, &CoordMode::Ray { lambda_var, u: u.coords() }, 1, None));
    let mut nonneg = Block::new(1, m);
    nonneg.add_coeff(lambda_var, 0, 0, 1.0);
    p.add_block(nonneg);

    let mut init = vec![0.0; m];
    init[lambda_var] = 0.01;
    let sol = solve_level(&p, &init)?;
    Ok(sol.y[lambda_var])
}

/// Maximize a linear functional `c · b` over behaviours in the level's
/// relaxation (free moments included as variables).
pub fn max_functional(c: &[f64], space: Space, level: NpaLevel) -> Result<f64, NpaError> {
    if c.len() != space.dim() {
        return Err(NpaError::BadFunctional { expected: space.dim(), got: c.len() });
    }
    let s = structure_cached(level, space)?;
    let nc = space.dim();
    let m = nc + s.num_free();
    let mut obj = vec![0.0; m];
    for (slot, v) in obj[..nc].iter_mut().zip(c) {
        *slot = -v;
    }
    let mut p = SdpProblem::new(obj);
    p.add_block(moment_block(s, m, &CoordMode::Variable, nc, None));
    let init = vec![0.0; m];
    let sol = solve_level(&p, &init)?;
    Ok(-sol.primal_objective)
}
