//! Small dense semidefinite programming: linear objective over block-diagonal
//! linear matrix inequalities, solved by a primal-dual path-following
//! interior point method with Nesterov-Todd scaling.
//!
//! A problem is
//!
//! ```text
//!   minimize    objective · y
//!   subject to  constant_b + Σ_i y_i coeff_{b,i}  ⪰ 0   for every block b
//!               A y = d                                  (optional)
//! ```
//!
//! All factorizations are dense; block dimensions are capped at
//! [`MAX_BLOCK_DIM`]. The solver is deterministic: identical problems and
//! options produce bit-identical solutions.

mod ipm;

use crate::linalg::Mat;
use std::fmt::Write as _;

/// Design ceiling on the dimension of a single PSD block.
pub const MAX_BLOCK_DIM: usize = 64;

/// Symmetric matrix stored as upper-triangle triplets `(i, j, v)` with
/// `i ≤ j`; an off-diagonal entry implies its mirror.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new() -> Self {
        SparseSym { entries: Vec::new() }
    }

    pub fn from_entries(entries: Vec<(usize, usize, f64)>) -> Self {
        let mut s = SparseSym::new();
        for (i, j, v) in entries {
            s.push(i, j, v);
        }
        s
    }

    /// Identity scaled by `v`.
    pub fn scaled_identity(dim: usize, v: f64) -> Self {
        SparseSym { entries: (0..dim).map(|i| (i, i, v)).collect() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            self.entries.push((i, j, v));
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Accumulate `scale * self` into a dense symmetric matrix.
    pub fn add_to(&self, out: &mut Mat, scale: f64) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += scale * v;
            if i != j {
                out[(j, i)] += scale * v;
            }
        }
    }

    /// Frobenius inner product with a dense symmetric matrix.
    pub fn dot(&self, m: &Mat) -> f64 {
        let mut s = 0.0;
        for &(i, j, v) in &self.entries {
            s += v * if i == j { m[(i, i)] } else { m[(i, j)] + m[(j, i)] };
        }
        s
    }

    pub fn to_dense(&self, dim: usize) -> Mat {
        let mut m = Mat::zeros(dim, dim);
        self.add_to(&mut m, 1.0);
        m
    }

    fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|&(_, j, _)| j).max()
    }
}

/// One linear matrix inequality `constant + Σ y_i coeffs[i] ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Block {
    dim: usize,
    constant: SparseSym,
    coeffs: Vec<SparseSym>,
}

impl Block {
    pub fn new(dim: usize, num_vars: usize) -> Self {
        Block { dim, constant: SparseSym::new(), coeffs: vec![SparseSym::new(); num_vars] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &SparseSym {
        &self.constant
    }

    pub fn coeffs(&self) -> &[SparseSym] {
        &self.coeffs
    }

    pub fn set_constant(&mut self, i: usize, j: usize, v: f64) {
        self.constant.push(i, j, v);
    }

    pub fn add_coeff(&mut self, var: usize, i: usize, j: usize, v: f64) {
        self.coeffs[var].push(i, j, v);
    }

    /// Dense value of the block at `y`.
    pub fn eval(&self, y: &[f64]) -> Mat {
        let mut m = self.constant.to_dense(self.dim);
        for (coeff, &yi) in self.coeffs.iter().zip(y) {
            if yi != 0.0 {
                coeff.add_to(&mut m, yi);
            }
        }
        m
    }
}

/// Affine vector expression `constant + terms · y` used to build norm
/// epigraph blocks.
#[derive(Debug, Clone)]
pub struct AffineVec {
    constant: Vec<f64>,
    /// per component: list of `(variable, coefficient)`
    terms: Vec<Vec<(usize, f64)>>,
}

impl AffineVec {
    pub fn constant(values: Vec<f64>) -> Self {
        let terms = vec![Vec::new(); values.len()];
        AffineVec { constant: values, terms }
    }

    pub fn zeros(len: usize) -> Self {
        AffineVec { constant: vec![0.0; len], terms: vec![Vec::new(); len] }
    }

    pub fn len(&self) -> usize {
        self.constant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constant.is_empty()
    }

    pub fn set_constant_component(&mut self, k: usize, v: f64) {
        self.constant[k] = v;
    }

    pub fn add_term(&mut self, k: usize, var: usize, coeff: f64) {
        if coeff != 0.0 {
            self.terms[k].push((var, coeff));
        }
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        self.constant
            .iter()
            .zip(&self.terms)
            .map(|(c, terms)| c + terms.iter().map(|&(v, a)| a * y[v]).sum::<f64>())
            .collect()
    }
}

/// Arrow-structured block `[[t·I, r], [rᵀ, t]]` whose positive
/// semidefiniteness is equivalent to `‖r‖₂ ≤ t`.
pub fn norm_epigraph_block(residual: &AffineVec, t: usize, num_vars: usize) -> Block {
    let k = residual.len();
    let mut block = Block::new(k + 1, num_vars);
    for (i, (&c, terms)) in residual.constant.iter().zip(&residual.terms).enumerate() {
        block.set_constant(i, k, c);
        for &(var, coeff) in terms {
            assert_ne!(var, t, "epigraph variable cannot appear in the residual");
            block.add_coeff(var, i, k, coeff);
        }
    }
    for i in 0..=k {
        block.add_coeff(t, i, i, 1.0);
    }
    block
}

/// Linear equality constraints `a · y = b`.
#[derive(Debug, Clone)]
pub struct LinearEqualities {
    pub a: Mat,
    pub b: Vec<f64>,
}

/// A block-diagonal LMI problem with linear objective.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<Block>,
    equalities: Option<LinearEqualities>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("malformed SDP: {0}")]
    InvalidProblem(String),
}

impl SdpProblem {
    /// `objective` is minimized.
    pub fn new(objective: Vec<f64>) -> Self {
        SdpProblem { num_vars: objective.len(), objective, blocks: Vec::new(), equalities: None }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn equalities(&self) -> Option<&LinearEqualities> {
        self.equalities.as_ref()
    }

    pub fn add_block(&mut self, block: Block) {
        self.blocks.push(block);
    }

    /// Add one equality row `coeffs · y = rhs`.
    pub fn add_equality(&mut self, coeffs: &[f64], rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        match &mut self.equalities {
            Some(eq) => {
                let p = eq.a.rows();
                let mut a = Mat::zeros(p + 1, self.num_vars);
                for r in 0..p {
                    a.row_mut(r).copy_from_slice(eq.a.row(r));
                }
                a.row_mut(p).copy_from_slice(coeffs);
                eq.a = a;
                eq.b.push(rhs);
            }
            None => {
                self.equalities = Some(LinearEqualities {
                    a: Mat::from_rows(&[coeffs.to_vec()]),
                    b: vec![rhs],
                });
            }
        }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.objective.len() != self.num_vars {
            return Err(SdpError::InvalidProblem("objective length != num_vars".into()));
        }
        if self.blocks.is_empty() {
            return Err(SdpError::InvalidProblem("problem has no blocks".into()));
        }
        for (bi, block) in self.blocks.iter().enumerate() {
            if block.dim == 0 || block.dim > MAX_BLOCK_DIM {
                return Err(SdpError::InvalidProblem(format!(
                    "block {bi} has dimension {} (must be 1..={MAX_BLOCK_DIM})",
                    block.dim
                )));
            }
            if block.coeffs.len() != self.num_vars {
                return Err(SdpError::InvalidProblem(format!(
                    "block {bi} has {} coefficient matrices, expected {}",
                    block.coeffs.len(),
                    self.num_vars
                )));
            }
            let in_range = |s: &SparseSym| s.max_index().is_none_or(|m| m < block.dim);
            if !in_range(&block.constant) || !block.coeffs.iter().all(in_range) {
                return Err(SdpError::InvalidProblem(format!("block {bi} has out-of-range entries")));
            }
        }
        if let Some(eq) = &self.equalities {
            if eq.a.cols() != self.num_vars || eq.a.rows() != eq.b.len() {
                return Err(SdpError::InvalidProblem("equality system shape mismatch".into()));
            }
        }
        Ok(())
    }

    /// Debug dump in a sparse triplet text format, one section per block,
    /// for cross-checking against external solvers.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "vars {}", self.num_vars);
        let _ = writeln!(
            s,
            "objective {}",
            self.objective.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
        );
        for (bi, block) in self.blocks.iter().enumerate() {
            let _ = writeln!(s, "block {bi} dim {}", block.dim);
            for &(i, j, v) in block.constant.entries() {
                let _ = writeln!(s, "  const {i} {j} {v:e}");
            }
            for (var, coeff) in block.coeffs.iter().enumerate() {
                for &(i, j, v) in coeff.entries() {
                    let _ = writeln!(s, "  coeff {var} {i} {j} {v:e}");
                }
            }
        }
        if let Some(eq) = &self.equalities {
            for r in 0..eq.a.rows() {
                let _ = writeln!(
                    s,
                    "eq {} = {:e}",
                    eq.a.row(r).iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "),
                    eq.b[r]
                );
            }
        }
        s
    }
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

/// Solver output. `status == Optimal` guarantees `duality_gap ≤ 1e-8` and
/// every block's minimum eigenvalue ≥ −1e-9 at `y`.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub y: Vec<f64>,
    pub primal_objective: f64,
    pub duality_gap: f64,
    pub min_eigenvalues: Vec<f64>,
    /// Dual matrix per block at termination. For problems that embed a free
    /// PSD matrix through its Lagrangian dual, this is where the matrix
    /// iterate is recovered from.
    pub dual_blocks: Vec<Mat>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-9, max_iter: 200 }
    }
}

/// Solve the problem from a cold start (a strictly feasible point is found
/// by an internal max-slack feasibility phase when needed).
pub fn solve(problem: &SdpProblem, opts: SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    Ok(ipm::solve_two_phase(problem, opts, None))
}

/// Solve with a caller-supplied starting point; used by callers that know a
/// strictly feasible `y` for their problem shape. Falls back to the
/// feasibility phase if the hint is not strictly feasible.
pub(crate) fn solve_with_init(
    problem: &SdpProblem,
    opts: SdpOptions,
    init: &[f64],
) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    Ok(ipm::solve_two_phase(problem, opts, Some(init)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve_default(p: &SdpProblem) -> SdpSolution {
        solve(p, SdpOptions::default()).expect("valid problem")
    }

    #[test]
    fn scalar_nonnegativity() {
        // minimize y s.t. [y] ⪰ 0
        let mut p = SdpProblem::new(vec![1.0]);
        let mut b = Block::new(1, 1);
        b.add_coeff(0, 0, 0, 1.0);
        p.add_block(b);
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.y[0].abs() <= 1e-7, "y* = {}", sol.y[0]);
        assert!(sol.duality_gap <= 1e-8);
    }

    #[test]
    fn diagonal_interval_bound() {
        // maximize λ s.t. diag(1-λ, 1+λ) ⪰ 0  →  λ* = 1
        let mut p = SdpProblem::new(vec![-1.0]);
        let mut b = Block::new(2, 1);
        b.set_constant(0, 0, 1.0);
        b.set_constant(1, 1, 1.0);
        b.add_coeff(0, 0, 0, -1.0);
        b.add_coeff(0, 1, 1, 1.0);
        p.add_block(b);
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.y[0], 1.0, epsilon = 1e-7);
        assert!(sol.min_eigenvalues.iter().all(|&e| e >= -1e-9));
    }

    #[test]
    fn norm_epigraph_fixed_residual() {
        // r = (3, 4), minimize t  →  t* = 5
        let r = AffineVec::constant(vec![3.0, 4.0]);
        let mut p = SdpProblem::new(vec![1.0]);
        p.add_block(norm_epigraph_block(&r, 0, 1));
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.y[0], 5.0, epsilon = 1e-6);
    }

    #[test]
    fn norm_epigraph_zero_residual_is_nonnegativity() {
        let r = AffineVec::constant(vec![0.0, 0.0]);
        let mut p = SdpProblem::new(vec![1.0]);
        p.add_block(norm_epigraph_block(&r, 0, 1));
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.y[0].abs() <= 1e-7);
    }

    #[test]
    fn norm_epigraph_affine_residual() {
        // r = (y1 - 1), minimize t  →  t* = 0 at y1 = 1
        let mut r = AffineVec::zeros(1);
        r.set_constant_component(0, -1.0);
        r.add_term(0, 1, 1.0);
        let mut p = SdpProblem::new(vec![1.0, 0.0]);
        p.add_block(norm_epigraph_block(&r, 0, 2));
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.y[0].abs() <= 1e-6, "t* = {}", sol.y[0]);
        assert_relative_eq!(sol.y[1], 1.0, epsilon = 1e-5);
    }

    #[test]
    fn equality_constrained_projection() {
        // minimize t s.t. ‖(y1, y2) - (1, 2)‖ ≤ t, y1 + y2 = 1
        // optimum: projection of (1,2) onto the line, t* = |1-3|/√2 = √2
        let mut r = AffineVec::zeros(2);
        r.set_constant_component(0, -1.0);
        r.add_term(0, 1, 1.0);
        r.set_constant_component(1, -2.0);
        r.add_term(1, 2, 1.0);
        let mut p = SdpProblem::new(vec![1.0, 0.0, 0.0]);
        p.add_block(norm_epigraph_block(&r, 0, 3));
        p.add_equality(&[0.0, 1.0, 1.0], 1.0);
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.y[0], std::f64::consts::SQRT_2, epsilon = 1e-6);
        assert_relative_eq!(sol.y[1] + sol.y[2], 1.0, epsilon = 1e-9);
        // position along the flat direction is only sqrt(gap)-accurate
        assert_relative_eq!(sol.y[1], 0.0, epsilon = 1e-4);
    }

    #[test]
    fn infeasible_problem_detected() {
        // [y] ⪰ 0 and [-1 - y] ⪰ 0 cannot both hold
        let mut p = SdpProblem::new(vec![1.0]);
        let mut b1 = Block::new(1, 1);
        b1.add_coeff(0, 0, 0, 1.0);
        let mut b2 = Block::new(1, 1);
        b2.set_constant(0, 0, -1.0);
        b2.add_coeff(0, 0, 0, -1.0);
        p.add_block(b1);
        p.add_block(b2);
        let sol = solve_default(&p);
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn solver_is_deterministic_bitwise() {
        let mut p = SdpProblem::new(vec![1.0, 0.5]);
        let mut b = Block::new(3, 2);
        b.set_constant(0, 0, 2.0);
        b.set_constant(1, 1, 1.0);
        b.set_constant(2, 2, 3.0);
        b.set_constant(0, 2, 0.5);
        b.add_coeff(0, 0, 0, 1.0);
        b.add_coeff(0, 0, 1, 0.25);
        b.add_coeff(1, 1, 2, -0.5);
        b.add_coeff(1, 2, 2, 1.0);
        p.add_block(b);
        let s1 = solve_default(&p);
        let s2 = solve_default(&p);
        assert_eq!(s1.status, s2.status);
        assert_eq!(s1.iterations, s2.iterations);
        for (a, b) in s1.y.iter().zip(&s2.y) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(s1.primal_objective.to_bits(), s2.primal_objective.to_bits());
        assert_eq!(s1.duality_gap.to_bits(), s2.duality_gap.to_bits());
    }

    #[test]
    fn perturbed_solution_stays_nearly_feasible() {
        // well-conditioned: maximize λ s.t. diag(1-λ, 1+λ) ⪰ 0
        let mut p = SdpProblem::new(vec![-1.0]);
        let mut b = Block::new(2, 1);
        b.set_constant(0, 0, 1.0);
        b.set_constant(1, 1, 1.0);
        b.add_coeff(0, 0, 0, -1.0);
        b.add_coeff(0, 1, 1, 1.0);
        p.add_block(b);
        let sol = solve_default(&p);
        let tol = SdpOptions::default().tol;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let y: Vec<f64> =
                sol.y.iter().map(|v| v + tol * (rng.random::<f64>() * 2.0 - 1.0)).collect();
            for block in p.blocks() {
                let s = block.eval(&y);
                assert!(min_eigenvalue(&s).unwrap() >= -10.0 * tol);
            }
        }
    }

    #[test]
    fn random_diagonal_lps_match_closed_form() {
        // minimize c·y s.t. diag(y_i) ⪰ 0 and diag(u_i - y_i) ⪰ 0 with c > 0
        // → y* = 0; with c < 0 → y* = u.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for trial in 0..10 {
            let m = 4;
            let c: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let u: Vec<f64> = (0..m).map(|_| 0.5 + rng.random::<f64>()).collect();
            let mut p = SdpProblem::new(c.clone());
            let mut lower = Block::new(m, m);
            let mut upper = Block::new(m, m);
            for i in 0..m {
                lower.add_coeff(i, i, i, 1.0);
                upper.set_constant(i, i, u[i]);
                upper.add_coeff(i, i, i, -1.0);
            }
            p.add_block(lower);
            p.add_block(upper);
            let sol = solve_default(&p);
            assert_eq!(sol.status, SdpStatus::Optimal, "trial {trial}");
            for i in 0..m {
                let expect = if c[i] > 0.0 { 0.0 } else { u[i] };
                assert_relative_eq!(sol.y[i], expect, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn dump_text_roundtrips_structure() {
        let mut p = SdpProblem::new(vec![1.0]);
        let mut b = Block::new(2, 1);
        b.set_constant(0, 1, -0.5);
        b.add_coeff(0, 0, 0, 1.0);
        p.add_block(b);
        p.add_equality(&[1.0], 1.0);
        let dump = p.dump_text();
        assert!(dump.contains("vars 1"));
        assert!(dump.contains("block 0 dim 2"));
        assert!(dump.contains("const 0 1"));
        assert!(dump.contains("coeff 0 0 0"));
        assert!(dump.contains("eq"));
    }

    #[test]
    fn validate_rejects_oversized_blocks() {
        let mut p = SdpProblem::new(vec![1.0]);
        p.add_block(Block::new(65, 1));
        assert!(matches!(solve(&p, SdpOptions::default()), Err(SdpError::InvalidProblem(_))));
    }
}
