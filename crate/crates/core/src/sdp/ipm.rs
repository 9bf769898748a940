//! Primal-dual path-following interior point engine with Nesterov-Todd
//! scaling and a Mehrotra-style adaptive centering parameter.
//!
//! The problem form is `min c·y` over `S(y) = C + Σ y_i A_i ⪰ 0`, `E y = d`.
//! Iterates keep `S ≻ 0` and `Z ≻ 0`; dual equality residuals shrink by the
//! dual step length each iteration. The Schur complement `M_ij = <A_i, W A_j W>`
//! is formed densely and factored by Cholesky, which is cheap at the variable
//! counts this crate produces (every caller keeps `m` small by construction).

use super::{Block, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
use crate::linalg::{dot, min_eigenvalue, Cholesky, Mat, SymEigen};

/// Fraction-to-boundary damping.
const STEP_DAMP: f64 = 0.98;
/// Consecutive stalled iterations tolerated before giving up.
const MAX_STALLS: usize = 4;

pub(super) fn solve_two_phase(
    problem: &SdpProblem,
    opts: SdpOptions,
    init: Option<&[f64]>,
) -> SdpSolution {
    let prep = Prepared::new(problem);

    // starting point: caller hint if strictly feasible, else the min-norm
    // solution of the equalities, else a feasibility phase
    let mut y0 = match init {
        Some(hint) if hint.len() == problem.num_vars() => hint.to_vec(),
        _ => match min_norm_equality_solution(problem) {
            Some(y) => y,
            None => return failure(problem, SdpStatus::NumericalFailure),
        },
    };

    let margin = strict_margin(problem, &y0);
    if !margin.is_finite() {
        return failure(problem, SdpStatus::NumericalFailure);
    }
    if margin <= 1e-9 {
        match feasibility_phase(problem, &y0, opts) {
            PhaseOutcome::Feasible(y) => y0 = y,
            PhaseOutcome::Infeasible => return failure(problem, SdpStatus::Infeasible),
            PhaseOutcome::Failed => return failure(problem, SdpStatus::NumericalFailure),
        }
    }

    let run = ipm(&prep, y0, opts, None);
    finalize(problem, run)
}

/// Max-slack feasibility phase: maximize t subject to the shifted blocks
/// `S_b(y) - t I ⪰ 0` and a cap on t, stopping as soon as the iterate is
/// comfortably interior.
enum PhaseOutcome {
    Feasible(Vec<f64>),
    Infeasible,
    Failed,
}

fn feasibility_phase(problem: &SdpProblem, y0: &[f64], opts: SdpOptions) -> PhaseOutcome {
    let m = problem.num_vars();
    let scale = 1.0
        + problem
            .blocks()
            .iter()
            .flat_map(|b| b.constant().entries())
            .map(|&(_, _, v)| v.abs())
            .fold(0.0, f64::max);
    let t_cap = 10.0 * scale;
    let delta_exit = (0.01 * scale).min(1.0);

    let mut aug = SdpProblem::new({
        let mut c = vec![0.0; m + 1];
        c[m] = -1.0; // maximize t
        c
    });
    for block in problem.blocks() {
        let mut b = Block::new(block.dim(), m + 1);
        for &(i, j, v) in block.constant().entries() {
            b.set_constant(i, j, v);
        }
        for (var, coeff) in block.coeffs().iter().enumerate() {
            for &(i, j, v) in coeff.entries() {
                b.add_coeff(var, i, j, v);
            }
        }
        for i in 0..block.dim() {
            b.add_coeff(m, i, i, -1.0);
        }
        aug.add_block(b);
    }
    let mut cap = Block::new(1, m + 1);
    cap.set_constant(0, 0, t_cap);
    cap.add_coeff(m, 0, 0, -1.0);
    aug.add_block(cap);
    if let Some(eq) = problem.equalities() {
        for r in 0..eq.a.rows() {
            let mut row = eq.a.row(r).to_vec();
            row.push(0.0);
            aug.add_equality(&row, eq.b[r]);
        }
    }

    let t0 = strict_margin(problem, y0) - 1.0;
    let mut y_aug = y0.to_vec();
    y_aug.push(t0);

    let aug_prep = Prepared::new(&aug);
    let run = ipm(&aug_prep, y_aug, opts, Some(&|y: &[f64]| y[m] >= delta_exit));
    match run.status {
        RunStatus::EarlyStop => PhaseOutcome::Feasible(run.y[..m].to_vec()),
        RunStatus::Converged | RunStatus::IterLimit => {
            // converged (or ran out of budget) without ever reaching the exit
            // margin: the best slack found decides feasibility
            let t = run.y[m];
            if t > 1e-9 {
                PhaseOutcome::Feasible(run.y[..m].to_vec())
            } else if run.status == RunStatus::Converged {
                PhaseOutcome::Infeasible
            } else {
                PhaseOutcome::Failed
            }
        }
        RunStatus::Numerical => PhaseOutcome::Failed,
    }
}

fn failure(problem: &SdpProblem, status: SdpStatus) -> SdpSolution {
    let y = vec![0.0; problem.num_vars()];
    SdpSolution {
        status,
        min_eigenvalues: block_min_eigs(problem, &y),
        primal_objective: 0.0,
        duality_gap: f64::INFINITY,
        dual_blocks: problem.blocks().iter().map(|b| Mat::identity(b.dim())).collect(),
        iterations: 0,
        y,
    }
}

fn finalize(problem: &SdpProblem, run: Run) -> SdpSolution {
    let status = match run.status {
        RunStatus::Converged => SdpStatus::Optimal,
        RunStatus::IterLimit | RunStatus::EarlyStop => SdpStatus::MaxIterations,
        RunStatus::Numerical => SdpStatus::NumericalFailure,
    };
    SdpSolution {
        status,
        primal_objective: dot(problem.objective(), &run.y),
        duality_gap: run.gap,
        min_eigenvalues: block_min_eigs(problem, &run.y),
        dual_blocks: run.z,
        iterations: run.iterations,
        y: run.y,
    }
}

fn block_min_eigs(problem: &SdpProblem, y: &[f64]) -> Vec<f64> {
    problem
        .blocks()
        .iter()
        .map(|b| min_eigenvalue(&b.eval(y)).unwrap_or(f64::NAN))
        .collect()
}

/// Smallest block eigenvalue at `y`; the strict-feasibility margin.
fn strict_margin(problem: &SdpProblem, y: &[f64]) -> f64 {
    problem
        .blocks()
        .iter()
        .map(|b| min_eigenvalue(&b.eval(y)).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min)
}

fn min_norm_equality_solution(problem: &SdpProblem) -> Option<Vec<f64>> {
    match problem.equalities() {
        None => Some(vec![0.0; problem.num_vars()]),
        Some(eq) => {
            let p = eq.a.rows();
            let mut gram = Mat::zeros(p, p);
            for r in 0..p {
                for c in 0..p {
                    gram[(r, c)] = dot(eq.a.row(r), eq.a.row(c));
                }
            }
            for r in 0..p {
                gram[(r, r)] += 1e-12;
            }
            let chol = Cholesky::new(&gram).ok()?;
            let w = chol.solve(&eq.b);
            Some(eq.a.mul_t_vec(&w))
        }
    }
}

// ---------------------------------------------------------------------------
// core iteration
// ---------------------------------------------------------------------------

struct Prepared<'a> {
    problem: &'a SdpProblem,
    /// per block: variables with a nonzero coefficient there
    touched: Vec<Vec<usize>>,
    /// per block: dense versions of coefficient matrices that are not sparse
    /// (index aligned with `touched`; None when the sparse path is cheaper)
    dense_coeffs: Vec<Vec<Option<Mat>>>,
    n_total: f64,
}

impl<'a> Prepared<'a> {
    fn new(problem: &'a SdpProblem) -> Self {
        let mut touched = Vec::new();
        let mut dense_coeffs = Vec::new();
        for block in problem.blocks() {
            let mut vars = Vec::new();
            let mut dense = Vec::new();
            for (v, coeff) in block.coeffs().iter().enumerate() {
                if !coeff.is_empty() {
                    vars.push(v);
                    dense.push(if coeff.entries().len() > block.dim() {
                        Some(coeff.to_dense(block.dim()))
                    } else {
                        None
                    });
                }
            }
            touched.push(vars);
            dense_coeffs.push(dense);
        }
        let n_total = problem.blocks().iter().map(|b| b.dim()).sum::<usize>() as f64;
        Prepared { problem, touched, dense_coeffs, n_total }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RunStatus {
    Converged,
    EarlyStop,
    IterLimit,
    Numerical,
}

struct Run {
    status: RunStatus,
    y: Vec<f64>,
    z: Vec<Mat>,
    gap: f64,
    iterations: usize,
}

type StopFn<'s> = &'s dyn Fn(&[f64]) -> bool;

fn ipm(prep: &Prepared, y0: Vec<f64>, opts: SdpOptions, early_stop: Option<StopFn>) -> Run {
    let problem = prep.problem;
    let m = problem.num_vars();
    let c = problem.objective();
    let c_scale = 1.0 + c.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let (eq_a, eq_b) = match problem.equalities() {
        Some(eq) => (Some(&eq.a), Some(eq.b.as_slice())),
        None => (None, None),
    };
    let p_eq = eq_a.map_or(0, Mat::rows);

    let mut y = y0;
    let mut z: Vec<Mat> = problem.blocks().iter().map(|b| Mat::identity(b.dim())).collect();
    let mut nu = vec![0.0; p_eq];

    let mut s: Vec<Mat> = problem.blocks().iter().map(|b| b.eval(&y)).collect();
    let mut s_chol: Vec<Cholesky> = Vec::with_capacity(s.len());
    for sb in &s {
        match Cholesky::new(sb) {
            Ok(ch) => s_chol.push(ch),
            Err(_) => return run_failed(y, z),
        }
    }
    let mut z_chol: Vec<Cholesky> =
        z.iter().map(|zb| Cholesky::new(zb).expect("identity is SPD")).collect();

    let mut stalls = 0usize;
    let mut gap = f64::INFINITY;

    for iter in 0..opts.max_iter {
        // residuals
        let mut r_d = c.to_vec(); // c - A*(Z) - Eᵀν
        for (bi, block) in problem.blocks().iter().enumerate() {
            for &v in &prep.touched[bi] {
                r_d[v] -= block.coeffs()[v].dot(&z[bi]);
            }
        }
        if let Some(a) = eq_a {
            let etnu = a.mul_t_vec(&nu);
            for (r, e) in r_d.iter_mut().zip(&etnu) {
                *r -= e;
            }
        }
        let r_e: Vec<f64> = match (eq_a, eq_b) {
            (Some(a), Some(b)) => {
                let ay = a.mul_vec(&y);
                b.iter().zip(&ay).map(|(bi, ai)| bi - ai).collect()
            }
            _ => Vec::new(),
        };

        gap = s.iter().zip(&z).map(|(sb, zb)| sb.dot(zb)).sum::<f64>();
        let p_obj = dot(c, &y);
        let d_obj = -problem
            .blocks()
            .iter()
            .zip(&z)
            .map(|(b, zb)| b.constant().dot(zb))
            .sum::<f64>()
            + eq_b.map_or(0.0, |b| dot(b, &nu));
        // weak duality: <S, Z> ≥ 0 for PSD iterates, and once the dual
        // residual is small the primal objective dominates the dual one
        debug_assert!(
            gap >= -1e-9 * (1.0 + p_obj.abs()),
            "weak duality violated: <S,Z> = {gap}"
        );
        let r_d_norm = r_d.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let r_e_norm = r_e.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        debug_assert!(
            r_d_norm > 1e-8 * c_scale || p_obj - d_obj >= -1e-6 * (1.0 + p_obj.abs()),
            "weak duality violated: primal {p_obj} < dual {d_obj}"
        );

        if std::env::var_os("CHSH_SDP_TRACE").is_some() {
            eprintln!(
                "iter {iter:3} gap {gap:10.3e} p {p_obj:12.6e} d {d_obj:12.6e} rd {r_d_norm:9.2e} re {r_e_norm:9.2e}"
            );
        }
        let b_scale = 1.0 + eq_b.map_or(0.0, |b| b.iter().fold(0.0f64, |a, &v| a.max(v.abs())));
        // primal feasibility is maintained exactly and the complementarity
        // gap certifies the objective; the dual residual gets a looser gate
        // because it stalls on degenerate optimal faces
        if gap <= opts.tol * (1.0 + p_obj.abs())
            && gap <= 1e-8
            && r_d_norm <= 1e-6 * c_scale
            && r_e_norm <= 1e-9 * b_scale
        {
            return Run { status: RunStatus::Converged, y, z, gap, iterations: iter };
        }

        let mu = gap / prep.n_total;

        // Nesterov-Todd scaling point per block: W S W = Z
        let mut w = Vec::with_capacity(s.len());
        for (s_ch, zb) in s_chol.iter().zip(&z) {
            match nt_scaling(s_ch, zb) {
                Some(wb) => w.push(wb),
                None => return run_failed(y, z),
            }
        }

        // Schur complement M_ij = Σ_b <A_i, W A_j W>
        let mut schur = Mat::zeros(m, m);
        for (bi, block) in problem.blocks().iter().enumerate() {
            let wb = &w[bi];
            for (slot_j, &vj) in prep.touched[bi].iter().enumerate() {
                let vjm = scaled_coeff(block, prep, bi, slot_j, wb);
                for &vi in &prep.touched[bi] {
                    if vi > vj {
                        break;
                    }
                    schur[(vi, vj)] += block.coeffs()[vi].dot(&vjm);
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                schur[(i, j)] = schur[(j, i)];
            }
        }

        let m_chol = match chol_with_ridge(&mut schur) {
            Some(ch) => ch,
            None => return run_failed(y, z),
        };

        // eliminate equality multipliers through the Schur factor
        let eq_solver = eq_a.map(|a| EqSolver::new(a, &m_chol));

        let s_inv: Vec<Mat> = s_chol
            .iter()
            .map(|ch| {
                let n = ch.factor().rows();
                let inv = ch.forward_solve_mat(&Mat::identity(n));
                // S⁻¹ = L⁻ᵀ L⁻¹: forward-solve gave L⁻¹, now apply transpose
                let mut out = inv.transpose().mul(&inv);
                out.symmetrize();
                out
            })
            .collect();

        let direction = |sigma: f64| -> Option<Direction> {
            // G_b = σ μ S⁻¹ - Z ; solve M Δy - Eᵀ Δν = A*(G) - r_d, E Δy = r_e
            let mut g_vec = vec![0.0; m];
            let mut g_blocks = Vec::with_capacity(s.len());
            for (bi, block) in problem.blocks().iter().enumerate() {
                let mut gb = s_inv[bi].scaled(sigma * mu);
                gb.axpy(-1.0, &z[bi]);
                for &v in &prep.touched[bi] {
                    g_vec[v] += block.coeffs()[v].dot(&gb);
                }
                g_blocks.push(gb);
            }
            for (gi, ri) in g_vec.iter_mut().zip(&r_d) {
                *gi -= ri;
            }

            let (dy, dnu) = match &eq_solver {
                None => (m_chol.solve(&g_vec), Vec::new()),
                Some(es) => es.solve(&g_vec, &r_e, &m_chol),
            };

            let mut ds = Vec::with_capacity(s.len());
            let mut dz = Vec::with_capacity(s.len());
            for (bi, block) in problem.blocks().iter().enumerate() {
                let mut dsb = Mat::zeros(block.dim(), block.dim());
                for &v in &prep.touched[bi] {
                    if dy[v] != 0.0 {
                        block.coeffs()[v].add_to(&mut dsb, dy[v]);
                    }
                }
                let mut dzb = g_blocks[bi].clone();
                let wds = w[bi].mul(&dsb).mul(&w[bi]);
                dzb.axpy(-1.0, &wds);
                dzb.symmetrize();
                ds.push(dsb);
                dz.push(dzb);
            }
            Some(Direction { dy, dnu, ds, dz })
        };

        // predictor: affine direction fixes the centering parameter
        let affine = match direction(0.0) {
            Some(d) => d,
            None => return run_failed(y, z),
        };
        let ap_aff = step_damp(max_step_lengths(&s_chol, &affine.ds));
        let ad_aff = step_damp(max_step_lengths(&z_chol, &affine.dz));
        let mut gap_aff = 0.0;
        for (bi, sb) in s.iter().enumerate() {
            let mut s_trial = sb.clone();
            s_trial.axpy(ap_aff, &affine.ds[bi]);
            let mut z_trial = z[bi].clone();
            z_trial.axpy(ad_aff, &affine.dz[bi]);
            gap_aff += s_trial.dot(&z_trial);
        }
        let sigma = ((gap_aff / gap).max(0.0).powi(3)).clamp(1e-8, 0.9999);

        let dir = match direction(sigma) {
            Some(d) => d,
            None => return run_failed(y, z),
        };

        let mut alpha_p = step_damp(max_step_lengths(&s_chol, &dir.ds));
        let mut alpha_d = step_damp(max_step_lengths(&z_chol, &dir.dz));

        // take the step; back off if rounding pushed an iterate to the boundary
        let mut accepted = false;
        for _ in 0..30 {
            let y_new: Vec<f64> =
                y.iter().zip(&dir.dy).map(|(a, d)| a + alpha_p * d).collect();
            let s_new: Vec<Mat> = problem.blocks().iter().map(|b| b.eval(&y_new)).collect();
            let s_chol_new: Option<Vec<Cholesky>> =
                s_new.iter().map(|sb| Cholesky::new(sb).ok()).collect();
            let z_new: Vec<Mat> = z
                .iter()
                .zip(&dir.dz)
                .map(|(zb, dzb)| {
                    let mut zn = zb.clone();
                    zn.axpy(alpha_d, dzb);
                    zn.symmetrize();
                    zn
                })
                .collect();
            let z_chol_new: Option<Vec<Cholesky>> =
                z_new.iter().map(|zb| Cholesky::new(zb).ok()).collect();
            match (s_chol_new, z_chol_new) {
                (Some(sc), Some(zc)) => {
                    y = y_new;
                    s = s_new;
                    s_chol = sc;
                    z = z_new;
                    z_chol = zc;
                    for (nui, d) in nu.iter_mut().zip(&dir.dnu) {
                        *nui += alpha_d * d;
                    }
                    accepted = true;
                    break;
                }
                _ => {
                    alpha_p *= 0.5;
                    alpha_d *= 0.5;
                }
            }
        }
        if !accepted {
            return run_failed(y, z);
        }
        if alpha_p < 1e-10 && alpha_d < 1e-10 {
            stalls += 1;
            if stalls >= MAX_STALLS {
                return run_failed(y, z);
            }
        } else {
            stalls = 0;
        }

        if let Some(stop) = early_stop {
            if stop(&y) {
                return Run { status: RunStatus::EarlyStop, y, z, gap, iterations: iter + 1 };
            }
        }
    }

    Run { status: RunStatus::IterLimit, y, z, gap, iterations: opts.max_iter }
}

fn run_failed(y: Vec<f64>, z: Vec<Mat>) -> Run {
    Run { status: RunStatus::Numerical, y, z, gap: f64::INFINITY, iterations: 0 }
}

struct Direction {
    dy: Vec<f64>,
    dnu: Vec<f64>,
    ds: Vec<Mat>,
    dz: Vec<Mat>,
}

/// Solver for the equality-bordered Schur system.
struct EqSolver {
    w2: Mat, // M⁻¹ Eᵀ
    t_chol: Cholesky,
    a: Mat,
}

impl EqSolver {
    fn new(a: &Mat, m_chol: &Cholesky) -> Self {
        let p = a.rows();
        let m = a.cols();
        let mut w2 = Mat::zeros(m, p);
        for r in 0..p {
            let col = m_chol.solve(a.row(r));
            for i in 0..m {
                w2[(i, r)] = col[i];
            }
        }
        let mut t = Mat::zeros(p, p);
        for r in 0..p {
            for c2 in 0..p {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += a[(r, i)] * w2[(i, c2)];
                }
                t[(r, c2)] = acc;
            }
        }
        t.symmetrize();
        for r in 0..p {
            t[(r, r)] += 1e-14 * (1.0 + t[(r, r)].abs());
        }
        let t_chol = Cholesky::new(&t).expect("equality Gram must be SPD");
        EqSolver { w2, t_chol, a: a.clone() }
    }

    /// Solve `M Δy - Eᵀ Δν = g`, `E Δy = r_e`.
    fn solve(&self, g: &[f64], r_e: &[f64], m_chol: &Cholesky) -> (Vec<f64>, Vec<f64>) {
        let w1 = m_chol.solve(g);
        let ew1 = self.a.mul_vec(&w1);
        let rhs: Vec<f64> = r_e.iter().zip(&ew1).map(|(r, e)| r - e).collect();
        let dnu = self.t_chol.solve(&rhs);
        let corr = self.w2.mul_vec(&dnu);
        let dy: Vec<f64> = w1.iter().zip(&corr).map(|(a, b)| a + b).collect();
        (dy, dnu)
    }
}

/// `W A_j W` for one touched coefficient, using outer products of W columns
/// for sparse coefficients and plain matrix products for dense ones.
fn scaled_coeff(block: &Block, prep: &Prepared, bi: usize, slot: usize, w: &Mat) -> Mat {
    let var = prep.touched[bi][slot];
    if let Some(dense) = &prep.dense_coeffs[bi][slot] {
        let mut out = w.mul(dense).mul(w);
        out.symmetrize();
        return out;
    }
    let n = block.dim();
    let mut out = Mat::zeros(n, n);
    for &(a, b, v) in block.coeffs()[var].entries() {
        // W (e_a e_bᵀ + e_b e_aᵀ) W = w_a w_bᵀ + w_b w_aᵀ (rows of W by symmetry)
        for r in 0..n {
            let ca = v * w[(r, a)];
            if ca != 0.0 {
                let row_b = w.row(b);
                let out_row = out.row_mut(r);
                for (o, &x) in out_row.iter_mut().zip(row_b) {
                    *o += ca * x;
                }
            }
            if a != b {
                let cb = v * w[(r, b)];
                if cb != 0.0 {
                    let row_a = w.row(a);
                    let out_row = out.row_mut(r);
                    for (o, &x) in out_row.iter_mut().zip(row_a) {
                        *o += cb * x;
                    }
                }
            }
        }
    }
    out
}

/// NT scaling point: the unique SPD W with W S W = Z, computed through the
/// Cholesky factor of S: with T = Lᵀ Z L = P Σ Pᵀ,
/// W = L⁻ᵀ (T)^{1/2} L⁻¹ = L⁻ᵀ P Σ^{1/2} Pᵀ L⁻¹.
fn nt_scaling(s_chol: &Cholesky, z: &Mat) -> Option<Mat> {
    let l = s_chol.factor();
    let mut t = l.transpose().mul(z).mul(l);
    t.symmetrize();
    let eig_t = SymEigen::new(&t).ok()?;
    if !eig_t.values.iter().all(|v| v.is_finite()) {
        return None;
    }
    let root = eig_t.apply(|v| v.max(0.0).sqrt());
    // W = L⁻ᵀ root L⁻¹: two triangular solves
    let lt_root = s_chol.back_solve_mat(&root); // L⁻ᵀ root
    let mut w = s_chol.back_solve_mat(&lt_root.transpose()); // L⁻ᵀ (root L⁻¹... )
    w.symmetrize();
    if w.data().iter().all(|v| v.is_finite()) {
        Some(w)
    } else {
        None
    }
}

/// Largest α with `P + α ΔP ⪰ 0` over all blocks, via the smallest
/// eigenvalue of L⁻¹ ΔP L⁻ᵀ.
fn max_step_lengths(chols: &[Cholesky], deltas: &[Mat]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (ch, d) in chols.iter().zip(deltas) {
        let f = ch.forward_solve_mat(d); // L⁻¹ ΔP
        let mut k = ch.forward_solve_mat(&f.transpose()); // L⁻¹ ΔPᵀ L⁻ᵀ (transposed)
        k.symmetrize();
        let lam = match min_eigenvalue(&k) {
            Ok(l) => l,
            Err(_) => return 0.0,
        };
        if lam < -1e-13 {
            alpha = alpha.min(-1.0 / lam);
        }
    }
    alpha
}

fn step_damp(alpha_max: f64) -> f64 {
    (STEP_DAMP * alpha_max).min(1.0)
}

fn chol_with_ridge(m: &mut Mat) -> Option<Cholesky> {
    let n = m.rows();
    let mean_diag = (0..n).map(|i| m[(i, i)].abs()).sum::<f64>() / n as f64;
    let mut ridge = 0.0;
    for attempt in 0..4 {
        if attempt > 0 {
            let add = if ridge == 0.0 { 1e-14 * (1.0 + mean_diag) } else { ridge * 100.0 };
            for i in 0..n {
                m[(i, i)] += add - ridge;
            }
            ridge = add;
        }
        if let Ok(ch) = Cholesky::new(m) {
            return Some(ch);
        }
    }
    None
}
