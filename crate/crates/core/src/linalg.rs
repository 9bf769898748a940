//! Dense real linear algebra for the small matrices this crate works with.
//!
//! Everything here is sized for symmetric blocks of dimension ≤ 64: plain
//! row-major storage, Householder tridiagonalization + implicit QL for the
//! symmetric eigenproblem, and an in-place Cholesky. No external linear
//! algebra crates are used so that solver behaviour is bit-reproducible.

use std::fmt;

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols.min(8) {
                write!(f, "{:>11.4e} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Mat {
        let mut m = self.clone();
        m.scale(a);
        m
    }

    pub fn add_assign(&mut self, other: &Mat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Mat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        m
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    /// `self * v` for a vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ * v`.
    pub fn mul_t_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    /// Frobenius inner product `<self, other>`.
    pub fn dot(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        dot(&self.data, &other.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Force exact symmetry by averaging with the transpose.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows * other.rows, self.cols * other.cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let s = self[(a, b)];
                if s == 0.0 {
                    continue;
                }
                for c in 0..other.rows {
                    for d in 0..other.cols {
                        out[(a * other.rows + c, b * other.cols + d)] = s * other[(c, d)];
                    }
                }
            }
        }
        out
    }

    /// Congruence `Q * self * Qᵀ`.
    pub fn congruence(&self, q: &Mat) -> Mat {
        q.mul(self).mul(&q.transpose())
    }
}

/// Dot product with four accumulators. The fixed summation order keeps
/// results reproducible while letting the loop pipeline.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..chunks {
        let i = 4 * k;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Errors from the dense factorizations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: String },
    #[error("eigenvalue iteration failed to converge")]
    EigNoConvergence,
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Mat,
}

impl Cholesky {
    /// Factor `a = L Lᵀ`. Only the lower triangle of `a` is read.
    pub fn new(a: &Mat) -> Result<Self, LinalgError> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut l = a.clone();
        for k in 0..n {
            // pivot
            let mut d = l[(k, k)] - dot(&l.row(k)[..k], &l.row(k)[..k]);
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite {
                    index: k,
                    pivot: format!("{d:e}"),
                });
            }
            d = d.sqrt();
            l[(k, k)] = d;
            let inv = 1.0 / d;
            // column k below the pivot
            for i in (k + 1)..n {
                let (top, bottom) = l.data.split_at_mut(i * n);
                let row_k = &top[k * n..k * n + k];
                let row_i = &mut bottom[..n];
                let s = dot(&row_i[..k], row_k);
                row_i[k] = (row_i[k] - s) * inv;
            }
        }
        // zero the strict upper triangle so the factor is directly usable
        for i in 0..n {
            for j in (i + 1)..n {
                l[(i, j)] = 0.0;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Mat {
        &self.l
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.l.rows;
        assert_eq!(b.len(), n);
        // forward: L y = b
        for i in 0..n {
            let s = dot(&self.l.row(i)[..i], &b[..i]);
            b[i] = (b[i] - s) / self.l[(i, i)];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.l[(j, i)] * b[j];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `L⁻ᵀ m` (back substitution applied to each column).
    pub fn back_solve_mat(&self, m: &Mat) -> Mat {
        let n = self.l.rows;
        assert_eq!(m.rows, n);
        let mut out = m.clone();
        for c in 0..m.cols {
            for i in (0..n).rev() {
                let mut s = out[(i, c)];
                for j in (i + 1)..n {
                    s -= self.l[(j, i)] * out[(j, c)];
                }
                out[(i, c)] = s / self.l[(i, i)];
            }
        }
        out
    }

    /// `L⁻¹ m` (forward substitution applied to each column).
    pub fn forward_solve_mat(&self, m: &Mat) -> Mat {
        let n = self.l.rows;
        assert_eq!(m.rows, n);
        let mut out = m.clone();
        for c in 0..m.cols {
            for i in 0..n {
                let mut s = out[(i, c)];
                for j in 0..i {
                    s -= self.l[(i, j)] * out[(j, c)];
                }
                out[(i, c)] = s / self.l[(i, i)];
            }
        }
        out
    }

    /// log det A = 2 Σ log L_ii
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.l.rows).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }
}

/// Eigendecomposition of a symmetric matrix: `a = V diag(λ) Vᵀ` with
/// eigenvalues ascending and orthonormal columns in `V`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEigen {
    pub fn new(a: &Mat) -> Result<Self, LinalgError> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        if n == 0 {
            return Ok(SymEigen { values: vec![], vectors: Mat::zeros(0, 0) });
        }
        let mut v = a.clone();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tridiagonalize(&mut v, &mut d, &mut e);
        ql_implicit(&mut v, &mut d, &mut e)?;
        // sort ascending, reordering eigenvector columns
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
        let mut vectors = Mat::zeros(n, n);
        for (new_c, &old_c) in order.iter().enumerate() {
            for r in 0..n {
                vectors[(r, new_c)] = v[(r, old_c)];
            }
        }
        Ok(SymEigen { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Rebuild `V f(diag) Vᵀ` for a function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let fv = f(self.values[c]);
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        scaled.mul(&self.vectors.transpose())
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Mat) -> Result<f64, LinalgError> {
    Ok(sym_eigenvalues(a)?[0])
}

/// Eigenvalues only (ascending), skipping eigenvector accumulation; several
/// times cheaper than [`SymEigen`] and used in solver inner loops.
pub fn sym_eigenvalues(a: &Mat) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return Ok(vec![]);
    }
    let mut work = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize_values(&mut work, &mut d, &mut e);
    ql_values(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder reduction to tridiagonal form without accumulating the
/// orthogonal transform.
fn tridiagonalize_values(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows();
    for i in (1..n).rev() {
        let l = i;
        let mut h = 0.0;
        if l > 1 {
            let mut scale = 0.0;
            for k in 0..l {
                scale += v[(i, k)].abs();
            }
            if scale == 0.0 {
                e[i] = v[(i, l - 1)];
            } else {
                for k in 0..l {
                    v[(i, k)] /= scale;
                    h += v[(i, k)] * v[(i, k)];
                }
                let mut f = v[(i, l - 1)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                v[(i, l - 1)] = f - g;
                let mut tau = 0.0;
                for j in 0..l {
                    let mut g2 = 0.0;
                    for k in 0..=j {
                        g2 += v[(j, k)] * v[(i, k)];
                    }
                    for k in (j + 1)..l {
                        g2 += v[(k, j)] * v[(i, k)];
                    }
                    e[j] = g2 / h;
                    tau += e[j] * v[(i, j)];
                }
                let hh = tau / (2.0 * h);
                for j in 0..l {
                    f = v[(i, j)];
                    let g2 = e[j] - hh * f;
                    e[j] = g2;
                    for k in 0..=j {
                        let upd = f * e[k] + g2 * v[(i, k)];
                        v[(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = v[(i, l - 1)];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = v[(i, i)];
    }
    e[0] = 0.0;
}

/// Implicit QL with Wilkinson shifts on the tridiagonal (d, e), values only.
fn ql_values(d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::EigNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut annihilated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    annihilated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let f2 = (d[i] - g) * s + 2.0 * c * b;
                p = s * f2;
                d[i + 1] = g + p;
                g = c * f2 - b;
            }
            if annihilated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Householder reduction to tridiagonal form, accumulating the transform.
/// On exit `v` holds the orthogonal matrix, `d` the diagonal, `e` the
/// subdiagonal (e[0] unused).
fn tridiagonalize(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows();
    for i in (1..n).rev() {
        let l = i; // length of the leading row segment
        let mut h = 0.0;
        if l > 1 {
            let mut scale = 0.0;
            for k in 0..l {
                scale += v[(i, k)].abs();
            }
            if scale == 0.0 {
                e[i] = v[(i, l - 1)];
            } else {
                for k in 0..l {
                    v[(i, k)] /= scale;
                    h += v[(i, k)] * v[(i, k)];
                }
                let mut f = v[(i, l - 1)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                v[(i, l - 1)] = f - g;
                let mut tau = 0.0;
                for j in 0..l {
                    v[(j, i)] = v[(i, j)] / h;
                    // form element of A·u
                    let mut g2 = 0.0;
                    for k in 0..=j {
                        g2 += v[(j, k)] * v[(i, k)];
                    }
                    for k in (j + 1)..l {
                        g2 += v[(k, j)] * v[(i, k)];
                    }
                    e[j] = g2 / h;
                    tau += e[j] * v[(i, j)];
                }
                let hh = tau / (2.0 * h);
                for j in 0..l {
                    f = v[(i, j)];
                    let g2 = e[j] - hh * f;
                    e[j] = g2;
                    for k in 0..=j {
                        let upd = f * e[k] + g2 * v[(i, k)];
                        v[(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = v[(i, l - 1)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    // accumulate transformations
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += v[(i, k)] * v[(k, j)];
                }
                for k in 0..i {
                    let upd = g * v[(k, i)];
                    v[(k, j)] -= upd;
                }
            }
        }
        d[i] = v[(i, i)];
        v[(i, i)] = 1.0;
        for j in 0..i {
            v[(j, i)] = 0.0;
            v[(i, j)] = 0.0;
        }
    }
}

/// Implicit QL with Wilkinson shifts on the tridiagonal (d, e), rotating the
/// accumulated eigenvectors along.
fn ql_implicit(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a negligible subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(LinalgError::EigNoConvergence);
            }
            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut annihilated = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    annihilated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate eigenvectors
                for k in 0..n {
                    f = v[(k, i + 1)];
                    v[(k, i + 1)] = s * v[(k, i)] + c * f;
                    v[(k, i)] = c * v[(k, i)] - s * f;
                }
            }
            if annihilated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Householder QR; returns (Q, R) with `self = Q R` and `R` upper triangular
/// with non-negative diagonal. For square Gaussian input, Q is Haar.
pub fn qr(a: &Mat) -> (Mat, Mat) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n);
    let mut r = a.clone();
    let mut q = Mat::identity(m);
    for k in 0..n.min(m - 1) {
        // Householder vector for column k
        let mut norm = 0.0;
        for i in k..m {
            norm += r[(i, k)] * r[(i, k)];
        }
        norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = r[(k, k)] - alpha;
        for i in (k + 1)..m {
            v[i - k] = r[(i, k)];
        }
        let vn2 = dot(&v, &v);
        if vn2 == 0.0 {
            continue;
        }
        // apply H = I - 2 v vᵀ / (vᵀv) to R (left) and accumulate into Q
        for c in k..n {
            let mut s = 0.0;
            for i in k..m {
                s += v[i - k] * r[(i, c)];
            }
            s *= 2.0 / vn2;
            for i in k..m {
                r[(i, c)] -= s * v[i - k];
            }
        }
        for rq in 0..m {
            let mut s = 0.0;
            for i in k..m {
                s += q[(rq, i)] * v[i - k];
            }
            s *= 2.0 / vn2;
            for i in k..m {
                q[(rq, i)] -= s * v[i - k];
            }
        }
    }
    // fix signs so diag(R) >= 0
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for c in 0..n {
                r[(k, c)] = -r[(k, c)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    for i in 0..m {
        for j in 0..i.min(n) {
            r[(i, j)] = 0.0;
        }
    }
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random::<f64>() * 2.0 - 1.0;
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let n = 12;
        let g = random_sym(n, 3);
        // g gᵀ + n I is SPD
        let mut a = g.mul(&g.transpose());
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        let chol = Cholesky::new(&a).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64) - 3.5).collect();
        let b = a.mul_vec(&x_true);
        let x = chol.solve(&b);
        for (xs, xt) in x.iter().zip(&x_true) {
            assert_relative_eq!(xs, xt, epsilon = 1e-9);
        }
        // reconstruction
        let rec = chol.factor().mul(&chol.factor().transpose());
        assert!(rec.sub(&a).frobenius_norm() < 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            Cholesky::new(&a),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn eigen_reconstructs_and_is_orthonormal() {
        for n in [1, 2, 3, 5, 13, 36] {
            let a = random_sym(n, 40 + n as u64);
            let eig = SymEigen::new(&a).unwrap();
            // A v = λ v
            let recon = eig.apply(|x| x);
            assert!(
                recon.sub(&a).frobenius_norm() < 1e-10 * (1.0 + a.frobenius_norm()),
                "reconstruction failed at n={n}"
            );
            // VᵀV = I
            let vtv = eig.vectors.transpose().mul(&eig.vectors);
            assert!(vtv.sub(&Mat::identity(n)).frobenius_norm() < 1e-10 * n as f64);
            // ascending
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
        }
    }

    #[test]
    fn values_only_eig_matches_full() {
        for n in [1, 2, 5, 17, 36] {
            let a = random_sym(n, 90 + n as u64);
            let full = SymEigen::new(&a).unwrap();
            let vals = sym_eigenvalues(&a).unwrap();
            for (f, v) in full.values.iter().zip(&vals) {
                assert_relative_eq!(f, v, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn back_solve_is_transpose_inverse() {
        let g = random_sym(9, 123);
        let mut a = g.mul(&g.transpose());
        for i in 0..9 {
            a[(i, i)] += 9.0;
        }
        let ch = Cholesky::new(&a).unwrap();
        let m = random_sym(9, 124);
        let x = ch.back_solve_mat(&m);
        // Lᵀ x = m
        let recon = ch.factor().transpose().mul(&x);
        assert!(recon.sub(&m).frobenius_norm() < 1e-10);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let eig = SymEigen::new(&a).unwrap();
        assert_relative_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(eig.values[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn matrix_square_root_via_apply() {
        let g = random_sym(6, 7);
        let mut a = g.mul(&g.transpose());
        for i in 0..6 {
            a[(i, i)] += 7.0;
        }
        let s = SymEigen::new(&a).unwrap().apply(f64::sqrt);
        assert!(s.mul(&s).sub(&a).frobenius_norm() < 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn qr_orthogonal_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rng.random::<f64>() * 2.0 - 1.0;
            }
        }
        let (q, r) = qr(&a);
        let qtq = q.transpose().mul(&q);
        assert!(qtq.sub(&Mat::identity(n)).frobenius_norm() < 1e-10);
        assert!(q.mul(&r).sub(&a).frobenius_norm() < 1e-10);
        for k in 0..n {
            assert!(r[(k, k)] >= 0.0);
        }
    }

    #[test]
    fn kron_dimensions_and_values() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Mat::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        assert_eq!(k[(0, 0)], 1.0);
        assert_eq!(k[(0, 3)], 2.0);
        assert_eq!(k[(5, 5)], 4.0);
        assert_eq!(k[(5, 2)], 3.0);
    }
}
