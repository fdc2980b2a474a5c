//! Dense real linear algebra sized for desk-scale problems.
//!
//! Everything here is deterministic and allocation-light: a row-major
//! [`Matrix`], a cyclic Jacobi symmetric eigensolver, Householder QR with
//! optional column pivoting, and a handful of vector kernels used by the
//! solvers.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Sweep cap for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal stopping threshold, relative to the Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-12;
/// Relative asymmetry above which symmetric-only routines reject input.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Numerical rank threshold relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-10;

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", &self.row(i)[..self.cols.min(8)])?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::from_vec(r, c, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Dimension("column length".into()));
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ * x`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tmatvec dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), out_row);
                }
            }
        }
        out
    }

    /// `selfᵀ * self`.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..self.cols {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let g_row = &mut g.data[a * self.cols..(a + 1) * self.cols];
                for b in a..self.cols {
                    g_row[b] += ra * r[b];
                }
            }
        }
        g.fill_lower_from_upper();
        g
    }

    /// `self * selfᵀ`.
    pub fn outer_gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.rows, self.rows);
        for a in 0..self.rows {
            for b in a..self.rows {
                let v = dot(self.row(a), self.row(b));
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        g
    }

    fn fill_lower_from_upper(&mut self) {
        for a in 0..self.rows {
            for b in 0..a {
                self.data[a * self.cols + b] = self.data[b * self.cols + a];
            }
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    /// Frobenius inner product `Tr(selfᵀ other)`.
    pub fn frob_dot(&self, other: &Matrix) -> f64 {
        dot(&self.data, &other.data)
    }

    /// Largest entry of `|S − Sᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn check_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let asym = self.asymmetry();
        if asym > SYMMETRY_TOL * self.max_abs() {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(())
    }

    /// Replaces the matrix with `(S + Sᵀ)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// Squared Euclidean norm of every column.
    pub fn column_sq_norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v * v;
            }
        }
        out
    }

    /// Submatrix made of the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            let r = self.row(i);
            for (k, &j) in idx.iter().enumerate() {
                out[(i, k)] = r[j];
            }
        }
        out
    }

    /// `self · Diag(w) · selfᵀ`.
    pub fn weighted_outer_gram(&self, w: &[f64]) -> Matrix {
        assert_eq!(w.len(), self.cols);
        let mut g = Matrix::zeros(self.rows, self.rows);
        let mut scaled = vec![0.0; self.cols];
        for a in 0..self.rows {
            for ((s, x), wi) in scaled.iter_mut().zip(self.row(a)).zip(w) {
                *s = x * wi;
            }
            for b in a..self.rows {
                let v = dot(&scaled, self.row(b));
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        g
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// vector kernels

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Index of the entry of largest magnitude; lowest index wins ties.
pub fn argmax_abs(x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > best_val {
            best_val = v.abs();
            best = i;
        }
    }
    best
}

/// `sign(v) · max(|v| − tau, 0)`.
#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// symmetric eigendecomposition

/// Eigendecomposition `S = V Λ Vᵀ` with eigenvalues sorted ascending and
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    /// `V f(Λ) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let fvals: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        let mut scaled = vec![0.0; n];
        for a in 0..n {
            let va = self.vectors.row(a);
            for ((s, v), fv) in scaled.iter_mut().zip(va).zip(&fvals) {
                *s = v * fv;
            }
            for b in a..n {
                let v = dot(&scaled, self.vectors.row(b));
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig(s: &Matrix) -> Result<SymEigen> {
    s.check_symmetric()?;
    let n = s.rows();
    let mut a = s.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    jacobi_in_place(&mut a, &mut v)?;
    Ok(sorted_eigen(&a, v))
}

/// Eigendecomposition warm-started from an approximate eigenbasis `basis`
/// (orthonormal columns). Rotating into the old basis first leaves a nearly
/// diagonal matrix, so Jacobi converges in very few sweeps.
pub fn sym_eig_warm(s: &Matrix, basis: &Matrix) -> Result<SymEigen> {
    s.check_symmetric()?;
    let mut a = basis.transpose().matmul(s).matmul(basis);
    a.symmetrize();
    let mut w = Matrix::identity(s.rows());
    jacobi_in_place(&mut a, &mut w)?;
    let v = basis.matmul(&w);
    Ok(sorted_eigen(&a, v))
}

fn sorted_eigen(a: &Matrix, v: Matrix) -> SymEigen {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, k)] = v[(r, i)];
        }
    }
    SymEigen { values, vectors }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

fn jacobi_in_place(a: &mut Matrix, v: &mut Matrix) -> Result<()> {
    let n = a.rows();
    let scale = a.frobenius_norm();
    if n <= 1 || scale == 0.0 {
        return Ok(());
    }
    let target = JACOBI_TOL * scale;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE
                    || apq.abs() < 1e-3 * target / (n as f64)
                {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(a, v, p, q, c, sn);
            }
        }
    }
    if off_diagonal_norm(a) <= target {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            what: "jacobi eigensolver",
            iterations: JACOBI_MAX_SWEEPS,
        })
    }
}

#[inline]
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    // columns: A ← A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    // rows: A ← Jᵀ A
    {
        let cols = a.cols;
        let (lo, hi) = a.data.split_at_mut(q * cols);
        let rp = &mut lo[p * cols..(p + 1) * cols];
        let rq = &mut hi[..cols];
        for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
            let apk = *x;
            let aqk = *y;
            *x = c * apk - s * aqk;
            *y = s * apk + c * aqk;
        }
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Smallest and largest eigenvalues of a symmetric matrix.
pub fn sym_eig_extremes(s: &Matrix) -> Result<(f64, f64)> {
    let e = sym_eig(s)?;
    Ok((e.min(), e.max()))
}

/// Projection onto the PSD cone in Frobenius norm: `V max(Λ, 0) Vᵀ`.
pub fn psd_project(s: &Matrix) -> Result<Matrix> {
    let e = sym_eig(s)?;
    Ok(e.reconstruct_with(|l| l.max(0.0)))
}

// ---------------------------------------------------------------------------
// QR

/// Householder QR factorization `A Π = Q R`, optionally with column pivoting.
///
/// Reflectors are stored compactly below the diagonal of `qr`; `Q` is never
/// formed unless asked for.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    qr: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix, pivot: bool) -> Self {
        let (m, n) = a.shape();
        let mut qr = a.clone();
        let k = m.min(n);
        let mut tau = vec![0.0; k];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut col_norms = qr.column_sq_norms();

        for j in 0..k {
            if pivot {
                // recompute trailing norms exactly: sizes are small and this
                // avoids the usual downdating cancellation issues
                for c in j..n {
                    col_norms[c] = (j..m).map(|i| qr[(i, c)] * qr[(i, c)]).sum();
                }
                let mut best = j;
                for c in (j + 1)..n {
                    if col_norms[c] > col_norms[best] {
                        best = c;
                    }
                }
                if best != j {
                    for i in 0..m {
                        let row = qr.row_mut(i);
                        row.swap(j, best);
                    }
                    perm.swap(j, best);
                    col_norms.swap(j, best);
                }
            }
            let norm_x: f64 = (j..m).map(|i| qr[(i, j)] * qr[(i, j)]).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                tau[j] = 0.0;
                continue;
            }
            let alpha = if qr[(j, j)] > 0.0 { -norm_x } else { norm_x };
            let v0 = qr[(j, j)] - alpha;
            // v = [1, x[1:]/v0], tau = (alpha - x0)/alpha ... standard LAPACK form
            for i in (j + 1)..m {
                qr[(i, j)] /= v0;
            }
            tau[j] = (alpha - qr[(j, j)]) / alpha;
            qr[(j, j)] = alpha;
            // apply H = I - tau v vᵀ to trailing columns
            for c in (j + 1)..n {
                let mut s = qr[(j, c)];
                for i in (j + 1)..m {
                    s += qr[(i, j)] * qr[(i, c)];
                }
                s *= tau[j];
                qr[(j, c)] -= s;
                for i in (j + 1)..m {
                    let vij = qr[(i, j)];
                    qr[(i, c)] -= s * vij;
                }
            }
        }
        HouseholderQr { qr, tau, perm }
    }

    pub fn rows(&self) -> usize {
        self.qr.rows()
    }

    pub fn cols(&self) -> usize {
        self.qr.cols()
    }

    /// Column permutation: column `k` of `AΠ` is column `perm[k]` of `A`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn r_diag(&self) -> Vec<f64> {
        self.qr.diag()
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.qr[(i, j)]
        } else {
            0.0
        }
    }

    /// Number of diagonal entries of `R` above `tol` in magnitude.
    pub fn rank(&self, tol: f64) -> usize {
        self.r_diag().iter().take_while(|d| d.abs() > tol).count()
    }

    fn apply_reflector(&self, j: usize, x: &mut [f64]) {
        let t = self.tau[j];
        if t == 0.0 {
            return;
        }
        let m = self.rows();
        let mut s = x[j];
        for i in (j + 1)..m {
            s += self.qr[(i, j)] * x[i];
        }
        s *= t;
        x[j] -= s;
        for i in (j + 1)..m {
            x[i] -= s * self.qr[(i, j)];
        }
    }

    /// `Qᵀ x` in place.
    pub fn apply_qt(&self, x: &mut [f64]) {
        for j in 0..self.tau.len() {
            self.apply_reflector(j, x);
        }
    }

    /// `Q x` in place.
    pub fn apply_q(&self, x: &mut [f64]) {
        for j in (0..self.tau.len()).rev() {
            self.apply_reflector(j, x);
        }
    }

    /// Columns `from..to` of the full orthogonal factor `Q` (m×m).
    pub fn q_columns(&self, from: usize, to: usize) -> Matrix {
        let m = self.rows();
        let mut out = Matrix::zeros(m, to - from);
        let mut e = vec![0.0; m];
        for (k, j) in (from..to).enumerate() {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.apply_q(&mut e);
            for i in 0..m {
                out[(i, k)] = e[i];
            }
        }
        out
    }

    /// Solves `R[..r, ..r] x = b` by back substitution.
    pub fn solve_upper(&self, r: usize, b: &[f64]) -> Vec<f64> {
        let mut x = b[..r].to_vec();
        for i in (0..r).rev() {
            let mut s = x[i];
            for j in (i + 1)..r {
                s -= self.qr[(i, j)] * x[j];
            }
            x[i] = s / self.qr[(i, i)];
        }
        x
    }

    /// Solves `R[..r, ..r]ᵀ x = b` by forward substitution.
    pub fn solve_upper_transposed(&self, r: usize, b: &[f64]) -> Vec<f64> {
        let mut x = b[..r].to_vec();
        for i in 0..r {
            let mut s = x[i];
            for j in 0..i {
                s -= self.qr[(j, i)] * x[j];
            }
            x[i] = s / self.qr[(i, i)];
        }
        x
    }
}

/// Largest singular value, from the smaller of the two Gram matrices.
pub fn sigma_max(a: &Matrix) -> Result<f64> {
    let g = if a.rows() <= a.cols() {
        a.outer_gram()
    } else {
        a.gram()
    };
    Ok(sym_eig(&g)?.max().max(0.0).sqrt())
}

/// Orthonormal basis of `Ker(P)` as the columns of a `d × (d − rank)` matrix.
///
/// Computed from a pivoted QR of `Pᵀ`: the trailing columns of its `Q` factor
/// span the orthogonal complement of `Range(Pᵀ)`.
pub fn qr_kernel_basis(p: &Matrix) -> Result<Matrix> {
    let d = p.cols();
    let smax = sigma_max(p)?;
    if smax == 0.0 {
        return Ok(Matrix::identity(d));
    }
    let qr = HouseholderQr::new(&p.transpose(), true);
    let rank = qr.rank(RANK_TOL * smax);
    Ok(qr.q_columns(rank, d))
}

/// Numerical rank with the crate-wide tolerance.
pub fn numerical_rank(p: &Matrix) -> Result<usize> {
    let smax = sigma_max(p)?;
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(HouseholderQr::new(p, true).rank(RANK_TOL * smax))
}

/// Minimum-norm least-squares solution and residual sum of squares, through a
/// complete orthogonal decomposition (pivoted QR of `P`, then QR of `R₁ᵀ`).
pub fn min_norm_least_squares(p: &Matrix, y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (n, d) = p.shape();
    if y.len() != n {
        return Err(Error::Dimension(format!("targets {} vs rows {n}", y.len())));
    }
    let smax = sigma_max(p)?;
    if smax == 0.0 {
        return Ok((vec![0.0; d], dot(y, y)));
    }
    let qr = HouseholderQr::new(p, true);
    let r = qr.rank(RANK_TOL * smax);
    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    let rss: f64 = qty[r..].iter().map(|v| v * v).sum();

    // T = [R11 R12] is r×d with full row rank; min-norm solution of T w = c.
    let mut t_transposed = Matrix::zeros(d, r);
    for i in 0..r {
        for j in i..d {
            t_transposed[(j, i)] = qr.r(i, j);
        }
    }
    let qr2 = HouseholderQr::new(&t_transposed, false);
    let u = qr2.solve_upper_transposed(r, &qty[..r]);
    let mut w = vec![0.0; d];
    w[..r].copy_from_slice(&u);
    qr2.apply_q(&mut w);

    let mut alpha = vec![0.0; d];
    for (k, &j) in qr.perm().iter().enumerate() {
        alpha[j] = w[k];
    }
    Ok((alpha, rss))
}

// ---------------------------------------------------------------------------
// Cholesky

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("cholesky of non-square matrix".into()));
        }
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut s = a[(j, j)];
            for k in 0..j {
                s -= l[(j, k)] * l[(j, k)];
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Singular("cholesky pivot"));
            }
            let ljj = s.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[(i, k)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}
