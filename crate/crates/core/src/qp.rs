//! Dense linear algebra and the equality-constrained quadratic solve.
//!
//! Two entry points share one KKT path:
//!
//! ```text
//! solve_qp:   minimize ½ xᵀQx − cᵀx        subject to Ax = b
//! solve_lsq:  minimize ‖target − x‖²_Q     subject to Ax = b
//! ```
//!
//! The second is the first with `Q → 2Q` and `c → 2Q·target`. Both return the
//! primal optimum together with multipliers `y` satisfying
//!
//! ```text
//! [ Q  Aᵀ ] [x]   [c]
//! [ A  0  ] [y] = [b]
//! ```
//!
//! A singular KKT matrix caused by redundant rows of `A` is retried once with
//! the dependent rows removed; their multipliers are reported as zero.

use std::ops::{Index, IndexMut};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (|a_ij - a_ji| = {deviation:e} at ({row}, {col}))")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },
    #[error("matrix is not positive definite (failing pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("linear constraints are inconsistent")]
    Inconsistent,
    #[error("KKT system singular")]
    Singular,
}

/// Tolerances used by the kernel. All are relative to the magnitude of the
/// input they are applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Cholesky pivots must exceed `pivot * max|Q_ij|`.
    pub pivot: f64,
    /// Allowed asymmetry, relative to `max(1, max|Q_ij|)`.
    pub symmetry: f64,
    /// Rank decisions during elimination, relative to the largest entry.
    pub rank: f64,
    /// Pivot threshold for Gaussian elimination, relative to the largest entry.
    pub singular: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pivot: 1e-12,
            symmetry: 1e-12,
            rank: 1e-10,
            singular: 1e-13,
        }
    }
}

/// Row-major dense matrix. A `0 x k` matrix is a legal (empty) constraint block.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, QpError> {
        if data.len() != rows * cols {
            return Err(QpError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, QpError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QpError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| a * x).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀy`.
    pub fn mul_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "matrix-vector dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix, QpError> {
        if self.cols != other.rows {
            return Err(QpError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(k), dst);
                }
            }
        }
        Ok(out)
    }

    /// Stacks the rows of `other` below `self`.
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix, QpError> {
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(QpError::Dimension("column counts differ".into()));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }

    fn select_rows(&self, keep: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: keep.len(),
            cols: self.cols,
            data,
        }
    }

    /// Replaces the matrix by `(M + Mᵀ) / 2` after checking the asymmetry is
    /// within `tol * max(1, max|M_ij|)`.
    pub fn symmetrized(&self, tol: f64) -> Result<DenseMatrix, QpError> {
        if !self.is_square() {
            return Err(QpError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let scale = self.max_abs().max(1.0);
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                let deviation = (a - b).abs();
                if deviation > tol * scale {
                    return Err(QpError::NotSymmetric { row: i, col: j, deviation });
                }
                let mid = 0.5 * (a + b);
                out[(i, j)] = mid;
                out[(j, i)] = mid;
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `Q = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    lower: DenseMatrix,
}

impl Cholesky {
    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Solves `Q x = rhs` with the two triangular sweeps.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let l = &self.lower;
        let n = l.rows;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let s = dot(&l.row(i)[..i], &y[..i]);
            y[i] = (y[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        y
    }
}

/// Certifies positive definiteness by factorization.
///
/// `q` must be square and symmetric within `tol.symmetry`; it is symmetrized
/// before factoring. A pivot at or below `tol.pivot * max|Q_ij|` rejects the
/// matrix and reports the (0-based) pivot index.
pub fn cholesky_pd_check(q: &DenseMatrix, tol: &Tolerances) -> Result<Cholesky, QpError> {
    let q = q.symmetrized(tol.symmetry)?;
    let n = q.rows;
    let threshold = tol.pivot * q.max_abs();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = q[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > threshold) || d <= 0.0 {
            return Err(QpError::NotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = q[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(Cholesky { lower: l })
}

/// Gaussian elimination with partial pivoting.
pub fn solve_linear(m: &DenseMatrix, rhs: &[f64], tol: &Tolerances) -> Result<Vec<f64>, QpError> {
    if !m.is_square() {
        return Err(QpError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if rhs.len() != n {
        return Err(QpError::Dimension(format!("rhs has {} entries, expected {n}", rhs.len())));
    }
    let mut a = m.data.clone();
    let mut b = rhs.to_vec();
    let threshold = tol.singular * m.max_abs();
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= threshold || best == 0.0 {
            return Err(QpError::Singular);
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[i * n + j] * b[j];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}

/// Row echelon reduction of the `rows x cols` block; returns the indices of a
/// maximal set of linearly independent rows, in original order.
fn independent_rows(rows: usize, cols: usize, data: &[f64], tol: f64) -> Vec<usize> {
    let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let threshold = tol * scale;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut keep = Vec::new();
    for i in 0..rows {
        let mut r = data[i * cols..(i + 1) * cols].to_vec();
        for (b, &p) in basis.iter().zip(&pivots) {
            let f = r[p] / b[p];
            if f != 0.0 {
                axpy(-f, b, &mut r);
            }
        }
        let (p, best) = r
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (j, x)| if x.abs() > acc.1 { (j, x.abs()) } else { acc });
        if best > threshold && best > 0.0 {
            basis.push(r);
            pivots.push(p);
            keep.push(i);
        }
    }
    keep
}

/// Numerical rank of a matrix.
pub fn rank(m: &DenseMatrix, tol: &Tolerances) -> usize {
    independent_rows(m.rows, m.cols, &m.data, tol.rank).len()
}

/// Whether `Ax = b` is solvable: `rank(A) = rank([A | b])`. An empty system is
/// always consistent.
pub fn consistency_check(a: &DenseMatrix, b: &[f64], tol: &Tolerances) -> Result<bool, QpError> {
    if b.len() != a.rows {
        return Err(QpError::Dimension(format!(
            "{} constraint rows but {} right-hand sides",
            a.rows,
            b.len()
        )));
    }
    if a.rows == 0 {
        return Ok(true);
    }
    let aug = augmented(a, b);
    let scale = aug.max_abs();
    // rank decisions for both matrices use the same absolute threshold
    let rel = |m: &DenseMatrix| {
        let s = m.max_abs();
        if s == 0.0 {
            tol.rank
        } else {
            tol.rank * scale / s
        }
    };
    let ra = independent_rows(a.rows, a.cols, &a.data, rel(a)).len();
    let rab = independent_rows(aug.rows, aug.cols, &aug.data, tol.rank).len();
    Ok(ra == rab)
}

fn augmented(a: &DenseMatrix, b: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows, a.cols + 1, |i, j| if j < a.cols { a[(i, j)] } else { b[i] })
}

/// Primal optimum `x` and constraint multipliers `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl KktSolution {
    /// Euclidean norms of `Qx + Aᵀy − c` and `Ax − b`.
    pub fn residuals(&self, q: &DenseMatrix, c: &[f64], a: &DenseMatrix, b: &[f64]) -> (f64, f64) {
        let mut stat = q.mul_vec(&self.x);
        if a.rows > 0 {
            axpy(1.0, &a.mul_transpose_vec(&self.y), &mut stat);
        }
        axpy(-1.0, c, &mut stat);
        let feas = if a.rows > 0 {
            let mut r = a.mul_vec(&self.x);
            axpy(-1.0, b, &mut r);
            norm2(&r)
        } else {
            0.0
        };
        (norm2(&stat), feas)
    }
}

/// A positive definite form `⟨x|y⟩_Q = xᵀQy`.
#[derive(Debug, Clone)]
pub struct InnerProduct {
    q: DenseMatrix,
    factor: Cholesky,
}

impl InnerProduct {
    pub fn new(q: &DenseMatrix, tol: &Tolerances) -> Result<Self, QpError> {
        let sym = q.symmetrized(tol.symmetry)?;
        let factor = cholesky_pd_check(&sym, tol)?;
        Ok(Self { q: sym, factor })
    }

    pub fn identity(k: usize) -> Self {
        let q = DenseMatrix::identity(k);
        let factor = Cholesky { lower: q.clone() };
        Self { q, factor }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.q.rows
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.q.mul_vec(y))
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }
}

/// `minimize ½ xᵀQx − cᵀx subject to Ax = b`.
pub fn solve_qp(
    q: &DenseMatrix,
    c: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    tol: &Tolerances,
) -> Result<KktSolution, QpError> {
    let ip = InnerProduct::new(q, tol)?;
    solve_qp_certified(&ip, c, a, b, tol)
}

/// [`solve_qp`] for a form whose positive definiteness is already certified.
pub fn solve_qp_certified(
    q: &InnerProduct,
    c: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    tol: &Tolerances,
) -> Result<KktSolution, QpError> {
    let k = q.dim();
    if c.len() != k {
        return Err(QpError::Dimension(format!("linear term has {} entries, expected {k}", c.len())));
    }
    if a.rows > 0 && a.cols != k {
        return Err(QpError::Dimension(format!(
            "constraint matrix has {} columns, expected {k}",
            a.cols
        )));
    }
    if !consistency_check(a, b, tol)? {
        return Err(QpError::Inconsistent);
    }
    if a.rows == 0 {
        return Ok(KktSolution {
            x: q.factor.solve(c),
            y: Vec::new(),
        });
    }
    match kkt_solve(q.matrix(), c, a, b, tol) {
        Ok(sol) => Ok(sol),
        Err(QpError::Singular) => {
            let aug = augmented(a, b);
            let keep = independent_rows(aug.rows, aug.cols, &aug.data, tol.rank);
            if keep.len() == a.rows {
                return Err(QpError::Singular);
            }
            let a_red = a.select_rows(&keep);
            let b_red: Vec<f64> = keep.iter().map(|&i| b[i]).collect();
            let reduced = kkt_solve(q.matrix(), c, &a_red, &b_red, tol)?;
            let mut y = vec![0.0; a.rows];
            for (slot, &i) in keep.iter().enumerate() {
                y[i] = reduced.y[slot];
            }
            Ok(KktSolution { x: reduced.x, y })
        }
        Err(e) => Err(e),
    }
}

fn kkt_solve(
    q: &DenseMatrix,
    c: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    tol: &Tolerances,
) -> Result<KktSolution, QpError> {
    let k = q.rows;
    let m = a.rows;
    let dim = k + m;
    let kkt = DenseMatrix::from_fn(dim, dim, |i, j| match (i < k, j < k) {
        (true, true) => q[(i, j)],
        (true, false) => a[(j - k, i)],
        (false, true) => a[(i - k, j)],
        (false, false) => 0.0,
    });
    let mut rhs = c.to_vec();
    rhs.extend_from_slice(b);
    let mut sol = solve_linear(&kkt, &rhs, tol)?;
    let y = sol.split_off(k);
    Ok(KktSolution { x: sol, y })
}

/// `minimize ‖target − x‖²_Q subject to Ax = b`, solved as
/// `solve_qp(2Q, 2Q·target, A, b)`.
pub fn solve_lsq(
    q: &InnerProduct,
    target: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    tol: &Tolerances,
) -> Result<KktSolution, QpError> {
    if target.len() != q.dim() {
        return Err(QpError::Dimension(format!(
            "target has {} entries, expected {}",
            target.len(),
            q.dim()
        )));
    }
    if a.rows == 0 {
        return Ok(KktSolution {
            x: target.to_vec(),
            y: Vec::new(),
        });
    }
    let q2 = q.matrix().scaled(2.0);
    let c: Vec<f64> = q.matrix().mul_vec(target).into_iter().map(|x| 2.0 * x).collect();
    let doubled = InnerProduct {
        q: q2,
        factor: Cholesky {
            lower: q.factor.lower.scaled(std::f64::consts::SQRT_2),
        },
    };
    solve_qp_certified(&doubled, &c, a, b, tol)
}
