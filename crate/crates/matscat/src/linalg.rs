//! Dense complex matrix algebra for small fixed sizes (n and 2n).
//!
//! Everything here is a pure value operation: matrices are cloned, never
//! mutated through a shared handle. Sizes stay below ~12x12, so the
//! eigensolver is a cyclic complex Jacobi iteration and determinants and
//! inverses go through LU with partial pivoting.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Relative Hermiticity tolerance accepted by [`herm_eig`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Off-diagonal mass threshold (relative to the input norm) at which the
/// Jacobi sweep stops.
pub const JACOBI_CONVERGENCE_TOL: f64 = 1e-14;
/// Hard cap on Jacobi sweeps; exceeding it signals pathological input.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// `lu_inverse` refuses inputs with |det| <= 1e-13 * ||M||_F^rows.
pub const SINGULARITY_FACTOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: ||M - M^dagger|| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error(
        "matrix is singular or near-singular (|det| = {det_abs:.3e}, threshold {threshold:.3e})"
    )]
    Singular { det_abs: f64, threshold: f64 },
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let entries = rows.iter().flatten().copied().collect();
        Self {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    /// Real matrix input, mostly for tests and config ingestion.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        let entries = self.entries.iter().map(|z| z.conj()).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let entries = self.entries.iter().map(|z| z * factor).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest singular value, via the eigenvalues of M^dagger M.
    pub fn spectral_norm(&self) -> f64 {
        *self
            .singular_values()
            .last()
            .expect("singular values of a nonempty matrix")
    }

    /// Singular values in ascending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = &self.adjoint() * self;
        let eig = herm_eig(&gram).expect("Gram matrix is Hermitian by construction");
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square());
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    /// Assembles [[a, b], [c, d]]; all blocks must share dimensions.
    pub fn block_2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let (r, co) = (a.rows, a.cols);
        for m in [b, c, d] {
            assert!(m.rows == r && m.cols == co, "block dimension mismatch");
        }
        let mut out = Self::zeros(2 * r, 2 * co);
        for i in 0..r {
            for j in 0..co {
                out[(i, j)] = a[(i, j)];
                out[(i, j + co)] = b[(i, j)];
                out[(i + r, j)] = c[(i, j)];
                out[(i + r, j + co)] = d[(i, j)];
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scaled(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(self.cols == rhs.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// a unitary matrix whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds U diag(lambda) U^dagger.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let lambda: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        &(u * &ComplexMatrix::diagonal(&lambda)) * &u.adjoint()
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi eigensolver for Hermitian input.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    assert!(m.is_square(), "herm_eig requires a square matrix");
    let n = m.rows();
    let scale = m.frobenius_norm();
    let deviation = m.hermitian_deviation();
    if deviation > HERMITICITY_TOL * scale.max(1.0) {
        return Err(LinalgError::NotHermitian { deviation });
    }

    // iterate on the symmetrized copy so the tolerated asymmetry cannot leak
    let mut a = (m + &m.adjoint()).scaled(Complex64::new(0.5, 0.0));
    let mut u = ComplexMatrix::identity(n);
    let target = JACOBI_CONVERGENCE_TOL * scale;

    let mut converged = n <= 1 || off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let mag = beta.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = beta / mag;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * mag);
                // smaller-magnitude root of t^2 - 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.scale(s); // s * e^{i phi}
                                         // A <- R^dagger A R with R = I except
                                         // R[p][p]=c, R[p][q]=-s e^{i phi}, R[q][p]=s e^{-i phi}, R[q][q]=c
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj.scale(c) + sp * aqj;
                    a[(q, j)] = -sp.conj() * apj + aqj.scale(c);
                }
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip.scale(c) + sp.conj() * aiq;
                    a[(i, q)] = -sp * aip + aiq.scale(c);
                }
                for i in 0..n {
                    let uip = u[(i, p)];
                    let uiq = u[(i, q)];
                    u[(i, p)] = uip.scale(c) + sp.conj() * uiq;
                    u[(i, q)] = -sp * uip + uiq.scale(c);
                }
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, dst)] = u[(i, src)];
        }
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

struct LuFactors {
    lu: ComplexMatrix,
    pivots: Vec<usize>,
    sign: f64,
}

fn lu_factor(m: &ComplexMatrix) -> LuFactors {
    assert!(m.is_square(), "LU requires a square matrix");
    let n = m.rows();
    let mut lu = m.clone();
    let mut pivots = vec![0usize; n];
    let mut sign = 1.0;
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = lu[(col, col)].norm();
        for r in (col + 1)..n {
            let mag = lu[(r, col)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        pivots[col] = pivot_row;
        if pivot_row != col {
            sign = -sign;
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
        }
        let pivot = lu[(col, col)];
        if pivot.norm() == 0.0 {
            continue; // singular column; determinant will be zero
        }
        for r in (col + 1)..n {
            let factor = lu[(r, col)] / pivot;
            lu[(r, col)] = factor;
            for j in (col + 1)..n {
                let sub = factor * lu[(col, j)];
                lu[(r, j)] -= sub;
            }
        }
    }
    LuFactors { lu, pivots, sign }
}

impl LuFactors {
    fn det(&self) -> Complex64 {
        let n = self.lu.rows();
        let mut det = Complex64::new(self.sign, 0.0);
        for i in 0..n {
            det *= self.lu[(i, i)];
        }
        det
    }

    /// Solves A X = B in place of a fresh copy of B.
    fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.lu.rows();
        assert!(b.rows() == n, "rhs row count mismatch");
        let mut x = b.clone();
        // apply the full permutation before the triangular sweeps: the stored
        // L factors reflect all row interchanges, not just the earlier ones
        for col in 0..n {
            let p = self.pivots[col];
            if p != col {
                for j in 0..x.cols() {
                    let tmp = x[(col, j)];
                    x[(col, j)] = x[(p, j)];
                    x[(p, j)] = tmp;
                }
            }
        }
        for col in 0..n {
            for r in (col + 1)..n {
                let factor = self.lu[(r, col)];
                for j in 0..x.cols() {
                    let sub = factor * x[(col, j)];
                    x[(r, j)] -= sub;
                }
            }
        }
        for col in (0..n).rev() {
            let pivot = self.lu[(col, col)];
            for j in 0..x.cols() {
                x[(col, j)] /= pivot;
            }
            for r in 0..col {
                let factor = self.lu[(r, col)];
                for j in 0..x.cols() {
                    let sub = factor * x[(col, j)];
                    x[(r, j)] -= sub;
                }
            }
        }
        x
    }
}

/// Determinant via LU with partial pivoting. Singular input yields 0 within
/// rounding; no error path.
pub fn lu_det(m: &ComplexMatrix) -> Complex64 {
    lu_factor(m).det()
}

fn singularity_threshold(m: &ComplexMatrix) -> f64 {
    SINGULARITY_FACTOR * m.frobenius_norm().powi(m.rows() as i32)
}

/// Matrix inverse via LU; refuses near-singular input so callers can treat
/// the failure as an exceptional-point diagnostic.
pub fn lu_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let factors = lu_factor(m);
    let det_abs = factors.det().norm();
    let threshold = singularity_threshold(m);
    if det_abs <= threshold {
        return Err(LinalgError::Singular { det_abs, threshold });
    }
    Ok(factors.solve(&ComplexMatrix::identity(m.rows())))
}

/// Solves A X = B with the same singularity policy as [`lu_inverse`].
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let factors = lu_factor(a);
    let det_abs = factors.det().norm();
    let threshold = singularity_threshold(a);
    if det_abs <= threshold {
        return Err(LinalgError::Singular { det_abs, threshold });
    }
    Ok(factors.solve(b))
}
