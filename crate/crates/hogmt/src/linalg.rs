//! Dense complex linear algebra wrappers.
//!
//! Thin adapters between `ndarray` storage (used everywhere in this crate)
//! and the `faer` decomposition kernels. Singular vectors come back as
//! matrix columns with the convention `A = U * diag(sigma) * V^H`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, Side};
use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn to_faer(a: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_faer(m: faer::MatRef<'_, Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Thin SVD of a complex matrix, `a = u * diag(sigma) * v^H`.
///
/// `sigma` is nonnegative and nonincreasing; `u`/`v` hold the singular
/// vectors as columns.
pub struct Svd {
    pub u: Array2<Complex64>,
    pub sigma: Vec<f64>,
    pub v: Array2<Complex64>,
}

pub fn svd(a: &Array2<Complex64>) -> Result<Svd> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite entry in SVD input".into()));
    }
    let f = to_faer(a).thin_svd().map_err(|_| Error::DecompositionFailed)?;
    let rank = a.nrows().min(a.ncols());
    let sigma = (0..rank).map(|i| f.S()[i].re).collect();
    Ok(Svd {
        u: from_faer(f.U()),
        sigma,
        v: from_faer(f.V()),
    })
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// nonincreasing order and eigenvectors as matching columns.
pub fn eigh(a: &Array2<Complex64>) -> Result<(Vec<f64>, Array2<Complex64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimMismatch(format!(
            "eigh expects a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let e = to_faer(a)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::DecompositionFailed)?;
    // faer sorts ascending; flip to match the sigma convention.
    let vals: Vec<f64> = (0..n).rev().map(|i| e.S()[i].re).collect();
    let u = e.U();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| u[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// LU-backed linear solver for repeated right-hand sides.
pub struct LinearSolver {
    lu: PartialPivLu<Complex64>,
    n: usize,
}

impl LinearSolver {
    pub fn new(a: &Array2<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimMismatch(format!(
                "solver expects a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        Ok(Self {
            lu: to_faer(a).partial_piv_lu(),
            n,
        })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.n {
            return Err(Error::DimMismatch(format!(
                "rhs length {} does not match matrix size {}",
                b.len(),
                self.n
            )));
        }
        let rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        Ok((0..self.n).map(|i| x[(i, 0)]).collect())
    }
}

/// Double-double accumulator built on error-free transforms (Knuth two-sum,
/// Dekker split product). Used where f64 rounding of long dot products would
/// swamp a small result, e.g. when verifying near-null modes of a large
/// kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub fn zero() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(mut self, b: f64) -> Self {
        let s = self.hi + b;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (b - bb);
        let lo = self.lo + err;
        let hi = s + lo;
        self.lo = lo - (hi - s);
        self.hi = hi;
        self
    }

    /// Accumulate the product a*b exactly (Dekker splitting).
    #[inline]
    pub fn add_prod(self, a: f64, b: f64) -> Self {
        const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
        let p = a * b;
        let asp = a * SPLIT;
        let ahi = asp - (asp - a);
        let alo = a - ahi;
        let bsp = b * SPLIT;
        let bhi = bsp - (bsp - b);
        let blo = b - bhi;
        let e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
        self.add(p).add(e)
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `y[i] = sum_j a[i][j] * x[j]` accumulated in double-double precision;
/// exact zeros in `a` are skipped.
pub fn matvec_dd(a: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len(), "matvec shape mismatch");
    let mut y = Vec::with_capacity(a.nrows());
    for row in a.rows() {
        let mut re = DoubleDouble::zero();
        let mut im = DoubleDouble::zero();
        for (aij, xj) in row.iter().zip(x.iter()) {
            if *aij == Complex64::ZERO {
                continue;
            }
            re = re.add_prod(aij.re, xj.re).add_prod(-aij.im, xj.im);
            im = im.add_prod(aij.re, xj.im).add_prod(aij.im, xj.re);
        }
        y.push(Complex64::new(re.value(), im.value()));
    }
    y
}

/// `y = a * x` for a matrix in `ndarray` storage.
pub fn matvec(a: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len(), "matvec shape mismatch");
    let mut y = vec![Complex64::ZERO; a.nrows()];
    for (i, row) in a.rows().into_iter().enumerate() {
        let mut acc = Complex64::ZERO;
        for (aij, xj) in row.iter().zip(x.iter()) {
            acc += aij * xj;
        }
        y[i] = acc;
    }
    y
}

/// Inner product `<a, b> = sum a_i * conj(b_i)` (conjugate on the second
/// argument, fixed crate-wide).
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "inner product length mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
