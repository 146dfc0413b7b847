//! Dense complex matrices and thin wrappers over faer's decompositions.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::scalar::{cabs2, cone, czero, Real, C};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer has wrong length");
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
    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    /// Matrix product. Zero entries of `self` are skipped, which makes
    /// products with sparse left factors (Hamiltonians, Pauli strings) cheap.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        let n = rhs.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "mat_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        Float::sqrt(self.data.iter().fold(T::zero(), |acc, &z| acc + cabs2(z)))
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &z| Float::max(acc, crate::scalar::cabs(z)))
    }

    /// Hilbert–Schmidt inner product `Tr(self† rhs)`.
    pub fn hs_inner(&self, rhs: &Self) -> C<T> {
        assert_eq!(self.data.len(), rhs.data.len(), "hs_inner shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(czero(), |acc, (&a, &b)| acc + a.conj() * b)
    }

    /// `Tr(self · rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> C<T> {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = czero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * rhs[(k, i)];
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| Float::is_finite(z.re) && Float::is_finite(z.im))
    }

    /// Frobenius norm of `self − self†`.
    pub fn hermiticity_residual(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += cabs2(self[(i, j)] - self[(j, i)].conj());
            }
        }
        Float::sqrt(acc)
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub(crate) fn to_faer(&self) -> Mat<C<T>> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, C<T>>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $f:ident, $op:tt, $tra:ident, $fa:ident) => {
        impl<T: Real> $tr<&CMatrix<T>> for &CMatrix<T> {
            type Output = CMatrix<T>;

            fn $f(self, rhs: &CMatrix<T>) -> CMatrix<T> {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                CMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a $op b).collect(),
                }
            }
        }

        impl<T: Real> $tra<&CMatrix<T>> for CMatrix<T> {
            fn $fa(&mut self, rhs: &CMatrix<T>) {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
                    *a = *a $op b;
                }
            }
        }
    };
}

elementwise!(Add, add, +, AddAssign, add_assign);
elementwise!(Sub, sub, -, SubAssign, sub_assign);

impl<T: Real> Mul<&CMatrix<T>> for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn neg(self) -> CMatrix<T> {
        self.map(|z| -z)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix<T>,
}

pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Option<HermitianEigen<T>> {
    assert!(m.is_square());
    let evd = m.to_faer().self_adjoint_eigen(Side::Lower).ok()?;
    let values = (0..m.rows())
        .map(|k| evd.S().column_vector()[k].re)
        .collect();
    Some(HermitianEigen {
        values,
        vectors: CMatrix::from_faer(evd.U()),
    })
}

pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Option<Vec<T>> {
    assert!(m.is_square());
    m.to_faer().self_adjoint_eigenvalues(Side::Lower).ok()
}

/// Eigenvalues and right eigenvectors (columns) of a general matrix.
pub fn general_eigen<T: Real>(m: &CMatrix<T>) -> Option<(Vec<C<T>>, CMatrix<T>)> {
    assert!(m.is_square());
    let n = m.rows();
    if n == 0 {
        return Some((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let evd = m.to_faer().eigen().ok()?;
    let values = (0..n)
        .map(|k| {
            let z = evd.S().column_vector()[k];
            Complex::new(z.re, z.im)
        })
        .collect();
    Some((values, CMatrix::from_faer(evd.U())))
}

pub fn general_eigenvalues<T: Real>(m: &CMatrix<T>) -> Option<Vec<C<T>>> {
    assert!(m.is_square());
    m.to_faer().eigenvalues().ok()
}

pub fn inverse<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    assert!(m.is_square());
    let inv = m.to_faer().partial_piv_lu().inverse();
    CMatrix::from_faer(inv.as_ref())
}

/// Dense product through the blocked kernel; preferable to
/// [`CMatrix::matmul`] for large, full matrices.
pub fn dense_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.cols(), b.rows(), "matmul shape mismatch");
    let p = a.to_faer() * b.to_faer();
    CMatrix::from_faer(p.as_ref())
}

/// Orthonormal basis (thin `Q`) for the column span of `m`.
pub fn thin_q<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let q = m.to_faer().qr().compute_thin_Q();
    CMatrix::from_faer(q.as_ref())
}

/// Thin singular value decomposition `m = U diag(s) V†`, `s` nonincreasing.
pub struct Svd<T: Real> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

pub fn svd<T: Real>(m: &CMatrix<T>) -> Option<Svd<T>> {
    let f = m.to_faer().thin_svd().ok()?;
    let k = m.rows().min(m.cols());
    Some(Svd {
        u: CMatrix::from_faer(f.U()),
        s: (0..k).map(|i| f.S().column_vector()[i].re).collect(),
        v: CMatrix::from_faer(f.V()),
    })
}

pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Option<Vec<T>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Some(Vec::new());
    }
    m.to_faer().singular_values().ok()
}
