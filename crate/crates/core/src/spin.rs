//! Pauli and total-spin operators on an `L`-site spin-1/2 chain.
//!
//! Basis convention: a computational basis state is labelled by an integer
//! whose bit for site `k` sits at position `L − 1 − k` (site 0 is the most
//! significant bit). A cleared bit is spin-up, a set bit is spin-down, so
//! `|0⟩ = |↑↑…↑⟩` and `σ^z = diag(1, −1)` on a single site.

use std::ops::{Add, Index, Mul, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cone, czero, Real, C};

/// Largest chain the dense Hilbert-space representation accepts.
pub const MAX_SITES: usize = 12;

/// Dense operator on the `2^L`-dimensional Hilbert space of `L` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    sites: usize,
    mat: CMatrix<T>,
}

impl<T: Real> Operator<T> {
    pub fn new(sites: usize, mat: CMatrix<T>) -> Result<Self> {
        let dim = hilbert_dim(sites)?;
        if mat.rows() != dim || mat.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: mat.rows().max(mat.cols()),
            });
        }
        if !mat.is_finite() {
            return Err(Error::NumericalQuality("operator has non-finite entries".into()));
        }
        Ok(Self { sites, mat })
    }

    pub(crate) fn from_matrix_unchecked(sites: usize, mat: CMatrix<T>) -> Self {
        debug_assert_eq!(mat.rows(), 1 << sites);
        Self { sites, mat }
    }

    pub fn zeros(sites: usize) -> Self {
        let d = 1 << sites;
        Self::from_matrix_unchecked(sites, CMatrix::zeros(d, d))
    }

    pub fn identity(sites: usize) -> Self {
        Self::from_matrix_unchecked(sites, CMatrix::identity(1 << sites))
    }

    pub fn from_fn(sites: usize, f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let d = 1 << sites;
        Self::from_matrix_unchecked(sites, CMatrix::from_fn(d, d, f))
    }

    /// `|a⟩⟨b|` for computational basis indices `a`, `b`.
    pub fn basis_projector(sites: usize, ket: usize, bra: usize) -> Self {
        let mut op = Self::zeros(sites);
        op.mat[(ket, bra)] = cone();
        op
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    #[inline]
    pub fn matrix_mut(&mut self) -> &mut CMatrix<T> {
        &mut self.mat
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.sites, self.mat.adjoint())
    }

    pub fn dot(&self, rhs: &Self) -> Self {
        assert_eq!(self.sites, rhs.sites, "operators act on different chains");
        Self::from_matrix_unchecked(self.sites, self.mat.matmul(&rhs.mat))
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        assert_eq!(self.sites, rhs.sites, "operators act on different chains");
        Self::from_matrix_unchecked(self.sites, self.mat.commutator(&rhs.mat))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self::from_matrix_unchecked(self.sites, self.mat.scale(s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self::from_matrix_unchecked(self.sites, self.mat.scale_real(s))
    }

    pub fn trace(&self) -> C<T> {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> T {
        self.mat.frobenius_norm()
    }

    pub fn hermiticity_residual(&self) -> T {
        self.mat.hermiticity_residual()
    }

    /// Hilbert–Schmidt inner product `Tr(self† rhs)`.
    pub fn hs_inner(&self, rhs: &Self) -> C<T> {
        self.mat.hs_inner(&rhs.mat)
    }

    /// `Tr(self · rhs)`.
    pub fn trace_product(&self, rhs: &Self) -> C<T> {
        self.mat.trace_product(&rhs.mat)
    }

    pub fn is_finite(&self) -> bool {
        self.mat.is_finite()
    }

    /// True if every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.mat[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<C<T>> {
        (0..self.dim()).map(|i| self.mat[(i, i)]).collect()
    }
}

impl<T: Real> AsRef<Operator<T>> for Operator<T> {
    fn as_ref(&self) -> &Operator<T> {
        self
    }
}

impl<T: Real> Index<(usize, usize)> for Operator<T> {
    type Output = C<T>;

    fn index(&self, idx: (usize, usize)) -> &C<T> {
        &self.mat[idx]
    }
}

impl<T: Real> Add<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;

    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.sites, rhs.sites, "operators act on different chains");
        Operator::from_matrix_unchecked(self.sites, &self.mat + &rhs.mat)
    }
}

impl<T: Real> Sub<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;

    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        assert_eq!(self.sites, rhs.sites, "operators act on different chains");
        Operator::from_matrix_unchecked(self.sites, &self.mat - &rhs.mat)
    }
}

impl<T: Real> Mul<&Operator<T>> for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        self.dot(rhs)
    }
}

pub fn hilbert_dim(sites: usize) -> Result<usize> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::InvalidArgument(format!(
            "site count must be in 1..={MAX_SITES}, got {sites}"
        )));
    }
    Ok(1 << sites)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

/// Computational basis state as a sequence of spin labels, site 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    bits: Vec<Spin>,
}

impl BasisState {
    pub fn new(bits: Vec<Spin>) -> Self {
        Self { bits }
    }

    pub fn from_index(index: usize, sites: usize) -> Self {
        let bits = (0..sites)
            .map(|k| if is_up(index, k, sites) { Spin::Up } else { Spin::Down })
            .collect();
        Self { bits }
    }

    pub fn index(&self) -> usize {
        let l = self.bits.len();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Spin::Down)
            .fold(0, |acc, (k, _)| acc | (1 << (l - 1 - k)))
    }

    pub fn bits(&self) -> &[Spin] {
        &self.bits
    }

    pub fn sites(&self) -> usize {
        self.bits.len()
    }

    /// Number of up spins.
    pub fn magnetization(&self) -> usize {
        self.bits.iter().filter(|s| **s == Spin::Up).count()
    }
}

#[inline]
pub fn is_up(index: usize, site: usize, sites: usize) -> bool {
    (index >> (sites - 1 - site)) & 1 == 0
}

/// Number of up spins in the basis state `index`.
#[inline]
pub fn magnetization(index: usize, sites: usize) -> usize {
    sites - (index.count_ones() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteOp {
    X,
    Y,
    Z,
    /// `σ^+ = |↑⟩⟨↓|`
    Plus,
    /// `σ^- = |↓⟩⟨↑|`
    Minus,
    /// `|↑⟩⟨↑| = (σ^z + 1)/2`
    ProjectorUp,
}

impl SiteOp {
    /// 2×2 matrix in the local `(↑, ↓)` basis.
    pub fn local_matrix<T: Real>(self) -> [[C<T>; 2]; 2] {
        let o = czero::<T>();
        let l = cone::<T>();
        let i = C::new(T::zero(), T::one());
        match self {
            SiteOp::X => [[o, l], [l, o]],
            SiteOp::Y => [[o, -i], [i, o]],
            SiteOp::Z => [[l, o], [o, -l]],
            SiteOp::Plus => [[o, l], [o, o]],
            SiteOp::Minus => [[o, o], [l, o]],
            SiteOp::ProjectorUp => [[l, o], [o, o]],
        }
    }
}

/// `kind` acting on `site`, identity elsewhere.
pub fn site_operator<T: Real>(kind: SiteOp, site: usize, sites: usize) -> Result<Operator<T>> {
    let dim = hilbert_dim(sites)?;
    if site >= sites {
        return Err(Error::IndexOutOfRange { index: site, len: sites });
    }
    let local = kind.local_matrix::<T>();
    let shift = sites - 1 - site;
    let mut mat = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b = (col >> shift) & 1;
        for (a, row_local) in local.iter().enumerate() {
            let v = row_local[b];
            if !v.is_zero() {
                let row = (col & !(1 << shift)) | (a << shift);
                mat[(row, col)] = v;
            }
        }
    }
    Ok(Operator::from_matrix_unchecked(sites, mat))
}

/// Total-spin operators `S^± = Σσ^±`, `S^z = ½Σσ^z` and the Casimir
/// `S² = ½(S⁺S⁻ + S⁻S⁺) + (S^z)²`.
#[derive(Clone, Debug)]
pub struct TotalSpin<T: Real> {
    pub plus: Operator<T>,
    pub minus: Operator<T>,
    pub z: Operator<T>,
    pub squared: Operator<T>,
}

pub fn total_spin_operators<T: Real>(sites: usize) -> Result<TotalSpin<T>> {
    hilbert_dim(sites)?;
    let mut plus = Operator::zeros(sites);
    let mut minus = Operator::zeros(sites);
    let mut z = Operator::zeros(sites);
    for k in 0..sites {
        plus = &plus + &site_operator(SiteOp::Plus, k, sites)?;
        minus = &minus + &site_operator(SiteOp::Minus, k, sites)?;
        z = &z + &site_operator(SiteOp::Z, k, sites)?;
    }
    let z = z.scale_real(T::lit(0.5));
    let pm = plus.dot(&minus);
    let mp = minus.dot(&plus);
    let squared = &(&pm + &mp).scale_real(T::lit(0.5)) + &z.dot(&z);
    Ok(TotalSpin {
        plus,
        minus,
        z,
        squared,
    })
}

/// `σ_i^+ σ_j^-` for `i ≠ j`.
pub fn pair_hopping<T: Real>(i: usize, j: usize, sites: usize) -> Result<Operator<T>> {
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "pair hopping needs distinct sites, got ({i}, {j})"
        )));
    }
    let up = site_operator::<T>(SiteOp::Plus, i, sites)?;
    let down = site_operator::<T>(SiteOp::Minus, j, sites)?;
    Ok(up.dot(&down))
}
