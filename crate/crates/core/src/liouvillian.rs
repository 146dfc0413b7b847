//! Liouvillian action, its vectorized matrix, and the magnetization-sector
//! block decomposition.
//!
//! Vectorization is column stacking: `vec(|i⟩⟨j|)` sits at flat index
//! `j·d + i`, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Within a sector block the
//! pair `(i, j)` sits at `rank(j)·n_ket + rank(i)`, the same stacking
//! restricted to the sector.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{LindbladModel, ModelParams};
use crate::scalar::{cabs, cabs2, ci, czero, Real, C};
use crate::spin::{magnetization, Operator};

/// Default largest `L` for which [`build_superoperator`] materializes the
/// full `4^L × 4^L` matrix.
pub const DEFAULT_DENSE_CAP: usize = 5;

/// `(m_ket, m_bra)`: up-spin counts of the row and column basis states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub m_ket: usize,
    pub m_bra: usize,
}

impl SectorLabel {
    pub fn new(m_ket: usize, m_bra: usize) -> Self {
        Self { m_ket, m_bra }
    }

    pub fn mirrored(self) -> Self {
        Self::new(self.m_bra, self.m_ket)
    }

    pub fn is_diagonal(self) -> bool {
        self.m_ket == self.m_bra
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m_ket, self.m_bra)
    }
}

/// Nonzero entries of each row.
pub(crate) fn sparse_rows<T: Real>(m: &CMatrix<T>) -> Vec<Vec<(usize, C<T>)>> {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|(_, z)| !z.is_zero())
                .map(|(k, &z)| (k, z))
                .collect()
        })
        .collect()
}

/// `−i[H, X] + Σ_l (2 L_l X L_l† − {L_l†L_l, X})`, matrix-free.
pub fn apply_liouvillian<T: Real>(model: &LindbladModel<T>, x: &Operator<T>) -> Result<Operator<T>> {
    let d = model.dim();
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.dim(),
        });
    }
    let xm = x.matrix();
    let rows = sparse_rows(model.hamiltonian().matrix());
    let mut out = CMatrix::zeros(d, d);
    let minus_i = ci(-T::one());

    // −i H X
    for (i, row) in rows.iter().enumerate() {
        for &(k, h) in row {
            let coef = minus_i * h;
            for j in 0..d {
                out[(i, j)] += coef * xm[(k, j)];
            }
        }
    }
    // +i X H
    let plus_i = ci(T::one());
    for i in 0..d {
        for (k, row) in rows.iter().enumerate() {
            let xik = xm[(i, k)];
            if xik.is_zero() {
                continue;
            }
            let coef = plus_i * xik;
            for &(j, h) in row {
                out[(i, j)] += coef * h;
            }
        }
    }

    let two = T::lit(2.0);
    for jump in model.jumps() {
        if jump.is_diagonal() {
            let l = jump.diagonal();
            for i in 0..d {
                for j in 0..d {
                    let rate = l[i] * l[j].conj() * two - C::from(cabs2(l[i]) + cabs2(l[j]));
                    if !rate.is_zero() {
                        out[(i, j)] += rate * xm[(i, j)];
                    }
                }
            }
        } else {
            let jm = jump.matrix();
            let jd = jm.adjoint();
            let n = jd.matmul(jm);
            let sandwich = jm.matmul(xm).matmul(&jd).scale_real(two);
            out += &sandwich;
            out -= &n.matmul(xm);
            out -= &xm.matmul(&n);
        }
    }
    Ok(Operator::from_matrix_unchecked(model.sites(), out))
}

/// Column-stacked `vec(X)`.
pub fn vectorize<T: Real>(x: &Operator<T>) -> Vec<C<T>> {
    let d = x.dim();
    let mut v = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            v.push(x[(i, j)]);
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize<T: Real>(sites: usize, v: &[C<T>]) -> Result<Operator<T>> {
    let d = 1usize << sites;
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: v.len(),
        });
    }
    Ok(Operator::from_fn(sites, |i, j| v[j * d + i]))
}

/// Full superoperator
/// `−i(I⊗H − Hᵀ⊗I) + Σ_k [2 L_k*⊗L_k − I⊗L_k†L_k − (L_k†L_k)ᵀ⊗I]`
/// in the column-stacking convention.
pub fn build_superoperator<T: Real>(model: &LindbladModel<T>, cap: usize) -> Result<CMatrix<T>> {
    let l = model.sites();
    if l > cap {
        return Err(Error::ResourceLimit { sites: l, cap });
    }
    let d = model.dim();
    let id = CMatrix::identity(d);
    let h = model.hamiltonian().matrix();
    let mut sup = (&id.kron(h) - &h.transpose().kron(&id)).scale(ci(-T::one()));
    for jump in model.jumps() {
        let lk = jump.matrix();
        let n = lk.adjoint().matmul(lk);
        sup += &lk.conj().kron(lk).scale_real(T::lit(2.0));
        sup -= &id.kron(&n);
        sup -= &n.transpose().kron(&id);
    }
    Ok(sup)
}

/// One sector block of the Liouvillian.
#[derive(Clone, Debug)]
pub struct Block<T: Real> {
    pub label: SectorLabel,
    /// `(ket, bra)` basis pair of each block coordinate.
    pub basis: Vec<(usize, usize)>,
    pub matrix: CMatrix<T>,
}

impl<T: Real> Block<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Basis states grouped by magnetization, with each state's position inside
/// its sector.
#[derive(Clone, Debug)]
pub struct SectorIndex {
    sites: usize,
    states: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl SectorIndex {
    pub fn new(sites: usize) -> Self {
        let d = 1usize << sites;
        let mut states = vec![Vec::new(); sites + 1];
        let mut rank = vec![0; d];
        for s in 0..d {
            let m = magnetization(s, sites);
            rank[s] = states[m].len();
            states[m].push(s);
        }
        Self { sites, states, rank }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Basis states with `m` up spins, ascending.
    pub fn states(&self, m: usize) -> &[usize] {
        &self.states[m]
    }

    pub fn rank(&self, state: usize) -> usize {
        self.rank[state]
    }

    pub fn block_dim(&self, label: SectorLabel) -> usize {
        self.states[label.m_ket].len() * self.states[label.m_bra].len()
    }

    /// Block coordinate of the basis pair `(ket, bra)` inside `label`.
    pub fn position(&self, label: SectorLabel, ket: usize, bra: usize) -> usize {
        self.rank[bra] * self.states[label.m_ket].len() + self.rank[ket]
    }

    pub fn label_of(&self, ket: usize, bra: usize) -> SectorLabel {
        SectorLabel::new(magnetization(ket, self.sites), magnetization(bra, self.sites))
    }

    pub fn basis(&self, label: SectorLabel) -> Vec<(usize, usize)> {
        let kets = &self.states[label.m_ket];
        let bras = &self.states[label.m_bra];
        let mut out = Vec::with_capacity(kets.len() * bras.len());
        for &j in bras {
            for &i in kets {
                out.push((i, j));
            }
        }
        out
    }

    pub fn all_labels(&self) -> Vec<SectorLabel> {
        let mut v = Vec::with_capacity((self.sites + 1) * (self.sites + 1));
        for a in 0..=self.sites {
            for b in 0..=self.sites {
                v.push(SectorLabel::new(a, b));
            }
        }
        v
    }
}

/// The Liouvillian split into independent `(m_ket, m_bra)` blocks.
#[derive(Clone, Debug)]
pub struct LiouvillianBlocks<T: Real> {
    index: SectorIndex,
    params: Option<ModelParams<T>>,
    blocks: BTreeMap<SectorLabel, Block<T>>,
}

impl<T: Real> LiouvillianBlocks<T> {
    pub fn sites(&self) -> usize {
        self.index.sites
    }

    pub fn params(&self) -> Option<&ModelParams<T>> {
        self.params.as_ref()
    }

    pub fn index(&self) -> &SectorIndex {
        &self.index
    }

    pub fn get(&self, label: SectorLabel) -> Option<&Block<T>> {
        self.blocks.get(&label)
    }

    pub fn labels(&self) -> impl Iterator<Item = SectorLabel> + '_ {
        self.blocks.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Block<T>> {
        self.blocks.values()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Sum of block dimensions; `4^L` when every sector is present.
    pub fn total_dim(&self) -> usize {
        self.blocks.values().map(Block::dim).sum()
    }

    /// Block coordinates of `x` restricted to `label`.
    pub fn restrict(&self, x: &Operator<T>, label: SectorLabel) -> Vec<C<T>> {
        self.index.basis(label).iter().map(|&(i, j)| x[(i, j)]).collect()
    }

    /// Operator supported on `label` with the given block coordinates.
    pub fn embed(&self, label: SectorLabel, coords: &[C<T>]) -> Operator<T> {
        let mut op = Operator::zeros(self.sites());
        for (&(i, j), &z) in self.index.basis(label).iter().zip(coords) {
            op.matrix_mut()[(i, j)] = z;
        }
        op
    }

    /// Full superoperator in the global column-stacked ordering, assembled
    /// from the blocks present. Missing sectors stay zero.
    pub fn reassemble(&self) -> CMatrix<T> {
        let d = 1usize << self.sites();
        let mut full = CMatrix::zeros(d * d, d * d);
        for block in self.blocks.values() {
            for (p, &(i, j)) in block.basis.iter().enumerate() {
                for (q, &(k, l)) in block.basis.iter().enumerate() {
                    full[(j * d + i, l * d + k)] = block.matrix[(p, q)];
                }
            }
        }
        full
    }
}

/// Splits the Liouvillian into every `(m_ket, m_bra)` sector block.
pub fn sector_decompose<T: Real>(model: &LindbladModel<T>) -> Result<LiouvillianBlocks<T>> {
    let labels = SectorIndex::new(model.sites()).all_labels();
    sector_decompose_for(model, &labels)
}

/// Builds only the requested sector blocks.
pub fn sector_decompose_for<T: Real>(
    model: &LindbladModel<T>,
    labels: &[SectorLabel],
) -> Result<LiouvillianBlocks<T>> {
    let l = model.sites();
    let index = SectorIndex::new(l);
    let h = model.hamiltonian().matrix();
    let d = model.dim();

    let tol = T::lit(1e-14) * Float::max(T::one(), h.max_abs());
    for i in 0..d {
        for j in 0..d {
            if magnetization(i, l) != magnetization(j, l) && cabs(h[(i, j)]) > tol {
                return Err(Error::InvalidModel(format!(
                    "Hamiltonian couples basis states {i} and {j} across magnetization sectors"
                )));
            }
        }
    }
    if let Some(k) = model.jumps().iter().position(|j| !j.is_diagonal()) {
        return Err(Error::InvalidModel(format!(
            "jump operator {k} is not diagonal in the computational basis"
        )));
    }
    for label in labels {
        if label.m_ket > l || label.m_bra > l {
            return Err(Error::InvalidArgument(format!("sector {label} outside 0..={l}")));
        }
    }

    let rows = sparse_rows(h);
    let jump_diags: Vec<Vec<C<T>>> = model.jumps().iter().map(Operator::diagonal).collect();
    let two = T::lit(2.0);
    let mut blocks = BTreeMap::new();
    for &label in labels {
        let basis = index.basis(label);
        let n = basis.len();
        let mut m = CMatrix::zeros(n, n);
        for (p, &(i, j)) in basis.iter().enumerate() {
            let mut diss = czero::<T>();
            for lj in &jump_diags {
                diss += lj[i] * lj[j].conj() * two - C::from(cabs2(lj[i]) + cabs2(lj[j]));
            }
            m[(p, p)] += diss;
            // (−i H X)[i, j] = −i Σ_k H[i,k] X[k,j]
            for &(k, hik) in &rows[i] {
                let q = index.position(label, k, j);
                m[(p, q)] += ci(-T::one()) * hik;
            }
            // (+i X H)[i, j] = i Σ_k X[i,k] H[k,j], H[k,j] = conj(H[j,k])
            for &(k, hjk) in &rows[j] {
                let q = index.position(label, i, k);
                m[(p, q)] += ci(T::one()) * hjk.conj();
            }
        }
        blocks.insert(label, Block { label, basis, matrix: m });
    }
    Ok(LiouvillianBlocks {
        index,
        params: model.params().copied(),
        blocks,
    })
}

/// Sectors on which `x` has a nonzero entry.
pub fn support_sectors<T: Real>(x: &Operator<T>) -> Vec<SectorLabel> {
    let l = x.sites();
    let d = x.dim();
    let mut seen = std::collections::BTreeSet::new();
    for i in 0..d {
        for j in 0..d {
            if !x[(i, j)].is_zero() {
                seen.insert(SectorLabel::new(magnetization(i, l), magnetization(j, l)));
            }
        }
    }
    seen.into_iter().collect()
}
