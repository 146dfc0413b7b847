//! Biorthogonal eigendecomposition of the Liouvillian, block by block.
//!
//! For each sector block `B = V Λ V⁻¹`, the columns of `V` are the right
//! modes and the rows of `W = V⁻¹` are the left functionals, so the pairing
//! `c_k = Tr(l̂_k X)` satisfies `Tr(l̂_j r̂_k) = δ_jk` by construction.
//! Blocks `(a, b)` with `a > b` are obtained from `(b, a)` through
//! `L(X†) = L(X)†` instead of a second eigensolve.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::liouvillian::{support_sectors, Block, LiouvillianBlocks, SectorIndex, SectorLabel};
use crate::linalg::{dense_product, general_eigen, hermitian_eigenvalues, inverse, singular_values, svd, thin_q, CMatrix};
use crate::scalar::{cabs, cabs2, cexp, cr, czero, Real, C};
use crate::model::ModelParams;
use crate::spin::Operator;
use crate::states::DensityMatrix;

/// `|λ|` below which a mode belongs to the kernel.
pub const KERNEL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Largest tolerated `|W V − I|` entry.
pub const BIORTHO_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated in a steady-state projection.
pub const STEADY_POSITIVITY_TOL: f64 = 1e-8;
/// Relative smallest singular value below which a cluster's eigenvectors
/// count as linearly dependent.
const DEPENDENCE_TOL: f64 = 1e-6;
/// Eigenvalue condition number above which a mode is treated as part of a
/// defective cluster.
const CONDITION_MAX: f64 = 1e6;
/// Linking radius for eigenvalues split by a defective cluster; a Jordan
/// block of size k splits by roughly `ε^{1/k}`.
const JORDAN_REACH: f64 = 1e-5;
/// Relative singular-value threshold for numerical null spaces.
const NULL_TOL: f64 = 1e-9;

/// What [`decompose_with`] does with a non-diagonalizable block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectivePolicy {
    /// Fail with [`Error::Defective`] naming the cluster.
    #[default]
    Error,
    /// Replace the cluster by an orthonormal basis of its generalized
    /// eigenspace and record it as a [`JordanGroup`].
    Resolve,
}

/// Generalized eigenspace standing in for a defective eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct JordanGroup<T: Real> {
    pub eigenvalue: C<T>,
    /// Local mode indices spanning the space; the first `eigenvectors` of
    /// them are true eigenvectors.
    pub members: Vec<usize>,
    pub eigenvectors: usize,
    /// The block restricted to the space, in the members' basis.
    pub generator: CMatrix<T>,
}

impl<T: Real> JordanGroup<T> {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.members.len()
    }

    /// `exp(N t) c` by the power series of the nearly nilpotent `N − μ`.
    fn propagate(&self, coeffs: &[C<T>], t: T) -> Vec<C<T>> {
        let a = self.members.len();
        let tc = cr(t);
        let shift = CMatrix::from_diagonal(&vec![self.eigenvalue; a]);
        let nil = (&self.generator - &shift).scale(tc);
        let mut term: Vec<C<T>> = coeffs.to_vec();
        let mut sum = term.clone();
        for k in 1..=MAX_SERIES_TERMS {
            term = nil.mat_vec(&term).into_iter().map(|z| z / cr(T::of_usize(k))).collect();
            let size = term.iter().fold(T::zero(), |m, &z| Float::max(m, cabs(z)));
            for (s, &z) in sum.iter_mut().zip(&term) {
                *s += z;
            }
            let scale = sum.iter().fold(T::zero(), |m, &z| Float::max(m, cabs(z)));
            if size <= T::epsilon() * Float::max(scale, T::min_positive_value()) {
                break;
            }
        }
        let phase = cexp(self.eigenvalue * tc);
        sum.into_iter().map(|z| z * phase).collect()
    }
}

const MAX_SERIES_TERMS: usize = 200;

/// Eigensystem of one sector block.
#[derive(Clone, Debug)]
pub struct SectorModes<T: Real> {
    pub label: SectorLabel,
    /// `(ket, bra)` pair of each block coordinate.
    pub basis: Vec<(usize, usize)>,
    pub eigenvalues: Vec<C<T>>,
    /// Column `k` holds the block coordinates of `r̂_k`.
    pub right: CMatrix<T>,
    /// Row `k` is the left functional: `c_k = Σ_p left[k, p] X[basis[p]]`.
    pub left: CMatrix<T>,
    /// Resolved defective clusters; empty for a diagonalizable block.
    pub jordan: Vec<JordanGroup<T>>,
}

impl<T: Real> SectorModes<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Block coordinates of `x`.
    pub fn restrict(&self, x: &Operator<T>) -> Vec<C<T>> {
        self.basis.iter().map(|&(i, j)| x[(i, j)]).collect()
    }

    /// `Tr(l̂_k X)` for every mode of the block.
    pub fn coefficients(&self, x: &Operator<T>) -> Vec<C<T>> {
        self.left.mat_vec(&self.restrict(x))
    }

    /// True for the non-eigenvector members of a resolved defective cluster.
    pub fn is_generalized(&self, k: usize) -> bool {
        self.jordan
            .iter()
            .any(|g| g.members.iter().skip(g.eigenvectors).any(|&m| m == k))
    }

    /// Mode coefficients after evolving for time `t`.
    pub fn evolve_coefficients(&self, coeffs: &[C<T>], t: T) -> Vec<C<T>> {
        let tc = cr(t);
        let mut out: Vec<C<T>> = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(&c, &l)| c * cexp(l * tc))
            .collect();
        for g in &self.jordan {
            let sub: Vec<C<T>> = g.members.iter().map(|&k| coeffs[k]).collect();
            for (&k, z) in g.members.iter().zip(g.propagate(&sub, t)) {
                out[k] = z;
            }
        }
        out
    }

    pub fn right_mode(&self, k: usize, sites: usize) -> Operator<T> {
        let mut op = Operator::zeros(sites);
        for (p, &(i, j)) in self.basis.iter().enumerate() {
            op.matrix_mut()[(i, j)] = self.right[(p, k)];
        }
        op
    }

    /// `l̂_k` with `l̂_k[j, i] = left[k, p]` for `basis[p] = (i, j)`.
    pub fn left_mode(&self, k: usize, sites: usize) -> Operator<T> {
        let mut op = Operator::zeros(sites);
        for (p, &(i, j)) in self.basis.iter().enumerate() {
            op.matrix_mut()[(j, i)] = self.left[(k, p)];
        }
        op
    }

    /// Largest entry of `W V − I`.
    pub fn biorthonormality_residual(&self) -> T {
        let n = self.dim();
        let prod = dense_product(&self.left, &self.right);
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { T::one() } else { T::zero() };
                worst = Float::max(worst, cabs(prod[(i, j)] - cr(target)));
            }
        }
        worst
    }
}

/// One mode of the merged spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeInfo<T: Real> {
    pub eigenvalue: C<T>,
    pub sector: SectorLabel,
    /// Position inside the sector's eigensystem.
    pub local: usize,
    /// Generalized (non-eigen) member of a resolved defective cluster.
    pub generalized: bool,
}

/// Merged eigensystem of every decomposed sector, sorted by descending real
/// part. Immutable; clones share storage.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    sites: usize,
    params: Option<ModelParams<T>>,
    sectors: Arc<[SectorModes<T>]>,
    lookup: Arc<BTreeMap<SectorLabel, usize>>,
    order: Arc<[(usize, usize)]>,
    sorted: bool,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Parameters of the model the blocks were built from, if known.
    pub fn params(&self) -> Option<&ModelParams<T>> {
        self.params.as_ref()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn mode(&self, k: usize) -> ModeInfo<T> {
        let (s, local) = self.order[k];
        let sec = &self.sectors[s];
        ModeInfo {
            eigenvalue: sec.eigenvalues[local],
            sector: sec.label,
            local,
            generalized: sec.is_generalized(local),
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeInfo<T>> + '_ {
        (0..self.len()).map(|k| self.mode(k))
    }

    pub fn eigenvalues(&self) -> Vec<C<T>> {
        self.modes().map(|m| m.eigenvalue).collect()
    }

    pub fn right_mode(&self, k: usize) -> Operator<T> {
        let (s, local) = self.order[k];
        self.sectors[s].right_mode(local, self.sites)
    }

    pub fn left_mode(&self, k: usize) -> Operator<T> {
        let (s, local) = self.order[k];
        self.sectors[s].left_mode(local, self.sites)
    }

    /// `Tr(l̂_k X)`.
    pub fn coefficient(&self, k: usize, x: &Operator<T>) -> C<T> {
        let (s, local) = self.order[k];
        let sec = &self.sectors[s];
        sec.basis
            .iter()
            .enumerate()
            .fold(czero(), |acc, (p, &(i, j))| acc + sec.left[(local, p)] * x[(i, j)])
    }

    pub fn sector(&self, label: SectorLabel) -> Option<&SectorModes<T>> {
        self.lookup.get(&label).map(|&s| &self.sectors[s])
    }

    pub fn sectors(&self) -> &[SectorModes<T>] {
        &self.sectors
    }

    /// Global index of mode `local` in `label`.
    pub fn global_index(&self, label: SectorLabel, local: usize) -> Option<usize> {
        let s = *self.lookup.get(&label)?;
        self.order.iter().position(|&(a, b)| a == s && b == local)
    }

    pub fn is_kernel(&self, k: usize) -> bool {
        cabs(self.mode(k).eigenvalue) <= T::lit(KERNEL_TOL)
    }

    pub fn kernel_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_kernel(k)).collect()
    }

    /// Errors if `x` has weight in a sector that was not decomposed.
    pub fn check_support(&self, x: &Operator<T>) -> Result<Vec<SectorLabel>> {
        if x.sites() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.sites,
                found: x.dim(),
            });
        }
        let support = support_sectors(x);
        if let Some(missing) = support.iter().find(|l| !self.lookup.contains_key(l)) {
            return Err(Error::InvalidArgument(format!(
                "operator has weight in sector {missing}, which is not part of the decomposition"
            )));
        }
        Ok(support)
    }

    /// `Σ_k f(λ_k) Tr(l̂_k X) r̂_k` over every decomposed sector that `x`
    /// touches.
    pub fn apply_function(&self, x: &Operator<T>, f: impl Fn(C<T>) -> C<T>) -> Result<Operator<T>> {
        let support = self.check_support(x)?;
        let mut out = Operator::zeros(self.sites);
        for label in support {
            let sec = self.sector(label).expect("support checked");
            let c = sec.coefficients(x);
            let weighted: Vec<C<T>> = c.iter().zip(&sec.eigenvalues).map(|(&c, &l)| c * f(l)).collect();
            let y = sec.right.mat_vec(&weighted);
            for (p, &(i, j)) in sec.basis.iter().enumerate() {
                out.matrix_mut()[(i, j)] = y[p];
            }
        }
        Ok(out)
    }

    /// Kernel projection `Σ_{|λ_k| ≤ kernel_tol} Tr(l̂_k X) r̂_k`.
    pub fn kernel_projection(&self, x: &Operator<T>) -> Result<Operator<T>> {
        let tol = T::lit(KERNEL_TOL);
        self.apply_function(x, |l| if cabs(l) <= tol { cr(T::one()) } else { czero() })
    }
}

/// Relaxation time `1/|Re λ|`, or `Infinite` for modes that do not decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelaxationTime<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> RelaxationTime<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            RelaxationTime::Finite(t) => Some(t),
            RelaxationTime::Infinite => None,
        }
    }
}

/// `τ_k` for every mode, in the decomposition's order.
pub fn relaxation_times<T: Real>(decomp: &SpectralDecomposition<T>) -> Vec<RelaxationTime<T>> {
    let tol = T::lit(KERNEL_TOL);
    decomp
        .modes()
        .map(|m| {
            if m.eigenvalue.re < -tol {
                RelaxationTime::Finite(T::one() / Float::abs(m.eigenvalue.re))
            } else {
                RelaxationTime::Infinite
            }
        })
        .collect()
}

/// Groups eigenvalue indices into clusters of mutually close values
/// (single linkage at `tol`).
fn clusters<T: Real>(vals: &[C<T>], tol: T) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[a].re.as_f64().total_cmp(&vals[b].re.as_f64()));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            let (i, j) = (idx[a], idx[b]);
            if vals[j].re - vals[i].re > tol {
                break;
            }
            if cabs(vals[i] - vals[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn as_pairs<T: Real>(vals: impl IntoIterator<Item = C<T>>) -> Vec<(f64, f64)> {
    vals.into_iter().map(|l| (l.re.as_f64(), l.im.as_f64())).collect()
}

fn normalize_columns<T: Real>(v: &mut CMatrix<T>) -> bool {
    let (n, m) = (v.rows(), v.cols());
    for k in 0..m {
        let norm = Float::sqrt((0..n).fold(T::zero(), |acc, p| acc + cabs2(v[(p, k)])));
        if norm.is_zero() || !Float::is_finite(norm) {
            return false;
        }
        for p in 0..n {
            v[(p, k)] /= cr(norm);
        }
    }
    true
}

/// Row norms of `W`; with unit right vectors these are the eigenvalue
/// condition numbers.
fn condition_numbers<T: Real>(w: &CMatrix<T>) -> Vec<T> {
    (0..w.rows())
        .map(|k| Float::sqrt(w.row(k).iter().fold(T::zero(), |s, &z| s + cabs2(z))))
        .collect()
}

/// Orthonormal basis of the generalized eigenspace of `b` at `mu` with
/// algebraic multiplicity `a`, eigenvectors first.
fn generalized_eigenspace<T: Real>(b: &CMatrix<T>, mu: C<T>, a: usize) -> Option<(CMatrix<T>, usize)> {
    let n = b.rows();
    let shifted = b - &CMatrix::from_diagonal(&vec![mu; n]);
    let null_count = |s: &[T]| {
        let smax = s.first().copied().unwrap_or(T::zero());
        let thr = T::tol(NULL_TOL) * Float::max(T::one(), smax);
        s.iter().filter(|&&x| x <= thr).count()
    };
    let first = svd(&shifted)?;
    let g = null_count(&first.s);
    if g == 0 || g > a {
        return None;
    }
    let eig = CMatrix::from_fn(n, g, |p, c| first.v[(p, n - g + c)]);
    let mut power = shifted.clone();
    let mut gen = if g == a { Some(eig.clone()) } else { None };
    for _ in 1..a {
        if gen.is_some() {
            break;
        }
        power = dense_product(&power, &shifted);
        let f = svd(&power)?;
        let c = null_count(&f.s);
        if c > a {
            return None;
        }
        if c == a {
            gen = Some(CMatrix::from_fn(n, a, |p, k| f.v[(p, n - a + k)]));
        }
    }
    let gen = gen?;
    if g == a {
        return Some((gen, g));
    }
    // complete the eigenvectors to a basis of the generalized space
    let overlap = dense_product(&eig.adjoint(), &gen);
    let resid = &gen - &dense_product(&eig, &overlap);
    let comp = svd(&resid)?;
    let basis = CMatrix::from_fn(n, a, |p, k| if k < g { eig[(p, k)] } else { comp.u[(p, k - g)] });
    Some((basis, g))
}

/// Eigensystem of one block matrix under [`DefectivePolicy::Error`].
pub fn decompose_block<T: Real>(label: SectorLabel, basis: Vec<(usize, usize)>, matrix: &CMatrix<T>) -> Result<SectorModes<T>> {
    decompose_block_with(label, basis, matrix, DefectivePolicy::Error)
}

/// Eigensystem of one block matrix, with degenerate clusters orthonormalized
/// and the left functionals from `V⁻¹`.
pub fn decompose_block_with<T: Real>(
    label: SectorLabel,
    basis: Vec<(usize, usize)>,
    matrix: &CMatrix<T>,
    policy: DefectivePolicy,
) -> Result<SectorModes<T>> {
    if !matrix.is_finite() {
        return Err(Error::NumericalQuality(format!("block {label} has non-finite entries")));
    }
    let n = matrix.rows();
    let (mut vals, mut v) = general_eigen(matrix).ok_or(Error::EigenSolver { sector: label })?;
    if vals.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) || !normalize_columns(&mut v) {
        return Err(Error::EigenSolver { sector: label });
    }

    let mut suspect = vec![false; n];
    for group in clusters(&vals, T::lit(CLUSTER_TOL)) {
        if group.len() < 2 {
            continue;
        }
        let sub = CMatrix::from_fn(n, group.len(), |p, c| v[(p, group[c])]);
        let sv = singular_values(&sub).ok_or(Error::EigenSolver { sector: label })?;
        let smax = sv.iter().copied().fold(T::zero(), Float::max);
        let smin = sv.iter().copied().fold(T::infinity(), Float::min);
        if smin < T::lit(DEPENDENCE_TOL) * smax {
            for &k in &group {
                suspect[k] = true;
            }
            continue;
        }
        let mean = group.iter().fold(czero::<T>(), |acc, &k| acc + vals[k]) / cr(T::of_usize(group.len()));
        let q = thin_q(&sub);
        for (c, &k) in group.iter().enumerate() {
            for p in 0..n {
                v[(p, k)] = q[(p, c)];
            }
            vals[k] = mean;
        }
    }
    let mut w = inverse(&v);
    for (k, kappa) in condition_numbers(&w).into_iter().enumerate() {
        if !(kappa <= T::lit(CONDITION_MAX)) {
            suspect[k] = true;
        }
    }

    let mut jordan = Vec::new();
    if suspect.iter().any(|&x| x) {
        let groups: Vec<Vec<usize>> = clusters(&vals, T::lit(JORDAN_REACH))
            .into_iter()
            .filter(|g| g.iter().any(|&k| suspect[k]))
            .collect();
        if policy == DefectivePolicy::Error {
            let worst = &groups[0];
            return Err(Error::Defective {
                sector: label,
                cluster: as_pairs(worst.iter().map(|&k| vals[k])),
            });
        }
        for group in groups {
            let a = group.len();
            let mu = group.iter().fold(czero::<T>(), |acc, &k| acc + vals[k]) / cr(T::of_usize(a));
            let defective = || Error::Defective {
                sector: label,
                cluster: as_pairs(group.iter().map(|&k| vals[k])),
            };
            let (q, g) = generalized_eigenspace(matrix, mu, a).ok_or_else(defective)?;
            let generator = dense_product(&q.adjoint(), &dense_product(matrix, &q));
            let resid = (&dense_product(matrix, &q) - &dense_product(&q, &generator)).frobenius_norm();
            if !(resid <= T::tol(BIORTHO_TOL) * Float::max(T::one(), matrix.frobenius_norm())) {
                return Err(defective());
            }
            for (c, &k) in group.iter().enumerate() {
                for p in 0..n {
                    v[(p, k)] = q[(p, c)];
                }
                vals[k] = mu;
            }
            jordan.push(JordanGroup {
                eigenvalue: mu,
                members: group,
                eigenvectors: g,
                generator,
            });
        }
        w = inverse(&v);
    }

    let modes = SectorModes {
        label,
        basis,
        eigenvalues: vals,
        right: v,
        left: w,
        jordan,
    };
    if n > 0 {
        let resid = modes.biorthonormality_residual();
        if !(resid <= T::tol(BIORTHO_TOL)) {
            let kappa = condition_numbers(&modes.left);
            let worst = (0..n)
                .max_by(|&a, &b| kappa[a].as_f64().total_cmp(&kappa[b].as_f64()))
                .unwrap_or(0);
            let center = modes.eigenvalues[worst];
            return Err(Error::Defective {
                sector: label,
                cluster: as_pairs(modes.eigenvalues.iter().copied().filter(|&l| cabs(l - center) <= T::lit(JORDAN_REACH))),
            });
        }
    }
    Ok(modes)
}

/// Eigensystem of block `(b, a)` from that of `(a, b)`.
fn mirror<T: Real>(src: &SectorModes<T>, index: &SectorIndex) -> SectorModes<T> {
    let label = src.label.mirrored();
    let basis = index.basis(label);
    let n = src.dim();
    // coordinate p of (i, j) in src maps to (j, i) in the mirror
    let perm: Vec<usize> = src.basis.iter().map(|&(i, j)| index.position(label, j, i)).collect();
    let mut right = CMatrix::zeros(n, n);
    let mut left = CMatrix::zeros(n, n);
    for p in 0..n {
        for k in 0..n {
            right[(perm[p], k)] = src.right[(p, k)].conj();
            left[(k, perm[p])] = src.left[(k, p)].conj();
        }
    }
    SectorModes {
        label,
        basis,
        eigenvalues: src.eigenvalues.iter().map(|l| l.conj()).collect(),
        right,
        left,
        jordan: src
            .jordan
            .iter()
            .map(|g| JordanGroup {
                eigenvalue: g.eigenvalue.conj(),
                members: g.members.clone(),
                eigenvectors: g.eigenvectors,
                generator: g.generator.conj(),
            })
            .collect(),
    }
}

fn cmp_modes<T: Real>(a: (C<T>, SectorLabel, usize), b: (C<T>, SectorLabel, usize)) -> Ordering {
    b.0.re
        .as_f64()
        .total_cmp(&a.0.re.as_f64())
        .then_with(|| b.0.im.as_f64().total_cmp(&a.0.im.as_f64()))
        .then_with(|| a.1.cmp(&b.1))
        .then_with(|| a.2.cmp(&b.2))
}

/// Decomposes every block present in `blocks`, failing on any defective
/// block.
pub fn decompose<T: Real>(blocks: &LiouvillianBlocks<T>) -> Result<SpectralDecomposition<T>> {
    decompose_with(blocks, DefectivePolicy::Error)
}

/// Decomposes every block present in `blocks` under the given policy for
/// defective clusters.
pub fn decompose_with<T: Real>(blocks: &LiouvillianBlocks<T>, policy: DefectivePolicy) -> Result<SpectralDecomposition<T>> {
    let index = blocks.index();
    let present: Vec<&Block<T>> = blocks.iter().collect();
    let solve: Vec<&Block<T>> = present
        .iter()
        .copied()
        .filter(|b| b.label.m_ket <= b.label.m_bra || blocks.get(b.label.mirrored()).is_none())
        .collect();
    let solved: Vec<SectorModes<T>> = solve
        .par_iter()
        .map(|b| decompose_block_with(b.label, b.basis.clone(), &b.matrix, policy))
        .collect::<Result<_>>()?;

    let mut sectors = Vec::with_capacity(present.len());
    for modes in solved {
        let mirrored = modes.label.m_ket < modes.label.m_bra && blocks.get(modes.label.mirrored()).is_some();
        if mirrored {
            let m = mirror(&modes, index);
            sectors.push(modes);
            sectors.push(m);
        } else {
            sectors.push(modes);
        }
    }
    sectors.sort_by_key(|s| s.label);
    let lookup: BTreeMap<SectorLabel, usize> = sectors.iter().enumerate().map(|(i, s)| (s.label, i)).collect();

    let mut order: Vec<(usize, usize)> = sectors
        .iter()
        .enumerate()
        .flat_map(|(s, sec)| (0..sec.dim()).map(move |k| (s, k)))
        .collect();
    order.sort_by(|&(s1, k1), &(s2, k2)| {
        cmp_modes(
            (sectors[s1].eigenvalues[k1], sectors[s1].label, k1),
            (sectors[s2].eigenvalues[k2], sectors[s2].label, k2),
        )
    });
    Ok(SpectralDecomposition {
        sites: blocks.sites(),
        params: blocks.params().copied(),
        sectors: sectors.into(),
        lookup: Arc::new(lookup),
        order: order.into(),
        sorted: true,
    })
}

/// Kernel projection of `rho0`, Hermitized and renormalized.
pub fn steady_state<T: Real>(decomp: &SpectralDecomposition<T>, rho0: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    let proj = decomp.kernel_projection(rho0.operator())?;
    let sym = Operator::from_matrix_unchecked(decomp.sites(), proj.matrix().hermitian_part());
    let tr = sym.trace().re;
    if !(tr > T::zero()) {
        return Err(Error::NumericalQuality(format!("kernel projection has trace {tr}")));
    }
    let rho = sym.scale_real(T::one() / tr);
    let evals = hermitian_eigenvalues(rho.matrix())
        .ok_or_else(|| Error::NumericalQuality("Hermitian eigensolver failed".into()))?;
    let min = evals.iter().copied().fold(T::infinity(), Float::min);
    if min < -T::tol(STEADY_POSITIVITY_TOL) {
        return Err(Error::PositivityViolation {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(DensityMatrix::from_parts(rho, format!("steady({})", rho0.label()), Some(min)))
}
