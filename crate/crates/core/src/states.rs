//! Initial density matrices: ground, Gibbs, Néel superposition, domain wall,
//! maximally mixed, and random full-rank states.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{Float, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::SectorIndex;
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, CMatrix, HermitianEigen};
use crate::scalar::{cr, Real, C};
use crate::spin::{hilbert_dim, magnetization, Operator};

/// Degeneracy window for the ground level.
pub const GROUND_DEGENERACY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
///
/// States produced by time evolution carry the anti-Hermitian residue removed
/// during re-Hermitization; their smallest eigenvalue is computed on demand.
#[derive(Clone, Debug)]
pub struct DensityMatrix<T: Real> {
    op: Operator<T>,
    label: String,
    min_eigenvalue: OnceLock<T>,
    asymmetry: T,
}

impl<T: Real> PartialEq for DensityMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op && self.label == other.label
    }
}

impl<T: Real> DensityMatrix<T> {
    /// Validates trace (1e−12), Hermiticity (1e−12) and positivity (−1e−10),
    /// with tolerances widened for single precision.
    pub fn new(op: Operator<T>) -> Result<Self> {
        let tr = op.trace();
        let tol = T::tol(1e-12);
        if Float::abs(tr.re - T::one()) > tol || Float::abs(tr.im) > tol {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {}{:+}i, expected 1",
                tr.re, tr.im
            )));
        }
        if op.hermiticity_residual() > tol {
            return Err(Error::InvalidArgument(format!(
                "density matrix is not Hermitian (residual {:e})",
                op.hermiticity_residual().as_f64()
            )));
        }
        let evals = hermitian_eigenvalues(&op.matrix().hermitian_part())
            .ok_or_else(|| Error::NumericalQuality("Hermitian eigensolver failed".into()))?;
        let min_eigenvalue = evals.iter().copied().fold(T::infinity(), Float::min);
        if min_eigenvalue < -T::tol(1e-10) {
            return Err(Error::PositivityViolation {
                min_eigenvalue: min_eigenvalue.as_f64(),
            });
        }
        Ok(Self {
            op,
            label: String::new(),
            min_eigenvalue: OnceLock::from(min_eigenvalue),
            asymmetry: T::zero(),
        })
    }

    /// Hermitizes and renormalizes the trace before validating.
    pub fn from_nearly_valid(op: Operator<T>) -> Result<Self> {
        let sym = Operator::from_matrix_unchecked(op.sites(), op.matrix().hermitian_part());
        let tr = sym.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::NumericalQuality(format!("non-positive trace {tr}")));
        }
        Self::new(sym.scale_real(T::one() / tr))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn from_parts(op: Operator<T>, label: String, min_eigenvalue: Option<T>) -> Self {
        let cell = OnceLock::new();
        if let Some(m) = min_eigenvalue {
            let _ = cell.set(m);
        }
        Self {
            op,
            label,
            min_eigenvalue: cell,
            asymmetry: T::zero(),
        }
    }

    pub(crate) fn with_asymmetry(mut self, asymmetry: T) -> Self {
        self.asymmetry = asymmetry;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operator(&self) -> &Operator<T> {
        &self.op
    }

    pub fn into_operator(self) -> Operator<T> {
        self.op
    }

    pub fn sites(&self) -> usize {
        self.op.sites()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Smallest eigenvalue of the (Hermitian part of the) state.
    pub fn min_eigenvalue(&self) -> T {
        *self.min_eigenvalue.get_or_init(|| {
            hermitian_eigenvalues(&self.op.matrix().hermitian_part())
                .map(|ev| ev.into_iter().fold(T::infinity(), Float::min))
                .unwrap_or(T::nan())
        })
    }

    /// Frobenius norm of `(ρ − ρ†)/2` removed when the state was
    /// re-Hermitized; zero for states built directly.
    pub fn asymmetry(&self) -> T {
        self.asymmetry
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.op.trace_product(&self.op).re
    }

    /// `Tr(ρ A)`.
    pub fn expectation(&self, a: &Operator<T>) -> C<T> {
        self.op.trace_product(a)
    }
}

impl<T: Real> AsRef<Operator<T>> for DensityMatrix<T> {
    fn as_ref(&self) -> &Operator<T> {
        &self.op
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for DensityMatrix<T> {
    type Output = C<T>;

    fn index(&self, idx: (usize, usize)) -> &C<T> {
        &self.op[idx]
    }
}

/// Selectable initial-state family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Ground,
    Thermal { temperature: f64 },
    Z2,
    DomainWall,
    MaximallyMixed,
}

impl StateSpec {
    /// Builds the state for Hamiltonian `h`.
    pub fn prepare<T: Real>(&self, h: &Operator<T>) -> Result<DensityMatrix<T>> {
        match *self {
            StateSpec::Ground => ground_state(h),
            StateSpec::Thermal { temperature } => thermal_state(h, T::lit(temperature)),
            StateSpec::Z2 => z2_state(h.sites()),
            StateSpec::DomainWall => domain_wall(h.sites()),
            StateSpec::MaximallyMixed => maximally_mixed(h.sites()),
        }
    }

    /// Construction recorded alongside outputs.
    pub fn definition(&self) -> &'static str {
        match self {
            StateSpec::Ground => "equal-weight mixture over the lowest energy level (degeneracy window 1e-10)",
            StateSpec::Thermal { .. } => "exp(-H/T)/Z",
            StateSpec::Z2 => "(|up,down,up,down,...> + |down,up,down,up,...>)/sqrt(2)",
            StateSpec::DomainWall => "|up...up down...down>, first half up",
            StateSpec::MaximallyMixed => "I/2^L",
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ground => write!(f, "ground"),
            StateSpec::Thermal { temperature } => write!(f, "thermal_T{temperature}"),
            StateSpec::Z2 => write!(f, "z2"),
            StateSpec::DomainWall => write!(f, "domain_wall"),
            StateSpec::MaximallyMixed => write!(f, "maximally_mixed"),
        }
    }
}

fn check_hermitian<T: Real>(h: &Operator<T>) -> Result<()> {
    let scale = Float::max(T::one(), h.frobenius_norm());
    if h.hermiticity_residual() > T::tol(1e-12) * scale {
        return Err(Error::InvalidArgument("Hamiltonian is not Hermitian".into()));
    }
    Ok(())
}

/// `Σ_k w_k |v_k⟩⟨v_k|` over eigenvector columns, weights summing to 1.
fn mixture<T: Real>(sites: usize, vectors: &CMatrix<T>, weights: &[T]) -> Operator<T> {
    let d = vectors.rows();
    let mut m = CMatrix::zeros(d, d);
    for (k, &w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for i in 0..d {
            let vi = vectors[(i, k)] * cr(w);
            for j in 0..d {
                m[(i, j)] += vi * vectors[(j, k)].conj();
            }
        }
    }
    Operator::from_matrix_unchecked(sites, m.hermitian_part())
}

/// Eigenpairs of `h`, ascending. A magnetization-conserving `h` is solved
/// sector by sector so every eigenvector has exact sector support.
fn spectrum<T: Real>(h: &Operator<T>) -> Result<HermitianEigen<T>> {
    let failed = || Error::NumericalQuality("Hermitian eigensolver failed".into());
    let l = h.sites();
    let d = h.dim();
    let conserving = (0..d).all(|i| (0..d).all(|j| magnetization(i, l) == magnetization(j, l) || h[(i, j)].is_zero()));
    if !conserving {
        return hermitian_eigen(h.matrix()).ok_or_else(failed);
    }
    let index = SectorIndex::new(l);
    let mut pairs: Vec<(T, Vec<C<T>>)> = Vec::with_capacity(d);
    for m in 0..=l {
        let states = index.states(m);
        let block = CMatrix::from_fn(states.len(), states.len(), |a, b| h[(states[a], states[b])]);
        let eig = hermitian_eigen(&block).ok_or_else(failed)?;
        for k in 0..states.len() {
            let mut v = vec![C::new(T::zero(), T::zero()); d];
            for (a, &s) in states.iter().enumerate() {
                v[s] = eig.vectors[(a, k)];
            }
            pairs.push((eig.values[k], v));
        }
    }
    pairs.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()));
    let vectors = CMatrix::from_fn(d, d, |i, k| pairs[k].1[i]);
    Ok(HermitianEigen {
        values: pairs.into_iter().map(|p| p.0).collect(),
        vectors,
    })
}

fn finish<T: Real>(op: Operator<T>, label: impl Into<String>) -> Result<DensityMatrix<T>> {
    Ok(DensityMatrix::from_nearly_valid(op)?.with_label(label))
}

/// Projector onto the lowest eigenvector, or the equal-weight mixture over a
/// ground level degenerate within 1e−10.
pub fn ground_state<T: Real>(h: &Operator<T>) -> Result<DensityMatrix<T>> {
    check_hermitian(h)?;
    let eig = spectrum(h)?;
    let e0 = eig.values[0];
    let window = T::tol(GROUND_DEGENERACY_TOL) * Float::max(T::one(), Float::abs(e0));
    let g = eig.values.iter().take_while(|&&e| e - e0 <= window).count();
    let w = T::one() / T::of_usize(g);
    let weights: Vec<T> = (0..eig.values.len()).map(|k| if k < g { w } else { T::zero() }).collect();
    finish(mixture(h.sites(), &eig.vectors, &weights), "ground")
}

/// Gibbs state `exp(−H/T)/Z`, shifted by the ground energy for stability.
pub fn thermal_state<T: Real>(h: &Operator<T>, temperature: T) -> Result<DensityMatrix<T>> {
    if !Float::is_finite(temperature) || temperature <= T::zero() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    check_hermitian(h)?;
    let eig = spectrum(h)?;
    let e0 = eig.values[0];
    let boltz: Vec<T> = eig.values.iter().map(|&e| Float::exp(-(e - e0) / temperature)).collect();
    let z: T = boltz.iter().copied().fold(T::zero(), |a, b| a + b);
    let weights: Vec<T> = boltz.iter().map(|&b| b / z).collect();
    finish(mixture(h.sites(), &eig.vectors, &weights), format!("thermal_T{temperature}"))
}

fn require_even(sites: usize) -> Result<()> {
    hilbert_dim(sites)?;
    if sites % 2 != 0 {
        return Err(Error::InvalidArgument(format!("state needs an even chain, got L = {sites}")));
    }
    Ok(())
}

/// Basis index of `|↑…↑↓…↓⟩` with the first half up.
pub fn domain_wall_index(sites: usize) -> usize {
    (1 << (sites / 2)) - 1
}

/// Basis indices of `|↑↓↑↓…⟩` and `|↓↑↓↑…⟩`.
pub fn neel_indices(sites: usize) -> (usize, usize) {
    let odd_down = (0..sites)
        .filter(|k| k % 2 == 1)
        .fold(0, |acc, k| acc | (1 << (sites - 1 - k)));
    (odd_down, ((1 << sites) - 1) ^ odd_down)
}

pub fn domain_wall<T: Real>(sites: usize) -> Result<DensityMatrix<T>> {
    require_even(sites)?;
    let k = domain_wall_index(sites);
    let op = Operator::basis_projector(sites, k, k);
    Ok(DensityMatrix::from_parts(op, "domain_wall".into(), Some(T::zero())))
}

/// Symmetric Néel superposition `(|↑↓↑↓…⟩ + |↓↑↓↑…⟩)/√2`.
pub fn z2_state<T: Real>(sites: usize) -> Result<DensityMatrix<T>> {
    require_even(sites)?;
    let (a, b) = neel_indices(sites);
    let half = cr(T::lit(0.5));
    let op = Operator::from_fn(sites, |i, j| {
        if (i == a || i == b) && (j == a || j == b) {
            half
        } else {
            C::new(T::zero(), T::zero())
        }
    });
    Ok(DensityMatrix::from_parts(op, "z2".into(), Some(T::zero())))
}

pub fn maximally_mixed<T: Real>(sites: usize) -> Result<DensityMatrix<T>> {
    let d = hilbert_dim(sites)?;
    let w = T::one() / T::of_usize(d);
    let op = Operator::identity(sites).scale_real(w);
    Ok(DensityMatrix::from_parts(op, "maximally_mixed".into(), Some(w)))
}

/// `G G† / Tr(G G†)` for a complex Ginibre matrix `G`; full rank almost surely.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(sites: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    let d = hilbert_dim(sites)?;
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C::new(T::lit(re), T::lit(im))
    });
    let op = Operator::from_matrix_unchecked(sites, g.matmul(&g.adjoint()));
    finish(op, "random")
}
