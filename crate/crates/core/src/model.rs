//! Long-range XXZ Hamiltonian and the local dephasing jump operators.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cr, Real, C};
use crate::spin::{hilbert_dim, is_up, site_operator, total_spin_operators, Operator, SiteOp};

/// Parameters of `H = Σ_{i<j} J/|i−j|^α (S^x_i S^x_j + S^y_i S^y_j + Δ S^z_i S^z_j)`
/// with `S = σ/2` and open boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub coupling: T,
    pub alpha: T,
    pub delta: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(sites: usize, coupling: T, alpha: T, delta: T) -> Result<Self> {
        let p = Self {
            sites,
            coupling,
            alpha,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `J = 1` chain with the given range exponent and anisotropy.
    pub fn xxz(sites: usize, alpha: T, delta: T) -> Result<Self> {
        Self::new(sites, T::one(), alpha, delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidArgument(format!(
                "the chain needs at least 2 sites, got {}",
                self.sites
            )));
        }
        hilbert_dim(self.sites)?;
        if !Float::is_finite(self.alpha) || self.alpha < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if !Float::is_finite(self.coupling) || self.coupling.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "J must be finite and nonzero, got {}",
                self.coupling
            )));
        }
        if !Float::is_finite(self.delta) {
            return Err(Error::InvalidArgument("delta must be finite".into()));
        }
        Ok(())
    }

    /// Pair coupling `J/|i−j|^α`; exactly `J` when `α = 0`.
    pub fn pair_coupling(&self, i: usize, j: usize) -> T {
        if self.alpha.is_zero() {
            return self.coupling;
        }
        let r = T::of_usize(i.abs_diff(j));
        self.coupling / Float::powf(r, self.alpha)
    }
}

/// Hamiltonian plus jump operators of a dephasing Lindblad generator
/// `L(ρ) = −i[H,ρ] + Σ_l (2 L_l ρ L_l† − {L_l†L_l, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladModel<T: Real> {
    hamiltonian: Operator<T>,
    jumps: Vec<Operator<T>>,
    params: Option<ModelParams<T>>,
}

impl<T: Real> LindbladModel<T> {
    /// Validates that `H` is Hermitian and every jump is a Hermitian
    /// idempotent projector.
    pub fn new(hamiltonian: Operator<T>, jumps: Vec<Operator<T>>) -> Result<Self> {
        let tol = T::tol(1e-12);
        let scale = Float::max(T::one(), hamiltonian.frobenius_norm());
        if hamiltonian.hermiticity_residual() > tol * scale {
            return Err(Error::InvalidModel("Hamiltonian is not Hermitian".into()));
        }
        for (l, jump) in jumps.iter().enumerate() {
            if jump.sites() != hamiltonian.sites() {
                return Err(Error::DimensionMismatch {
                    expected: hamiltonian.dim(),
                    found: jump.dim(),
                });
            }
            let idem = (&jump.dot(jump) - jump).frobenius_norm();
            if jump.hermiticity_residual() > tol || idem > tol {
                return Err(Error::InvalidModel(format!(
                    "jump operator {l} is not a Hermitian projector"
                )));
            }
        }
        Ok(Self {
            hamiltonian,
            jumps,
            params: None,
        })
    }

    /// The dephased XXZ chain.
    pub fn xxz(params: ModelParams<T>) -> Result<Self> {
        params.validate()?;
        let mut model = Self::new(build_hamiltonian(&params)?, build_jumps(params.sites)?)?;
        model.params = Some(params);
        Ok(model)
    }

    /// Same jumps, `H = 0`.
    pub fn dissipator_only(&self) -> Self {
        Self {
            hamiltonian: Operator::zeros(self.sites()),
            jumps: self.jumps.clone(),
            params: None,
        }
    }

    /// Pure dephasing on `sites` sites with `H = 0`.
    pub fn pure_dephasing(sites: usize) -> Result<Self> {
        Self::new(Operator::zeros(sites), build_jumps(sites)?)
    }

    pub fn hamiltonian(&self) -> &Operator<T> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator<T>] {
        &self.jumps
    }

    pub fn params(&self) -> Option<&ModelParams<T>> {
        self.params.as_ref()
    }

    pub fn sites(&self) -> usize {
        self.hamiltonian.sites()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// Builds the XXZ Hamiltonian directly in the computational basis.
pub fn build_hamiltonian<T: Real>(params: &ModelParams<T>) -> Result<Operator<T>> {
    params.validate()?;
    let l = params.sites;
    let d = 1usize << l;
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let mut mat = CMatrix::zeros(d, d);
    for i in 0..l {
        for j in (i + 1)..l {
            let c = params.pair_coupling(i, j);
            let flip = (1usize << (l - 1 - i)) | (1usize << (l - 1 - j));
            for s in 0..d {
                let aligned = is_up(s, i, l) == is_up(s, j, l);
                let zz = if aligned { T::one() } else { -T::one() };
                mat[(s, s)] += cr(c * params.delta * zz * quarter);
                if !aligned {
                    mat[(s ^ flip, s)] += cr(c * half);
                }
            }
        }
    }
    Ok(Operator::from_matrix_unchecked(l, mat))
}

/// One projector `(σ^z_l + 1)/2` onto spin-up per site.
pub fn build_jumps<T: Real>(sites: usize) -> Result<Vec<Operator<T>>> {
    (0..sites)
        .map(|l| site_operator(SiteOp::ProjectorUp, l, sites))
        .collect()
}

/// Candidate closed forms for the `α = 0` Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllToAllForm {
    /// `(J/2)(S² + (Δ−1)(S^z)²)`, the pair sum rewritten with
    /// `Σ_{i<j} S_i·S_j = ½(S² − Σ_i S_i²)`.
    PairSumCasimir,
    /// `(J/(2L)) S²`.
    KacNormalizedCasimir,
    /// `−(J/L)(S² − (S^z)²)`.
    NegativeLmg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllToAllCheck<T> {
    /// `‖H − F − c·I‖_F` for the best-matching form `F`.
    pub residual: T,
    pub constant: T,
    pub matched: AllToAllForm,
    /// `(form, residual, constant)` for every candidate.
    pub candidates: Vec<(AllToAllForm, T, T)>,
}

/// Compares the directly built `α = 0` Hamiltonian against closed forms in
/// the total-spin operators, each with its optimal additive constant.
pub fn all_to_all_check<T: Real>(params: &ModelParams<T>) -> Result<AllToAllCheck<T>> {
    params.validate()?;
    if !params.alpha.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "all-to-all check needs alpha = 0, got {}",
            params.alpha
        )));
    }
    let l = params.sites;
    let h = build_hamiltonian(params)?;
    let s = total_spin_operators::<T>(l)?;
    let sz2 = s.z.dot(&s.z);
    let j = params.coupling;
    let lf = T::of_usize(l);

    let forms = [
        (
            AllToAllForm::PairSumCasimir,
            (&s.squared + &sz2.scale_real(params.delta - T::one())).scale_real(j * T::lit(0.5)),
        ),
        (
            AllToAllForm::KacNormalizedCasimir,
            s.squared.scale_real(j / (T::lit(2.0) * lf)),
        ),
        (
            AllToAllForm::NegativeLmg,
            (&s.squared - &sz2).scale_real(-j / lf),
        ),
    ];

    let d = T::of_usize(h.dim());
    let candidates: Vec<(AllToAllForm, T, T)> = forms
        .into_iter()
        .map(|(form, f)| {
            let diff = &h - &f;
            let c = diff.trace().re / d;
            let shifted = &diff - &Operator::identity(l).scale(C::new(c, T::zero()));
            (form, shifted.frobenius_norm(), c)
        })
        .collect();
    let &(matched, residual, constant) = candidates
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty candidate list");
    Ok(AllToAllCheck {
        residual,
        constant,
        matched,
        candidates,
    })
}
