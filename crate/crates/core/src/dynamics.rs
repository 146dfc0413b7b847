//! Time evolution: spectral reconstruction, an adaptive Runge–Kutta oracle,
//! and trace-distance trajectories toward the steady state.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::apply_liouvillian;
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::model::{LindbladModel, ModelParams};
use crate::scalar::{cabs, Real, C};
use crate::spectral::{steady_state, SpectralDecomposition};
use crate::spin::Operator;
use crate::states::DensityMatrix;

/// Largest `‖(ρ − ρ†)/2‖_F` accepted from spectral reconstruction.
pub const MAX_ASYMMETRY: f64 = 1e-6;
/// Local error tolerance of [`evolve_integrate`].
pub const INTEGRATOR_TOL: f64 = 1e-10;
/// Hermiticity tolerance of [`trace_distance`] inputs.
pub const DISTANCE_HERMITICITY_TOL: f64 = 1e-8;
/// Distances below this are kept in trajectories but never fitted.
pub const DISTANCE_FLOOR: f64 = 1e-12;

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    for (k, &t) in times.iter().enumerate() {
        if !Float::is_finite(t) || t < T::zero() {
            return Err(Error::InvalidArgument(format!("time {t} at position {k} must be finite and non-negative")));
        }
    }
    Ok(())
}

/// Hermitizes, records the removed asymmetry and rejects large residues.
fn finish_state<T: Real>(op: Operator<T>, label: &str) -> Result<DensityMatrix<T>> {
    let herm = op.matrix().hermitian_part();
    let asym = (op.matrix() - &herm).frobenius_norm();
    if asym > T::tol(MAX_ASYMMETRY) {
        return Err(Error::NumericalQuality(format!(
            "reconstructed state is not Hermitian (asymmetry {:e})",
            asym.as_f64()
        )));
    }
    let sites = op.sites();
    Ok(DensityMatrix::from_parts(Operator::from_matrix_unchecked(sites, herm), label.to_string(), None).with_asymmetry(asym))
}

/// `ρ(t) = Σ_k e^{λ_k t} Tr(l̂_k ρ0) r̂_k` at each requested time.
pub fn evolve_spectral<T: Real>(
    decomp: &SpectralDecomposition<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
) -> Result<Vec<DensityMatrix<T>>> {
    check_times(times)?;
    let propagator = SpectralPropagator::new(decomp, rho0.operator())?;
    times
        .iter()
        .map(|&t| finish_state(propagator.at(t), rho0.label()))
        .collect()
}

/// Mode coefficients of one operator, ready for evaluation at any time.
pub(crate) struct SpectralPropagator<'a, T: Real> {
    decomp: &'a SpectralDecomposition<T>,
    parts: Vec<(usize, Vec<C<T>>)>,
}

impl<'a, T: Real> SpectralPropagator<'a, T> {
    pub(crate) fn new(decomp: &'a SpectralDecomposition<T>, x: &Operator<T>) -> Result<Self> {
        let support = decomp.check_support(x)?;
        let parts = support
            .into_iter()
            .map(|label| {
                let pos = decomp
                    .sectors()
                    .iter()
                    .position(|s| s.label == label)
                    .expect("support checked");
                (pos, decomp.sectors()[pos].coefficients(x))
            })
            .collect();
        Ok(Self { decomp, parts })
    }

    pub(crate) fn at(&self, t: T) -> Operator<T> {
        let mut out = Operator::zeros(self.decomp.sites());
        for (pos, coeffs) in &self.parts {
            let sec = &self.decomp.sectors()[*pos];
            let weighted = sec.evolve_coefficients(coeffs, t);
            let y = sec.right.mat_vec(&weighted);
            for (p, &(i, j)) in sec.basis.iter().enumerate() {
                out.matrix_mut()[(i, j)] = y[p];
            }
        }
        out
    }
}

/// `a + Σ s_k b_k` over matrices of equal shape.
fn lincomb<T: Real>(a: &CMatrix<T>, terms: &[(T, &CMatrix<T>)]) -> CMatrix<T> {
    let mut out = a.clone();
    for &(s, b) in terms {
        if s.is_zero() {
            continue;
        }
        for (o, &x) in out.as_mut_slice().iter_mut().zip(b.as_slice()) {
            *o += x * s;
        }
    }
    out
}

// Dormand–Prince 5(4) tableau; the generator is autonomous, so the nodes
// are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dρ/dt = L(ρ)` with an adaptive Dormand–Prince 5(4) stepper,
/// matrix-free, landing exactly on each requested time.
pub fn evolve_integrate<T: Real>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
) -> Result<Vec<DensityMatrix<T>>> {
    check_times(times)?;
    if rho0.sites() != model.sites() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    let sites = model.sites();
    let deriv = |y: &CMatrix<T>| -> Result<CMatrix<T>> {
        Ok(apply_liouvillian(model, &Operator::from_matrix_unchecked(sites, y.clone()))?.into_matrix())
    };
    let tol = T::tol(INTEGRATOR_TOL);
    let lit = T::lit;

    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].as_f64().total_cmp(&times[b].as_f64()));
    let mut out: Vec<Option<DensityMatrix<T>>> = vec![None; times.len()];

    let mut t = T::zero();
    let mut y = rho0.operator().matrix().clone();
    let mut k1 = deriv(&y)?;
    let mut h = lit(1e-3);
    for &slot in &order {
        let target = times[slot];
        while target - t > T::zero() {
            let min_step = lit(1e-14) * Float::max(T::one(), t);
            let step = Float::min(h, target - t);
            let mut ks: Vec<CMatrix<T>> = Vec::with_capacity(7);
            ks.push(k1.clone());
            for s in 1..7 {
                let terms: Vec<(T, &CMatrix<T>)> = (0..s).map(|j| (lit(DP_A[s][j]) * step, &ks[j])).collect();
                let ys = lincomb(&y, &terms);
                ks.push(deriv(&ys)?);
            }
            let y5_terms: Vec<(T, &CMatrix<T>)> = (0..7).map(|j| (lit(DP_B5[j]) * step, &ks[j])).collect();
            let y5 = lincomb(&y, &y5_terms);
            let err_terms: Vec<(T, &CMatrix<T>)> = (0..7).map(|j| (lit(DP_B5[j] - DP_B4[j]) * step, &ks[j])).collect();
            let zero = CMatrix::zeros(y.rows(), y.cols());
            let e = lincomb(&zero, &err_terms);
            let mut err = T::zero();
            for ((&ei, &yi), &zi) in e.as_slice().iter().zip(y.as_slice()).zip(y5.as_slice()) {
                let scale = tol + tol * Float::max(cabs(yi), cabs(zi));
                err = Float::max(err, cabs(ei) / scale);
            }
            if !Float::is_finite(err) {
                return Err(Error::NumericalQuality(format!("integrator produced non-finite state at t = {t}")));
            }
            if err <= T::one() {
                t = if step == target - t { target } else { t + step };
                y = y5;
                k1 = ks.pop().expect("seven stages");
            }
            let factor = if err.is_zero() {
                lit(5.0)
            } else {
                Float::min(lit(5.0), Float::max(lit(0.2), lit(0.9) * Float::powf(err, lit(-0.2))))
            };
            // a clipped final step must not shrink the next one
            h = if err <= T::one() && step < h { h } else { step * factor };
            if h < min_step {
                return Err(Error::Stiffness {
                    t: t.as_f64(),
                    step: h.as_f64(),
                });
            }
        }
        let state = Operator::from_matrix_unchecked(sites, y.clone());
        out[slot] = Some(finish_state(state, rho0.label())?);
    }
    Ok(out.into_iter().map(|s| s.expect("every slot visited")).collect())
}

/// `½ Σ |μ_i|` over eigenvalues of `ρ − σ`.
pub fn trace_distance<T: Real>(rho: impl AsRef<Operator<T>>, sigma: impl AsRef<Operator<T>>) -> Result<T> {
    let (a, b) = (rho.as_ref(), sigma.as_ref());
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let tol = T::tol(DISTANCE_HERMITICITY_TOL);
    if a.hermiticity_residual() > tol || b.hermiticity_residual() > tol {
        return Err(Error::InvalidArgument("trace distance needs Hermitian operands".into()));
    }
    let diff = (a.matrix() - b.matrix()).hermitian_part();
    let ev = hermitian_eigenvalues(&diff).ok_or_else(|| Error::NumericalQuality("Hermitian eigensolver failed".into()))?;
    let d = ev.iter().fold(T::zero(), |acc, &m| acc + Float::abs(m)) * T::lit(0.5);
    Ok(Float::min(T::one(), d))
}

/// Spacing of a time grid on `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeGrid {
    Linear,
    /// `t = 0`, a quarter of the points log-spaced on `[1e−4, 0.1)·t_max`,
    /// the rest uniform on `[0.1, 1]·t_max`.
    #[default]
    LogLinearHybrid,
}

impl TimeGrid {
    pub fn points<T: Real>(self, t_max: T, n: usize) -> Result<Vec<T>> {
        if !Float::is_finite(t_max) || t_max <= T::zero() {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a time grid needs at least 2 points, got {n}")));
        }
        let lin = |a: T, b: T, m: usize| -> Vec<T> {
            (0..m)
                .map(|k| {
                    if k + 1 == m {
                        b
                    } else {
                        a + (b - a) * T::of_usize(k) / T::of_usize(m - 1)
                    }
                })
                .collect()
        };
        match self {
            TimeGrid::Linear => Ok(lin(T::zero(), t_max, n)),
            TimeGrid::LogLinearHybrid => {
                if n < 8 {
                    return Ok(lin(T::zero(), t_max, n));
                }
                let n_log = n / 4;
                let n_lin = n - 1 - n_log;
                let split = t_max * T::lit(0.1);
                let lo = Float::ln(t_max * T::lit(1e-4));
                let hi = Float::ln(split);
                let mut v = vec![T::zero()];
                for k in 0..n_log {
                    let f = T::of_usize(k) / T::of_usize(n_log);
                    v.push(Float::exp(lo + (hi - lo) * f));
                }
                v.extend(lin(split, t_max, n_lin));
                Ok(v)
            }
        }
    }
}

/// `D(t) = ‖ρ(t) − ρ_ss‖_tr` sampled on a grid.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub distances: Vec<T>,
    pub state_label: String,
    pub params: Option<ModelParams<T>>,
    pub initial_state: DensityMatrix<T>,
    pub steady_state: DensityMatrix<T>,
    decomposition: Option<SpectralDecomposition<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Trajectory from precomputed samples, without a spectral handle.
    pub fn from_samples(
        times: Vec<T>,
        distances: Vec<T>,
        initial_state: DensityMatrix<T>,
        steady_state: DensityMatrix<T>,
    ) -> Result<Self> {
        if times.len() != distances.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: distances.len(),
            });
        }
        Ok(Self {
            times,
            distances,
            state_label: initial_state.label().to_string(),
            params: None,
            initial_state,
            steady_state,
            decomposition: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn decomposition(&self) -> Option<&SpectralDecomposition<T>> {
        self.decomposition.as_ref()
    }

    /// `D(t)` at an arbitrary time from the spectral form.
    pub fn distance_at(&self, t: T) -> Result<T> {
        let decomp = self
            .decomposition
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("trajectory has no spectral decomposition attached".into()))?;
        check_times(&[t])?;
        let rho = SpectralPropagator::new(decomp, self.initial_state.operator())?.at(t);
        let rho = finish_state(rho, self.initial_state.label())?;
        trace_distance(&rho, &self.steady_state)
    }
}

/// Samples `D(t)` between the spectrally evolved `rho0` and its steady state.
pub fn distance_trajectory<T: Real>(
    decomp: &SpectralDecomposition<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    check_times(times)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("trajectory times must be strictly increasing".into()));
    }
    let ss = steady_state(decomp, rho0)?;
    let states = evolve_spectral(decomp, rho0, times)?;
    let distances = states
        .iter()
        .map(|rho| trace_distance(rho, &ss))
        .collect::<Result<Vec<T>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        distances,
        state_label: rho0.label().to_string(),
        params: decomp.params().copied(),
        initial_state: rho0.clone(),
        steady_state: ss,
        decomposition: Some(decomp.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::sector_decompose;
    use crate::spectral::decompose;
    use crate::states::{maximally_mixed, random_density_matrix};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn xxz(l: usize, alpha: f64, delta: f64) -> LindbladModel<f64> {
        LindbladModel::xxz(ModelParams::xxz(l, alpha, delta).unwrap()).unwrap()
    }

    fn pure(l: usize, k: usize) -> DensityMatrix<f64> {
        DensityMatrix::new(Operator::basis_projector(l, k, k)).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let a = pure(1, 0);
        let b = pure(1, 1);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let mm = maximally_mixed::<f64>(1).unwrap();
        assert!((trace_distance(&a, &mm).unwrap() - 0.5).abs() < 1e-15);
        let bad = Operator::basis_projector(1, 0, 1);
        assert!(matches!(trace_distance(&bad, &a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn spectral_and_integrated_paths_agree() {
        let m = xxz(3, 1.0, 1.1);
        let d = decompose(&sector_decompose(&m).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(17);
        let rho0 = random_density_matrix(3, &mut rng).unwrap();
        let times = TimeGrid::Linear.points(5.0, 11).unwrap();
        let a = evolve_spectral(&d, &rho0, &times).unwrap();
        let b = evolve_integrate(&m, &rho0, &times).unwrap();
        assert!(trace_distance(&a[0], &rho0).unwrap() <= 1e-8);
        for (x, y) in a.iter().zip(&b) {
            assert!(trace_distance(x, y).unwrap() <= 1e-8);
            assert!((y.operator().trace().re - 1.0).abs() <= 1e-10);
            assert!(y.operator().hermiticity_residual() <= 1e-10);
            assert!(x.min_eigenvalue() >= -1e-8);
        }
    }

    #[test]
    fn integrator_handles_unsorted_times() {
        let m = xxz(2, 1.0, 0.5);
        let rho0 = pure(2, 1);
        let fwd = evolve_integrate(&m, &rho0, &[0.5, 1.0]).unwrap();
        let rev = evolve_integrate(&m, &rho0, &[1.0, 0.5]).unwrap();
        assert!(trace_distance(&fwd[0], &rev[1]).unwrap() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        let m = xxz(3, 2.0, 1.0);
        let d = decompose(&sector_decompose(&m).unwrap()).unwrap();
        let mm = maximally_mixed::<f64>(3).unwrap();
        for rho in evolve_spectral(&d, &mm, &[0.0, 1.0, 7.5]).unwrap() {
            assert!((rho.operator() - mm.operator()).frobenius_norm() < 1e-12);
        }
        let traj = distance_trajectory(&d, &mm, &[0.0, 1.0, 2.0]).unwrap();
        assert!(traj.distances.iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn semigroup_and_contractivity() {
        let m = xxz(3, 0.5, 1.2);
        let d = decompose(&sector_decompose(&m).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(4);
        let rho0 = random_density_matrix(3, &mut rng).unwrap();
        let r1 = evolve_spectral(&d, &rho0, &[0.7]).unwrap().remove(0);
        let r12 = evolve_spectral(&d, &r1, &[1.1]).unwrap().remove(0);
        let direct = evolve_spectral(&d, &rho0, &[1.8]).unwrap().remove(0);
        assert!((r12.operator() - direct.operator()).frobenius_norm() <= 1e-8);

        let times = TimeGrid::LogLinearHybrid.points(10.0, 60).unwrap();
        let traj = distance_trajectory(&d, &rho0, &times).unwrap();
        for w in traj.distances.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        assert!(traj.distances.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let mid = traj.distance_at(0.7).unwrap();
        let ss = &traj.steady_state;
        assert!((mid - trace_distance(&r1, ss).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn grids() {
        let g = TimeGrid::LogLinearHybrid.points(10.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let l = TimeGrid::Linear.points(5.0, 50).unwrap();
        assert_eq!(l.len(), 50);
        assert_eq!(l[49], 5.0);
        assert!(TimeGrid::Linear.points(0.0, 10).is_err());
    }
}
