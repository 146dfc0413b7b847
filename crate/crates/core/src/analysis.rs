//! Overlap spectra, the uniform pair-hopping mode, degeneracy counts, decay
//! fits and trajectory-crossing detection.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Trajectory, DISTANCE_FLOOR};
use crate::error::{Error, Result};
use crate::liouvillian::{apply_liouvillian, support_sectors, SectorIndex, SectorLabel};
use crate::linalg::{singular_values, thin_q, CMatrix};
use crate::model::LindbladModel;
use crate::scalar::{cabs, cabs2, cr, Real, C};
use crate::spectral::{SpectralDecomposition, CLUSTER_TOL, KERNEL_TOL};
use crate::spin::{pair_hopping, Operator};
use crate::states::DensityMatrix;

/// Window around `Re λ = −2` used to select the exact-mode eigenspace.
pub const EXACT_MODE_TOL: f64 = 1e-8;
/// Absolute resolution of crossing-time bisection.
pub const CROSSING_RESOLUTION: f64 = 1e-6;
/// `max |D_A − D_B|` over `t ≥ 1` below which two trajectories collapse.
pub const COLLAPSE_TOL: f64 = 1e-6;
/// Fewest samples a decay fit accepts.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapEntry {
    /// `(re, im)`.
    pub eigenvalue: (f64, f64),
    pub sector: SectorLabel,
    /// `|Tr(l̂_k ρ0)| · ‖r̂_k‖_tr`.
    pub weight: f64,
}

/// Gauge-invariant weight of an initial state on every decaying mode, in
/// the decomposition's order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapSpectrum {
    pub entries: Vec<OverlapEntry>,
    /// Sum of all weights.
    pub normalization: f64,
}

impl OverlapSpectrum {
    /// Summed weight of entries whose eigenvalue satisfies `pred`.
    pub fn weight_where(&self, pred: impl Fn(f64, f64) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|e| pred(e.eigenvalue.0, e.eigenvalue.1))
            .map(|e| e.weight)
            .sum()
    }

    /// Fraction of the total weight away from `Re λ = re` (± `tol`).
    pub fn relative_weight_off(&self, re: f64, tol: f64) -> f64 {
        if self.normalization == 0.0 {
            return 0.0;
        }
        self.weight_where(|r, _| (r - re).abs() > tol) / self.normalization
    }
}

/// Trace norm of the block submatrix carrying `r̂_k`.
fn mode_trace_norm<T: Real>(decomp: &SpectralDecomposition<T>, label: SectorLabel, local: usize) -> Result<T> {
    let sec = decomp.sector(label).expect("label from the decomposition");
    let l = decomp.sites();
    let index = SectorIndex::new(l);
    let rows = index.states(label.m_ket).len();
    let cols = index.states(label.m_bra).len();
    // basis order is column-major over (ket rank, bra rank)
    let sub = CMatrix::from_fn(rows, cols, |a, b| sec.right[(b * rows + a, local)]);
    let sv = singular_values(&sub).ok_or_else(|| Error::NumericalQuality("SVD failed".into()))?;
    Ok(sv.into_iter().fold(T::zero(), |a, b| a + b))
}

pub fn overlap_spectrum<T: Real>(decomp: &SpectralDecomposition<T>, rho0: &DensityMatrix<T>) -> Result<OverlapSpectrum> {
    let support = decomp.check_support(rho0.operator())?;
    let coeffs: Vec<(SectorLabel, Vec<C<T>>)> = support
        .iter()
        .map(|&label| (label, decomp.sector(label).expect("support checked").coefficients(rho0.operator())))
        .collect();
    let kernel = T::lit(KERNEL_TOL);
    let mut entries = Vec::new();
    for mode in decomp.modes() {
        if cabs(mode.eigenvalue) <= kernel {
            continue;
        }
        let Some((_, c)) = coeffs.iter().find(|(l, _)| *l == mode.sector) else {
            continue;
        };
        let ck = cabs(c[mode.local]);
        let weight = if ck.is_zero() {
            T::zero()
        } else {
            ck * mode_trace_norm(decomp, mode.sector, mode.local)?
        };
        entries.push(OverlapEntry {
            eigenvalue: (mode.eigenvalue.re.as_f64(), mode.eigenvalue.im.as_f64()),
            sector: mode.sector,
            weight: weight.as_f64(),
        });
    }
    let normalization = entries.iter().map(|e| e.weight).sum();
    Ok(OverlapSpectrum { entries, normalization })
}

/// Uniform pair hopping `Σ_{i≠j} σ_i^+ σ_j^−`.
pub fn build_o2<T: Real>(sites: usize) -> Result<Operator<T>> {
    if sites < 2 {
        return Err(Error::InvalidArgument(format!("pair hopping needs L ≥ 2, got {sites}")));
    }
    let mut o = Operator::zeros(sites);
    for i in 0..sites {
        for j in 0..sites {
            if i != j {
                o = &o + &pair_hopping(i, j, sites)?;
            }
        }
    }
    Ok(o)
}

/// `‖L(O) + 2·O‖_F / ‖O‖_F`.
pub fn verify_exact_mode<T: Real>(model: &LindbladModel<T>, o2: &Operator<T>) -> Result<T> {
    let norm = o2.frobenius_norm();
    if norm.is_zero() {
        return Err(Error::InvalidArgument("operator is zero".into()));
    }
    let lo = apply_liouvillian(model, o2)?;
    Ok((&lo + &o2.scale_real(T::lit(2.0))).frobenius_norm() / norm)
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.commutator(b).frobenius_norm())
}

/// `|⟨A, B⟩_HS| / (‖A‖‖B‖)`.
pub fn hs_cosine<T: Real>(a: &Operator<T>, b: &Operator<T>) -> T {
    let denom = a.frobenius_norm() * b.frobenius_norm();
    if denom.is_zero() {
        return T::zero();
    }
    Float::min(T::one(), cabs(a.hs_inner(b)) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSimilarity {
    /// Best single-mode cosine.
    pub cosine: f64,
    /// `‖O − P O‖ / ‖O‖` with `P` the Hilbert–Schmidt projector onto the
    /// span of the selected modes.
    pub subspace_residual: f64,
    /// Number of modes with `Re λ = −2`.
    pub modes: usize,
}

/// Compares `o2` against the modes with `Re λ = −2 ± 1e−8` in the diagonal
/// `(m, m)` sectors.
pub fn mode_similarity<T: Real>(decomp: &SpectralDecomposition<T>, o2: &Operator<T>) -> Result<ModeSimilarity> {
    let target = T::lit(-2.0);
    let window = T::lit(EXACT_MODE_TOL);
    let norm = o2.frobenius_norm();
    if norm.is_zero() {
        return Err(Error::InvalidArgument("operator is zero".into()));
    }
    let mut selected = 0usize;
    let mut best = T::zero();
    let mut outside = T::zero();
    let support = support_sectors(o2);
    for sec in decomp.sectors().iter().filter(|s| s.label.is_diagonal()) {
        let cols: Vec<usize> = (0..sec.dim())
            .filter(|&k| Float::abs(sec.eigenvalues[k].re - target) <= window && !sec.is_generalized(k))
            .collect();
        selected += cols.len();
        let x = sec.restrict(o2);
        for &k in &cols {
            let (mut dot, mut rn) = (cr(T::zero()), T::zero());
            for p in 0..sec.dim() {
                dot += sec.right[(p, k)].conj() * x[p];
                rn += cabs2(sec.right[(p, k)]);
            }
            if rn > T::zero() {
                best = Float::max(best, cabs(dot) / (Float::sqrt(rn) * norm));
            }
        }
        if !support.contains(&sec.label) {
            continue;
        }
        if cols.is_empty() {
            outside += x.iter().fold(T::zero(), |a, &z| a + cabs2(z));
            continue;
        }
        let v = CMatrix::from_fn(sec.dim(), cols.len(), |p, c| sec.right[(p, cols[c])]);
        let q = thin_q(&v);
        let mut proj = vec![cr(T::zero()); q.cols()];
        for (c, slot) in proj.iter_mut().enumerate() {
            for p in 0..sec.dim() {
                *slot += q[(p, c)].conj() * x[p];
            }
        }
        for p in 0..sec.dim() {
            let along = (0..q.cols()).fold(cr(T::zero()), |a, c| a + q[(p, c)] * proj[c]);
            outside += cabs2(x[p] - along);
        }
    }
    // weight in sectors the decomposition does not cover is entirely outside
    let index = SectorIndex::new(decomp.sites());
    for &label in support.iter().filter(|l| !l.is_diagonal() || decomp.sector(**l).is_none()) {
        outside += index.basis(label).iter().fold(T::zero(), |a, &(i, j)| a + cabs2(o2[(i, j)]));
    }
    if selected == 0 {
        return Err(Error::SpectrumMismatch("no mode with Re λ = −2 in the diagonal sectors".into()));
    }
    Ok(ModeSimilarity {
        cosine: Float::min(T::one(), best).as_f64(),
        subspace_residual: (Float::sqrt(outside) / norm).as_f64(),
        modes: selected,
    })
}

/// Number of modes with `|λ − target| ≤ 1e−8`.
pub fn degeneracy_count<T: Real>(decomp: &SpectralDecomposition<T>, target: C<T>) -> usize {
    let tol = T::lit(CLUSTER_TOL);
    decomp.modes().filter(|m| cabs(m.eigenvalue - target) <= tol).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Negative slope of `ln D(t)`.
    pub rate: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Least-squares slope of `ln D(t)` over `t ∈ [lo, hi]`, skipping samples
/// below the numerical floor.
pub fn fit_decay_rate<T: Real>(traj: &Trajectory<T>, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.distances)
        .map(|(&t, &d)| (t.as_f64(), d.as_f64()))
        .filter(|&(t, d)| t >= lo && t <= hi && d > DISTANCE_FLOOR)
        .map(|(t, d)| (t, d.ln()))
        .collect();
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{n} samples above the floor in [{lo}, {hi}], need {MIN_FIT_POINTS}"
        )));
    }
    let nf = n as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all fit samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        rate: -slope,
        stderr,
        points: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MpembaVerdict {
    StrongMpemba,
    NoCrossing,
    DegenerateCollapse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpembaReport {
    pub state_a: String,
    pub state_b: String,
    pub crossing_time: Option<f64>,
    /// `D_A(0) − D_B(0)`.
    pub d0_gap: f64,
    pub verdict: MpembaVerdict,
}

/// Looks for `A`, initially farther from equilibrium, overtaking `B`.
///
/// Collapse is declared when the trajectories start apart (`|d0_gap| > 1e−6`)
/// but agree within 1e−6 for every `t ≥ 1`. A crossing needs `A` ahead at
/// `t = 0` by more than 1e−6, so equal starting distances never cross.
/// Otherwise the first `+ → −`
/// sign change of `D_A − D_B` is refined by bisection on the spectral form
/// when both trajectories carry a decomposition, and by linear
/// interpolation otherwise.
pub fn detect_crossing<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<MpembaReport> {
    if a.times != b.times {
        return Err(Error::InvalidArgument("trajectories are sampled on different time grids".into()));
    }
    if let (Some(pa), Some(pb)) = (&a.params, &b.params) {
        if pa != pb {
            return Err(Error::InvalidArgument("trajectories come from different model parameters".into()));
        }
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("empty trajectories".into()));
    }
    let times: Vec<f64> = a.times.iter().map(|t| t.as_f64()).collect();
    let diff: Vec<f64> = a
        .distances
        .iter()
        .zip(&b.distances)
        .map(|(x, y)| x.as_f64() - y.as_f64())
        .collect();
    let d0_gap = diff[0];
    let report = |crossing_time, verdict| MpembaReport {
        state_a: a.state_label.clone(),
        state_b: b.state_label.clone(),
        crossing_time,
        d0_gap,
        verdict,
    };

    let late_max = times
        .iter()
        .zip(&diff)
        .filter(|(t, _)| **t >= 1.0)
        .map(|(_, d)| d.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if d0_gap.abs() > COLLAPSE_TOL && late_max.is_finite() && late_max < COLLAPSE_TOL {
        return Ok(report(None, MpembaVerdict::DegenerateCollapse));
    }
    if d0_gap <= CROSSING_RESOLUTION {
        return Ok(report(None, MpembaVerdict::NoCrossing));
    }
    let Some(k) = (1..diff.len()).find(|&k| diff[k - 1] > 0.0 && diff[k] < 0.0) else {
        return Ok(report(None, MpembaVerdict::NoCrossing));
    };
    let (mut lo, mut hi) = (times[k - 1], times[k]);
    let spectral = a.decomposition().is_some() && b.decomposition().is_some();
    let t_cross = if spectral {
        let gap = |t: f64| -> Result<f64> { Ok(a.distance_at(T::lit(t))?.as_f64() - b.distance_at(T::lit(t))?.as_f64()) };
        while hi - lo > CROSSING_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if gap(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * diff[k - 1] / (diff[k - 1] - diff[k])
    };
    Ok(report(Some(t_cross), MpembaVerdict::StrongMpemba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{distance_trajectory, TimeGrid};
    use crate::liouvillian::sector_decompose;
    use crate::model::ModelParams;
    use crate::spectral::{decompose, decompose_with, DefectivePolicy};
    use crate::spin::total_spin_operators;
    use crate::states::{maximally_mixed, random_density_matrix};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn xxz(l: usize, alpha: f64, delta: f64) -> LindbladModel<f64> {
        LindbladModel::xxz(ModelParams::xxz(l, alpha, delta).unwrap()).unwrap()
    }

    #[test]
    fn o2_identity_and_symmetry() {
        let o = build_o2::<f64>(3).unwrap();
        let s = total_spin_operators::<f64>(3).unwrap();
        let rhs = &(&s.plus.dot(&s.minus) - &s.z) - &Operator::identity(3).scale_real(1.5);
        assert!((&o - &rhs).frobenius_norm() <= 1e-13);
        assert!(o.hermiticity_residual() == 0.0);
        assert_eq!(o.trace(), cr(0.0));
        assert!(build_o2::<f64>(1).is_err());
    }

    #[test]
    fn exact_mode_residuals() {
        for alpha in [0.0, 0.5, 1.0, 2.0, 3.0, 4.0] {
            let m = xxz(5, alpha, 1.0);
            assert!(verify_exact_mode(&m, &build_o2(5).unwrap()).unwrap() <= 1e-10);
        }
        let o = build_o2(4).unwrap();
        assert!(verify_exact_mode(&xxz(4, 1.0, 1.1), &o).unwrap() > 1e-3);
        assert!(verify_exact_mode(&xxz(4, 1.0, 1.7).dissipator_only(), &o).unwrap() <= 1e-12);
    }

    #[test]
    fn commutators() {
        let o = build_o2(4).unwrap();
        let h1 = xxz(4, 2.0, 1.0);
        let h2 = xxz(4, 2.0, 1.1);
        assert!(commutator_norm(h1.hamiltonian(), &o).unwrap() <= 1e-12);
        assert!(commutator_norm(h2.hamiltonian(), &o).unwrap() > 0.0);
        assert_eq!(commutator_norm(&o, &o).unwrap(), 0.0);
        assert!(commutator_norm(&o, &Operator::identity(3)).is_err());
    }

    #[test]
    fn similarity_and_degeneracy() {
        let o = build_o2::<f64>(4).unwrap();
        assert!((hs_cosine(&o, &o) - 1.0).abs() < 1e-15);
        let resolved = |alpha| decompose_with(&sector_decompose(&xxz(4, alpha, 1.0)).unwrap(), DefectivePolicy::Resolve).unwrap();
        for alpha in [1.0, 2.0, 0.0] {
            let d = resolved(alpha);
            let sim = mode_similarity(&d, &o).unwrap();
            assert!(sim.subspace_residual <= 1e-8, "alpha {alpha}: {sim:?}");
        }
        let (d0, d2) = (resolved(0.0), resolved(2.0));
        assert!(degeneracy_count(&d0, cr(-2.0)) > degeneracy_count(&d2, cr(-2.0)));
        let free = decompose(&sector_decompose(&LindbladModel::pure_dephasing(3).unwrap()).unwrap()).unwrap();
        assert!(degeneracy_count(&free, cr(-2.0)) >= 6);
    }

    #[test]
    fn overlap_of_stationary_state_is_empty() {
        let d = decompose(&sector_decompose(&xxz(3, 1.0, 1.0)).unwrap()).unwrap();
        let ov = overlap_spectrum(&d, &maximally_mixed(3).unwrap()).unwrap();
        assert!(ov.entries.iter().all(|e| e.weight < 1e-14));
        for w in ov.entries.windows(2) {
            assert!(w[0].eigenvalue.0 >= w[1].eigenvalue.0);
        }
    }

    #[test]
    fn overlap_weights_are_gauge_invariant() {
        let m = xxz(3, 1.0, 1.1);
        let d = decompose(&sector_decompose(&m).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(8);
        let rho = random_density_matrix(3, &mut rng).unwrap();
        let ov = overlap_spectrum(&d, &rho).unwrap();
        // weight bounds the trace norm of each mode's contribution
        let mut k_entry = 0;
        for k in 0..d.len() {
            if d.is_kernel(k) {
                continue;
            }
            let contrib = d.right_mode(k).scale(d.coefficient(k, rho.operator()));
            let sv = singular_values(contrib.matrix()).unwrap();
            let tn: f64 = sv.iter().sum();
            assert!((tn - ov.entries[k_entry].weight).abs() < 1e-10);
            k_entry += 1;
        }
    }

    fn synthetic(rate: f64, amp: f64) -> Trajectory<f64> {
        let times = TimeGrid::Linear.points(5.0, 51).unwrap();
        let d: Vec<f64> = times.iter().map(|&t| amp * (-rate * t).exp()).collect();
        let mm = maximally_mixed::<f64>(1).unwrap();
        Trajectory::from_samples(times, d, mm.clone(), mm).unwrap()
    }

    #[test]
    fn fit_exact_exponential() {
        let fit = fit_decay_rate(&synthetic(2.0, 0.3), (0.0, 5.0)).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!(matches!(fit_decay_rate(&synthetic(2.0, 0.3), (6.0, 7.0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn crossing_examples() {
        let a = synthetic(2.0, 0.5);
        let same = detect_crossing(&a, &a).unwrap();
        assert_eq!(same.verdict, MpembaVerdict::NoCrossing);
        assert_eq!(same.d0_gap, 0.0);

        // 0.5 e^{−2t} vs 0.3 e^{−t}: cross at t = ln(5/3)
        let b = synthetic(1.0, 0.3);
        let r = detect_crossing(&a, &b).unwrap();
        assert_eq!(r.verdict, MpembaVerdict::StrongMpemba);
        assert!((r.crossing_time.unwrap() - (5.0f64 / 3.0).ln()).abs() < 0.02);

        let short = Trajectory::from_samples(vec![0.0, 1.0], vec![0.1, 0.0], a.initial_state.clone(), a.steady_state.clone()).unwrap();
        assert!(detect_crossing(&a, &short).is_err());
    }

    #[test]
    fn crossing_refined_spectrally() {
        let m = xxz(3, 1.0, 1.1);
        let d = decompose(&sector_decompose(&m).unwrap()).unwrap();
        let mut rng = StdRng::seed_from_u64(21);
        let times = TimeGrid::Linear.points(6.0, 25).unwrap();
        let mut found = false;
        for _ in 0..40 {
            let x = random_density_matrix(3, &mut rng).unwrap();
            let y = random_density_matrix(3, &mut rng).unwrap();
            let ta = distance_trajectory(&d, &x, &times).unwrap();
            let tb = distance_trajectory(&d, &y, &times).unwrap();
            let r = detect_crossing(&ta, &tb).unwrap();
            if let Some(tc) = r.crossing_time {
                let g = ta.distance_at(tc).unwrap() - tb.distance_at(tc).unwrap();
                let slope = (ta.distance_at(tc + 1e-3).unwrap() - tb.distance_at(tc + 1e-3).unwrap() - g) / 1e-3;
                assert!(g.abs() <= slope.abs() * 1e-6 + 1e-12, "gap {g} at {tc}");
                found = true;
                break;
            }
        }
        assert!(found, "no crossing among random pairs");
    }
}
