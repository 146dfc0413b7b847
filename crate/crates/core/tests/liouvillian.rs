mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use xxz_lindblad::linalg::{general_eigenvalues, CMatrix};
use xxz_lindblad::liouvillian::{support_sectors, vectorize, SectorIndex, DEFAULT_DENSE_CAP};
use xxz_lindblad::{
    apply_liouvillian, build_superoperator, sector_decompose, site_operator, Error, LindbladModel, Operator,
    SectorLabel, SiteOp,
};

fn random_operator(l: usize, entries: &[(f64, f64)]) -> Operator<f64> {
    let d = 1 << l;
    Operator::from_fn(l, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        Complex64::new(re, im)
    })
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)
}

#[test]
fn action_examples() {
    for (l, alpha, delta) in [(3, 1.0, 1.0), (4, 0.0, 1.1), (4, 2.0, 0.5)] {
        let m = model(l, alpha, delta);
        let out = apply_liouvillian(&m, &Operator::identity(l)).unwrap();
        assert!(out.frobenius_norm() < 1e-14);
    }
    let free = LindbladModel::<f64>::pure_dephasing(4).unwrap();
    for site in 0..4 {
        let plus = site_operator::<f64>(SiteOp::Plus, site, 4).unwrap();
        let out = apply_liouvillian(&free, &plus).unwrap();
        assert!((&out + &plus).frobenius_norm() <= 1e-13);
    }
    for a in 0..4 {
        for b in 0..4 {
            if a == b {
                continue;
            }
            let x = xxz_lindblad::pair_hopping::<f64>(a, b, 4).unwrap();
            let out = apply_liouvillian(&free, &x).unwrap();
            assert!((&out + &x.scale_real(2.0)).frobenius_norm() <= 1e-13);
        }
    }
    let wrong = Operator::<f64>::identity(3);
    assert!(apply_liouvillian(&model(4, 1.0, 1.0), &wrong).is_err());
}

#[test]
fn action_matches_index_oracle() {
    let m = model(4, 1.5, 0.7);
    let h = xxz_hamiltonian(4, 1.0, 1.5, 0.7);
    let x: Vec<(f64, f64)> = (0..97).map(|k| ((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
    let x = random_operator(4, &x);
    let want = liouvillian(4, &h, &to_mat(&x));
    assert!(max_diff(&apply_liouvillian(&m, &x).unwrap(), &want) < 1e-13);
}

#[test]
fn superoperator_examples() {
    let single = LindbladModel::<f64>::pure_dephasing(1).unwrap();
    let s = build_superoperator(&single, DEFAULT_DENSE_CAP).unwrap();
    let mut ev: Vec<f64> = general_eigenvalues(&s).unwrap().iter().map(|z| z.re).collect();
    ev.sort_by(f64::total_cmp);
    assert_eq!(ev, vec![-1.0, -1.0, 0.0, 0.0]);

    let m = model(3, 1.0, 1.2);
    let s = build_superoperator(&m, DEFAULT_DENSE_CAP).unwrap();
    let x: Vec<(f64, f64)> = (0..64).map(|k| ((k as f64).sqrt().fract(), (k as f64 * 0.3).sin())).collect();
    let x = random_operator(3, &x);
    let direct = vectorize(&apply_liouvillian(&m, &x).unwrap());
    let via = s.mat_vec(&vectorize(&x));
    let resid: f64 = direct.iter().zip(&via).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(resid <= 1e-12);

    let trace = vectorize(&Operator::<f64>::identity(3));
    let d2 = s.rows();
    let left: f64 = (0..d2)
        .map(|col| (0..d2).map(|row| trace[row].conj() * s[(row, col)]).sum::<Complex64>().norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(left <= 1e-12);

    // the oracle's own Kronecker assembly agrees entry by entry
    let h = cmat(&xxz_hamiltonian(3, 1.0, 1.0, 1.2));
    let id = CMatrix::<f64>::identity(8);
    let mut oracle = id.kron(&h).scale(Complex64::new(0.0, -1.0));
    oracle += &h.transpose().kron(&id).scale(Complex64::new(0.0, 1.0));
    for site in 0..3 {
        let p = site_operator::<f64>(SiteOp::ProjectorUp, site, 3).unwrap().into_matrix();
        oracle += &p.conj().kron(&p).scale_real(2.0);
        oracle -= &id.kron(&p);
        oracle -= &p.transpose().kron(&id);
    }
    assert!((&s - &oracle).frobenius_norm() <= 1e-12);

    assert!(matches!(
        build_superoperator(&model(6, 1.0, 1.0), DEFAULT_DENSE_CAP),
        Err(Error::ResourceLimit { sites: 6, cap: 5 })
    ));
}

#[test]
fn sector_examples() {
    let index = SectorIndex::new(8);
    let largest = index.all_labels().into_iter().map(|l| index.block_dim(l)).max().unwrap();
    assert_eq!(largest, 4900);

    let blocks = sector_decompose(&model(2, 1.0, 1.0)).unwrap();
    let mut dims: Vec<usize> = blocks.iter().map(|b| b.matrix.rows()).collect();
    dims.sort_unstable();
    assert_eq!(dims, vec![1, 1, 1, 1, 2, 2, 2, 2, 4]);
    assert_eq!(blocks.total_dim(), 16);

    let m = model(3, 2.0, 0.8);
    let blocks = sector_decompose(&m).unwrap();
    let full = build_superoperator(&m, DEFAULT_DENSE_CAP).unwrap();
    assert!((&blocks.reassemble() - &full).frobenius_norm() <= 1e-12);
}

#[test]
fn cross_sector_hamiltonian_is_rejected() {
    let h = site_operator::<f64>(SiteOp::X, 0, 3).unwrap();
    let jumps = xxz_lindblad::build_jumps(3).unwrap();
    let m = LindbladModel::new(h, jumps).unwrap();
    assert!(matches!(sector_decompose(&m), Err(Error::InvalidModel(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermiticity_covariance(x in entries(), alpha in 0.0f64..3.0, delta in 0.0f64..2.0) {
        let m = model(3, alpha, delta);
        let x = random_operator(3, &x);
        let a = apply_liouvillian(&m, &x.adjoint()).unwrap();
        let b = apply_liouvillian(&m, &x).unwrap().adjoint();
        prop_assert!((&a - &b).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn trace_annihilation(x in entries(), alpha in 0.0f64..3.0, delta in 0.0f64..2.0) {
        let m = model(3, alpha, delta);
        let x = random_operator(3, &x);
        prop_assert!(apply_liouvillian(&m, &x).unwrap().trace().norm() <= 1e-12);
    }

    #[test]
    fn blocks_are_independent(x in entries(), mk in 0usize..=3, mb in 0usize..=3) {
        let m = model(3, 1.0, 1.3);
        let blocks = sector_decompose(&m).unwrap();
        let label = SectorLabel::new(mk, mb);
        let coords = blocks.restrict(&random_operator(3, &x), label);
        let x = blocks.embed(label, &coords);
        let y = apply_liouvillian(&m, &x).unwrap();
        let support = support_sectors(&y);
        prop_assert!(support.iter().all(|&l| l == label), "{:?}", support);
        // the block matrix acts like the matrix-free map on its coordinates
        let via = blocks.get(label).unwrap().matrix.mat_vec(&coords);
        let direct = blocks.restrict(&y, label);
        let r: f64 = via.iter().zip(&direct).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-12);
    }
}
