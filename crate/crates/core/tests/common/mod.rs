#![allow(dead_code)]

//! Brute-force oracles built from raw basis-index arithmetic, independent of
//! the library's tensor-product machinery.

use num_complex::Complex64;
use xxz_lindblad::linalg::CMatrix;
use xxz_lindblad::{LindbladModel, ModelParams, Operator};

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn zeros(d: usize) -> Mat {
    vec![vec![c(0.0); d]; d]
}

/// Spin on `site` of basis index `idx`: +1 for up (cleared bit, site 0 is
/// the most significant bit), −1 for down.
pub fn spin(idx: usize, site: usize, l: usize) -> f64 {
    if idx >> (l - 1 - site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn flip(idx: usize, site: usize, l: usize) -> usize {
    idx ^ (1 << (l - 1 - site))
}

/// `Σ_{i<j} J/|i−j|^α (S^x S^x + S^y S^y + Δ S^z S^z)` with `S = σ/2`.
pub fn xxz_hamiltonian(l: usize, j: f64, alpha: f64, delta: f64) -> Mat {
    chain_hamiltonian(l, delta, |a, b| if alpha == 0.0 { j } else { j / ((b - a) as f64).powf(alpha) })
}

/// XXZ pair sum with an arbitrary coupling `J_ab` for `a < b`.
pub fn chain_hamiltonian(l: usize, delta: f64, coupling: impl Fn(usize, usize) -> f64) -> Mat {
    let d = 1 << l;
    let mut h = zeros(d);
    for a in 0..l {
        for b in a + 1..l {
            let jab = coupling(a, b);
            if jab == 0.0 {
                continue;
            }
            for s in 0..d {
                let (za, zb) = (spin(s, a, l), spin(s, b, l));
                h[s][s] += c(jab * delta * za * zb / 4.0);
                if za != zb {
                    let t = flip(flip(s, a, l), b, l);
                    h[t][s] += c(jab / 2.0);
                }
            }
        }
    }
    h
}

/// `σ_i^+ σ_j^-` by index arithmetic.
pub fn hopping(i: usize, j: usize, l: usize) -> Mat {
    let d = 1 << l;
    let mut m = zeros(d);
    for s in 0..d {
        if spin(s, j, l) > 0.0 && spin(s, i, l) < 0.0 {
            m[flip(flip(s, i, l), j, l)][s] = c(1.0);
        }
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn frob(a: &Mat) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_op(l: usize, m: &Mat) -> Operator<f64> {
    Operator::from_fn(l, |i, j| m[i][j])
}

pub fn to_mat(op: &Operator<f64>) -> Mat {
    let d = op.dim();
    (0..d).map(|i| (0..d).map(|j| op.matrix()[(i, j)]).collect()).collect()
}

/// Max entrywise distance between an operator and an oracle matrix.
pub fn max_diff(op: &Operator<f64>, m: &Mat) -> f64 {
    let d = op.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((op.matrix()[(i, j)] - m[i][j]).norm());
        }
    }
    worst
}

/// Dephasing dissipator `Σ_l (2 P_l X P_l − {P_l, X})` with `P_l` the
/// up-projector, written entrywise: coherence `|a⟩⟨b|` decays at the number
/// of sites where `a` and `b` differ.
pub fn dissipator(l: usize, x: &Mat) -> Mat {
    let d = 1 << l;
    let mut out = zeros(d);
    for a in 0..d {
        for b in 0..d {
            let differing = (a ^ b).count_ones() as f64;
            out[a][b] = x[a][b] * c(-differing);
        }
    }
    out
}

/// `−i[H, X] + D(X)` from oracle matrices.
pub fn liouvillian(l: usize, h: &Mat, x: &Mat) -> Mat {
    let comm = sub(&matmul(h, x), &matmul(x, h));
    let diss = dissipator(l, x);
    comm.iter()
        .zip(&diss)
        .map(|(r, s)| r.iter().zip(s).map(|(p, q)| Complex64::new(0.0, -1.0) * p + q).collect())
        .collect()
}

pub fn model(l: usize, alpha: f64, delta: f64) -> LindbladModel<f64> {
    LindbladModel::xxz(ModelParams::xxz(l, alpha, delta).unwrap()).unwrap()
}

pub fn cmat(m: &Mat) -> CMatrix<f64> {
    CMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j])
}
