#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use risdet::hermitian::{CMat, CVec};
use risdet::rng::trial_rng;
use risdet::signal_model::{standard_complex_normal, DataSet, SteeringSet};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| standard_complex_normal(rng))
}

/// White data with `K_S = 2N` and random steering directions.
pub fn random_case(n: usize, k_p: usize, seed: u64) -> (DataSet, SteeringSet) {
    let mut rng = trial_rng(seed, 0xD5, 0);
    let data = DataSet::new(
        random_matrix(n, k_p, &mut rng),
        random_matrix(n, 2 * n, &mut rng),
    )
    .unwrap();
    let tr: f64 = rng.random_range(-20.0..20.0);
    let ts: f64 = rng.random_range(-20.0..20.0);
    (data, SteeringSet::spatial(tr, ts, n).unwrap())
}

/// Explicit inverse through nalgebra's LU, independent of the crate's Cholesky.
pub fn inverse(m: &CMat) -> CMat {
    m.clone().try_inverse().expect("invertible")
}

pub fn quad(v: &CVec, inv: &CMat, z: &CVec) -> Complex64 {
    (v.adjoint() * inv * z)[(0, 0)]
}

pub fn det_re(m: &CMat) -> f64 {
    m.clone().determinant().re
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn cv(xs: &[Complex64]) -> CVec {
    CVec::from_column_slice(xs)
}

/// `det(S + Σ_i (z_i − α_i v_i)(z_i − α_i v_i)†)`.
pub fn oracle_residual_det(
    s: &CMat,
    cells: [&CVec; 3],
    v: [&CVec; 3],
    alpha: [Complex64; 3],
) -> f64 {
    let mut m = s.clone();
    for i in 0..3 {
        let r = cells[i] - v[i] * alpha[i];
        m += &r * r.adjoint();
    }
    det_re(&m)
}

/// `v†W⁻¹z / v†W⁻¹v` per slot, given `W⁻¹` explicitly.
pub fn oracle_alphas(inv: &CMat, cells: [&CVec; 3], v: [&CVec; 3]) -> [Complex64; 3] {
    std::array::from_fn(|i| quad(v[i], inv, cells[i]) / quad(v[i], inv, v[i]).re)
}
