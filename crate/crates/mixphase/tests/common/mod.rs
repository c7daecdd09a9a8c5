#![allow(dead_code)]

use mixphase::linalg::{dag, fnorm};
use mixphase::{C64, CMat};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_cmat(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_shape_fn((n, n), |_| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn rand_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = rand_cmat(n, rng);
    (&a + &dag(&a)).mapv(|z| 0.5 * z)
}

pub fn rand_anti_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = rand_cmat(n, rng);
    (&a - &dag(&a)).mapv(|z| 0.5 * z)
}

pub fn rand_psd(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = rand_cmat(n, rng);
    dag(&a).dot(&a)
}

/// Random density matrix: PSD, unit trace, full rank almost surely.
pub fn rand_density(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let p = rand_psd(n, rng) + &mixphase::linalg::eye(n).mapv(|z| z * 0.05);
    let tr: C64 = p.diag().sum();
    p.mapv(|z| z / tr.re)
}

pub fn rand_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let k = rand_anti_hermitian(n, rng);
    mixphase::linalg::matrix_exp(&k).unwrap()
}

pub fn pauli_x() -> CMat {
    ndarray::array![
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
    ]
}

pub fn pauli_y() -> CMat {
    ndarray::array![
        [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]
    ]
}

pub fn pauli_z() -> CMat {
    ndarray::array![
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
    ]
}

pub fn assert_mat_close(a: &CMat, b: &CMat, tol: f64, what: &str) {
    let diff = fnorm(&(a - b));
    assert!(
        diff <= tol,
        "{what}: matrices differ by {diff:.3e} (tol {tol:.1e})"
    );
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} differ by {:.3e} (tol {tol:.1e})",
        (a - b).abs()
    );
}
