mod common;

use common::*;
use mixphase::dynamics::*;
use mixphase::holonomy::uhlmann_connection;
use mixphase::linalg::{anti_hermitian_residual, dag, eig_hermitian, eye, fnorm, PhaseValue};
use mixphase::state::{thermal_state, DensityMatrix, ThermalSpec};
use mixphase::{C64, CMat, Error};
use ndarray::{arr1, Array1};
use std::f64::consts::{PI, TAU};

fn diag2(a: f64, b: f64) -> CMat {
    CMat::from_diag(&arr1(&[C64::new(a, 0.0), C64::new(b, 0.0)]))
}

#[test]
fn hamiltonian_path_validates_inputs() {
    assert!(matches!(
        HamiltonianPath::new(0.0, |_| eye(2)),
        Err(Error::InvalidParameter { name: "tau", .. })
    ));
    let p = HamiltonianPath::new(1.0, |_| {
        let mut m = eye(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        m
    })
    .unwrap();
    assert!(matches!(p.sample(0.5), Err(Error::NotHermitian { .. })));

    let p = HamiltonianPath::constant(pauli_z(), 1.0).unwrap();
    assert!(p.sample(0.5).is_ok());
    assert!(matches!(
        p.sample(1.5),
        Err(Error::InvalidParameter { name: "t", .. })
    ));
    assert!(matches!(
        von_neumann_evolve(&DensityMatrix::maximally_mixed(2), &p, 0),
        Err(Error::InvalidParameter { name: "steps", .. })
    ));
}

#[test]
fn stationary_state_is_a_fixed_point() {
    let mut r = rng(301);
    let h = rand_hermitian(3, &mut r);
    let rho0 = thermal_state(&h, &ThermalSpec::new(0.9).unwrap()).unwrap();
    let path = HamiltonianPath::constant(h, 2.7).unwrap();
    let fin = von_neumann_evolve(&rho0, &path, 50).unwrap();
    assert_mat_close(fin.matrix(), rho0.matrix(), 1e-12, "stationary state moved");
}

#[test]
fn constant_hamiltonian_matches_single_shot_conjugation() {
    let mut r = rng(302);
    let h = rand_hermitian(3, &mut r);
    let rho0 = DensityMatrix::new(rand_density(3, &mut r)).unwrap();
    let tau = 1.7;
    let path = HamiltonianPath::constant(h.clone(), tau).unwrap();
    let fin = von_neumann_evolve(&rho0, &path, 97).unwrap();

    let u = eig_hermitian(&h).unwrap().apply(|e| C64::new(0.0, -e * tau).exp());
    let expect = u.dot(rho0.matrix()).dot(&dag(&u));
    assert_mat_close(fin.matrix(), &expect, 1e-9, "single-shot conjugation");
}

#[test]
fn maximally_mixed_state_is_unchanged_by_any_path() {
    let mut r = rng(303);
    let (ha, hb) = (rand_hermitian(4, &mut r), rand_hermitian(4, &mut r));
    let path = HamiltonianPath::new(2.0, move |t| {
        ha.mapv(|z| z * t.sin()) + hb.mapv(|z| z * (1.0 + t))
    })
    .unwrap();
    let rho0 = DensityMatrix::maximally_mixed(4);
    let fin = von_neumann_evolve(&rho0, &path, 50).unwrap();
    assert_mat_close(fin.matrix(), rho0.matrix(), 1e-12, "I/n drifted");
}

#[test]
fn trace_and_spectrum_survive_a_thousand_steps() {
    let mut r = rng(304);
    let rho0 = DensityMatrix::new(rand_density(4, &mut r)).unwrap();
    let (ha, hb, hc) = (
        rand_hermitian(4, &mut r),
        rand_hermitian(4, &mut r),
        rand_hermitian(4, &mut r),
    );
    let path = HamiltonianPath::new(3.0, move |t| {
        &ha + &hb.mapv(|z| z * t.sin()) + hc.mapv(|z| z * (2.0 * t).cos())
    })
    .unwrap();
    let fin = von_neumann_evolve(&rho0, &path, 1000).unwrap();

    let tr: C64 = fin.matrix().diag().sum();
    assert!(
        (tr.re - 1.0).abs() <= 1e-14 && tr.im.abs() <= 1e-14,
        "trace drift {:e}",
        (tr.re - 1.0).abs().max(tr.im.abs())
    );
    for (a, b) in fin.eigenvalues().iter().zip(rho0.eigenvalues()) {
        assert!((a - b).abs() <= 1e-10, "spectrum moved: {a} vs {b}");
    }
}

#[test]
fn adiabatic_generator_vanishes_for_static_projectors() {
    let mut r = rng(305);
    let eig = eig_hermitian(&rand_hermitian(3, &mut r)).unwrap();
    let pairs: Vec<(CMat, CMat)> = (0..3)
        .map(|m| {
            let v = eig.vectors.column(m);
            let mut p = CMat::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    p[(i, j)] = v[i] * v[j].conj();
                }
            }
            (p, CMat::zeros((3, 3)))
        })
        .collect();
    let k = adiabatic_generator(&pairs).unwrap();
    assert_eq!(fnorm(&k), 0.0);
}

#[test]
fn adiabatic_generator_rejects_bad_projector_sets() {
    let p = diag2(1.0, 0.0);
    let z = CMat::zeros((2, 2));
    // Incomplete: a single projector does not resolve the identity.
    assert!(matches!(
        adiabatic_generator(&[(p.clone(), z.clone())]),
        Err(Error::NotAResolution { .. })
    ));
    // Complete but not idempotent.
    let half = eye(2).mapv(|v| 0.5 * v);
    assert!(matches!(
        adiabatic_generator(&[(half.clone(), z.clone()), (half, z)]),
        Err(Error::NotAResolution { .. })
    ));
}

/// Rotated eigenprojector families P_m(t) = e^{tG} Π_m e^{−tG} have the
/// exact rates Ṗ_m = [G, P_m], so the generator's defining identity
/// [K̂, P_m] = Ṗ_m can be checked without finite differences.
#[test]
fn adiabatic_generator_is_anti_hermitian_and_reproduces_projector_rates() {
    let mut r = rng(306);
    for trial in 0..5 {
        let n = 4;
        let g = rand_anti_hermitian(n, &mut r);
        let eig = eig_hermitian(&rand_hermitian(n, &mut r)).unwrap();
        let u = mixphase::linalg::matrix_exp(&g.mapv(|z| z * 0.3)).unwrap();
        let pairs: Vec<(CMat, CMat)> = (0..n)
            .map(|m| {
                let v = eig.vectors.column(m);
                let mut p = CMat::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        p[(i, j)] = v[i] * v[j].conj();
                    }
                }
                let p = u.dot(&p).dot(&dag(&u));
                let pdot = g.dot(&p) - p.dot(&g);
                (p, pdot)
            })
            .collect();
        let k = adiabatic_generator(&pairs).unwrap();
        assert!(
            anti_hermitian_residual(&k) <= 1e-10 * (1.0 + fnorm(&k)),
            "trial {trial}: K not anti-Hermitian"
        );
        for (p, pdot) in &pairs {
            let comm = k.dot(p) - p.dot(&k);
            assert_mat_close(&comm, pdot, 1e-12 * (1.0 + fnorm(pdot)), "[K, P] = Ṗ");
        }
    }
}

/// Two-level rotating frame: ρ_n(t) = Σ p_m P_m(t) solves
/// ρ̇ = −i[H + iK̂, ρ] exactly, so midpoint-stepping that equation toward
/// ρ_n(τ) must converge at second order.
#[test]
fn adiabatic_hamiltonian_drives_the_instantaneous_mixture() {
    let alpha = 0.7f64;
    let nhat = move |t: f64| {
        [
            alpha.sin() * t.cos(),
            alpha.sin() * t.sin(),
            alpha.cos(),
        ]
    };
    let ndot = move |t: f64| [-alpha.sin() * t.sin(), alpha.sin() * t.cos(), 0.0];
    let sigma = |v: [f64; 3]| {
        pauli_x().mapv(|z| z * v[0]) + pauli_y().mapv(|z| z * v[1]) + pauli_z().mapv(|z| z * v[2])
    };
    let proj = move |t: f64, sign: f64| {
        let sn = sigma(nhat(t));
        (eye(2) + sn.mapv(|z| z * sign)).mapv(|z| 0.5 * z)
    };
    let rho_n = move |t: f64| {
        proj(t, 1.0).mapv(|z| z * 0.3) + proj(t, -1.0).mapv(|z| z * 0.7)
    };

    let tau = 2.0;
    let path = HamiltonianPath::new(tau, move |t| {
        let h = sigma(nhat(t)).mapv(|z| 0.5 * z);
        let pdot_p = sigma(ndot(t)).mapv(|z| 0.5 * z);
        let k = adiabatic_generator(&[
            (proj(t, 1.0), pdot_p.clone()),
            (proj(t, -1.0), pdot_p.mapv(|z| -z)),
        ])
        .unwrap();
        h + k.mapv(|z| z * C64::new(0.0, 1.0))
    })
    .unwrap();

    let rho0 = DensityMatrix::new(rho_n(0.0)).unwrap();
    let err = |steps: usize| {
        let fin = von_neumann_evolve(&rho0, &path, steps).unwrap();
        fnorm(&(fin.matrix() - &rho_n(tau)))
    };
    let coarse = err(64);
    let fine = err(128);
    assert!(coarse <= 5e-3, "coarse error {coarse:.3e}");
    let ratio = coarse / fine;
    assert!(
        (3.2..=4.8).contains(&ratio),
        "not second order: {coarse:.3e} -> {fine:.3e} (ratio {ratio:.2})"
    );
}

#[test]
fn flow_generator_vanishes_when_the_state_is_stationary() {
    let mut r = rng(307);
    let rho = DensityMatrix::new(rand_density(3, &mut r)).unwrap();
    let fg = uhlmann_flow_generator(&rho, &CMat::zeros((3, 3))).unwrap();
    assert_eq!(fnorm(fg.h_tilde()), 0.0);
    assert_eq!(fnorm(fg.a_u_sample()), 0.0);

    // β = 0: ρ ∝ I is stationary along any equilibrium path, so ρ̇ = 0 is
    // forced and the generator vanishes with it.
    let fg = uhlmann_flow_generator(&DensityMatrix::maximally_mixed(4), &CMat::zeros((4, 4)))
        .unwrap();
    assert_eq!(fnorm(fg.h_tilde()), 0.0);
}

/// Thermal two-band sample: reconstruction ρ̇ = −i{H̃, ρ} plus an
/// independent eigenbasis closed form. Expanding H̃ = i[Ṡ S⁻¹ − S A_U S⁻¹]
/// in the eigenbasis of ρ collapses to H̃_ij = i·ρ̇_ij/(λ_i + λ_j), which is
/// computed here without forming any of the factor matrices.
#[test]
fn flow_generator_reconstructs_thermal_band_dynamics() {
    let state_at = |t: f64| {
        let k = TAU * t;
        let h = pauli_y().mapv(|z| z * -k.sin()) + pauli_z().mapv(|z| z * (k.cos() - 0.6));
        thermal_state(&h, &ThermalSpec::new(1.2).unwrap()).unwrap()
    };
    let t0 = 0.37;
    let h = 1e-6;
    let rho = state_at(t0);
    let mut drho = (state_at(t0 + h).matrix() - state_at(t0 - h).matrix()).mapv(|z| z / (2.0 * h));
    drho = (&drho + &dag(&drho)).mapv(|z| 0.5 * z);
    let tr: C64 = drho.diag().sum();
    for i in 0..2 {
        drho[(i, i)] -= tr / 2.0;
    }

    let fg = uhlmann_flow_generator(&rho, &drho).unwrap();
    let ht = fg.h_tilde();
    assert!(anti_hermitian_residual(ht) <= 1e-12 * (1.0 + fnorm(ht)));
    assert_mat_close(
        fg.a_u_sample(),
        &uhlmann_connection(&rho, &drho).unwrap(),
        1e-15,
        "stored connection sample",
    );

    // ρ̇ = −i{H̃, ρ}
    let recon = (ht.dot(rho.matrix()) + rho.matrix().dot(ht)).mapv(|z| z * C64::new(0.0, -1.0));
    assert_mat_close(&recon, &drho, 1e-8 * (1.0 + fnorm(&drho)), "anti-commutator flow");

    // Eigenbasis closed form.
    let v = rho.eigenvectors();
    let lam = rho.eigenvalues();
    let dr = dag(v).dot(&drho).dot(v);
    let mut closed = CMat::zeros((2, 2));
    for i in 0..2 {
        for j in 0..2 {
            closed[(i, j)] = C64::new(0.0, 1.0) * dr[(i, j)] / (lam[i] + lam[j]);
        }
    }
    let closed = v.dot(&closed).dot(&dag(v));
    assert_mat_close(ht, &closed, 1e-10 * (1.0 + fnorm(ht)), "eigenbasis closed form");
}

#[test]
fn flow_generator_requires_full_rank() {
    let psi = arr1(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let rho = DensityMatrix::pure(&psi).unwrap();
    assert!(matches!(
        uhlmann_flow_generator(&rho, &CMat::zeros((2, 2))),
        Err(Error::RankDeficient { .. })
    ));
}

#[test]
fn general_phase_recovers_the_ground_state_energy() {
    let eps = 1e-8;
    let (e0, e1) = (0.35, 1.2);
    let tau = 1.0;
    let rho0 = DensityMatrix::new(diag2(1.0 - eps, eps)).unwrap();
    let rho_path: Vec<DensityMatrix> = (0..=16).map(|_| rho0.clone()).collect();
    let path = HamiltonianPath::constant(diag2(e0, e1), tau).unwrap();
    let theta = dynamic_phase_general(&rho_path, &path).unwrap();
    assert!(
        theta.circular_distance(PhaseValue::new(-e0 * tau)) <= 1e-3,
        "θ = {} vs {}",
        theta.angle(),
        -e0 * tau
    );
}

#[test]
fn general_phase_refuses_vanishing_visibility() {
    let rho0 = DensityMatrix::maximally_mixed(2);
    let rho_path: Vec<DensityMatrix> = (0..=8).map(|_| rho0.clone()).collect();
    let path = HamiltonianPath::constant(pauli_z(), PI / 2.0).unwrap();
    assert!(matches!(
        dynamic_phase_general(&rho_path, &path),
        Err(Error::ZeroMagnitude { .. })
    ));
}

/// On a commuting equilibrium family (fixed eigenbasis, time-dependent
/// weights) the √ρ⁻¹ d√ρ term telescopes around the closed loop and the
/// time-ordered product collapses, so the general and quasi-static phases
/// must agree.
#[test]
fn general_phase_matches_quasistatic_on_commuting_equilibrium_loop() {
    let mut r = rng(308);
    let h0 = rand_hermitian(3, &mut r);
    let tau = 1.3;
    let n = 4096;
    let f = move |t: f64| 1.0 + 0.3 * (TAU * t / tau).sin();
    let spec = ThermalSpec::new(0.7).unwrap();

    let rho_path: Vec<DensityMatrix> = (0..=n)
        .map(|j| {
            let t = tau * j as f64 / n as f64;
            thermal_state(&h0.mapv(|z| z * f(t)), &spec).unwrap()
        })
        .collect();
    let h0c = h0.clone();
    let path = HamiltonianPath::new(tau, move |t| h0c.mapv(|z| z * f(t))).unwrap();

    let general = dynamic_phase_general(&rho_path, &path).unwrap();
    let quasi = dynamic_phase_quasistatic(&rho_path[0], &path, n).unwrap();
    assert!(
        general.circular_distance(quasi) <= 1e-6,
        "general {} vs quasistatic {}",
        general.angle(),
        quasi.angle()
    );
}

#[test]
fn quasistatic_ground_projector_returns_minus_ground_energy() {
    for seed in [309u64, 310, 311] {
        let mut r = rng(seed);
        let h = rand_hermitian(4, &mut r);
        let eig = eig_hermitian(&h).unwrap();
        let ground: Array1<C64> = eig.vectors.column(0).to_owned();
        let rho0 = DensityMatrix::pure(&ground).unwrap();
        let tau = 2.3;
        let path = HamiltonianPath::constant(h.clone(), tau).unwrap();
        let theta = dynamic_phase_quasistatic(&rho0, &path, 64).unwrap();
        let expect = PhaseValue::new(-eig.values[0] * tau);
        assert!(
            theta.circular_distance(expect) <= 1e-9,
            "seed {seed}: θ = {} vs {}",
            theta.angle(),
            expect.angle()
        );
    }
}

#[test]
fn quasistatic_phase_is_coherent_not_a_weighted_energy_sum() {
    let rho0 = DensityMatrix::new(diag2(0.7, 0.3)).unwrap();
    let path = HamiltonianPath::constant(diag2(0.0, 1.0), 1.0).unwrap();
    let theta = dynamic_phase_quasistatic(&rho0, &path, 32).unwrap().angle();
    // arg(0.7 + 0.3 e^{−i}), frozen from direct scalar evaluation.
    assert_close(theta, -0.2848608570287618, 1e-12, "coherent trace phase");
    assert!(
        (theta - (-0.3)).abs() > 1e-2,
        "phase should not equal the weighted energy sum"
    );
}

#[test]
fn quasistatic_infinite_temperature_phase_is_quantized() {
    let rho0 = DensityMatrix::maximally_mixed(2);
    for (tau, expect) in [(1.0, 0.0), (2.0, PI)] {
        let path = HamiltonianPath::constant(pauli_z(), tau).unwrap();
        let theta = dynamic_phase_quasistatic(&rho0, &path, 16).unwrap();
        assert!(
            theta.circular_distance(PhaseValue::new(expect)) <= 1e-14,
            "τ = {tau}: θ = {}",
            theta.angle()
        );
    }
}

#[test]
fn witness_reports_all_zero_for_zero_generator() {
    let mut r = rng(312);
    let rho = DensityMatrix::new(rand_density(4, &mut r)).unwrap();
    let w = incompatibility_witness(&rho, &CMat::zeros((4, 4))).unwrap();
    assert_eq!(w.max_abs_re_eigenvalue, 0.0);
    assert_eq!(w.anticommutator_norm, 0.0);
    assert_eq!(w.trace_drift, 0.0);
}

#[test]
fn witness_maximally_mixed_anchor() {
    for n in [2usize, 4] {
        let rho = DensityMatrix::maximally_mixed(n);
        // Traceless imaginary diagonal with distinct entries (repeated
        // eigenvalues would degrade the root-finding accuracy probed below).
        let mut ht = CMat::zeros((n, n));
        for i in 0..n {
            let scale = 1.0 + (i / 2) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            ht[(i, i)] = C64::new(0.0, sign * scale);
        }
        let w = incompatibility_witness(&rho, &ht).unwrap();
        assert_close(
            w.anticommutator_norm,
            2.0 / n as f64 * fnorm(&ht),
            1e-14,
            "{{h̃, I/n}} norm",
        );
        assert!(w.max_abs_re_eigenvalue <= 1e-12);
        // Balanced ±i diagonal is traceless against I/n: no drift.
        assert!(w.trace_drift <= 1e-15);
    }
}

/// 100 seeded trials over n ∈ {2, 4, 8}: the anti-commutator witness never
/// misses a nonzero generator, the similarity-transformed spectrum stays
/// purely imaginary, and eigenbasis division inverts {·, ρ} exactly
/// (trivial kernel on full-rank ρ).
#[test]
fn witness_flags_every_nonzero_generator() {
    let mut r = rng(313);
    for trial in 0..100 {
        let n = [2usize, 4, 8][trial % 3];
        let rho = DensityMatrix::new(rand_density(n, &mut r)).unwrap();
        let ht = rand_anti_hermitian(n, &mut r);
        let w = incompatibility_witness(&rho, &ht).unwrap();

        assert!(
            w.anticommutator_norm > 1e-8,
            "trial {trial}: witness missed ‖{{h̃,ρ}}‖ = {:e}",
            w.anticommutator_norm
        );
        assert!(
            w.max_abs_re_eigenvalue <= 1e-9,
            "trial {trial}: real spectral leak {:e}",
            w.max_abs_re_eigenvalue
        );

        // Inverse oracle: divide the anti-commutator by (λ_i + λ_j) in the
        // eigenbasis and recover h̃; a nontrivial kernel would break this.
        let v = rho.eigenvectors();
        let lam = rho.eigenvalues();
        let anti = ht.dot(rho.matrix()) + rho.matrix().dot(&ht);
        let a_t = dag(v).dot(&anti).dot(v);
        let mut x = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] = a_t[(i, j)] / (lam[i] + lam[j]);
            }
        }
        let x = v.dot(&x).dot(&dag(v));
        assert_mat_close(&x, &ht, 1e-10 * (1.0 + fnorm(&ht)), "Sylvester inversion");

        // Hybrid-equation drift equals the trace the anti-commutator loses.
        let lost: C64 = anti.diag().sum();
        assert_close(w.trace_drift, lost.norm(), 1e-12, "trace drift");
        let tr_hr: C64 = ht.dot(rho.matrix()).diag().sum();
        if tr_hr.im.abs() > 1e-8 {
            assert!(w.trace_drift > 1e-8, "trial {trial}: drift missed");
        }
    }
}

#[test]
fn witness_validates_inputs() {
    let mut r = rng(314);
    let rho = DensityMatrix::new(rand_density(2, &mut r)).unwrap();
    assert!(matches!(
        incompatibility_witness(&rho, &pauli_x()),
        Err(Error::NotAntiHermitian { .. })
    ));
    let psi = arr1(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let pure = DensityMatrix::pure(&psi).unwrap();
    assert!(matches!(
        incompatibility_witness(&pure, &rand_anti_hermitian(2, &mut r)),
        Err(Error::RankDeficient { .. })
    ));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Constant diagonal Hamiltonians reduce the quasi-static phase to a
        /// scalar phasor sum, evaluated here without any matrix code.
        #[test]
        fn quasistatic_matches_scalar_phasor_sum(
            w in 0.05f64..0.95,
            e0 in -2.0f64..2.0,
            e1 in -2.0f64..2.0,
            tau in 0.1f64..3.0,
        ) {
            let z = C64::new(w, 0.0) * C64::new(0.0, -e0 * tau).exp()
                + C64::new(1.0 - w, 0.0) * C64::new(0.0, -e1 * tau).exp();
            prop_assume!(z.norm() > 1e-6);
            let rho0 = DensityMatrix::new(diag2(w, 1.0 - w)).unwrap();
            let path = HamiltonianPath::constant(diag2(e0, e1), tau).unwrap();
            let theta = dynamic_phase_quasistatic(&rho0, &path, 16).unwrap();
            prop_assert!(theta.circular_distance(PhaseValue::new(z.arg())) <= 1e-12);
        }

        #[test]
        fn evolution_preserves_the_spectrum(seed in any::<u64>(), steps in 1usize..32) {
            let mut r = rng(seed);
            let rho0 = DensityMatrix::new(rand_density(3, &mut r)).unwrap();
            let (ha, hb) = (rand_hermitian(3, &mut r), rand_hermitian(3, &mut r));
            let path = HamiltonianPath::new(1.1, move |t| {
                &ha + &hb.mapv(|z| z * t.sin())
            }).unwrap();
            let fin = von_neumann_evolve(&rho0, &path, steps).unwrap();
            for (a, b) in fin.eigenvalues().iter().zip(rho0.eigenvalues()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
