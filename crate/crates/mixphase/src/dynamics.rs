//! Time evolution and phase extraction: the commutator (von Neumann)
//! equation, the adiabatic generator, the transport-induced anti-commutator
//! flow, general and quasi-static dynamic phases, and a numerical witness
//! that the two kinds of dynamics cannot share one equation of motion.
//!
//! Conventions: ħ = 1; time-ordered products sample generators at segment
//! midpoints and multiply later factors on the left, matching the holonomy
//! module.

use crate::error::{Error, Result};
use crate::holonomy::{uhlmann_connection, VISIBILITY_TOL};
use crate::linalg::{
    anti_hermitian_residual, check_finite, check_square, dag, eig_hermitian, eigenvalues_general,
    fnorm, hermitian_residual, lu_solve, matrix_exp, principal_arg, C64, CMat, PhaseValue,
};
use crate::state::DensityMatrix;

/// Hermiticity tolerance for sampled Hamiltonians, relative to ‖H‖.
pub const PATH_HERM_TOL: f64 = 1e-9;

/// A Hermitian-matrix-valued function of time on [0, τ].
pub struct HamiltonianPath {
    tau: f64,
    sampler: Box<dyn Fn(f64) -> CMat + Send + Sync>,
}

impl HamiltonianPath {
    pub fn new(tau: f64, sampler: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
            });
        }
        Ok(Self {
            tau,
            sampler: Box::new(sampler),
        })
    }

    pub fn constant(h: CMat, tau: f64) -> Result<Self> {
        Self::new(tau, move |_| h.clone())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Sample H(t), rejecting points outside [0, τ] and non-Hermitian values.
    pub fn sample(&self, t: f64) -> Result<CMat> {
        if !t.is_finite() || t < -1e-12 * self.tau || t > self.tau * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter { name: "t", value: t });
        }
        let h = (self.sampler)(t);
        check_square(&h)?;
        check_finite(&h)?;
        let res = hermitian_residual(&h);
        if res > PATH_HERM_TOL * (1.0 + fnorm(&h)) {
            return Err(Error::NotHermitian { residual: res });
        }
        Ok(h)
    }
}

/// ρ ← e^{−iH(t_mid)Δt} ρ e^{+iH(t_mid)Δt} over `steps` uniform segments.
///
/// Each step conjugates by a spectrally constructed unitary, so the trace
/// and eigenvalue multiset are preserved up to rounding regardless of Δt.
pub fn von_neumann_evolve(
    rho0: &DensityMatrix,
    path: &HamiltonianPath,
    steps: usize,
) -> Result<DensityMatrix> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
        });
    }
    let dt = path.tau() / steps as f64;
    let mut rho = rho0.matrix().clone();
    for j in 0..steps {
        let h = path.sample((j as f64 + 0.5) * dt)?;
        if h.nrows() != rho.nrows() {
            return Err(Error::DimMismatch {
                left: rho.nrows(),
                right: h.nrows(),
            });
        }
        let eig = eig_hermitian(&h)?;
        let u = eig.apply(|e| C64::new(0.0, -e * dt).exp());
        rho = u.dot(&rho).dot(&dag(&u));
        rho = (&rho + &dag(&rho)).mapv(|z| 0.5 * z);
        // Conjugation preserves the trace identically; spread the one unit
        // of rounding it picks up back over the diagonal so the drift never
        // accumulates across steps.
        let tr: C64 = rho.diag().sum();
        let n = rho.nrows();
        for i in 0..n {
            rho[(i, i)] -= C64::new((tr.re - 1.0) / n as f64, tr.im / n as f64);
        }
    }
    DensityMatrix::new(rho)
}

/// K̂ = Σ_m Ṗ_m P_m from a complete set of instantaneous projectors and
/// their rates. The caller assembles the adiabatic Hamiltonian as H + iK̂.
pub fn adiabatic_generator(projectors: &[(CMat, CMat)]) -> Result<CMat> {
    let (first, _) = projectors.first().ok_or(Error::InvalidParameter {
        name: "projectors",
        value: 0.0,
    })?;
    check_square(first)?;
    let n = first.nrows();

    let mut sum = CMat::zeros((n, n));
    for (p, pdot) in projectors {
        check_square(p)?;
        check_finite(p)?;
        check_finite(pdot)?;
        if p.nrows() != n || pdot.nrows() != n || pdot.ncols() != n {
            return Err(Error::DimMismatch {
                left: n,
                right: p.nrows().max(pdot.nrows()),
            });
        }
        let idem = fnorm(&(p.dot(p) - p));
        if idem > 1e-10 * (1.0 + fnorm(p)) {
            return Err(Error::NotAResolution { residual: idem });
        }
        sum += p;
    }
    for i in 0..n {
        sum[(i, i)] -= C64::new(1.0, 0.0);
    }
    let res = fnorm(&sum);
    if res > 1e-10 * n as f64 {
        return Err(Error::NotAResolution { residual: res });
    }

    let mut k = CMat::zeros((n, n));
    for (p, pdot) in projectors {
        k += &pdot.dot(p);
    }
    let ah = anti_hermitian_residual(&k);
    if ah > 1e-9 * (1.0 + fnorm(&k)) {
        return Err(Error::NotAntiHermitian { residual: ah });
    }
    Ok(k)
}

/// Generator of the transport-induced anti-commutator flow at one sample:
/// the anti-Hermitian H̃ with ρ̇ = −i{H̃, ρ}, plus the connection sample it
/// was built from.
#[derive(Debug, Clone)]
pub struct FlowGenerator {
    h_tilde: CMat,
    a_u_sample: CMat,
}

impl FlowGenerator {
    pub fn new(h_tilde: CMat, a_u_sample: CMat) -> Result<Self> {
        for m in [&h_tilde, &a_u_sample] {
            check_square(m)?;
            check_finite(m)?;
            let res = anti_hermitian_residual(m);
            if res > 1e-9 * (1.0 + fnorm(m)) {
                return Err(Error::NotAntiHermitian { residual: res });
            }
        }
        Ok(Self { h_tilde, a_u_sample })
    }

    pub fn h_tilde(&self) -> &CMat {
        &self.h_tilde
    }

    pub fn a_u_sample(&self) -> &CMat {
        &self.a_u_sample
    }
}

/// H̃ = i[Ṡ S⁻¹ − S A_U S⁻¹] with S = √ρ and Ṡ solving Ṡ·S + S·Ṡ = ρ̇.
pub fn uhlmann_flow_generator(rho: &DensityMatrix, drho_dt: &CMat) -> Result<FlowGenerator> {
    let a_u = uhlmann_connection(rho, drho_dt)?;
    let n = rho.dim();
    let v = rho.eigenvectors();
    let lam = rho.eigenvalues();

    let dr = dag(v).dot(drho_dt).dot(v);
    let dr = (&dr + &dag(&dr)).mapv(|z| 0.5 * z);
    let mut sdot = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            sdot[(i, j)] = dr[(i, j)] / (lam[i].sqrt() + lam[j].sqrt());
        }
    }
    let sdot = v.dot(&sdot).dot(&dag(v));

    let s = rho.sqrt();
    let s_inv = rho.sqrt_inv()?;
    let h_tilde =
        (sdot.dot(&s_inv) - s.dot(&a_u).dot(&s_inv)).mapv(|z| z * C64::new(0.0, 1.0));
    FlowGenerator::new(h_tilde, a_u)
}

fn phase_of_trace(rho0: &DensityMatrix, m: &CMat) -> Result<PhaseValue> {
    let tr: C64 = rho0.matrix().dot(m).diag().sum();
    if tr.norm() < VISIBILITY_TOL {
        return Err(Error::ZeroMagnitude {
            magnitude: tr.norm(),
        });
    }
    principal_arg(tr)
}

/// Dynamic phase of an arbitrary closed density-matrix path:
/// arg Tr[ρ(0) · T exp(−∮(i√ρ⁻¹ H √ρ + √ρ⁻¹ d√ρ/dt) dt)].
///
/// `rho_path` holds N+1 full-rank samples on the uniform grid t_j = jτ/N;
/// the Hamiltonian is sampled at segment midpoints and √ρ is averaged over
/// segment endpoints.
pub fn dynamic_phase_general(
    rho_path: &[DensityMatrix],
    path: &HamiltonianPath,
) -> Result<PhaseValue> {
    if rho_path.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "rho_path_len",
            value: rho_path.len() as f64,
        });
    }
    let n_seg = rho_path.len() - 1;
    let dim = rho_path[0].dim();
    for r in rho_path {
        if r.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: r.dim(),
            });
        }
        if !r.is_full_rank() {
            let lam = r.eigenvalues();
            return Err(Error::RankDeficient {
                ratio: lam[0] / lam[dim - 1].max(f64::MIN_POSITIVE),
            });
        }
    }
    let closure = fnorm(&(rho_path[n_seg].matrix() - rho_path[0].matrix()));
    if closure > 1e-9 {
        return Err(Error::NotClosed { deviation: closure });
    }

    let dt = path.tau() / n_seg as f64;
    let sqrts: Vec<CMat> = rho_path.iter().map(|r| r.sqrt()).collect();
    let mut prod = CMat::eye(dim);
    for j in 0..n_seg {
        let h = path.sample((j as f64 + 0.5) * dt)?;
        if h.nrows() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: h.nrows(),
            });
        }
        let s_bar = (&sqrts[j] + &sqrts[j + 1]).mapv(|z| 0.5 * z);
        let ds = &sqrts[j + 1] - &sqrts[j];
        let rhs = h.dot(&s_bar).mapv(|z| z * C64::new(0.0, dt)) + ds;
        let g = lu_solve(&s_bar, &rhs)?;
        prod = matrix_exp(&g.mapv(|z| -z))?.dot(&prod);
    }
    phase_of_trace(&rho_path[0], &prod)
}

/// Dynamic phase in the quasi-static (instantaneous equilibrium) limit:
/// arg Tr[ρ(0) · exp(−i ∮H dt)] with the loop integral of H taken as a
/// matrix-valued midpoint quadrature. For constant H this is exactly
/// arg Σ_n ⟨n|ρ(0)|n⟩ e^{−iE_nτ}.
pub fn dynamic_phase_quasistatic(
    rho0: &DensityMatrix,
    path: &HamiltonianPath,
    steps: usize,
) -> Result<PhaseValue> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
        });
    }
    let dt = path.tau() / steps as f64;
    let mut q = CMat::zeros((rho0.dim(), rho0.dim()));
    for j in 0..steps {
        let h = path.sample((j as f64 + 0.5) * dt)?;
        if h.nrows() != rho0.dim() {
            return Err(Error::DimMismatch {
                left: rho0.dim(),
                right: h.nrows(),
            });
        }
        q += &h.mapv(|z| z * dt);
    }
    let q = (&q + &dag(&q)).mapv(|z| 0.5 * z);
    let eig = eig_hermitian(&q)?;
    let u = eig.apply(|e| C64::new(0.0, -e).exp());
    phase_of_trace(rho0, &u)
}

/// Diagnostics for the incompatibility of Hamiltonian and anti-commutator
/// dynamics in one equation of motion.
#[derive(Debug, Clone, Copy)]
pub struct WitnessReport {
    /// max |Re λ| over eigenvalues of √ρ⁻¹ H̃ √ρ; similarity preserves the
    /// purely imaginary spectrum of H̃, so this is a rounding-level residual.
    pub max_abs_re_eigenvalue: f64,
    /// ‖{H̃, ρ}‖_F; zero on full-rank ρ only when H̃ = 0.
    pub anticommutator_norm: f64,
    /// |d Tr ρ/dt| = |−2i·Tr(H̃ρ)| under the hybrid equation
    /// ρ̇ = −i([H, ρ] + {H̃, ρ}); nonzero drift means broken normalization.
    pub trace_drift: f64,
}

pub fn incompatibility_witness(rho: &DensityMatrix, h_tilde: &CMat) -> Result<WitnessReport> {
    check_square(h_tilde)?;
    check_finite(h_tilde)?;
    if h_tilde.nrows() != rho.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: h_tilde.nrows(),
        });
    }
    let res = anti_hermitian_residual(h_tilde);
    if res > 1e-9 * (1.0 + fnorm(h_tilde)) {
        return Err(Error::NotAntiHermitian { residual: res });
    }
    if !rho.is_full_rank() {
        let lam = rho.eigenvalues();
        return Err(Error::RankDeficient {
            ratio: lam[0] / lam[rho.dim() - 1].max(f64::MIN_POSITIVE),
        });
    }

    if fnorm(h_tilde) == 0.0 {
        return Ok(WitnessReport {
            max_abs_re_eigenvalue: 0.0,
            anticommutator_norm: 0.0,
            trace_drift: 0.0,
        });
    }

    let b = rho.sqrt_inv()?.dot(h_tilde).dot(&rho.sqrt());
    let eigs = eigenvalues_general(&b)?;
    let max_re = eigs.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));

    let anti = h_tilde.dot(rho.matrix()) + rho.matrix().dot(h_tilde);
    let tr: C64 = h_tilde.dot(rho.matrix()).diag().sum();
    Ok(WitnessReport {
        max_abs_re_eigenvalue: max_re,
        anticommutator_norm: fnorm(&anti),
        trace_drift: 2.0 * tr.norm(),
    })
}
