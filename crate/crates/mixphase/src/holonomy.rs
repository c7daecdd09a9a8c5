//! Geometric phases over closed parameter loops.
//!
//! Pure states carry the discrete Berry phase: the argument of the product
//! of consecutive overlaps around the loop, gauge invariant once the
//! endpoint is identified with the start. Mixed states carry the Uhlmann
//! construction instead: a connection one-form
//!
//!   A_U,ij = −(√λ_j − √λ_i)(dρ)_ij / ((√λ_i + √λ_j)(λ_i + λ_j))
//!
//! in the eigenbasis of ρ (exactly anti-Hermitian for Hermitian dρ), whose
//! path-ordered exponential transports the purification gauge. The phase is
//! arg Tr[ρ(0)·P exp(−∮A_U)].
//!
//! Discretization conventions, shared with `dynamics`: segment generators
//! are evaluated at the segment mean state with the forward difference as
//! dρ, and later factors multiply on the left. Holonomy defects of an
//! ε-plaquette fall off as ε² on a curved patch and as ε⁴ when the
//! connection is pure gauge; `reference_flat_connection_defect` provides a
//! known-flat family to calibrate the machinery against.

use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    anti_hermitian_residual, dag, eye, fnorm, hermitian_residual, matrix_exp, principal_arg,
    PhaseValue, C64, CMat, HERM_TOL,
};
use crate::state::DensityMatrix;

/// Trace magnitudes below this carry no usable phase information.
pub const VISIBILITY_TOL: f64 = 1e-12;
/// Minimum |⟨ψ_j|ψ_{j+1}⟩| for Berry-phase accumulation.
pub const OVERLAP_TOL: f64 = 1e-12;

/// Closed parameter loop as a time grid on [0, τ].
#[derive(Debug, Clone)]
pub struct ParamLoop {
    tau: f64,
    times: Vec<f64>,
    closed: bool,
}

impl ParamLoop {
    pub fn new(tau: f64, times: Vec<f64>, closed: bool) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
            });
        }
        if times.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "times.len",
                value: times.len() as f64,
            });
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "times[0]",
                value: times[0],
            });
        }
        let last = *times.last().unwrap();
        if (last - tau).abs() > 1e-12 * tau {
            return Err(Error::InvalidParameter {
                name: "times[last]",
                value: last,
            });
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter {
                    name: "times (not strictly increasing)",
                    value: w[1],
                });
            }
        }
        Ok(ParamLoop { tau, times, closed })
    }

    /// Uniform grid with n segments (n+1 sample times).
    pub fn uniform(tau: f64, n_segments: usize) -> Result<Self> {
        if n_segments < 2 {
            return Err(Error::InvalidParameter {
                name: "n_segments",
                value: n_segments as f64,
            });
        }
        let times = (0..=n_segments)
            .map(|j| tau * (j as f64) / (n_segments as f64))
            .collect();
        ParamLoop::new(tau, times, true)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_segments(&self) -> usize {
        self.times.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

/// One sampled value of the transport generator at time `t`.
#[derive(Debug, Clone)]
pub struct ConnectionSample {
    pub t: f64,
    pub a_u: CMat,
}

impl ConnectionSample {
    pub fn new(t: f64, a_u: CMat) -> Result<Self> {
        let res = anti_hermitian_residual(&a_u);
        if fnorm(&a_u) > 0.0 && res > 1e-9 {
            return Err(Error::NotAntiHermitian { residual: res });
        }
        Ok(ConnectionSample { t, a_u })
    }
}

/// Discrete Berry phase arg Π ⟨ψ_j|ψ_{j+1}⟩ with ψ_N identified with ψ_0.
///
/// Each overlap factor is normalized to a unit phasor before accumulating,
/// so the result depends only on the phases, not on how fine the loop is
/// sampled relative to its length.
pub fn berry_phase_discrete(states: &[Array1<C64>]) -> Result<PhaseValue> {
    if states.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "states.len",
            value: states.len() as f64,
        });
    }
    let dim = states[0].len();
    for psi in states {
        if psi.len() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: psi.len(),
            });
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
    }
    let last = states.len() - 1;
    let closure: C64 = states[last]
        .iter()
        .zip(states[0].iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    if closure.norm() < 1.0 - 1e-6 {
        return Err(Error::NotClosed {
            deviation: 1.0 - closure.norm(),
        });
    }
    let mut acc = C64::new(1.0, 0.0);
    for j in 0..last {
        let next = if j + 1 == last { &states[0] } else { &states[j + 1] };
        let overlap: C64 = states[j]
            .iter()
            .zip(next.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let mag = overlap.norm();
        if mag < OVERLAP_TOL {
            return Err(Error::VanishingOverlap {
                index: j,
                magnitude: mag,
            });
        }
        acc *= overlap / mag;
    }
    principal_arg(acc)
}

/// Transport generator A_U for a state and a Hermitian traceless
/// displacement dρ. Requires full rank (the λ_i + λ_j denominators).
pub fn uhlmann_connection(rho: &DensityMatrix, drho: &CMat) -> Result<CMat> {
    let n = rho.dim();
    if drho.nrows() != n || drho.ncols() != n {
        return Err(Error::DimMismatch {
            left: n,
            right: drho.nrows(),
        });
    }
    let res = hermitian_residual(drho);
    if res > HERM_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    let tr: C64 = drho.diag().sum();
    if tr.norm() > 1e-10 {
        return Err(Error::NotNormalized { norm: tr.re });
    }
    if !rho.is_full_rank() {
        let vals = rho.eigenvalues();
        return Err(Error::RankDeficient {
            ratio: vals[0] / vals[vals.len() - 1].max(f64::MIN_POSITIVE),
        });
    }
    let v = rho.eigenvectors();
    let lam = rho.eigenvalues();
    // Hermitize the rotated displacement so A_U is exactly anti-Hermitian.
    let dr = dag(v).dot(drho).dot(v);
    let dr = (&dr + &dag(&dr)).mapv(|z| 0.5 * z);
    let mut a = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (si, sj) = (lam[i].sqrt(), lam[j].sqrt());
            let denom = (si + sj) * (lam[i] + lam[j]);
            a[(i, j)] = dr[(i, j)] * C64::new(-(sj - si) / denom, 0.0);
        }
    }
    Ok(v.dot(&a).dot(&dag(v)))
}

/// Ordered product Π_j exp(−A_j), later factors on the left.
pub fn ordered_exp_product(generators: impl IntoIterator<Item = CMat>) -> Result<CMat> {
    let mut acc: Option<CMat> = None;
    for g in generators {
        let step = matrix_exp(&g.mapv(|z| -z))?;
        acc = Some(match acc {
            None => step,
            Some(prev) => step.dot(&prev),
        });
    }
    acc.ok_or(Error::InvalidParameter {
        name: "generators (empty)",
        value: 0.0,
    })
}

fn check_loop_states(lp: &ParamLoop, rhos: &[DensityMatrix]) -> Result<usize> {
    if rhos.len() != lp.times().len() {
        return Err(Error::DimMismatch {
            left: lp.times().len(),
            right: rhos.len(),
        });
    }
    let n = rhos[0].dim();
    for r in rhos {
        if r.dim() != n {
            return Err(Error::DimMismatch {
                left: n,
                right: r.dim(),
            });
        }
    }
    if !lp.is_closed() {
        return Err(Error::NotClosed {
            deviation: f64::INFINITY,
        });
    }
    let dev = fnorm(&(rhos[rhos.len() - 1].matrix() - rhos[0].matrix()));
    if dev > 1e-9 {
        return Err(Error::NotClosed { deviation: dev });
    }
    Ok(n)
}

/// Path-ordered transport P exp(−∮A_U) over a closed loop of full-rank
/// states. Segment generators use the mean state and forward difference.
pub fn uhlmann_holonomy(lp: &ParamLoop, rhos: &[DensityMatrix]) -> Result<CMat> {
    check_loop_states(lp, rhos)?;
    let times = lp.times();
    let mut gens = Vec::with_capacity(lp.n_segments());
    for j in 0..lp.n_segments() {
        let mean = (rhos[j].matrix() + rhos[j + 1].matrix()).mapv(|z| 0.5 * z);
        let mean = DensityMatrix::new(mean)?;
        let delta = rhos[j + 1].matrix() - rhos[j].matrix();
        let a = uhlmann_connection(&mean, &delta)?;
        let sample = ConnectionSample::new(0.5 * (times[j] + times[j + 1]), a)?;
        gens.push(sample.a_u);
    }
    ordered_exp_product(gens)
}

/// Mixed-state geometric phase arg Tr[ρ(0)·P exp(−∮A_U)].
pub fn uhlmann_phase(lp: &ParamLoop, rhos: &[DensityMatrix]) -> Result<PhaseValue> {
    let hol = uhlmann_holonomy(lp, rhos)?;
    let z: C64 = rhos[0].matrix().dot(&hol).diag().sum();
    if z.norm() < VISIBILITY_TOL {
        return Err(Error::ZeroMagnitude { magnitude: z.norm() });
    }
    principal_arg(z)
}

/// Holonomy defect ‖P exp(−∮A_U) − 1‖_F around the boundary of the square
/// [0,ε]² in a two-parameter family of states. The defect of a flat
/// connection falls off as ε⁴ under plaquette shrinking (at fixed
/// steps_per_edge); genuine curvature saturates at ε².
pub fn curvature_triviality_check(
    rho_at: impl Fn(f64, f64) -> Result<DensityMatrix>,
    eps: f64,
    steps_per_edge: usize,
) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
        });
    }
    if steps_per_edge == 0 {
        return Err(Error::InvalidParameter {
            name: "steps_per_edge",
            value: 0.0,
        });
    }
    let m = steps_per_edge;
    let h = eps / m as f64;
    let mut corners_walk: Vec<(f64, f64)> = Vec::with_capacity(4 * m + 1);
    for i in 0..m {
        corners_walk.push((i as f64 * h, 0.0));
    }
    for i in 0..m {
        corners_walk.push((eps, i as f64 * h));
    }
    for i in 0..m {
        corners_walk.push((eps - i as f64 * h, eps));
    }
    for i in 0..m {
        corners_walk.push((0.0, eps - i as f64 * h));
    }
    corners_walk.push((0.0, 0.0));

    let states: Vec<DensityMatrix> = corners_walk
        .iter()
        .map(|&(s, t)| rho_at(s, t))
        .collect::<Result<_>>()?;
    let mut gens = Vec::with_capacity(states.len() - 1);
    for j in 0..states.len() - 1 {
        let mean = (states[j].matrix() + states[j + 1].matrix()).mapv(|z| 0.5 * z);
        let mean = DensityMatrix::new(mean)?;
        let delta = states[j + 1].matrix() - states[j].matrix();
        gens.push(uhlmann_connection(&mean, &delta)?);
    }
    let hol = ordered_exp_product(gens)?;
    let n = hol.nrows();
    Ok(fnorm(&(&hol - &eye(n))))
}

/// Plaquette defect of a connection that is pure gauge by construction,
/// A = −(dU)U† for a seeded smooth unitary family U(s, t), discretized with
/// the same segment/product conventions as the Uhlmann transport. Flat to
/// machine precision in the continuum; the returned defect is pure
/// discretization error and shrinks as ε⁴. Used to calibrate slope checks.
pub fn reference_flat_connection_defect(
    eps: f64,
    steps_per_edge: usize,
    seed: u64,
) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
        });
    }
    if steps_per_edge == 0 {
        return Err(Error::InvalidParameter {
            name: "steps_per_edge",
            value: 0.0,
        });
    }
    let dim = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rand_anti = || {
        let raw = CMat::from_shape_fn((dim, dim), |_| {
            C64::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7))
        });
        (&raw - &dag(&raw)).mapv(|z| 0.5 * z)
    };
    let g1 = rand_anti();
    let g2 = rand_anti();
    let g3 = rand_anti();
    let u_at = |s: f64, t: f64| -> Result<CMat> {
        let gen = g1.mapv(|z| z * s) + g2.mapv(|z| z * t) + g3.mapv(|z| z * (s * t));
        matrix_exp(&gen)
    };

    let m = steps_per_edge;
    let h = eps / m as f64;
    let mut walk: Vec<(f64, f64)> = Vec::with_capacity(4 * m + 1);
    for i in 0..m {
        walk.push((i as f64 * h, 0.0));
    }
    for i in 0..m {
        walk.push((eps, i as f64 * h));
    }
    for i in 0..m {
        walk.push((eps - i as f64 * h, eps));
    }
    for i in 0..m {
        walk.push((0.0, eps - i as f64 * h));
    }
    walk.push((0.0, 0.0));

    let mut gens = Vec::with_capacity(walk.len() - 1);
    for j in 0..walk.len() - 1 {
        let (s1, t1) = walk[j];
        let (s2, t2) = walk[j + 1];
        let u1 = u_at(s1, t1)?;
        let u2 = u_at(s2, t2)?;
        let umid = u_at(0.5 * (s1 + s2), 0.5 * (t1 + t2))?;
        // A·Δ ≈ −(ΔU)U† at the segment midpoint. The non-anti-Hermitian
        // residue is O(h³) and part of the discretization being measured;
        // leave it in place.
        let a = (&u2 - &u1).dot(&dag(&umid)).mapv(|z| -z);
        gens.push(a);
    }
    let hol = ordered_exp_product(gens)?;
    Ok(fnorm(&(&hol - &eye(dim))))
}
