//! Concrete models: two-band lattice Hamiltonians over the Brillouin zone,
//! the thermal harmonic oscillator, and the continuum (dense-spectrum) limit.
//!
//! Each model carries a piecewise closed form for the dynamic phase of a
//! thermal state driven once around its parameter cycle, plus an independent
//! numeric evaluation (quadrature or truncated trace sum) used to cross-check
//! it. Closed forms return exact literals at resonances and in the β = 0 and
//! β = ∞ limits. Units: ħ = k_B = 1; inputs are dimensionless groups.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use ndarray::array;

use crate::dynamics::{dynamic_phase_quasistatic, HamiltonianPath};
use crate::error::{Error, Result};
use crate::holonomy::ParamLoop;
use crate::linalg::{principal_arg, C64, CMat, PhaseValue};
use crate::state::{thermal_state, ThermalSpec};

/// Absolute threshold on the band gap below which the Bloch vector is
/// treated as undefined.
pub const GAP_TOL: f64 = 1e-10;

fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

/// Two-band Bloch Hamiltonian H(k) = d(k)·σ on the circle k ∈ [0, 2π).
///
/// Construct through [`TwoBandSpec::kitaev`] or [`TwoBandSpec::ssh`] so the
/// couplings are validated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoBandSpec {
    /// p-wave superconducting wire: d = M(0, −sin k, c·cos k − m).
    Kitaev { m: f64, c: f64, big_m: f64 },
    /// Dimerized hopping chain: d = (−j1 − j2·cos k, j2·sin k, 0).
    Ssh { j1: f64, j2: f64 },
}

impl TwoBandSpec {
    pub fn kitaev(m: f64, c: f64, big_m: f64) -> Result<Self> {
        require_finite("m", m)?;
        require_finite("c", c)?;
        if !(big_m > 0.0 && big_m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "big_m",
                value: big_m,
            });
        }
        Ok(TwoBandSpec::Kitaev { m, c, big_m })
    }

    pub fn ssh(j1: f64, j2: f64) -> Result<Self> {
        if !(j1 > 0.0 && j1.is_finite()) {
            return Err(Error::InvalidParameter { name: "j1", value: j1 });
        }
        if !(j2 >= 0.0 && j2.is_finite()) {
            return Err(Error::InvalidParameter { name: "j2", value: j2 });
        }
        Ok(TwoBandSpec::Ssh { j1, j2 })
    }

    fn d_vector(&self, k: f64) -> [f64; 3] {
        match *self {
            TwoBandSpec::Kitaev { m, c, big_m } => {
                [0.0, -big_m * k.sin(), big_m * (c * k.cos() - m)]
            }
            TwoBandSpec::Ssh { j1, j2 } => [-j1 - j2 * k.cos(), j2 * k.sin(), 0.0],
        }
    }

    /// Band gap Δ_k = 2|d(k)|.
    pub fn gap(&self, k: f64) -> f64 {
        let d = self.d_vector(k);
        2.0 * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    /// Minimum of the gap over the whole Brillouin zone, from the closed
    /// form in u = cos k (endpoints plus the interior stationary point).
    pub fn min_gap(&self) -> f64 {
        match *self {
            TwoBandSpec::Kitaev { m, c, big_m } => {
                let f = |u: f64| (c * u - m).powi(2) + 1.0 - u * u;
                let mut best = f(1.0).min(f(-1.0));
                if (c * c - 1.0).abs() > 0.0 {
                    let u_star = c * m / (c * c - 1.0);
                    if u_star.abs() < 1.0 {
                        best = best.min(f(u_star));
                    }
                }
                2.0 * big_m * best.max(0.0).sqrt()
            }
            TwoBandSpec::Ssh { j1, j2 } => 2.0 * (j1 - j2).abs(),
        }
    }

    /// Unit Bloch vector n̂_k = d(k)/|d(k)|. The gap must be open at k.
    pub fn bloch_vector(&self, k: f64) -> Result<[f64; 3]> {
        let gap = self.gap(k);
        if gap < GAP_TOL {
            return Err(Error::GapClosure { k, gap });
        }
        let d = self.d_vector(k);
        Ok([2.0 * d[0] / gap, 2.0 * d[1] / gap, 2.0 * d[2] / gap])
    }

    fn h_matrix(&self, k: f64) -> CMat {
        let [dx, dy, dz] = self.d_vector(k);
        array![
            [C64::new(dz, 0.0), C64::new(dx, -dy)],
            [C64::new(dx, dy), C64::new(-dz, 0.0)]
        ]
    }

    /// H(k) = (Δ_k/2) n̂_k·σ. Errors where the gap closes and the band
    /// labeling breaks down.
    pub fn hamiltonian(&self, k: f64) -> Result<CMat> {
        let gap = self.gap(k);
        if gap < GAP_TOL {
            return Err(Error::GapClosure { k, gap });
        }
        Ok(self.h_matrix(k))
    }
}

/// Closed loop in time parametrizing one pass of the Brillouin zone,
/// k(t) = 2πt/τ on a uniform grid. Sample j sits at k = 2πj/n_samples.
pub fn brillouin_loop(tau: f64, n_samples: usize) -> Result<ParamLoop> {
    ParamLoop::uniform(tau, n_samples)
}

/// Which piece of the closed-form phase a (τ, β) point landed on. The
/// resonant tags mark the isolated points where the reduced phase angle
/// sits exactly at ±π/2 and the value is temperature independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Center,
    ResonantUpper,
    ResonantLower,
    Upper,
    Lower,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Center => "center",
            Branch::ResonantUpper => "resonant+",
            Branch::ResonantLower => "resonant-",
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Reduce x to y = x − 2π·round(x/2π) ∈ [−π, π). The subtraction is exact
/// (Sterbenz) for the magnitudes swept here, so half-period resonances at
/// representable inputs survive reduction bit for bit.
fn reduce_half_period(x: f64) -> f64 {
    let y = x - TAU * (x / TAU).round();
    if y == PI {
        -PI
    } else {
        y
    }
}

/// Four-branch arctangent form shared by the lattice and oscillator closed
/// forms: ±atan(tan y · w) continued across |y| = π/2 so the result is
/// continuous in y for every fixed weight w > 0. `mirror` flips the overall
/// sign convention (the dimerized chain winds the opposite way).
fn piecewise_theta(y: f64, weight: f64, mirror: bool) -> (PhaseValue, Branch) {
    let s = if mirror { 1.0 } else { -1.0 };
    if y == FRAC_PI_2 {
        return (PhaseValue::new(s * FRAC_PI_2), Branch::ResonantUpper);
    }
    if y == -FRAC_PI_2 {
        return (PhaseValue::new(-s * FRAC_PI_2), Branch::ResonantLower);
    }
    let base = s * (y.tan() * weight).atan();
    if y.abs() < FRAC_PI_2 {
        (PhaseValue::new(base), Branch::Center)
    } else if y > 0.0 {
        (PhaseValue::new(base + s * PI), Branch::Upper)
    } else {
        (PhaseValue::new(base - s * PI), Branch::Lower)
    }
}

fn require_beta(name: &'static str, beta: f64) -> Result<f64> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidParameter { name, value: beta });
    }
    Ok(beta)
}

/// Dynamic phase of the thermal wire state driven once around the Brillouin
/// zone: θ = arg[cos x − i sin x · tanh(βM(c − m))] with x = mMτ, continued
/// branch by branch. β = 0 lands exactly on {0, π} away from resonance;
/// β = ∞ saturates to θ = −x (mod 2π) for c > m and +x for c < m.
pub fn kitaev_theta_d(
    m: f64,
    c: f64,
    mm_tau: f64,
    beta_m: f64,
) -> Result<(PhaseValue, Branch)> {
    require_finite("m", m)?;
    require_finite("c", c)?;
    require_finite("mm_tau", mm_tau)?;
    require_beta("beta_m", beta_m)?;
    let weight = if beta_m.is_infinite() {
        if c > m {
            1.0
        } else if c < m {
            -1.0
        } else {
            0.0
        }
    } else {
        (beta_m * (c - m)).tanh()
    };
    Ok(piecewise_theta(reduce_half_period(mm_tau), weight, false))
}

/// Dynamic phase of the thermal dimerized chain: θ = arg[cos x + i sin x ·
/// tanh(βJ₁(1 + J₂/J₁))] with x = J₁τ. Mirrors the wire form with the
/// opposite winding; the hopping sum J₁ + J₂ is positive, so β = ∞ always
/// saturates to θ = +x (mod 2π).
pub fn ssh_theta_d(
    j1_tau: f64,
    beta_j1: f64,
    j2_over_j1: f64,
) -> Result<(PhaseValue, Branch)> {
    require_finite("j1_tau", j1_tau)?;
    require_beta("beta_j1", beta_j1)?;
    if !(j2_over_j1 >= 0.0 && j2_over_j1.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "j2_over_j1",
            value: j2_over_j1,
        });
    }
    let weight = if beta_j1.is_infinite() {
        1.0
    } else {
        (beta_j1 * (1.0 + j2_over_j1)).tanh()
    };
    Ok(piecewise_theta(reduce_half_period(j1_tau), weight, true))
}

/// Thermal harmonic oscillator driven for a time τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    omega_tau: f64,
    beta_hw: f64,
    n_max: usize,
}

impl OscillatorSpec {
    /// `omega_tau` = ωτ, `beta_hw` = βħω (0 and +∞ both allowed), `n_max`
    /// the Fock-space cutoff for the numeric trace sum.
    pub fn new(omega_tau: f64, beta_hw: f64, n_max: usize) -> Result<Self> {
        require_finite("omega_tau", omega_tau)?;
        require_beta("beta_hw", beta_hw)?;
        if n_max < 1 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: n_max as f64,
            });
        }
        Ok(OscillatorSpec {
            omega_tau,
            beta_hw,
            n_max,
        })
    }

    pub fn omega_tau(&self) -> f64 {
        self.omega_tau
    }

    pub fn beta_hw(&self) -> f64 {
        self.beta_hw
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn with_n_max(self, n_max: usize) -> Result<Self> {
        OscillatorSpec::new(self.omega_tau, self.beta_hw, n_max)
    }
}

/// Closed-form oscillator phase θ = −arg sinh((βħω + iωτ)/2), reduced on the
/// half angle u = ωτ/2 with weight coth(βħω/2). The β = 0 limit is quantized
/// to {0, ±π/2, π}: exactly 0 at full periods, π at half periods, ∓π/2
/// elsewhere by the sign of sin u.
pub fn oscillator_theta_d(spec: &OscillatorSpec) -> Result<(PhaseValue, Branch)> {
    let y = reduce_half_period(spec.omega_tau / 2.0);
    if spec.beta_hw == 0.0 {
        if y == 0.0 {
            return Ok((PhaseValue::new(0.0), Branch::Center));
        }
        if y == -PI {
            return Ok((PhaseValue::new(PI), Branch::Lower));
        }
        return Ok(piecewise_theta(y, f64::INFINITY, false));
    }
    // coth(∞) = 1 exactly in floating point, so β = ∞ needs no special case.
    let weight = 1.0 / (spec.beta_hw / 2.0).tanh();
    Ok(piecewise_theta(y, weight, false))
}

/// Oscillator phase from the truncated Fock trace Σ_{n≤n_max} e^{−(βħω+iωτ)(n+½)}.
/// The dropped tail is bounded by the geometric remainder; the bound must
/// stay below 1e−8 of the partial sum or the truncation is rejected.
pub fn oscillator_theta_d_numeric(spec: &OscillatorSpec) -> Result<PhaseValue> {
    if spec.beta_hw == 0.0 {
        return Err(Error::BetaZero);
    }
    if spec.beta_hw.is_infinite() {
        return Err(Error::BetaTooLarge);
    }
    let w = C64::new(spec.beta_hw, spec.omega_tau);
    let mut sum = C64::new(0.0, 0.0);
    for n in 0..=spec.n_max {
        sum += (-w * (n as f64 + 0.5)).exp();
    }
    let tail = (-spec.beta_hw * (spec.n_max as f64 + 1.5)).exp()
        / (1.0 - (-spec.beta_hw).exp());
    let relative_tail = tail / sum.norm();
    if !relative_tail.is_finite() || relative_tail > 1e-8 {
        return Err(Error::TruncationInsufficient {
            tail: relative_tail,
            requirement: 1e-8,
        });
    }
    principal_arg(sum)
}

/// Fock cutoff that pushes the relative truncation tail below ~1e−12 for the
/// given βħω, floored at 200 levels and capped so pathological β stay finite
/// (the trace sum then reports the insufficiency itself).
pub fn oscillator_auto_n_max(beta_hw: f64) -> usize {
    if !(beta_hw > 0.0) || beta_hw.is_infinite() {
        return 200;
    }
    let needed = (30.0 / beta_hw).min(4.0e6).ceil() as usize + 200;
    needed.min(4_000_000)
}

/// Dense-spectrum (continuum) limit of the dynamic phase: θ = −arctan(τ/βħ).
/// Single valued all the way into β → 0, where it pins to −π/2.
pub fn continuum_theta_d(tau_over_beta_h: f64) -> Result<PhaseValue> {
    if tau_over_beta_h.is_nan() || tau_over_beta_h < 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau_over_beta_h",
            value: tau_over_beta_h,
        });
    }
    Ok(PhaseValue::new(-tau_over_beta_h.atan()))
}

/// Quasi-static dynamic phase of a two-band thermal state transported once
/// around the Brillouin zone: ρ(0) thermal for H(k=0), k(t) = 2πt/τ, with
/// the midpoint quadrature of H over n_samples uniform segments. The gap is
/// checked at every sample and midpoint before any quadrature runs.
pub fn two_band_theta_d_numeric(
    spec: &TwoBandSpec,
    tau: f64,
    beta: f64,
    n_samples: usize,
) -> Result<PhaseValue> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
        });
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n_samples as f64,
        });
    }
    for j in 0..n_samples {
        for k in [
            TAU * (j as f64) / (n_samples as f64),
            TAU * (j as f64 + 0.5) / (n_samples as f64),
        ] {
            let gap = spec.gap(k);
            if gap < GAP_TOL {
                return Err(Error::GapClosure { k, gap });
            }
        }
    }
    let rho0 = thermal_state(&spec.h_matrix(0.0), &ThermalSpec::new(beta)?)?;
    let spec_copy = *spec;
    let path = HamiltonianPath::new(tau, move |t| spec_copy.h_matrix(TAU * t / tau))?;
    dynamic_phase_quasistatic(&rho0, &path, n_samples)
}

/// One grid point of a temperature or duration sweep: the dimensionless
/// groups, the closed-form phase with its branch, and the cross-check value
/// when a numeric route ran.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub tau_group: f64,
    pub beta_group: f64,
    pub theta_closed: PhaseValue,
    pub theta_numeric: Option<PhaseValue>,
    pub branch: Branch,
}
