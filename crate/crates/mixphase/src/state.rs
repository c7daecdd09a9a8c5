//! Density matrices and the geometry between them.
//!
//! A [`DensityMatrix`] validates Hermiticity, unit trace, and positivity at
//! construction and caches its eigensystem; every downstream consumer (square
//! roots, thermal weights, transport) reads the cached decomposition, so a
//! state that constructs successfully never fails spectral sanity later.
//!
//! Fidelity F(ρ₁, ρ₂) = Tr √(√ρ₁ ρ₂ √ρ₁) and the amplitude-space distance
//! d² = 2 − 2F measure how far apart two mixed states are; on pure states d
//! reduces to the chordal Fubini–Study distance. `parallel_gauge` moves a
//! purification gauge from ρ₁ to ρ₂ so that the overlap W₂†W₁ is Hermitian
//! positive — the transport that makes d the minimal purification distance.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{
    dag, eig_hermitian, eye, fnorm, hermitian_residual, matrix_sqrt_psd, EigenSystem, C64, CMat,
    HERM_TOL, PSD_TOL, RANK_TOL,
};

/// Absolute tolerance on |Tr ρ − 1|.
pub const TRACE_TOL: f64 = 1e-12;
/// Relative Frobenius tolerance for unitarity of purification gauges.
pub const UNITARY_TOL: f64 = 1e-11;
/// Absolute tolerance on |‖ψ‖ − 1| for state vectors.
pub const NORM_TOL: f64 = 1e-12;

/// Validated density matrix with cached eigendecomposition.
///
/// Eigenvalues are ascending; negatives within rounding (−PSD_TOL·λ_max)
/// are clamped to zero. `is_full_rank` compares the smallest eigenvalue
/// against RANK_TOL·λ_max.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
    eig: EigenSystem,
    full_rank: bool,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c || r == 0 {
            return Err(Error::DimMismatch { left: r, right: c });
        }
        let res = hermitian_residual(&mat);
        if res > HERM_TOL {
            return Err(Error::NotHermitian { residual: res });
        }
        let tr: C64 = mat.diag().sum();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotNormalized { norm: tr.re });
        }
        let mut eig = eig_hermitian(&mat)?;
        let top = eig.values.last().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.values[0],
            });
        }
        let floor = -PSD_TOL * top;
        if eig.values[0] < floor {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.values[0],
            });
        }
        for v in eig.values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let full_rank = eig.values[0] >= RANK_TOL * top;
        Ok(DensityMatrix {
            mat,
            eig,
            full_rank,
        })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let mat = eye(n).mapv(|z| z / C64::new(n as f64, 0.0));
        DensityMatrix::new(mat).expect("I/n is a valid state")
    }

    /// |ψ⟩⟨ψ| for a normalized vector.
    pub fn pure(psi: &Array1<C64>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let n = psi.len();
        let mat = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        DensityMatrix::new(mat)
    }

    /// Full-rank stand-in for a pure state: (1−ε)|ψ⟩⟨ψ| + ε(1−|ψ⟩⟨ψ|)/(n−1).
    /// Bias against the exact projector is O(ε).
    pub fn regularized_pure(psi: &Array1<C64>, epsilon: f64) -> Result<Self> {
        let n = psi.len();
        if n < 2 {
            return Err(Error::DimMismatch { left: n, right: 2 });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
            });
        }
        let proj = DensityMatrix::pure(psi)?;
        let rest = (eye(n) - proj.matrix()).mapv(|z| z * (epsilon / (n as f64 - 1.0)));
        let mat = proj.matrix().mapv(|z| z * (1.0 - epsilon)) + rest;
        DensityMatrix::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Ascending, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// Columns match `eigenvalues`.
    pub fn eigenvectors(&self) -> &CMat {
        &self.eig.vectors
    }

    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn sqrt(&self) -> CMat {
        self.eig.apply(|x| C64::new(x.sqrt(), 0.0))
    }

    pub fn sqrt_inv(&self) -> Result<CMat> {
        if !self.full_rank {
            let top = self.eig.values.last().copied().unwrap_or(0.0);
            return Err(Error::RankDeficient {
                ratio: self.eig.values[0] / top.max(f64::MIN_POSITIVE),
            });
        }
        Ok(self.eig.apply(|x| C64::new(1.0 / x.sqrt(), 0.0)))
    }
}

/// Inverse temperature for equilibrium states (k_B = 1). Finite and
/// nonnegative; the β → ∞ and β = 0 limits are handled by closed forms, not
/// by pushing infinities through weight sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    beta: f64,
}

impl ThermalSpec {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
            });
        }
        if beta.is_infinite() {
            return Err(Error::BetaTooLarge);
        }
        Ok(ThermalSpec { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// e^{−βH}/Z. Weights are computed relative to the ground energy, so large
/// β saturates to the ground projector instead of overflowing.
pub fn thermal_state(h: &CMat, spec: &ThermalSpec) -> Result<DensityMatrix> {
    let eig = eig_hermitian(h)?;
    let e0 = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-spec.beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::BetaTooLarge);
    }
    let n = eig.dim();
    let mut scaled = eig.vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        let p = C64::new(w / z, 0.0);
        for i in 0..n {
            scaled[(i, j)] *= p;
        }
    }
    let mat = scaled.dot(&dag(&eig.vectors));
    // Symmetrize away the rounding skew before validation.
    let mat = (&mat + &dag(&mat)).mapv(|z| 0.5 * z);
    DensityMatrix::new(mat)
}

/// Purification amplitude W = √ρ·U. WW† recovers ρ exactly; the unitary U
/// is the gauge freedom the Uhlmann construction transports.
#[derive(Debug, Clone)]
pub struct Amplitude {
    w: CMat,
}

impl Amplitude {
    pub fn matrix(&self) -> &CMat {
        &self.w
    }

    pub fn density(&self) -> CMat {
        self.w.dot(&dag(&self.w))
    }
}

fn check_unitary(u: &CMat) -> Result<()> {
    let n = u.nrows();
    let res = fnorm(&(dag(u).dot(u) - eye(n))) / (n as f64).sqrt();
    if res > UNITARY_TOL {
        return Err(Error::NotUnitary { residual: res });
    }
    Ok(())
}

pub fn purify(rho: &DensityMatrix, gauge: &CMat) -> Result<Amplitude> {
    let n = rho.dim();
    if gauge.nrows() != n || gauge.ncols() != n {
        return Err(Error::DimMismatch {
            left: n,
            right: gauge.nrows(),
        });
    }
    check_unitary(gauge)?;
    Ok(Amplitude {
        w: rho.sqrt().dot(gauge),
    })
}

/// Hilbert–Schmidt inner product Tr(W₁† W₂).
pub fn hs_inner(w1: &Amplitude, w2: &Amplitude) -> Result<C64> {
    let (n1, n2) = (w1.w.nrows(), w2.w.nrows());
    if n1 != n2 {
        return Err(Error::DimMismatch {
            left: n1,
            right: n2,
        });
    }
    Ok(dag(&w1.w).dot(&w2.w).diag().sum())
}

fn check_same_dim(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<usize> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimMismatch {
            left: r1.dim(),
            right: r2.dim(),
        });
    }
    Ok(r1.dim())
}

/// Uhlmann fidelity F = Tr √(√ρ₁ ρ₂ √ρ₁), clamped into [0, 1] at rounding
/// level.
pub fn fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let s1 = r1.sqrt();
    let inner = s1.dot(r2.matrix()).dot(&s1);
    let inner = (&inner + &dag(&inner)).mapv(|z| 0.5 * z);
    let eig = eig_hermitian(&inner)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let floor = -PSD_TOL * top.max(f64::MIN_POSITIVE);
    let mut f = 0.0;
    for &v in &eig.values {
        if v < floor {
            return Err(Error::NotPsd { min_eigenvalue: v });
        }
        f += v.max(0.0).sqrt();
    }
    Ok(f.min(1.0))
}

/// Distance between nearest purifications: d = √(2 − 2F).
pub fn bures_hs_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    let f = fidelity(r1, r2)?;
    Ok((2.0 - 2.0 * f).max(0.0).sqrt())
}

/// Transport a purification gauge from ρ₁ to ρ₂ along the geodesic:
/// U₂ = √ρ₂⁻¹ √ρ₁⁻¹ √(√ρ₁ ρ₂ √ρ₁) U₁. The resulting overlap W₂†W₁ is
/// Hermitian positive with Re Tr = F(ρ₁, ρ₂). Both states must be full
/// rank; regularize pure states before transporting.
pub fn parallel_gauge(r1: &DensityMatrix, r2: &DensityMatrix, gauge1: &CMat) -> Result<CMat> {
    let n = check_same_dim(r1, r2)?;
    if gauge1.nrows() != n || gauge1.ncols() != n {
        return Err(Error::DimMismatch {
            left: n,
            right: gauge1.nrows(),
        });
    }
    check_unitary(gauge1)?;
    let s1 = r1.sqrt();
    let s1_inv = r1.sqrt_inv()?;
    let s2_inv = r2.sqrt_inv()?;
    let inner = s1.dot(r2.matrix()).dot(&s1);
    let inner = (&inner + &dag(&inner)).mapv(|z| 0.5 * z);
    let core = matrix_sqrt_psd(&inner)?;
    Ok(s2_inv.dot(&s1_inv).dot(&core).dot(gauge1))
}

/// Chordal Fubini–Study distance √(2 − 2|⟨ψ₁|ψ₂⟩|) between normalized
/// vectors; the pure-state limit of `bures_hs_distance`.
pub fn fubini_study_distance(psi1: &Array1<C64>, psi2: &Array1<C64>) -> Result<f64> {
    if psi1.len() != psi2.len() {
        return Err(Error::DimMismatch {
            left: psi1.len(),
            right: psi2.len(),
        });
    }
    for psi in [psi1, psi2] {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
    }
    let overlap: C64 = psi1.iter().zip(psi2.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((2.0 - 2.0 * overlap.norm().min(1.0)).max(0.0).sqrt())
}
