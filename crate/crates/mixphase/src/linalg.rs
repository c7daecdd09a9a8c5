//! Dense complex matrix kernel.
//!
//! Everything downstream (states, holonomies, models) reduces to Hermitian
//! eigenproblems, matrix functions, and phase extraction on small dense
//! matrices (n ≲ 256). The kernel is self-contained and deterministic:
//! cyclic Jacobi with a fixed sweep order, stable ascending eigenvalue sort,
//! eigenvector phases pinned by making the largest-magnitude component real
//! positive. Identical inputs give bit-identical outputs on every run.
//!
//! The witness diagnostics need eigenvalues of a *non-normal* matrix; those
//! go through a characteristic-polynomial route (Faddeev–LeVerrier plus a
//! simultaneous Durand–Kerner iteration) so they do not share code with the
//! Hermitian solver they are used to cross-check.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

/// Relative Frobenius tolerance for Hermiticity checks.
pub const HERM_TOL: f64 = 1e-10;
/// Relative tolerance on negative eigenvalues of nominally PSD matrices.
pub const PSD_TOL: f64 = 1e-10;
/// Rank cutoff: smallest/largest spectral magnitude below this is singular.
pub const RANK_TOL: f64 = 1e-12;
/// Complex arguments are undefined below this magnitude.
pub const ARG_TOL: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 64;
const DK_MAX_ITERS: usize = 1000;

pub fn eye(n: usize) -> CMat {
    Array2::eye(n)
}

pub fn dag(m: &CMat) -> CMat {
    m.t().mapv(|z| z.conj())
}

pub fn fnorm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) + b.dot(a)
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().sum()
}

/// ‖M − M†‖_F / max(‖M‖_F, ε): zero for exactly Hermitian input.
pub fn hermitian_residual(m: &CMat) -> f64 {
    let scale = fnorm(m).max(f64::MIN_POSITIVE);
    fnorm(&(m - &dag(m))) / scale
}

/// ‖M + M†‖_F / max(‖M‖_F, ε): zero for exactly anti-Hermitian input.
pub fn anti_hermitian_residual(m: &CMat) -> f64 {
    let scale = fnorm(m).max(f64::MIN_POSITIVE);
    fnorm(&(m + &dag(m))) / scale
}

pub(crate) fn check_finite(m: &CMat) -> Result<()> {
    for z in m.iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidParameter {
                name: "matrix entry",
                value: if z.re.is_finite() { z.im } else { z.re },
            });
        }
    }
    Ok(())
}

pub(crate) fn check_square(m: &CMat) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimMismatch { left: r, right: c });
    }
    Ok(r)
}

/// Eigendecomposition of a Hermitian matrix: `values` ascending,
/// eigenvectors as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// V f(Λ) V†.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled.dot(&dag(&self.vectors))
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|x| C64::new(x, 0.0))
    }
}

fn offdiag_norm(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Input must be Hermitian to `HERM_TOL` (relative Frobenius). Works on the
/// Hermitian average (M + M†)/2 so roundoff asymmetry cannot leak into the
/// rotations.
pub fn eig_hermitian(m: &CMat) -> Result<EigenSystem> {
    let n = check_square(m)?;
    check_finite(m)?;
    let res = hermitian_residual(m);
    if res > HERM_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    if n == 0 {
        return Ok(EigenSystem {
            values: vec![],
            vectors: m.clone(),
        });
    }

    let mut a: CMat = (m + &dag(m)).mapv(|z| 0.5 * z);
    let mut v = eye(n);
    let scale = fnorm(&a).max(f64::MIN_POSITIVE);
    let target = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if offdiag_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Unitary phase u makes the pivot real; then a standard real
                // rotation kills it. tau picks the smaller rotation angle.
                let u = apq / r;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ubar = u.conj();

                // A <- A·G, columns p and q. G_pp = c, G_pq = s,
                // G_qp = -ū s, G_qq = ū c.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - ubar * s * akq;
                    a[(k, q)] = s * akp + ubar * c * akq;
                }
                // A <- G†·A, rows p and q.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - u * s * aqk;
                    a[(q, k)] = s * apk + u * c * aqk;
                }
                // V <- V·G.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - ubar * s * vkq;
                    v[(k, q)] = s * vkp + ubar * c * vkq;
                }
                // Analytically exact zeros and real diagonal.
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && offdiag_norm(&a) > target {
        return Err(Error::NoConvergence {
            limit: JACOBI_MAX_SWEEPS,
            unit: "Jacobi sweeps",
        });
    }

    // Stable ascending sort; ties keep sweep order so output is reproducible.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMat::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values.push(a[(src, src)].re);
        // Phase fix: largest-magnitude component real positive.
        let mut imax = 0;
        let mut best = -1.0;
        for i in 0..n {
            let mag = v[(i, src)].norm();
            if mag > best {
                best = mag;
                imax = i;
            }
        }
        let pivot = v[(imax, src)];
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)] * phase;
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [−PSD_TOL·λ_max, 0) clamp to zero; anything lower is an error.
pub fn matrix_sqrt_psd(m: &CMat) -> Result<CMat> {
    let eig = eig_hermitian(m)?;
    let top = eig.values.iter().cloned().fold(0.0f64, f64::max);
    let floor = -PSD_TOL * top.max(f64::MIN_POSITIVE);
    if let Some(&min) = eig
        .values
        .iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if min < floor {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    Ok(eig.apply(|x| C64::new(x.max(0.0).sqrt(), 0.0)))
}

fn norm1(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut best = 0.0f64;
    for j in 0..n {
        let s: f64 = (0..n).map(|i| m[(i, j)].norm()).sum();
        best = best.max(s);
    }
    best
}

/// Solve A X = B by LU with partial pivoting (max pivot, first index wins).
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimMismatch {
            left: n,
            right: b.nrows(),
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = norm1(a).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let mut piv = col;
        let mut best = lu[(col, col)].norm();
        for r in (col + 1)..n {
            let mag = lu[(r, col)].norm();
            if mag > best {
                best = mag;
                piv = r;
            }
        }
        if best <= RANK_TOL * scale {
            return Err(Error::RankDeficient {
                ratio: best / scale,
            });
        }
        if piv != col {
            for k in 0..n {
                lu.swap((col, k), (piv, k));
            }
            for k in 0..x.ncols() {
                x.swap((col, k), (piv, k));
            }
        }
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            lu[(r, col)] = f;
            for k in (col + 1)..n {
                let sub = f * lu[(col, k)];
                lu[(r, k)] -= sub;
            }
            for k in 0..x.ncols() {
                let sub = f * x[(col, k)];
                x[(r, k)] -= sub;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for k in 0..x.ncols() {
            x[(col, k)] /= d;
        }
        for r in 0..col {
            let f = lu[(r, col)];
            for k in 0..x.ncols() {
                let sub = f * x[(col, k)];
                x[(r, k)] -= sub;
            }
        }
    }
    Ok(x)
}

// Padé-13 numerator coefficients (exact in f64).
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE13_THETA: f64 = 5.371920351148152;

fn exp_pade13(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    let nrm = norm1(m);
    let s = if nrm > PADE13_THETA {
        (nrm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let a = m.mapv(|z| z / C64::new((s as f64).exp2(), 0.0));
    let id = eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = &PADE13_B;
    let u_inner = &a6.mapv(|z| z * b[13]) + &a4.mapv(|z| z * b[11]) + &a2.mapv(|z| z * b[9]);
    let u_poly = a6.dot(&u_inner)
        + &a6.mapv(|z| z * b[7])
        + &a4.mapv(|z| z * b[5])
        + &a2.mapv(|z| z * b[3])
        + &id.mapv(|z| z * b[1]);
    let u = a.dot(&u_poly);
    let v_inner = &a6.mapv(|z| z * b[12]) + &a4.mapv(|z| z * b[10]) + &a2.mapv(|z| z * b[8]);
    let v = a6.dot(&v_inner)
        + &a6.mapv(|z| z * b[6])
        + &a4.mapv(|z| z * b[4])
        + &a2.mapv(|z| z * b[2])
        + &id.mapv(|z| z * b[0]);
    let mut x = lu_solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        x = x.dot(&x);
    }
    Ok(x)
}

/// Matrix exponential. Hermitian and anti-Hermitian inputs (detected at
/// 1e−13 relative) go through the spectral path, which keeps unitarity of
/// exp(anti-Hermitian) at rounding level; everything else uses Padé-13
/// scaling and squaring.
pub fn matrix_exp(m: &CMat) -> Result<CMat> {
    let n = check_square(m)?;
    check_finite(m)?;
    if fnorm(m) == 0.0 {
        return Ok(eye(n));
    }
    if hermitian_residual(m) <= 1e-13 {
        let eig = eig_hermitian(&(m + &dag(m)).mapv(|z| 0.5 * z))?;
        return Ok(eig.apply(|x| C64::new(x.exp(), 0.0)));
    }
    if anti_hermitian_residual(m) <= 1e-13 {
        // M = -iH with H = i·(M - M†)/2 Hermitian; exp(M) = V e^{-iΛ} V†.
        let h = (m - &dag(m)).mapv(|z| C64::new(0.0, 0.5) * z);
        let eig = eig_hermitian(&h)?;
        return Ok(eig.apply(|x| C64::new(0.0, -x).exp()));
    }
    exp_pade13(m)
}

/// Left polar decomposition A = P·U with P Hermitian positive definite and
/// U unitary. Returns (U, P). Errors with RankDeficient when the smallest
/// singular value falls below RANK_TOL times the largest.
pub fn polar_decompose(a: &CMat) -> Result<(CMat, CMat)> {
    let n = check_square(a)?;
    check_finite(a)?;
    let aad = a.dot(&dag(a));
    let eig = eig_hermitian(&aad)?;
    let smax = eig.values.iter().cloned().fold(0.0f64, f64::max).sqrt();
    if smax == 0.0 {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let smin = eig
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .fold(f64::INFINITY, f64::min);
    if smin < RANK_TOL * smax {
        return Err(Error::RankDeficient {
            ratio: smin / smax,
        });
    }
    let p = eig.apply(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let p_inv = eig.apply(|x| C64::new(1.0 / x.max(f64::MIN_POSITIVE).sqrt(), 0.0));
    let u = p_inv.dot(a);
    let _ = n;
    Ok((u, p))
}

/// An angle on the principal branch (−π, π]. Construction wraps; −0.0 is
/// normalized to +0.0 so equal phases compare equal bitwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseValue(f64);

impl PhaseValue {
    pub fn new(angle: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let mut r = angle.rem_euclid(tau);
        if r > std::f64::consts::PI {
            r -= tau;
        }
        if r == 0.0 {
            r = 0.0;
        }
        PhaseValue(r)
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    /// Distance on the circle, in [0, π].
    pub fn circular_distance(self, other: PhaseValue) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(std::f64::consts::TAU - d)
    }
}

/// arg z on (−π, π]. Errors below ARG_TOL where the phase is numerically
/// meaningless.
pub fn principal_arg(z: C64) -> Result<PhaseValue> {
    let mag = z.norm();
    if mag < ARG_TOL {
        return Err(Error::ZeroMagnitude { magnitude: mag });
    }
    let mut a = z.im.atan2(z.re);
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    Ok(PhaseValue::new(a))
}

/// Coefficients of det(λI − A), highest power first, via Faddeev–LeVerrier.
pub fn characteristic_polynomial(a: &CMat) -> Result<Vec<C64>> {
    let n = check_square(a)?;
    check_finite(a)?;
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[0] = C64::new(1.0, 0.0);
    if n == 0 {
        return Ok(coeffs);
    }
    let mut m = a.clone();
    coeffs[1] = -trace(&m);
    for k in 2..=n {
        let shifted = &m + &eye(n).mapv(|z| z * coeffs[k - 1]);
        m = a.dot(&shifted);
        coeffs[k] = -trace(&m) / C64::new(k as f64, 0.0);
    }
    Ok(coeffs)
}

fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs {
        acc = acc * z + c;
    }
    acc
}

/// All eigenvalues of a general square matrix via the characteristic
/// polynomial and a simultaneous Durand–Kerner iteration. Independent of
/// the Hermitian solver by design; intended for small n (≤ 16 or so).
/// Returned in a deterministic order (by real part, then imaginary part).
pub fn eigenvalues_general(a: &CMat) -> Result<Vec<C64>> {
    let n = check_square(a)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let coeffs = characteristic_polynomial(a)?;
    if n == 1 {
        return Ok(vec![-coeffs[1]]);
    }
    // Cauchy-style radius bounds all roots; the angular offset breaks any
    // symmetry ties with the true root constellation.
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let mut roots: Vec<C64> = (0..n)
        .map(|i| {
            let ang = std::f64::consts::TAU * (i as f64) / (n as f64) + 0.4;
            C64::new(radius * ang.cos(), radius * ang.sin())
        })
        .collect();
    let mut converged = false;
    for _ in 0..DK_MAX_ITERS {
        let mut next = roots.clone();
        let mut shift = 0.0f64;
        for i in 0..n {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= roots[i] - roots[j];
                }
            }
            if den.norm() == 0.0 {
                // Collided iterates: nudge deterministically and retry.
                next[i] += C64::new(1e-8 * radius, 1e-8 * radius);
                shift = f64::INFINITY;
                continue;
            }
            let delta = poly_eval(&coeffs, roots[i]) / den;
            next[i] = roots[i] - delta;
            shift = shift.max(delta.norm());
        }
        roots = next;
        let scale = 1.0 + roots.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if shift <= 1e-13 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            limit: DK_MAX_ITERS,
            unit: "Durand-Kerner iterations",
        });
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(roots)
}
