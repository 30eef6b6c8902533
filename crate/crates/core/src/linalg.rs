//! Self-contained 4×4 complex matrix kernel for two-qubit states.
//!
//! Eigenvalues come from cyclic complex Jacobi rotations. At this size the
//! method converges in a handful of sweeps and, because a rotation in the
//! `(p, q)` plane never touches an entry whose row and column both lie
//! outside `{p, q}` unless it is coupled to them, exact zeros of an X-shaped
//! matrix stay exact zeros.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 50;
/// Convergence target: off-diagonal Frobenius norm relative to the matrix norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
/// Eigenvalues below `CLAMP_REL * trace` are treated as zero before square roots.
pub const CLAMP_REL: f64 = 1e-12;
/// Allowed deviation of the trace from one in [`wootters_lambdas`].
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |m - m†| = {residual:e} exceeds {tol:e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("density matrix trace {trace} differs from 1 by more than {tol:e}")]
    NotNormalized { trace: f64, tol: f64 },
    #[error("Jacobi iteration stalled after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn add(self, rhs: Self) -> Self {
        ComplexMatrix4::from_fn(|i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn sub(self, rhs: Self) -> Self {
        ComplexMatrix4::from_fn(|i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Mul for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, rhs: Self) -> Self {
        ComplexMatrix4::from_fn(|i, j| (0..4).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }
}

impl Mul<f64> for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, rhs: f64) -> Self {
        ComplexMatrix4::from_fn(|i, j| self[(i, j)] * rhs)
    }
}

impl ComplexMatrix4 {
    pub fn zeros() -> Self {
        ComplexMatrix4([[Complex64::new(0.0, 0.0); 4]; 4])
    }

    pub fn identity() -> Self {
        ComplexMatrix4::from_fn(|i, j| if i == j { c(1.0) } else { c(0.0) })
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = ComplexMatrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        ComplexMatrix4::from_fn(|i, j| c(rows[i][j]))
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        ComplexMatrix4::from_fn(|i, j| if i == j { c(d[i]) } else { c(0.0) })
    }

    /// X-shaped matrix from its eight slots, laid out as
    /// `[[a1,0,0,a2],[0,b1,b2,0],[0,c1,c2,0],[d1,0,0,d2]]`.
    #[allow(clippy::too_many_arguments)]
    pub fn x_state(
        a1: Complex64,
        a2: Complex64,
        b1: Complex64,
        b2: Complex64,
        c1: Complex64,
        c2: Complex64,
        d1: Complex64,
        d2: Complex64,
    ) -> Self {
        let z = c(0.0);
        ComplexMatrix4([
            [a1, z, z, a2],
            [z, b1, b2, z],
            [z, c1, c2, z],
            [d1, z, z, d2],
        ])
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix4::from_fn(|i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix4::from_fn(|i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |m - m†|` over entries.
    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `(m + m†)/2`, with an exactly real diagonal.
    pub fn hermitian_part(&self) -> Self {
        let mut h = ComplexMatrix4::from_fn(|i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5);
        for i in 0..4 {
            h.0[i][i].im = 0.0;
        }
        h
    }

    /// Whether every entry off the diagonal and anti-diagonal is exactly zero.
    pub fn is_x_shaped(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || self[(i, j)] == c(0.0)))
    }
}

/// Transpose of the second qubit's indices: `((a,b),(a',b')) ↦ ((a,b'),(a',b))`.
pub fn partial_transpose_b(rho: &ComplexMatrix4) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|i, j| {
        let (a, b) = (i / 2, i % 2);
        let (ap, bp) = (j / 2, j % 2);
        rho[(2 * a + bp, 2 * ap + b)]
    })
}

// σy⊗σy is anti-diagonal with signs (-1, 1, 1, -1).
const FLIP_SIGNS: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];

/// `(σy⊗σy) m (σy⊗σy)`.
pub fn spin_flip_conjugation(m: &ComplexMatrix4) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|i, j| m[(3 - i, 3 - j)] * (FLIP_SIGNS[i] * FLIP_SIGNS[j]))
}

/// `ρ (σy⊗σy) ρ* (σy⊗σy)`; its eigenvalues are the squared Wootters λ′.
pub fn wootters_product(rho: &ComplexMatrix4) -> ComplexMatrix4 {
    *rho * spin_flip_conjugation(&rho.conj())
}

/// Eigen-decomposition of a Hermitian matrix: ascending values, eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianEigen {
    pub values: [f64; 4],
    pub vectors: ComplexMatrix4,
    pub sweeps: usize,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix4 {
        let v = &self.vectors;
        let d: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix4::from_fn(|i, j| (0..4).map(|k| v[(i, k)] * v[(j, k)].conj() * d[k]).sum())
    }
}

fn off_diagonal_norm(a: &ComplexMatrix4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &ComplexMatrix4, tol: f64) -> Result<HermitianEigen, LinalgError> {
    let residual = m.hermiticity_residual();
    if !(residual <= tol) {
        return Err(LinalgError::NotHermitian { residual, tol });
    }
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix4::identity();
    let target = OFF_DIAGONAL_TOL * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..3 {
            for q in p + 1..4 {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.map(|k| a[(k, k)].re);
    let vectors = ComplexMatrix4::from_fn(|i, j| v[(i, order[j])]);
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Annihilates `a[p][q]` with the unitary `U = diag(1, e^{-iφ}) · R(c, s)`
/// acting on the `(p, q)` plane, where `φ = arg a[p][q]`.
fn rotate(a: &mut ComplexMatrix4, v: &mut ComplexMatrix4, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    let e_minus = phase.conj();

    // columns: A U
    for k in 0..4 {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * cs - akq * e_minus * sn;
        a[(k, q)] = akp * sn + akq * e_minus * cs;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * cs - vkq * e_minus * sn;
        v[(k, q)] = vkp * sn + vkq * e_minus * cs;
    }
    // rows: U† (A U)
    for k in 0..4 {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = apk * cs - aqk * phase * sn;
        a[(q, k)] = apk * sn + aqk * phase * cs;
    }
    a[(p, q)] = c(0.0);
    a[(q, p)] = c(0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix4, tol: f64) -> Result<[f64; 4], LinalgError> {
    hermitian_eigen(m, tol).map(|e| e.values)
}

/// Wootters λ′ values in descending order: the singular values of
/// `sqrt(ρ_c) (σy⊗σy) sqrt(ρ_c)*`, where `ρ_c` is `ρ` with eigenvalues below
/// `1e-12 · trace` set to zero. Their squares are the eigenvalues of
/// `sqrt(ρ_c) ρ̃_c sqrt(ρ_c)`.
pub fn wootters_lambdas(rho: &ComplexMatrix4, tol: f64) -> Result<[f64; 4], LinalgError> {
    let trace = rho.trace().re;
    let eig = hermitian_eigen(rho, tol)?;
    if !((trace - 1.0).abs() <= TRACE_TOL) {
        return Err(LinalgError::NotNormalized {
            trace,
            tol: TRACE_TOL,
        });
    }
    let floor = CLAMP_REL * trace;
    let sqrt_rho = eig.reconstruct_with(|x| if x < floor { 0.0 } else { x.sqrt() });
    // M = sqrt(ρ) Σ sqrt(ρ)* is complex symmetric with M M† = sqrt(ρ) ρ̃ sqrt(ρ);
    // its singular values are the λ′ without a square root of tiny numbers.
    let flip = ComplexMatrix4::from_fn(|i, j| {
        if i + j == 3 {
            Complex64::new(FLIP_SIGNS[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let m = sqrt_rho * flip * sqrt_rho.conj();
    let mut big = [[0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            big[i][j] = v.re;
            big[i][j + 4] = v.im;
            big[i + 4][j] = v.im;
            big[i + 4][j + 4] = -v.re;
        }
    }
    let mut values = symmetric_eigenvalues(big)?;
    values.sort_by(|a, b| b.total_cmp(a));
    let mut lambdas = [values[0], values[1], values[2], values[3]].map(|x| x.max(0.0));
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

/// Cyclic Jacobi for a real symmetric matrix; unsorted eigenvalues.
fn symmetric_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> Result<[f64; N], LinalgError> {
    let off = |a: &[[f64; N]; N]| {
        let mut s = 0.0;
        for i in 0..N {
            for j in 0..N {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    let scale = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= OFF_DIAGONAL_TOL * 1e-2 * scale {
            return Ok(std::array::from_fn(|i| a[i][i]));
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let off_norm = off(&a);
    if off_norm <= 1e-12 * scale {
        return Ok(std::array::from_fn(|i| a[i][i]));
    }
    Err(LinalgError::NoConvergence {
        sweeps: MAX_SWEEPS,
        off_norm,
    })
}
