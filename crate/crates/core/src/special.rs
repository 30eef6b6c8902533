//! Modified Bessel function of the second kind, order one, for complex
//! arguments in the closed right half-plane.
//!
//! The massive Wightman function with an `iε` regulator needs `K₁(z)` with
//! `z` anywhere from the positive real axis (spacelike separations) to just
//! right of the imaginary axis (timelike separations), so the real-argument
//! rational approximations are not enough.

use num_complex::Complex64;

use crate::quad::gl24;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402;

/// Radius below which the ascending series is used.
const SERIES_RADIUS: f64 = 2.0;

/// `K₁(z)` on the principal branch, valid for `Re z >= 0`, `z != 0`.
pub fn bessel_k1(z: Complex64) -> Complex64 {
    if z.norm() <= SERIES_RADIUS {
        k1_series(z)
    } else {
        k1_laplace(z)
    }
}

/// Ascending series
/// `K₁(z) = 1/z + ln(z/2) I₁(z) - (z/4) Σ [ψ(k+1)+ψ(k+2)] (z²/4)^k / (k!(k+1)!)`.
fn k1_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0); // (z²/4)^k / (k!(k+1)!)
    let mut i_sum = Complex64::new(0.0, 0.0);
    let mut psi_sum = Complex64::new(0.0, 0.0);
    // ψ(k+1) = -γ + H_k
    let mut harmonic = 0.0;
    for k in 0..60 {
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (k as f64 + 1.0);
        i_sum += term;
        psi_sum += term * (psi_k1 + psi_k2);
        if term.norm() < 1e-18 * i_sum.norm() {
            break;
        }
        harmonic += 1.0 / (k as f64 + 1.0);
        term = term * q / ((k as f64 + 1.0) * (k as f64 + 2.0));
    }
    let i1 = z * 0.5 * i_sum;
    z.inv() + (z * 0.5).ln() * i1 - z * 0.25 * psi_sum
}

/// Laplace-type representation
/// `K₁(z) = sqrt(2/z) e^{-z} ∫₀^∞ 2u² e^{-u²} sqrt(1 + u²/(2z)) du`,
/// evaluated with composite Gauss-Legendre panels on `u ∈ [0, 6.5]`.
fn k1_laplace(z: Complex64) -> Complex64 {
    const UPPER: f64 = 6.5;
    const PANELS: usize = 5;
    let (nodes, weights) = gl24();
    let inv_2z = (z * 2.0).inv();
    let h = UPPER / PANELS as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for panel in 0..PANELS {
        let mid = h * (panel as f64 + 0.5);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let u = mid + 0.5 * h * x;
            let u2 = u * u;
            let g = (Complex64::new(1.0, 0.0) + inv_2z * u2).sqrt();
            acc += g * (w * 2.0 * u2 * (-u2).exp());
        }
    }
    acc *= 0.5 * h;
    (Complex64::new(2.0, 0.0) / z).sqrt() * (-z).exp() * acc
}
