//! Vacuum two-point functions of a free scalar field between two static
//! worldlines, and Fourier transforms of the switching functions.
//!
//! With `E_p = sqrt(p²c² + m²c⁴)` the Wightman function reduces, after the
//! angular integral, to
//!
//! ```text
//! G(Δt, r) = 1/(4π²) ∫₀^∞ dp p²/E_p · sinc(p r) · exp(-i E_p (Δt - iε))
//! ```
//!
//! [`wightman_mode_sum`] evaluates this radial integral literally;
//! [`wightman_position`] uses its closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SwitchingSpec;
use crate::quad::{integrate, AdaptiveOptions, Estimate, QuadError};
use crate::special::bessel_k1;

/// Smallest accepted `iε` regulator.
pub const EPSILON_FLOOR: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WightmanError {
    #[error("regulator epsilon = {epsilon:e} is below the floor {floor:e}")]
    RegulatorTooSmall { epsilon: f64, floor: f64 },
    #[error("eternal switching has no finite Fourier transform")]
    UnsupportedSwitching,
    #[error("kernel parameter {name} = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// `sin(x)/x` with the removable point filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Mode data of the field: dispersion relation and radial measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeKernel {
    pub mass: f64,
    pub c: f64,
}

impl ModeKernel {
    pub fn new(mass: f64, c: f64) -> Self {
        ModeKernel { mass, c }
    }

    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }

    /// `E_p = sqrt(p²c² + m²c⁴)`.
    pub fn energy(&self, p: f64) -> f64 {
        (p * self.c).hypot(self.rest_energy())
    }

    /// `p²/E_p`.
    pub fn measure(&self, p: f64) -> f64 {
        let e = self.energy(p);
        if e == 0.0 {
            0.0
        } else {
            p * p / e
        }
    }

    /// Momentum with `E_p = energy`, if one exists.
    pub fn momentum_at(&self, energy: f64) -> Option<f64> {
        let mc2 = self.rest_energy();
        (energy > mc2).then(|| ((energy - mc2) * (energy + mc2)).sqrt() / self.c)
    }
}

/// Closed-form regulated Wightman function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionKernel {
    mass: f64,
    c: f64,
    epsilon: f64,
}

impl PositionKernel {
    pub fn new(mass: f64, c: f64, epsilon: f64) -> Result<Self, WightmanError> {
        if !(epsilon >= EPSILON_FLOOR) || !epsilon.is_finite() {
            return Err(WightmanError::RegulatorTooSmall {
                epsilon,
                floor: EPSILON_FLOOR,
            });
        }
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(WightmanError::InvalidParameter {
                name: "mass",
                value: mass,
            });
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(WightmanError::InvalidParameter {
                name: "c",
                value: c,
            });
        }
        Ok(PositionKernel { mass, c, epsilon })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn modes(&self) -> ModeKernel {
        ModeKernel::new(self.mass, self.c)
    }
}

/// `G(Δt, r)` in closed form, with `Δt → Δt - iε`.
///
/// Massless: `-1 / (4π² c [c²(Δt - iε)² - r²])`.
/// Massive: `μ K₁(μρ) / (4π² c ρ)` with `μ = mc` and
/// `ρ = sqrt(r² - c²(Δt - iε)²)` on the principal branch.
/// Negative `Δt` is evaluated as the conjugate of `+|Δt|`, so the
/// Hermiticity relation holds bit for bit.
pub fn wightman_position(k: &PositionKernel, dt: f64, r: f64) -> Complex64 {
    if dt < 0.0 {
        return wightman_position(k, -dt, r).conj();
    }
    let c = k.c;
    let t = Complex64::new(dt, -k.epsilon);
    let ct = t * c;
    let norm = 1.0 / (4.0 * PI * PI * c);
    if k.mass == 0.0 {
        return -norm / (ct * ct - r * r);
    }
    let mu = k.mass * c;
    let rho = (Complex64::new(r * r, 0.0) - ct * ct).sqrt();
    let z = rho * mu;
    norm * mu * bessel_k1(z) / rho
}

/// The radial mode integral for `G(Δt, r)` evaluated by adaptive quadrature.
///
/// The `exp(-εE_p)` damping makes the integrand decay; the range is cut
/// where that factor drops below `1e-18`.
pub fn wightman_mode_sum(
    k: &ModeKernel,
    dt: f64,
    r: f64,
    epsilon: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate<Complex64>, QuadError> {
    let e_max = 42.0 / epsilon;
    let p_max = (e_max * e_max - k.rest_energy().powi(2)).max(0.0).sqrt() / k.c;
    wightman_mode_sum_truncated(k, dt, r, epsilon, p_max, opts)
}

/// Radial mode integral restricted to `p <= p_max`. A zero `epsilon` is
/// allowed here: the sharp cutoff alone keeps the integral finite.
pub fn wightman_mode_sum_truncated(
    k: &ModeKernel,
    dt: f64,
    r: f64,
    epsilon: f64,
    p_max: f64,
    opts: AdaptiveOptions,
) -> Result<Estimate<Complex64>, QuadError> {
    let integrand = |p: f64| {
        let e = k.energy(p);
        let phase = Complex64::from_polar((-epsilon * e).exp(), -e * dt);
        phase * (k.measure(p) * sinc(p * r))
    };
    // split so each panel holds a bounded number of oscillations
    let period = 2.0 * PI / (k.c * dt.abs().max(r).max(1e-300));
    let panels = ((p_max / period) / 8.0).ceil().clamp(1.0, 4096.0) as usize;
    let breaks: Vec<f64> = (1..panels)
        .map(|i| p_max * i as f64 / panels as f64)
        .collect();
    let est = integrate(integrand, 0.0, p_max, &breaks, opts)?;
    Ok(est.scaled(1.0 / (4.0 * PI * PI)))
}

/// `σ sqrt(2π) exp(-σ²ω²/2)`, the transform of the unit-peak Gaussian.
pub fn gaussian_fourier(sigma: f64, omega: f64) -> f64 {
    sigma * (2.0 * PI).sqrt() * (-0.5 * (sigma * omega).powi(2)).exp()
}

/// `∫ χ(τ) e^{iωτ} dτ`.
pub fn switching_fourier(s: &SwitchingSpec, omega: f64) -> Result<Complex64, WightmanError> {
    match *s {
        SwitchingSpec::Eternal => Err(WightmanError::UnsupportedSwitching),
        SwitchingSpec::Gaussian { sigma } => {
            Ok(Complex64::new(gaussian_fourier(sigma, omega), 0.0))
        }
    }
}
