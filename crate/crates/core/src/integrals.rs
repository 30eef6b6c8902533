//! The correlation integrals entering the second-order density matrix.
//!
//! Eternal switching produces distributional results proportional to
//! `δ(0)`; the factor is carried symbolically as `delta0_power = 1` and a
//! finite coefficient. Gaussian switching produces ordinary numbers.
//!
//! For Gaussian switching the Wightman-type entries factorize mode by mode
//! into products of switching transforms, leaving a 1D radial integral
//! (prefactor `1/(4π²)`, measure `p²/E_p`, `sinc(pd)` for cross terms):
//!
//! | entry                 | switching factors             |
//! |-----------------------|-------------------------------|
//! | `P`, `P*_AB`          | `χ̂(ΔE + E_p)²`                |
//! | `P″`, `X_AB`          | `χ̂(ΔE - E_p)²`                |
//! | `P̄`, `P̄′`             | `χ̂(E_p - ΔE) χ̂(E_p + ΔE)`      |
//! | `P′_AB`, `P̄′_AB`      | `χ̂(ΔE + E_p) χ̂(ΔE - E_p)`      |
//!
//! The time-ordered entries `Y_AB` and `ξ_AB` are integrated in position
//! space instead, in centre/relative time coordinates `u = (τ_A + τ_B)/2`,
//! `s = τ_A - τ_B`. The Gaussian product separates,
//! `χ(τ_A)χ(τ_B) = exp(-u²/σ²) exp(-s²/4σ²)`, so the `u` integral is exact
//! (`σ√π exp(-σ²ΔE²)` for both entries) and the `s` integral of the regulated
//! kernel is done numerically for a list of `ε` values and extrapolated to
//! `ε → 0`. Only real parts are kept: the imaginary parts of `Y_AB`, `ξ_AB`
//! and `M_j` grow without bound as the regulator is removed.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{SwitchingSpec, ValidatedScenario};
use crate::quad::{
    extrapolate_to_zero, extrapolation_weights, integrate, AdaptiveOptions, Estimate, QuadError,
};
use crate::wightman::{
    gaussian_fourier, sinc, wightman_mode_sum_truncated, wightman_position, ModeKernel,
    PositionKernel, WightmanError, EPSILON_FLOOR,
};

/// Default per-entry absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default regulator list for `ε → 0` extrapolation.
pub const DEFAULT_EPSILONS: [f64; 4] = [8e-3, 4e-3, 2e-3, 1e-3];
/// Default oracle half-window in units of `σ`.
pub const DEFAULT_WINDOW_SIGMAS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralName {
    PA,
    PB,
    PDdA,
    PDdB,
    PBarA,
    PBarB,
    PBarPrimeA,
    PBarPrimeB,
    MReA,
    MReB,
    PAbStar,
    PAbPrime,
    PBarAbPrime,
    XAb,
    YAb,
    XiAb,
}

impl IntegralName {
    pub const ALL: [IntegralName; 16] = [
        IntegralName::PA,
        IntegralName::PB,
        IntegralName::PDdA,
        IntegralName::PDdB,
        IntegralName::PBarA,
        IntegralName::PBarB,
        IntegralName::PBarPrimeA,
        IntegralName::PBarPrimeB,
        IntegralName::MReA,
        IntegralName::MReB,
        IntegralName::PAbStar,
        IntegralName::PAbPrime,
        IntegralName::PBarAbPrime,
        IntegralName::XAb,
        IntegralName::YAb,
        IntegralName::XiAb,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IntegralName::PA => "p_a",
            IntegralName::PB => "p_b",
            IntegralName::PDdA => "p_dd_a",
            IntegralName::PDdB => "p_dd_b",
            IntegralName::PBarA => "p_bar_a",
            IntegralName::PBarB => "p_bar_b",
            IntegralName::PBarPrimeA => "p_bar_prime_a",
            IntegralName::PBarPrimeB => "p_bar_prime_b",
            IntegralName::MReA => "m_re_a",
            IntegralName::MReB => "m_re_b",
            IntegralName::PAbStar => "p_ab_star",
            IntegralName::PAbPrime => "p_ab_prime",
            IntegralName::PBarAbPrime => "p_bar_ab_prime",
            IntegralName::XAb => "x_ab",
            IntegralName::YAb => "y_ab",
            IntegralName::XiAb => "xi_ab",
        }
    }

    /// Whether the entry couples the two detectors (depends on `d`).
    pub fn is_cross(&self) -> bool {
        matches!(
            self,
            IntegralName::PAbStar
                | IntegralName::PAbPrime
                | IntegralName::PBarAbPrime
                | IntegralName::XAb
                | IntegralName::YAb
                | IntegralName::XiAb
        )
    }
}

impl fmt::Display for IntegralName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("quadrature for {entry} did not converge: {source}")]
    QuadratureNonConvergence {
        entry: IntegralName,
        source: QuadError,
    },
    #[error(transparent)]
    Kernel(#[from] WightmanError),
    #[error("rate extraction needs a delta(0)-proportional value")]
    NotDistributional,
    #[error("integral set is for {found} switching, scenario uses {expected}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),
}

impl IntegralError {
    fn quad(entry: IntegralName) -> impl Fn(QuadError) -> IntegralError {
        move |source| IntegralError::QuadratureNonConvergence { entry, source }
    }
}

/// `coeff · δ(0)^delta0_power`, with an absolute error on `coeff`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatedValue {
    pub coeff: Complex64,
    pub delta0_power: u8,
    pub abs_error: f64,
}

impl RegulatedValue {
    pub fn zero() -> Self {
        RegulatedValue {
            coeff: Complex64::new(0.0, 0.0),
            delta0_power: 0,
            abs_error: 0.0,
        }
    }

    pub fn distributional(coeff: f64) -> Self {
        RegulatedValue {
            coeff: Complex64::new(coeff, 0.0),
            delta0_power: 1,
            abs_error: 0.0,
        }
    }

    pub fn finite(coeff: f64, abs_error: f64) -> Self {
        RegulatedValue {
            coeff: Complex64::new(coeff, 0.0),
            delta0_power: 0,
            abs_error,
        }
    }

    pub fn re(&self) -> f64 {
        self.coeff.re
    }

    pub fn is_distributional(&self) -> bool {
        self.delta0_power == 1
    }

    /// Numeric value for a concrete `δ(0)`.
    pub fn with_delta0(&self, delta0: f64) -> Complex64 {
        self.coeff * delta0.powi(self.delta0_power as i32)
    }
}

/// Per-unit-time rate of a `δ(0)`-proportional value: `coeff / 2π`.
pub fn rate(value: RegulatedValue) -> Result<Complex64, IntegralError> {
    if value.delta0_power != 1 {
        return Err(IntegralError::NotDistributional);
    }
    Ok(value.coeff / (2.0 * PI))
}

/// The sixteen stored entries: eleven integrals, five of them per detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSet {
    pub p_a: RegulatedValue,
    pub p_b: RegulatedValue,
    pub p_dd_a: RegulatedValue,
    pub p_dd_b: RegulatedValue,
    pub p_bar_a: RegulatedValue,
    pub p_bar_b: RegulatedValue,
    pub p_bar_prime_a: RegulatedValue,
    pub p_bar_prime_b: RegulatedValue,
    pub m_re_a: RegulatedValue,
    pub m_re_b: RegulatedValue,
    pub p_ab_star: RegulatedValue,
    pub p_ab_prime: RegulatedValue,
    pub p_bar_ab_prime: RegulatedValue,
    pub x_ab: RegulatedValue,
    pub y_ab: RegulatedValue,
    pub xi_ab: RegulatedValue,
}

impl IntegralSet {
    pub fn zeros() -> Self {
        let z = RegulatedValue::zero();
        IntegralSet {
            p_a: z,
            p_b: z,
            p_dd_a: z,
            p_dd_b: z,
            p_bar_a: z,
            p_bar_b: z,
            p_bar_prime_a: z,
            p_bar_prime_b: z,
            m_re_a: z,
            m_re_b: z,
            p_ab_star: z,
            p_ab_prime: z,
            p_bar_ab_prime: z,
            x_ab: z,
            y_ab: z,
            xi_ab: z,
        }
    }

    pub fn get(&self, name: IntegralName) -> RegulatedValue {
        match name {
            IntegralName::PA => self.p_a,
            IntegralName::PB => self.p_b,
            IntegralName::PDdA => self.p_dd_a,
            IntegralName::PDdB => self.p_dd_b,
            IntegralName::PBarA => self.p_bar_a,
            IntegralName::PBarB => self.p_bar_b,
            IntegralName::PBarPrimeA => self.p_bar_prime_a,
            IntegralName::PBarPrimeB => self.p_bar_prime_b,
            IntegralName::MReA => self.m_re_a,
            IntegralName::MReB => self.m_re_b,
            IntegralName::PAbStar => self.p_ab_star,
            IntegralName::PAbPrime => self.p_ab_prime,
            IntegralName::PBarAbPrime => self.p_bar_ab_prime,
            IntegralName::XAb => self.x_ab,
            IntegralName::YAb => self.y_ab,
            IntegralName::XiAb => self.xi_ab,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (IntegralName, RegulatedValue)> + '_ {
        IntegralName::ALL.into_iter().map(move |n| (n, self.get(n)))
    }

    /// Whether any entry carries a `δ(0)` factor.
    pub fn is_distributional(&self) -> bool {
        self.iter().any(|(_, v)| v.is_distributional())
    }

    /// Entry with the largest error estimate.
    pub fn worst_error(&self) -> (IntegralName, f64) {
        self.iter()
            .map(|(n, v)| (n, v.abs_error))
            .fold(
                (IntegralName::PA, 0.0),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            )
    }

    pub fn max_abs_error(&self) -> f64 {
        self.worst_error().1
    }

    /// Largest `|coeff|` over all entries.
    pub fn max_abs_coeff(&self) -> f64 {
        self.iter().map(|(_, v)| v.coeff.norm()).fold(0.0, f64::max)
    }
}

/// Plain-value numerical settings for the Gaussian evaluators and oracles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Absolute tolerance per entry.
    pub tol: f64,
    /// Radial momentum cutoff; `None` means `10 max(ΔE, 1/σ)/c`.
    pub p_max: Option<f64>,
    /// Regulators for the `ε → 0` extrapolation.
    pub epsilons: Vec<f64>,
    /// Half-width of the oracle time window; `None` means `8σ`.
    pub window: Option<f64>,
    pub max_intervals: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            tol: DEFAULT_TOL,
            p_max: None,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            window: None,
            max_intervals: 20_000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<(), IntegralError> {
        if !(self.tol > 0.0) {
            return Err(IntegralError::InvalidSettings(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let Some(p) = self.p_max {
            if !(p > 0.0) || !p.is_finite() {
                return Err(IntegralError::InvalidSettings(format!(
                    "p_max must be positive, got {p}"
                )));
            }
        }
        if let Some(w) = self.window {
            if !(w > 0.0) || !w.is_finite() {
                return Err(IntegralError::InvalidSettings(format!(
                    "window must be positive, got {w}"
                )));
            }
        }
        if self.epsilons.is_empty() {
            return Err(IntegralError::InvalidSettings(
                "epsilon list is empty".into(),
            ));
        }
        if let Some(&e) = self.epsilons.iter().find(|&&e| !(e >= EPSILON_FLOOR)) {
            return Err(WightmanError::RegulatorTooSmall {
                epsilon: e,
                floor: EPSILON_FLOOR,
            }
            .into());
        }
        Ok(())
    }

    pub fn resolved_p_max(&self, delta_e: f64, sigma: f64, c: f64) -> f64 {
        self.p_max.unwrap_or(10.0 * delta_e.max(1.0 / sigma) / c)
    }

    pub fn resolved_window(&self, sigma: f64) -> f64 {
        self.window.unwrap_or(DEFAULT_WINDOW_SIGMAS * sigma)
    }

    fn adaptive(&self, abs_tol: f64) -> AdaptiveOptions {
        AdaptiveOptions::new(abs_tol, 1e-12).with_max_intervals(self.max_intervals)
    }
}

/// Closed forms for `χ ≡ 1`. Only `P″`, `Re M` and `X_AB` survive, all
/// proportional to `δ(0)`; at or below threshold (`ΔE ≤ mc²`) their
/// coefficients are zero. The remaining entries are plain zeros.
pub fn eternal_integral_set(s: &ValidatedScenario) -> Result<IntegralSet, IntegralError> {
    if !s.switching().is_eternal() {
        return Err(IntegralError::ModeMismatch {
            expected: s.switching().label(),
            found: "eternal",
        });
    }
    let mut set = IntegralSet::zeros();
    let c = s.units().c;
    // on_shell_energy_gap is zero when the channel is closed
    let p_dd = s.on_shell_energy_gap() / (2.0 * c * c * c);
    let x = p_dd * sinc(s.resonant_momentum() * s.pair().distance);
    set.p_dd_a = RegulatedValue::distributional(p_dd);
    set.p_dd_b = set.p_dd_a;
    set.m_re_a = RegulatedValue::distributional(0.5 * p_dd);
    set.m_re_b = set.m_re_a;
    set.x_ab = RegulatedValue::distributional(x);
    Ok(set)
}

/// Finite integrals for Gaussian switching.
pub fn gaussian_integral_set(
    s: &ValidatedScenario,
    quad: &QuadratureSettings,
) -> Result<IntegralSet, IntegralError> {
    let sigma = match *s.switching() {
        SwitchingSpec::Gaussian { sigma } => sigma,
        SwitchingSpec::Eternal => {
            return Err(IntegralError::ModeMismatch {
                expected: "eternal",
                found: "gaussian",
            });
        }
    };
    quad.validate()?;
    let radial = RadialSetup::new(s, sigma, quad);
    let de = s.pair().delta_e;
    let g = |w: f64| gaussian_fourier(sigma, w);

    let p = radial.integrate(IntegralName::PA, false, |e| g(de + e).powi(2))?;
    let p_dd = radial.integrate(IntegralName::PDdA, false, |e| g(de - e).powi(2))?;
    let p_bar = radial.integrate(IntegralName::PBarA, false, |e| g(e - de) * g(e + de))?;
    let p_ab_star = radial.integrate(IntegralName::PAbStar, true, |e| g(de + e).powi(2))?;
    let p_ab_prime = radial.integrate(IntegralName::PAbPrime, true, |e| g(de + e) * g(de - e))?;
    let x_ab = radial.integrate(IntegralName::XAb, true, |e| g(de - e).powi(2))?;
    let m_re = RegulatedValue::finite(
        0.5 * (p.re() + p_dd.re()),
        0.5 * (p.abs_error + p_dd.abs_error),
    );
    let y_ab = time_ordered_cross(s, sigma, quad)?;

    Ok(IntegralSet {
        p_a: p,
        p_b: p,
        p_dd_a: p_dd,
        p_dd_b: p_dd,
        p_bar_a: p_bar,
        p_bar_b: p_bar,
        p_bar_prime_a: p_bar,
        p_bar_prime_b: p_bar,
        m_re_a: m_re,
        m_re_b: m_re,
        p_ab_star,
        p_ab_prime,
        p_bar_ab_prime: p_ab_prime,
        x_ab,
        y_ab,
        xi_ab: y_ab,
    })
}

/// Dispatches on the switching kind.
pub fn integral_set(
    s: &ValidatedScenario,
    quad: &QuadratureSettings,
) -> Result<IntegralSet, IntegralError> {
    if s.switching().is_eternal() {
        eternal_integral_set(s)
    } else {
        gaussian_integral_set(s, quad)
    }
}

struct RadialSetup {
    modes: ModeKernel,
    distance: f64,
    p_max: f64,
    breaks: Vec<f64>,
    opts: AdaptiveOptions,
    tol: f64,
}

impl RadialSetup {
    fn new(s: &ValidatedScenario, sigma: f64, quad: &QuadratureSettings) -> Self {
        let c = s.units().c;
        let de = s.pair().delta_e;
        let modes = ModeKernel::new(s.field().mass, c);
        let p_max = quad.resolved_p_max(de, sigma, c);
        // resonance at E_p = ΔE and its Gaussian shoulders
        let breaks: Vec<f64> = (-6..=6)
            .filter_map(|k| modes.momentum_at(de + k as f64 / sigma))
            .filter(|&p| p < p_max)
            .collect();
        RadialSetup {
            modes,
            distance: s.pair().distance,
            p_max,
            breaks,
            opts: quad.adaptive(0.1 * quad.tol),
            tol: quad.tol,
        }
    }

    fn integrate(
        &self,
        name: IntegralName,
        cross: bool,
        switching: impl Fn(f64) -> f64,
    ) -> Result<RegulatedValue, IntegralError> {
        let f = |p: f64| {
            let e = self.modes.energy(p);
            let angular = if cross { sinc(p * self.distance) } else { 1.0 };
            self.modes.measure(p) * angular * switching(e)
        };
        let est = integrate(f, 0.0, self.p_max, &self.breaks, self.opts)
            .map_err(IntegralError::quad(name))?;
        let est = est.scaled(1.0 / (4.0 * PI * PI));
        if est.abs_error > self.tol {
            return Err(IntegralError::QuadratureNonConvergence {
                entry: name,
                source: QuadError::ToleranceNotMet {
                    abs_error: est.abs_error,
                    tol: self.tol,
                },
            });
        }
        Ok(RegulatedValue::finite(est.value, est.abs_error))
    }
}

/// `Re Y_AB = Re ξ_AB = σ√π e^{-σ²ΔE²} · 2 ∫₀^∞ e^{-s²/4σ²} Re G_ε(s, d) ds`,
/// extrapolated to `ε → 0`.
fn time_ordered_cross(
    s: &ValidatedScenario,
    sigma: f64,
    quad: &QuadratureSettings,
) -> Result<RegulatedValue, IntegralError> {
    let name = IntegralName::YAb;
    let (c, d, de) = (s.units().c, s.pair().distance, s.pair().delta_e);
    let light = d / c;
    let upper = 14.0 * sigma + light;
    let prefactor = 2.0 * sigma * PI.sqrt() * (-(sigma * de).powi(2)).exp();
    let opts = quad.adaptive(1e-3 * quad.tol / prefactor.max(1e-300));

    let mut values = Vec::with_capacity(quad.epsilons.len());
    let mut errors = Vec::with_capacity(quad.epsilons.len());
    for &eps in &quad.epsilons {
        let k = PositionKernel::new(s.field().mass, c, eps)?;
        let breaks: Vec<f64> = [1.0, -1.0, 10.0, -10.0, 100.0, -100.0]
            .iter()
            .map(|m| light + m * eps)
            .chain(std::iter::once(light))
            .collect();
        let f = |t: f64| (-(t * t) / (4.0 * sigma * sigma)).exp() * wightman_position(&k, t, d).re;
        let est = integrate(f, 0.0, upper, &breaks, opts).map_err(IntegralError::quad(name))?;
        errors.push(est.abs_error * prefactor);
        values.push(est.value * prefactor);
    }
    let ex = extrapolate_to_zero(&quad.epsilons, &values);
    let err = ex.abs_error + propagated(&quad.epsilons, &errors);
    if err > quad.tol {
        return Err(IntegralError::QuadratureNonConvergence {
            entry: name,
            source: QuadError::ToleranceNotMet {
                abs_error: err,
                tol: quad.tol,
            },
        });
    }
    Ok(RegulatedValue::finite(ex.value, err))
}

/// Relative target of the oracle's outer quadrature. Near-coincident
/// kernels peak at `1/ε²`, which puts a round-off floor under any purely
/// absolute target.
const ORACLE_REL_TOL: f64 = 1e-10;

/// Bound on how per-regulator quadrature errors reach the extrapolant.
fn propagated(epsilons: &[f64], errors: &[f64]) -> f64 {
    extrapolation_weights(epsilons)
        .iter()
        .zip(errors)
        .map(|(w, e)| w.abs() * e)
        .sum()
}

/// How the oracle evaluates the field correlator at each time separation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleKernel {
    /// Closed-form regulated kernel, extrapolated over the `ε` list.
    Position,
    /// Literal radial mode integral truncated at `p_max`, without regulator.
    ModeSum,
}

/// Settings for [`oracle_quadrature`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub quad: QuadratureSettings,
    pub kernel: OracleKernel,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            quad: QuadratureSettings::default(),
            kernel: OracleKernel::Position,
        }
    }
}

// Exponent signs `(a, b)` in `exp(iΔE(aτ₁ + bτ₂))` and the kernel pattern,
// with `Δ = τ₁ - τ₂` and `G(Δ)` the correlator at time difference `Δ`.
#[derive(Clone, Copy)]
enum KernelPattern {
    /// `G(-Δ)`
    Reversed,
    /// `G(Δ)`
    Forward,
    /// `G(|Δ|)` (time ordered)
    Ordered,
    /// `θ(Δ) [G(Δ) + G(-Δ)]`
    Anticommutator,
}

fn definition(entry: IntegralName) -> (f64, f64, KernelPattern, bool) {
    use KernelPattern::*;
    match entry {
        IntegralName::PA | IntegralName::PB => (1.0, -1.0, Reversed, false),
        IntegralName::PDdA | IntegralName::PDdB => (-1.0, 1.0, Reversed, false),
        IntegralName::PBarA | IntegralName::PBarB => (-1.0, -1.0, Reversed, false),
        IntegralName::PBarPrimeA | IntegralName::PBarPrimeB => (1.0, 1.0, Reversed, false),
        IntegralName::MReA | IntegralName::MReB => (1.0, -1.0, Anticommutator, false),
        IntegralName::PAbStar => (-1.0, 1.0, Forward, true),
        IntegralName::PAbPrime => (-1.0, -1.0, Forward, true),
        IntegralName::PBarAbPrime => (-1.0, -1.0, Reversed, true),
        IntegralName::XAb => (-1.0, 1.0, Reversed, true),
        IntegralName::YAb => (-1.0, -1.0, Ordered, true),
        IntegralName::XiAb => (1.0, 1.0, Ordered, true),
    }
}

/// Brute-force evaluation of one entry straight from its double-time
/// definition over the square `[-W, W]²`, as nested adaptive quadrature in
/// `Δ = τ₁ - τ₂` (outer) and `u = (τ₁ + τ₂)/2` (inner).
///
/// The entries whose imaginary part diverges without a regulator
/// (`m_re_*`, `y_ab`, `xi_ab`) are returned as real parts. Needs Gaussian
/// switching; emulate eternal switching with a wide `σ`.
pub fn oracle_quadrature(
    entry: IntegralName,
    s: &ValidatedScenario,
    settings: &OracleSettings,
) -> Result<Estimate<Complex64>, IntegralError> {
    let sigma = s.switching().sigma().ok_or(IntegralError::ModeMismatch {
        expected: "eternal",
        found: "gaussian",
    })?;
    let quad = &settings.quad;
    quad.validate()?;
    let (a, b, pattern, cross) = definition(entry);
    let real_only = matches!(
        pattern,
        KernelPattern::Ordered | KernelPattern::Anticommutator
    );
    let c = s.units().c;
    let de = s.pair().delta_e;
    let r = if cross { s.pair().distance } else { 0.0 };
    let w = quad.resolved_window(sigma);
    let switching = *s.switching();
    // absolute floor scaled by ∫χ² dτ, the size of the unoscillating slice
    let inner_opts = AdaptiveOptions::new(1e-13 * sigma * PI.sqrt(), 1e-13)
        .with_max_intervals(quad.max_intervals);

    // ∫ χ(u + Δ/2) χ(u - Δ/2) e^{iΔE(a+b)u} du over the window slice
    let inner = |delta: f64| -> Complex64 {
        let half = w - 0.5 * delta.abs();
        if half <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = |u: f64| {
            Complex64::from_polar(
                switching.chi(u + 0.5 * delta) * switching.chi(u - 0.5 * delta),
                de * (a + b) * u,
            )
        };
        integrate(g, -half, half, &[0.0], inner_opts)
            .map(|e| e.value)
            .unwrap_or(Complex64::new(f64::NAN, 0.0))
    };

    // every entry grows like σ, so this is a fixed tolerance on the coefficient
    let outer_tol = quad.tol * sigma.max(1.0);
    let outer_range = if matches!(pattern, KernelPattern::Anticommutator) {
        (0.0, 2.0 * w)
    } else {
        (-2.0 * w, 2.0 * w)
    };
    let light = r / c;

    let run = |kernel: &dyn Fn(f64) -> Complex64, breaks: &[f64], opts: AdaptiveOptions| {
        let f = |delta: f64| {
            let g = match pattern {
                KernelPattern::Reversed => kernel(-delta),
                KernelPattern::Forward => kernel(delta),
                KernelPattern::Ordered => kernel(delta.abs()),
                KernelPattern::Anticommutator => kernel(delta) + kernel(-delta),
            };
            let v = g * Complex64::from_polar(1.0, 0.5 * de * (a - b) * delta) * inner(delta);
            if real_only {
                Complex64::new(v.re, 0.0)
            } else {
                v
            }
        };
        integrate(f, outer_range.0, outer_range.1, breaks, opts).map_err(IntegralError::quad(entry))
    };

    match settings.kernel {
        OracleKernel::ModeSum => {
            let p_max = quad.resolved_p_max(de, sigma, c);
            let modes = ModeKernel::new(s.field().mass, c);
            let radial_opts =
                AdaptiveOptions::new(1e-3 * quad.tol, 1e-12).with_max_intervals(quad.max_intervals);
            let kernel = |dt: f64| {
                wightman_mode_sum_truncated(&modes, dt, r, 0.0, p_max, radial_opts)
                    .map(|e| e.value)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0))
            };
            run(
                &kernel,
                &[0.0, light, -light],
                AdaptiveOptions::new(0.1 * outer_tol, ORACLE_REL_TOL)
                    .with_max_intervals(quad.max_intervals),
            )
        }
        OracleKernel::Position => {
            let mut values = Vec::with_capacity(quad.epsilons.len());
            let mut errors = Vec::with_capacity(quad.epsilons.len());
            let mut evaluations = 0;
            for &eps in &quad.epsilons {
                let k = PositionKernel::new(s.field().mass, c, eps)?;
                let mut breaks = vec![0.0];
                for centre in [light, -light] {
                    for m in [0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0] {
                        breaks.push(centre + m * eps);
                    }
                }
                let kernel = |dt: f64| wightman_position(&k, dt, r);
                let est = run(
                    &kernel,
                    &breaks,
                    AdaptiveOptions::new(1e-3 * outer_tol, ORACLE_REL_TOL)
                        .with_max_intervals(quad.max_intervals),
                )?;
                errors.push(est.abs_error);
                evaluations += est.evaluations;
                values.push(est.value);
            }
            let ex = extrapolate_to_zero(&quad.epsilons, &values);
            Ok(Estimate {
                value: ex.value,
                abs_error: ex.abs_error + propagated(&quad.epsilons, &errors),
                evaluations,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn eternal(de: f64, m: f64, d: f64) -> ValidatedScenario {
        validate_config(
            DetectorPairConfig::new(de, 0.1, 0.1, d),
            FieldSpec { mass: m },
            InitialState::bell(),
            SwitchingSpec::Eternal,
            UnitSystem::default(),
        )
        .unwrap()
    }

    #[test]
    fn eternal_massless_values() {
        let set = eternal_integral_set(&eternal(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(set.p_dd_a.coeff.re, 0.5);
        assert_eq!(set.m_re_a.coeff.re, 0.25);
        assert_eq!(set.x_ab.coeff.re, 0.5);
        assert_eq!(set.p_a, RegulatedValue::zero());
        assert_eq!(set.y_ab, RegulatedValue::zero());
    }

    #[test]
    fn eternal_threshold_is_zero() {
        let set = eternal_integral_set(&eternal(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(set.max_abs_coeff(), 0.0);
        assert!(set.is_distributional());
    }

    #[test]
    fn eternal_sinc_node() {
        let set = eternal_integral_set(&eternal(1.0, 0.0, PI)).unwrap();
        assert!(set.x_ab.coeff.re.abs() < 1e-16);
    }

    #[test]
    fn rate_contract() {
        assert!(
            (rate(RegulatedValue::distributional(0.5)).unwrap().re - 0.079_577_471_545_947_67)
                .abs()
                < 1e-16
        );
        assert_eq!(rate(RegulatedValue::distributional(0.0)).unwrap().re, 0.0);
        assert_eq!(
            rate(RegulatedValue::finite(1.0, 0.0)),
            Err(IntegralError::NotDistributional)
        );
    }

    #[test]
    fn settings_validation() {
        let mut q = QuadratureSettings::default();
        assert!(q.validate().is_ok());
        q.epsilons = vec![1e-3, 1e-9];
        assert!(matches!(
            q.validate(),
            Err(IntegralError::Kernel(
                WightmanError::RegulatorTooSmall { .. }
            ))
        ));
    }
}
