//! Physical configuration: detectors, field, switching, units and the
//! initial entangled state.
//!
//! Conventions: `ħ = 1`; energies are measured in a reference unit `E₀`,
//! times in `1/E₀` and distances in `c/E₀`. The two-qubit basis is ordered
//! `(e_A e_B, e_A g_B, g_A e_B, g_A g_B)`, so the excited-pair weight `γ²`
//! sits in the top-left slot and the ground-pair weight `α²` bottom-right.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `α² + γ² = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Speed of light.
    pub c: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem { c: 1.0 }
    }
}

/// Real amplitudes of `α|g_A g_B⟩ + γ|e_A e_B⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub alpha: f64,
    pub gamma: f64,
}

impl InitialState {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        InitialState { alpha, gamma }
    }

    /// Builds the state from `α` with `γ = ±sqrt(1 - α²)`.
    pub fn from_alpha(alpha: f64, gamma_positive: bool) -> Self {
        let g = (1.0 - alpha * alpha).max(0.0).sqrt();
        InitialState {
            alpha,
            gamma: if gamma_positive { g } else { -g },
        }
    }

    /// `α = γ = 1/sqrt(2)`.
    pub fn bell() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        InitialState { alpha: h, gamma: h }
    }

    pub fn alpha_gamma(&self) -> f64 {
        self.alpha * self.gamma
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trajectory {
    /// Both detectors at rest; proper time equals coordinate time.
    #[default]
    Static,
}

/// Two identical detectors (shared gap) with independent couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorPairConfig {
    pub delta_e: f64,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub distance: f64,
    #[serde(default)]
    pub trajectory: Trajectory,
}

impl DetectorPairConfig {
    pub fn new(delta_e: f64, coupling_a: f64, coupling_b: f64, distance: f64) -> Self {
        DetectorPairConfig {
            delta_e,
            coupling_a,
            coupling_b,
            distance,
            trajectory: Trajectory::Static,
        }
    }

    /// Same pair with both couplings multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Self {
        DetectorPairConfig {
            coupling_a: self.coupling_a * factor,
            coupling_b: self.coupling_b * factor,
            ..*self
        }
    }
}

/// Real scalar field in the Minkowski vacuum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SwitchingSpec {
    /// `χ ≡ 1` on the whole real line.
    Eternal,
    /// `χ(τ) = exp(-τ²/(2σ²))`, peak one.
    Gaussian { sigma: f64 },
}

impl SwitchingSpec {
    pub fn is_eternal(&self) -> bool {
        matches!(self, SwitchingSpec::Eternal)
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            SwitchingSpec::Eternal => None,
            SwitchingSpec::Gaussian { sigma } => Some(sigma),
        }
    }

    /// Switching value at proper time `tau`.
    pub fn chi(&self, tau: f64) -> f64 {
        match *self {
            SwitchingSpec::Eternal => 1.0,
            SwitchingSpec::Gaussian { sigma } => (-0.5 * (tau / sigma).powi(2)).exp(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SwitchingSpec::Eternal => "eternal",
            SwitchingSpec::Gaussian { .. } => "gaussian",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid configuration: {}", .issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub issues: Vec<FieldIssue>,
}

impl ConfigError {
    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }
}

/// A configuration whose invariants have all been checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidatedScenario {
    pair: DetectorPairConfig,
    field: FieldSpec,
    state: InitialState,
    switching: SwitchingSpec,
    units: UnitSystem,
    channel_open: bool,
}

impl ValidatedScenario {
    pub fn pair(&self) -> &DetectorPairConfig {
        &self.pair
    }
    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn state(&self) -> &InitialState {
        &self.state
    }
    pub fn switching(&self) -> &SwitchingSpec {
        &self.switching
    }
    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    /// Whether `ΔE > m c²`, i.e. the detector gap can emit on shell.
    pub fn channel_open(&self) -> bool {
        self.channel_open
    }

    /// Rest energy `m c²`.
    pub fn rest_energy(&self) -> f64 {
        self.field.mass * self.units.c * self.units.c
    }

    /// `sqrt(ΔE² - m²c⁴)`, zero when the channel is closed.
    pub fn on_shell_energy_gap(&self) -> f64 {
        if self.channel_open {
            let mc2 = self.rest_energy();
            ((self.pair.delta_e - mc2) * (self.pair.delta_e + mc2)).sqrt()
        } else {
            0.0
        }
    }

    /// Resonant wavenumber `q = sqrt(ΔE² - m²c⁴)/c`.
    pub fn resonant_momentum(&self) -> f64 {
        self.on_shell_energy_gap() / self.units.c
    }

    /// Copy with a different coupling pair; couplings are re-checked.
    pub fn with_couplings(&self, coupling_a: f64, coupling_b: f64) -> Result<Self, ConfigError> {
        let pair = DetectorPairConfig {
            coupling_a,
            coupling_b,
            ..self.pair
        };
        validate_config(pair, self.field, self.state, self.switching, self.units)
    }
}

fn check(issues: &mut Vec<FieldIssue>, ok: bool, field: &'static str, message: impl Into<String>) {
    if !ok {
        issues.push(FieldIssue {
            field,
            message: message.into(),
        });
    }
}

/// Checks every configuration invariant and bundles the result.
pub fn validate_config(
    pair: DetectorPairConfig,
    field: FieldSpec,
    state: InitialState,
    switching: SwitchingSpec,
    units: UnitSystem,
) -> Result<ValidatedScenario, ConfigError> {
    let mut issues = Vec::new();
    check(
        &mut issues,
        units.c.is_finite() && units.c > 0.0,
        "c",
        format!("must be positive, got {}", units.c),
    );
    check(
        &mut issues,
        pair.delta_e.is_finite() && pair.delta_e > 0.0,
        "delta_e",
        format!("must be positive, got {}", pair.delta_e),
    );
    check(
        &mut issues,
        pair.coupling_a.is_finite() && pair.coupling_a >= 0.0,
        "coupling_a",
        format!("must be non-negative, got {}", pair.coupling_a),
    );
    check(
        &mut issues,
        pair.coupling_b.is_finite() && pair.coupling_b >= 0.0,
        "coupling_b",
        format!("must be non-negative, got {}", pair.coupling_b),
    );
    check(
        &mut issues,
        pair.distance.is_finite() && pair.distance >= 0.0,
        "distance",
        format!("must be non-negative, got {}", pair.distance),
    );
    check(
        &mut issues,
        field.mass.is_finite() && field.mass >= 0.0,
        "mass",
        format!("must be non-negative, got {}", field.mass),
    );
    let norm = state.alpha * state.alpha + state.gamma * state.gamma;
    check(
        &mut issues,
        state.alpha.is_finite()
            && state.gamma.is_finite()
            && (norm - 1.0).abs() <= NORMALIZATION_TOL,
        "alpha",
        format!("alpha² + gamma² must equal 1, got {norm}"),
    );
    check(
        &mut issues,
        !(state.alpha < 0.0),
        "alpha",
        format!(
            "alpha is taken non-negative (carry the relative sign on gamma), got {}",
            state.alpha
        ),
    );
    if let SwitchingSpec::Gaussian { sigma } = switching {
        check(
            &mut issues,
            sigma.is_finite() && sigma > 0.0,
            "sigma",
            format!("must be positive, got {sigma}"),
        );
    }
    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    let channel_open = pair.delta_e > field.mass * units.c * units.c;
    Ok(ValidatedScenario {
        pair,
        field,
        state,
        switching,
        units,
        channel_open,
    })
}
