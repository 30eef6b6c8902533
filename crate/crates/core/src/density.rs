//! Initial and second-order evolved two-qubit density matrices.
//!
//! Basis order `(e_A e_B, e_A g_B, g_A e_B, g_A g_B)`; the X-shaped layout is
//!
//! ```text
//! [ a1  0   0   a2 ]
//! [ 0   b1  b2  0  ]
//! [ 0   c1  c2  0  ]
//! [ d1  0   0   d2 ]
//! ```
//!
//! The evolved matrix is stored as `base + δ(0)^k · correction`, where
//! `base` is the initial state and `correction` collects every `O(C²)` term.
//! With eternal switching `k = 1` and the stripped matrix (`δ(0) = 1`) is
//! what the numeric oracles consume.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrals::{IntegralName, IntegralSet};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix4, LinalgError};
use crate::model::{DetectorPairConfig, InitialState, ValidatedScenario};

/// Indicator level above which the expansion is flagged.
pub const PERTURBATIVE_WARNING: f64 = 0.1;
/// Indicator level above which the expansion is treated as broken.
pub const PERTURBATIVE_LIMIT: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("integral set mixes delta(0)-proportional and finite entries ({0})")]
    ModeMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbativeStatus {
    Ok,
    Warning,
    Invalid,
}

impl PerturbativeStatus {
    pub fn from_indicator(x: f64) -> Self {
        if !(x <= PERTURBATIVE_LIMIT) {
            PerturbativeStatus::Invalid
        } else if x > PERTURBATIVE_WARNING {
            PerturbativeStatus::Warning
        } else {
            PerturbativeStatus::Ok
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityDiagnostics {
    /// `max |ρ - ρ†|` of the stripped matrix.
    pub hermiticity_residual: f64,
    /// `|tr ρ - 1|` of the stripped matrix.
    pub trace_residual: f64,
    /// Smallest eigenvalue of the stripped matrix.
    pub min_eigenvalue: f64,
    /// `max |C_i C_j · coeff|` over all integrals, in stripped units.
    pub correction_scale: f64,
    /// `correction_scale`, divided by `2π` for eternal switching so that it
    /// compares a per-unit-time change with the `O(1)` initial values.
    pub perturbative_indicator: f64,
    pub status: PerturbativeStatus,
}

/// The eight X-state entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XElements {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl XElements {
    pub fn from_matrix(m: &ComplexMatrix4) -> Self {
        XElements {
            a1: m[(0, 0)],
            a2: m[(0, 3)],
            b1: m[(1, 1)],
            b2: m[(1, 2)],
            c1: m[(2, 1)],
            c2: m[(2, 2)],
            d1: m[(3, 0)],
            d2: m[(3, 3)],
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix4 {
        ComplexMatrix4::x_state(
            self.a1, self.a2, self.b1, self.b2, self.c1, self.c2, self.d1, self.d2,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix4 {
    base: ComplexMatrix4,
    correction: ComplexMatrix4,
    delta0_power: u8,
    diagnostics: DensityDiagnostics,
}

impl DensityMatrix4 {
    fn assemble(
        base: ComplexMatrix4,
        correction: ComplexMatrix4,
        delta0_power: u8,
        scale: f64,
    ) -> Self {
        let stripped = base + correction;
        let min_eigenvalue = hermitian_eigenvalues(&stripped.hermitian_part(), f64::INFINITY)
            .map(|ev| ev[0])
            .unwrap_or(f64::NAN);
        let perturbative_indicator = if delta0_power == 1 {
            scale / (2.0 * std::f64::consts::PI)
        } else {
            scale
        };
        let diagnostics = DensityDiagnostics {
            hermiticity_residual: stripped.hermiticity_residual(),
            trace_residual: (stripped.trace() - Complex64::new(1.0, 0.0)).norm(),
            min_eigenvalue,
            correction_scale: scale,
            perturbative_indicator,
            status: PerturbativeStatus::from_indicator(perturbative_indicator),
        };
        DensityMatrix4 {
            base,
            correction,
            delta0_power,
            diagnostics,
        }
    }

    /// `base + correction`, i.e. the matrix with `δ(0) = 1` when the
    /// corrections are distributional.
    pub fn matrix(&self) -> ComplexMatrix4 {
        self.base + self.correction
    }

    /// Alias of [`DensityMatrix4::matrix`] that names the eternal-mode reading.
    pub fn stripped(&self) -> ComplexMatrix4 {
        self.matrix()
    }

    /// `base + δ(0)^k · correction` for a concrete `δ(0)`.
    pub fn with_delta0(&self, delta0: f64) -> ComplexMatrix4 {
        self.base + self.correction * delta0.powi(self.delta0_power as i32)
    }

    pub fn base(&self) -> &ComplexMatrix4 {
        &self.base
    }
    pub fn correction(&self) -> &ComplexMatrix4 {
        &self.correction
    }
    pub fn delta0_power(&self) -> u8 {
        self.delta0_power
    }
    pub fn diagnostics(&self) -> &DensityDiagnostics {
        &self.diagnostics
    }

    pub fn elements(&self) -> XElements {
        XElements::from_matrix(&self.matrix())
    }
}

/// Rank-one projector on `α|g_A g_B⟩ + γ|e_A e_B⟩`.
pub fn initial_density(state: &InitialState) -> DensityMatrix4 {
    let (a, g) = (state.alpha, state.gamma);
    let base = ComplexMatrix4::from_real([
        [g * g, 0.0, 0.0, g * a],
        [0.0; 4],
        [0.0; 4],
        [a * g, 0.0, 0.0, a * a],
    ]);
    DensityMatrix4::assemble(base, ComplexMatrix4::zeros(), 0, 0.0)
}

/// Weight `C_i C_j` with which an integral enters the density matrix.
fn coupling_weight(name: IntegralName, pair: &DetectorPairConfig) -> f64 {
    let (ca, cb) = (pair.coupling_a, pair.coupling_b);
    match name {
        IntegralName::PA
        | IntegralName::PDdA
        | IntegralName::PBarA
        | IntegralName::PBarPrimeA
        | IntegralName::MReA => ca * ca,
        IntegralName::PB
        | IntegralName::PDdB
        | IntegralName::PBarB
        | IntegralName::PBarPrimeB
        | IntegralName::MReB => cb * cb,
        _ => ca * cb,
    }
}

fn set_power(ints: &IntegralSet) -> Result<u8, DensityError> {
    let distributional = ints.is_distributional();
    for (name, v) in ints.iter() {
        if distributional && !v.is_distributional() && v.coeff.norm() != 0.0 {
            return Err(DensityError::ModeMismatch(format!(
                "{name} is finite in a distributional set"
            )));
        }
    }
    Ok(u8::from(distributional))
}

/// The `O(C²)` matrix for real `α`, `γ`.
///
/// `b2` carries `P_AB`, the conjugate of the stored `P*_AB`; `ζ_AB` is read
/// from the `ξ_AB` slot.
pub fn evolved_density(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<DensityMatrix4, DensityError> {
    let power = set_power(ints)?;
    let (al, ga) = (state.alpha, state.gamma);
    let ag = al * ga;
    let (aa, gg) = (al * al, ga * ga);
    let (ca2, cb2, cab) = (
        pair.coupling_a * pair.coupling_a,
        pair.coupling_b * pair.coupling_b,
        pair.coupling_a * pair.coupling_b,
    );
    let i = ints;
    let p_a = i.p_a.coeff;
    let p_b = i.p_b.coeff;
    let pdd_a = i.p_dd_a.coeff;
    let pdd_b = i.p_dd_b.coeff;
    let m_a = i.m_re_a.coeff;
    let m_b = i.m_re_b.coeff;
    let zeta = i.xi_ab.coeff;
    let y = i.y_ab.coeff;
    let x = i.x_ab.coeff;
    let p_ab = i.p_ab_star.coeff.conj();
    let p_ab_star = i.p_ab_star.coeff;
    let pp_ab = i.p_ab_prime.coeff;
    let pbp_ab = i.p_bar_ab_prime.coeff;

    let da1 = -(pdd_a * (gg * ca2)) - pdd_b * (gg * cb2) - (zeta.conj() + zeta) * (ag * cab);
    let da2 = -(zeta * (aa * cab)) - y.conj() * (gg * cab) - m_a * (ag * ca2) - m_b * (ag * cb2);
    let db1 = p_a * (aa * ca2) + pdd_b * (gg * cb2) + (pp_ab + pp_ab.conj()) * (ag * cab);
    let db2 = i.p_bar_prime_a.coeff * (ag * ca2)
        + p_ab * (aa * cab)
        + x.conj() * (gg * cab)
        + i.p_bar_b.coeff * (ag * cb2);
    let dc1 = i.p_bar_a.coeff * (ag * ca2)
        + i.p_bar_prime_b.coeff * (ag * cb2)
        + x * (gg * cab)
        + p_ab_star * (aa * cab);
    let dc2 = pdd_a * (gg * ca2) + p_b * (aa * cb2) + (pbp_ab + pbp_ab.conj()) * (ag * cab);
    let dd1 = -(m_a.conj() * (ag * ca2))
        - m_b.conj() * (ag * cb2)
        - y * (gg * cab)
        - zeta.conj() * (aa * cab);
    let dd2 = -(p_a * (aa * ca2)) - p_b * (aa * cb2) - (y + y.conj()) * (ag * cab);

    let correction = ComplexMatrix4::x_state(da1, da2, db1, db2, dc1, dc2, dd1, dd2);
    let scale = ints
        .iter()
        .map(|(n, v)| coupling_weight(n, pair) * v.coeff.norm())
        .fold(0.0, f64::max);
    Ok(DensityMatrix4::assemble(
        *initial_density(state).base(),
        correction,
        power,
        scale,
    ))
}

/// [`evolved_density`] with the scenario's own couplings and state, checking
/// that the set's `δ(0)` bookkeeping matches the switching kind.
pub fn evolved_density_for(
    s: &ValidatedScenario,
    ints: &IntegralSet,
) -> Result<DensityMatrix4, DensityError> {
    if s.switching().is_eternal() != ints.is_distributional() {
        return Err(DensityError::ModeMismatch(format!(
            "{} switching with a {} integral set",
            s.switching().label(),
            if ints.is_distributional() {
                "distributional"
            } else {
                "finite"
            }
        )));
    }
    evolved_density(s.state(), s.pair(), ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::eternal_integral_set;
    use crate::model::*;

    fn bell_eternal(c: f64) -> (ValidatedScenario, IntegralSet) {
        let s = validate_config(
            DetectorPairConfig::new(1.0, c, c, 1.0),
            FieldSpec::default(),
            InitialState::bell(),
            SwitchingSpec::Eternal,
            UnitSystem::default(),
        )
        .unwrap();
        let ints = eternal_integral_set(&s).unwrap();
        (s, ints)
    }

    #[test]
    fn bell_initial_corners() {
        let rho = initial_density(&InitialState::bell());
        let e = rho.elements();
        for v in [e.a1, e.a2, e.d1, e.d2] {
            assert!((v.re - 0.5).abs() < 1e-15);
        }
        assert_eq!(e.b1, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn product_state_is_single_diagonal() {
        let rho = initial_density(&InitialState::new(1.0, 0.0));
        assert_eq!(rho.matrix(), ComplexMatrix4::diagonal([0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn zero_coupling_is_free_evolution() {
        let (s, ints) = bell_eternal(0.0);
        let rho = evolved_density_for(&s, &ints).unwrap();
        assert_eq!(rho.matrix(), initial_density(s.state()).matrix());
    }

    #[test]
    fn eternal_bell_entries() {
        let (s, ints) = bell_eternal(0.1);
        let rho = evolved_density_for(&s, &ints).unwrap();
        let d = XElements::from_matrix(rho.correction());
        // b1 = γ² C² P″, c2 the same, a1 = -γ² C² (P″_A + P″_B)
        assert!((d.b1.re - 0.0025).abs() < 1e-16);
        assert!((d.c2.re - 0.0025).abs() < 1e-16);
        assert!((d.a1.re + 0.005).abs() < 1e-16);
        assert_eq!(rho.delta0_power(), 1);
        assert!(rho.diagnostics().trace_residual < 1e-15);
        assert_eq!(rho.diagnostics().hermiticity_residual, 0.0);
        assert!(rho.matrix().is_x_shaped());
    }

    #[test]
    fn mode_mismatch_is_reported() {
        let (_, ints) = bell_eternal(0.1);
        let s = validate_config(
            DetectorPairConfig::new(1.0, 0.1, 0.1, 1.0),
            FieldSpec::default(),
            InitialState::bell(),
            SwitchingSpec::Gaussian { sigma: 1.0 },
            UnitSystem::default(),
        )
        .unwrap();
        assert!(matches!(
            evolved_density_for(&s, &ints),
            Err(DensityError::ModeMismatch(_))
        ));
    }

    #[test]
    fn status_thresholds() {
        assert_eq!(
            PerturbativeStatus::from_indicator(0.05),
            PerturbativeStatus::Ok
        );
        assert_eq!(
            PerturbativeStatus::from_indicator(0.5),
            PerturbativeStatus::Warning
        );
        assert_eq!(
            PerturbativeStatus::from_indicator(1.5),
            PerturbativeStatus::Invalid
        );
        assert_eq!(
            PerturbativeStatus::from_indicator(f64::NAN),
            PerturbativeStatus::Invalid
        );
    }
}
