//! Negativity, concurrence and their leakage rates.
//!
//! Every quantity has two routes: closed forms built from the X-state
//! entries (or directly from the integrals), and numeric oracles that run
//! the Jacobi eigensolver on the assembled matrix. Reports carry both and
//! the largest disagreement between them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{
    evolved_density, initial_density, DensityError, DensityMatrix4, PerturbativeStatus, XElements,
};
use crate::integrals::{rate, IntegralError, IntegralSet, RegulatedValue};
use crate::linalg::{hermitian_eigenvalues, partial_transpose_b, wootters_lambdas, LinalgError};
use crate::model::{DetectorPairConfig, InitialState, ValidatedScenario};
use crate::quad::extrapolate_to_zero;

/// Hermiticity tolerance handed to the eigensolvers.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative slack on the `|X_AB| ≤ sqrt(P_A″ P_B″)` branch condition.
pub const BRANCH_TOL: f64 = 1e-12;
/// Largest `C² · coeff` reached by the coupling ladder of the numeric rates.
const LADDER_TOP: f64 = 1e-3;
const LADDER_STEPS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error("|X_AB| = {x:e} exceeds sqrt(P_A'' P_B'') = {bound:e}")]
    BranchViolation { x: f64, bound: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenList {
    pub values: [f64; 4],
    pub provenance: Provenance,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `Σ|λ|` over the negative eigenvalues of `ρ^{T_B}` and the ascending
/// eigenvalues themselves. Distributional matrices are read stripped.
pub fn negativity_numeric(rho: &DensityMatrix4) -> Result<(f64, [f64; 4]), EntanglementError> {
    let pt = partial_transpose_b(&rho.matrix());
    let ev = hermitian_eigenvalues(&pt, HERMITIAN_TOL)?;
    let n = ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    Ok((n, ev))
}

/// Closed-form partial-transpose spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtEigenvalues {
    /// 2×2-block eigenvalues `(λ₁, λ₂, λ₃, λ₄)`.
    pub exact: [f64; 4],
    /// `O(C²)` expansion of the same four.
    pub expanded: [f64; 4],
    /// Index (0 for `λ₁`, 1 for `λ₂`) of the eigenvalue that turns negative.
    pub negative_index: usize,
}

impl PtEigenvalues {
    pub fn negativity_exact(&self) -> f64 {
        self.exact.iter().filter(|&&x| x < 0.0).map(|x| -x).sum()
    }

    pub fn negativity_expanded(&self) -> f64 {
        (-self.expanded[self.negative_index]).max(0.0)
    }
}

/// Inner block `[[b1, a2], [d1, c2]]` gives `λ₁,₂`, labelled so that `λ₂` is
/// the negative one when `αγ > 0` and `λ₁` when `αγ < 0`. Outer block
/// `[[a1, b2], [c1, d2]]` gives `λ₃ ≈ a1` and `λ₄ ≈ d2`.
pub fn pt_eigenvalues_closed(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<PtEigenvalues, EntanglementError> {
    let e = evolved_density(state, pair, ints)?.elements();
    let ag = state.alpha_gamma();
    let s = sgn(ag);

    let (b1, c2) = (e.b1.re, e.c2.re);
    let inner = ((b1 - c2).powi(2) + 4.0 * e.a2.norm_sqr()).sqrt();
    let l1 = 0.5 * (b1 + c2) + 0.5 * s * inner;
    let l2 = 0.5 * (b1 + c2) - 0.5 * s * inner;

    let (a1, d2) = (e.a1.re, e.d2.re);
    let outer = ((a1 - d2).powi(2) + 4.0 * e.b2.norm_sqr()).sqrt();
    let (hi, lo) = (0.5 * (a1 + d2) + 0.5 * outer, 0.5 * (a1 + d2) - 0.5 * outer);
    let (l3, l4) = if a1 >= d2 { (hi, lo) } else { (lo, hi) };

    let (al, ga) = (state.alpha, state.gamma);
    let (ca2, cb2, cab) = (
        pair.coupling_a * pair.coupling_a,
        pair.coupling_b * pair.coupling_b,
        pair.coupling_a * pair.coupling_b,
    );
    let i = ints;
    let half_sum = 0.5
        * (ca2 * (al * al * i.p_a.re() + ga * ga * i.p_dd_a.re())
            + cb2 * (al * al * i.p_b.re() + ga * ga * i.p_dd_b.re()))
        + ag * cab * (i.p_ab_prime.re() + i.p_bar_ab_prime.re());
    let shift = cab * (al * al * i.xi_ab.re() + ga * ga * i.y_ab.re())
        + ag * (ca2 * i.m_re_a.re() + cb2 * i.m_re_b.re());
    let e1 = half_sum + (ag - shift);
    let e2 = half_sum - (ag - shift);
    let e3 =
        ga * ga * (1.0 - ca2 * i.p_dd_a.re() - cb2 * i.p_dd_b.re()) - 2.0 * ag * cab * i.xi_ab.re();
    let e4 = al * al * (1.0 - ca2 * i.p_a.re() - cb2 * i.p_b.re()) - 2.0 * ag * cab * i.y_ab.re();

    Ok(PtEigenvalues {
        exact: [l1, l2, l3, l4],
        expanded: [e1, e2, e3, e4],
        negative_index: if ag < 0.0 { 0 } else { 1 },
    })
}

/// `max(0, λ′₁ - λ′₂ - λ′₃ - λ′₄)` for a descending list.
pub fn wootters_combination(l: &[f64; 4]) -> f64 {
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Concurrence and the descending Wootters `λ′` of the (stripped) matrix.
pub fn concurrence_numeric(rho: &DensityMatrix4) -> Result<(f64, [f64; 4]), EntanglementError> {
    let l = wootters_lambdas(&rho.matrix(), HERMITIAN_TOL)?;
    Ok((wootters_combination(&l), l))
}

/// Closed-form Wootters values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceClosed {
    /// `(λ′₁, λ′₂, λ′₃, λ′₄)` from the `O(C²)` expansion, with `λ′₂ = 0`.
    pub expanded: [f64; 4],
    /// The X-state values `|a2| ± sqrt(a1 d2)` and `sqrt(b1 c2) ± |b2|`,
    /// descending.
    pub exact: [f64; 4],
    /// Concurrence from the expanded list.
    pub concurrence: f64,
    /// Concurrence from the exact list.
    pub concurrence_exact: f64,
}

/// `λ′₁ = 2|αγ|(1 - Σ C_j² Re M_j / 2 - Σ C_j² P_j″ / 4)`, `λ′₂ = 0`,
/// `λ′₃,₄ = C_A C_B γ² (sqrt(P_A″ P_B″) ± |X_AB|)`.
///
/// The expansion keeps only the entries that survive eternal switching; the
/// exact list uses every entry.
pub fn concurrence_closed(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<ConcurrenceClosed, EntanglementError> {
    let (ca2, cb2, cab) = (
        pair.coupling_a * pair.coupling_a,
        pair.coupling_b * pair.coupling_b,
        pair.coupling_a * pair.coupling_b,
    );
    let i = ints;
    let ag = state.alpha_gamma().abs();
    let gg = state.gamma * state.gamma;
    let pdd = (i.p_dd_a.re() * i.p_dd_b.re()).max(0.0).sqrt();
    let x = i.x_ab.coeff.norm();
    let slack =
        BRANCH_TOL * pdd.max(x) + i.x_ab.abs_error + i.p_dd_a.abs_error.max(i.p_dd_b.abs_error);
    if x > pdd + slack {
        return Err(EntanglementError::BranchViolation { x, bound: pdd });
    }
    let l1 = 2.0
        * ag
        * (1.0
            - 0.5 * (ca2 * i.m_re_a.re() + cb2 * i.m_re_b.re())
            - 0.25 * (ca2 * i.p_dd_a.re() + cb2 * i.p_dd_b.re()));
    let l3 = cab * gg * (pdd + x);
    let l4 = (cab * gg * (pdd - x)).max(0.0);
    let expanded = [l1, 0.0, l3, l4];

    let e = evolved_density(state, pair, ints)?.elements();
    let outer = (e.a1.re * e.d2.re).max(0.0).sqrt();
    let inner = (e.b1.re * e.c2.re).max(0.0).sqrt();
    let (a2, b2) = (e.a2.norm(), e.b2.norm());
    let mut exact = [
        a2 + outer,
        (a2 - outer).abs(),
        inner + b2,
        (inner - b2).abs(),
    ];
    exact.sort_by(|a, b| b.total_cmp(a));

    let mut sorted = expanded;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok(ConcurrenceClosed {
        expanded,
        exact,
        concurrence: wootters_combination(&sorted),
        concurrence_exact: wootters_combination(&exact),
    })
}

/// Stripped `O(C²)` deficits of negativity and concurrence for eternal
/// switching; both multiply `δ(0)`.
fn eternal_deficits(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<(RegulatedValue, RegulatedValue), EntanglementError> {
    if !ints.is_distributional() {
        return Err(IntegralError::NotDistributional.into());
    }
    let (ca2, cb2, cab) = (
        pair.coupling_a * pair.coupling_a,
        pair.coupling_b * pair.coupling_b,
        pair.coupling_a * pair.coupling_b,
    );
    let i = ints;
    let ag = state.alpha_gamma().abs();
    let gg = state.gamma * state.gamma;
    let sum_m = ca2 * i.m_re_a.re() + cb2 * i.m_re_b.re();
    let sum_pdd = ca2 * i.p_dd_a.re() + cb2 * i.p_dd_b.re();
    let pdd = (i.p_dd_a.re() * i.p_dd_b.re()).max(0.0).sqrt();
    let negativity = 0.5 * gg * sum_pdd + ag * sum_m;
    let concurrence = 2.0 * ag * (0.5 * sum_m + 0.25 * sum_pdd) + 2.0 * cab * gg * pdd;
    Ok((
        RegulatedValue::distributional(negativity),
        RegulatedValue::distributional(concurrence),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageRates {
    pub negativity_rate: f64,
    pub concurrence_rate: f64,
}

/// `δṄ = [½γ² Σ C_j² P_j″ + |αγ| Σ C_j² Re M_j] / 2π` and
/// `δĊ = [|αγ| Σ C_j² (Re M_j + P_j″/2) + 2 C_A C_B γ² sqrt(P_A″ P_B″)] / 2π`.
pub fn leakage_rates(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<LeakageRates, EntanglementError> {
    let (n, c) = eternal_deficits(state, pair, ints)?;
    Ok(LeakageRates {
        negativity_rate: rate(n)?.re,
        concurrence_rate: rate(c)?.re,
    })
}

/// Rates from the eigensolver alone: the stripped matrix is rebuilt with
/// couplings scaled by `sqrt(s)` on a short ladder of `s`, the numeric
/// deficits divided by `s` are extrapolated to `s → 0`, and the slope is
/// divided by `2π`.
pub fn leakage_rates_numeric(
    state: &InitialState,
    pair: &DetectorPairConfig,
    ints: &IntegralSet,
) -> Result<LeakageRates, EntanglementError> {
    if !ints.is_distributional() {
        return Err(IntegralError::NotDistributional.into());
    }
    let base = initial_density(state);
    let (n0, _) = negativity_numeric(&base)?;
    let (c0, _) = concurrence_numeric(&base)?;
    let scale = evolved_density(state, pair, ints)?
        .diagnostics()
        .correction_scale;
    if scale == 0.0 {
        return Ok(LeakageRates {
            negativity_rate: 0.0,
            concurrence_rate: 0.0,
        });
    }
    let s0 = LADDER_TOP / (scale * LADDER_STEPS as f64);
    let mut xs = Vec::with_capacity(LADDER_STEPS);
    let mut dn = Vec::with_capacity(LADDER_STEPS);
    let mut dc = Vec::with_capacity(LADDER_STEPS);
    for k in 1..=LADDER_STEPS {
        let s = s0 * k as f64;
        let rho = evolved_density(state, &pair.scaled_couplings(s.sqrt()), ints)?;
        let (n, _) = negativity_numeric(&rho)?;
        let (c, _) = concurrence_numeric(&rho)?;
        xs.push(s);
        dn.push((n0 - n) / s);
        dc.push((c0 - c) / s);
    }
    let n = extrapolate_to_zero(&xs, &dn).value;
    let c = extrapolate_to_zero(&xs, &dc).value;
    Ok(LeakageRates {
        negativity_rate: n / (2.0 * PI),
        concurrence_rate: c / (2.0 * PI),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub initial_negativity: f64,
    pub initial_concurrence: f64,
    pub pt_eigenvalues: Vec<EigenList>,
    pub wootters_lambdas: Vec<EigenList>,
    /// Index of the negative PT eigenvalue (0 for `λ₁`, 1 for `λ₂`).
    pub negative_index: usize,
    /// Finite-time values; absent for eternal switching.
    pub negativity: Option<f64>,
    pub concurrence: Option<f64>,
    /// Per-unit-time rates; present for eternal switching only.
    pub negativity_rate: Option<f64>,
    pub concurrence_rate: Option<f64>,
    pub shielded: bool,
    /// Largest closed-form versus numeric discrepancy.
    pub agreement: f64,
    pub perturbative_indicator: f64,
    pub perturbative: PerturbativeStatus,
    pub elements: XElements,
}

fn max_diff(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ascending(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(f64::total_cmp);
    v
}

/// Full pipeline for one scenario and its integrals.
pub fn analyze(
    s: &ValidatedScenario,
    ints: &IntegralSet,
) -> Result<EntanglementReport, EntanglementError> {
    let (state, pair) = (s.state(), s.pair());
    let rho = crate::density::evolved_density_for(s, ints)?;
    let (n_num, pt_num) = negativity_numeric(&rho)?;
    let (c_num, w_num) = concurrence_numeric(&rho)?;
    let pt = pt_eigenvalues_closed(state, pair, ints)?;
    let cc = concurrence_closed(state, pair, ints)?;

    let mut agreement = max_diff(&ascending(pt.exact), &pt_num).max(max_diff(&cc.exact, &w_num));
    let ag = state.alpha_gamma().abs();

    let (negativity, concurrence, negativity_rate, concurrence_rate) = if rho.delta0_power() == 1 {
        let closed = leakage_rates(state, pair, ints)?;
        let numeric = leakage_rates_numeric(state, pair, ints)?;
        agreement = agreement
            .max((closed.negativity_rate - numeric.negativity_rate).abs())
            .max((closed.concurrence_rate - numeric.concurrence_rate).abs());
        (
            None,
            None,
            Some(closed.negativity_rate),
            Some(closed.concurrence_rate),
        )
    } else {
        agreement = agreement
            .max((pt.negativity_exact() - n_num).abs())
            .max((cc.concurrence_exact - c_num).abs());
        (Some(n_num.max(0.0)), Some(c_num.max(0.0)), None, None)
    };

    Ok(EntanglementReport {
        initial_negativity: ag,
        initial_concurrence: 2.0 * ag,
        pt_eigenvalues: vec![
            EigenList {
                values: pt.exact,
                provenance: Provenance::ClosedForm,
            },
            EigenList {
                values: pt_num,
                provenance: Provenance::Numeric,
            },
        ],
        wootters_lambdas: vec![
            EigenList {
                values: cc.exact,
                provenance: Provenance::ClosedForm,
            },
            EigenList {
                values: w_num,
                provenance: Provenance::Numeric,
            },
        ],
        negative_index: pt.negative_index,
        negativity,
        concurrence,
        negativity_rate,
        concurrence_rate,
        shielded: pair.coupling_a == 0.0 || pair.coupling_b == 0.0,
        agreement,
        perturbative_indicator: rho.diagnostics().perturbative_indicator,
        perturbative: rho.diagnostics().status,
        elements: rho.elements(),
    })
}
