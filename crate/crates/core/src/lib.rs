//! Entanglement degradation of two static Unruh–DeWitt detectors coupled to
//! a free scalar vacuum, to second order in the coupling.
//!
//! The pipeline runs [`model::validate_config`] → [`integrals::integral_set`]
//! → [`density::evolved_density`] → [`entanglement::analyze`]. Eternal
//! switching yields coefficients of the divergent `δ(0)` factor and hence
//! rates; Gaussian switching yields finite values.
//!
//! Basis order is `(e_A e_B, e_A g_B, g_A e_B, g_A g_B)` throughout.

pub mod density;
pub mod entanglement;
pub mod integrals;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod special;
pub mod sweep;
pub mod wightman;

pub use density::{
    evolved_density, evolved_density_for, initial_density, DensityMatrix4, PerturbativeStatus,
};
pub use entanglement::{analyze, EntanglementError, EntanglementReport, LeakageRates};
pub use integrals::{integral_set, IntegralName, IntegralSet, QuadratureSettings, RegulatedValue};
pub use model::{
    validate_config, ConfigError, DetectorPairConfig, FieldSpec, InitialState, SwitchingSpec,
    UnitSystem, ValidatedScenario,
};
pub use sweep::{evaluate, evaluate_all, Evaluation, ExecutionMode};
