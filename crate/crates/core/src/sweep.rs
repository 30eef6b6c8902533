//! Evaluation of many scenarios, data-parallel when the `parallel` feature
//! is enabled. Results always come back in input order.

use serde::{Deserialize, Serialize};

use crate::entanglement::{analyze, EntanglementError, EntanglementReport};
use crate::integrals::{integral_set, IntegralSet, QuadratureSettings};
use crate::model::ValidatedScenario;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    /// Rayon when compiled with `parallel`, otherwise the same as `Sequential`.
    #[default]
    Parallel,
    Sequential,
}

impl ExecutionMode {
    /// Whether `Parallel` actually runs on a thread pool in this build.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `items.iter().map(f)` with order preserved.
pub fn map_ordered<T, R, F>(items: &[T], mode: ExecutionMode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecutionMode::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub integrals: IntegralSet,
    pub report: EntanglementReport,
}

/// Integrals followed by the entanglement analysis.
pub fn evaluate(
    s: &ValidatedScenario,
    quad: &QuadratureSettings,
) -> Result<Evaluation, EntanglementError> {
    let integrals = integral_set(s, quad)?;
    let report = analyze(s, &integrals)?;
    Ok(Evaluation { integrals, report })
}

pub fn evaluate_all(
    scenarios: &[ValidatedScenario],
    quad: &QuadratureSettings,
    mode: ExecutionMode,
) -> Vec<Result<Evaluation, EntanglementError>> {
    map_ordered(scenarios, mode, |s| evaluate(s, quad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_kept() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map_ordered(&xs, ExecutionMode::Sequential, |x| x * x);
        let par = map_ordered(&xs, ExecutionMode::Parallel, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(par[999], 998_001);
    }
}
