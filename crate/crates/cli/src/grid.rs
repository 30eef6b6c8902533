//! `--sweep name=start:stop:steps` specs and their Cartesian product.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DeltaE,
    Mass,
    Distance,
    CouplingA,
    CouplingB,
    Alpha,
    Sigma,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::DeltaE => "delta_e",
            SweepParam::Mass => "mass",
            SweepParam::Distance => "distance",
            SweepParam::CouplingA => "coupling_a",
            SweepParam::CouplingB => "coupling_b",
            SweepParam::Alpha => "alpha",
            SweepParam::Sigma => "sigma",
        }
    }
}

impl FromStr for SweepParam {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.replace('-', "_").as_str() {
            "delta_e" => SweepParam::DeltaE,
            "mass" => SweepParam::Mass,
            "distance" => SweepParam::Distance,
            "coupling_a" => SweepParam::CouplingA,
            "coupling_b" => SweepParam::CouplingB,
            "alpha" => SweepParam::Alpha,
            "sigma" => SweepParam::Sigma,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One swept parameter: `steps` evenly spaced values from `start` to `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn parse(token: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Parse {
            token: token.to_string(),
            message: why.to_string(),
        };
        let (name, range) = token
            .split_once('=')
            .ok_or_else(|| bad("expected name=start:stop:steps"))?;
        let param: SweepParam = name.trim().parse().map_err(|_| {
            bad("unknown sweep parameter (use delta_e, mass, distance, coupling_a, coupling_b, alpha or sigma)")
        })?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected name=start:stop:steps"));
        }
        let start: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| bad("start is not a number"))?;
        let stop: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad("stop is not a number"))?;
        let steps: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("steps is not a positive integer"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(bad("start and stop must be finite"));
        }
        if steps < 1 {
            return Err(bad("steps must be at least 1"));
        }
        if start > stop {
            return Err(bad("start must not exceed stop"));
        }
        Ok(SweepSpec {
            param,
            start,
            stop,
            steps,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / n
                }
            })
            .collect()
    }
}

/// Cartesian product with the first spec varying slowest.
pub fn cartesian(specs: &[SweepSpec]) -> Vec<Vec<(SweepParam, f64)>> {
    let mut points = vec![Vec::new()];
    for spec in specs {
        let values = spec.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((spec.param, v));
                    q
                })
            })
            .collect();
    }
    points
}
