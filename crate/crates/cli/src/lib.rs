//! Front end for `udleak`: argument and config-file parsing, grid
//! expansion, execution and CSV/JSON emission.

mod grid;
mod output;
mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use udleak_core::density::PerturbativeStatus;
use udleak_core::entanglement::EntanglementReport;
use udleak_core::integrals::{IntegralError, IntegralSet, QuadratureSettings, DEFAULT_EPSILONS};
use udleak_core::sweep::{map_ordered, ExecutionMode};
use udleak_core::{
    evaluate, validate_config, ConfigError, DetectorPairConfig, EntanglementError, FieldSpec,
    InitialState, SwitchingSpec, UnitSystem, ValidatedScenario,
};

pub use grid::{cartesian, SweepParam, SweepSpec};
pub use output::{render, render_csv, render_json, CSV_HEADER};
pub use validate::{PointValidation, SlopeFit};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_NUMERICS: u8 = 2;
pub const EXIT_STRICT: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{token}: {message}")]
    Parse { token: String, message: String },
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("grid point {index}: {source}")]
    Config { index: usize, source: ConfigError },
    #[error("cannot read config file {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            _ => EXIT_PARSE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Eternal,
    Gaussian,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Eternal => "eternal",
            Mode::Gaussian => "gaussian",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn parse_gamma_sign(s: &str) -> Result<bool, String> {
    match s {
        "+" | "plus" | "positive" => Ok(true),
        "-" | "−" | "minus" | "negative" => Ok(false),
        _ => Err(format!("expected + or -, got {s}")),
    }
}

/// Raw command line; every value is optional so a config file can fill gaps.
#[derive(Parser, Debug, Clone, Default)]
#[command(
    name = "udleak",
    version,
    about = "Entanglement leakage of two static detectors in a scalar vacuum"
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Detector energy gap ΔE.
    #[arg(long = "delta-e", allow_negative_numbers = true)]
    pub delta_e: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Detector separation d.
    #[arg(long, allow_negative_numbers = true)]
    pub distance: Option<f64>,
    #[arg(long = "coupling-a", allow_negative_numbers = true)]
    pub coupling_a: Option<f64>,
    #[arg(long = "coupling-b", allow_negative_numbers = true)]
    pub coupling_b: Option<f64>,
    /// Ground-pair amplitude; γ = ±sqrt(1 - α²).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long = "gamma-sign", value_parser = parse_gamma_sign, allow_hyphen_values = true)]
    pub gamma_sign: Option<bool>,
    /// Gaussian switching width.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long = "c-light", allow_negative_numbers = true)]
    pub c_light: Option<f64>,
    /// Smallest iε regulator; the ladder is 8ε, 4ε, 2ε, ε.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long = "p-max", allow_negative_numbers = true)]
    pub p_max: Option<f64>,
    #[arg(long = "quad-tol", allow_negative_numbers = true)]
    pub quad_tol: Option<f64>,
    /// name=start:stop:steps, repeatable.
    #[arg(long)]
    pub sweep: Vec<String>,
    /// Decouple detector B.
    #[arg(long = "shield-b")]
    pub shield_b: bool,
    /// Cross-check every point against the numeric oracles.
    #[arg(long)]
    pub validate: bool,
    /// Exit 3 if any point is outside the perturbative regime.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// key = value file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const VALUE_KEYS: [&str; 15] = [
    "mode",
    "delta-e",
    "mass",
    "distance",
    "coupling-a",
    "coupling-b",
    "alpha",
    "gamma-sign",
    "sigma",
    "c-light",
    "epsilon",
    "p-max",
    "quad-tol",
    "format",
    "output",
];
const SWITCH_KEYS: [&str; 3] = ["shield-b", "validate", "strict"];

/// Parses a config file body into [`Args`].
pub fn parse_config(text: &str) -> Result<Args, CliError> {
    let mut tokens: Vec<String> = vec!["udleak".into()];
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| CliError::Parse {
            token: line.to_string(),
            message: message.to_string(),
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected key = value"))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "sweep" || VALUE_KEYS.contains(&key.as_str()) {
            tokens.push(format!("--{key}"));
            tokens.push(value.to_string());
        } else if SWITCH_KEYS.contains(&key.as_str()) {
            match value {
                "true" | "yes" | "1" => tokens.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => return Err(bad("expected true or false")),
            }
        } else {
            return Err(CliError::Parse {
                token: key,
                message: "unknown config key".into(),
            });
        }
    }
    Ok(Args::try_parse_from(tokens)?)
}

fn merge(cli: Args, file: Args) -> Args {
    Args {
        mode: cli.mode.or(file.mode),
        delta_e: cli.delta_e.or(file.delta_e),
        mass: cli.mass.or(file.mass),
        distance: cli.distance.or(file.distance),
        coupling_a: cli.coupling_a.or(file.coupling_a),
        coupling_b: cli.coupling_b.or(file.coupling_b),
        alpha: cli.alpha.or(file.alpha),
        gamma_sign: cli.gamma_sign.or(file.gamma_sign),
        sigma: cli.sigma.or(file.sigma),
        c_light: cli.c_light.or(file.c_light),
        epsilon: cli.epsilon.or(file.epsilon),
        p_max: cli.p_max.or(file.p_max),
        quad_tol: cli.quad_tol.or(file.quad_tol),
        sweep: if cli.sweep.is_empty() {
            file.sweep
        } else {
            cli.sweep
        },
        shield_b: cli.shield_b || file.shield_b,
        validate: cli.validate || file.validate,
        strict: cli.strict || file.strict,
        format: cli.format.or(file.format),
        output: cli.output.or(file.output),
        config: cli.config,
    }
}

/// Scalar parameters shared by every grid point before sweeps apply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaseParams {
    pub delta_e: f64,
    pub mass: f64,
    pub distance: f64,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub alpha: f64,
    pub gamma_positive: bool,
    pub sigma: Option<f64>,
    pub c: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        BaseParams {
            delta_e: 1.0,
            mass: 0.0,
            distance: 1.0,
            coupling_a: 0.1,
            coupling_b: 0.1,
            alpha: std::f64::consts::FRAC_1_SQRT_2,
            gamma_positive: true,
            sigma: None,
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub mode: Mode,
    pub base: BaseParams,
    pub sweeps: Vec<SweepSpec>,
    pub shield_b: bool,
    pub validate: bool,
    pub strict: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub quad: QuadratureSettings,
    /// Validated scenarios in grid order.
    pub points: Vec<ValidatedScenario>,
}

fn scenario_at(
    mode: Mode,
    base: &BaseParams,
    assignment: &[(SweepParam, f64)],
    shield_b: bool,
) -> Result<ValidatedScenario, ConfigError> {
    let mut p = *base;
    for &(param, v) in assignment {
        match param {
            SweepParam::DeltaE => p.delta_e = v,
            SweepParam::Mass => p.mass = v,
            SweepParam::Distance => p.distance = v,
            SweepParam::CouplingA => p.coupling_a = v,
            SweepParam::CouplingB => p.coupling_b = v,
            SweepParam::Alpha => p.alpha = v,
            SweepParam::Sigma => p.sigma = Some(v),
        }
    }
    if shield_b {
        p.coupling_b = 0.0;
    }
    let switching = match mode {
        Mode::Eternal => SwitchingSpec::Eternal,
        Mode::Gaussian => SwitchingSpec::Gaussian {
            sigma: p.sigma.unwrap_or(f64::NAN),
        },
    };
    validate_config(
        DetectorPairConfig::new(p.delta_e, p.coupling_a, p.coupling_b, p.distance),
        FieldSpec { mass: p.mass },
        InitialState::from_alpha(p.alpha, p.gamma_positive),
        switching,
        UnitSystem { c: p.c },
    )
}

/// Parses `argv` (program name first) and any `--config` file into a plan.
pub fn parse_args<I, T>(argv: I) -> Result<RunPlan, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Args::try_parse_from(argv)?;
    let args = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                path: path.clone(),
                source,
            })?;
            merge(cli.clone(), parse_config(&text)?)
        }
        None => cli,
    };

    let mode = args.mode.unwrap_or(Mode::Eternal);
    let d = BaseParams::default();
    let base = BaseParams {
        delta_e: args.delta_e.unwrap_or(d.delta_e),
        mass: args.mass.unwrap_or(d.mass),
        distance: args.distance.unwrap_or(d.distance),
        coupling_a: args.coupling_a.unwrap_or(d.coupling_a),
        coupling_b: args.coupling_b.unwrap_or(d.coupling_b),
        alpha: args.alpha.unwrap_or(d.alpha),
        gamma_positive: args.gamma_sign.unwrap_or(d.gamma_positive),
        sigma: args.sigma,
        c: args.c_light.unwrap_or(d.c),
    };
    let sweeps = args
        .sweep
        .iter()
        .map(|s| SweepSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma_swept = sweeps.iter().any(|s| s.param == SweepParam::Sigma);
    match mode {
        Mode::Gaussian if base.sigma.is_none() && !sigma_swept => {
            return Err(CliError::Parse {
                token: "sigma".into(),
                message: "gaussian mode needs --sigma".into(),
            });
        }
        Mode::Eternal if sigma_swept => {
            let token = args
                .sweep
                .iter()
                .find(|s| s.trim_start().starts_with("sigma"))
                .cloned()
                .unwrap_or_default();
            return Err(CliError::Parse {
                token,
                message: "sigma can only be swept in gaussian mode".into(),
            });
        }
        _ => {}
    }

    let mut quad = QuadratureSettings::default();
    if let Some(eps) = args.epsilon {
        let smallest = DEFAULT_EPSILONS[DEFAULT_EPSILONS.len() - 1];
        quad.epsilons = DEFAULT_EPSILONS
            .iter()
            .map(|e| e / smallest * eps)
            .collect();
    }
    quad.p_max = args.p_max;
    if let Some(tol) = args.quad_tol {
        quad.tol = tol;
    }
    quad.validate().map_err(|e| CliError::Parse {
        token: "quadrature settings".into(),
        message: e.to_string(),
    })?;

    let points = cartesian(&sweeps)
        .iter()
        .enumerate()
        .map(|(index, a)| {
            scenario_at(mode, &base, a, args.shield_b)
                .map_err(|source| CliError::Config { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RunPlan {
        mode,
        base,
        sweeps,
        shield_b: args.shield_b,
        validate: args.validate,
        strict: args.strict,
        format: args.format.unwrap_or_default(),
        output: args.output,
        quad,
        points,
    })
}

/// One output row: the scenario, its report and diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub index: usize,
    pub mode: Mode,
    pub delta_e: f64,
    pub mass: f64,
    pub c: f64,
    pub distance: f64,
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: Option<f64>,
    pub initial_negativity: f64,
    pub initial_concurrence: f64,
    pub negativity_rate: Option<f64>,
    pub concurrence_rate: Option<f64>,
    pub negativity: Option<f64>,
    pub concurrence: Option<f64>,
    pub perturbative_ok: bool,
    pub perturbative: PerturbativeStatus,
    pub max_quad_error: f64,
    pub report: EntanglementReport,
    pub integrals: IntegralSet,
    pub validation: Option<PointValidation>,
}

fn record(
    index: usize,
    mode: Mode,
    s: &ValidatedScenario,
    integrals: IntegralSet,
    report: EntanglementReport,
) -> RunRecord {
    RunRecord {
        index,
        mode,
        delta_e: s.pair().delta_e,
        mass: s.field().mass,
        c: s.units().c,
        distance: s.pair().distance,
        coupling_a: s.pair().coupling_a,
        coupling_b: s.pair().coupling_b,
        alpha: s.state().alpha,
        gamma: s.state().gamma,
        sigma: s.switching().sigma(),
        initial_negativity: report.initial_negativity,
        initial_concurrence: report.initial_concurrence,
        negativity_rate: report.negativity_rate,
        concurrence_rate: report.concurrence_rate,
        negativity: report.negativity,
        concurrence: report.concurrence,
        perturbative_ok: report.perturbative == PerturbativeStatus::Ok,
        perturbative: report.perturbative,
        max_quad_error: integrals.max_abs_error(),
        report,
        integrals,
        validation: None,
    }
}

#[derive(Debug, Default)]
pub struct Execution {
    pub records: Vec<RunRecord>,
    /// `(grid index, message)` for points that could not be evaluated.
    pub failures: Vec<(usize, String)>,
    pub slope_fits: Vec<SlopeFit>,
}

impl Execution {
    pub fn validation_failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .records
            .iter()
            .filter_map(|r| {
                r.validation
                    .as_ref()
                    .filter(|v| !v.passed)
                    .map(|v| format!("point {}: {}", r.index, v.detail))
            })
            .collect();
        out.extend(
            self.slope_fits
                .iter()
                .filter(|f| !f.passed)
                .map(|f| f.to_string()),
        );
        out
    }

    pub fn exit_code(&self, plan: &RunPlan) -> u8 {
        if !self.failures.is_empty() || !self.validation_failures().is_empty() {
            EXIT_NUMERICS
        } else if plan.strict
            && self
                .records
                .iter()
                .any(|r| r.perturbative == PerturbativeStatus::Invalid)
        {
            EXIT_STRICT
        } else {
            EXIT_OK
        }
    }
}

fn failure_message(e: &EntanglementError) -> String {
    match e {
        EntanglementError::Integral(IntegralError::QuadratureNonConvergence { entry, source }) => {
            format!("quadrature did not converge for {entry}: {source}")
        }
        other => other.to_string(),
    }
}

/// Evaluates every grid point; results stay in grid order.
pub fn execute(plan: &RunPlan) -> Execution {
    let indices: Vec<usize> = (0..plan.points.len()).collect();
    let results = map_ordered(&indices, ExecutionMode::Parallel, |&i| {
        let s = &plan.points[i];
        let eval = evaluate(s, &plan.quad).map_err(|e| failure_message(&e))?;
        let mut rec = record(i, plan.mode, s, eval.integrals, eval.report);
        if plan.validate {
            rec.validation =
                Some(validate::check_point(s, &rec, &plan.quad).map_err(|e| failure_message(&e))?);
        }
        Ok::<_, String>(rec)
    });
    let mut exec = Execution::default();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => exec.records.push(rec),
            Err(msg) => exec.failures.push((i, msg)),
        }
    }
    if plan.validate && plan.mode == Mode::Gaussian {
        exec.slope_fits = validate::slope_fits(&plan.points, &exec.records);
    }
    exec
}

/// Executes a plan, writes the output and returns the process exit code.
pub fn run_plan(plan: &RunPlan) -> u8 {
    let exec = execute(plan);
    for (i, msg) in &exec.failures {
        eprintln!("error: grid point {i}: {msg}");
    }
    for msg in exec.validation_failures() {
        eprintln!("validation failed: {msg}");
    }
    for fit in &exec.slope_fits {
        eprintln!("{fit}");
    }
    let text = render(plan.format, &exec);
    let written = match &plan.output {
        Some(path) => fs::write(path, text.as_bytes()),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_NUMERICS;
    }
    let code = exec.exit_code(plan);
    if code == EXIT_STRICT {
        eprintln!(
            "error: perturbative indicator above {} at some grid points",
            udleak_core::density::PERTURBATIVE_LIMIT
        );
    }
    code
}
