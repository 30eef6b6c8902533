//! CSV and JSON emitters. Floats are written with 17 significant digits.

use std::fmt::Write;

use serde::Serialize;

use crate::{Execution, Format, RunRecord, SlopeFit};

pub const CSV_HEADER: &str =
    "mode,delta_e,mass,c,distance,coupling_a,coupling_b,alpha,gamma,sigma,\
initial_negativity,initial_concurrence,negativity_rate,concurrence_rate,negativity,concurrence,\
perturbative_ok,max_quad_error";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_row(r: &RunRecord) -> String {
    [
        r.mode.as_str().to_string(),
        num(r.delta_e),
        num(r.mass),
        num(r.c),
        num(r.distance),
        num(r.coupling_a),
        num(r.coupling_b),
        num(r.alpha),
        num(r.gamma),
        opt(r.sigma),
        num(r.initial_negativity),
        num(r.initial_concurrence),
        opt(r.negativity_rate),
        opt(r.concurrence_rate),
        opt(r.negativity),
        opt(r.concurrence),
        r.perturbative_ok.to_string(),
        num(r.max_quad_error),
    ]
    .join(",")
}

pub fn render_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(256 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", csv_row(r));
    }
    out
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    records: &'a [RunRecord],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    slope_fits: &'a [SlopeFit],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    failures: &'a [(usize, String)],
}

pub fn render_json(exec: &Execution) -> String {
    let doc = JsonDocument {
        records: &exec.records,
        slope_fits: &exec.slope_fits,
        failures: &exec.failures,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("records serialize");
    s.push('\n');
    s
}

pub fn render(format: Format, exec: &Execution) -> String {
    match format {
        Format::Csv => render_csv(&exec.records),
        Format::Json => render_json(exec),
    }
}
