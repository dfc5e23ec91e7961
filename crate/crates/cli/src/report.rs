//! The JSON document every command prints.

use std::time::Instant;

use diverse_cq_core::optimize::{DiverseResult, Score};
use diverse_cq_core::rational::format_rational;
use diverse_cq_core::{Rational, Tuple};
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::InputDigest;

pub const THREADS_VAR: &str = "DIVERSE_CQ_THREADS";

#[derive(Debug, Serialize)]
pub struct Timing {
    pub phase: String,
    pub millis: f64,
}

/// Everything a run reports. `payload` depends only on the inputs and the
/// seed; `timings` vary between runs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub threads: usize,
    pub payload: Value,
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: Vec::new(),
            seed,
            threads: threads(),
            payload: Value::Null,
            timings: Vec::new(),
        }
    }
}

/// The worker cap from the environment. Every computation runs on one
/// thread, which any cap allows.
pub fn threads() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(1)
}

/// Records the wall time of named phases.
#[derive(Debug, Default)]
pub struct Timer {
    pub timings: Vec<Timing>,
}

impl Timer {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing {
            phase: phase.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

pub fn tuple_json(t: &Tuple) -> Value {
    Value::Array(t.values.iter().map(|v| Value::String(v.to_string())).collect())
}

pub fn tuples_json(ts: &[Tuple]) -> Value {
    Value::Array(ts.iter().map(tuple_json).collect())
}

/// A score as an exact string plus its floating value.
pub trait ScoreJson: Score {
    fn exact(&self) -> Value;
}

impl ScoreJson for Rational {
    fn exact(&self) -> Value {
        Value::String(format_rational(self))
    }
}

impl ScoreJson for f64 {
    fn exact(&self) -> Value {
        json!(self)
    }
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn result_json<S: ScoreJson>(r: &DiverseResult<S>) -> Value {
    json!({
        "mode": r.mode.as_str(),
        "selected": tuples_json(&r.selected),
        "gains": r.gains.iter().map(|g| g.exact()).collect::<Vec<_>>(),
        "total": r.total.exact(),
        "total_f64": r.total.to_f64(),
        "optimal": r.optimal,
    })
}
