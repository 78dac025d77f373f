//! One-parameter sweeps over a scenario.

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::emit::{Cell, Table};
use crate::error::RunError;
use crate::scenario::run_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Dotted configuration key.
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<(), RunError> {
        if self.steps < 2 {
            return Err(RunError::Sweep(format!("steps must be ≥ 2, got {}", self.steps)));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(RunError::Sweep("endpoints must be finite".into()));
        }
        if self.log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(RunError::Sweep("log scale needs positive endpoints".into()));
        }
        cfg.clone().set_number(&self.param, self.from)?;
        Ok(())
    }

    /// Sweep points; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.from;
                }
                if i == last {
                    return self.to;
                }
                let t = i as f64 / last as f64;
                if self.log {
                    (self.from.ln() + t * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from * (1.0 - t) + self.to * t
                }
            })
            .collect()
    }
}

/// One row per sweep point, in sweep order, with the swept value first.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<Table, RunError> {
    spec.validate(cfg)?;
    let rows: Vec<Result<Vec<(String, Cell)>, RunError>> = spec
        .values()
        .into_par_iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set_number(&spec.param, v)?;
            let mut record = run_scenario(&c).map_err(|e| match e {
                RunError::Model { context, source } => RunError::Model { context: format!("{} = {v}: {context}", spec.param), source },
                other => other,
            })?;
            record.insert(0, (spec.param.clone(), Cell::num(v)));
            Ok(record)
        })
        .collect();
    Ok(Table::from_records(rows.into_iter().collect::<Result<_, _>>()?))
}
