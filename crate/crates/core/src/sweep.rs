//! Parameter sweeps over a system file: one analysis (and optionally one
//! simulation) per value, run in parallel, rows returned in input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::criteria::{Criterion, Status};
use crate::io::{set_number, InputError, SystemFile};
use crate::report::{analyze, AnalyzeOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_stable(&self) -> bool {
        self.status == Some(Status::StableCertified)
    }
}

fn with_value(doc: &Value, path: &str, value: f64) -> Result<SystemFile, InputError> {
    let mut d = doc.clone();
    set_number(&mut d, path, value)?;
    SystemFile::from_value(d)
}

fn row(doc: &Value, path: &str, value: f64, opts: &AnalyzeOptions) -> SweepRow {
    let mut row = SweepRow { value, status: None, criterion: None, lambda0: None, lambda_hat: None, error: None };
    match with_value(doc, path, value).and_then(|file| analyze(&file, opts)) {
        Ok(report) => {
            row.status = Some(report.selected.status);
            row.criterion = Some(report.selected.criterion);
            row.lambda0 = report.decay_certificate.map(|c| c.lambda0);
            if let Some(sim) = &report.simulation {
                row.lambda_hat = sim.decay_fit.as_ref().map(|f| f.lambda_hat);
                if let Some(e) = sim.error.as_ref().or(sim.fit_error.as_ref()) {
                    row.error = Some(e.clone());
                }
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Sets the scalar at `path` to each of `values` and analyzes the result.
/// Per-row failures are recorded in the row; only a path that does not
/// address a scalar of `doc` fails the whole sweep.
pub fn sweep(doc: &Value, path: &str, values: &[f64], opts: &AnalyzeOptions) -> Result<Vec<SweepRow>, InputError> {
    set_number(&mut doc.clone(), path, 0.0)?;
    Ok(values.par_iter().map(|&v| row(doc, path, v, opts)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    /// Largest value known to pass.
    pub last_stable: f64,
    /// Smallest value known to fail; `None` when `hi` itself passes.
    pub first_unstable: Option<f64>,
    pub iterations: usize,
}

/// Bisects for the first failing value of `stable` on `[lo, hi]`, assuming a
/// single transition. `stable(lo)` must hold.
pub fn bisect_boundary(stable: impl Fn(f64) -> bool, lo: f64, hi: f64, steps: usize) -> Option<Boundary> {
    if !(lo <= hi) || !stable(lo) {
        return None;
    }
    if stable(hi) {
        return Some(Boundary { last_stable: hi, first_unstable: None, iterations: 0 });
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if stable(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(Boundary { last_stable: a, first_unstable: Some(b), iterations: steps })
}

/// [`bisect_boundary`] on a document parameter; a value whose document fails
/// to validate counts as not stable.
pub fn bisect_parameter(
    doc: &Value,
    path: &str,
    lo: f64,
    hi: f64,
    opts: &AnalyzeOptions,
    steps: usize,
) -> Result<Option<Boundary>, InputError> {
    set_number(&mut doc.clone(), path, 0.0)?;
    let opts = AnalyzeOptions { simulate: None, ..opts.clone() };
    let stable = |v: f64| {
        with_value(doc, path, v)
            .and_then(|f| analyze(&f, &opts))
            .is_ok_and(|r| r.selected.status == Status::StableCertified)
    };
    Ok(bisect_boundary(stable, lo, hi, steps))
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
            .collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err("ranges are written start:stop:step".into());
        };
        if !(step > 0.0) || !(stop >= start) || !step.is_finite() {
            return Err("range needs step > 0 and stop >= start".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err("range has too many values".into());
        }
        return Ok((0..=n).map(|k| start + k as f64 * step).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{}` is not a finite number", p.trim()))
        })
        .collect()
}
