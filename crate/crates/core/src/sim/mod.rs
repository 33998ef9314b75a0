//! Fixed-step RK4 integration of concrete delay systems by the method of
//! steps, plus empirical decay-rate fitting.
//!
//! Delayed arguments are read from a buffer of past grid values. Inside a
//! completed step the solution is reconstructed by cubic Hermite
//! interpolation from the stored states and derivatives; lookups that fall
//! inside the step being computed interpolate linearly between the step's
//! start value and the current stage value, so a zero delay sees the stage
//! state itself.

mod fit;

use std::collections::VecDeque;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::system::{ConcreteSystem, Waveform};

pub use fit::{fit_decay, DecayFit, FitError, FIT_SKIP_FRACTION};

/// Relative slack on declared delay bounds and on the step-size rule.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("step {h} exceeds one tenth of the smallest positive delay bound ({limit})")]
    StepTooLarge { h: f64, limit: f64 },
    #[error("{what} at t = {t}: delay {delay} outside [0, {bound}]")]
    DelayBound { what: String, t: f64, delay: f64, bound: f64 },
    #[error("state became non-finite at t = {t}")]
    Overflow { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub h: f64,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { t0: 0.0, t_end: 100.0, h: 0.01, record_every: 1 }
    }
}

impl SimConfig {
    /// Number of integration steps; `t_end - t0` must be a multiple of `h`.
    pub fn steps(&self) -> Result<usize, SimError> {
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.h.is_finite()) {
            return Err(SimError::InvalidConfig("t0, t_end and h must be finite".into()));
        }
        if self.h <= 0.0 {
            return Err(SimError::InvalidConfig("h must be positive".into()));
        }
        if self.t_end <= self.t0 {
            return Err(SimError::InvalidConfig("t_end must exceed t0".into()));
        }
        if self.record_every == 0 {
            return Err(SimError::InvalidConfig("record_every must be at least 1".into()));
        }
        let span = self.t_end - self.t0;
        let n = (span / self.h).round();
        if (n * self.h - span).abs() > 1e-9 * span || n < 1.0 {
            return Err(SimError::InvalidConfig(format!("t_end - t0 = {span} is not a multiple of h = {}", self.h)));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, system: &ConcreteSystem) -> Result<usize, SimError> {
        let n = self.steps()?;
        if let Some(min) = system.min_positive_delay_bound() {
            let limit = min / 10.0;
            if self.h > limit * (1.0 + BOUND_SLACK) {
                return Err(SimError::StepTooLarge { h: self.h, limit });
            }
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryWindow {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    /// SHA-256 of the serialized concrete system.
    pub system_hash: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Buffer retained at the end of the run, covering `[t_end - σ_max, t_end]`.
    pub history: HistoryWindow,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// Sup-norm distance of the final state from `reference`.
    pub fn final_deviation(&self, reference: &[f64]) -> f64 {
        self.final_state().iter().zip(reference).fold(0.0f64, |m, (x, r)| m.max((x - r).abs()))
    }
}

pub fn system_hash(system: &ConcreteSystem) -> String {
    let bytes = serde_json::to_vec(system).expect("concrete systems serialize");
    hex::encode(Sha256::digest(bytes))
}

struct Node {
    t: f64,
    x: Vec<f64>,
    dx: Option<Vec<f64>>,
}

/// State at which the right-hand side is being evaluated.
struct Stage<'a> {
    t: f64,
    y: &'a [f64],
}

struct Integrator<'a> {
    sys: &'a ConcreteSystem,
    t0: f64,
    h: f64,
    /// Global grid index of `buf[0]`.
    base: usize,
    buf: VecDeque<Node>,
    retain: f64,
}

impl Integrator<'_> {
    fn last(&self) -> &Node {
        self.buf.back().expect("buffer is never empty")
    }

    fn lookup(&self, s: f64, j: usize, stage: &Stage) -> f64 {
        if s < self.t0 {
            return self.sys.history[j].eval(s);
        }
        let last = self.last();
        if s >= last.t {
            if s >= stage.t || stage.t == last.t {
                return if stage.t == last.t { last.x[j] } else { stage.y[j] };
            }
            let w = (s - last.t) / (stage.t - last.t);
            return last.x[j] + w * (stage.y[j] - last.x[j]);
        }
        let k = (((s - self.t0) / self.h).floor() as usize).min(self.base + self.buf.len() - 2);
        assert!(
            k >= self.base,
            "history buffer does not cover t = {s} (oldest retained {})",
            self.buf[0].t
        );
        let (a, b) = (&self.buf[k - self.base], &self.buf[k - self.base + 1]);
        let th = ((s - a.t) / self.h).clamp(0.0, 1.0);
        match (&a.dx, &b.dx) {
            (Some(da), Some(db)) => {
                let (t2, t3) = (th * th, th * th * th);
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + th;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * a.x[j] + h10 * self.h * da[j] + h01 * b.x[j] + h11 * self.h * db[j]
            }
            _ => a.x[j] + th * (b.x[j] - a.x[j]),
        }
    }

    fn delay(&self, what: impl FnOnce() -> String, t: f64, d: f64, bound: f64) -> Result<f64, SimError> {
        if !(d >= -BOUND_SLACK * bound.max(1.0) && d <= bound * (1.0 + BOUND_SLACK) + 1e-15) {
            return Err(SimError::DelayBound { what: what(), t, delay: d, bound });
        }
        Ok(d.max(0.0))
    }

    fn rhs(&self, stage: &Stage) -> Result<Vec<f64>, SimError> {
        let t = stage.t;
        let m = self.sys.dim();
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let d = self.sys.leakage[i].eval(t);
            let d = self.delay(|| format!("leakage delay of unit {i}"), t, d, self.sys.leakage_bounds[i])?;
            let xi = if d == 0.0 { stage.y[i] } else { self.lookup(t - d, i, stage) };
            out.push(-self.sys.decay[i].eval(t) * xi + self.sys.forcing[i].eval(t));
        }
        for (k, c) in self.sys.couplings.iter().enumerate() {
            let d = self.delay(|| format!("delay of coupling {k}"), t, c.delay.eval(t), c.delay_bound)?;
            let xj = if d == 0.0 { stage.y[c.source] } else { self.lookup(t - d, c.source, stage) };
            out[c.target] += c.gain.eval(t) * c.activation.eval(xj);
        }
        Ok(out)
    }

    fn step(&mut self, n: usize) -> Result<(), SimError> {
        let h = self.h;
        let (tn, yn) = {
            let last = self.last();
            (last.t, last.x.clone())
        };
        let axpy = |k: &[f64], c: f64| -> Vec<f64> { yn.iter().zip(k).map(|(y, k)| y + c * k).collect() };

        let k1 = self.rhs(&Stage { t: tn, y: &yn })?;
        self.buf.back_mut().expect("buffer is never empty").dx = Some(k1.clone());
        let th = tn + 0.5 * h;
        let y2 = axpy(&k1, 0.5 * h);
        let k2 = self.rhs(&Stage { t: th, y: &y2 })?;
        let y3 = axpy(&k2, 0.5 * h);
        let k3 = self.rhs(&Stage { t: th, y: &y3 })?;
        let t1 = self.t0 + (n + 1) as f64 * h;
        let y4 = axpy(&k3, h);
        let k4 = self.rhs(&Stage { t: t1, y: &y4 })?;

        let x: Vec<f64> = (0..yn.len())
            .map(|i| yn[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Overflow { t: t1 });
        }
        self.buf.push_back(Node { t: t1, x, dx: None });
        while self.buf.len() > 2 && self.buf[1].t < t1 - self.retain {
            self.buf.pop_front();
            self.base += 1;
        }
        Ok(())
    }
}

fn check_shape(system: &ConcreteSystem) -> Result<(), SimError> {
    let m = system.dim();
    if m == 0 {
        return Err(SimError::InvalidSystem("system has no units".into()));
    }
    for (name, len) in [
        ("leakage", system.leakage.len()),
        ("leakage_bounds", system.leakage_bounds.len()),
        ("forcing", system.forcing.len()),
        ("history", system.history.len()),
    ] {
        if len != m {
            return Err(SimError::InvalidSystem(format!("{name} has {len} entries, expected {m}")));
        }
    }
    if let Some((k, _)) = system.couplings.iter().enumerate().find(|(_, c)| c.target >= m || c.source >= m) {
        return Err(SimError::InvalidSystem(format!("coupling {k} refers to a unit outside 0..{m}")));
    }
    let bounds_ok = system
        .leakage_bounds
        .iter()
        .chain(system.couplings.iter().map(|c| &c.delay_bound))
        .all(|b| b.is_finite() && *b >= 0.0);
    if !bounds_ok {
        return Err(SimError::InvalidSystem("delay bounds must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Integrates `system` over `[cfg.t0, cfg.t_end]` with history `φ = system.history`.
pub fn simulate(system: &ConcreteSystem, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    check_shape(system)?;
    let steps = cfg.validate(system)?;
    let x0 = system.initial_state(cfg.t0);
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Overflow { t: cfg.t0 });
    }
    let mut it = Integrator {
        sys: system,
        t0: cfg.t0,
        h: cfg.h,
        base: 0,
        buf: VecDeque::from([Node { t: cfg.t0, x: x0.clone(), dx: None }]),
        retain: system.max_delay_bound() + cfg.h,
    };
    let mut times = vec![cfg.t0];
    let mut states = vec![x0];
    for n in 0..steps {
        it.step(n)?;
        if (n + 1) % cfg.record_every == 0 {
            let last = it.last();
            times.push(last.t);
            states.push(last.x.clone());
        }
    }
    let history = HistoryWindow {
        times: it.buf.iter().map(|node| node.t).collect(),
        states: it.buf.iter().map(|node| node.x.clone()).collect(),
    };
    Ok(Trajectory {
        times,
        states,
        history,
        meta: TrajectoryMeta { system_hash: system_hash(system), config: *cfg },
    })
}

/// Writes `t,x_1,...,x_m` rows with 17 significant digits and LF endings.
pub fn write_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let m = traj.dim();
    let header: Vec<String> = std::iter::once("t".to_string()).chain((1..=m).map(|i| format!("x_{i}"))).collect();
    out.write_all(header.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut line = format!("{t:.16e}");
        for v in x {
            line.push_str(&format!(",{v:.16e}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// Scalar `x'(t) = -a x(t - d)` with constant history `x0`.
pub fn scalar_delay_system(a: f64, d: f64, x0: f64) -> ConcreteSystem {
    ConcreteSystem {
        decay: vec![Waveform::Constant(a)],
        leakage: vec![crate::system::DelayFn::Constant(d)],
        leakage_bounds: vec![d],
        couplings: vec![],
        forcing: vec![Waveform::Constant(0.0)],
        history: vec![Waveform::Constant(x0)],
    }
}
