//! Analysis reports: everything the tool can say about one system file.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::criteria::{
    applicable_criteria, certify_decay_rate, default_criterion, evaluate, gopalsamy_vs_18, CriteriaError,
    Criterion, DecayCertificate, GopalsamyComparison, StabilityVerdict, Status,
};
use crate::equilibrium::{equilibrium_exists, solve_equilibrium, Equilibrium, ExistenceReport};
use crate::io::{InputError, SystemFile};
use crate::linalg::DEFAULT_TOL;
use crate::sim::{fit_decay, simulate, DecayFit, SimConfig, SimError, Trajectory};
use crate::system::SystemSpec;

pub const TOOL: &str = "delaystab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "DELAYSTAB_TOL";
pub const EQUILIBRIUM_MAX_ITER: usize = 10_000;

pub const EXIT_STABLE: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// Tolerance from an explicit flag, else [`TOL_ENV`], else [`DEFAULT_TOL`].
pub fn resolve_tolerance(flag: Option<f64>) -> Result<f64, InputError> {
    let (tol, source) = match flag {
        Some(t) => (t, "--tol".to_string()),
        None => match std::env::var(TOL_ENV) {
            Ok(s) => (
                s.trim().parse::<f64>().map_err(|_| InputError::single(TOL_ENV, format!("`{s}` is not a number")))?,
                TOL_ENV.to_string(),
            ),
            Err(_) => return Ok(DEFAULT_TOL),
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(InputError::single(source, "tolerance must be positive and finite"));
    }
    Ok(tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub criterion: Option<Criterion>,
    pub tol: f64,
    pub weights: Option<Vec<f64>>,
    /// Run a simulation with this configuration and fit its decay.
    pub simulate: Option<SimConfig>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { criterion: None, tol: DEFAULT_TOL, weights: None, simulate: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionFailure {
    pub criterion: Criterion,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub criterion: Criterion,
    pub status: Status,
    /// Whether the criterion was named by the caller rather than chosen.
    pub requested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSection {
    pub existence: ExistenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<Equilibrium>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub config: SimConfig,
    pub system_hash: String,
    pub reference: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    /// The input document as given; feeding it back reproduces the report.
    pub input: Value,
    pub input_sha256: String,
    /// The spec after parameter substitution.
    pub resolved: SystemSpec,
    pub tolerance: f64,
    pub selected: Selection,
    pub verdicts: Vec<StabilityVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criterion_errors: Vec<CriterionFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_certificate: Option<DecayCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gopalsamy: Option<GopalsamyComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        status_exit_code(self.selected.status)
    }

    pub fn verdict(&self, criterion: Criterion) -> Option<&StabilityVerdict> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }

    /// One-paragraph human summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} system: {} by {} (tolerance {:e})\n",
            self.resolved.kind(),
            status_word(self.selected.status),
            self.selected.criterion,
            self.tolerance
        );
        for v in &self.verdicts {
            out.push_str(&format!("  {:<14} {}\n", v.criterion.to_string(), status_word(v.status)));
        }
        for f in &self.criterion_errors {
            out.push_str(&format!("  {:<14} error: {}\n", f.criterion.to_string(), f.message));
        }
        match (&self.decay_certificate, &self.certificate_note) {
            (Some(c), _) => out.push_str(&format!("  decay rate certified: lambda0 = {:.6e}\n", c.lambda0)),
            (None, Some(n)) => out.push_str(&format!("  decay rate: {n}\n")),
            _ => {}
        }
        if let Some(eq) = &self.equilibrium {
            if let Some(s) = &eq.solution {
                out.push_str(&format!("  equilibrium x* = {:?}, y* = {:?}\n", s.x_star, s.y_star));
            }
        }
        if let Some(sim) = &self.simulation {
            if let Some(fit) = &sim.decay_fit {
                out.push_str(&format!("  simulated decay: lambda_hat = {:.6e}\n", fit.lambda_hat));
            } else if let Some(e) = sim.error.as_ref().or(sim.fit_error.as_ref()) {
                out.push_str(&format!("  simulation: {e}\n"));
            }
        }
        out
    }
}

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::StableCertified => EXIT_STABLE,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::StableCertified => "stable_certified",
        Status::Inconclusive => "inconclusive",
    }
}

fn input_error(criterion: Criterion, e: CriteriaError) -> InputError {
    InputError::single("criterion", format!("{criterion}: {e}"))
}

/// Evaluates every applicable criterion, picks the verdict that decides the
/// exit status and, for BAM-type systems, computes the equilibrium.
///
/// Without an explicit criterion the default one for the system family is
/// selected if it certifies stability; otherwise the first applicable
/// criterion that does, and the default (inconclusive) one if none does.
pub fn analyze(file: &SystemFile, opts: &AnalyzeOptions) -> Result<AnalysisReport, InputError> {
    let spec = &file.spec;
    let tol = opts.tol;
    let weights = opts.weights.as_deref();
    let mut criteria = applicable_criteria(spec);
    if let Some(c) = opts.criterion {
        if !criteria.contains(&c) {
            criteria.push(c);
        }
    }
    let mut verdicts = Vec::new();
    let mut criterion_errors = Vec::new();
    for &c in &criteria {
        match evaluate(c, spec, tol, weights) {
            Ok(v) => verdicts.push(v),
            Err(e) if Some(c) == opts.criterion => return Err(input_error(c, e)),
            Err(e) => criterion_errors.push(CriterionFailure { criterion: c, message: e.to_string() }),
        }
    }
    let selected = select(&verdicts, spec, opts.criterion);

    let general = spec.to_general().map_err(|v| InputError::single("", format!("{v:?}")))?;
    let (decay_certificate, certificate_note) = match certify_decay_rate(&general, tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let gopalsamy = match spec {
        SystemSpec::TwoNeuron(two) => gopalsamy_vs_18(two, tol).ok(),
        _ => None,
    };
    let equilibrium = equilibrium_section(file, tol)?;
    let simulation = opts.simulate.map(|cfg| simulation_summary(file, &cfg, equilibrium.as_ref()));

    Ok(AnalysisReport {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        input: file.source.clone(),
        input_sha256: file.sha256(),
        resolved: spec.clone(),
        tolerance: tol,
        selected,
        verdicts,
        criterion_errors,
        decay_certificate,
        certificate_note,
        gopalsamy,
        equilibrium,
        simulation,
    })
}

fn select(verdicts: &[StabilityVerdict], spec: &SystemSpec, requested: Option<Criterion>) -> Selection {
    if let Some(c) = requested {
        let v = verdicts.iter().find(|v| v.criterion == c).expect("requested verdict was evaluated");
        return Selection { criterion: c, status: v.status, requested: true };
    }
    let default = default_criterion(spec);
    let pick = verdicts
        .iter()
        .find(|v| v.criterion == default && v.is_stable())
        .or_else(|| verdicts.iter().find(|v| v.is_stable()))
        .or_else(|| verdicts.iter().find(|v| v.criterion == default));
    match pick {
        Some(v) => Selection { criterion: v.criterion, status: v.status, requested: false },
        None => Selection { criterion: default, status: Status::Inconclusive, requested: false },
    }
}

/// Existence table and equilibrium for BAM-type files; `None` otherwise.
pub fn equilibrium_section(file: &SystemFile, tol: f64) -> Result<Option<EquilibriumSection>, InputError> {
    let (Some(bam), Some((f, g))) = (file.spec.as_bam(), file.activations()) else {
        return Ok(None);
    };
    let existence = equilibrium_exists(&bam).map_err(|e| InputError::single("", e.to_string()))?;
    let (solution, error) = match solve_equilibrium(&bam, &f, &g, tol, EQUILIBRIUM_MAX_ITER) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Some(EquilibriumSection { existence, solution, error }))
}

/// Equilibrium the simulated state should approach: the BAM fixed point,
/// or the origin for systems without inputs.
fn reference(file: &SystemFile, eq: Option<&EquilibriumSection>) -> Option<Vec<f64>> {
    match eq {
        Some(section) => section.solution.as_ref().map(Equilibrium::state),
        None => Some(vec![0.0; file.spec.to_general().map(|g| g.m).unwrap_or(0)]),
    }
}

fn simulation_summary(file: &SystemFile, cfg: &SimConfig, eq: Option<&EquilibriumSection>) -> SimulationSummary {
    let mut summary = SimulationSummary {
        config: *cfg,
        system_hash: String::new(),
        reference: vec![],
        final_state: None,
        final_deviation: None,
        decay_fit: None,
        fit_error: None,
        error: None,
    };
    let traj = match simulate_file(file, cfg) {
        Ok(t) => t,
        Err(e) => {
            summary.error = Some(e.to_string());
            return summary;
        }
    };
    summary.system_hash = traj.meta.system_hash.clone();
    summary.final_state = Some(traj.final_state().to_vec());
    match reference(file, eq) {
        Some(r) => {
            summary.final_deviation = Some(traj.final_deviation(&r));
            match fit_decay(&traj, &r) {
                Ok(fit) => summary.decay_fit = Some(fit),
                Err(e) => summary.fit_error = Some(e.to_string()),
            }
            summary.reference = r;
        }
        None => summary.fit_error = Some("no equilibrium to measure decay against".into()),
    }
    summary
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub fn simulate_file(file: &SystemFile, cfg: &SimConfig) -> Result<Trajectory, RunError> {
    let system = file.concrete()?;
    Ok(simulate(&system, cfg)?)
}

/// Simulation settings: the file's block (or defaults) with overrides. When
/// no step is given anywhere the largest of 0.01, 0.005, 0.002, 0.001, ...
/// allowed by the smallest delay is used.
pub fn simulation_config(file: &SystemFile, t_end: Option<f64>, h: Option<f64>) -> Result<SimConfig, InputError> {
    let mut cfg = file.simulation.unwrap_or_default();
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    match h {
        Some(h) => cfg.h = h,
        None if file.simulation.is_none() => {
            let limit = file.concrete()?.min_positive_delay_bound().map_or(f64::INFINITY, |d| d / 10.0);
            let mut scale = 0.01;
            'search: loop {
                for m in [1.0, 0.5, 0.2] {
                    if m * scale <= limit * (1.0 + 1e-12) {
                        cfg.h = m * scale;
                        break 'search;
                    }
                }
                scale /= 10.0;
            }
        }
        None => {}
    }
    cfg.steps().map_err(|e| InputError::single("simulation", e.to_string()))?;
    Ok(cfg)
}
