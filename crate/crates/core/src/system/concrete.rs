//! Concrete realisations of a spec: actual coefficient, delay and
//! nonlinearity functions from the catalog, plus history functions.
//!
//! Every realisation is simulated in the common form
//!
//! ```text
//! x_i'(t) = -a_i(t) x_i(t - τ_i(t)) + Σ_c gain_c(t) act_c(x_j(t - δ_c(t))) + e_i(t)
//! ```
//!
//! where the sum runs over the couplings targeting unit `i` and `e_i` is a
//! forcing term (nonzero only for BAM inputs).

use serde::{Deserialize, Serialize};

use super::catalog::{Activation, DelayFn, Waveform};
use super::{bam_to_general, BamSpec, Checker, GeneralSystemSpec, LinearSystemSpec, TwoNeuronSpec, Violation};

const BOUND_SLACK: f64 = 1e-12;

/// `gain(t) * activation(x_source(t - delay(t)))` added to the target's derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub target: usize,
    pub source: usize,
    pub gain: Waveform,
    pub activation: Activation,
    pub delay: DelayFn,
    /// Declared bound on `delay`, checked at every evaluation.
    pub delay_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteSystem {
    pub decay: Vec<Waveform>,
    pub leakage: Vec<DelayFn>,
    pub leakage_bounds: Vec<f64>,
    pub couplings: Vec<Coupling>,
    pub forcing: Vec<Waveform>,
    pub history: Vec<Waveform>,
}

impl ConcreteSystem {
    pub fn dim(&self) -> usize {
        self.decay.len()
    }

    /// Largest declared delay bound, the span the history buffer must retain.
    pub fn max_delay_bound(&self) -> f64 {
        self.leakage_bounds
            .iter()
            .chain(self.couplings.iter().map(|c| &c.delay_bound))
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn min_positive_delay_bound(&self) -> Option<f64> {
        self.leakage_bounds
            .iter()
            .chain(self.couplings.iter().map(|c| &c.delay_bound))
            .copied()
            .filter(|&d| d > 0.0)
            .reduce(f64::min)
    }

    pub fn initial_state(&self, t0: f64) -> Vec<f64> {
        self.history.iter().map(|w| w.eval(t0)).collect()
    }

    /// Checks that every catalog function respects the bounds of `spec`.
    pub fn check_against(&self, spec: &GeneralSystemSpec) -> Vec<Violation> {
        let mut c = Checker::default();
        let m = spec.m;
        let dims_ok = c.len("dynamics.decay", self.decay.len(), m)
            & c.len("dynamics.leakage", self.leakage.len(), m)
            & c.len("dynamics.leakage_bounds", self.leakage_bounds.len(), m)
            & c.len("dynamics.forcing", self.forcing.len(), m)
            & c.len("dynamics.history", self.history.len(), m);
        if !dims_ok {
            return c.violations;
        }
        for i in 0..m {
            let w = &self.decay[i];
            let (lo, hi) = w.range();
            if !w.is_finite() || lo < spec.alpha[i] * (1.0 - BOUND_SLACK) || hi > spec.a_upper[i] * (1.0 + BOUND_SLACK) {
                c.push(
                    format!("dynamics.decay[{i}]"),
                    format!("range [{lo}, {hi}] must lie within [alpha, A] = [{}, {}]", spec.alpha[i], spec.a_upper[i]),
                );
            }
            let d = &self.leakage[i];
            if d.min() < 0.0 || !d.bound().is_finite() {
                c.push(format!("dynamics.leakage[{i}]"), "delay must be nonnegative and finite");
            } else if d.bound() > spec.tau[i] * (1.0 + BOUND_SLACK) {
                c.push(
                    format!("dynamics.leakage[{i}]"),
                    format!("delay bound {} exceeds tau[{i}] = {}", d.bound(), spec.tau[i]),
                );
            }
            if spec.diagonal_delay_free && !d.is_zero() {
                c.push(format!("dynamics.leakage[{i}]"), "must be zero when diagonal_delay_free is set");
            }
            if self.leakage_bounds[i] > spec.tau[i] * (1.0 + BOUND_SLACK) {
                c.push(format!("dynamics.leakage_bounds[{i}]"), "exceeds tau");
            }
            if !self.forcing[i].is_finite() {
                c.push(format!("dynamics.forcing[{i}]"), "must be finite");
            }
            if !self.history[i].is_finite() {
                c.push(format!("dynamics.history[{i}]"), "must be finite");
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (k, cp) in self.couplings.iter().enumerate() {
            let path = format!("dynamics.couplings[{k}]");
            if cp.target >= m || cp.source >= m {
                c.push(path, format!("target/source must be < {m}"));
                continue;
            }
            if !seen.insert((cp.target, cp.source)) {
                c.push(path, format!("duplicate coupling ({}, {})", cp.target, cp.source));
                continue;
            }
            let (i, j) = (cp.target, cp.source);
            let growth = cp.gain.sup_abs() * cp.activation.lipschitz();
            let limit = spec.lipschitz[i][j];
            if !cp.gain.is_finite() || !cp.activation.is_finite() || growth > limit * (1.0 + BOUND_SLACK) + 1e-15 {
                c.push(
                    path.clone(),
                    format!("growth bound sup|gain| * lipschitz = {growth} exceeds L[{i}][{j}] = {limit}"),
                );
            }
            if cp.delay.min() < 0.0 || !cp.delay.bound().is_finite() {
                c.push(path.clone(), "delay must be nonnegative and finite");
            } else if cp.delay.bound() > spec.sigma[i][j] * (1.0 + BOUND_SLACK) {
                c.push(
                    path.clone(),
                    format!("delay bound {} exceeds sigma[{i}][{j}] = {}", cp.delay.bound(), spec.sigma[i][j]),
                );
            }
            if cp.delay_bound > spec.sigma[i][j] * (1.0 + BOUND_SLACK) {
                c.push(path, "declared delay_bound exceeds sigma");
            }
        }
        c.violations
    }

    fn checked(self, spec: &GeneralSystemSpec) -> Result<Self, Vec<Violation>> {
        let v = self.check_against(spec);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(v)
        }
    }

    /// Realises a general spec. Missing pieces default to constant decay
    /// `α_i`, constant leakage delay `τ_i`, one `tanh_scaled(L_ij)` coupling
    /// per nonzero `L_ij` with constant delay `σ_ij`, and unit history.
    pub fn general(spec: &GeneralSystemSpec, dynamics: &GeneralDynamics) -> Result<Self, Vec<Violation>> {
        reject_invalid(spec.validate())?;
        let m = spec.m;
        let couplings = match &dynamics.couplings {
            Some(list) => list.iter().map(|cs| cs.realise(spec)).collect(),
            None => nonzero_pairs(&spec.lipschitz)
                .map(|(i, j)| Coupling {
                    target: i,
                    source: j,
                    gain: Waveform::Constant(1.0),
                    activation: Activation::TanhScaled(spec.lipschitz[i][j]),
                    delay: DelayFn::Constant(spec.sigma[i][j]),
                    delay_bound: spec.sigma[i][j],
                })
                .collect(),
        };
        ConcreteSystem {
            decay: dynamics.decay.clone().unwrap_or_else(|| constants(&spec.alpha)),
            leakage: dynamics
                .leakage
                .clone()
                .unwrap_or_else(|| spec.tau.iter().map(|&t| DelayFn::Constant(t)).collect()),
            leakage_bounds: spec.tau.clone(),
            couplings,
            forcing: vec![Waveform::Constant(0.0); m],
            history: dynamics.history.clone().unwrap_or_else(|| vec![Waveform::Constant(1.0); m]),
        }
        .checked(spec)
    }

    /// Realises a linear spec. Defaults: constant decay `α_i`, diagonal
    /// delay `σ_ii`, linear couplings with constant gains `A_ij`.
    pub fn linear(spec: &LinearSystemSpec, dynamics: &GeneralDynamics) -> Result<Self, Vec<Violation>> {
        reject_invalid(spec.validate())?;
        let general = spec.to_general();
        let defaults = GeneralDynamics {
            couplings: Some(
                nonzero_pairs(&general.lipschitz)
                    .map(|(i, j)| CouplingSpec {
                        target: i,
                        source: j,
                        gain: Waveform::Constant(general.lipschitz[i][j]),
                        activation: Activation::Linear(1.0),
                        delay: None,
                    })
                    .collect(),
            ),
            ..GeneralDynamics::default()
        };
        let merged = GeneralDynamics {
            decay: dynamics.decay.clone(),
            leakage: dynamics.leakage.clone(),
            couplings: dynamics.couplings.clone().or(defaults.couplings),
            history: dynamics.history.clone(),
        };
        ConcreteSystem::general(&general, &merged)
    }

    /// Realises a BAM network in its original coordinates (with inputs).
    pub fn bam(spec: &BamSpec, dynamics: &BamDynamics) -> Result<Self, Vec<Violation>> {
        let general = bam_to_general(spec)?;
        let n = spec.n;
        let mut c = Checker::default();
        let r = dynamics.r.clone().unwrap_or_else(|| constants(&spec.r_hi));
        let p = dynamics.p.clone().unwrap_or_else(|| constants(&spec.p_hi));
        let (f, g) = dynamics.activations(spec);
        let leak_x = dynamics.leak_x.clone().unwrap_or_else(|| delays(&spec.tau1));
        let leak_y = dynamics.leak_y.clone().unwrap_or_else(|| delays(&spec.tau2));
        let delay_x = dynamics.delay_x.clone().unwrap_or_else(|| delays(&spec.sig1));
        let delay_y = dynamics.delay_y.clone().unwrap_or_else(|| delays(&spec.sig2));
        let history_x = dynamics.history_x.clone().unwrap_or_else(|| vec![Waveform::Constant(1.0); n]);
        let history_y = dynamics.history_y.clone().unwrap_or_else(|| vec![Waveform::Constant(1.0); n]);
        let ok = c.len("dynamics.r", r.len(), n)
            & c.len("dynamics.p", p.len(), n)
            & c.len("dynamics.f", f.len(), n)
            & c.len("dynamics.g", g.len(), n)
            & c.len("dynamics.leak_x", leak_x.len(), n)
            & c.len("dynamics.leak_y", leak_y.len(), n)
            & c.len("dynamics.delay_x", delay_x.len(), n)
            & c.len("dynamics.delay_y", delay_y.len(), n)
            & c.len("dynamics.history_x", history_x.len(), n)
            & c.len("dynamics.history_y", history_y.len(), n);
        if !ok {
            return Err(c.violations);
        }
        let mut decay = Vec::with_capacity(2 * n);
        let mut forcing = Vec::with_capacity(2 * n);
        let mut couplings = Vec::new();
        for i in 0..n {
            decay.push(r[i].scaled(spec.a[i]));
            forcing.push(r[i].scaled(spec.input_x[i]));
        }
        for i in 0..n {
            decay.push(p[i].scaled(spec.b[i]));
            forcing.push(p[i].scaled(spec.input_y[i]));
        }
        for i in 0..n {
            for j in 0..n {
                if spec.a_conn[i][j] != 0.0 {
                    couplings.push(Coupling {
                        target: i,
                        source: n + j,
                        gain: r[i].scaled(spec.a_conn[i][j]),
                        activation: f[j],
                        delay: delay_y[j],
                        delay_bound: spec.sig2[j],
                    });
                }
                if spec.b_conn[i][j] != 0.0 {
                    couplings.push(Coupling {
                        target: n + i,
                        source: j,
                        gain: p[i].scaled(spec.b_conn[i][j]),
                        activation: g[j],
                        delay: delay_x[j],
                        delay_bound: spec.sig1[j],
                    });
                }
            }
        }
        let mut leakage = leak_x;
        leakage.extend(leak_y);
        let mut history = history_x;
        history.extend(history_y);
        ConcreteSystem {
            decay,
            leakage,
            leakage_bounds: general.tau.clone(),
            couplings,
            forcing,
            history,
        }
        .checked(&general)
    }

    /// Realises the two-neuron network with constant coefficients and
    /// delays at their stated values.
    pub fn two_neuron(spec: &TwoNeuronSpec, dynamics: &TwoNeuronDynamics) -> Result<Self, Vec<Violation>> {
        reject_invalid(spec.validate())?;
        let general = spec.to_general();
        let f1 = dynamics.f1.unwrap_or(Activation::TanhScaled(spec.l1));
        let f2 = dynamics.f2.unwrap_or(Activation::TanhScaled(spec.l2));
        if f1.lipschitz() > spec.l1 * (1.0 + BOUND_SLACK) {
            return Err(vec![Violation { path: "dynamics.f1".into(), message: format!("lipschitz constant exceeds L1 = {}", spec.l1) }]);
        }
        if f2.lipschitz() > spec.l2 * (1.0 + BOUND_SLACK) {
            return Err(vec![Violation { path: "dynamics.f2".into(), message: format!("lipschitz constant exceeds L2 = {}", spec.l2) }]);
        }
        let mut couplings = Vec::new();
        if spec.a12 != 0.0 {
            couplings.push(Coupling {
                target: 0,
                source: 1,
                gain: Waveform::Constant(spec.a12),
                activation: f1,
                delay: DelayFn::Constant(spec.sigma1),
                delay_bound: spec.sigma1,
            });
        }
        if spec.a21 != 0.0 {
            couplings.push(Coupling {
                target: 1,
                source: 0,
                gain: Waveform::Constant(spec.a21),
                activation: f2,
                delay: DelayFn::Constant(spec.sigma2),
                delay_bound: spec.sigma2,
            });
        }
        ConcreteSystem {
            decay: vec![Waveform::Constant(spec.a1), Waveform::Constant(spec.a2)],
            leakage: vec![DelayFn::Constant(spec.tau1), DelayFn::Constant(spec.tau2)],
            leakage_bounds: vec![spec.tau1, spec.tau2],
            couplings,
            forcing: vec![Waveform::Constant(0.0); 2],
            history: dynamics.history.clone().unwrap_or_else(|| vec![Waveform::Constant(1.0); 2]),
        }
        .checked(&general)
    }
}

fn reject_invalid(v: Vec<Violation>) -> Result<(), Vec<Violation>> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn constants(v: &[f64]) -> Vec<Waveform> {
    v.iter().map(|&x| Waveform::Constant(x)).collect()
}

fn delays(v: &[f64]) -> Vec<DelayFn> {
    v.iter().map(|&x| DelayFn::Constant(x)).collect()
}

fn nonzero_pairs(l: &[Vec<f64>]) -> impl Iterator<Item = (usize, usize)> + '_ {
    l.iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, &v)| v != 0.0).map(move |(j, _)| (i, j)))
}

fn unit_gain() -> Waveform {
    Waveform::Constant(1.0)
}

/// One coupling in a dynamics description; the delay defaults to the
/// constant `σ_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub target: usize,
    pub source: usize,
    #[serde(default = "unit_gain")]
    pub gain: Waveform,
    pub activation: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay: Option<DelayFn>,
}

impl CouplingSpec {
    fn realise(&self, spec: &GeneralSystemSpec) -> Coupling {
        let bound = spec
            .sigma
            .get(self.target)
            .and_then(|row| row.get(self.source))
            .copied()
            .unwrap_or(0.0);
        Coupling {
            target: self.target,
            source: self.source,
            gain: self.gain,
            activation: self.activation,
            delay: self.delay.unwrap_or(DelayFn::Constant(bound)),
            delay_bound: bound,
        }
    }
}

/// Dynamics for `general` and `linear` systems.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralDynamics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<Vec<Waveform>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage: Option<Vec<DelayFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<CouplingSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<Waveform>>,
}

/// Dynamics for BAM networks. `delay_x[j]` is the delay of `x_j` in the `y`
/// equations; `delay_y[j]` the delay of `y_j` in the `x` equations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BamDynamics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Waveform>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Waveform>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Activation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Activation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak_x: Option<Vec<DelayFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak_y: Option<Vec<DelayFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_x: Option<Vec<DelayFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_y: Option<Vec<DelayFn>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_x: Option<Vec<Waveform>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_y: Option<Vec<Waveform>>,
}

impl BamDynamics {
    /// Activations `(f, g)`, defaulting to `linear(Lf_j)` and `linear(Lg_j)`.
    pub fn activations(&self, spec: &BamSpec) -> (Vec<Activation>, Vec<Activation>) {
        let f = self
            .f
            .clone()
            .unwrap_or_else(|| spec.lf.iter().map(|&l| Activation::Linear(l)).collect());
        let g = self
            .g
            .clone()
            .unwrap_or_else(|| spec.lg.iter().map(|&l| Activation::Linear(l)).collect());
        (f, g)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoNeuronDynamics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<Activation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<Waveform>>,
}

impl TwoNeuronDynamics {
    pub fn activations(&self, spec: &TwoNeuronSpec) -> (Activation, Activation) {
        (
            self.f1.unwrap_or(Activation::TanhScaled(spec.l1)),
            self.f2.unwrap_or(Activation::TanhScaled(spec.l2)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::presets;

    #[test]
    fn leaky_bam_dynamics_respect_bounds() {
        for mu in [0.0, 9.0, 18.0] {
            let sys = ConcreteSystem::bam(&presets::leaky_bam(mu), &presets::leaky_bam_dynamics(mu)).unwrap();
            assert_eq!(sys.dim(), 2);
            assert_eq!(sys.couplings.len(), 2);
            assert_eq!(sys.max_delay_bound(), 3.0);
            assert_eq!(sys.min_positive_delay_bound(), Some(1e-3));
        }
    }

    #[test]
    fn rate_outside_declared_range_is_rejected() {
        let spec = presets::leaky_bam(5.0);
        let mut dynamics = presets::leaky_bam_dynamics(5.0);
        dynamics.r = Some(vec![Waveform::Sin { base: 20.0, amp: 6.0, freq: 1.0 }]);
        let err = ConcreteSystem::bam(&spec, &dynamics).unwrap_err();
        assert!(err.iter().any(|v| v.path == "dynamics.decay[0]"), "{err:?}");
    }

    #[test]
    fn oversized_nonlinearity_is_rejected() {
        let spec = presets::two_neuron_ref_general();
        let dynamics = GeneralDynamics {
            couplings: Some(vec![CouplingSpec {
                target: 0,
                source: 1,
                gain: Waveform::Constant(1.0),
                activation: Activation::TanhScaled(0.6),
                delay: None,
            }]),
            ..Default::default()
        };
        let err = ConcreteSystem::general(&spec, &dynamics).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].message.contains("exceeds L[0][1]"));
    }

    #[test]
    fn delay_beyond_bound_is_rejected() {
        let spec = presets::two_neuron_ref_general();
        let dynamics = GeneralDynamics {
            leakage: Some(vec![DelayFn::Constant(0.5), DelayFn::AbsSin { base: 0.2, amp: 0.3 }]),
            ..Default::default()
        };
        let err = ConcreteSystem::general(&spec, &dynamics).unwrap_err();
        assert_eq!(err[0].path, "dynamics.leakage[1]");
    }

    #[test]
    fn default_general_realisation() {
        let sys = ConcreteSystem::general(&presets::two_neuron_ref_general(), &GeneralDynamics::default()).unwrap();
        assert_eq!(sys.couplings.len(), 2);
        assert_eq!(sys.couplings[0].activation, Activation::TanhScaled(0.5));
        assert_eq!(sys.initial_state(0.0), vec![1.0, 1.0]);
    }

    #[test]
    fn linear_defaults_use_coefficient_bounds() {
        let sys = ConcreteSystem::linear(&presets::sharpness_pair(0.9), &GeneralDynamics::default()).unwrap();
        assert_eq!(sys.couplings.len(), 2);
        assert_eq!(sys.couplings[0].gain, Waveform::Constant(0.9));
        assert!(sys.leakage.iter().all(DelayFn::is_zero));
    }
}
