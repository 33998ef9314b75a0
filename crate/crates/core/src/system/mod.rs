//! Parameter-level descriptions of the supported system families.
//!
//! * [`GeneralSystemSpec`]: nonlinear systems with a delayed decay term and
//!   delayed couplings bounded by a Lipschitz/growth matrix.
//! * [`LinearSystemSpec`]: the linear special case with coefficient bounds.
//! * [`BamSpec`]: bidirectional associative memory networks with leakage and
//!   transmission delays, reducible to a general spec of twice the size.
//! * [`TwoNeuronSpec`]: the constant-coefficient two-neuron network.
//!
//! Component indices in validation paths are zero-based, matching JSON arrays.

pub mod catalog;
pub mod concrete;
pub mod presets;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use catalog::{Activation, DelayFn, Waveform};
pub use concrete::{ConcreteSystem, Coupling};

/// One violated parameter constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.path, self.message)
    }
}

/// Collects violations with field paths.
#[derive(Default)]
pub(crate) struct Checker {
    pub(crate) violations: Vec<Violation>,
}

impl Checker {
    pub(crate) fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }

    fn finite(&mut self, path: &str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.push(path, format!("must be finite (got {v})"));
            false
        }
    }

    fn positive(&mut self, path: String, v: f64) {
        if self.finite(&path, v) && v <= 0.0 {
            self.push(path, format!("must be > 0 (got {v})"));
        }
    }

    fn nonneg(&mut self, path: String, v: f64) {
        if self.finite(&path, v) && v < 0.0 {
            self.push(path, format!("must be ≥ 0 (got {v})"));
        }
    }

    fn len(&mut self, path: &str, got: usize, expected: usize) -> bool {
        if got == expected {
            true
        } else {
            self.push(path, format!("must have length {expected} (got {got})"));
            false
        }
    }

    fn vec_positive(&mut self, name: &str, v: &[f64], n: usize) {
        if self.len(name, v.len(), n) {
            for (i, &x) in v.iter().enumerate() {
                self.positive(format!("{name}[{i}]"), x);
            }
        }
    }

    fn vec_nonneg(&mut self, name: &str, v: &[f64], n: usize) {
        if self.len(name, v.len(), n) {
            for (i, &x) in v.iter().enumerate() {
                self.nonneg(format!("{name}[{i}]"), x);
            }
        }
    }

    fn vec_finite(&mut self, name: &str, v: &[f64], n: usize) {
        if self.len(name, v.len(), n) {
            for (i, &x) in v.iter().enumerate() {
                self.finite(&format!("{name}[{i}]"), x);
            }
        }
    }

    fn square(&mut self, name: &str, rows: &[Vec<f64>], n: usize, nonneg: bool) {
        if !self.len(name, rows.len(), n) {
            return;
        }
        for (i, row) in rows.iter().enumerate() {
            let rp = format!("{name}[{i}]");
            if !self.len(&rp, row.len(), n) {
                continue;
            }
            for (j, &x) in row.iter().enumerate() {
                if nonneg {
                    self.nonneg(format!("{name}[{i}][{j}]"), x);
                } else {
                    self.finite(&format!("{name}[{i}][{j}]"), x);
                }
            }
        }
    }

    fn ordered(&mut self, lo_name: &str, lo: &[f64], hi_name: &str, hi: &[f64]) {
        for (i, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            if l.is_finite() && h.is_finite() && l > h {
                self.push(format!("{hi_name}[{i}]"), format!("must be ≥ {lo_name}[{i}] = {l} (got {h})"));
            }
        }
    }

    fn dimension(&mut self, name: &str, n: usize) -> bool {
        if n == 0 {
            self.push(name, "must be ≥ 1");
            false
        } else {
            true
        }
    }
}

/// Bounds for the general nonlinear system with delayed decay terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSystemSpec {
    pub m: usize,
    /// Lower bounds α_i of the decay coefficients.
    pub alpha: Vec<f64>,
    /// Upper bounds A_i of the decay coefficients.
    #[serde(rename = "A")]
    pub a_upper: Vec<f64>,
    /// Leakage delay bounds τ_i.
    pub tau: Vec<f64>,
    /// Transmission delay bounds σ_ij.
    pub sigma: Vec<Vec<f64>>,
    /// Growth bounds L_ij with |F_ij(t, u)| ≤ L_ij |u|.
    #[serde(rename = "L")]
    pub lipschitz: Vec<Vec<f64>>,
    /// The decay term is undelayed (h_i(t) ≡ t).
    #[serde(default)]
    pub diagonal_delay_free: bool,
}

impl GeneralSystemSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        let m = self.m;
        if c.dimension("m", m) {
            c.vec_positive("alpha", &self.alpha, m);
            c.vec_positive("A", &self.a_upper, m);
            c.ordered("alpha", &self.alpha, "A", &self.a_upper);
            c.vec_nonneg("tau", &self.tau, m);
            c.square("sigma", &self.sigma, m, true);
            c.square("L", &self.lipschitz, m, true);
            if self.diagonal_delay_free {
                for (i, &t) in self.tau.iter().enumerate() {
                    if t != 0.0 && t.is_finite() {
                        c.push(format!("tau[{i}]"), format!("must be 0 when diagonal_delay_free is set (got {t})"));
                    }
                }
            }
        }
        c.violations
    }

    pub fn l(&self, i: usize, j: usize) -> f64 {
        self.lipschitz[i][j]
    }

    pub fn min_alpha(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest delay bound over τ_i and σ_ij.
    pub fn max_delay(&self) -> f64 {
        self.tau
            .iter()
            .chain(self.sigma.iter().flatten())
            .copied()
            .fold(0.0, f64::max)
    }

    /// No F_ii terms, the setting of the off-diagonal test matrix.
    pub fn off_diagonal_only(&self) -> bool {
        (0..self.m).all(|i| self.lipschitz[i][i] == 0.0)
    }
}

/// Bounds for the linear system `x_i' = Σ_j a_ij(t) x_j(g_ij(t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSystemSpec {
    pub m: usize,
    /// Lower bounds α_i of -a_ii(t).
    pub alpha: Vec<f64>,
    /// Upper bounds A_i of -a_ii(t).
    #[serde(rename = "A")]
    pub a_upper: Vec<f64>,
    /// Off-diagonal magnitude bounds A_ij (diagonal entries ignored).
    #[serde(rename = "A_off")]
    pub a_off: Vec<Vec<f64>>,
    /// Delay bounds σ_ij; σ_ii is the delay of the diagonal term.
    pub sigma: Vec<Vec<f64>>,
    #[serde(default)]
    pub diagonal_delay_free: bool,
}

impl LinearSystemSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        let m = self.m;
        if c.dimension("m", m) {
            c.vec_positive("alpha", &self.alpha, m);
            c.vec_positive("A", &self.a_upper, m);
            c.ordered("alpha", &self.alpha, "A", &self.a_upper);
            c.square("A_off", &self.a_off, m, true);
            c.square("sigma", &self.sigma, m, true);
        }
        c.violations
    }

    /// Rewrites the linear system in general form: a_i(t) = -a_ii(t) with
    /// leakage delay bound σ_ii, and F_ij(t, u) = a_ij(t) u for i ≠ j.
    pub fn to_general(&self) -> GeneralSystemSpec {
        let m = self.m;
        GeneralSystemSpec {
            m,
            alpha: self.alpha.clone(),
            a_upper: self.a_upper.clone(),
            tau: (0..m)
                .map(|i| if self.diagonal_delay_free { 0.0 } else { self.sigma[i][i] })
                .collect(),
            sigma: (0..m)
                .map(|i| (0..m).map(|j| if i == j { 0.0 } else { self.sigma[i][j] }).collect())
                .collect(),
            lipschitz: (0..m)
                .map(|i| (0..m).map(|j| if i == j { 0.0 } else { self.a_off[i][j] }).collect())
                .collect(),
            diagonal_delay_free: self.diagonal_delay_free,
        }
    }
}

/// Parameters of a BAM network with rate modulation and leakage delays.
///
/// `sig1[j]` bounds the delay of `x_j` inside the `y` equations and `sig2[j]`
/// bounds the delay of `y_j` inside the `x` equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BamSpec {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_conn: Vec<Vec<f64>>,
    pub b_conn: Vec<Vec<f64>>,
    #[serde(rename = "Lf")]
    pub lf: Vec<f64>,
    #[serde(rename = "Lg")]
    pub lg: Vec<f64>,
    pub r_lo: Vec<f64>,
    pub r_hi: Vec<f64>,
    pub p_lo: Vec<f64>,
    pub p_hi: Vec<f64>,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
    pub sig1: Vec<f64>,
    pub sig2: Vec<f64>,
    #[serde(rename = "I")]
    pub input_x: Vec<f64>,
    #[serde(rename = "J")]
    pub input_y: Vec<f64>,
}

impl BamSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        let n = self.n;
        if c.dimension("n", n) {
            c.vec_positive("a", &self.a, n);
            c.vec_positive("b", &self.b, n);
            c.square("a_conn", &self.a_conn, n, false);
            c.square("b_conn", &self.b_conn, n, false);
            c.vec_nonneg("Lf", &self.lf, n);
            c.vec_nonneg("Lg", &self.lg, n);
            c.vec_positive("r_lo", &self.r_lo, n);
            c.vec_positive("r_hi", &self.r_hi, n);
            c.ordered("r_lo", &self.r_lo, "r_hi", &self.r_hi);
            c.vec_positive("p_lo", &self.p_lo, n);
            c.vec_positive("p_hi", &self.p_hi, n);
            c.ordered("p_lo", &self.p_lo, "p_hi", &self.p_hi);
            c.vec_nonneg("tau1", &self.tau1, n);
            c.vec_nonneg("tau2", &self.tau2, n);
            c.vec_nonneg("sig1", &self.sig1, n);
            c.vec_nonneg("sig2", &self.sig2, n);
            c.vec_finite("I", &self.input_x, n);
            c.vec_finite("J", &self.input_y, n);
        }
        c.violations
    }

    pub fn leakage_delay_free(&self) -> bool {
        self.tau1.iter().chain(&self.tau2).all(|&t| t == 0.0)
    }
}

/// Reduces a BAM network to the general form on the deviation from its
/// equilibrium: state `(u, v)` of size `2n`, decay bounds `r·a` and `p·b`,
/// and a block anti-diagonal growth matrix.
pub fn bam_to_general(bam: &BamSpec) -> Result<GeneralSystemSpec, Vec<Violation>> {
    let violations = bam.validate();
    if !violations.is_empty() {
        return Err(violations);
    }
    let n = bam.n;
    let m = 2 * n;
    let mut alpha = Vec::with_capacity(m);
    let mut a_upper = Vec::with_capacity(m);
    let mut tau = Vec::with_capacity(m);
    for i in 0..n {
        alpha.push(bam.r_lo[i] * bam.a[i]);
        a_upper.push(bam.r_hi[i] * bam.a[i]);
        tau.push(bam.tau1[i]);
    }
    for i in 0..n {
        alpha.push(bam.p_lo[i] * bam.b[i]);
        a_upper.push(bam.p_hi[i] * bam.b[i]);
        tau.push(bam.tau2[i]);
    }
    let mut lipschitz = vec![vec![0.0; m]; m];
    let mut sigma = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            lipschitz[i][j + n] = bam.a_conn[i][j].abs() * bam.r_hi[i] * bam.lf[j];
            lipschitz[i + n][j] = bam.b_conn[i][j].abs() * bam.p_hi[i] * bam.lg[j];
            sigma[i][j + n] = bam.sig2[j];
            sigma[i + n][j] = bam.sig1[j];
        }
    }
    Ok(GeneralSystemSpec { m, alpha, a_upper, tau, sigma, lipschitz, diagonal_delay_free: false })
}

/// Constant-coefficient two-neuron network
/// `x' = -a1 x(t-τ1) + a12 f1(y(t-σ1))`, `y' = -a2 y(t-τ2) + a21 f2(x(t-σ2))`
/// with |f_i(u)| ≤ L_i |u|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoNeuronSpec {
    pub a1: f64,
    pub a2: f64,
    pub a12: f64,
    pub a21: f64,
    pub tau1: f64,
    pub tau2: f64,
    #[serde(default)]
    pub sigma1: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
}

impl TwoNeuronSpec {
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker::default();
        c.positive("a1".into(), self.a1);
        c.positive("a2".into(), self.a2);
        c.finite("a12", self.a12);
        c.finite("a21", self.a21);
        c.nonneg("tau1".into(), self.tau1);
        c.nonneg("tau2".into(), self.tau2);
        c.nonneg("sigma1".into(), self.sigma1);
        c.nonneg("sigma2".into(), self.sigma2);
        c.nonneg("L1".into(), self.l1);
        c.nonneg("L2".into(), self.l2);
        c.violations
    }

    /// The same network as a BAM with n = 1, unit rates and zero inputs.
    pub fn to_bam(&self) -> BamSpec {
        BamSpec {
            n: 1,
            a: vec![self.a1],
            b: vec![self.a2],
            a_conn: vec![vec![self.a12]],
            b_conn: vec![vec![self.a21]],
            lf: vec![self.l1],
            lg: vec![self.l2],
            r_lo: vec![1.0],
            r_hi: vec![1.0],
            p_lo: vec![1.0],
            p_hi: vec![1.0],
            tau1: vec![self.tau1],
            tau2: vec![self.tau2],
            sig1: vec![self.sigma2],
            sig2: vec![self.sigma1],
            input_x: vec![0.0],
            input_y: vec![0.0],
        }
    }

    /// Direct general-form description: α = A = (a1, a2), L = [[0, |a12| L1], [|a21| L2, 0]].
    pub fn to_general(&self) -> GeneralSystemSpec {
        GeneralSystemSpec {
            m: 2,
            alpha: vec![self.a1, self.a2],
            a_upper: vec![self.a1, self.a2],
            tau: vec![self.tau1, self.tau2],
            sigma: vec![vec![0.0, self.sigma1], vec![self.sigma2, 0.0]],
            lipschitz: vec![vec![0.0, self.a12.abs() * self.l1], vec![self.a21.abs() * self.l2, 0.0]],
            diagonal_delay_free: false,
        }
    }
}

/// Scalar BAM (n = 1) with rate bounds, as in the two-layer single-neuron model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBamParams {
    pub a: f64,
    pub b: f64,
    /// Coupling weight of f(y) in the x equation.
    pub weight_xy: f64,
    /// Coupling weight of g(x) in the y equation.
    pub weight_yx: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub lf: f64,
    pub lg: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub input_x: f64,
    pub input_y: f64,
}

impl ScalarBamParams {
    pub fn to_bam(&self) -> BamSpec {
        BamSpec {
            n: 1,
            a: vec![self.a],
            b: vec![self.b],
            a_conn: vec![vec![self.weight_xy]],
            b_conn: vec![vec![self.weight_yx]],
            lf: vec![self.lf],
            lg: vec![self.lg],
            r_lo: vec![self.r_lo],
            r_hi: vec![self.r_hi],
            p_lo: vec![self.p_lo],
            p_hi: vec![self.p_hi],
            tau1: vec![self.tau1],
            tau2: vec![self.tau2],
            sig1: vec![self.sigma1],
            sig2: vec![self.sigma2],
            input_x: vec![self.input_x],
            input_y: vec![self.input_y],
        }
    }
}

/// Any supported system, tagged by `kind` in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    General(GeneralSystemSpec),
    Linear(LinearSystemSpec),
    Bam(BamSpec),
    TwoNeuron(TwoNeuronSpec),
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::General(_) => "general",
            SystemSpec::Linear(_) => "linear",
            SystemSpec::Bam(_) => "bam",
            SystemSpec::TwoNeuron(_) => "two_neuron",
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        match self {
            SystemSpec::General(s) => s.validate(),
            SystemSpec::Linear(s) => s.validate(),
            SystemSpec::Bam(s) => s.validate(),
            SystemSpec::TwoNeuron(s) => s.validate(),
        }
    }

    /// General-form bounds of the system (for BAM networks, of the deviation
    /// from equilibrium).
    pub fn to_general(&self) -> Result<GeneralSystemSpec, Vec<Violation>> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(match self {
            SystemSpec::General(s) => s.clone(),
            SystemSpec::Linear(s) => s.to_general(),
            SystemSpec::Bam(s) => bam_to_general(s)?,
            SystemSpec::TwoNeuron(s) => s.to_general(),
        })
    }

    /// BAM view, for the kinds that have one.
    pub fn as_bam(&self) -> Option<BamSpec> {
        match self {
            SystemSpec::Bam(s) => Some(s.clone()),
            SystemSpec::TwoNeuron(s) => Some(s.to_bam()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::presets;

    fn messages(v: &[Violation]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn two_neuron_ref_spec_is_valid() {
        assert!(presets::two_neuron_ref_general().validate().is_empty());
        assert!(presets::two_neuron_ref().validate().is_empty());
    }

    #[test]
    fn zero_alpha_is_reported_with_path() {
        let mut s = presets::two_neuron_ref_general();
        s.alpha[1] = 0.0;
        s.a_upper[1] = 0.0;
        let v = messages(&s.validate());
        assert!(v.iter().any(|m| m.starts_with("alpha[1] must be > 0")), "{v:?}");
    }

    #[test]
    fn negative_tau_is_reported() {
        let mut s = presets::two_neuron_ref_general();
        s.tau[1] = -0.1;
        let v = messages(&s.validate());
        assert_eq!(v, vec!["tau[1] must be ≥ 0 (got -0.1)".to_string()]);
    }

    #[test]
    fn every_violation_is_collected() {
        let s = GeneralSystemSpec {
            m: 2,
            alpha: vec![1.0, 2.0],
            a_upper: vec![0.5, f64::NAN],
            tau: vec![0.0],
            sigma: vec![vec![0.0, -1.0], vec![0.0, 0.0]],
            lipschitz: vec![vec![0.0, 0.0], vec![0.0]],
            diagonal_delay_free: false,
        };
        let v = messages(&s.validate());
        assert!(v.contains(&"A[1] must be finite (got NaN)".to_string()), "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("A[0] must be ≥ alpha[0]")), "{v:?}");
        assert!(v.contains(&"tau must have length 2 (got 1)".to_string()), "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("sigma[0][1] must be ≥ 0")), "{v:?}");
        assert!(v.contains(&"L[1] must have length 2 (got 1)".to_string()), "{v:?}");
    }

    #[test]
    fn unit_bam_reduces_to_unit_general() {
        let bam = ScalarBamParams {
            a: 1.0,
            b: 1.0,
            weight_xy: 1.0,
            weight_yx: 1.0,
            r_lo: 1.0,
            r_hi: 1.0,
            p_lo: 1.0,
            p_hi: 1.0,
            lf: 1.0,
            lg: 1.0,
            tau1: 0.0,
            tau2: 0.0,
            sigma1: 0.0,
            sigma2: 0.0,
            input_x: 0.0,
            input_y: 0.0,
        }
        .to_bam();
        let g = bam_to_general(&bam).unwrap();
        assert_eq!(g.m, 2);
        assert_eq!(g.alpha, vec![1.0, 1.0]);
        assert_eq!(g.a_upper, vec![1.0, 1.0]);
        assert_eq!(g.lipschitz, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn leaky_bam_reduction_at_zero_modulation() {
        let g = bam_to_general(&presets::leaky_bam(0.0)).unwrap();
        assert_eq!(g.m, 2);
        assert_eq!(g.alpha, vec![20.0, 40.0]);
        assert_eq!(g.a_upper, vec![20.0, 40.0]);
        assert_eq!(g.tau, vec![1.0 / 1000.0, 1.0 / 1000.0]);
        assert!((g.lipschitz[0][1] - 20.0 / 720.0).abs() < 1e-15);
        assert!((g.lipschitz[1][0] - 40.0 / 200.0).abs() < 1e-15);
        assert_eq!(g.lipschitz[0][0], 0.0);
        assert_eq!(g.lipschitz[1][1], 0.0);
        assert_eq!(g.sigma, vec![vec![0.0, 3.0], vec![2.0, 0.0]]);
    }

    #[test]
    fn two_neuron_routes_agree() {
        let two = presets::two_neuron_ref();
        let via_bam = bam_to_general(&two.to_bam()).unwrap();
        assert_eq!(via_bam, two.to_general());
        assert_eq!(via_bam, presets::two_neuron_ref_general());
    }

    #[test]
    fn two_neuron_without_delays_is_valid() {
        let mut two = presets::two_neuron_ref();
        two.tau1 = 0.0;
        two.tau2 = 0.0;
        assert!(two.validate().is_empty());
        assert!(two.to_bam().leakage_delay_free());
    }

    #[test]
    fn negative_gain_rejected() {
        let mut two = presets::two_neuron_ref();
        two.a1 = -1.0;
        assert_eq!(messages(&two.validate()), vec!["a1 must be > 0 (got -1)".to_string()]);
        assert!(bam_to_general(&two.to_bam()).is_err());
    }

    #[test]
    fn linear_to_general_moves_diagonal_delay_into_leakage() {
        let lin = LinearSystemSpec {
            m: 2,
            alpha: vec![1.0, 1.0],
            a_upper: vec![1.0, 1.0],
            a_off: vec![vec![9.0, 0.1], vec![0.1, 9.0]],
            sigma: vec![vec![0.25, 0.5], vec![0.5, 0.25]],
            diagonal_delay_free: false,
        };
        let g = lin.to_general();
        assert_eq!(g.tau, vec![0.25, 0.25]);
        assert_eq!(g.lipschitz, vec![vec![0.0, 0.1], vec![0.1, 0.0]]);
        assert_eq!(g.sigma, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
    }

    #[test]
    fn tagged_serialization() {
        let s = SystemSpec::TwoNeuron(presets::two_neuron_ref());
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["kind"], "two_neuron");
        assert_eq!(json["L1"], 0.5);
        let back: SystemSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }
}
