//! Test matrices, M-matrix verdicts, decay-rate certification and the
//! closed-form corollaries.
//!
//! Every verdict is one-sided: `stable_certified` means a sufficient
//! condition holds, `inconclusive` means it does not. No verdict claims
//! instability.

mod bam;
mod corollaries;
mod matrices;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{is_m_matrix, LinalgError, MMatrixReport, Matrix};
use crate::system::{GeneralSystemSpec, SystemSpec, Violation};

pub use bam::{build_c_bam, corollary10, corollary11, corollary9, theorem3_verdict};
pub use corollaries::{corollary_m2, gopalsamy_vs_18, GopalsamyComparison};
pub use matrices::{build_b_nodelay, build_c, build_c_lambda, build_c_offdiag, build_d_linear, build_f_linear};

/// Number of bisection steps used by [`certify_decay_rate`].
pub const BISECTION_STEPS: usize = 60;

#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error("invalid system: {}", join(.0))]
    InvalidSpec(Vec<Violation>),
    #[error("{criterion} does not apply: {reason}")]
    FamilyMismatch { criterion: Criterion, reason: String },
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("lambda = {lambda} outside [0, {max})")]
    LambdaOutOfRange { lambda: f64, max: f64 },
    #[error("test matrix is not an M-matrix (smallest leading minor {margin:e}); not certified stable")]
    NotCertified { margin: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub(crate) fn ensure_valid(v: Vec<Violation>) -> Result<(), CriteriaError> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(CriteriaError::InvalidSpec(v))
    }
}

/// Which sufficient condition a verdict is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Criterion {
    Theorem1,
    Cor0,
    Cor1,
    Cor2,
    Cor3,
    Cor4,
    Cor5,
    Cor6,
    Cor7,
    Thm3,
    Cor9(u8),
    Cor10(u8),
    Cor11,
    Gopalsamy17,
    Criterion18,
}

impl Criterion {
    pub const ALL: [Criterion; 21] = [
        Criterion::Theorem1,
        Criterion::Cor0,
        Criterion::Cor1,
        Criterion::Cor2,
        Criterion::Cor3,
        Criterion::Cor4,
        Criterion::Cor5,
        Criterion::Cor6,
        Criterion::Cor7,
        Criterion::Thm3,
        Criterion::Cor9(1),
        Criterion::Cor9(2),
        Criterion::Cor9(3),
        Criterion::Cor9(4),
        Criterion::Cor10(1),
        Criterion::Cor10(2),
        Criterion::Cor10(3),
        Criterion::Cor10(4),
        Criterion::Cor11,
        Criterion::Gopalsamy17,
        Criterion::Criterion18,
    ];

    /// Criteria decided by an M-matrix test rather than closed-form margins.
    pub fn is_matrix_test(self) -> bool {
        matches!(
            self,
            Criterion::Theorem1
                | Criterion::Cor0
                | Criterion::Cor1
                | Criterion::Cor2
                | Criterion::Cor3
                | Criterion::Thm3
        )
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Theorem1 => f.write_str("theorem1"),
            Criterion::Cor0 => f.write_str("cor0"),
            Criterion::Cor1 => f.write_str("cor1"),
            Criterion::Cor2 => f.write_str("cor2"),
            Criterion::Cor3 => f.write_str("cor3"),
            Criterion::Cor4 => f.write_str("cor4"),
            Criterion::Cor5 => f.write_str("cor5"),
            Criterion::Cor6 => f.write_str("cor6"),
            Criterion::Cor7 => f.write_str("cor7"),
            Criterion::Thm3 => f.write_str("thm3"),
            Criterion::Cor9(k) => write!(f, "cor9-{k}"),
            Criterion::Cor10(k) => write!(f, "cor10-{k}"),
            Criterion::Cor11 => f.write_str("cor11"),
            Criterion::Gopalsamy17 => f.write_str("gopalsamy17"),
            Criterion::Criterion18 => f.write_str("criterion18"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown criterion '{0}'")]
pub struct UnknownCriterion(pub String);

impl FromStr for Criterion {
    type Err = UnknownCriterion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let part = |rest: &str| match rest {
            "1" => Some(1),
            "2" => Some(2),
            "3" => Some(3),
            "4" => Some(4),
            _ => None,
        };
        let c = match s {
            "theorem1" => Criterion::Theorem1,
            "cor0" => Criterion::Cor0,
            "cor1" => Criterion::Cor1,
            "cor2" => Criterion::Cor2,
            "cor3" => Criterion::Cor3,
            "cor4" => Criterion::Cor4,
            "cor5" => Criterion::Cor5,
            "cor6" => Criterion::Cor6,
            "cor7" => Criterion::Cor7,
            "thm3" => Criterion::Thm3,
            "cor11" => Criterion::Cor11,
            "gopalsamy17" => Criterion::Gopalsamy17,
            "criterion18" => Criterion::Criterion18,
            other => {
                if let Some(k) = other.strip_prefix("cor9-").and_then(part) {
                    Criterion::Cor9(k)
                } else if let Some(k) = other.strip_prefix("cor10-").and_then(part) {
                    Criterion::Cor10(k)
                } else {
                    return Err(UnknownCriterion(s.to_string()));
                }
            }
        };
        Ok(c)
    }
}

impl From<Criterion> for String {
    fn from(c: Criterion) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Criterion {
    type Error = UnknownCriterion;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    StableCertified,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

/// One named strict inequality `lhs < rhs` or `lhs > rhs` with its slack
/// (positive when the inequality holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub slack: f64,
}

impl Margin {
    pub fn less(name: impl Into<String>, lhs: f64, rhs: f64) -> Margin {
        Margin { name: name.into(), lhs, relation: Relation::Less, rhs, slack: rhs - lhs }
    }

    pub fn greater(name: impl Into<String>, lhs: f64, rhs: f64) -> Margin {
        Margin { name: name.into(), lhs, relation: Relation::Greater, rhs, slack: lhs - rhs }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack > tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub status: Status,
    pub criterion: Criterion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_matrix: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<MMatrixReport>,
    pub margins: Vec<Margin>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        self.status == Status::StableCertified
    }

    /// Verdict from an M-matrix classification of `matrix`; margins are the
    /// leading principal minors.
    pub(crate) fn from_matrix(criterion: Criterion, matrix: Matrix, tol: f64) -> StabilityVerdict {
        let report = is_m_matrix(&matrix, tol);
        let margins = report
            .minors
            .iter()
            .enumerate()
            .map(|(k, &d)| Margin::greater(format!("leading minor {}", k + 1), d, 0.0))
            .collect();
        let mut notes = Vec::new();
        if !report.off_diagonal_ok {
            notes.push("test matrix has a positive off-diagonal entry".to_string());
        }
        StabilityVerdict {
            status: if report.is_m_matrix { Status::StableCertified } else { Status::Inconclusive },
            criterion,
            test_matrix: Some(matrix),
            report: Some(report),
            margins,
            notes,
        }
    }

    /// Verdict from closed-form margins: stable iff every margin holds.
    pub(crate) fn from_margins(criterion: Criterion, margins: Vec<Margin>, tol: f64) -> StabilityVerdict {
        let stable = margins.iter().all(|m| m.holds(tol));
        StabilityVerdict {
            status: if stable { Status::StableCertified } else { Status::Inconclusive },
            criterion,
            test_matrix: None,
            report: None,
            margins,
            notes: Vec::new(),
        }
    }
}

/// Certified exponential decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub lambda0: f64,
    /// Smallest leading principal minor of `C(lambda0)`.
    pub boundary_margin: f64,
    pub iterations: usize,
    /// Smallest bisection point found to fail, or the search limit
    /// `min α - tol` when that already passes.
    pub upper_bracket: f64,
}

/// Largest rate found by bisection on `[0, min α - tol]` for which `C(λ)`
/// stays an M-matrix. The value is a certified rate, not necessarily the
/// best one.
pub fn certify_decay_rate(spec: &GeneralSystemSpec, tol: f64) -> Result<DecayCertificate, CriteriaError> {
    let c = build_c(spec)?;
    let base = is_m_matrix(&c, tol);
    if !base.is_m_matrix {
        return Err(CriteriaError::NotCertified { margin: base.margin });
    }
    let check = |lambda: f64| -> Result<MMatrixReport, CriteriaError> {
        Ok(is_m_matrix(&build_c_lambda(spec, lambda)?, tol))
    };
    let limit = spec.min_alpha() - tol;
    if limit <= 0.0 {
        return Ok(DecayCertificate { lambda0: 0.0, boundary_margin: base.margin, iterations: 0, upper_bracket: 0.0 });
    }
    let at_limit = check(limit)?;
    if at_limit.is_m_matrix {
        return Ok(DecayCertificate {
            lambda0: limit,
            boundary_margin: at_limit.margin,
            iterations: 0,
            upper_bracket: limit,
        });
    }
    let (mut lo, mut hi) = (0.0, limit);
    let mut lo_margin = base.margin;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let r = check(mid)?;
        if r.is_m_matrix {
            lo = mid;
            lo_margin = r.margin;
        } else {
            hi = mid;
        }
    }
    Ok(DecayCertificate { lambda0: lo, boundary_margin: lo_margin, iterations: BISECTION_STEPS, upper_bracket: hi })
}

/// Matrix criterion with the sharpest test matrix for the spec family:
/// `C` for delayed general systems, `B` for undelayed decay terms,
/// `D`/`F` for linear systems and `C_BAM` for BAM networks.
pub fn theorem1_verdict(spec: &SystemSpec, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    evaluate(default_criterion(spec), spec, tol, None)
}

/// The criterion [`theorem1_verdict`] selects for `spec`.
pub fn default_criterion(spec: &SystemSpec) -> Criterion {
    match spec {
        SystemSpec::General(g) if g.diagonal_delay_free => Criterion::Cor1,
        SystemSpec::General(_) | SystemSpec::TwoNeuron(_) => Criterion::Theorem1,
        SystemSpec::Linear(l) if l.diagonal_delay_free => Criterion::Cor3,
        SystemSpec::Linear(_) => Criterion::Cor2,
        SystemSpec::Bam(_) => Criterion::Thm3,
    }
}

/// Every criterion whose family and dimension requirements `spec` meets.
pub fn applicable_criteria(spec: &SystemSpec) -> Vec<Criterion> {
    let mut out = vec![Criterion::Theorem1];
    let general = match spec.to_general() {
        Ok(g) => g,
        Err(_) => return out,
    };
    if general.off_diagonal_only() {
        out.push(Criterion::Cor0);
    }
    match spec {
        SystemSpec::General(g) => {
            if g.diagonal_delay_free {
                out.push(Criterion::Cor1);
            }
        }
        SystemSpec::Linear(l) => out.push(if l.diagonal_delay_free { Criterion::Cor3 } else { Criterion::Cor2 }),
        _ => {}
    }
    if general.m == 2 {
        out.push(Criterion::Cor4);
        match spec {
            SystemSpec::General(g) if g.diagonal_delay_free => out.push(Criterion::Cor5),
            SystemSpec::Linear(l) if l.diagonal_delay_free => out.extend([Criterion::Cor5, Criterion::Cor7]),
            SystemSpec::Linear(_) => out.push(Criterion::Cor6),
            _ => {}
        }
    }
    if let Some(b) = spec.as_bam() {
        out.push(Criterion::Thm3);
        out.extend((1..=4).map(Criterion::Cor9));
        if b.leakage_delay_free() {
            out.extend((1..=4).map(Criterion::Cor10));
        }
        if b.n == 1 {
            out.push(Criterion::Cor11);
        }
    }
    if matches!(spec, SystemSpec::TwoNeuron(_)) {
        out.extend([Criterion::Gopalsamy17, Criterion::Criterion18]);
    }
    out
}

/// Evaluates one named criterion on `spec`. `weights` feeds the weighted
/// conditions of the BAM corollaries.
pub fn evaluate(
    criterion: Criterion,
    spec: &SystemSpec,
    tol: f64,
    weights: Option<&[f64]>,
) -> Result<StabilityVerdict, CriteriaError> {
    let general = spec.to_general().map_err(CriteriaError::InvalidSpec)?;
    let mismatch = |reason: &str| CriteriaError::FamilyMismatch { criterion, reason: reason.to_string() };
    let bam = || spec.as_bam().ok_or_else(|| mismatch("requires a bam or two_neuron system"));
    match criterion {
        Criterion::Theorem1 => Ok(StabilityVerdict::from_matrix(criterion, build_c(&general)?, tol)),
        Criterion::Cor0 => {
            if !general.off_diagonal_only() {
                return Err(mismatch("requires L_ii = 0 for every i"));
            }
            Ok(StabilityVerdict::from_matrix(criterion, build_c_offdiag(&general)?, tol))
        }
        Criterion::Cor1 => Ok(StabilityVerdict::from_matrix(criterion, build_b_nodelay(&general)?, tol)),
        Criterion::Cor2 | Criterion::Cor3 => {
            let SystemSpec::Linear(lin) = spec else {
                return Err(mismatch("requires a linear system"));
            };
            let m = if criterion == Criterion::Cor2 { build_d_linear(lin)? } else { build_f_linear(lin)? };
            Ok(StabilityVerdict::from_matrix(criterion, m, tol))
        }
        Criterion::Cor4 => corollary_m2(spec, 4, tol),
        Criterion::Cor5 => corollary_m2(spec, 5, tol),
        Criterion::Cor6 => corollary_m2(spec, 6, tol),
        Criterion::Cor7 => corollary_m2(spec, 7, tol),
        Criterion::Thm3 => theorem3_verdict(&bam()?, tol),
        Criterion::Cor9(k) => corollary9(&bam()?, k, weights, tol),
        Criterion::Cor10(k) => corollary10(&bam()?, k, weights, tol),
        Criterion::Cor11 => corollary11(&bam()?, tol),
        Criterion::Gopalsamy17 | Criterion::Criterion18 => {
            let SystemSpec::TwoNeuron(two) = spec else {
                return Err(mismatch("requires a two_neuron system"));
            };
            let cmp = gopalsamy_vs_18(two, tol)?;
            Ok(if criterion == Criterion::Gopalsamy17 { cmp.criterion17 } else { cmp.criterion18 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::presets;

    #[test]
    fn criterion_tags_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(c.to_string().parse::<Criterion>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<Criterion>(&json).unwrap(), c);
        }
        assert!("cor9-5".parse::<Criterion>().is_err());
        assert!("theorem2".parse::<Criterion>().is_err());
    }

    #[test]
    fn two_neuron_ref_is_certified_with_positive_rate() {
        let spec = presets::two_neuron_ref_general();
        let v = theorem1_verdict(&SystemSpec::General(spec.clone()), 1e-12).unwrap();
        assert!(v.is_stable());
        let cert = certify_decay_rate(&spec, 1e-12).unwrap();
        assert!(cert.lambda0 > 0.0 && cert.lambda0 < 0.5);
        assert!(is_m_matrix(&build_c_lambda(&spec, cert.lambda0).unwrap(), 1e-12).is_m_matrix);
        let width = cert.upper_bracket - cert.lambda0;
        assert!(width > 0.0 && width < 1e-15);
        let beyond = cert.lambda0 + 2.0 * width;
        assert!(!is_m_matrix(&build_c_lambda(&spec, beyond).unwrap(), 1e-12).is_m_matrix);
        assert_eq!(cert.iterations, BISECTION_STEPS);
    }

    #[test]
    fn identity_c_certifies_up_to_the_limit() {
        let spec = GeneralSystemSpec {
            m: 1,
            alpha: vec![1.0],
            a_upper: vec![1.0],
            tau: vec![0.0],
            sigma: vec![vec![0.0]],
            lipschitz: vec![vec![0.0]],
            diagonal_delay_free: false,
        };
        let cert = certify_decay_rate(&spec, 1e-12).unwrap();
        assert_eq!(cert.lambda0, 1.0 - 1e-12);
        assert_eq!(cert.upper_bracket, cert.lambda0);
    }

    #[test]
    fn margin_at_tolerance_gives_tiny_rate() {
        // det C = 1 - l^2 for this symmetric undelayed pair; pick l so it
        // sits just above the tolerance.
        let tol: f64 = 1e-12;
        let l = (1.0 - 4.0 * tol).sqrt();
        let spec = GeneralSystemSpec {
            m: 2,
            alpha: vec![1.0, 1.0],
            a_upper: vec![1.0, 1.0],
            tau: vec![0.0, 0.0],
            sigma: vec![vec![0.0; 2]; 2],
            lipschitz: vec![vec![0.0, l], vec![l, 0.0]],
            diagonal_delay_free: false,
        };
        let cert = certify_decay_rate(&spec, tol).unwrap();
        assert!(cert.lambda0 < 1e-11, "{cert:?}");
    }

    #[test]
    fn uncertified_spec_is_rejected() {
        let mut spec = presets::two_neuron_ref_general();
        spec.lipschitz[0][1] = 5.0;
        assert!(matches!(certify_decay_rate(&spec, 1e-12), Err(CriteriaError::NotCertified { .. })));
        let v = theorem1_verdict(&SystemSpec::General(spec), 1e-12).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        assert!(v.report.unwrap().minors[1] < 0.0);
    }

    #[test]
    fn dispatch_follows_family() {
        assert_eq!(default_criterion(&SystemSpec::Linear(presets::sharpness_pair(0.5))), Criterion::Cor3);
        assert_eq!(default_criterion(&SystemSpec::Bam(presets::leaky_bam(0.0))), Criterion::Thm3);
        let two = SystemSpec::TwoNeuron(presets::two_neuron_ref());
        let all = applicable_criteria(&two);
        for c in [Criterion::Theorem1, Criterion::Cor4, Criterion::Thm3, Criterion::Cor11, Criterion::Criterion18] {
            assert!(all.contains(&c), "{c}");
        }
        for c in all {
            evaluate(c, &two, 1e-12, None).unwrap();
        }
    }

    #[test]
    fn mismatched_family_is_an_error() {
        let spec = SystemSpec::General(presets::two_neuron_ref_general());
        assert!(matches!(evaluate(Criterion::Cor7, &spec, 1e-12, None), Err(CriteriaError::FamilyMismatch { .. })));
        assert!(matches!(evaluate(Criterion::Cor11, &spec, 1e-12, None), Err(CriteriaError::FamilyMismatch { .. })));
    }

    #[test]
    fn verdict_serializes_with_tags() {
        let v = theorem1_verdict(&SystemSpec::TwoNeuron(presets::two_neuron_ref()), 1e-12).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["status"], "stable_certified");
        assert_eq!(json["criterion"], "theorem1");
        assert_eq!(json["margins"][0]["relation"], ">");
    }
}
