//! Closed-form two-dimensional criteria and the comparison with the
//! classical two-neuron attractivity condition.

use serde::{Deserialize, Serialize};

use super::{ensure_valid, Criterion, CriteriaError, Margin, Status, StabilityVerdict};
use crate::system::{SystemSpec, TwoNeuronSpec};

/// Closed-form 2x2 criteria.
///
/// * 4: delayed general systems (`A_1(A_1+L_11)τ_1 + L_11 < α_1` and the
///   product inequality).
/// * 5: undelayed decay terms (`L_11 < α_1` and
///   `(α_1-L_11)(α_2-L_22) > L_12 L_21`).
/// * 6: delayed linear systems (`σ_11 < α_1/A_1²` and the product inequality).
/// * 7: linear systems with undelayed diagonal (`α_1 α_2 > A_12 A_21`).
pub fn corollary_m2(spec: &SystemSpec, which: u8, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    let criterion = match which {
        4 => Criterion::Cor4,
        5 => Criterion::Cor5,
        6 => Criterion::Cor6,
        7 => Criterion::Cor7,
        _ => {
            return Err(CriteriaError::FamilyMismatch {
                criterion: Criterion::Cor4,
                reason: format!("no two-dimensional corollary numbered {which}"),
            })
        }
    };
    let g = spec.to_general().map_err(CriteriaError::InvalidSpec)?;
    if g.m != 2 {
        return Err(CriteriaError::Dimension { expected: 2, got: g.m });
    }
    let mismatch = |reason: &str| CriteriaError::FamilyMismatch { criterion, reason: reason.to_string() };
    let margins = match which {
        4 => {
            let d = |i: usize| g.a_upper[i] * (g.a_upper[i] + g.lipschitz[i][i]) * g.tau[i] + g.lipschitz[i][i];
            let lhs = (g.alpha[0] - d(0)) * (g.alpha[1] - d(1));
            let rhs = g.lipschitz[0][1] * g.lipschitz[1][0] * (1.0 + g.a_upper[0] * g.tau[0]) * (1.0 + g.a_upper[1] * g.tau[1]);
            vec![
                Margin::less("A1(A1+L11)tau1+L11 < alpha1", d(0), g.alpha[0]),
                Margin::greater("product inequality", lhs, rhs),
            ]
        }
        5 => {
            let delay_free = match spec {
                SystemSpec::General(s) => s.diagonal_delay_free,
                SystemSpec::Linear(s) => s.diagonal_delay_free,
                _ => false,
            };
            if !delay_free {
                return Err(mismatch("requires diagonal_delay_free"));
            }
            let l = &g.lipschitz;
            vec![
                Margin::less("L11 < alpha1", l[0][0], g.alpha[0]),
                Margin::greater(
                    "(alpha1-L11)(alpha2-L22) > L12 L21",
                    (g.alpha[0] - l[0][0]) * (g.alpha[1] - l[1][1]),
                    l[0][1] * l[1][0],
                ),
            ]
        }
        6 | 7 => {
            let SystemSpec::Linear(lin) = spec else {
                return Err(mismatch("requires a linear system"));
            };
            if which == 6 {
                if lin.diagonal_delay_free {
                    return Err(mismatch("requires a delayed diagonal term"));
                }
                let (a, alpha, s) = (&lin.a_upper, &lin.alpha, [lin.sigma[0][0], lin.sigma[1][1]]);
                let lhs = (alpha[0] - a[0] * a[0] * s[0]) * (alpha[1] - a[1] * a[1] * s[1]);
                let rhs = lin.a_off[0][1] * lin.a_off[1][0] * (1.0 + a[0] * s[0]) * (1.0 + a[1] * s[1]);
                vec![
                    Margin::less("sigma11 < alpha1/A1^2", s[0], alpha[0] / (a[0] * a[0])),
                    Margin::greater("product inequality", lhs, rhs),
                ]
            } else {
                if !lin.diagonal_delay_free {
                    return Err(mismatch("requires diagonal_delay_free"));
                }
                vec![Margin::greater(
                    "alpha1 alpha2 > A12 A21",
                    lin.alpha[0] * lin.alpha[1],
                    lin.a_off[0][1] * lin.a_off[1][0],
                )]
            }
        }
        _ => unreachable!(),
    };
    Ok(StabilityVerdict::from_margins(criterion, margins, tol))
}

/// Both two-neuron criteria side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GopalsamyComparison {
    /// `a_i τ_i < 1` for both units; without it neither criterion applies.
    pub applicable: bool,
    pub preconditions: Vec<Margin>,
    pub criterion17: StabilityVerdict,
    pub criterion18: StabilityVerdict,
}

/// Evaluates the per-unit attractivity condition
/// `(1 - a_i τ_i)/(1 + a_i τ_i) > a_ij L_i / a_i` and the product condition
/// `(1-a_1τ_1)(1-a_2τ_2)/((1+a_1τ_1)(1+a_2τ_2)) > a_12 a_21 L_1 L_2/(a_1 a_2)`.
/// The first implies the second; this is checked on every call.
pub fn gopalsamy_vs_18(spec: &TwoNeuronSpec, tol: f64) -> Result<GopalsamyComparison, CriteriaError> {
    ensure_valid(spec.validate())?;
    let (p1, p2) = (spec.a1 * spec.tau1, spec.a2 * spec.tau2);
    let preconditions = vec![Margin::less("a1 tau1 < 1", p1, 1.0), Margin::less("a2 tau2 < 1", p2, 1.0)];
    let applicable = preconditions.iter().all(|m| m.slack > 0.0);
    let (w12, w21) = (spec.a12.abs(), spec.a21.abs());
    let m17 = vec![
        Margin::greater("(1-a1 tau1)/(1+a1 tau1) > a12 L1/a1", (1.0 - p1) / (1.0 + p1), w12 * spec.l1 / spec.a1),
        Margin::greater("(1-a2 tau2)/(1+a2 tau2) > a21 L2/a2", (1.0 - p2) / (1.0 + p2), w21 * spec.l2 / spec.a2),
    ];
    let m18 = vec![Margin::greater(
        "(1-a1 tau1)(1-a2 tau2)/((1+a1 tau1)(1+a2 tau2)) > a12 a21 L1 L2/(a1 a2)",
        (1.0 - p1) * (1.0 - p2) / ((1.0 + p1) * (1.0 + p2)),
        w12 * w21 * spec.l1 * spec.l2 / (spec.a1 * spec.a2),
    )];
    let mut criterion17 = StabilityVerdict::from_margins(Criterion::Gopalsamy17, m17, tol);
    let mut criterion18 = StabilityVerdict::from_margins(Criterion::Criterion18, m18, tol);
    if !applicable {
        for v in [&mut criterion17, &mut criterion18] {
            v.status = Status::Inconclusive;
            v.notes.push("a_i tau_i < 1 fails; criterion inapplicable".into());
        }
    } else if criterion17.margins.iter().all(|m| m.slack > 0.0) {
        let m = &criterion18.margins[0];
        let scale = m.lhs.abs().max(m.rhs.abs()).max(1.0);
        assert!(
            m.slack > -8.0 * f64::EPSILON * scale,
            "per-unit condition holds but the product condition fails: {m:?}"
        );
    }
    Ok(GopalsamyComparison { applicable, preconditions, criterion17, criterion18 })
}
