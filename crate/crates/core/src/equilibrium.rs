//! Existence conditions and fixed-point computation of BAM equilibria.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{spectral_radius, LinalgError, Matrix};
use crate::system::{Activation, BamSpec, Violation};

/// Consecutive growing steps after which the iteration is declared divergent.
pub const DIVERGENCE_STREAK: usize = 10;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("invalid network: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSpec(Vec<Violation>),
    #[error("expected {expected} activations in {name}, got {got}")]
    ActivationCount { name: &'static str, expected: usize, got: usize },
    #[error("tolerance must be positive and finite")]
    InvalidTolerance,
    #[error("iteration diverged after {iterations} steps (last step {step:e}, contraction estimate {contraction_estimate:?})")]
    Diverged { iterations: usize, step: f64, contraction_estimate: Option<f64>, last_x: Vec<f64>, last_y: Vec<f64> },
    #[error("no convergence in {iterations} steps (last step {step:e}, contraction estimate {contraction_estimate:?})")]
    MaxIterations { iterations: usize, step: f64, contraction_estimate: Option<f64>, last_x: Vec<f64>, last_y: Vec<f64> },
    #[error("iterate became non-finite at step {iteration}")]
    NonFinite { iteration: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The two Lipschitz matrices of the fixed-point formulations: `A` for the
/// state form and `B` for the scaled form. Both are block anti-diagonal.
pub fn build_existence_matrices(bam: &BamSpec) -> Result<(Matrix, Matrix), EquilibriumError> {
    let v = bam.validate();
    if !v.is_empty() {
        return Err(EquilibriumError::InvalidSpec(v));
    }
    let n = bam.n;
    let block = |upper: &dyn Fn(usize, usize) -> f64, lower: &dyn Fn(usize, usize) -> f64| {
        let rows: Vec<Vec<f64>> = (0..2 * n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| match (i < n, j < n) {
                        (true, false) => upper(i, j - n),
                        (false, true) => lower(i - n, j),
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Matrix::from_rows(&rows)
    };
    let a = block(
        &|i, j| bam.a_conn[i][j].abs() * bam.lf[j] / bam.a[i],
        &|i, j| bam.b_conn[i][j].abs() * bam.lg[j] / bam.b[i],
    )?;
    let b = block(
        &|i, j| bam.a_conn[i][j].abs() * bam.lf[j] / bam.b[j],
        &|i, j| bam.b_conn[i][j].abs() * bam.lg[j] / bam.a[j],
    )?;
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCondition {
    /// 1-8: spectral radius, max row sum, max column sum and squared
    /// Frobenius norm of `A`, then the same four for `B`.
    pub index: u8,
    pub description: String,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub matrix_a: Matrix,
    pub matrix_b: Matrix,
    pub conditions: Vec<ExistenceCondition>,
    pub exists_unique: bool,
}

impl ExistenceReport {
    pub fn holds(&self, index: u8) -> bool {
        self.conditions.iter().any(|c| c.index == index && c.holds)
    }
}

/// Evaluates the eight sufficient conditions for a unique equilibrium.
pub fn equilibrium_exists(bam: &BamSpec) -> Result<ExistenceReport, EquilibriumError> {
    let (a, b) = build_existence_matrices(bam)?;
    let mut conditions = Vec::with_capacity(8);
    for (offset, name, m) in [(0u8, "A", &a), (4, "B", &b)] {
        let rho = match spectral_radius(m, 1e-14, 100_000) {
            Ok(r) => r,
            Err(LinalgError::NoConvergence { estimate, .. }) => estimate,
            Err(e) => return Err(e.into()),
        };
        for (k, description, value) in [
            (1, format!("spectral radius of {name} < 1"), rho),
            (2, format!("max row sum of {name} < 1"), m.norm_inf()),
            (3, format!("max column sum of {name} < 1"), m.norm_one()),
            (4, format!("sum of squared entries of {name} < 1"), m.frobenius_sq()),
        ] {
            conditions.push(ExistenceCondition { index: offset + k, description, value, holds: value < 1.0 });
        }
    }
    let exists_unique = conditions.iter().any(|c| c.holds);
    Ok(ExistenceReport { matrix_a: a, matrix_b: b, conditions, exists_unique })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    /// Largest absolute violation of `a_i x_i = Σ a_ij f_j(y_j) + I_i` and
    /// `b_i y_i = Σ b_ij g_j(x_j) + J_i`.
    pub residual: f64,
    pub iterations: usize,
    /// Geometric-mean ratio of successive step norms over the tail of the
    /// iteration, when enough informative steps were taken.
    pub contraction_estimate: Option<f64>,
    pub step_norms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Equilibrium {
    /// `(x*, y*)` as one state vector.
    pub fn state(&self) -> Vec<f64> {
        self.x_star.iter().chain(&self.y_star).copied().collect()
    }
}

fn check_activations(name: &'static str, acts: &[Activation], n: usize) -> Result<(), EquilibriumError> {
    if acts.len() != n {
        return Err(EquilibriumError::ActivationCount { name, expected: n, got: acts.len() });
    }
    Ok(())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn contraction_estimate(steps: &[f64], floor: f64) -> Option<f64> {
    let useful: Vec<f64> = steps.iter().copied().take_while(|&s| s > floor).collect();
    if useful.len() < 3 {
        return None;
    }
    let start = useful.len() / 2;
    let (first, last) = (useful[start], useful[useful.len() - 1]);
    let span = (useful.len() - 1 - start) as f64;
    if span == 0.0 {
        return None;
    }
    Some((last / first).powf(1.0 / span))
}

/// Iterates the scaled fixed-point form
/// `u_i = Σ_j a_ij f_j(v_j / b_j) + I_i`, `v_i = Σ_j b_ij g_j(u_j / a_j) + J_i`
/// from `(u, v) = (I, J)` until the sup-norm step drops below
/// `tol · max(1, ‖(u, v)‖∞)`, then returns `x = u / a`, `y = v / b`.
pub fn solve_equilibrium(
    bam: &BamSpec,
    f: &[Activation],
    g: &[Activation],
    tol: f64,
    max_iter: usize,
) -> Result<Equilibrium, EquilibriumError> {
    let existence = equilibrium_exists(bam)?;
    let n = bam.n;
    check_activations("f", f, n)?;
    check_activations("g", g, n)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(EquilibriumError::InvalidTolerance);
    }
    let mut warnings = Vec::new();
    if !existence.exists_unique {
        warnings.push("no existence condition holds; the iteration may not converge".to_string());
    }

    let map = |u: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let nu = (0..n)
            .map(|i| (0..n).map(|j| bam.a_conn[i][j] * f[j].eval(v[j] / bam.b[j])).sum::<f64>() + bam.input_x[i])
            .collect();
        let nv = (0..n)
            .map(|i| (0..n).map(|j| bam.b_conn[i][j] * g[j].eval(u[j] / bam.a[j])).sum::<f64>() + bam.input_y[i])
            .collect();
        (nu, nv)
    };

    let mut u = bam.input_x.clone();
    let mut v = bam.input_y.clone();
    let mut steps = Vec::new();
    let mut growing = 0;
    for it in 1..=max_iter {
        let (nu, nv) = map(&u, &v);
        let step = u.iter().zip(&nu).chain(v.iter().zip(&nv)).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if !step.is_finite() || nu.iter().chain(&nv).any(|x| !x.is_finite()) {
            return Err(EquilibriumError::NonFinite { iteration: it });
        }
        u = nu;
        v = nv;
        let scale = sup(&u).max(sup(&v)).max(1.0);
        if let Some(&prev) = steps.last() {
            growing = if step > prev { growing + 1 } else { 0 };
        }
        steps.push(step);
        let floor = 16.0 * f64::EPSILON * scale;
        if step <= tol * scale {
            let x: Vec<f64> = (0..n).map(|i| u[i] / bam.a[i]).collect();
            let y: Vec<f64> = (0..n).map(|i| v[i] / bam.b[i]).collect();
            return Ok(Equilibrium {
                residual: residual(bam, f, g, &x, &y),
                iterations: it,
                contraction_estimate: contraction_estimate(&steps, floor),
                step_norms: steps,
                x_star: x,
                y_star: y,
                warnings,
            });
        }
        if growing >= DIVERGENCE_STREAK {
            return Err(EquilibriumError::Diverged {
                iterations: it,
                step,
                contraction_estimate: contraction_estimate(&steps, floor),
                last_x: (0..n).map(|i| u[i] / bam.a[i]).collect(),
                last_y: (0..n).map(|i| v[i] / bam.b[i]).collect(),
            });
        }
    }
    let scale = sup(&u).max(sup(&v)).max(1.0);
    Err(EquilibriumError::MaxIterations {
        iterations: max_iter,
        step: steps.last().copied().unwrap_or(f64::NAN),
        contraction_estimate: contraction_estimate(&steps, 16.0 * f64::EPSILON * scale),
        last_x: (0..n).map(|i| u[i] / bam.a[i]).collect(),
        last_y: (0..n).map(|i| v[i] / bam.b[i]).collect(),
    })
}

/// Largest violation of the equilibrium equations at `(x, y)`.
pub fn residual(bam: &BamSpec, f: &[Activation], g: &[Activation], x: &[f64], y: &[f64]) -> f64 {
    let n = bam.n;
    let rx = (0..n).map(|i| {
        let s: f64 = (0..n).map(|j| bam.a_conn[i][j] * f[j].eval(y[j])).sum();
        (bam.a[i] * x[i] - s - bam.input_x[i]).abs()
    });
    let ry = (0..n).map(|i| {
        let s: f64 = (0..n).map(|j| bam.b_conn[i][j] * g[j].eval(x[j])).sum();
        (bam.b[i] * y[i] - s - bam.input_y[i]).abs()
    });
    rx.chain(ry).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::presets;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn linear(n: usize) -> Vec<Activation> {
        vec![Activation::Linear(1.0); n]
    }

    #[test]
    fn unit_network_matrices() {
        let mut bam = presets::two_neuron_ref().to_bam();
        bam.a = vec![1.0];
        bam.b = vec![1.0];
        bam.lf = vec![1.0];
        bam.lg = vec![1.0];
        let (a, b) = build_existence_matrices(&bam).unwrap();
        let expected = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(a, expected);
        assert_eq!(b, expected);
    }

    #[test]
    fn leaky_bam_existence() {
        let report = equilibrium_exists(&presets::leaky_bam(0.0)).unwrap();
        assert_eq!(report.matrix_a[(0, 1)], 1.0 / 720.0);
        assert_eq!(report.matrix_a[(1, 0)], 1.0 / 200.0);
        assert!(report.holds(1));
        assert_abs_diff_eq!(report.conditions[0].value, (1.0f64 / 144000.0).sqrt(), epsilon = 1e-12);
        assert!(report.conditions.iter().all(|c| c.holds));
        assert!(report.exists_unique);
    }

    #[test]
    fn zero_and_strong_couplings() {
        let mut bam = presets::leaky_bam(0.0);
        bam.a_conn = vec![vec![0.0]];
        bam.b_conn = vec![vec![0.0]];
        let report = equilibrium_exists(&bam).unwrap();
        assert!(report.conditions.iter().all(|c| c.holds && c.value == 0.0));

        bam.a_conn = vec![vec![2.0]];
        bam.b_conn = vec![vec![2.0]];
        let report = equilibrium_exists(&bam).unwrap();
        assert!(report.conditions.iter().all(|c| !c.holds));
        assert_abs_diff_eq!(report.conditions[0].value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn leaky_bam_equilibrium_matches_direct_solve() {
        let bam = presets::leaky_bam(0.0);
        let eq = solve_equilibrium(&bam, &linear(1), &linear(1), 1e-14, 1000).unwrap();
        // x = y/720 + 10000, y = x/200 + 20000 by Cramer's rule.
        let det = 1.0 - 1.0 / (720.0 * 200.0);
        let x = (10000.0 + 20000.0 / 720.0) / det;
        let y = (20000.0 + 10000.0 / 200.0) / det;
        assert_relative_eq!(eq.x_star[0], x, max_relative = 1e-12);
        assert_relative_eq!(eq.y_star[0], y, max_relative = 1e-12);
        assert_abs_diff_eq!(eq.x_star[0], 10027.847, epsilon = 1e-3);
        assert_abs_diff_eq!(eq.y_star[0], 20050.139, epsilon = 1e-3);
        assert!(eq.residual < 1e-10, "{}", eq.residual);
        assert!(eq.warnings.is_empty());
    }

    #[test]
    fn decoupled_network_solves_in_one_step() {
        let mut bam = presets::leaky_bam(0.0);
        bam.a = vec![2.0];
        bam.b = vec![4.0];
        bam.a_conn = vec![vec![0.0]];
        bam.b_conn = vec![vec![0.0]];
        let eq = solve_equilibrium(&bam, &linear(1), &linear(1), 1e-12, 10).unwrap();
        assert_eq!(eq.iterations, 1);
        assert_eq!(eq.x_star, vec![5000.0]);
        assert_eq!(eq.y_star, vec![5000.0]);
    }

    #[test]
    fn odd_activations_without_inputs_rest_at_origin() {
        let two = presets::two_neuron_ref();
        let (f1, f2) = presets::two_neuron_ref_dynamics().activations(&two);
        let eq = solve_equilibrium(&two.to_bam(), &[f1], &[f2], 1e-12, 100).unwrap();
        assert_eq!(eq.state(), vec![0.0, 0.0]);
    }

    #[test]
    fn divergent_iteration_is_reported() {
        let mut bam = presets::leaky_bam(0.0);
        bam.a_conn = vec![vec![3.0]];
        bam.b_conn = vec![vec![3.0]];
        let err = solve_equilibrium(&bam, &linear(1), &linear(1), 1e-12, 1000).unwrap_err();
        match err {
            EquilibriumError::Diverged { contraction_estimate, .. } => {
                assert!(contraction_estimate.unwrap() > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn activation_count_is_checked() {
        let err = solve_equilibrium(&presets::leaky_bam(0.0), &linear(2), &linear(1), 1e-12, 10).unwrap_err();
        assert!(matches!(err, EquilibriumError::ActivationCount { name: "f", expected: 1, got: 2 }));
    }

    fn arb_network() -> impl Strategy<Value = (BamSpec, Vec<Activation>, Vec<Activation>)> {
        (1usize..=3).prop_flat_map(|n| {
            let v = move |lo: f64, hi: f64| prop::collection::vec(lo..hi, n);
            let m = move || prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), n);
            let acts = move || {
                prop::collection::vec(
                    (0usize..4, 0.1..1.5f64).prop_map(|(k, c)| match k {
                        0 => Activation::Linear(c),
                        1 => Activation::TanhScaled(c),
                        2 => Activation::SinScaled(c),
                        _ => Activation::LogisticCentered(c),
                    }),
                    n,
                )
            };
            ((v(0.5, 3.0), v(0.5, 3.0), m(), m(), v(-5.0, 5.0), v(-5.0, 5.0)), acts(), acts()).prop_map(
                move |((a, b, a_conn, b_conn, i, j), f, g)| {
                    let bam = BamSpec {
                        n,
                        lf: f.iter().map(Activation::lipschitz).collect(),
                        lg: g.iter().map(Activation::lipschitz).collect(),
                        a,
                        b,
                        a_conn,
                        b_conn,
                        r_lo: vec![1.0; n],
                        r_hi: vec![1.0; n],
                        p_lo: vec![1.0; n],
                        p_hi: vec![1.0; n],
                        tau1: vec![0.0; n],
                        tau2: vec![0.0; n],
                        sig1: vec![0.0; n],
                        sig2: vec![0.0; n],
                        input_x: i,
                        input_y: j,
                    };
                    (bam, f, g)
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn contraction_converges_geometrically((bam, f, g) in arb_network()) {
            let report = equilibrium_exists(&bam).unwrap();
            prop_assume!(report.conditions[0].value < 0.9);
            let eq = solve_equilibrium(&bam, &f, &g, 1e-13, 10_000).unwrap();
            prop_assert!(eq.residual <= 1e-9 * (1.0 + eq.state().iter().fold(0.0f64, |m, x| m.max(x.abs()))));
            if let Some(q) = eq.contraction_estimate {
                prop_assert!(q < 1.0, "estimate {q}");
            }
        }

        #[test]
        fn decoupled_input_shift_moves_state_by_shift_over_gain(a in 0.1..10.0f64, i in -100.0..100.0f64, d in -10.0..10.0f64) {
            let mut bam = presets::leaky_bam(0.0);
            bam.a = vec![a];
            bam.a_conn = vec![vec![0.0]];
            bam.b_conn = vec![vec![0.0]];
            bam.input_x = vec![i];
            let base = solve_equilibrium(&bam, &linear(1), &linear(1), 1e-12, 10).unwrap();
            bam.input_x = vec![i + d];
            let shifted = solve_equilibrium(&bam, &linear(1), &linear(1), 1e-12, 10).unwrap();
            let expected = base.x_star[0] + d / a;
            prop_assert!((shifted.x_star[0] - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }
    }
}
