//! Test-matrix builders. Entries are written so that shared special cases
//! produce bitwise-identical floats: `C(0)` equals `C`, and `C` equals the
//! off-diagonal matrix when every `L_ii` is zero.

use super::{ensure_valid, Criterion, CriteriaError};
use crate::linalg::Matrix;
use crate::system::{GeneralSystemSpec, LinearSystemSpec};

pub(crate) fn matrix_from(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Matrix, CriteriaError> {
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
    Ok(Matrix::from_rows(&rows)?)
}

/// `c_ii = 1 - (A_i (A_i + L_ii) τ_i + L_ii) / α_i`,
/// `c_ij = -(A_i L_ij τ_i + L_ij) / α_i`.
pub fn build_c(spec: &GeneralSystemSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    matrix_from(spec.m, |i, j| {
        let (a, alpha, tau, l) = (spec.a_upper[i], spec.alpha[i], spec.tau[i], spec.lipschitz[i][j]);
        if i == j {
            1.0 - (a * (a + l) * tau + l) / alpha
        } else {
            -(a * l * tau + l) / alpha
        }
    })
}

/// Test matrix for systems without `F_ii` terms: `c_ii = 1 - A_i² τ_i / α_i`,
/// off-diagonal entries as in [`build_c`]. Any `L_ii` is ignored.
pub fn build_c_offdiag(spec: &GeneralSystemSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    matrix_from(spec.m, |i, j| {
        let (a, alpha, tau, l) = (spec.a_upper[i], spec.alpha[i], spec.tau[i], spec.lipschitz[i][j]);
        if i == j {
            1.0 - a * a * tau / alpha
        } else {
            -(a * l * tau + l) / alpha
        }
    })
}

/// Undelayed decay terms: `b_ii = 1 - L_ii / α_i`, `b_ij = -L_ij / α_i`.
pub fn build_b_nodelay(spec: &GeneralSystemSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    if !spec.diagonal_delay_free {
        return Err(CriteriaError::FamilyMismatch {
            criterion: Criterion::Cor1,
            reason: "requires diagonal_delay_free".into(),
        });
    }
    matrix_from(spec.m, |i, j| {
        let (alpha, l) = (spec.alpha[i], spec.lipschitz[i][j]);
        if i == j {
            1.0 - l / alpha
        } else {
            -l / alpha
        }
    })
}

/// Delayed linear systems: `d_ii = 1 - A_i² σ_ii / α_i`,
/// `d_ij = -(A_i A_ij σ_ii + A_ij) / α_i`.
pub fn build_d_linear(spec: &LinearSystemSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    if spec.diagonal_delay_free {
        return Err(CriteriaError::FamilyMismatch {
            criterion: Criterion::Cor2,
            reason: "requires a delayed diagonal term".into(),
        });
    }
    matrix_from(spec.m, |i, j| {
        let (a, alpha, s) = (spec.a_upper[i], spec.alpha[i], spec.sigma[i][i]);
        if i == j {
            1.0 - a * a * s / alpha
        } else {
            let aij = spec.a_off[i][j];
            -(a * aij * s + aij) / alpha
        }
    })
}

/// Linear systems with undelayed diagonal: `f_ii = 1`, `f_ij = -A_ij / α_i`.
pub fn build_f_linear(spec: &LinearSystemSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    if !spec.diagonal_delay_free {
        return Err(CriteriaError::FamilyMismatch {
            criterion: Criterion::Cor3,
            reason: "requires diagonal_delay_free".into(),
        });
    }
    matrix_from(spec.m, |i, j| if i == j { 1.0 } else { -spec.a_off[i][j] / spec.alpha[i] })
}

/// `C(λ)` with `e^{λτ_i}` on the decay terms and `e^{λσ_ij}` on each
/// coupling:
///
/// ```text
/// c_ii(λ) = 1 - (A_i e^{λτ_i} (λ + A_i e^{λτ_i} + e^{λσ_ii} L_ii) τ_i + e^{λσ_ii} L_ii) / (α_i - λ)
/// c_ij(λ) = -(A_i e^{λτ_i} e^{λσ_ij} L_ij τ_i + e^{λσ_ij} L_ij) / (α_i - λ)
/// ```
pub fn build_c_lambda(spec: &GeneralSystemSpec, lambda: f64) -> Result<Matrix, CriteriaError> {
    ensure_valid(spec.validate())?;
    let max = spec.min_alpha();
    if !(lambda >= 0.0 && lambda < max) {
        return Err(CriteriaError::LambdaOutOfRange { lambda, max });
    }
    matrix_from(spec.m, |i, j| {
        let (alpha, tau, l) = (spec.alpha[i], spec.tau[i], spec.lipschitz[i][j]);
        let ae = spec.a_upper[i] * (lambda * tau).exp();
        let es = (lambda * spec.sigma[i][j]).exp();
        if i == j {
            1.0 - (ae * (lambda + ae + es * l) * tau + es * l) / (alpha - lambda)
        } else {
            -(ae * es * l * tau + es * l) / (alpha - lambda)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::presets;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_matrix(m: &Matrix, expected: &[[f64; 2]; 2], eps: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m[(i, j)], expected[i][j], epsilon = eps);
            }
        }
    }

    #[test]
    fn c_for_two_neuron_ref() {
        let c = build_c(&presets::two_neuron_ref_general()).unwrap();
        assert_matrix(&c, &[[0.6, -0.875], [-0.48, 0.8]], 1e-15);
        assert_eq!(c, build_c_offdiag(&presets::two_neuron_ref_general()).unwrap());
    }

    #[test]
    fn c_trivial_cases() {
        let mut spec = presets::two_neuron_ref_general();
        spec.tau = vec![0.0, 0.0];
        spec.lipschitz = vec![vec![0.0; 2]; 2];
        assert_eq!(build_c(&spec).unwrap(), Matrix::identity(2));
        assert_eq!(build_c_offdiag(&spec).unwrap(), Matrix::identity(2));
        let one = GeneralSystemSpec {
            m: 1,
            alpha: vec![1.0],
            a_upper: vec![1.0],
            tau: vec![0.5],
            sigma: vec![vec![0.0]],
            lipschitz: vec![vec![0.0]],
            diagonal_delay_free: false,
        };
        assert_eq!(build_c(&one).unwrap()[(0, 0)], 0.5);
    }

    #[test]
    fn offdiag_for_leaky_bam() {
        let g = crate::system::bam_to_general(&presets::leaky_bam(0.0)).unwrap();
        let c = build_c_offdiag(&g).unwrap();
        let l01 = 20.0 / 720.0;
        let l10 = 40.0 / 200.0;
        let expected = [
            [1.0 - 400.0 * 1e-3 / 20.0, -(20.0 * l01 * 1e-3 + l01) / 20.0],
            [-(40.0 * l10 * 1e-3 + l10) / 40.0, 1.0 - 1600.0 * 1e-3 / 40.0],
        ];
        assert_matrix(&c, &expected, 1e-15);
        assert_abs_diff_eq!(c[(0, 0)], 0.98, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 1)], 0.96, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(1, 0)], -0.0052, epsilon = 1e-15);
        assert_abs_diff_eq!(c[(0, 1)], -0.0283335 / 20.0, epsilon = 1e-7);
    }

    #[test]
    fn b_d_f_examples() {
        let mut g = presets::two_neuron_ref_general();
        g.tau = vec![0.0, 0.0];
        g.diagonal_delay_free = true;
        g.lipschitz = vec![vec![0.0; 2]; 2];
        assert_eq!(build_b_nodelay(&g).unwrap(), Matrix::identity(2));

        let lin = LinearSystemSpec {
            m: 2,
            alpha: vec![1.0, 1.0],
            a_upper: vec![1.0, 1.0],
            a_off: vec![vec![0.0, 0.1], vec![0.1, 0.0]],
            sigma: vec![vec![0.25, 0.0], vec![0.0, 0.25]],
            diagonal_delay_free: false,
        };
        assert_matrix(&build_d_linear(&lin).unwrap(), &[[0.75, -0.125], [-0.125, 0.75]], 1e-15);
        assert_eq!(build_d_linear(&lin).unwrap(), build_c(&lin.to_general()).unwrap());

        assert_eq!(build_f_linear(&presets::sharpness_pair(0.0)).unwrap(), Matrix::identity(2));
        assert!(build_f_linear(&lin).is_err());
        assert!(build_d_linear(&presets::sharpness_pair(0.5)).is_err());
        assert!(build_b_nodelay(&presets::two_neuron_ref_general()).is_err());
    }

    #[test]
    fn c_lambda_examples() {
        let spec = presets::two_neuron_ref_general();
        let c0 = build_c(&spec).unwrap();
        let c1 = build_c_lambda(&spec, 0.01).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(c1[(i, j)] < c0[(i, j)], "({i},{j})");
            }
        }
        let one = GeneralSystemSpec {
            m: 1,
            alpha: vec![1.0],
            a_upper: vec![1.0],
            tau: vec![0.0],
            sigma: vec![vec![0.0]],
            lipschitz: vec![vec![0.0]],
            diagonal_delay_free: false,
        };
        assert_eq!(build_c_lambda(&one, 0.5).unwrap()[(0, 0)], 1.0);
        assert!(matches!(build_c_lambda(&spec, 0.5), Err(CriteriaError::LambdaOutOfRange { .. })));
        assert!(build_c_lambda(&spec, -0.1).is_err());
    }

    pub(crate) fn arb_general(max_m: usize) -> impl Strategy<Value = GeneralSystemSpec> {
        (1..=max_m).prop_flat_map(|m| {
            (
                prop::collection::vec((0.1..5.0f64, 1.0..2.0f64), m),
                prop::collection::vec(0.0..0.5f64, m),
                prop::collection::vec(prop::collection::vec(0.0..2.0f64, m), m),
                prop::collection::vec(prop::collection::vec(0.0..1.0f64, m), m),
            )
                .prop_map(move |(ab, tau, sigma, l)| GeneralSystemSpec {
                    m,
                    alpha: ab.iter().map(|p| p.0).collect(),
                    a_upper: ab.iter().map(|p| p.0 * p.1).collect(),
                    tau,
                    sigma,
                    lipschitz: l,
                    diagonal_delay_free: false,
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn c_lambda_at_zero_is_c(spec in arb_general(6)) {
            prop_assert_eq!(build_c_lambda(&spec, 0.0).unwrap(), build_c(&spec).unwrap());
        }

        #[test]
        fn c_lambda_is_entrywise_nonincreasing(spec in arb_general(5), f1 in 0.0..0.9f64, f2 in 0.0..0.9f64) {
            let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
            let amax = spec.min_alpha();
            let a = build_c_lambda(&spec, lo * amax).unwrap();
            let b = build_c_lambda(&spec, hi * amax).unwrap();
            for i in 0..spec.m {
                for j in 0..spec.m {
                    prop_assert!(b[(i, j)] <= a[(i, j)]);
                }
            }
        }

        #[test]
        fn offdiag_matches_c_without_self_coupling(mut spec in arb_general(6)) {
            for i in 0..spec.m {
                spec.lipschitz[i][i] = 0.0;
            }
            prop_assert_eq!(build_c_offdiag(&spec).unwrap(), build_c(&spec).unwrap());
        }
    }
}
