//! Criteria for BAM networks, stated on the network parameters directly.

use super::matrices::matrix_from;
use super::{ensure_valid, Criterion, CriteriaError, Margin, StabilityVerdict};
use crate::linalg::{solve_linear, Matrix};
use crate::system::BamSpec;

/// Growth constant of the coupling from `y_j` into `x_i`.
fn lx(bam: &BamSpec, i: usize, j: usize) -> f64 {
    bam.a_conn[i][j].abs() * bam.r_hi[i] * bam.lf[j]
}

/// Growth constant of the coupling from `x_j` into `y_i`.
fn ly(bam: &BamSpec, i: usize, j: usize) -> f64 {
    bam.b_conn[i][j].abs() * bam.p_hi[i] * bam.lg[j]
}

/// `C_BAM` of size `2n`:
///
/// ```text
/// c_ii     = 1 - a_i R_i² τ_i^(1) / α_i
/// c_{i,j+n} = -|a_ij| R_i L_j^f (a_i R_i τ_i^(1) + 1) / (α_i a_i)
/// ```
///
/// and symmetrically for the `y` block with `b, P, β, τ^(2), L^g`. The
/// products are grouped as `(R_i a_i)` so the entries match the
/// off-diagonal test matrix of the reduced general system bit for bit.
pub fn build_c_bam(bam: &BamSpec) -> Result<Matrix, CriteriaError> {
    ensure_valid(bam.validate())?;
    let n = bam.n;
    matrix_from(2 * n, |i, j| {
        let (top, row) = (i < n, i % n);
        let (gain, lo, hi, tau) = if top {
            (bam.a[row], bam.r_lo[row], bam.r_hi[row], bam.tau1[row])
        } else {
            (bam.b[row], bam.p_lo[row], bam.p_hi[row], bam.tau2[row])
        };
        let upper = hi * gain;
        let lower = lo * gain;
        if i == j {
            return 1.0 - upper * upper * tau / lower;
        }
        let l = match (top, j < n) {
            (true, false) => lx(bam, row, j - n),
            (false, true) => ly(bam, row, j),
            _ => 0.0,
        };
        -(upper * l * tau + l) / lower
    })
}

/// M-matrix test on `C_BAM`. In debug builds also checks that `C_BAM`
/// coincides with the off-diagonal test matrix of the reduced system.
pub fn theorem3_verdict(bam: &BamSpec, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    let c = build_c_bam(bam)?;
    if cfg!(debug_assertions) {
        let general = crate::system::bam_to_general(bam).map_err(CriteriaError::InvalidSpec)?;
        let reduced = super::build_c_offdiag(&general)?;
        assert_eq!(c, reduced, "C_BAM differs from the reduced off-diagonal matrix");
    }
    Ok(StabilityVerdict::from_matrix(Criterion::Thm3, c, tol))
}

/// Dominance conditions 1-4 on the BAM parameters. With `leak` false every
/// leakage delay is taken as zero.
fn dominance(
    criterion: Criterion,
    bam: &BamSpec,
    which: u8,
    weights: Option<&[f64]>,
    tol: f64,
) -> Result<StabilityVerdict, CriteriaError> {
    ensure_valid(bam.validate())?;
    let n = bam.n;
    let leak = matches!(criterion, Criterion::Cor9(_));
    let (t1, t2) = if leak { (bam.tau1.clone(), bam.tau2.clone()) } else { (vec![0.0; n], vec![0.0; n]) };
    // Off-diagonal magnitudes k and diagonal d of the test matrix, in the
    // corollary's own grouping.
    let kx = |i: usize, j: usize| lx(bam, i, j) * (bam.a[i] * bam.r_hi[i] * t1[i] + 1.0) / (bam.r_lo[i] * bam.a[i]);
    let ky = |i: usize, j: usize| ly(bam, i, j) * (bam.b[i] * bam.p_hi[i] * t2[i] + 1.0) / (bam.p_lo[i] * bam.b[i]);
    let dx = |i: usize| 1.0 - bam.a[i] * bam.r_hi[i] * bam.r_hi[i] * t1[i] / bam.r_lo[i];
    let dy = |i: usize| 1.0 - bam.b[i] * bam.p_hi[i] * bam.p_hi[i] * t2[i] / bam.p_lo[i];

    let mut notes = Vec::new();
    let mu: Vec<f64> = match which {
        1 | 2 => vec![1.0; 2 * n],
        3 | 4 => match weights {
            Some(w) => {
                if w.len() != 2 * n {
                    return Err(CriteriaError::Dimension { expected: 2 * n, got: w.len() });
                }
                if let Some(index) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(crate::linalg::LinalgError::InvalidWeights { index }.into());
                }
                w.to_vec()
            }
            None => match default_weights(bam, leak, which) {
                Some(w) => {
                    notes.push("weights taken from the M-matrix witness of the test matrix".into());
                    w
                }
                None => {
                    let mut v = StabilityVerdict::from_margins(criterion, Vec::new(), tol);
                    v.status = super::Status::Inconclusive;
                    v.notes.push("no weights supplied and the test matrix has no positive witness".into());
                    return Ok(v);
                }
            },
        },
        _ => {
            return Err(CriteriaError::FamilyMismatch {
                criterion,
                reason: format!("conditions are numbered 1-4 (got {which})"),
            })
        }
    };

    let mut margins = Vec::with_capacity(2 * n);
    if which == 1 || which == 3 {
        for i in 0..n {
            let s: f64 = (0..n).map(|j| mu[j + n] * kx(i, j)).sum();
            margins.push(Margin::less(format!("x row {i}"), s, mu[i] * dx(i)));
        }
        for i in 0..n {
            let s: f64 = (0..n).map(|j| mu[j] * ky(i, j)).sum();
            margins.push(Margin::less(format!("y row {i}"), s, mu[i + n] * dy(i)));
        }
    } else {
        // Column j + n of the test matrix collects the x rows, column j the
        // y rows.
        for j in 0..n {
            let s: f64 = (0..n).map(|i| mu[i] * kx(i, j)).sum();
            margins.push(Margin::less(format!("y column {j}"), s, mu[j + n] * dy(j)));
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| mu[i + n] * ky(i, j)).sum();
            margins.push(Margin::less(format!("x column {j}"), s, mu[j] * dx(j)));
        }
    }
    let mut v = StabilityVerdict::from_margins(criterion, margins, tol);
    v.notes = notes;
    Ok(v)
}

/// Row weights `C⁻¹·1` or column weights `C⁻ᵀ·1`, when positive.
fn default_weights(bam: &BamSpec, leak: bool, which: u8) -> Option<Vec<f64>> {
    let mut spec = bam.clone();
    if !leak {
        spec.tau1 = vec![0.0; bam.n];
        spec.tau2 = vec![0.0; bam.n];
    }
    let c = build_c_bam(&spec).ok()?;
    let c = if which == 4 { c.transpose() } else { c };
    let xi = solve_linear(&c, &vec![1.0; c.dim()]).ok()?.x;
    xi.iter().all(|&v| v > 0.0 && v.is_finite()).then_some(xi)
}

/// Dominance conditions with leakage delays. Conditions 3 and 4 use
/// `weights` (length `2n`) or, when absent, the witness of `C_BAM`.
pub fn corollary9(bam: &BamSpec, which: u8, weights: Option<&[f64]>, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    dominance(Criterion::Cor9(which.clamp(1, 4)), bam, which, weights, tol)
}

/// Dominance conditions for networks without leakage delays.
pub fn corollary10(bam: &BamSpec, which: u8, weights: Option<&[f64]>, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    if !bam.leakage_delay_free() {
        return Err(CriteriaError::FamilyMismatch {
            criterion: Criterion::Cor10(which.clamp(1, 4)),
            reason: "requires zero leakage delays".into(),
        });
    }
    dominance(Criterion::Cor10(which.clamp(1, 4)), bam, which, weights, tol)
}

/// Scalar BAM criterion: `a R² τ_1 / α < 1` and
/// `|A||B| R P L^f L^g (a R τ_1 + 1)(b P τ_2 + 1) / (α β a b) < (1 - a R² τ_1/α)(1 - b P² τ_2/β)`.
pub fn corollary11(bam: &BamSpec, tol: f64) -> Result<StabilityVerdict, CriteriaError> {
    ensure_valid(bam.validate())?;
    if bam.n != 1 {
        return Err(CriteriaError::Dimension { expected: 1, got: bam.n });
    }
    let (a, b) = (bam.a[0], bam.b[0]);
    let (big_a, big_b) = (bam.a_conn[0][0].abs(), bam.b_conn[0][0].abs());
    let (alpha, r, beta, p) = (bam.r_lo[0], bam.r_hi[0], bam.p_lo[0], bam.p_hi[0]);
    let (t1, t2) = (bam.tau1[0], bam.tau2[0]);
    let x_term = a * r * r * t1 / alpha;
    let y_term = b * p * p * t2 / beta;
    let lhs = big_a * big_b * r * p * bam.lf[0] * bam.lg[0] * (a * r * t1 + 1.0) * (b * p * t2 + 1.0) / (alpha * beta * a * b);
    let rhs = (1.0 - x_term) * (1.0 - y_term);
    let margins = vec![
        Margin::less("a R^2 tau1 / alpha < 1", x_term, 1.0),
        Margin::less("coupling product < diagonal product", lhs, rhs),
    ];
    Ok(StabilityVerdict::from_margins(Criterion::Cor11, margins, tol))
}
