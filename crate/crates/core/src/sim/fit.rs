use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Trajectory;

/// Leading fraction of the run excluded from the fit.
pub const FIT_SKIP_FRACTION: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("reference has {got} components, trajectory has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("trajectory too short to fit")]
    TooShort,
    #[error("deviation envelope is at the noise floor; nothing to fit")]
    Degenerate,
    #[error("not converging: deviation {window_max:e} in the fit window is not below the initial {initial:e}")]
    NotConverging { initial: f64, window_max: f64 },
    #[error("deviation envelope does not decrease over the fit window")]
    NonDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda_hat: f64,
    /// Prefactor `M` of `M e^{-λ (t - t0)}`.
    pub amplitude: f64,
    pub fit_window: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `ln env(t) = ln M - λ (t - t0)`, where `env` is the
/// running maximum of `‖x(t) - reference‖∞` taken from the end of the run,
/// over the part of the run after the first [`FIT_SKIP_FRACTION`].
pub fn fit_decay(traj: &Trajectory, reference: &[f64]) -> Result<DecayFit, FitError> {
    if reference.len() != traj.dim() {
        return Err(FitError::Dimension { expected: traj.dim(), got: reference.len() });
    }
    let n = traj.times.len();
    if n < 4 {
        return Err(FitError::TooShort);
    }
    let dev: Vec<f64> = traj
        .states
        .iter()
        .map(|x| x.iter().zip(reference).fold(0.0f64, |m, (a, r)| m.max((a - r).abs())))
        .collect();
    let (t0, t_end) = (traj.times[0], traj.times[n - 1]);
    let t_a = t0 + FIT_SKIP_FRACTION * (t_end - t0);
    let start = traj.times.iter().position(|&t| t >= t_a).ok_or(FitError::TooShort)?;

    let mut env = dev[start..].to_vec();
    for k in (0..env.len() - 1).rev() {
        env[k] = env[k].max(env[k + 1]);
    }
    let scale = reference.iter().fold(1.0f64, |m, r| m.max(r.abs())).max(dev[0]);
    let floor = 64.0 * f64::EPSILON * scale;
    if env[0] <= floor {
        return Err(FitError::Degenerate);
    }
    if env[0] >= dev[0] {
        return Err(FitError::NotConverging { initial: dev[0], window_max: env[0] });
    }
    let used = env.iter().take_while(|&&e| e > floor).count();
    if used < 3 {
        return Err(FitError::Degenerate);
    }
    if env[used - 1] >= env[0] {
        return Err(FitError::NonDecreasing);
    }

    let ts: Vec<f64> = traj.times[start..start + used].iter().map(|t| t - t0).collect();
    let ys: Vec<f64> = env[..used].iter().map(|e| e.ln()).collect();
    let k = used as f64;
    let (mt, my) = (ts.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        stt += (t - mt) * (t - mt);
        sty += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let r_squared = if syy == 0.0 { 1.0 } else { sty * sty / (stt * syy) };
    Ok(DecayFit {
        lambda_hat: -slope,
        amplitude: intercept.exp(),
        fit_window: [traj.times[start], traj.times[start + used - 1]],
        r_squared,
        points: used,
    })
}
