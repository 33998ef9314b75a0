//! Reference systems used throughout the tests, examples and CLI fixtures.

use super::catalog::{Activation, DelayFn, Waveform};
use super::concrete::{BamDynamics, TwoNeuronDynamics};
use super::{BamSpec, GeneralSystemSpec, LinearSystemSpec, TwoNeuronSpec};

/// Two-neuron network with a1 = 0.8, a2 = 0.5, unit weights, leakage delays
/// 0.5 and 0.4, growth bounds 0.5 and 0.2, no transmission delay.
pub fn two_neuron_ref() -> TwoNeuronSpec {
    TwoNeuronSpec {
        a1: 0.8,
        a2: 0.5,
        a12: 1.0,
        a21: 1.0,
        tau1: 0.5,
        tau2: 0.4,
        sigma1: 0.0,
        sigma2: 0.0,
        l1: 0.5,
        l2: 0.2,
    }
}

/// [`two_neuron_ref`] entered directly in general form.
pub fn two_neuron_ref_general() -> GeneralSystemSpec {
    GeneralSystemSpec {
        m: 2,
        alpha: vec![0.8, 0.5],
        a_upper: vec![0.8, 0.5],
        tau: vec![0.5, 0.4],
        sigma: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        lipschitz: vec![vec![0.0, 0.5], vec![0.2, 0.0]],
        diagonal_delay_free: false,
    }
}

pub fn two_neuron_ref_dynamics() -> TwoNeuronDynamics {
    TwoNeuronDynamics {
        f1: Some(Activation::TanhScaled(0.5)),
        f2: Some(Activation::TanhScaled(0.2)),
        history: Some(vec![Waveform::Constant(1.0), Waveform::Constant(1.0)]),
    }
}

/// Scalar leaky BAM with rates `20 + μ sin t` and `40 + μ cos t`, weights
/// 1/720 and 1/200, leakage delays up to 1/1000 and inputs 10000, 20000.
pub fn leaky_bam(mu: f64) -> BamSpec {
    BamSpec {
        n: 1,
        a: vec![1.0],
        b: vec![1.0],
        a_conn: vec![vec![1.0 / 720.0]],
        b_conn: vec![vec![1.0 / 200.0]],
        lf: vec![1.0],
        lg: vec![1.0],
        r_lo: vec![20.0 - mu],
        r_hi: vec![20.0 + mu],
        p_lo: vec![40.0 - mu],
        p_hi: vec![40.0 + mu],
        tau1: vec![1.0 / 1000.0],
        tau2: vec![1.0 / 1000.0],
        sig1: vec![2.0],
        sig2: vec![3.0],
        input_x: vec![10000.0],
        input_y: vec![20000.0],
    }
}

/// Time-varying coefficients and delays of [`leaky_bam`] with linear
/// activations.
pub fn leaky_bam_dynamics(mu: f64) -> BamDynamics {
    BamDynamics {
        r: Some(vec![Waveform::Sin { base: 20.0, amp: mu, freq: 1.0 }]),
        p: Some(vec![Waveform::Cos { base: 40.0, amp: mu, freq: 1.0 }]),
        f: Some(vec![Activation::Linear(1.0)]),
        g: Some(vec![Activation::Linear(1.0)]),
        leak_x: Some(vec![DelayFn::AbsSin { base: 0.0005, amp: 0.0005 }]),
        leak_y: Some(vec![DelayFn::AbsCos { base: 0.0005, amp: 0.0005 }]),
        delay_x: Some(vec![DelayFn::SinSquared(2.0)]),
        delay_y: Some(vec![DelayFn::SinSquared(3.0)]),
        history_x: None,
        history_y: None,
    }
}

/// Undelayed linear pair `x' = -x + s y`, `y' = s x - y`.
pub fn sharpness_pair(s: f64) -> LinearSystemSpec {
    LinearSystemSpec {
        m: 2,
        alpha: vec![1.0, 1.0],
        a_upper: vec![1.0, 1.0],
        a_off: vec![vec![0.0, s], vec![s, 0.0]],
        sigma: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        diagonal_delay_free: true,
    }
}
