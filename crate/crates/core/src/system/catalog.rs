//! Closed-form functions with analytically known bounds, used to build
//! concrete systems for simulation.

use serde::{Deserialize, Serialize};

/// Time-dependent scalar: coefficient, coupling gain, forcing or history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Constant(f64),
    /// `base + amp * sin(freq * t)`
    Sin { base: f64, amp: f64, freq: f64 },
    /// `base + amp * cos(freq * t)`
    Cos { base: f64, amp: f64, freq: f64 },
}

impl Waveform {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Waveform::Constant(c) => c,
            Waveform::Sin { base, amp, freq } => base + amp * (freq * t).sin(),
            Waveform::Cos { base, amp, freq } => base + amp * (freq * t).cos(),
        }
    }

    /// Closed range `[inf, sup]` over all t.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Waveform::Constant(c) => (c, c),
            Waveform::Sin { base, amp, freq } | Waveform::Cos { base, amp, freq } => {
                if freq == 0.0 {
                    let v = self.eval(0.0);
                    (v, v)
                } else {
                    (base - amp.abs(), base + amp.abs())
                }
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }

    pub fn scaled(&self, k: f64) -> Waveform {
        match *self {
            Waveform::Constant(c) => Waveform::Constant(c * k),
            Waveform::Sin { base, amp, freq } => Waveform::Sin { base: base * k, amp: amp * k, freq },
            Waveform::Cos { base, amp, freq } => Waveform::Cos { base: base * k, amp: amp * k, freq },
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Waveform::Constant(c) => c.is_finite(),
            Waveform::Sin { base, amp, freq } | Waveform::Cos { base, amp, freq } => {
                base.is_finite() && amp.is_finite() && freq.is_finite()
            }
        }
    }
}

/// Delay amount `t - h(t) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayFn {
    Constant(f64),
    /// `base + amp * |sin t|`
    AbsSin { base: f64, amp: f64 },
    /// `base + amp * |cos t|`
    AbsCos { base: f64, amp: f64 },
    /// `amp * sin² t`
    SinSquared(f64),
    /// `amp * cos² t`
    CosSquared(f64),
}

impl DelayFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DelayFn::Constant(d) => d,
            DelayFn::AbsSin { base, amp } => base + amp * t.sin().abs(),
            DelayFn::AbsCos { base, amp } => base + amp * t.cos().abs(),
            DelayFn::SinSquared(amp) => {
                let s = t.sin();
                amp * s * s
            }
            DelayFn::CosSquared(amp) => {
                let c = t.cos();
                amp * c * c
            }
        }
    }

    /// Infimum over t.
    pub fn min(&self) -> f64 {
        match *self {
            DelayFn::Constant(d) => d,
            DelayFn::AbsSin { base, amp } | DelayFn::AbsCos { base, amp } => base + amp.min(0.0),
            DelayFn::SinSquared(amp) | DelayFn::CosSquared(amp) => amp.min(0.0),
        }
    }

    /// Supremum over t.
    pub fn bound(&self) -> f64 {
        match *self {
            DelayFn::Constant(d) => d,
            DelayFn::AbsSin { base, amp } | DelayFn::AbsCos { base, amp } => base + amp.max(0.0),
            DelayFn::SinSquared(amp) | DelayFn::CosSquared(amp) => amp.max(0.0),
        }
    }

    /// Identically zero, i.e. the argument is the current time.
    pub fn is_zero(&self) -> bool {
        matches!(*self, DelayFn::Constant(d) if d == 0.0)
    }
}

/// Activation / coupling nonlinearity with `f(0) = 0`, so its Lipschitz
/// constant doubles as the growth bound `|f(u)| ≤ L |u|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `k u`
    Linear(f64),
    /// `tanh(k u)`
    TanhScaled(f64),
    /// `sin(k u)`
    SinScaled(f64),
    /// `1 / (1 + exp(-k u)) - 1/2`
    LogisticCentered(f64),
}

impl Activation {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Activation::Linear(k) => k * u,
            Activation::TanhScaled(k) => (k * u).tanh(),
            Activation::SinScaled(k) => (k * u).sin(),
            Activation::LogisticCentered(k) => 1.0 / (1.0 + (-k * u).exp()) - 0.5,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Activation::Linear(k) | Activation::TanhScaled(k) | Activation::SinScaled(k) => k.abs(),
            Activation::LogisticCentered(k) => 0.25 * k.abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match *self {
            Activation::Linear(k)
            | Activation::TanhScaled(k)
            | Activation::SinScaled(k)
            | Activation::LogisticCentered(k) => k.is_finite(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn serialized_names() {
        let w: Waveform = serde_json::from_str(r#"{"sin": {"base": 20, "amp": 5, "freq": 1}}"#).unwrap();
        assert_eq!(w, Waveform::Sin { base: 20.0, amp: 5.0, freq: 1.0 });
        let d: DelayFn = serde_json::from_str(r#"{"sin_squared": 3}"#).unwrap();
        assert_eq!(d.bound(), 3.0);
        let a: Activation = serde_json::from_str(r#"{"logistic_centered": 2}"#).unwrap();
        assert_eq!(a.lipschitz(), 0.5);
        assert_eq!(serde_json::to_string(&Activation::TanhScaled(0.5)).unwrap(), r#"{"tanh_scaled":0.5}"#);
    }

    #[test]
    fn ranges() {
        let w = Waveform::Cos { base: 40.0, amp: -3.0, freq: 1.0 };
        assert_eq!(w.range(), (37.0, 43.0));
        assert_eq!(w.scaled(-1.0).range(), (-43.0, -37.0));
        assert_eq!(DelayFn::AbsSin { base: 0.0005, amp: 0.0005 }.bound(), 0.001);
        assert!(DelayFn::Constant(0.0).is_zero());
        assert!(!DelayFn::SinSquared(2.0).is_zero());
    }

    proptest! {
        #[test]
        fn activations_respect_declared_lipschitz(
            k in -5.0..5.0f64, u in -20.0..20.0f64, v in -20.0..20.0f64, which in 0usize..4
        ) {
            let act = [Activation::Linear(k), Activation::TanhScaled(k), Activation::SinScaled(k), Activation::LogisticCentered(k)][which];
            let lhs = (act.eval(u) - act.eval(v)).abs();
            prop_assert!(lhs <= act.lipschitz() * (u - v).abs() * (1.0 + 1e-12) + 1e-15);
            prop_assert!(act.eval(u).abs() <= act.lipschitz() * u.abs() * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn delays_stay_in_declared_range(base in 0.0..1.0f64, amp in 0.0..3.0f64, t in -50.0..50.0f64, which in 0usize..5) {
            let d = [
                DelayFn::Constant(base),
                DelayFn::AbsSin { base, amp },
                DelayFn::AbsCos { base, amp },
                DelayFn::SinSquared(amp),
                DelayFn::CosSquared(amp),
            ][which];
            let v = d.eval(t);
            prop_assert!(v >= d.min() - 1e-15 && v <= d.bound() + 1e-15);
        }

        #[test]
        fn waveforms_stay_in_range(base in -5.0..5.0f64, amp in -3.0..3.0f64, freq in -2.0..2.0f64, t in -50.0..50.0f64) {
            for w in [Waveform::Sin { base, amp, freq }, Waveform::Cos { base, amp, freq }] {
                let (lo, hi) = w.range();
                let v = w.eval(t);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
