//! Ready-made models: the scalar Lévy-driven equation with quasi-periodic,
//! Levitan, stationary and almost automorphic coefficients, plus the small
//! oracle models used by the test suites.

use std::f64::consts::PI;

use super::{Coefficient, JumpCoefficient, SdeModel, SemigroupSpec, StateMap};
use crate::noise::{JumpMeasureSpec, MarkSampler, WienerSpec};
use crate::recurrence::profile::{Harmonic, Mode, Outer, TimeProfile};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn sqrt3() -> f64 {
    3f64.sqrt()
}

fn scalar_semigroup(lambda: f64) -> SemigroupSpec {
    SemigroupSpec { eigenvalues: vec![lambda], k: 1.0, omega: lambda }
}

fn linear(c: f64) -> StateMap {
    StateMap::Linear { c }
}

/// (1/8)(sin t + cos √3 t)
pub fn example61_f_profile() -> TimeProfile {
    TimeProfile::QuasiPeriodic {
        offset: 0.0,
        harmonics: vec![Harmonic::sin(0.125, 1.0), Harmonic::cos(0.125, sqrt3())],
    }
}

/// (1/5) cos(1/(2 + sin t + sin √2 t))
pub fn example61_g_profile() -> TimeProfile {
    TimeProfile::LevitanComposite {
        amp: 0.2,
        outer: Outer::Cos,
        scale: 1.0,
        shift: 2.0,
        inner: vec![Harmonic::sin(1.0, 1.0), Harmonic::sin(1.0, SQRT_2)],
    }
}

/// (1/4) sin(1/(3 + cos t + cos πt))
pub fn example61_big_g_profile() -> TimeProfile {
    TimeProfile::LevitanComposite {
        amp: 0.25,
        outer: Outer::Sin,
        scale: 1.0,
        shift: 3.0,
        inner: vec![Harmonic::cos(1.0, 1.0), Harmonic::cos(1.0, PI)],
    }
}

/// dy = (−4y + f) dt + g dW + ∫_{|x|<1} F Ñ + ∫_{|x|≥1} G N with
/// small-jump mass `small_rate` and large-jump mass `b`.
pub fn example61(small_rate: f64, b: f64) -> SdeModel {
    SdeModel {
        semigroup: scalar_semigroup(4.0),
        f: Coefficient::single(example61_f_profile(), linear(1.0)),
        g: Coefficient::single(example61_g_profile(), linear(1.0)),
        big_f: JumpCoefficient::mark_free(Coefficient::single(TimeProfile::constant(0.2), linear(1.0))),
        big_g: JumpCoefficient::mark_free(Coefficient::single(example61_big_g_profile(), linear(1.0))),
        wiener: WienerSpec::new(vec![1.0]),
        jumps: JumpMeasureSpec {
            small_rate,
            small_mark: MarkSampler::UniformShell { lo: 0.1, hi: 1.0, symmetric: true },
            truncation_delta: 0.1,
            large_rate: b,
            large_mark: MarkSampler::TruncatedExpTail { lo: 1.0, rate: 2.0, symmetric: true },
        },
        a0: 0.0,
        lipschitz_l: 0.25,
        moment_p: 2.1,
        basis: None,
    }
}

/// Same equation with the additive forcing (1/8)(sin t + cos √3 t) added to f,
/// so that the bounded solution is not identically zero.
pub fn example61_forced(small_rate: f64, b: f64) -> SdeModel {
    let mut m = example61(small_rate, b);
    m.f = m.f.with_term(example61_f_profile(), StateMap::Const { c: 1.0 });
    m.a0 = 0.25;
    m
}

/// Scalar model with every coefficient 2π-periodic and an asymmetric forcing.
pub fn periodic_model() -> SdeModel {
    let forcing = TimeProfile::Periodic {
        omega0: 1.0,
        offset: 0.0,
        modes: vec![Mode { k: 1, amp: 1.0, phase: 0.0 }, Mode { k: 2, amp: 0.5, phase: PI / 2.0 }],
    };
    let sin_t = TimeProfile::Periodic { omega0: 1.0, offset: 0.0, modes: vec![Mode { k: 1, amp: 0.1, phase: 0.0 }] };
    let g_prof = TimeProfile::Periodic { omega0: 1.0, offset: 0.3, modes: vec![Mode { k: 1, amp: 0.15, phase: 0.0 }] };
    let big_g_prof =
        TimeProfile::Periodic { omega0: 1.0, offset: 0.0, modes: vec![Mode { k: 1, amp: 0.2, phase: PI / 2.0 }] };
    SdeModel {
        semigroup: scalar_semigroup(2.0),
        f: Coefficient::single(sin_t, linear(1.0)).with_term(forcing, StateMap::Const { c: 1.0 }),
        g: Coefficient::single(g_prof, StateMap::Const { c: 1.0 }),
        big_f: JumpCoefficient::mark_free(Coefficient::single(TimeProfile::constant(0.1), linear(1.0))),
        big_g: JumpCoefficient::mark_free(Coefficient::single(big_g_prof, linear(1.0))),
        wiener: WienerSpec::new(vec![1.0]),
        jumps: JumpMeasureSpec {
            small_rate: 1.0,
            small_mark: MarkSampler::UniformShell { lo: 0.1, hi: 1.0, symmetric: true },
            truncation_delta: 0.1,
            large_rate: 0.5,
            large_mark: MarkSampler::PointMass { value: 1.0 },
        },
        a0: 1.5,
        lipschitz_l: 0.15,
        moment_p: 2.1,
        basis: None,
    }
}

/// dY = −λY dt + σ dW + dJ, J compound Poisson with rate b and exponential
/// tail marks on [1, ∞) with decay `mark_rate`.
pub fn ou_with_jumps(lambda: f64, sigma: f64, b: f64, mark_rate: f64) -> SdeModel {
    let mark = MarkSampler::TruncatedExpTail { lo: 1.0, rate: mark_rate, symmetric: false };
    let a0 = sigma.abs().max((b * mark.norm_moment(2.0)).sqrt());
    SdeModel {
        semigroup: scalar_semigroup(lambda),
        f: Coefficient::zero(),
        g: Coefficient::single(TimeProfile::constant(sigma), StateMap::Const { c: 1.0 }),
        big_f: JumpCoefficient::zero(),
        big_g: JumpCoefficient::times_mark(Coefficient::single(TimeProfile::constant(1.0), StateMap::Const { c: 1.0 })),
        wiener: WienerSpec::new(vec![1.0]),
        jumps: JumpMeasureSpec { large_rate: b, large_mark: mark, ..JumpMeasureSpec::none() },
        a0,
        lipschitz_l: 0.0,
        moment_p: 2.1,
        basis: None,
    }
}

/// dY = (−λY + sin t) dt, whose bounded solution is (λ sin t − cos t)/(λ² + 1).
pub fn linear_sin_forced(lambda: f64) -> SdeModel {
    SdeModel {
        semigroup: scalar_semigroup(lambda),
        f: Coefficient::single(
            TimeProfile::QuasiPeriodic { offset: 0.0, harmonics: vec![Harmonic::sin(1.0, 1.0)] },
            StateMap::Const { c: 1.0 },
        ),
        g: Coefficient::zero(),
        big_f: JumpCoefficient::zero(),
        big_g: JumpCoefficient::zero(),
        wiener: WienerSpec::new(vec![0.0]),
        jumps: JumpMeasureSpec::none(),
        a0: 1.0,
        lipschitz_l: 0.0,
        moment_p: 2.1,
        basis: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::profile::RecurrenceClass;

    #[test]
    fn presets_validate() {
        for m in [example61(1.0, 1.0), example61_forced(1.0, 0.5), periodic_model(), ou_with_jumps(1.0, 0.5, 1.0, 2.0)] {
            m.validate().unwrap();
        }
        linear_sin_forced(1.0).validate().unwrap();
    }

    #[test]
    fn example61_drift_at_one() {
        // −4·1 comes from the semigroup; f(0,1) = (1/8)(sin 0 + cos 0)
        let m = example61(1.0, 1.0);
        assert!((m.drift(0.0, &[1.0])[0] - 0.125).abs() < 1e-15);
        assert_eq!(m.semigroup.eigenvalues, vec![4.0]);
    }

    #[test]
    fn example61_profile_classes() {
        let m = example61(1.0, 1.0);
        let classes: Vec<_> = m.profiles().iter().map(|p| p.class()).collect();
        assert_eq!(classes[0], RecurrenceClass::QuasiPeriodic);
        assert_eq!(classes[1], RecurrenceClass::Levitan);
        assert_eq!(classes[2], RecurrenceClass::Constant);
        assert!(classes[3].implies(RecurrenceClass::AlmostAutomorphic));
    }

    #[test]
    fn example61_lipschitz_constants() {
        let m = example61(1.0, 1.0);
        assert_eq!(m.f.lipschitz_bound(), 0.25);
        assert_eq!(m.g.lipschitz_bound(), 0.2);
        assert_eq!(m.big_f.coefficient.lipschitz_bound(), 0.2);
        assert_eq!(m.big_g.coefficient.lipschitz_bound(), 0.25);
    }

    #[test]
    fn forced_variant_has_nonzero_forcing() {
        let m = example61_forced(1.0, 1.0);
        assert!((m.drift(0.0, &[0.0])[0] - 0.125).abs() < 1e-15);
        assert_eq!(m.f.lipschitz_bound(), 0.25);
    }

    #[test]
    fn periodic_model_repeats() {
        let m = periodic_model();
        for p in m.profiles() {
            if let Some(per) = p.period() {
                assert!((2.0 * PI / per).fract().abs() < 1e-12 || (per - 2.0 * PI).abs() < 1e-12);
            }
            assert!((p.eval(0.7) - p.eval(0.7 + 2.0 * PI)).abs() < 1e-12);
        }
        assert!(m.margin() > 0.0);
    }
}
