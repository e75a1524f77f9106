//! Registry of Poisson stable time profiles.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `amp * sin(freq * t + phase)`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Harmonic {
    pub fn sin(amp: f64, freq: f64) -> Self {
        Harmonic { amp, freq, phase: 0.0 }
    }

    pub fn cos(amp: f64, freq: f64) -> Self {
        Harmonic { amp, freq, phase: PI / 2.0 }
    }

    fn eval(&self, t: f64) -> f64 {
        self.amp * (self.freq * t + self.phase).sin()
    }
}

/// Fourier mode `amp * sin(k * omega0 * t + phase)` of a periodic profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: u32,
    pub amp: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outer {
    Identity,
    Sin,
    Cos,
}

/// Recurrence classes ordered by inclusion:
/// constant ⊂ periodic ⊂ quasi-periodic ⊂ almost periodic ⊂ almost automorphic ⊂ Levitan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceClass {
    Constant,
    Periodic,
    QuasiPeriodic,
    AlmostPeriodic,
    AlmostAutomorphic,
    Levitan,
}

impl RecurrenceClass {
    /// Whether every function of class `self` also belongs to `other`.
    pub fn implies(self, other: RecurrenceClass) -> bool {
        self <= other
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeProfile {
    Constant {
        value: f64,
    },
    /// `offset + Σ amp_k sin(k ω₀ t + phase_k)`
    Periodic {
        omega0: f64,
        #[serde(default)]
        offset: f64,
        modes: Vec<Mode>,
    },
    /// `offset + Σ amp_i sin(ν_i t + phase_i)` with rationally independent ν_i.
    QuasiPeriodic {
        #[serde(default)]
        offset: f64,
        harmonics: Vec<Harmonic>,
    },
    /// `amp * outer(scale / (shift + Σ harmonics))`, e.g. cos(1/(2 + sin t + sin √2 t)).
    LevitanComposite {
        amp: f64,
        outer: Outer,
        scale: f64,
        shift: f64,
        inner: Vec<Harmonic>,
    },
}

fn inner_sum(h: &[Harmonic], t: f64) -> f64 {
    h.iter().map(|x| x.eval(t)).sum()
}

fn abs_amp_sum(h: &[Harmonic]) -> f64 {
    h.iter().map(|x| x.amp.abs()).sum()
}

impl TimeProfile {
    pub fn constant(value: f64) -> Self {
        TimeProfile::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant { value } => *value,
            TimeProfile::Periodic { omega0, offset, modes } => {
                offset
                    + modes
                        .iter()
                        .map(|m| m.amp * (m.k as f64 * omega0 * t + m.phase).sin())
                        .sum::<f64>()
            }
            TimeProfile::QuasiPeriodic { offset, harmonics } => offset + inner_sum(harmonics, t),
            TimeProfile::LevitanComposite { amp, outer, scale, shift, inner } => {
                let x = scale / (shift + inner_sum(inner, t));
                amp * match outer {
                    Outer::Identity => x,
                    Outer::Sin => x.sin(),
                    Outer::Cos => x.cos(),
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::input(format!("profile {what} must be finite")))
            }
        };
        match self {
            TimeProfile::Constant { value } => finite(*value, "value"),
            TimeProfile::Periodic { omega0, offset, modes } => {
                finite(*offset, "offset")?;
                if !(omega0.is_finite() && *omega0 > 0.0) {
                    return Err(Error::input("periodic profile needs omega0 > 0"));
                }
                for m in modes {
                    finite(m.amp, "amp")?;
                    finite(m.phase, "phase")?;
                }
                Ok(())
            }
            TimeProfile::QuasiPeriodic { offset, harmonics } => {
                finite(*offset, "offset")?;
                for h in harmonics {
                    finite(h.amp, "amp")?;
                    finite(h.freq, "freq")?;
                    finite(h.phase, "phase")?;
                }
                Ok(())
            }
            TimeProfile::LevitanComposite { amp, outer, scale, shift, inner } => {
                finite(*amp, "amp")?;
                finite(*scale, "scale")?;
                finite(*shift, "shift")?;
                for h in inner {
                    finite(h.amp, "amp")?;
                    finite(h.freq, "freq")?;
                    finite(h.phase, "phase")?;
                }
                if *outer == Outer::Identity && *shift <= abs_amp_sum(inner) {
                    return Err(Error::input(
                        "identity composite needs shift > sum of inner amplitudes (unbounded otherwise)",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Upper bound on sup_t |profile(t)|.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TimeProfile::Constant { value } => value.abs(),
            TimeProfile::Periodic { offset, modes, .. } => {
                offset.abs() + modes.iter().map(|m| m.amp.abs()).sum::<f64>()
            }
            TimeProfile::QuasiPeriodic { offset, harmonics } => offset.abs() + abs_amp_sum(harmonics),
            TimeProfile::LevitanComposite { amp, outer, scale, shift, inner } => match outer {
                Outer::Identity => amp.abs() * scale.abs() / (shift - abs_amp_sum(inner)),
                Outer::Sin | Outer::Cos => amp.abs(),
            },
        }
    }

    /// Lipschitz constant in t; infinite for Levitan composites whose inner
    /// denominator approaches zero.
    pub fn lipschitz_t(&self) -> f64 {
        match self {
            TimeProfile::Constant { .. } => 0.0,
            TimeProfile::Periodic { omega0, modes, .. } => {
                modes.iter().map(|m| (m.amp * m.k as f64 * omega0).abs()).sum()
            }
            TimeProfile::QuasiPeriodic { harmonics, .. } => {
                harmonics.iter().map(|h| (h.amp * h.freq).abs()).sum()
            }
            TimeProfile::LevitanComposite { amp, scale, shift, inner, .. } => {
                let margin = shift.abs() - abs_amp_sum(inner);
                if *shift > 0.0 && margin > 0.0 {
                    let dq: f64 = inner.iter().map(|h| (h.amp * h.freq).abs()).sum();
                    amp.abs() * scale.abs() * dq / (margin * margin)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn class(&self) -> RecurrenceClass {
        match self {
            TimeProfile::Constant { .. } => RecurrenceClass::Constant,
            TimeProfile::Periodic { modes, .. } => {
                if modes.iter().all(|m| m.amp == 0.0 || m.k == 0) {
                    RecurrenceClass::Constant
                } else {
                    RecurrenceClass::Periodic
                }
            }
            TimeProfile::QuasiPeriodic { harmonics, .. } => harmonic_class(harmonics),
            TimeProfile::LevitanComposite { shift, inner, .. } => {
                if *shift > abs_amp_sum(inner) {
                    harmonic_class(inner)
                } else {
                    RecurrenceClass::Levitan
                }
            }
        }
    }

    /// Exact period when the profile is periodic.
    pub fn period(&self) -> Option<f64> {
        match self {
            TimeProfile::Constant { .. } => None,
            TimeProfile::Periodic { omega0, modes, .. } => {
                let g = modes.iter().filter(|m| m.amp != 0.0 && m.k > 0).fold(0u32, |g, m| gcd(g, m.k));
                (g > 0).then(|| 2.0 * PI / (g as f64 * omega0))
            }
            TimeProfile::QuasiPeriodic { harmonics, .. }
            | TimeProfile::LevitanComposite { inner: harmonics, .. } => {
                let mut freqs: Vec<f64> = harmonics
                    .iter()
                    .filter(|h| h.amp != 0.0 && h.freq != 0.0)
                    .map(|h| h.freq.abs())
                    .collect();
                freqs.sort_by(f64::total_cmp);
                freqs.dedup();
                match freqs.as_slice() {
                    [f] => Some(2.0 * PI / f),
                    _ => None,
                }
            }
        }
    }

    /// Time-shifted profile t ↦ profile(t + tau).
    pub fn shifted(&self, tau: f64) -> TimeProfile {
        let shift_h = |h: &[Harmonic]| -> Vec<Harmonic> {
            h.iter()
                .map(|x| Harmonic { amp: x.amp, freq: x.freq, phase: x.phase + x.freq * tau })
                .collect()
        };
        match self {
            TimeProfile::Constant { value } => TimeProfile::Constant { value: *value },
            TimeProfile::Periodic { omega0, offset, modes } => TimeProfile::Periodic {
                omega0: *omega0,
                offset: *offset,
                modes: modes
                    .iter()
                    .map(|m| Mode { k: m.k, amp: m.amp, phase: m.phase + m.k as f64 * omega0 * tau })
                    .collect(),
            },
            TimeProfile::QuasiPeriodic { offset, harmonics } => {
                TimeProfile::QuasiPeriodic { offset: *offset, harmonics: shift_h(harmonics) }
            }
            TimeProfile::LevitanComposite { amp, outer, scale, shift, inner } => TimeProfile::LevitanComposite {
                amp: *amp,
                outer: *outer,
                scale: *scale,
                shift: *shift,
                inner: shift_h(inner),
            },
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// One distinct frequency is periodic; several registry frequencies are taken
// as rationally independent.
fn harmonic_class(h: &[Harmonic]) -> RecurrenceClass {
    let mut freqs: Vec<f64> = h
        .iter()
        .filter(|x| x.amp != 0.0 && x.freq != 0.0)
        .map(|x| x.freq.abs())
        .collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    match freqs.len() {
        0 => RecurrenceClass::Constant,
        1 => RecurrenceClass::Periodic,
        _ => RecurrenceClass::QuasiPeriodic,
    }
}
