//! Semilinear SDE declaration: diagonal semigroup, coefficient quadruple
//! (f, g, F, G) built from registry profiles and state maps, noise spec and
//! the constants A₀, ℒ, p.

mod conditions;
mod constants;
pub mod presets;

pub use conditions::{check_conditions, heat_lipschitz_formula, Check, ConditionReport, LipschitzParts};
pub use constants::{
    compat_alpha, compat_c, compat_gap_bound, compute_cp, compute_dp, compute_radius, compute_theta,
    linear_solution_bound, stability_margin, theta_2, theta_limit_2plus, TheoremConstants,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::galerkin::SineBasis;
use crate::noise::{JumpMeasureSpec, MarkFunction, WienerSpec};
use crate::recurrence::profile::TimeProfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    /// Decay rates λ_n; T(t) acts as exp(−λ_n t) on mode n.
    pub eigenvalues: Vec<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub omega: f64,
}

impl SemigroupSpec {
    pub fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() {
            return Err(Error::input("semigroup needs at least one eigenvalue"));
        }
        if self.eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::input("eigenvalues must be positive"));
        }
        if !(self.k.is_finite() && self.k >= 1.0) {
            return Err(Error::input("K must be >= 1 for a diagonal semigroup"));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::input("omega must be > 0"));
        }
        let min = self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.omega > min * (1.0 + 1e-12) {
            return Err(Error::input(format!(
                "‖T(t)‖ ≤ K e^(−ωt) fails: omega {} exceeds smallest eigenvalue {min}",
                self.omega
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateMap {
    Linear { c: f64 },
    Sin { c: f64 },
    Cos { c: f64 },
    ClippedIdentity { c: f64, bound: f64 },
    Const { c: f64 },
}

impl StateMap {
    pub fn apply(&self, y: f64) -> f64 {
        match *self {
            StateMap::Linear { c } => c * y,
            StateMap::Sin { c } => c * y.sin(),
            StateMap::Cos { c } => c * y.cos(),
            StateMap::ClippedIdentity { c, bound } => c * y.clamp(-bound, bound),
            StateMap::Const { c } => c,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            StateMap::Linear { c } | StateMap::Sin { c } | StateMap::Cos { c } | StateMap::ClippedIdentity { c, .. } => {
                c.abs()
            }
            StateMap::Const { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StateMap::ClippedIdentity { c, bound } => c.is_finite() && bound.is_finite() && bound >= 0.0,
            StateMap::Linear { c } | StateMap::Sin { c } | StateMap::Cos { c } | StateMap::Const { c } => c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input("state map parameters must be finite"))
        }
    }
}

/// profile(t) · map(y)
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub profile: TimeProfile,
    pub map: StateMap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// Applied to each modal coordinate.
    #[default]
    Modal,
    /// Applied pointwise at collocation nodes, then projected.
    Collocated,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub terms: Vec<Term>,
    #[serde(default)]
    pub space: Space,
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient { terms: Vec::new(), space: Space::Modal }
    }

    pub fn single(profile: TimeProfile, map: StateMap) -> Self {
        Coefficient { terms: vec![Term { profile, map }], space: Space::Modal }
    }

    pub fn with_term(mut self, profile: TimeProfile, map: StateMap) -> Self {
        self.terms.push(Term { profile, map });
        self
    }

    pub fn collocated(mut self) -> Self {
        self.space = Space::Collocated;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64, y: &[f64], basis: Option<&SineBasis>) -> Vec<f64> {
        self.eval_weighted(t, y, None, basis)
    }

    /// Value multiplied, mode-wise or pointwise, by a mark in modal coordinates.
    fn eval_weighted(&self, t: f64, y: &[f64], mark: Option<&[f64]>, basis: Option<&SineBasis>) -> Vec<f64> {
        if self.terms.is_empty() {
            return vec![0.0; y.len()];
        }
        let pw: Vec<f64> = self.terms.iter().map(|term| term.profile.eval(t)).collect();
        let apply = |v: f64| -> f64 { self.terms.iter().zip(&pw).map(|(term, p)| p * term.map.apply(v)).sum() };
        match (self.space, basis) {
            (Space::Collocated, Some(b)) => {
                let u = b.synthesize(y);
                let z = mark.map(|m| if m.len() == 1 { vec![m[0]; u.len()] } else { b.synthesize(m) });
                let v: Vec<f64> = match z {
                    Some(z) => u.iter().zip(&z).map(|(uj, zj)| apply(*uj) * zj).collect(),
                    None => u.iter().map(|uj| apply(*uj)).collect(),
                };
                b.project(&v)
            }
            _ => match mark {
                Some(m) => y
                    .iter()
                    .enumerate()
                    .map(|(n, yn)| apply(*yn) * if m.len() == 1 { m[0] } else { m.get(n).copied().unwrap_or(0.0) })
                    .collect(),
                None => y.iter().map(|yn| apply(*yn)).collect(),
            },
        }
    }

    /// Time-uniform Lipschitz bound Σ sup|profile|·Lip(map).
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.profile.sup_bound() * t.map.lipschitz()).sum()
    }

    pub fn shifted(&self, tau: f64) -> Coefficient {
        Coefficient {
            terms: self
                .terms
                .iter()
                .map(|t| Term { profile: t.profile.shifted(tau), map: t.map })
                .collect(),
            space: self.space,
        }
    }

    pub fn profiles(&self) -> impl Iterator<Item = &TimeProfile> {
        self.terms.iter().map(|t| &t.profile)
    }

    fn validate(&self) -> Result<()> {
        for t in &self.terms {
            t.profile.validate()?;
            t.map.validate()?;
        }
        Ok(())
    }
}

/// Jump coefficient: a coefficient optionally multiplied by the mark.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpCoefficient {
    pub coefficient: Coefficient,
    pub uses_mark: bool,
}

impl JumpCoefficient {
    pub fn zero() -> Self {
        JumpCoefficient { coefficient: Coefficient::zero(), uses_mark: false }
    }

    pub fn mark_free(coefficient: Coefficient) -> Self {
        JumpCoefficient { coefficient, uses_mark: false }
    }

    pub fn times_mark(coefficient: Coefficient) -> Self {
        JumpCoefficient { coefficient, uses_mark: true }
    }

    pub fn eval(&self, t: f64, y: &[f64], mark: &[f64], basis: Option<&SineBasis>) -> Vec<f64> {
        if self.uses_mark {
            self.coefficient.eval_weighted(t, y, Some(mark), basis)
        } else {
            self.coefficient.eval(t, y, basis)
        }
    }

    pub fn shifted(&self, tau: f64) -> JumpCoefficient {
        JumpCoefficient { coefficient: self.coefficient.shifted(tau), uses_mark: self.uses_mark }
    }
}

/// A jump coefficient bound to a basis, usable as a mark function.
pub struct BoundJump<'a> {
    pub coef: &'a JumpCoefficient,
    pub basis: Option<&'a SineBasis>,
}

impl MarkFunction for BoundJump<'_> {
    fn eval(&self, t: f64, y: &[f64], mark: &[f64]) -> Vec<f64> {
        self.coef.eval(t, y, mark, self.basis)
    }

    fn affine_in_mark(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeModel {
    pub semigroup: SemigroupSpec,
    pub f: Coefficient,
    pub g: Coefficient,
    /// Small-jump coefficient F (compensated).
    pub big_f: JumpCoefficient,
    /// Large-jump coefficient G.
    pub big_g: JumpCoefficient,
    pub wiener: WienerSpec,
    pub jumps: JumpMeasureSpec,
    pub a0: f64,
    pub lipschitz_l: f64,
    pub moment_p: f64,
    #[serde(default)]
    pub basis: Option<SineBasis>,
}

impl SdeModel {
    pub fn dim(&self) -> usize {
        self.semigroup.eigenvalues.len()
    }

    pub fn b(&self) -> f64 {
        self.jumps.large_rate
    }

    pub fn validate(&self) -> Result<()> {
        self.semigroup.validate()?;
        self.wiener.validate(self.dim())?;
        self.jumps.validate()?;
        for c in [&self.f, &self.g, &self.big_f.coefficient, &self.big_g.coefficient] {
            c.validate()?;
            if c.space == Space::Collocated && self.basis.is_none() {
                return Err(Error::input("collocated coefficient needs a Galerkin basis"));
            }
        }
        if let Some(b) = &self.basis {
            if b.n_modes != self.dim() {
                return Err(Error::input("basis size differs from semigroup dimension"));
            }
        }
        for (name, v) in [("A0", self.a0), ("lipschitz_L", self.lipschitz_l)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::input(format!("{name} must be finite and >= 0")));
            }
        }
        if !(self.moment_p.is_finite() && self.moment_p > 2.0) {
            return Err(Error::input("moment_p must be > 2"));
        }
        for (label, dim) in [("small", self.jumps.small_mark.dim()), ("large", self.jumps.large_mark.dim())] {
            if dim != 1 && dim != self.dim() {
                return Err(Error::input(format!("{label} mark dimension {dim} fits neither scalar nor model")));
            }
        }
        Ok(())
    }

    /// f(t,Y) + a.
    pub fn drift(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut v = self.f.eval(t, y, self.basis.as_ref());
        for (vi, a) in v.iter_mut().zip(&self.wiener.drift_a) {
            *vi += a;
        }
        v
    }

    /// Diagonal diffusion g(t,Y); mode n is driven by g_n dW_n.
    pub fn diffusion(&self, t: f64, y: &[f64]) -> Vec<f64> {
        self.g.eval(t, y, self.basis.as_ref())
    }

    pub fn small_jump(&self, t: f64, y: &[f64], mark: &[f64]) -> Vec<f64> {
        self.big_f.eval(t, y, mark, self.basis.as_ref())
    }

    pub fn large_jump(&self, t: f64, y: &[f64], mark: &[f64]) -> Vec<f64> {
        self.big_g.eval(t, y, mark, self.basis.as_ref())
    }

    pub fn compensator(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let bound = BoundJump { coef: &self.big_f, basis: self.basis.as_ref() };
        crate::noise::small_jump_compensator(&self.jumps, &bound, t, y)
    }

    /// Coefficients t ↦ (f,g,F,G)(t + tau, ·).
    pub fn shifted(&self, tau: f64) -> SdeModel {
        SdeModel {
            f: self.f.shifted(tau),
            g: self.g.shifted(tau),
            big_f: self.big_f.shifted(tau),
            big_g: self.big_g.shifted(tau),
            ..self.clone()
        }
    }

    pub fn profiles(&self) -> Vec<&TimeProfile> {
        self.f
            .profiles()
            .chain(self.g.profiles())
            .chain(self.big_f.coefficient.profiles())
            .chain(self.big_g.coefficient.profiles())
            .collect()
    }

    pub fn constants(&self) -> Result<TheoremConstants> {
        TheoremConstants::evaluate(
            self.semigroup.k,
            self.semigroup.omega,
            self.lipschitz_l,
            self.a0,
            self.b(),
            self.moment_p,
        )
    }

    pub fn margin(&self) -> f64 {
        stability_margin(self.semigroup.k, self.semigroup.omega, self.lipschitz_l, self.b())
    }
}
