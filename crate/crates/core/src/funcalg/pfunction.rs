//! Candidate P-functions: a surface `P(s,t)` together with the multiplier
//! kind its maximum principle is stated with, and — when available — a
//! separable form `P(s,t) = B(t) − Γ(s)` from which gradient bounds follow.

use std::fmt;

use super::invert::invert_monotone;
use super::{Fn1, Fn2, FuncError, PROBE_1D, PROBE_2D};

/// Multiplier in front of the elliptic operator of the maximum principle.
#[derive(Clone)]
pub enum MuKind {
    /// `μ = P_t · |∇u|²`
    PtTimesTSquared,
    /// `μ ≡ 1`
    UnitMu,
    /// `μ = m(|∇u|)` for a user-supplied positive function.
    CustomOfGradNorm(Fn1),
}

impl fmt::Debug for MuKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuKind::PtTimesTSquared => write!(f, "PtTimesTSquared"),
            MuKind::UnitMu => write!(f, "UnitMu"),
            MuKind::CustomOfGradNorm(_) => write!(f, "CustomOfGradNorm(..)"),
        }
    }
}

/// Separable decomposition `P(s,t) = B(t) − Γ(s)`.
///
/// `B` must vanish at 0, be strictly increasing, and be convex on the
/// positive axis; `Γ` must be nonnegative. Under those conditions the level
/// set `P ≤ 0` yields the pointwise bound `t ≤ Ψ(s) = B⁻¹(Γ(s))`.
#[derive(Clone, Debug)]
pub struct Separable {
    pub b: Fn1,
    pub gamma: Fn1,
}

/// A candidate P-function for some equation.
#[derive(Clone, Debug)]
pub struct PFunctionSpec {
    pub p: Fn2,
    pub mu: MuKind,
    pub separable: Option<Separable>,
}

const SEP_TOL: f64 = 1e-12;
/// Convexity of `B` is checked against a looser floor: second derivatives of
/// quadrature-backed handles come from finite differences, which carry noise
/// of order 1e−10 that must not spuriously reject a flat `B`.
const CONVEXITY_TOL: f64 = 1e-9;

impl PFunctionSpec {
    /// Builds a spec, validating the separable decomposition (when supplied)
    /// by sampling: `B(0) = 0`, `B' > 0` and `B'' ≥ 0` for `t > 0`, `Γ ≥ 0`,
    /// and agreement of `B(t) − Γ(s)` with `P` over the declared rectangle.
    ///
    /// The standing sign assumption `P_t > 0` is *not* enforced here: the
    /// criterion and residual checks test it and report a failed subcheck,
    /// which is how deliberately broken candidates surface in reports.
    pub fn new(p: Fn2, mu: MuKind, separable: Option<Separable>) -> Result<Self, FuncError> {
        if let Some(sep) = &separable {
            validate_separable(&p, sep)?;
        }
        Ok(PFunctionSpec { p, mu, separable })
    }

    /// Gradient bound `Ψ(s) = B⁻¹(Γ(s))` from the separable form.
    ///
    /// The returned value bounds the squared gradient: on the region where
    /// the maximum principle gives `P ≤ 0`, solutions satisfy
    /// `|∇u|² ≤ Ψ(u)`.
    pub fn psi(&self, s: f64) -> Result<f64, FuncError> {
        let sep = self.separable.as_ref().ok_or_else(|| {
            FuncError::BadParams("gradient bound requires a separable form B(t) - Gamma(s)".into())
        })?;
        let y = sep.gamma.eval(s)?;
        invert_monotone(&sep.b, y, sep.b.domain)
    }
}

fn validate_separable(p: &Fn2, sep: &Separable) -> Result<(), FuncError> {
    let b = &sep.b;
    let gamma = &sep.gamma;

    if b.domain.contains(0.0) {
        let b0 = b.eval(0.0)?;
        if b0.abs() > SEP_TOL {
            return Err(FuncError::BadParams(format!(
                "separable B must vanish at 0, got B(0) = {b0:e}"
            )));
        }
    }
    for t in b.domain.sample(PROBE_1D) {
        if t <= 0.0 {
            continue;
        }
        let d1 = b.d1(t)?;
        if d1 <= 0.0 {
            return Err(FuncError::BadParams(format!(
                "separable B must be strictly increasing; B'({t}) = {d1:e}"
            )));
        }
        let d2 = b.d2(t)?;
        if d2 < -CONVEXITY_TOL {
            return Err(FuncError::BadParams(format!(
                "separable B must be convex for t > 0; B''({t}) = {d2:e}"
            )));
        }
    }
    for s in gamma.domain.sample(PROBE_1D) {
        let g = gamma.eval(s)?;
        if g < -SEP_TOL {
            return Err(FuncError::BadParams(format!(
                "separable Gamma must be nonnegative; Gamma({s}) = {g:e}"
            )));
        }
    }
    // Consistency of the decomposition with the full surface.
    for s in p.domain.s.sample(PROBE_2D) {
        for t in p.domain.t.sample(PROBE_2D) {
            if !b.domain.contains(t) || !gamma.domain.contains(s) {
                continue;
            }
            let full = p.eval(s, t)?;
            let split = b.eval(t)? - gamma.eval(s)?;
            if (full - split).abs() > SEP_TOL * (1.0 + full.abs()) {
                return Err(FuncError::BadParams(format!(
                    "separable form disagrees with P at ({s}, {t}): {full:e} vs {split:e}"
                )));
            }
        }
    }
    Ok(())
}
