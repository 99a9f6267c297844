//! Equation families the laboratory knows how to check.

use std::fmt;
use std::sync::Arc;

use super::{Fn1, Fn2, FuncError, Interval};

/// Third-order closure `(s, t, w) -> value` used by the fourth-order
/// Hessian-identity family: `s` is the solution value, `t` the squared
/// gradient, `w` the Laplacian.
pub type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Tagged union of the equation families.
#[derive(Clone)]
pub enum EquationSpec {
    /// `Δu = f(u)`
    Semilinear { f: Fn1 },
    /// `Δu = F(u, |∇u|²)`
    GradientSemilinear { f: Fn2 },
    /// `div(Φ'(|∇u|²) ∇u) = ρ(|∇u|²) F'(u)`
    DivergenceForm { phi: Fn1, rho: Fn1, potential: Fn1 },
    /// `det ∇²u > 0`; structural, carries no coefficients.
    MongeAmpereDrift,
    /// `a(Δu)·[|∇u|² Δ²u − Δu (∇u·∇Δu)] = b(u) |∇u|⁴`
    FourthOrderQuasilinear { a: Fn1, b: Fn1 },
    /// `|Hes u|² = F3(u, |∇u|², Δu) + (u/2) Δ²u`
    HessianBalance { f3: Fn3 },
    /// `c·|Hes u|² − Δ²u = 0` (checked as a subsolution, `≥ 0`)
    BiharmonicSub { c: f64 },
    /// `2|Hes u|² = (Δu)² + u Δ²u`
    OrderReduction,
}

impl fmt::Debug for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EquationSpec::Semilinear { .. } => "Semilinear",
            EquationSpec::GradientSemilinear { .. } => "GradientSemilinear",
            EquationSpec::DivergenceForm { .. } => "DivergenceForm",
            EquationSpec::MongeAmpereDrift => "MongeAmpereDrift",
            EquationSpec::FourthOrderQuasilinear { .. } => "FourthOrderQuasilinear",
            EquationSpec::HessianBalance { .. } => "HessianBalance",
            EquationSpec::BiharmonicSub { c } => return write!(f, "BiharmonicSub(c = {c})"),
            EquationSpec::OrderReduction => "OrderReduction",
        };
        write!(f, "{name}")
    }
}

impl EquationSpec {
    /// Right-hand side as a function of `(u, |∇u|²)` for the two second-order
    /// non-divergence families. `Semilinear` is lifted to a constant-in-t
    /// `Fn2` with the given squared-gradient range.
    pub fn gradient_rhs(&self, t_domain: Interval) -> Result<Option<Fn2>, FuncError> {
        match self {
            EquationSpec::Semilinear { f } => Ok(Some(Fn2::of_s(f, t_domain)?)),
            EquationSpec::GradientSemilinear { f } => Ok(Some(f.clone())),
            _ => Ok(None),
        }
    }
}
