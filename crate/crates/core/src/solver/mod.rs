//! Nonlinear elliptic boundary-value solvers and one-dimensional profile
//! integration.
//!
//! Two plane solvers share a damped Newton driver: one for equations of the
//! form `Δu = F(u, |∇u|²)` and one for divergence-form equations
//! `div(Φ'(|∇u|²) ∇u) = ρ(|∇u|²) F'(u)`. Both discretize on a [`Grid2`] with
//! Dirichlet data, assemble an analytic banded Jacobian, and re-check the
//! discrete residual of the returned field independently of the iteration's
//! own bookkeeping. Profiles of the corresponding one-dimensional reductions
//! are integrated with classical fourth-order Runge–Kutta.

mod banded;
mod newton;
mod profile;

use serde::Serialize;
use thiserror::Error;

use crate::funcalg::FuncError;
use crate::grid::{Field2, GridError};

pub use newton::{
    residual_divergence_form, residual_gradient_semilinear, solve_divergence_form,
    solve_gradient_semilinear,
};
pub use profile::{integrate_profile, kink};

/// State-magnitude ceiling for profile integration; exceeding it aborts with
/// [`SolverError::BlowUp`].
pub const BLOW_UP_LIMIT: f64 = 1e6;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("linear solve failed at elimination step {step} (pivot {pivot:e})")]
    LinearSolveFailure { step: usize, pivot: f64 },
    #[error("diffusion coefficient lost ellipticity at ({x}, {y}): {value:e}")]
    EllipticityLost { x: f64, y: f64, value: f64 },
    #[error("profile state exceeded {BLOW_UP_LIMIT:e} at x = {x} (|value| = {value:e})")]
    BlowUp { x: f64, value: f64 },
    #[error("one-dimensional operator degenerate at x = {x}: coefficient {value:e}")]
    DegenerateEllipticity { x: f64, value: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Starting point for the Newton iteration.
#[derive(Debug, Clone, Default)]
pub enum InitialGuess {
    /// Zero on the interior, Dirichlet data on the boundary.
    ZeroField,
    /// Solve the discrete Laplace equation with the Dirichlet data first.
    /// Costs one extra linear solve and keeps the first nonlinear iterate
    /// inside the coefficient domains for every problem in the catalog.
    #[default]
    BoundaryHarmonicLift,
    /// Caller-supplied field on the same grid; its boundary ring is replaced
    /// by the Dirichlet data.
    GivenField(Field2),
}

/// Damped-Newton controls shared by both plane solvers.
#[derive(Debug, Clone)]
pub struct NewtonOpts {
    /// Maximum number of Newton updates.
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the interior residual.
    pub residual_tol: f64,
    /// How many times a rejected step is halved before giving up.
    pub damping_halvings: usize,
    pub initial_guess: InitialGuess,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        NewtonOpts {
            max_iter: 50,
            residual_tol: 1e-10,
            damping_halvings: 20,
            initial_guess: InitialGuess::BoundaryHarmonicLift,
        }
    }
}

impl NewtonOpts {
    fn validate(&self) -> Result<(), SolverError> {
        if self.max_iter == 0 {
            return Err(SolverError::BadParams("max_iter must be positive".into()));
        }
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            return Err(SolverError::BadParams(format!(
                "residual_tol must be positive and finite, got {}",
                self.residual_tol
            )));
        }
        Ok(())
    }
}

/// Iteration record attached to every solve; serialized into job reports.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverTelemetry {
    /// Number of accepted Newton updates.
    pub iterations: usize,
    /// Max-norm of the interior residual of the returned field, recomputed
    /// from scratch after the iteration finished.
    pub final_residual: f64,
    /// Residual max-norm after the initial guess and after each accepted
    /// update.
    pub residual_history: Vec<f64>,
}

/// A converged discrete solution together with its telemetry.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Field2,
    pub telemetry: SolverTelemetry,
}
