//! Damped Newton iteration for the two plane problems.
//!
//! Unknowns are the interior nodes in row-major order, Dirichlet data sits on
//! the outermost ring and never changes. Both problems share one driver; they
//! differ only in how the residual and the banded Jacobian are assembled and
//! in the per-iterate monitor (the divergence form watches its ellipticity).

use crate::funcalg::{Fn1, Fn2, FuncError};
use crate::grid::{self, Field2, Grid2, GridError};

use super::banded::Banded;
use super::{InitialGuess, NewtonOpts, Solution, SolverError, SolverTelemetry};

/// Discrete residual of `Δu = F(u, |∇u|²)`: five-point Laplacian minus the
/// right-hand side at the central-difference squared gradient. Values are
/// meaningful on the input's valid region shrunk by one cell; outside it the
/// field holds zeros.
pub fn residual_gradient_semilinear(f: &Fn2, u: &Field2) -> Result<Field2, SolverError> {
    let g = u.grid();
    let lap = grid::laplacian(u)?;
    let tau = squared_gradient(u)?;
    let m = lap.margin();
    let (i0, i1, j0, j1) = lap
        .valid_bounds()
        .expect("operator output keeps a valid region");
    let mut vals = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            vals[g.idx(i, j)] = lap.value(i, j) - f.eval(u.value(i, j), tau.value(i, j))?;
        }
    }
    Ok(Field2::derived(g, vals, m)?)
}

/// Discrete residual of `div(Φ'(|∇u|²) ∇u) = ρ(|∇u|²) F'(u)` with midpoint
/// fluxes: the face diffusion coefficient is `Φ'` at the arithmetic mean of
/// the node-centered squared gradients on either side of the face.
pub fn residual_divergence_form(
    phi: &Fn1,
    rho: &Fn1,
    potential: &Fn1,
    u: &Field2,
) -> Result<Field2, SolverError> {
    let g = u.grid();
    let tau = squared_gradient(u)?;
    let m = u.margin() + 1;
    let (nx, ny) = (g.nx(), g.ny());
    if 2 * m >= nx || 2 * m >= ny {
        return Err(GridError::EmptyValidRegion { margin: m, nx, ny }.into());
    }
    let (cx, cy) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    let mut vals = vec![0.0; g.len()];
    for j in m..ny - m {
        for i in m..nx - m {
            let uc = u.value(i, j);
            let tc = tau.value(i, j);
            let w_e = phi.d1(0.5 * (tc + tau.value(i + 1, j)))?;
            let w_w = phi.d1(0.5 * (tc + tau.value(i - 1, j)))?;
            let w_n = phi.d1(0.5 * (tc + tau.value(i, j + 1)))?;
            let w_s = phi.d1(0.5 * (tc + tau.value(i, j - 1)))?;
            let flux = (w_e * (u.value(i + 1, j) - uc) - w_w * (uc - u.value(i - 1, j))) * cx
                + (w_n * (u.value(i, j + 1) - uc) - w_s * (uc - u.value(i, j - 1))) * cy;
            vals[g.idx(i, j)] = flux - rho.eval(tc)? * potential.d1(uc)?;
        }
    }
    Ok(Field2::derived(g, vals, m)?)
}

/// Solves `Δu = F(u, |∇u|²)` with Dirichlet data `bc` on the grid boundary.
pub fn solve_gradient_semilinear(
    f: &Fn2,
    grid: Grid2,
    bc: impl Fn(f64, f64) -> f64,
    opts: &NewtonOpts,
) -> Result<Solution, SolverError> {
    opts.validate()?;
    let u0 = initial_field(grid, &bc, &opts.initial_guess)?;
    newton_drive(&GradientProblem { f }, u0, opts)
}

/// Solves `div(Φ'(|∇u|²) ∇u) = ρ(|∇u|²) F'(u)` with Dirichlet data `bc`.
///
/// Ellipticity (`Φ' > 0` and `Φ' + 2tΦ'' > 0` at every node-centered squared
/// gradient) is checked on the initial guess and after every accepted step.
pub fn solve_divergence_form(
    phi: &Fn1,
    rho: &Fn1,
    potential: &Fn1,
    grid: Grid2,
    bc: impl Fn(f64, f64) -> f64,
    opts: &NewtonOpts,
) -> Result<Solution, SolverError> {
    opts.validate()?;
    let u0 = initial_field(grid, &bc, &opts.initial_guess)?;
    newton_drive(
        &DivergenceProblem {
            phi,
            rho,
            potential,
        },
        u0,
        opts,
    )
}

fn squared_gradient(u: &Field2) -> Result<Field2, SolverError> {
    let (gx, gy) = grid::gradient(u)?;
    Ok(gx.zip_with(&gy, |a, b| a * a + b * b)?)
}

fn inf_norm(f: &Field2) -> f64 {
    let (i0, i1, j0, j1) = f
        .valid_bounds()
        .expect("residual fields keep a valid region");
    let mut m = 0.0f64;
    for j in j0..=j1 {
        for i in i0..=i1 {
            m = m.max(f.value(i, j).abs());
        }
    }
    m
}

fn dirichlet_frame(g: Grid2, bc: &dyn Fn(f64, f64) -> f64) -> Vec<f64> {
    let (nx, ny) = (g.nx(), g.ny());
    let mut vals = vec![0.0; g.len()];
    for i in 0..nx {
        vals[g.idx(i, 0)] = bc(g.x(i), g.y(0));
        vals[g.idx(i, ny - 1)] = bc(g.x(i), g.y(ny - 1));
    }
    for j in 0..ny {
        vals[g.idx(0, j)] = bc(g.x(0), g.y(j));
        vals[g.idx(nx - 1, j)] = bc(g.x(nx - 1), g.y(j));
    }
    vals
}

/// Solves the discrete Laplace equation with the frame's boundary values.
fn harmonic_lift(g: Grid2, frame: &[f64]) -> Result<Vec<f64>, SolverError> {
    let (nx, ny) = (g.nx(), g.ny());
    let (mx, my) = (nx - 2, ny - 2);
    let (cx, cy) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    let mut a = Banded::new(mx * my, mx, mx);
    let mut rhs = vec![0.0; mx * my];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let p = (j - 1) * mx + (i - 1);
            a.add(p, p, -2.0 * (cx + cy));
            if i > 1 {
                a.add(p, p - 1, cx);
            } else {
                rhs[p] -= cx * frame[g.idx(i - 1, j)];
            }
            if i < nx - 2 {
                a.add(p, p + 1, cx);
            } else {
                rhs[p] -= cx * frame[g.idx(i + 1, j)];
            }
            if j > 1 {
                a.add(p, p - mx, cy);
            } else {
                rhs[p] -= cy * frame[g.idx(i, j - 1)];
            }
            if j < ny - 2 {
                a.add(p, p + mx, cy);
            } else {
                rhs[p] -= cy * frame[g.idx(i, j + 1)];
            }
        }
    }
    let x = a.solve(rhs)?;
    let mut vals = frame.to_vec();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            vals[g.idx(i, j)] = x[(j - 1) * mx + (i - 1)];
        }
    }
    Ok(vals)
}

fn initial_field(
    g: Grid2,
    bc: &dyn Fn(f64, f64) -> f64,
    guess: &InitialGuess,
) -> Result<Field2, SolverError> {
    let frame = dirichlet_frame(g, bc);
    let vals = match guess {
        InitialGuess::ZeroField => frame,
        InitialGuess::BoundaryHarmonicLift => harmonic_lift(g, &frame)?,
        InitialGuess::GivenField(f0) => {
            if f0.grid() != g {
                return Err(GridError::GridMismatch.into());
            }
            let mut vals = frame;
            for j in 1..g.ny() - 1 {
                for i in 1..g.nx() - 1 {
                    vals[g.idx(i, j)] = f0.value(i, j);
                }
            }
            vals
        }
    };
    Ok(Field2::from_values(g, vals)?)
}

trait PlaneProblem {
    fn residual(&self, u: &Field2) -> Result<Field2, SolverError>;
    fn assemble(&self, u: &Field2, a: &mut Banded) -> Result<(), SolverError>;
    fn monitor(&self, _u: &Field2) -> Result<(), SolverError> {
        Ok(())
    }
}

/// Errors a trial step may cause by wandering out of a coefficient domain;
/// the driver halves the step instead of giving up.
fn recoverable(e: &SolverError) -> bool {
    matches!(
        e,
        SolverError::Func(FuncError::Domain { .. })
            | SolverError::Func(FuncError::NonFinite { .. })
            | SolverError::Grid(GridError::NonFiniteValue { .. })
    )
}

fn newton_drive<P: PlaneProblem>(
    problem: &P,
    mut u: Field2,
    opts: &NewtonOpts,
) -> Result<Solution, SolverError> {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (mx, my) = (nx - 2, ny - 2);
    problem.monitor(&u)?;
    let mut res = problem.residual(&u)?;
    let mut rnorm = inf_norm(&res);
    let mut history = vec![rnorm];
    let mut iterations = 0usize;

    while rnorm > opts.residual_tol {
        if iterations == opts.max_iter {
            return Err(SolverError::NoConvergence {
                iterations,
                residual: rnorm,
            });
        }
        let mut a = Banded::new(mx * my, mx, mx);
        problem.assemble(&u, &mut a)?;
        let mut rhs = vec![0.0; mx * my];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                rhs[(j - 1) * mx + (i - 1)] = -res.value(i, j);
            }
        }
        let delta = a.solve(rhs)?;

        let mut accepted = None;
        let mut lambda = 1.0;
        for _ in 0..=opts.damping_halvings {
            match try_step(problem, &u, &delta, lambda)? {
                Some((tu, tres, tnorm)) if tnorm < rnorm => {
                    accepted = Some((tu, tres, tnorm));
                    break;
                }
                _ => lambda *= 0.5,
            }
        }
        let Some((tu, tres, tnorm)) = accepted else {
            return Err(SolverError::NoConvergence {
                iterations,
                residual: rnorm,
            });
        };
        u = tu;
        res = tres;
        rnorm = tnorm;
        iterations += 1;
        history.push(rnorm);
        problem.monitor(&u)?;
    }

    // Final residual comes from a fresh evaluation of the returned field,
    // not from the iteration's bookkeeping.
    let final_residual = inf_norm(&problem.residual(&u)?);
    if final_residual > opts.residual_tol {
        return Err(SolverError::NoConvergence {
            iterations,
            residual: final_residual,
        });
    }
    Ok(Solution {
        u,
        telemetry: SolverTelemetry {
            iterations,
            final_residual,
            residual_history: history,
        },
    })
}

type Trial = Option<(Field2, Field2, f64)>;

fn try_step<P: PlaneProblem>(
    problem: &P,
    u: &Field2,
    delta: &[f64],
    lambda: f64,
) -> Result<Trial, SolverError> {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mx = nx - 2;
    let mut vals = u.values().to_vec();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            vals[g.idx(i, j)] += lambda * delta[(j - 1) * mx + (i - 1)];
        }
    }
    let trial = match Field2::from_values(g, vals) {
        Ok(t) => t,
        Err(e) => {
            let e = SolverError::from(e);
            return if recoverable(&e) { Ok(None) } else { Err(e) };
        }
    };
    match problem.residual(&trial) {
        Ok(res) => {
            let n = inf_norm(&res);
            Ok(Some((trial, res, n)))
        }
        Err(e) if recoverable(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

struct GradientProblem<'a> {
    f: &'a Fn2,
}

impl PlaneProblem for GradientProblem<'_> {
    fn residual(&self, u: &Field2) -> Result<Field2, SolverError> {
        residual_gradient_semilinear(self.f, u)
    }

    fn assemble(&self, u: &Field2, a: &mut Banded) -> Result<(), SolverError> {
        let g = u.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let mx = nx - 2;
        let (cx, cy) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let (gx, gy) = grid::gradient(u)?;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let p = (j - 1) * mx + (i - 1);
                let s = u.value(i, j);
                let (ux, uy) = (gx.value(i, j), gy.value(i, j));
                let tau = ux * ux + uy * uy;
                let fs = self.f.ds(s, tau)?;
                let ft = self.f.dt(s, tau)?;
                // ∂τ/∂(east neighbour) = ux/hx and so on, with the sign
                // flipped on the opposite side.
                let (ex, ey) = (ft * ux / g.hx(), ft * uy / g.hy());
                a.add(p, p, -2.0 * (cx + cy) - fs);
                if i > 1 {
                    a.add(p, p - 1, cx + ex);
                }
                if i < nx - 2 {
                    a.add(p, p + 1, cx - ex);
                }
                if j > 1 {
                    a.add(p, p - mx, cy + ey);
                }
                if j < ny - 2 {
                    a.add(p, p + mx, cy - ey);
                }
            }
        }
        Ok(())
    }
}

struct DivergenceProblem<'a> {
    phi: &'a Fn1,
    rho: &'a Fn1,
    potential: &'a Fn1,
}

impl PlaneProblem for DivergenceProblem<'_> {
    fn residual(&self, u: &Field2) -> Result<Field2, SolverError> {
        residual_divergence_form(self.phi, self.rho, self.potential, u)
    }

    fn monitor(&self, u: &Field2) -> Result<(), SolverError> {
        let g = u.grid();
        let tau = squared_gradient(u)?;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let t = tau.value(i, j);
                let w = self.phi.d1(t)?;
                let q = w + 2.0 * t * self.phi.d2(t)?;
                if w <= 0.0 || q <= 0.0 {
                    return Err(SolverError::EllipticityLost {
                        x: g.x(i),
                        y: g.y(j),
                        value: w.min(q),
                    });
                }
            }
        }
        Ok(())
    }

    fn assemble(&self, u: &Field2, a: &mut Banded) -> Result<(), SolverError> {
        let g = u.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let mx = nx - 2;
        let (cx, cy) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let (gx, gy) = grid::gradient(u)?;
        let tau = gx.zip_with(&gy, |p, q| p * p + q * q)?;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let p = (j - 1) * mx + (i - 1);
                let uc = u.value(i, j);
                let (ue, uw) = (u.value(i + 1, j), u.value(i - 1, j));
                let (un, us) = (u.value(i, j + 1), u.value(i, j - 1));
                let tc = tau.value(i, j);
                let (te, tw) = (
                    0.5 * (tc + tau.value(i + 1, j)),
                    0.5 * (tc + tau.value(i - 1, j)),
                );
                let (tn, ts) = (
                    0.5 * (tc + tau.value(i, j + 1)),
                    0.5 * (tc + tau.value(i, j - 1)),
                );
                let (a_e, a_w) = (self.phi.d1(te)? * cx, self.phi.d1(tw)? * cx);
                let (a_n, a_s) = (self.phi.d1(tn)? * cy, self.phi.d1(ts)? * cy);
                // Residual sensitivity to the central squared gradient: the
                // four face averages each carry half of it, ρ all of it. The
                // faces' other halves couple to second neighbours outside the
                // five-point band and are truncated; the residual stays
                // exact, only the convergence rate is affected.
                let dr_dtau = 0.5
                    * (self.phi.d2(te)? * (ue - uc) * cx - self.phi.d2(tw)? * (uc - uw) * cx
                        + self.phi.d2(tn)? * (un - uc) * cy
                        - self.phi.d2(ts)? * (uc - us) * cy)
                    - self.rho.d1(tc)? * self.potential.d1(uc)?;
                let (px, py) = (gx.value(i, j) / g.hx(), gy.value(i, j) / g.hy());
                let diag = -(a_e + a_w + a_n + a_s) - self.rho.eval(tc)? * self.potential.d2(uc)?;
                a.add(p, p, diag);
                if i > 1 {
                    a.add(p, p - 1, a_w - dr_dtau * px);
                }
                if i < nx - 2 {
                    a.add(p, p + 1, a_e + dr_dtau * px);
                }
                if j > 1 {
                    a.add(p, p - mx, a_s - dr_dtau * py);
                }
                if j < ny - 2 {
                    a.add(p, p + mx, a_n + dr_dtau * py);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::equation::EquationSpec;
    use crate::funcalg::examples::{paper_example, scalar_builtin, ExampleId};
    use crate::funcalg::{Interval, Rect};
    use crate::solver::integrate_profile;

    fn unit_square(n: usize) -> Grid2 {
        Grid2::from_extent((0.0, 1.0), (0.0, 1.0), n, n).unwrap()
    }

    fn zero_rhs() -> Fn2 {
        let rect = Rect::new(
            Interval::new(-16.0, 16.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        );
        Fn2::new(rect, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
            .unwrap()
    }

    fn exp_decay_rhs() -> Fn2 {
        Fn2::of_s(
            &scalar_builtin("exp_neg").unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn linear_boundary_data_is_reproduced_exactly() {
        let g = unit_square(17);
        let sol = solve_gradient_semilinear(&zero_rhs(), g, |x, _| x, &NewtonOpts::default())
            .unwrap();
        assert!(sol.telemetry.iterations <= 1, "{:?}", sol.telemetry);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                assert!(
                    (sol.u.value(i, j) - g.x(i)).abs() < 1e-10,
                    "node ({i}, {j}): {}",
                    sol.u.value(i, j)
                );
            }
        }
    }

    #[test]
    fn exp_decay_bvp_converges_fast_and_obeys_the_maximum_principle() {
        let g = unit_square(65);
        let sol =
            solve_gradient_semilinear(&exp_decay_rhs(), g, |_, _| 1.0, &NewtonOpts::default())
                .unwrap();
        assert!(
            sol.telemetry.iterations <= 8,
            "took {} iterations",
            sol.telemetry.iterations
        );
        assert!(sol.telemetry.final_residual <= 1e-10);

        // The right-hand side is positive, so the discrete solution takes its
        // maximum on the boundary and stays below the boundary value.
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for j in 1..g.ny() - 1 {
            for i in 1..g.nx() - 1 {
                min = min.min(sol.u.value(i, j));
                max = max.max(sol.u.value(i, j));
            }
        }
        assert!(min > 0.0, "interior minimum {min}");
        assert!(max < 1.0, "interior maximum {max}");

        // Independent residual audit of the returned field.
        let res = residual_gradient_semilinear(&exp_decay_rhs(), &sol.u).unwrap();
        assert!(inf_norm(&res) <= 1e-10);
    }

    #[test]
    fn quadratic_rhs_family_with_gradient_coupling_converges() {
        let ex = paper_example(ExampleId::Ex3 {
            k: 1.0,
            lambda: -1.0,
            c: 1.0,
        })
        .unwrap();
        let EquationSpec::GradientSemilinear { f } = &ex.equation else {
            panic!("unexpected equation kind");
        };
        let g = unit_square(33);
        let sol = solve_gradient_semilinear(f, g, |_, _| 1.0, &NewtonOpts::default()).unwrap();
        assert!(sol.telemetry.final_residual <= 1e-10);
        let res = residual_gradient_semilinear(f, &sol.u).unwrap();
        assert!(inf_norm(&res) <= 1e-10);
    }

    #[test]
    fn given_field_restart_converges_immediately() {
        let g = unit_square(33);
        let rhs = exp_decay_rhs();
        let first =
            solve_gradient_semilinear(&rhs, g, |_, _| 1.0, &NewtonOpts::default()).unwrap();
        let opts = NewtonOpts {
            initial_guess: InitialGuess::GivenField(first.u.clone()),
            ..NewtonOpts::default()
        };
        let second = solve_gradient_semilinear(&rhs, g, |_, _| 1.0, &opts).unwrap();
        assert_eq!(second.telemetry.iterations, 0);
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let g = unit_square(33);
        let opts = NewtonOpts {
            max_iter: 1,
            ..NewtonOpts::default()
        };
        let err = solve_gradient_semilinear(&exp_decay_rhs(), g, |_, _| 1.0, &opts).unwrap_err();
        assert!(
            matches!(err, SolverError::NoConvergence { iterations: 1, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn zero_field_guess_converges_for_the_linear_problem() {
        let g = unit_square(17);
        let opts = NewtonOpts {
            initial_guess: InitialGuess::ZeroField,
            ..NewtonOpts::default()
        };
        let sol = solve_gradient_semilinear(&zero_rhs(), g, |x, _| 0.1 * x, &opts).unwrap();
        assert_eq!(sol.telemetry.iterations, 1);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                assert!((sol.u.value(i, j) - 0.1 * g.x(i)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn opts_are_validated() {
        let g = unit_square(9);
        let opts = NewtonOpts {
            residual_tol: 0.0,
            ..NewtonOpts::default()
        };
        let err = solve_gradient_semilinear(&zero_rhs(), g, |_, _| 0.0, &opts).unwrap_err();
        assert!(matches!(err, SolverError::BadParams(_)), "{err:?}");
    }

    #[test]
    fn divergence_form_with_unit_flux_matches_the_gradient_solver() {
        let g = unit_square(21);
        let phi = scalar_builtin("phi_linear").unwrap();
        let rho = scalar_builtin("one").unwrap();
        let potential = scalar_builtin("quarter_double_well").unwrap();
        let div = solve_divergence_form(&phi, &rho, &potential, g, |x, _| x, &NewtonOpts::default())
            .unwrap();

        let rhs = Fn2::of_s(
            &scalar_builtin("double_well_prime").unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        )
        .unwrap();
        let grad = solve_gradient_semilinear(&rhs, g, |x, _| x, &NewtonOpts::default()).unwrap();

        let mut max_diff = 0.0f64;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                max_diff = max_diff.max((div.u.value(i, j) - grad.u.value(i, j)).abs());
            }
        }
        assert!(max_diff <= 1e-8, "solvers disagree by {max_diff}");
    }

    #[test]
    fn divergence_form_reproduces_linear_data() {
        let g = unit_square(17);
        let phi = scalar_builtin("phi_quadratic").unwrap();
        let rho = scalar_builtin("one").unwrap();
        // `one` has zero derivative, so the forcing term vanishes and the
        // linear ramp is an exact discrete solution.
        let potential = scalar_builtin("one").unwrap();
        let sol = solve_divergence_form(&phi, &rho, &potential, g, |x, _| x, &NewtonOpts::default())
            .unwrap();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                assert!((sol.u.value(i, j) - g.x(i)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn divergence_form_solves_with_profile_trace_data() {
        // Boundary data from the one-dimensional connecting profile of the
        // same equation; the grid spacing is a multiple of the profile step
        // so the trace needs no interpolation.
        let phi = scalar_builtin("phi_quadratic").unwrap();
        let rho = scalar_builtin("one").unwrap();
        let potential = scalar_builtin("quarter_double_well").unwrap();
        let eq = EquationSpec::DivergenceForm {
            phi: phi.clone(),
            rho: rho.clone(),
            potential: potential.clone(),
        };
        // First-integral value at u = 0: Q(t) = t + 3t²/2 solves Q(t₀) = 1/2
        // at t₀ = 1/3, so u'(0) = 1/√3.
        let v0 = (1.0f64 / 3.0).sqrt();
        let profile = integrate_profile(&eq, 0.0, v0, 1e-3, Interval::new(-0.55, 0.55).unwrap())
            .unwrap();
        let x0 = profile.xs[0];

        let g = Grid2::from_extent((-0.5, 0.5), (0.0, 1.0), 21, 21).unwrap();
        let trace = move |x: f64, _y: f64| {
            let k = ((x - x0) / profile.h).round() as usize;
            profile.u[k]
        };
        let sol =
            solve_divergence_form(&phi, &rho, &potential, g, trace, &NewtonOpts::default())
                .unwrap();
        assert!(sol.telemetry.final_residual <= 1e-10);
        let res = residual_divergence_form(&phi, &rho, &potential, &sol.u).unwrap();
        assert!(inf_norm(&res) <= 1e-10);
    }

    #[test]
    fn lost_ellipticity_is_reported_with_a_location() {
        let g = unit_square(9);
        // Φ(t) = t − t² degenerates at t = 1/6; boundary data 3x forces
        // squared gradients near 9 already on the harmonic lift.
        let phi = Fn1::new(
            Interval::new(-0.25, 16.0).unwrap(),
            |t| t - t * t,
            |t| 1.0 - 2.0 * t,
            |_| -2.0,
        )
        .unwrap();
        let rho = scalar_builtin("one").unwrap();
        let potential = scalar_builtin("one").unwrap();
        let err = solve_divergence_form(&phi, &rho, &potential, g, |x, _| 3.0 * x, &NewtonOpts::default())
            .unwrap_err();
        assert!(matches!(err, SolverError::EllipticityLost { .. }), "{err:?}");
    }

    #[test]
    fn residual_evaluator_vanishes_on_manufactured_solutions() {
        // u = x² + y² has Δu = 4 exactly in the five-point stencil, so the
        // residual against F ≡ 4 is zero to rounding.
        let g = Grid2::from_extent((-1.0, 1.0), (-1.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(g, |x, y| x * x + y * y).unwrap();
        let rect = Rect::new(
            Interval::new(-16.0, 16.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        );
        let four = Fn2::new(rect, |_, _| 4.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
            .unwrap();
        let res = residual_gradient_semilinear(&four, &u).unwrap();
        assert!(inf_norm(&res) < 1e-11);
        assert_eq!(res.margin(), 1);
    }
}
