//! The elliptic-inequality residual, the boundary maximum principle, and the
//! gradient bound `P(u, |∇u|²) ≤ 0`.

use crate::funcalg::pfunction::PFunctionSpec;
use crate::funcalg::Fn2;
use crate::grid::{extrema, gradient, laplacian, Field2};
use crate::report::{CheckReport, Location, PassRule, Provenance, Scan};

use super::{
    p_field, probe_points, require_gradient_semilinear_solution, solution_samples,
    valid_bounds_of, SampledSolution, VerifyError, GRID_RESIDUAL_FACTOR,
};

/// Number of probe values when a hypothesis is sampled over a solution range.
const RANGE_PROBES: usize = 129;

/// Discrete residual of the main differential inequality,
///
/// `R = P_t |∇u|² Δ_h P − (2 P_t |∇u|² F_t − P_s)(∇_h P · ∇_h u) − ½|∇_h P|²`,
///
/// where every derivative of the candidate field comes from outer
/// differencing of the evaluated field. For a genuine candidate on a genuine
/// solution the continuum quantity is nonnegative, so the check passes iff
/// `R ≥ −tol` with `tol = 10·h²·(1 + max local term magnitude)`.
///
/// The derivation presumes `P_t > 0` where the gradient does not vanish; the
/// sign is tested alongside the residual (the residual formula alone cannot
/// see it: it is even under `P ↦ −P`). When the gate trips, the reported
/// worst value is the offending `P_t` so the verdict fails honestly.
///
/// The field must first satisfy `Δ_h u = F(u, |∇_h u|²)` to within
/// [`EQUATION_TOL`](super::EQUATION_TOL); otherwise [`VerifyError::NotASolution`].
pub fn residual_main_inequality(
    p: &Fn2,
    f: &Fn2,
    u: &Field2,
) -> Result<(Field2, CheckReport), VerifyError> {
    require_gradient_semilinear_solution(f, u)?;

    let pf = p_field(p, u)?;
    let lap_p = laplacian(&pf)?;
    let (pgx, pgy) = gradient(&pf)?;
    let (gx, gy) = gradient(u)?;
    let g = u.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&lap_p)?;

    let mut vals = vec![0.0; g.len()];
    let mut residuals = Scan::new();
    let mut pt_gate = Scan::new();
    let mut max_scale: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let at = Location::Plane(g.x(i), g.y(j));
            let s = u.value(i, j);
            let (ax, ay) = (gx.value(i, j), gy.value(i, j));
            let tau = ax * ax + ay * ay;
            let pt = p.dt(s, tau)?;
            let ps = p.ds(s, tau)?;
            let ft = f.dt(s, tau)?;
            let advect = pgx.value(i, j) * ax + pgy.value(i, j) * ay;
            let grad_p_sq =
                pgx.value(i, j) * pgx.value(i, j) + pgy.value(i, j) * pgy.value(i, j);
            let diffusion = pt * tau * lap_p.value(i, j);
            let drift = (2.0 * pt * tau * ft - ps) * advect;
            let quad = 0.5 * grad_p_sq;
            let r = diffusion - drift - quad;
            vals[g.idx(i, j)] = r;
            residuals.add(r, at);
            max_scale = max_scale.max(diffusion.abs() + drift.abs() + quad.abs());
            if tau > 0.0 {
                pt_gate.add(pt, at);
            }
        }
    }

    let h = g.hx().max(g.hy());
    let tol = GRID_RESIDUAL_FACTOR * h * h * (1.0 + max_scale);
    let stats = residuals.stats();
    let gate_tripped = !pt_gate.is_empty() && pt_gate.min <= 0.0;
    let (worst, at) = if gate_tripped {
        (pt_gate.min, pt_gate.min_at)
    } else {
        (residuals.min, residuals.min_at)
    };
    let mut report = CheckReport::new(
        "main_inequality",
        PassRule::LowerBound,
        worst,
        at,
        tol,
        stats,
        Provenance::of_field(u),
    );
    if gate_tripped {
        report = report.note(format!(
            "positivity gate: min P_t = {:e} at {} where the gradient does not vanish; \
             the inequality's derivation requires P_t > 0, so the gate value replaces \
             the residual as the verdict quantity",
            pt_gate.min, pt_gate.min_at
        ));
    }
    let field = Field2::derived(g, vals, lap_p.margin())?;
    Ok((field, report))
}

/// Discrete boundary maximum principle: the interior of the valid region must
/// not exceed the outermost valid ring by more than `tol`.
///
/// The ring of a bounded window stands in for the domain boundary of the
/// continuum statement; the report notes the proxy. The theorem also exempts
/// interior points where its weight `μ` vanishes — this check deliberately
/// has no access to `μ` and reports the plain comparison, so equality-case
/// candidates (critical points of `u` in the window) can legitimately fail it.
pub fn check_boundary_max_principle(
    pfield: &Field2,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let ex = extrema(pfield)?;
    let g = pfield.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(pfield)?;
    let mut scan = Scan::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            scan.add(pfield.value(i, j), Location::Plane(g.x(i), g.y(j)));
        }
    }
    let worst = ex.boundary_max - ex.interior_max;
    Ok(CheckReport::new(
        "boundary_max_principle",
        PassRule::LowerBound,
        worst,
        Location::Plane(ex.interior_argmax.0, ex.interior_argmax.1),
        tol,
        scan.stats(),
        Provenance::of_field(pfield),
    )
    .note(format!(
        "interior max {:e} at ({}, {}); ring max {:e} at ({}, {})",
        ex.interior_max,
        ex.interior_argmax.0,
        ex.interior_argmax.1,
        ex.boundary_max,
        ex.boundary_argmax.0,
        ex.boundary_argmax.1
    ))
    .note(
        "bounded-window proxy: the outermost valid ring stands in for the domain boundary"
            .into(),
    ))
}

/// Gradient bound `P(u, |∇u|²) ≤ 0`: passes iff the candidate field stays
/// below `tol` over the window.
///
/// The bound's hypothesis `P(s, 0) ≤ 0` is sampled over the attained solution
/// range first; a violation refuses the check with
/// [`VerifyError::HypothesisFail`] instead of judging the conclusion — a
/// candidate whose hypothesis fails (the classic exponential counterexample)
/// must never produce a verdict on the bound itself.
///
/// When the candidate has a separable form `B(t) − Γ(s)`, the equivalent
/// explicit bound `|∇u|² ≤ Ψ(u) = B⁻¹(Γ(u))` is evaluated as well and its
/// worst margin is recorded in the notes.
pub fn check_gradient_bound(
    spec: &PFunctionSpec,
    u: SampledSolution,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let samples = solution_samples(&u)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for sample in &samples {
        lo = lo.min(sample.s);
        hi = hi.max(sample.s);
    }
    for s in probe_points(lo, hi, RANGE_PROBES) {
        let v = spec.p.eval(s, 0.0)?;
        if v > tol {
            return Err(VerifyError::HypothesisFail {
                hypothesis: "P(s, 0) <= 0 on the attained solution range".into(),
                at: format!("s = {s}"),
                value: v,
            });
        }
    }

    let mut scan = Scan::new();
    for sample in &samples {
        scan.add(spec.p.eval(sample.s, sample.tau)?, sample.at);
    }
    let mut report = CheckReport::new(
        "gradient_bound",
        PassRule::UpperBound,
        scan.max,
        scan.max_at,
        tol,
        scan.stats(),
        u.provenance(),
    )
    .note(
        "bounded-window evidence for an entire-solution bound: the window stands in for \
         the whole space"
            .into(),
    );
    if spec.separable.is_some() {
        let mut sep = Scan::new();
        for sample in &samples {
            sep.add(sample.tau - spec.psi(sample.s)?, sample.at);
        }
        report = report.note(format!(
            "separable form: max(|grad u|^2 - Psi(u)) = {:e} at {}",
            sep.max, sep.max_at
        ));
    }
    Ok(report)
}
