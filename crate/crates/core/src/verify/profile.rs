//! First-integral constancy, the eikonal reduction, and the constancy /
//! nonexistence gates.

use crate::funcalg::pfunction::PFunctionSpec;
use crate::funcalg::Fn1;
use crate::grid::{gradient, laplacian, Field2, Profile1};
use crate::report::{CheckReport, Location, PassRule, Provenance, Scan};

use super::{
    probe_points, solution_samples, valid_bounds_of, SampledSolution, VerifyError,
};

/// Drift of the candidate along a one-dimensional profile: in 1D the
/// candidate is an exact first integral, so `max P − min P` over the run
/// measures integrator drift and must stay below `tol`.
pub fn check_profile_first_integral(
    spec: &PFunctionSpec,
    prof: &Profile1,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let mut scan = Scan::new();
    for k in 0..prof.len() {
        let v = spec.p.eval(prof.u[k], prof.du[k] * prof.du[k])?;
        scan.add(v, Location::Line(prof.xs[k]));
    }
    let stats = scan.stats();
    Ok(CheckReport::new(
        "profile_first_integral",
        PassRule::UpperBound,
        scan.max - scan.min,
        scan.max_at,
        tol,
        stats,
        Provenance::of_profile(prof),
    )
    .note(format!(
        "P ranges over [{:e}, {:e}] along the profile",
        scan.min, scan.max
    )))
}

/// The reduction behind constancy arguments: once the candidate vanishes
/// identically, the equation collapses to the first-order relation
/// `|∇u|² = Ψ(u)` with `Ψ = B⁻¹ ∘ Γ` from the separable form.
///
/// Pre-check: `max |P| ≤ tol` over the window, else
/// [`VerifyError::PNotConstant`]. The deviation `||∇_h u|² − Ψ(u)|` is then
/// compared against `tol · (1 + max |Ψ′|)` — the reduction divides by the
/// slope of `B`, so the tolerance inherits the slope of `Ψ`.
pub fn check_eikonal_reduction(
    spec: &PFunctionSpec,
    u: &Field2,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let samples = solution_samples(&SampledSolution::Plane(u))?;
    let mut flat = Scan::new();
    for sample in &samples {
        flat.add(spec.p.eval(sample.s, sample.tau)?.abs(), sample.at);
    }
    if flat.max > tol {
        return Err(VerifyError::PNotConstant {
            max_abs: flat.max,
            tol,
        });
    }

    let sep = spec.separable.as_ref().ok_or_else(|| {
        VerifyError::BadParams("the eikonal reduction needs a separable candidate".into())
    })?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for sample in &samples {
        lo = lo.min(sample.s);
        hi = hi.max(sample.s);
    }
    // Slope of Ψ over the attained range: Ψ′ = Γ′ / B′(Ψ). Skip probe points
    // where B′ degenerates (flat spots of B carry no slope information).
    let mut max_slope: f64 = 0.0;
    for s in probe_points(lo, hi, 65) {
        let psi = spec.psi(s)?;
        let bp = sep.b.d1(psi)?;
        if bp.abs() > 1e-12 {
            max_slope = max_slope.max((sep.gamma.d1(s)? / bp).abs());
        }
    }
    let scaled_tol = tol * (1.0 + max_slope);

    let mut dev = Scan::new();
    for sample in &samples {
        dev.add((sample.tau - spec.psi(sample.s)?).abs(), sample.at);
    }
    Ok(CheckReport::new(
        "eikonal_reduction",
        PassRule::UpperBound,
        dev.max,
        dev.max_at,
        scaled_tol,
        dev.stats(),
        Provenance::of_field(u),
    )
    .note(format!(
        "flatness pre-check: max |P| = {:e} <= {:e}; tolerance scaled by 1 + max |Psi'| = {}",
        flat.max,
        tol,
        1.0 + max_slope
    )))
}

/// Which constancy/nonexistence statement to test.
pub enum LiouvilleMode<'a> {
    /// Flatness propagation from a zero of `Γ`: over the region where
    /// `Γ(u) ≤ tol`, the solution must stay within `tol` of its value at the
    /// region's `Γ`-minimizer. When no sample triggers the hypothesis the
    /// check passes vacuously and says so.
    GammaZeroPropagation { gamma: &'a Fn1 },
    /// For candidates depending on the gradient alone: reports `sup P` and
    /// `sup |∇u|`; passes iff `sup P ≤ tol`. Consistency evidence for the
    /// constancy conclusion, not a proof.
    GradPFunction { spec: &'a PFunctionSpec },
    /// For `Δu = G(|∇u|²)` with `G(0) ≠ 0`: no constant field can solve the
    /// equation, witnessed by the constant-field residual staying decisively
    /// above `tol`.
    NonexistenceConstantTest { g: &'a Fn1 },
}

/// Constancy and nonexistence gates; see [`LiouvilleMode`] for the three
/// statements and their pass rules.
pub fn check_liouville(
    u: SampledSolution,
    mode: LiouvilleMode,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    match mode {
        LiouvilleMode::GammaZeroPropagation { gamma } => gamma_zero_propagation(u, gamma, tol),
        LiouvilleMode::GradPFunction { spec } => grad_p_constancy(u, spec, tol),
        LiouvilleMode::NonexistenceConstantTest { g } => nonexistence_constant_test(u, g, tol),
    }
}

fn gamma_zero_propagation(
    u: SampledSolution,
    gamma: &Fn1,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let samples = solution_samples(&u)?;
    let mut gscan = Scan::new();
    let mut region: Vec<(f64, Location)> = Vec::new();
    let mut anchor: Option<(f64, f64, Location)> = None; // (gamma value, u value, where)
    for sample in &samples {
        let gv = gamma.eval(sample.s)?;
        gscan.add(gv, sample.at);
        if gv <= tol {
            region.push((sample.s, sample.at));
            if anchor.map_or(true, |(g0, _, _)| gv < g0) {
                anchor = Some((gv, sample.s, sample.at));
            }
        }
    }

    let Some((_, u0, anchor_at)) = anchor else {
        return Ok(CheckReport::new(
            "liouville_gamma_zero",
            PassRule::UpperBound,
            0.0,
            gscan.min_at,
            tol,
            gscan.stats(),
            u.provenance(),
        )
        .note(format!(
            "hypothesis not triggered: min Gamma(u) = {:e} at {} stays above tol = {:e}; \
             nothing to propagate, vacuous pass",
            gscan.min, gscan.min_at, tol
        )));
    };

    let mut flat = Scan::new();
    for (s, at) in &region {
        flat.add((s - u0).abs(), *at);
    }
    Ok(CheckReport::new(
        "liouville_gamma_zero",
        PassRule::UpperBound,
        flat.max,
        flat.max_at,
        tol,
        flat.stats(),
        u.provenance(),
    )
    .note(format!(
        "{} of {} samples lie in the Gamma(u) <= tol region; anchor value {} at {}",
        region.len(),
        samples.len(),
        u0,
        anchor_at
    ))
    .note("bounded-window flatness evidence for the constancy conclusion, not a proof".into()))
}

fn grad_p_constancy(
    u: SampledSolution,
    spec: &PFunctionSpec,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let samples = solution_samples(&u)?;
    // The statement concerns candidates built from the gradient alone; a
    // solution-value dependence means the wrong mode was requested.
    for sample in &samples {
        let ds = spec.p.ds(sample.s, sample.tau)?;
        if ds.abs() > 1e-9 {
            return Err(VerifyError::ModeMismatch {
                mode: "grad_p_function",
                reason: format!(
                    "candidate depends on the solution value: P_s = {ds:e} at {}",
                    sample.at
                ),
            });
        }
    }
    let mut pscan = Scan::new();
    let mut max_tau: f64 = 0.0;
    for sample in &samples {
        pscan.add(spec.p.eval(sample.s, sample.tau)?, sample.at);
        max_tau = max_tau.max(sample.tau);
    }
    Ok(CheckReport::new(
        "liouville_grad_p",
        PassRule::UpperBound,
        pscan.max,
        pscan.max_at,
        tol,
        pscan.stats(),
        u.provenance(),
    )
    .note(format!("sup |grad u| = {:e}", max_tau.sqrt()))
    .note("bounded-window consistency with the constancy conclusion, not a proof".into()))
}

fn nonexistence_constant_test(
    u: SampledSolution,
    g: &Fn1,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let SampledSolution::Plane(field) = u else {
        return Err(VerifyError::ModeMismatch {
            mode: "nonexistence_constant_test",
            reason: "the constant-candidate residual needs a plane field".into(),
        });
    };
    let (i0, i1, j0, j1) = valid_bounds_of(field)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in j0..=j1 {
        for i in i0..=i1 {
            lo = lo.min(field.value(i, j));
            hi = hi.max(field.value(i, j));
        }
    }
    if hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        return Err(VerifyError::ModeMismatch {
            mode: "nonexistence_constant_test",
            reason: format!("candidate field is not constant: values span [{lo}, {hi}]"),
        });
    }

    // Residual of the constant candidate in Δu = G(|∇u|²): the most favorable
    // node still misses the equation by at least the reported amount.
    let lap = laplacian(field)?;
    let (gx, gy) = gradient(field)?;
    let grid = field.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&lap)?;
    let mut scan = Scan::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let tau = gx.value(i, j) * gx.value(i, j) + gy.value(i, j) * gy.value(i, j);
            let r = (lap.value(i, j) - g.eval(tau)?).abs();
            scan.add(r, Location::Plane(grid.x(i), grid.y(j)));
        }
    }
    Ok(CheckReport::new(
        "liouville_nonexistence",
        PassRule::Exceeds,
        scan.min,
        scan.min_at,
        tol,
        scan.stats(),
        u.provenance(),
    )
    .note(format!(
        "constant candidate u = {lo}; equation residual stays >= {:e} at every node, \
         so no constant solves the equation on this window (G(0) = {:e})",
        scan.min,
        g.eval(0.0)?
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::equation::EquationSpec;
    use crate::funcalg::pfunction::{MuKind, Separable};
    use crate::funcalg::{Fn2, Interval, Rect};
    use crate::grid::Grid2;
    use crate::solver::integrate_profile;

    fn rect(s: (f64, f64), t: (f64, f64)) -> Rect {
        Rect::new(
            Interval::new(s.0, s.1).unwrap(),
            Interval::new(t.0, t.1).unwrap(),
        )
    }

    fn modica_spec() -> PFunctionSpec {
        let well = |s: f64| 0.25 * (1.0 - s * s) * (1.0 - s * s);
        let p = Fn2::new(
            rect((-2.0, 2.0), (0.0, 16.0)),
            move |s, t| 0.5 * t - well(s),
            |s, _| s - s * s * s,
            |_, _| 0.5,
            |s, _| 1.0 - 3.0 * s * s,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let b = Fn1::new(Interval::new(0.0, 16.0).unwrap(), |t| 0.5 * t, |_| 0.5, |_| 0.0)
            .unwrap();
        let gamma = Fn1::new(
            Interval::new(-2.0, 2.0).unwrap(),
            well,
            |s| s * s * s - s,
            |s| 3.0 * s * s - 1.0,
        )
        .unwrap();
        PFunctionSpec::new(p, MuKind::PtTimesTSquared, Some(Separable { b, gamma })).unwrap()
    }

    fn kink_profile(lo: f64, hi: f64) -> Profile1 {
        let f = Fn1::new(
            Interval::new(-3.0, 3.0).unwrap(),
            |s| s * s * s - s,
            |s| 3.0 * s * s - 1.0,
            |s| 6.0 * s,
        )
        .unwrap();
        integrate_profile(
            &EquationSpec::Semilinear { f },
            0.0,
            std::f64::consts::FRAC_1_SQRT_2,
            1e-3,
            Interval::new(lo, hi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn kink_first_integral_stays_flat() {
        let prof = kink_profile(-5.0, 5.0);
        let rep = check_profile_first_integral(&modica_spec(), &prof, 1e-8).unwrap();
        assert!(rep.pass, "drift {:e}", rep.worst_residual);
        assert!(rep.worst_residual >= 0.0);
    }

    #[test]
    fn eikonal_reduction_accepts_the_extended_kink() {
        let grid = Grid2::from_extent((-2.0, 2.0), (0.0, 1.0), 65, 17).unwrap();
        let u = Field2::from_fn(grid, |x, _| (x / std::f64::consts::SQRT_2).tanh()).unwrap();
        let rep = check_eikonal_reduction(&modica_spec(), &u, 1e-3).unwrap();
        assert!(
            rep.pass,
            "worst {:e} vs tol {:e}",
            rep.worst_residual, rep.tolerance
        );
        assert!(rep.tolerance > 1e-3, "tolerance must carry the Psi slope");
    }

    #[test]
    fn eikonal_reduction_is_exact_on_a_linear_ramp() {
        // P = t − 1 with B(t) = t, Γ ≡ 1: on u = x the field vanishes exactly
        // and Ψ ≡ 1 matches the squared gradient exactly.
        let p = Fn2::new(
            rect((-16.0, 16.0), (0.0, 16.0)),
            |_, t| t - 1.0,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let b = Fn1::new(Interval::new(0.0, 16.0).unwrap(), |t| t, |_| 1.0, |_| 0.0).unwrap();
        let gamma = Fn1::new(Interval::new(-16.0, 16.0).unwrap(), |_| 1.0, |_| 0.0, |_| 0.0)
            .unwrap();
        let spec =
            PFunctionSpec::new(p, MuKind::PtTimesTSquared, Some(Separable { b, gamma }))
                .unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |x, _| x).unwrap();
        let rep = check_eikonal_reduction(&spec, &u, 1e-12).unwrap();
        assert!(rep.pass);
        assert!(rep.worst_residual <= 1e-12);
    }

    #[test]
    fn non_constant_candidate_field_is_rejected_before_the_reduction() {
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |x, y| x * x + y * y).unwrap();
        let err = check_eikonal_reduction(&modica_spec(), &u, 1e-10).unwrap_err();
        match err {
            VerifyError::PNotConstant { max_abs, .. } => assert!(max_abs > 1e-10),
            other => panic!("expected PNotConstant, got {other}"),
        }
    }

    #[test]
    fn gamma_zero_propagation_passes_trivially_on_a_constant_field() {
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |_, _| 3.0).unwrap();
        let gamma = Fn1::new(
            Interval::new(0.0, 6.0).unwrap(),
            |s| (s - 3.0) * (s - 3.0),
            |s| 2.0 * (s - 3.0),
            |_| 2.0,
        )
        .unwrap();
        let rep = check_liouville(
            SampledSolution::Plane(&u),
            LiouvilleMode::GammaZeroPropagation { gamma: &gamma },
            1e-10,
        )
        .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_residual, 0.0);
        assert!(rep.notes[0].contains("samples lie in"));
    }

    #[test]
    fn kink_never_triggers_the_gamma_zero_hypothesis() {
        // Γ = 2W vanishes only at u = ±1, which the connecting profile never
        // attains on a finite window: the check must say so and pass vacuously.
        let prof = kink_profile(-5.0, 5.0);
        let gamma = Fn1::new(
            Interval::new(-2.0, 2.0).unwrap(),
            |s| 0.5 * (1.0 - s * s) * (1.0 - s * s),
            |s| 2.0 * (s * s * s - s),
            |s| 6.0 * s * s - 2.0,
        )
        .unwrap();
        let rep = check_liouville(
            SampledSolution::Line(&prof),
            LiouvilleMode::GammaZeroPropagation { gamma: &gamma },
            1e-9,
        )
        .unwrap();
        assert!(rep.pass);
        assert!(rep.notes[0].contains("hypothesis not triggered"));
    }

    #[test]
    fn gradient_candidate_mode_reports_and_passes_on_a_constant_field() {
        let p = Fn2::new(
            rect((-16.0, 16.0), (0.0, 16.0)),
            |_, t| t,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let spec = PFunctionSpec::new(p, MuKind::PtTimesTSquared, None).unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |_, _| 1.0).unwrap();
        let rep = check_liouville(
            SampledSolution::Plane(&u),
            LiouvilleMode::GradPFunction { spec: &spec },
            1e-12,
        )
        .unwrap();
        assert!(rep.pass);
        assert!(rep.notes[0].starts_with("sup |grad u|"));
    }

    #[test]
    fn value_dependent_candidate_is_a_mode_mismatch_for_the_gradient_mode() {
        let p = Fn2::new(
            rect((-16.0, 16.0), (0.0, 16.0)),
            |s, t| t - s,
            |_, _| -1.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let spec = PFunctionSpec::new(p, MuKind::PtTimesTSquared, None).unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 9, 9).unwrap();
        let u = Field2::from_fn(grid, |_, _| 1.0).unwrap();
        let err = check_liouville(
            SampledSolution::Plane(&u),
            LiouvilleMode::GradPFunction { spec: &spec },
            1e-12,
        )
        .unwrap_err();
        assert!(matches!(err, VerifyError::ModeMismatch { mode: "grad_p_function", .. }));
    }

    #[test]
    fn unit_forcing_excludes_constant_solutions() {
        let g = Fn1::new(Interval::new(0.0, 16.0).unwrap(), |_| 1.0, |_| 0.0, |_| 0.0)
            .unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |_, _| 0.7).unwrap();
        let rep = check_liouville(
            SampledSolution::Plane(&u),
            LiouvilleMode::NonexistenceConstantTest { g: &g },
            1e-6,
        )
        .unwrap();
        assert!(rep.pass);
        assert!((rep.worst_residual - 1.0).abs() < 1e-12);
        assert_eq!(rep.rule, PassRule::Exceeds);
    }

    #[test]
    fn nonexistence_mode_rejects_non_constant_candidates_and_profiles() {
        let g = Fn1::new(Interval::new(0.0, 16.0).unwrap(), |_| 1.0, |_| 0.0, |_| 0.0)
            .unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let ramp = Field2::from_fn(grid, |x, _| x).unwrap();
        let err = check_liouville(
            SampledSolution::Plane(&ramp),
            LiouvilleMode::NonexistenceConstantTest { g: &g },
            1e-6,
        )
        .unwrap_err();
        assert!(matches!(err, VerifyError::ModeMismatch { .. }));

        let prof = kink_profile(-1.0, 1.0);
        let err = check_liouville(
            SampledSolution::Line(&prof),
            LiouvilleMode::NonexistenceConstantTest { g: &g },
            1e-6,
        )
        .unwrap_err();
        assert!(matches!(err, VerifyError::ModeMismatch { .. }));
    }
}
