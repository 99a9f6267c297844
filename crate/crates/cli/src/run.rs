//! Job execution: realize each job's source (solve, integrate, or sample),
//! run its checks, and write one JSON report per job plus any requested CSV
//! field dumps. Everything runs on the calling thread and all file writes
//! happen here, so reruns of the same config are byte-identical apart from
//! the wall-time line.

use std::path::Path;
use std::time::Instant;

use pfunc_core::funcalg::equation::EquationSpec;
use pfunc_core::funcalg::{Fn1, Fn2, Interval, Rect};
use pfunc_core::grid::{Field2, Grid2, Profile1};
use pfunc_core::higher;
use pfunc_core::report::CheckReport;
use pfunc_core::solver::{
    integrate_profile, solve_divergence_form, solve_gradient_semilinear, NewtonOpts,
    SolverTelemetry,
};
use pfunc_core::verify::{self, LiouvilleMode, SampledSolution};
use serde::Serialize;

use crate::config::{SourcePlan, ValidatedJob};
use crate::registry::DefaultTol;
use crate::CliError;

/// Squared-gradient range used when lifting a value-only right-hand side to
/// the `(value, squared gradient)` slot convention, and as the domain of
/// internally built coefficient handles. Generous for every shipped job.
const T_RANGE: (f64, f64) = (0.0, 16.0);

/// The realized candidate a job's checks run against.
pub enum Source {
    Plane {
        u: Field2,
        equation: Option<EquationSpec>,
        candidate_pair: Option<(Fn1, Fn1)>,
        telemetry: Option<SolverTelemetry>,
    },
    Line(Profile1),
}

/// One entry of a report's `checks` array: either the full record from the
/// op, or the error that kept the op from producing one.
#[derive(Serialize)]
#[serde(untagged)]
pub enum ReportedCheck {
    Ok(CheckReport),
    Err {
        id: String,
        pass: bool,
        error: String,
    },
}

impl ReportedCheck {
    fn passed(&self) -> bool {
        match self {
            ReportedCheck::Ok(r) => r.pass,
            ReportedCheck::Err { .. } => false,
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JobReport<'a> {
    schema: &'static str,
    job_id: &'a str,
    equation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pfunction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver_telemetry: Option<&'a SolverTelemetry>,
    checks: &'a [ReportedCheck],
    wall_time_ms: u128,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ErrorReport<'a> {
    schema: &'static str,
    job_id: &'a str,
    error: &'a str,
    wall_time_ms: u128,
}

const SCHEMA: &str = "pfunc-report/1";

/// Runs every validated job, writing reports as it goes. Returns whether all
/// sources realized and all checks passed.
pub fn run_all(jobs: &[ValidatedJob]) -> Result<bool, CliError> {
    let mut all_passed = true;
    for job in jobs {
        let started = Instant::now();
        match realize_source(job) {
            Err(error) => {
                all_passed = false;
                let report = ErrorReport {
                    schema: SCHEMA,
                    job_id: &job.cfg.job_id,
                    error: &error,
                    wall_time_ms: started.elapsed().as_millis(),
                };
                write_json(&job.cfg.outputs.report_path, &report)?;
            }
            Ok(source) => {
                let mut checks = Vec::with_capacity(job.checks.len());
                let mut dumps: Vec<(String, Field2)> = Vec::new();
                for planned in &job.checks {
                    match dispatch_check(job, &source, planned) {
                        Ok((mut report, field)) => {
                            report.provenance.equation = Some(job.cfg.equation.clone());
                            if planned.entry.needs_pfunction {
                                report.provenance.pfunction = job.cfg.pfunction.clone();
                            }
                            if let Some(f) = field {
                                dumps.push((planned.entry.id.to_owned(), f));
                            }
                            checks.push(ReportedCheck::Ok(report));
                        }
                        Err(error) => {
                            checks.push(ReportedCheck::Err {
                                id: planned.entry.id.to_owned(),
                                pass: false,
                                error,
                            });
                        }
                    }
                }
                all_passed &= checks.iter().all(|c| c.passed());
                if let Some(dir) = &job.cfg.outputs.field_dump_dir {
                    if let Source::Plane { u, .. } = &source {
                        write_csv(&dir.join(format!("{}_solution.csv", job.cfg.job_id)), u)?;
                    }
                    for (check_id, f) in &dumps {
                        write_csv(&dir.join(format!("{}_{check_id}.csv", job.cfg.job_id)), f)?;
                    }
                }
                let report = JobReport {
                    schema: SCHEMA,
                    job_id: &job.cfg.job_id,
                    equation: source_label(job),
                    pfunction: job
                        .pfunction
                        .as_ref()
                        .map(|p| format!("{}: {}", p.id, p.describe)),
                    solver_telemetry: match &source {
                        Source::Plane { telemetry, .. } => telemetry.as_ref(),
                        Source::Line(_) => None,
                    },
                    checks: &checks,
                    wall_time_ms: started.elapsed().as_millis(),
                };
                write_json(&job.cfg.outputs.report_path, &report)?;
            }
        }
    }
    Ok(all_passed)
}

/// Re-runs a single job's single check and writes the resulting field to
/// `out_dir` as CSV. Used by `dump-field`.
pub fn dump_one(jobs: &[ValidatedJob], job_id: &str, check_id: &str, out_dir: &Path) -> Result<(), CliError> {
    let job = jobs
        .iter()
        .find(|j| j.cfg.job_id == job_id)
        .ok_or_else(|| CliError::Usage(format!("no job {job_id:?} in the config")))?;
    let planned = job
        .checks
        .iter()
        .find(|c| c.entry.id == check_id)
        .ok_or_else(|| CliError::Usage(format!("job {job_id:?} does not run check {check_id:?}")))?;
    if !planned.entry.dumps_field {
        return Err(CliError::Usage(format!(
            "check {check_id:?} does not produce a plane field"
        )));
    }
    let source = realize_source(job).map_err(CliError::Usage)?;
    let (_, field) = dispatch_check(job, &source, planned).map_err(CliError::Usage)?;
    let field = field.ok_or_else(|| {
        CliError::Usage(format!("check {check_id:?} produced no field on this job"))
    })?;
    if let Source::Plane { u, .. } = &source {
        write_csv(&out_dir.join(format!("{job_id}_solution.csv")), u)?;
    }
    write_csv(&out_dir.join(format!("{job_id}_{check_id}.csv")), &field)?;
    Ok(())
}

fn source_label(job: &ValidatedJob) -> String {
    match &job.source {
        SourcePlan::Solve(e) | SourcePlan::Profile(e) => format!("{}: {}", e.id, e.describe),
        SourcePlan::Fixture(f) => format!("{}: {}", f.id(), f.describe()),
    }
}

/// Builds the job's field or profile. Errors come back as display strings:
/// they are recorded in the report, not fatal to the run.
fn realize_source(job: &ValidatedJob) -> Result<Source, String> {
    let g = &job.cfg.grid;
    match &job.source {
        SourcePlan::Profile(entry) => {
            let [lo, hi] = g.window.expect("validated profile grid");
            let span = Interval::new(lo, hi).map_err(|e| e.to_string())?;
            let prof = integrate_profile(
                &entry.spec,
                g.u0.expect("validated"),
                g.v0.expect("validated"),
                g.h.expect("validated"),
                span,
            )
            .map_err(|e| e.to_string())?;
            Ok(Source::Line(prof))
        }
        SourcePlan::Fixture(entry) => {
            let u = entry
                .build(g.nx.expect("validated"), g.ny.expect("validated"))
                .map_err(|e| e.to_string())?;
            Ok(Source::Plane {
                u,
                equation: entry.equation().cloned(),
                candidate_pair: entry.candidate_pair().cloned(),
                telemetry: None,
            })
        }
        SourcePlan::Solve(entry) => {
            let [xlo, xhi] = g.x.expect("validated");
            let [ylo, yhi] = g.y.expect("validated");
            let grid = Grid2::from_extent(
                (xlo, xhi),
                (ylo, yhi),
                g.nx.expect("validated"),
                g.ny.expect("validated"),
            )
            .map_err(|e| e.to_string())?;
            let mut opts = NewtonOpts::default();
            let mut boundary = 0.0;
            if let Some(s) = &job.cfg.solver {
                if let Some(v) = s.max_iter {
                    opts.max_iter = v;
                }
                if let Some(v) = s.residual_tol {
                    opts.residual_tol = v;
                }
                if let Some(v) = s.damping_halvings {
                    opts.damping_halvings = v;
                }
                if let Some(v) = s.boundary {
                    boundary = v;
                }
            }
            let bc = move |_: f64, _: f64| boundary;
            let solution = match &entry.spec {
                EquationSpec::DivergenceForm {
                    phi,
                    rho,
                    potential,
                } => solve_divergence_form(phi, rho, potential, grid, bc, &opts),
                spec => {
                    let t_domain =
                        Interval::new(T_RANGE.0, T_RANGE.1).map_err(|e| e.to_string())?;
                    let f = spec
                        .gradient_rhs(t_domain)
                        .map_err(|e| e.to_string())?
                        .expect("validated second-order source");
                    solve_gradient_semilinear(&f, grid, bc, &opts)
                }
            }
            .map_err(|e| e.to_string())?;
            Ok(Source::Plane {
                u: solution.u,
                equation: Some(entry.spec.clone()),
                candidate_pair: None,
                telemetry: Some(solution.telemetry),
            })
        }
    }
}

fn grid_budget(u: &Field2) -> f64 {
    let g = u.grid();
    let h = g.hx().max(g.hy());
    verify::GRID_RESIDUAL_FACTOR * h * h
}

/// Runs one check against the realized source. Returns the report plus the
/// check's plane field when it has one worth dumping.
fn dispatch_check(
    job: &ValidatedJob,
    source: &Source,
    planned: &crate::config::PlannedCheck,
) -> Result<(CheckReport, Option<Field2>), String> {
    let tol_fixed = |fallback: f64| planned.tol_override.unwrap_or(fallback);
    let plane = || match source {
        Source::Plane { u, .. } => Ok(u),
        Source::Line(_) => Err("check needs a plane field".to_owned()),
    };
    let line = || match source {
        Source::Line(p) => Ok(p),
        Source::Plane { .. } => Err("check needs a profile".to_owned()),
    };
    let sampled = || match source {
        Source::Plane { u, .. } => SampledSolution::Plane(u),
        Source::Line(p) => SampledSolution::Line(p),
    };
    let equation = || match source {
        Source::Plane { equation, .. } => equation
            .as_ref()
            .ok_or_else(|| "source carries no equation".to_owned()),
        Source::Line(_) => Err("check needs a plane field".to_owned()),
    };
    let pf = || {
        job.pfunction
            .as_ref()
            .map(|p| &p.spec)
            .ok_or_else(|| "job has no pfunction".to_owned())
    };
    let err = |e: &dyn std::fmt::Display| e.to_string();

    match planned.entry.id {
        "biharmonic_subsolution" => {
            let u = plane()?;
            let c = match equation()? {
                EquationSpec::BiharmonicSub { c } => *c,
                other => return Err(format!("expected a BiharmonicSub source, got {other:?}")),
            };
            let base = match planned.entry.default_tol {
                DefaultTol::FromGrid => tol_fixed(grid_budget(u)),
                _ => unreachable!("registry pins FromGrid"),
            };
            let (f, r) = higher::residual_biharmonic_sub(c, u, base).map_err(|e| err(&e))?;
            Ok((r, Some(f)))
        }
        "boundary_max_principle" => {
            let u = plane()?;
            let pfield = verify::eval_p_field(pf()?, u).map_err(|e| err(&e))?;
            let scale = pfield
                .valid_bounds()
                .map(|(i0, i1, j0, j1)| {
                    let mut m = 0.0f64;
                    for j in j0..=j1 {
                        for i in i0..=i1 {
                            m = m.max(pfield.value(i, j).abs());
                        }
                    }
                    m
                })
                .unwrap_or(0.0);
            let tol = tol_fixed(grid_budget(u) * (1.0 + scale));
            let r = verify::check_boundary_max_principle(&pfield, tol).map_err(|e| err(&e))?;
            Ok((r, Some(pfield)))
        }
        "eikonal_reduction" => {
            let u = plane()?;
            let r = verify::check_eikonal_reduction(pf()?, u, tol_fixed(1e-3))
                .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "fourth_order_inequality" => {
            let u = plane()?;
            let (a, b) = match equation()? {
                EquationSpec::FourthOrderQuasilinear { a, b } => (a.clone(), b.clone()),
                other => {
                    return Err(format!(
                        "expected a FourthOrderQuasilinear source, got {other:?}"
                    ))
                }
            };
            let (of_lap, of_val) = candidate_pair(source)?;
            let base = tol_fixed(grid_budget(u));
            let (f, r) = higher::residual_fourth_order(&a, &b, of_lap, of_val, u, base)
                .map_err(|e| err(&e))?;
            Ok((r, Some(f)))
        }
        "gradient_bound" => {
            let r = verify::check_gradient_bound(pf()?, sampled(), tol_fixed(1e-10))
                .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "hessian_identity" => {
            let u = plane()?;
            let f3 = match equation()? {
                EquationSpec::HessianBalance { f3 } => f3.clone(),
                other => return Err(format!("expected a HessianBalance source, got {other:?}")),
            };
            let (f, r) =
                higher::residual_hessian_equation(&f3, u, tol_fixed(1e-10)).map_err(|e| err(&e))?;
            Ok((r, Some(f)))
        }
        "laplacian_bound" => {
            let u = plane()?;
            let (of_lap, of_val) = candidate_pair(source)?;
            let r = higher::check_laplacian_bound(of_lap, of_val, u, tol_fixed(1e-6))
                .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "liouville_gamma_zero" => {
            let spec = pf()?;
            let sep = spec
                .separable
                .as_ref()
                .ok_or_else(|| "candidate has no separable form".to_owned())?;
            let r = verify::check_liouville(
                sampled(),
                LiouvilleMode::GammaZeroPropagation { gamma: &sep.gamma },
                tol_fixed(1e-8),
            )
            .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "liouville_grad_p" => {
            let r = verify::check_liouville(
                sampled(),
                LiouvilleMode::GradPFunction { spec: pf()? },
                tol_fixed(1e-8),
            )
            .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "liouville_nonexistence" => {
            let u = plane()?;
            let t_domain = Interval::new(T_RANGE.0, T_RANGE.1).map_err(|e| err(&e))?;
            // The pinned unit source: constant fields satisfy lap u = 0, so
            // any G bounded away from zero rules them out. G = 1 keeps the
            // expected residual exactly 1 at every node.
            let g = Fn1::new(t_domain, |_| 1.0, |_| 0.0, |_| 0.0).map_err(|e| err(&e))?;
            let r = verify::check_liouville(
                SampledSolution::Plane(u),
                LiouvilleMode::NonexistenceConstantTest { g: &g },
                tol_fixed(1e-6),
            )
            .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "main_inequality" => {
            let u = plane()?;
            let t_domain = Interval::new(T_RANGE.0, T_RANGE.1).map_err(|e| err(&e))?;
            let f = equation()?
                .gradient_rhs(t_domain)
                .map_err(|e| err(&e))?
                .ok_or_else(|| "source is not a gradient-semilinear equation".to_owned())?;
            let (field, r) =
                verify::residual_main_inequality(&pf()?.p, &f, u).map_err(|e| err(&e))?;
            Ok((r, Some(field)))
        }
        "mean_value_monotonicity" => {
            let u = plane()?;
            let r =
                verify::check_mean_value_monotonicity(u, (0.0, 0.0), &verify::BALL_RADII, tol_fixed(1e-3))
                    .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "monge_ampere" => {
            let u = plane()?;
            let dom = Rect::new(
                Interval::new(-8.0, 8.0).map_err(|e| err(&e))?,
                Interval::new(-8.0, 8.0).map_err(|e| err(&e))?,
            );
            let weight = Fn2::new(
                dom,
                |p, q| p * p + q * q,
                |p, _| 2.0 * p,
                |_, q| 2.0 * q,
                |_, _| 2.0,
                |_, _| 0.0,
                |_, _| 2.0,
            )
            .map_err(|e| err(&e))?;
            let r = verify::check_monge_ampere(u, &weight, tol_fixed(1e-3)).map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "order_reduction" => {
            let u = plane()?;
            let (f, r) = higher::check_order_reduction(u, tol_fixed(1e-12)).map_err(|e| err(&e))?;
            Ok((r, Some(f)))
        }
        "pointwise_bound" => {
            let u = plane()?;
            let r = higher::check_pointwise_bound(u, tol_fixed(1e-9)).map_err(|e| err(&e))?;
            Ok((r, None))
        }
        "profile_first_integral" => {
            let r = verify::check_profile_first_integral(pf()?, line()?, tol_fixed(1e-8))
                .map_err(|e| err(&e))?;
            Ok((r, None))
        }
        other => Err(format!("no dispatch for check {other:?}")),
    }
}

fn candidate_pair(source: &Source) -> Result<(&Fn1, &Fn1), String> {
    match source {
        Source::Plane {
            candidate_pair: Some((a, b)),
            ..
        } => Ok((a, b)),
        _ => Err("source ships no (A, B) candidate ingredients".to_owned()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Row-major CSV over the field's valid region: header `x,y,value`, LF line
/// endings, shortest-round-trip float formatting.
fn write_csv(path: &Path, f: &Field2) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    let g = f.grid();
    let mut out = String::from("x,y,value\n");
    if let Some((i0, i1, j0, j1)) = f.valid_bounds() {
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.push_str(&format!("{},{},{}\n", g.x(i), g.y(j), f.value(i, j)));
            }
        }
    }
    std::fs::write(path, out).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
