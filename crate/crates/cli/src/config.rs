//! Job-file schema and upfront validation. A config is parsed and fully
//! cross-checked against the registry before any solve starts, so a typo in
//! job 7 is reported before job 1 burns a minute of Newton iterations.

use std::path::{Path, PathBuf};

use pfunc_core::funcalg::equation::EquationSpec;
use serde::Deserialize;
use thiserror::Error;

use crate::registry::{
    self, CheckEntry, DefaultTol, EquationEntry, FamilyNeed, FieldEntry, Geometry, PFunctionEntry,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate jobId {0:?}")]
    DuplicateJobId(String),
    #[error("job {job:?}: equation {id:?} is neither a registered equation nor a field fixture")]
    UnknownSource { job: String, id: String },
    #[error("job {job:?}: unknown P-function {id:?}")]
    UnknownPFunction { job: String, id: String },
    #[error("job {job:?}: unknown check {id:?}")]
    UnknownCheck { job: String, id: String },
    #[error("job {job:?}, check {check:?}: {message}")]
    CheckMismatch {
        job: String,
        check: String,
        message: String,
    },
    #[error("job {job:?}: {message}")]
    BadJob { job: String, message: String },
}

/// Top-level file: a list of jobs.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub jobs: Vec<JobConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct JobConfig {
    pub job_id: String,
    /// Registered equation id (solve/integrate) or field-fixture id (sample).
    pub equation: String,
    #[serde(default)]
    pub pfunction: Option<String>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    pub grid: GridConfig,
    pub checks: Vec<CheckConfig>,
    pub outputs: OutputsConfig,
}

#[derive(Debug, Deserialize, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub residual_tol: Option<f64>,
    #[serde(default)]
    pub damping_halvings: Option<usize>,
    /// Constant Dirichlet boundary value; defaults to 0.
    #[serde(default)]
    pub boundary: Option<f64>,
}

/// Plane jobs give `x`, `y`, `nx`, `ny` (fixtures: just `nx`, `ny`); line
/// jobs give `window`, `h`, `u0`, `v0`.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub x: Option<[f64; 2]>,
    #[serde(default)]
    pub y: Option<[f64; 2]>,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub u0: Option<f64>,
    #[serde(default)]
    pub v0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CheckConfig {
    pub id: String,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputsConfig {
    pub report_path: PathBuf,
    #[serde(default)]
    pub field_dump_dir: Option<PathBuf>,
}

/// How a validated job obtains its candidate field or profile.
pub enum SourcePlan {
    /// Newton-solve the equation on the requested extent.
    Solve(EquationEntry),
    /// Integrate the plane-profile reduction of the equation.
    Profile(EquationEntry),
    /// Sample a closed-form fixture.
    Fixture(FieldEntry),
}

impl SourcePlan {
    pub fn equation_spec(&self) -> Option<&EquationSpec> {
        match self {
            SourcePlan::Solve(e) | SourcePlan::Profile(e) => Some(&e.spec),
            SourcePlan::Fixture(f) => f.equation(),
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, SourcePlan::Profile(_))
    }
}

pub struct PlannedCheck {
    pub entry: &'static CheckEntry,
    pub tol_override: Option<f64>,
}

pub struct ValidatedJob {
    pub cfg: JobConfig,
    pub source: SourcePlan,
    pub pfunction: Option<PFunctionEntry>,
    pub checks: Vec<PlannedCheck>,
}

pub fn load(path: &Path) -> Result<Vec<ValidatedJob>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(cfg)
}

fn family_of(spec: &EquationSpec) -> Option<FamilyNeed> {
    match spec {
        EquationSpec::Semilinear { .. } | EquationSpec::GradientSemilinear { .. } => {
            Some(FamilyNeed::GradientRhs)
        }
        EquationSpec::FourthOrderQuasilinear { .. } => Some(FamilyNeed::FourthOrder),
        EquationSpec::HessianBalance { .. } => Some(FamilyNeed::HessianBalance),
        EquationSpec::BiharmonicSub { .. } => Some(FamilyNeed::BiharmonicSub),
        _ => None,
    }
}

pub fn validate(cfg: RunConfig) -> Result<Vec<ValidatedJob>, ConfigError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut jobs = Vec::with_capacity(cfg.jobs.len());
    for job in cfg.jobs {
        if !seen.insert(job.job_id.clone()) {
            return Err(ConfigError::DuplicateJobId(job.job_id));
        }
        jobs.push(validate_job(job)?);
    }
    Ok(jobs)
}

fn bad(job: &JobConfig, message: impl Into<String>) -> ConfigError {
    ConfigError::BadJob {
        job: job.job_id.clone(),
        message: message.into(),
    }
}

fn validate_job(job: JobConfig) -> Result<ValidatedJob, ConfigError> {
    let source = plan_source(&job)?;

    let pfunction = match &job.pfunction {
        None => None,
        Some(id) => Some(
            registry::pfunction(id).map_err(|_| ConfigError::UnknownPFunction {
                job: job.job_id.clone(),
                id: id.clone(),
            })?,
        ),
    };

    if job.checks.is_empty() {
        return Err(bad(&job, "at least one check is required"));
    }

    let family = source.equation_spec().and_then(family_of);
    let has_candidate_pair = matches!(&source, SourcePlan::Fixture(f) if f.candidate_pair().is_some());

    let mut checks = Vec::with_capacity(job.checks.len());
    for c in &job.checks {
        let entry = registry::check(&c.id).map_err(|_| ConfigError::UnknownCheck {
            job: job.job_id.clone(),
            id: c.id.clone(),
        })?;
        let mismatch = |message: String| ConfigError::CheckMismatch {
            job: job.job_id.clone(),
            check: c.id.clone(),
            message,
        };
        match entry.geometry {
            Geometry::Plane if source.is_line() => {
                return Err(mismatch("runs on plane fields, but this job integrates a profile".into()));
            }
            Geometry::Line if !source.is_line() => {
                return Err(mismatch("runs on profiles, but this job produces a plane field".into()));
            }
            _ => {}
        }
        if entry.needs_pfunction {
            let pf = pfunction
                .as_ref()
                .ok_or_else(|| mismatch("needs a pfunction on the job".into()))?;
            if entry.needs_separable && pf.spec.separable.is_none() {
                return Err(mismatch(format!(
                    "needs a separable candidate, but {:?} does not decompose",
                    pf.id
                )));
            }
        }
        if let Some(need) = entry.needs_family {
            if family != Some(need) {
                return Err(mismatch(format!(
                    "needs a {:?}-family equation; the job's source is {}",
                    need,
                    match source.equation_spec() {
                        Some(spec) => format!("{spec:?}"),
                        None => "a bare field with no equation".into(),
                    }
                )));
            }
        }
        if entry.needs_candidate_pair && !has_candidate_pair {
            return Err(mismatch(
                "needs a fixture that ships its (A, B) candidate ingredients".into(),
            ));
        }
        if let (DefaultTol::Internal, Some(_)) = (entry.default_tol, c.tol) {
            return Err(mismatch(
                "computes its tolerance from the grid and field scale; tol overrides are not accepted".into(),
            ));
        }
        if let Some(t) = c.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(mismatch(format!("tol must be finite and positive, got {t}")));
            }
        }
        checks.push(PlannedCheck {
            entry,
            tol_override: c.tol,
        });
    }

    Ok(ValidatedJob {
        cfg: job,
        source,
        pfunction,
        checks,
    })
}

fn plan_source(job: &JobConfig) -> Result<SourcePlan, ConfigError> {
    let g = &job.grid;
    let line_keys = [g.window.is_some(), g.h.is_some(), g.u0.is_some(), g.v0.is_some()];
    let plane_keys = [g.x.is_some(), g.y.is_some(), g.nx.is_some(), g.ny.is_some()];

    if line_keys.iter().any(|k| *k) {
        if plane_keys.iter().any(|k| *k) {
            return Err(bad(job, "grid mixes plane keys (x/y/nx/ny) with profile keys (window/h/u0/v0)"));
        }
        if !line_keys.iter().all(|k| *k) {
            return Err(bad(job, "profile grids need all of window, h, u0, v0"));
        }
        let entry = registry::equation(&job.equation).map_err(|_| ConfigError::UnknownSource {
            job: job.job_id.clone(),
            id: job.equation.clone(),
        })?;
        if job.solver.is_some() {
            return Err(bad(job, "profile jobs take no solver block"));
        }
        return Ok(SourcePlan::Profile(entry));
    }

    let (nx, ny) = match (g.nx, g.ny) {
        (Some(nx), Some(ny)) => (nx, ny),
        _ => return Err(bad(job, "plane grids need nx and ny")),
    };
    if nx < 5 || ny < 5 {
        return Err(bad(job, format!("plane grids need nx, ny >= 5, got {nx} x {ny}")));
    }

    if let Ok(entry) = registry::equation(&job.equation) {
        if g.x.is_none() || g.y.is_none() {
            return Err(bad(job, "solved jobs need the x and y extents"));
        }
        for (name, ext) in [("x", g.x.unwrap()), ("y", g.y.unwrap())] {
            if !(ext[0].is_finite() && ext[1].is_finite() && ext[0] < ext[1]) {
                return Err(bad(job, format!("{name} extent must be an increasing finite pair")));
            }
        }
        match entry.spec {
            EquationSpec::Semilinear { .. }
            | EquationSpec::GradientSemilinear { .. }
            | EquationSpec::DivergenceForm { .. } => {}
            _ => {
                return Err(bad(
                    job,
                    format!("equation {:?} has no plane solver; use a field fixture", entry.id),
                ))
            }
        }
        return Ok(SourcePlan::Solve(entry));
    }

    let entry = registry::field(&job.equation).map_err(|_| ConfigError::UnknownSource {
        job: job.job_id.clone(),
        id: job.equation.clone(),
    })?;
    if g.x.is_some() || g.y.is_some() {
        return Err(bad(job, "field fixtures carry their own extent; drop the x and y keys"));
    }
    if job.solver.is_some() {
        return Err(bad(job, "field fixtures are sampled, not solved; drop the solver block"));
    }
    Ok(SourcePlan::Fixture(entry))
}
