//! Named fixtures a config can address: equations, candidate P-functions,
//! fields, and the check inventory with default tolerances. Every id is
//! stable and every listing is sorted, so `pfunc list` output and job
//! validation never depend on construction order.

use pfunc_core::funcalg::equation::EquationSpec;
use pfunc_core::funcalg::examples::{
    paper_example, scalar_builtin, CriterionRoute, ExampleId, PaperExample,
};
use pfunc_core::funcalg::pfunction::{MuKind, PFunctionSpec};
use pfunc_core::funcalg::{Fn1, Fn2, FuncError, Interval, Rect};
use pfunc_core::grid::{Field2, Grid2};
use pfunc_core::higher::{manufactured, manufactured_ids, HigherError, Manufactured};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown {kind} id {id:?}")]
    Unknown { kind: &'static str, id: String },
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Higher(#[from] HigherError),
    #[error(transparent)]
    Grid(#[from] pfunc_core::grid::GridError),
}

fn unknown(kind: &'static str, id: &str) -> RegistryError {
    RegistryError::Unknown {
        kind,
        id: id.to_owned(),
    }
}

/// Builds the worked equation/candidate pair behind one `exN` id.
pub fn example_pair(id: &str) -> Result<PaperExample, RegistryError> {
    match id {
        "ex1" => Ok(paper_example(ExampleId::Ex1 {
            f: scalar_builtin("double_well_prime")?,
            offset: 0.25,
        })?),
        "ex2" => {
            // The value domain starts at 0 so the candidate's separable
            // decomposition survives validation: its Gamma vanishes at 0 and
            // turns negative to the left of it.
            let f = Fn1::new(
                Interval::new(0.0, 4.0)?,
                |s| (-s).exp(),
                |s| -(-s).exp(),
                |s| (-s).exp(),
            )?;
            Ok(paper_example(ExampleId::Ex2 { f })?)
        }
        "ex3" => Ok(paper_example(ExampleId::Ex3 {
            k: 1.0,
            lambda: 1.0,
            c: 1.0,
        })?),
        "ex4" => {
            let g = Fn1::new(Interval::new(-4.0, 16.0)?, |z| z + 1.0, |_| 1.0, |_| 0.0)?;
            Ok(paper_example(ExampleId::Ex4 { g })?)
        }
        "ex5" => Ok(paper_example(ExampleId::Ex5 {
            phi: scalar_builtin("phi_quadratic")?,
            rho: scalar_builtin("rho_linear")?,
            potential: scalar_builtin("quarter_double_well")?,
        })?),
        other => Err(unknown("P-function", other)),
    }
}

/// An equation a job can solve or integrate.
pub struct EquationEntry {
    pub id: &'static str,
    pub describe: &'static str,
    pub spec: EquationSpec,
}

pub fn equation_ids() -> &'static [&'static str] {
    &["ex1", "ex2", "ex3", "ex4", "ex5", "exp_growth"]
}

pub fn equation(id: &str) -> Result<EquationEntry, RegistryError> {
    let (canonical, describe) = match id {
        "ex1" => ("ex1", "lap u = f(u), f(s) = s^3 - s (double-well slope)"),
        "ex2" => ("ex2", "lap u = exp(-u), values in [0, 4]"),
        "ex3" => ("ex3", "lap u = u (|grad u|^2 + exp(-u^2))"),
        "ex4" => ("ex4", "lap u = G(|grad u|^2 - u), G(z) = z + 1"),
        "ex5" => (
            "ex5",
            "div(Phi'(|grad u|^2) grad u) = rho(|grad u|^2) F'(u); Phi = t + t^2/2, rho = 1 + t, F = (1 - s^2)^2/4",
        ),
        "exp_growth" => ("exp_growth", "lap u = exp(u)"),
        other => return Err(unknown("equation", other)),
    };
    let spec = if canonical == "exp_growth" {
        EquationSpec::Semilinear {
            f: scalar_builtin("exp")?,
        }
    } else {
        example_pair(canonical)?.equation
    };
    Ok(EquationEntry {
        id: canonical,
        describe,
        spec,
    })
}

/// A candidate P-function a job can pair with its solution.
pub struct PFunctionEntry {
    pub id: &'static str,
    pub describe: &'static str,
    pub spec: PFunctionSpec,
    /// Which criterion route the candidate is claimed under, with the
    /// `(value, gradient-magnitude)` rectangle of the claim. `None` for
    /// control candidates that claim nothing.
    pub route: Option<(CriterionRoute, Option<Rect>)>,
}

/// Ids listed under "p-functions"; each one is built through
/// [`paper_example`] and the registry self-test re-derives it from there.
pub fn pfunction_ids() -> &'static [&'static str] {
    &["ex1", "ex2", "ex3", "ex4", "ex5"]
}

pub fn pfunction(id: &str) -> Result<PFunctionEntry, RegistryError> {
    let describe = match id {
        "ex1" => "P = t/2 - F(s) with F' = f; first integral of the plane reduction",
        "ex2" => "P = t^2/2 - 2 int_0^s (int_0^y sqrt(-f f'))^2 dy; quartic-in-gradient candidate",
        "ex3" => "exponential-weight candidate for the mixed-term equation",
        "ex4" => "P = t - s",
        "ex5" => "P = Q(t) - 2 F(s) with Q'(t) = (Phi' + 2t Phi'')/rho",
        "exp_counterexample" => {
            let rect = Rect::new(Interval::new(-2.0, 2.0)?, Interval::new(0.0, 16.0)?);
            let p = Fn2::new(
                rect,
                |s, t| t / 2.0 - s.exp() + (-s).exp(),
                |s, _| -s.exp() - (-s).exp(),
                |_, _| 0.5,
                |s, _| -s.exp() + (-s).exp(),
                |_, _| 0.0,
                |_, _| 0.0,
            )?;
            return Ok(PFunctionEntry {
                id: "exp_counterexample",
                describe: "control candidate P = t/2 - exp(s) + exp(-s) for lap u = exp(u); \
                           its zero-gradient section turns positive for s < 0, so bound \
                           checks must refuse it",
                spec: PFunctionSpec::new(p, MuKind::PtTimesTSquared, None)?,
                route: None,
            });
        }
        "kink_gradient_cap" => {
            let rect = Rect::new(Interval::new(-2.0, 2.0)?, Interval::new(0.0, 16.0)?);
            let p = Fn2::new(
                rect,
                |_, t| t - 0.5,
                |_, _| 0.0,
                |_, _| 1.0,
                |_, _| 0.0,
                |_, _| 0.0,
                |_, _| 0.0,
            )?;
            return Ok(PFunctionEntry {
                id: "kink_gradient_cap",
                describe: "gradient-only candidate P = t - 1/2; caps the squared slope of \
                           the double-well transition profile at its midpoint value",
                spec: PFunctionSpec::new(p, MuKind::PtTimesTSquared, None)?,
                route: None,
            });
        }
        other => return Err(unknown("P-function", other)),
    };
    let pair = example_pair(id)?;
    Ok(PFunctionEntry {
        id: pfunction_ids()
            .iter()
            .copied()
            .find(|k| *k == id)
            .expect("id matched above"),
        describe,
        spec: pair.pfunction,
        route: Some((pair.route, pair.criterion_rect)),
    })
}

/// A closed-form field fixture, optionally paired with the equation it
/// solves and the `(A, B)` ingredients of its Laplacian candidate.
pub enum FieldEntry {
    Catalog(Manufactured),
    Control {
        id: &'static str,
        describe: &'static str,
        extent: ((f64, f64), (f64, f64)),
        eval: fn(f64, f64) -> f64,
    },
}

impl FieldEntry {
    pub fn id(&self) -> &str {
        match self {
            FieldEntry::Catalog(m) => m.id,
            FieldEntry::Control { id, .. } => id,
        }
    }

    pub fn describe(&self) -> &str {
        match self {
            FieldEntry::Catalog(m) => m.title,
            FieldEntry::Control { describe, .. } => describe,
        }
    }

    pub fn equation(&self) -> Option<&EquationSpec> {
        match self {
            FieldEntry::Catalog(m) => Some(&m.equation),
            FieldEntry::Control { .. } => None,
        }
    }

    pub fn candidate_pair(&self) -> Option<&(Fn1, Fn1)> {
        match self {
            FieldEntry::Catalog(m) => m.laplacian_candidate.as_ref(),
            FieldEntry::Control { .. } => None,
        }
    }

    pub fn build(&self, nx: usize, ny: usize) -> Result<Field2, RegistryError> {
        match self {
            FieldEntry::Catalog(m) => Ok(m.field_on(nx, ny)?),
            FieldEntry::Control { extent, eval, .. } => {
                let grid = Grid2::from_extent(extent.0, extent.1, nx, ny)?;
                Ok(Field2::from_fn(grid, *eval)?)
            }
        }
    }
}

pub fn field_ids() -> Vec<&'static str> {
    let mut ids: Vec<&'static str> = manufactured_ids().to_vec();
    ids.extend(["bump", "flat_zero"]);
    ids.sort_unstable();
    ids
}

pub fn field(id: &str) -> Result<FieldEntry, RegistryError> {
    match id {
        "bump" => Ok(FieldEntry::Control {
            id: "bump",
            describe: "concave bump exp(-(x^2 + y^2)) on [-1,1]^2; control field whose \
                       candidate surfaces peak strictly inside the window",
            extent: ((-1.0, 1.0), (-1.0, 1.0)),
            eval: |x, y| (-(x * x + y * y)).exp(),
        }),
        "flat_zero" => Ok(FieldEntry::Control {
            id: "flat_zero",
            describe: "identically zero field on [-1,1]^2; the constant candidate for the \
                       nonexistence gate",
            extent: ((-1.0, 1.0), (-1.0, 1.0)),
            eval: |_, _| 0.0,
        }),
        other if manufactured_ids().contains(&other) => {
            Ok(FieldEntry::Catalog(manufactured(other)?))
        }
        other => Err(unknown("field", other)),
    }
}

/// Geometry a check runs on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Geometry {
    Plane,
    Line,
    Either,
}

/// Equation family a check needs from its job's source.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyNeed {
    /// `lap u = F(u, |grad u|^2)` in either second-order form.
    GradientRhs,
    FourthOrder,
    HessianBalance,
    BiharmonicSub,
}

/// Where a check's tolerance comes from when the job does not override it.
#[derive(Clone, Copy, Debug)]
pub enum DefaultTol {
    Fixed(f64),
    /// `10 h^2`, the finite-difference consistency budget of the grid. Ops
    /// that scale internally by the attained term magnitude receive this as
    /// their base.
    FromGrid,
    /// The check computes its tolerance itself; overrides are rejected.
    Internal,
}

pub struct CheckEntry {
    pub id: &'static str,
    pub describe: &'static str,
    pub geometry: Geometry,
    pub needs_pfunction: bool,
    pub needs_separable: bool,
    pub needs_family: Option<FamilyNeed>,
    pub needs_candidate_pair: bool,
    pub default_tol: DefaultTol,
    /// Whether the check produces a plane field worth dumping to CSV.
    pub dumps_field: bool,
}

/// The inventory, sorted by id.
pub static CHECKS: &[CheckEntry] = &[
    CheckEntry {
        id: "biharmonic_subsolution",
        describe: "growth identity for P = (lap u)^2 on convex subsolutions of \
                   c |Hes u|^2 - lap^2 u >= 0",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: Some(FamilyNeed::BiharmonicSub),
        needs_candidate_pair: false,
        default_tol: DefaultTol::FromGrid,
        dumps_field: true,
    },
    CheckEntry {
        id: "boundary_max_principle",
        describe: "interior maximum of the candidate field against the window ring",
        geometry: Geometry::Plane,
        needs_pfunction: true,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::FromGrid,
        dumps_field: true,
    },
    CheckEntry {
        id: "eikonal_reduction",
        describe: "where P vanishes, |grad u|^2 must match Psi(u) from the separable form",
        geometry: Geometry::Plane,
        needs_pfunction: true,
        needs_separable: true,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-3),
        dumps_field: false,
    },
    CheckEntry {
        id: "fourth_order_inequality",
        describe: "R = |grad u|^2 lap P - lap u (grad P . grad u) >= 0 for \
                   P = A(lap u) - B(u)",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: Some(FamilyNeed::FourthOrder),
        needs_candidate_pair: true,
        default_tol: DefaultTol::FromGrid,
        dumps_field: true,
    },
    CheckEntry {
        id: "gradient_bound",
        describe: "P(u, |grad u|^2) <= 0 over the window, behind the P(s, 0) <= 0 gate",
        geometry: Geometry::Either,
        needs_pfunction: true,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-10),
        dumps_field: false,
    },
    CheckEntry {
        id: "hessian_identity",
        describe: "lap P = 2 F3 - (lap u)^2 for P = |grad u|^2 - u lap u, with the \
                   subsolution gate",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: Some(FamilyNeed::HessianBalance),
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-10),
        dumps_field: true,
    },
    CheckEntry {
        id: "laplacian_bound",
        describe: "lap u <= A^{-1}(B(u)) for fields monotone in y",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: true,
        default_tol: DefaultTol::Fixed(1e-6),
        dumps_field: false,
    },
    CheckEntry {
        id: "liouville_gamma_zero",
        describe: "flatness propagation over the region where Gamma(u) nearly vanishes",
        geometry: Geometry::Either,
        needs_pfunction: true,
        needs_separable: true,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-8),
        dumps_field: false,
    },
    CheckEntry {
        id: "liouville_grad_p",
        describe: "sup P <= 0 consistency record for gradient candidates",
        geometry: Geometry::Either,
        needs_pfunction: true,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-8),
        dumps_field: false,
    },
    CheckEntry {
        id: "liouville_nonexistence",
        describe: "no constant field solves lap u = G(|grad u|^2) with the unit source \
                   G = 1: the constant-candidate residual must stay decisively positive",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-6),
        dumps_field: false,
    },
    CheckEntry {
        id: "main_inequality",
        describe: "rearranged elliptic inequality for the candidate on solved fields; \
                   tolerance fixed from the grid and field scale",
        geometry: Geometry::Plane,
        needs_pfunction: true,
        needs_separable: false,
        needs_family: Some(FamilyNeed::GradientRhs),
        needs_candidate_pair: false,
        default_tol: DefaultTol::Internal,
        dumps_field: true,
    },
    CheckEntry {
        id: "mean_value_monotonicity",
        describe: "ball averages about the origin grow with radius for subharmonic fields",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-3),
        dumps_field: false,
    },
    CheckEntry {
        id: "monge_ampere",
        describe: "drift identity for w = |grad u|^2 under unit-determinant Hessians, \
                   with a sub-mean-value probe at the center",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-3),
        dumps_field: false,
    },
    CheckEntry {
        id: "order_reduction",
        describe: "P = |grad u|^2 - u lap u is harmonic and constant on the window",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-12),
        dumps_field: true,
    },
    CheckEntry {
        id: "pointwise_bound",
        describe: "max of P on the unit ball against (H1 + L2-Laplacian norms)/pi over \
                   the radius-2 ball",
        geometry: Geometry::Plane,
        needs_pfunction: false,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-9),
        dumps_field: false,
    },
    CheckEntry {
        id: "profile_first_integral",
        describe: "max P - min P along an integrated profile",
        geometry: Geometry::Line,
        needs_pfunction: true,
        needs_separable: false,
        needs_family: None,
        needs_candidate_pair: false,
        default_tol: DefaultTol::Fixed(1e-8),
        dumps_field: false,
    },
];

pub fn check(id: &str) -> Result<&'static CheckEntry, RegistryError> {
    CHECKS
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| unknown("check", id))
}

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// The `pfunc list` text: four sorted sections with one-line descriptions.
pub fn listing() -> String {
    let mut out = String::from("equations:\n");
    for id in equation_ids() {
        let e = equation(id).expect("listed equations build");
        out.push_str(&format!("  {}: {}\n", e.id, e.describe));
    }
    out.push_str("\np-functions:\n");
    for id in pfunction_ids() {
        let p = pfunction(id).expect("listed candidates build");
        out.push_str(&format!("  {}: {}\n", p.id, p.describe));
    }
    out.push_str("\nfixtures and controls:\n");
    let mut rows: Vec<(&'static str, String)> = field_ids()
        .into_iter()
        .map(|id| {
            let f = field(id).expect("listed fields build");
            (id, f.describe().to_owned())
        })
        .collect();
    for id in ["exp_counterexample", "kink_gradient_cap"] {
        let ctl = pfunction(id).expect("control candidates build");
        rows.push((ctl.id, ctl.describe.to_owned()));
    }
    rows.sort_unstable_by_key(|(id, _)| *id);
    for (id, describe) in rows {
        out.push_str(&format!("  {id}: {describe}\n"));
    }
    out.push_str("\nchecks:\n");
    for c in CHECKS {
        out.push_str(&format!("  {}: {}\n", c.id, c.describe));
    }
    out
}
