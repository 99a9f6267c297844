//! Named inequality and residual checks over solved fields and profiles.
//!
//! Each check turns one maximum-principle or gradient-bound statement into a
//! concrete scan of a discrete quantity, reported as a [`CheckReport`]. Checks
//! verify their own hypotheses first and refuse to run (with a typed error)
//! when a hypothesis fails — a deliberately broken candidate must surface as
//! "hypothesis violated", never as a pass/fail verdict on the conclusion.
//!
//! Discrete derivatives of a candidate field `P(u, |∇u|²)` are taken by
//! differencing the evaluated field (outer differencing): that is the
//! quantity the discrete maximum principle actually governs. The chain-rule
//! route is exposed separately as a cross-check; the two agree to O(h²) on
//! smooth data.
//!
//! Statements about entire solutions are checked on bounded windows —
//! closed-form entire solutions restricted to a window, or solved
//! boundary-value problems as stand-ins. Reports say so in their notes:
//! these runs are consistency evidence, not proofs.

mod maxprinciple;
mod meanvalue;
mod profile;

use thiserror::Error;

use crate::funcalg::{Fn2, FuncError};
use crate::grid::{gradient, hessian, Field2, GridError, Profile1};
use crate::report::{Location, Provenance, Scan};
use crate::solver::SolverError;

pub use maxprinciple::{
    check_boundary_max_principle, check_gradient_bound, residual_main_inequality,
};
pub use meanvalue::{check_mean_value_monotonicity, check_monge_ampere, BALL_RADII, DRIFT_FLOOR};
pub use profile::{check_eikonal_reduction, check_liouville, check_profile_first_integral,
    LiouvilleMode};

/// A field counts as a discrete solution when its equation residual stays
/// below this; checks that presuppose a solution test it first.
pub const EQUATION_TOL: f64 = 1e-8;

/// Grid-scaled tolerance factor: default tolerance for one-sided residual
/// checks is `GRID_RESIDUAL_FACTOR · h² · (1 + max local term magnitude)`.
pub const GRID_RESIDUAL_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// The field does not satisfy the equation the check presupposes.
    #[error("not a discrete solution: equation residual {residual:e} at ({x}, {y})")]
    NotASolution { residual: f64, x: f64, y: f64 },
    /// A hypothesis of the underlying statement fails on the given data; the
    /// check refuses to judge the conclusion.
    #[error("hypothesis violated: {hypothesis} (value {value:e} at {at})")]
    HypothesisFail {
        hypothesis: String,
        at: String,
        value: f64,
    },
    /// The eikonal reduction needs `P ≡ 0`; the candidate field is not flat.
    #[error("P-field is not constant: max |P| = {max_abs:e} exceeds {tol:e}")]
    PNotConstant { max_abs: f64, tol: f64 },
    /// The requested constancy mode cannot run on the given input.
    #[error("mode {mode} cannot run: {reason}")]
    ModeMismatch {
        mode: &'static str,
        reason: String,
    },
    /// Mean-value monotonicity applies to subharmonic data only.
    #[error("not subharmonic: discrete Laplacian {value:e} at ({x}, {y})")]
    NotSubharmonic { x: f64, y: f64, value: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// A solution sampled on a plane grid or along a one-dimensional profile.
/// Checks that are meaningful in both geometries take this.
#[derive(Clone, Copy)]
pub enum SampledSolution<'a> {
    Plane(&'a Field2),
    Line(&'a Profile1),
}

impl<'a> SampledSolution<'a> {
    pub(crate) fn provenance(&self) -> Provenance {
        match self {
            SampledSolution::Plane(f) => Provenance::of_field(f),
            SampledSolution::Line(p) => Provenance::of_profile(p),
        }
    }
}

/// One sample of a solution: value, squared gradient, and where it sits.
pub(crate) struct SolutionSample {
    pub s: f64,
    pub tau: f64,
    pub at: Location,
}

/// Flattens either geometry into `(u, |∇u|², location)` samples. Plane fields
/// contribute their gradient's valid region; profiles contribute every node.
pub(crate) fn solution_samples(u: &SampledSolution) -> Result<Vec<SolutionSample>, VerifyError> {
    match u {
        SampledSolution::Plane(f) => {
            let (gx, gy) = gradient(f)?;
            let g = f.grid();
            let (i0, i1, j0, j1) = valid_bounds_of(&gx)?;
            let mut out = Vec::with_capacity((i1 - i0 + 1) * (j1 - j0 + 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let (ax, ay) = (gx.value(i, j), gy.value(i, j));
                    out.push(SolutionSample {
                        s: f.value(i, j),
                        tau: ax * ax + ay * ay,
                        at: Location::Plane(g.x(i), g.y(j)),
                    });
                }
            }
            Ok(out)
        }
        SampledSolution::Line(p) => Ok((0..p.len())
            .map(|k| SolutionSample {
                s: p.u[k],
                tau: p.du[k] * p.du[k],
                at: Location::Line(p.xs[k]),
            })
            .collect()),
    }
}

pub(crate) fn valid_bounds_of(f: &Field2) -> Result<(usize, usize, usize, usize), VerifyError> {
    f.valid_bounds().ok_or_else(|| {
        VerifyError::Grid(GridError::EmptyValidRegion {
            margin: f.margin(),
            nx: f.grid().nx(),
            ny: f.grid().ny(),
        })
    })
}

/// Evenly spaced probe values covering `[lo, hi]`, degenerating to the single
/// point when the interval has no width (constant fields have such ranges).
pub(crate) fn probe_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + k as f64 * step })
        .collect()
}

/// Evaluates the candidate surface on `(u, |∇_h u|²)` over the gradient's
/// valid region. The result carries margin `u.margin() + 1`; nodes outside
/// hold zeros and must not be differenced directly (take one more margin).
pub fn eval_p_field(spec: &crate::funcalg::pfunction::PFunctionSpec, u: &Field2) -> Result<Field2, VerifyError> {
    p_field(&spec.p, u)
}

pub(crate) fn p_field(p: &Fn2, u: &Field2) -> Result<Field2, VerifyError> {
    let (gx, gy) = gradient(u)?;
    let g = u.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&gx)?;
    let mut vals = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let (ax, ay) = (gx.value(i, j), gy.value(i, j));
            vals[g.idx(i, j)] = p.eval(u.value(i, j), ax * ax + ay * ay)?;
        }
    }
    Ok(Field2::derived(g, vals, gx.margin())?)
}

/// Gradient of the evaluated candidate field by the chain rule,
/// `∇P = P_s ∇u + P_t ∇(|∇u|²)`, with `∇(|∇u|²) = 2 (∇²u) ∇u` from the
/// discrete Hessian. Exposed as an independent cross-check of outer
/// differencing; the two routes agree to O(h²) on smooth data.
pub fn p_gradient_chain_rule(p: &Fn2, u: &Field2) -> Result<(Field2, Field2), VerifyError> {
    let (gx, gy) = gradient(u)?;
    let hes = hessian(u)?;
    let g = u.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&hes.xy)?;
    let mut px = vec![0.0; g.len()];
    let mut py = vec![0.0; g.len()];
    let margin = hes.xy.margin();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let (ax, ay) = (gx.value(i, j), gy.value(i, j));
            let s = u.value(i, j);
            let tau = ax * ax + ay * ay;
            let (ps, pt) = (p.ds(s, tau)?, p.dt(s, tau)?);
            let tau_x = 2.0 * (ax * hes.xx.value(i, j) + ay * hes.xy.value(i, j));
            let tau_y = 2.0 * (ax * hes.xy.value(i, j) + ay * hes.yy.value(i, j));
            px[g.idx(i, j)] = ps * ax + pt * tau_x;
            py[g.idx(i, j)] = ps * ay + pt * tau_y;
        }
    }
    Ok((
        Field2::derived(g, px, margin)?,
        Field2::derived(g, py, margin)?,
    ))
}

/// Max-norm equation residual pre-check shared by solution-presupposing
/// checks: errors with the worst offending node when the field is not a
/// discrete solution of `Δu = F(u, |∇u|²)`.
pub(crate) fn require_gradient_semilinear_solution(
    f: &Fn2,
    u: &Field2,
) -> Result<(), VerifyError> {
    let res = crate::solver::residual_gradient_semilinear(f, u)?;
    let g = res.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&res)?;
    let mut scan = Scan::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            scan.add(res.value(i, j).abs(), Location::Plane(g.x(i), g.y(j)));
        }
    }
    if scan.max > EQUATION_TOL {
        let (x, y) = match scan.max_at {
            Location::Plane(x, y) => (x, y),
            Location::Line(x) => (x, 0.0),
        };
        return Err(VerifyError::NotASolution {
            residual: scan.max,
            x,
            y,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::pfunction::{MuKind, PFunctionSpec};
    use crate::funcalg::{Interval, Rect};
    use crate::grid::Grid2;

    fn p_of_t() -> Fn2 {
        let dom = Rect::new(
            Interval::new(-16.0, 16.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        );
        Fn2::new(
            dom,
            |_, t| t,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap()
    }

    #[test]
    fn p_equals_t_reproduces_the_squared_gradient() {
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |x, _| x).unwrap();
        let spec = PFunctionSpec::new(p_of_t(), MuKind::PtTimesTSquared, None).unwrap();
        let pf = eval_p_field(&spec, &u).unwrap();
        assert_eq!(pf.margin(), 1);
        let (i0, i1, j0, j1) = pf.valid_bounds().unwrap();
        for j in j0..=j1 {
            for i in i0..=i1 {
                assert!((pf.value(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_candidate_field_keeps_its_sign() {
        // Candidate t − s on a field with |∇u|² < u everywhere.
        let dom = Rect::new(
            Interval::new(0.0, 16.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        );
        let p = Fn2::new(
            dom,
            |s, t| t - s,
            |_, _| -1.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 17, 17).unwrap();
        let u = Field2::from_fn(grid, |x, _| 4.0 + 0.5 * x).unwrap();
        let pf = p_field(&p, &u).unwrap();
        let (i0, i1, j0, j1) = pf.valid_bounds().unwrap();
        for j in j0..=j1 {
            for i in i0..=i1 {
                assert!(pf.value(i, j) < 0.0);
            }
        }
    }

    #[test]
    fn chain_rule_gradient_agrees_with_outer_differencing_at_second_order() {
        let p = {
            let dom = Rect::new(
                Interval::new(-16.0, 16.0).unwrap(),
                Interval::new(0.0, 64.0).unwrap(),
            );
            Fn2::new(
                dom,
                |s, t| 0.5 * t - s * s,
                |s, _| -2.0 * s,
                |_, _| 0.5,
                |_, _| -2.0,
                |_, _| 0.0,
                |_, _| 0.0,
            )
            .unwrap()
        };
        let dev = |n: usize| -> f64 {
            let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), n, n).unwrap();
            let u = Field2::from_fn(grid, |x, y| (x + 0.3 * y).sin()).unwrap();
            let pf = p_field(&p, &u).unwrap();
            let (ox, oy) = gradient(&pf).unwrap();
            let (cx, cy) = p_gradient_chain_rule(&p, &u).unwrap();
            // Compare on the coarser of the two valid regions.
            let (i0, i1, j0, j1) = ox.valid_bounds().unwrap();
            let mut worst: f64 = 0.0;
            for j in (j0 + 1)..j1 {
                for i in (i0 + 1)..i1 {
                    worst = worst
                        .max((ox.value(i, j) - cx.value(i, j)).abs())
                        .max((oy.value(i, j) - cy.value(i, j)).abs());
                }
            }
            worst
        };
        let coarse = dev(33);
        let fine = dev(65);
        assert!(coarse < 1e-2, "chain rule and outer differencing disagree: {coarse}");
        // O(h²): halving h should cut the disagreement by roughly 4; accept 2.5.
        assert!(
            fine < coarse / 2.5,
            "no second-order agreement: coarse {coarse}, fine {fine}"
        );
    }

    #[test]
    fn probe_points_cover_the_interval_and_degenerate_ranges() {
        let pts = probe_points(0.0, 1.0, 5);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[4], 1.0);
        let single = probe_points(3.0, 3.0, 5);
        assert_eq!(single, vec![3.0]);
    }

    #[test]
    fn solution_samples_agree_between_a_profile_and_its_plane_extension() {
        // u(x, y) = sin(x) extended constantly in y: plane samples at fixed y
        // must match the 1D profile samples of sin at the shared abscissas.
        let grid = Grid2::from_extent((0.0, 1.0), (0.0, 1.0), 41, 41).unwrap();
        let u = Field2::from_fn(grid, |x, _| x.sin()).unwrap();
        let plane = solution_samples(&SampledSolution::Plane(&u)).unwrap();
        let h = 0.025;
        let xs: Vec<f64> = (0..41).map(|k| k as f64 * h).collect();
        let us: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let dus: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let prof = Profile1::new(h, xs, us, dus).unwrap();
        let line = solution_samples(&SampledSolution::Line(&prof)).unwrap();
        // Central differencing of sin on the plane is O(h²)-close to cos².
        let probe = plane
            .iter()
            .find(|s| matches!(s.at, Location::Plane(x, y) if (x - 0.5).abs() < 1e-12 && (y - 0.5).abs() < 1e-12))
            .unwrap();
        let line_probe = line
            .iter()
            .find(|s| matches!(s.at, Location::Line(x) if (x - 0.5).abs() < 1e-12))
            .unwrap();
        assert!((probe.s - line_probe.s).abs() < 1e-12);
        // τ from central differences carries the h²/3 relative phase error of
        // differencing sin: about 1.6e-4 here.
        assert!((probe.tau - line_probe.tau).abs() < 5e-4);
    }
}
