//! Fourth-order candidates: P-functions of the Laplacian and of second
//! derivatives, their residual identities, the Laplacian bound, the pointwise
//! ball estimate, the biharmonic subsolution check, and the order-reduction
//! identity — plus a small catalog of manufactured closed-form fields the CLI
//! can address by id.
//!
//! The same refusal policy as [`crate::verify`] applies: when a structural
//! hypothesis fails (the field does not solve its equation, a convexity or
//! sign condition breaks), the check errors instead of reporting a failing
//! pass/fail verdict, because the underlying statements promise nothing off
//! their hypotheses.

use std::sync::Arc;

use thiserror::Error;

use crate::funcalg::equation::{EquationSpec, Fn3};
use crate::funcalg::invert::invert_monotone;
use crate::funcalg::{Fn1, FuncError, Interval};
use crate::grid::{
    biharmonic, grad_laplacian, gradient, hessian, laplacian, Field2, Grid2, GridError,
};
use crate::report::{CheckReport, Location, PassRule, Provenance, Scan};
use crate::verify::GRID_RESIDUAL_FACTOR;

/// Sampled-derivative agreement slack for the `A′ = a`, `B″ = b` pre-checks.
pub const DERIV_AGREEMENT_TOL: f64 = 1e-8;

/// Absolute eigenvalue floor for the sampled convexity pre-check.
const CONVEXITY_FLOOR: f64 = -1e-10;

#[derive(Debug, Error)]
pub enum HigherError {
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(
        "the field does not solve the declared equation: residual {residual:e} at ({x}, {y})"
    )]
    NotASolution { residual: f64, x: f64, y: f64 },
    #[error(
        "the {nx}x{ny} field at margin {margin} cannot afford {needed} stencil rings"
    )]
    MarginTooSmall {
        needed: usize,
        nx: usize,
        ny: usize,
        margin: usize,
    },
    #[error("hypothesis violated: {hypothesis} fails at {at} (value {value:e})")]
    HypothesisFail {
        hypothesis: String,
        at: String,
        value: f64,
    },
    #[error("the field is not convex: Hessian eigenvalue {lambda_min:e} at ({x}, {y})")]
    NotConvex { x: f64, y: f64, lambda_min: f64 },
    #[error("not a subsolution: c|Hes|^2 - lap^2 u = {value:e} at ({x}, {y})")]
    NotSubsolution { x: f64, y: f64, value: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Guards that the field still has a nonempty valid region after `rings`
/// extra stencil applications.
fn margin_guard(u: &Field2, rings: usize) -> Result<(), HigherError> {
    let g = u.grid();
    let need = u.margin() + rings;
    if g.nx() <= 2 * need || g.ny() <= 2 * need {
        return Err(HigherError::MarginTooSmall {
            needed: need,
            nx: g.nx(),
            ny: g.ny(),
            margin: u.margin(),
        });
    }
    Ok(())
}

fn fd_tol(g: &Grid2, scale: f64) -> f64 {
    let h = g.hx().max(g.hy());
    GRID_RESIDUAL_FACTOR * h * h * (1.0 + scale)
}

/// The inequality residual for candidates `P = A(Δu) − B(u)` of the weighted
/// fourth-order family `a(Δu)·[|∇u|²Δ²u − Δu(∇u·∇Δu)] = b(u)|∇u|⁴`.
///
/// Pre-checks, in order: two extra stencil rings must fit
/// ([`HigherError::MarginTooSmall`]); `A′ = a` and `B″ = b` by sampled
/// differentiation on the attained ranges within [`DERIV_AGREEMENT_TOL`]
/// ([`HigherError::HypothesisFail`]); the field solves the equation within
/// `10h²·(1 + term scale)` ([`HigherError::NotASolution`]).
///
/// The check itself is `R = |∇u|²·Δ_hP − Δ_hu·(∇_hP·∇_hu) ≥ −tol·(1+scale)`
/// with `scale` the largest attained term magnitude; the scaled value is the
/// recorded tolerance. Returns the residual field alongside the report.
pub fn residual_fourth_order(
    a: &Fn1,
    b: &Fn1,
    of_laplacian: &Fn1,
    of_value: &Fn1,
    u: &Field2,
    tol: f64,
) -> Result<(Field2, CheckReport), HigherError> {
    margin_guard(u, 2)?;
    let g = u.grid();
    let lap = laplacian(u)?;
    let (gx, gy) = gradient(u)?;
    let bih = biharmonic(u)?;
    let (lx, ly) = grad_laplacian(u)?;
    let (i0, i1, j0, j1) = bih.valid_bounds().expect("guarded margin");

    let (mut wlo, mut whi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in j0..=j1 {
        for i in i0..=i1 {
            wlo = wlo.min(lap.value(i, j));
            whi = whi.max(lap.value(i, j));
            slo = slo.min(u.value(i, j));
            shi = shi.max(u.value(i, j));
        }
    }
    for w in crate::verify::probe_points(wlo, whi, 33) {
        let expect = a.eval(w)?;
        let got = of_laplacian.d1(w)?;
        if (got - expect).abs() > DERIV_AGREEMENT_TOL * (1.0 + expect.abs()) {
            return Err(HigherError::HypothesisFail {
                hypothesis: "A' = a (sampled on the attained Laplacian range)".into(),
                at: format!("w = {w}"),
                value: got - expect,
            });
        }
    }
    for s in crate::verify::probe_points(slo, shi, 33) {
        let expect = b.eval(s)?;
        let got = of_value.d2(s)?;
        if (got - expect).abs() > DERIV_AGREEMENT_TOL * (1.0 + expect.abs()) {
            return Err(HigherError::HypothesisFail {
                hypothesis: "B'' = b (sampled on the attained value range)".into(),
                at: format!("s = {s}"),
                value: got - expect,
            });
        }
    }

    let mut eq = Scan::new();
    let mut eq_scale: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let advect = gx.value(i, j) * lx.value(i, j) + gy.value(i, j) * ly.value(i, j);
            let lhs =
                a.eval(lap.value(i, j))? * (t * bih.value(i, j) - lap.value(i, j) * advect);
            let rhs = b.eval(u.value(i, j))? * t * t;
            eq.add((lhs - rhs).abs(), Location::Plane(g.x(i), g.y(j)));
            eq_scale = eq_scale.max(lhs.abs()).max(rhs.abs());
        }
    }
    if eq.max > fd_tol(&g, eq_scale) {
        let Location::Plane(x, y) = eq.max_at else {
            unreachable!("plane scan")
        };
        return Err(HigherError::NotASolution {
            residual: eq.max,
            x,
            y,
        });
    }

    let (pi0, pi1, pj0, pj1) = lap.valid_bounds().expect("guarded margin");
    let mut pv = vec![0.0; g.len()];
    for j in pj0..=pj1 {
        for i in pi0..=pi1 {
            pv[g.idx(i, j)] = of_laplacian.eval(lap.value(i, j))? - of_value.eval(u.value(i, j))?;
        }
    }
    let p = Field2::derived(g, pv, lap.margin())?;
    let lap_p = laplacian(&p)?;
    let (px, py) = gradient(&p)?;

    let mut res = Scan::new();
    let mut term_scale: f64 = 0.0;
    let mut rv = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let diffusion = t * lap_p.value(i, j);
            let drift = lap.value(i, j)
                * (px.value(i, j) * gx.value(i, j) + py.value(i, j) * gy.value(i, j));
            let r = diffusion - drift;
            rv[g.idx(i, j)] = r;
            res.add(r, Location::Plane(g.x(i), g.y(j)));
            term_scale = term_scale.max(diffusion.abs()).max(drift.abs());
        }
    }
    let rfield = Field2::derived(g, rv, lap_p.margin())?;
    let report = CheckReport::new(
        "fourth_order_inequality",
        PassRule::LowerBound,
        res.min,
        res.min_at,
        tol * (1.0 + term_scale),
        res.stats(),
        Provenance::of_field(u),
    )
    .note(format!(
        "base tolerance {tol:e} scaled by 1 + max term magnitude {term_scale:e}"
    ));
    Ok((rfield, report))
}

/// The Laplacian bound `Δ_hu ≤ A⁻¹(B(u))` for monotone fields.
///
/// Hypotheses (each a [`HigherError::HypothesisFail`]): `B(u) ≥ 0` on the
/// attained value range, `u_y > 0` at every node of the differenced region,
/// and `A` invertible over the attained `B(u)` values.
pub fn check_laplacian_bound(
    of_laplacian: &Fn1,
    of_value: &Fn1,
    u: &Field2,
    tol: f64,
) -> Result<CheckReport, HigherError> {
    margin_guard(u, 1)?;
    let g = u.grid();
    let lap = laplacian(u)?;
    let (_, gy) = gradient(u)?;
    let (i0, i1, j0, j1) = lap.valid_bounds().expect("guarded margin");

    let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in j0..=j1 {
        for i in i0..=i1 {
            slo = slo.min(u.value(i, j));
            shi = shi.max(u.value(i, j));
            let dy = gy.value(i, j);
            if dy <= 0.0 {
                return Err(HigherError::HypothesisFail {
                    hypothesis: "u_y > 0 on the differenced region".into(),
                    at: Location::Plane(g.x(i), g.y(j)).to_string(),
                    value: dy,
                });
            }
        }
    }
    for s in crate::verify::probe_points(slo, shi, 129) {
        let v = of_value.eval(s)?;
        if v < -1e-12 * (1.0 + v.abs()) {
            return Err(HigherError::HypothesisFail {
                hypothesis: "B(u) >= 0 on the attained value range".into(),
                at: format!("s = {s}"),
                value: v,
            });
        }
    }

    let mut dev = Scan::new();
    let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in j0..=j1 {
        for i in i0..=i1 {
            let target = of_value.eval(u.value(i, j))?;
            let gamma = invert_monotone(of_laplacian, target, of_laplacian.domain())
                .map_err(|_| HigherError::HypothesisFail {
                    hypothesis: "A invertible over the attained B(u) values".into(),
                    at: format!("A(t) = {target}"),
                    value: target,
                })?;
            glo = glo.min(gamma);
            ghi = ghi.max(gamma);
            dev.add(lap.value(i, j) - gamma, Location::Plane(g.x(i), g.y(j)));
        }
    }
    Ok(CheckReport::new(
        "laplacian_bound",
        PassRule::UpperBound,
        dev.max,
        dev.max_at,
        tol,
        dev.stats(),
        Provenance::of_field(u),
    )
    .note(format!(
        "Laplacian range [{wlo:e}, {whi:e}], bound range [{glo:e}, {ghi:e}]",
        wlo = dev.stats().min,
        whi = dev.stats().max,
    ))
    .note("bounded-window evidence: the hypotheses are checked on this grid only".into()))
}

/// Squared Frobenius norm of the discrete Hessian at a node.
fn hess_norm2(hes: &crate::grid::Hessian2, i: usize, j: usize) -> f64 {
    hes.xx.value(i, j).powi(2)
        + hes.xy.value(i, j).powi(2)
        + hes.yx.value(i, j).powi(2)
        + hes.yy.value(i, j).powi(2)
}

/// Residual identity for `P = |∇u|² − u·Δu` on solutions of
/// `|Hes u|² = F3(u, |∇u|², Δu) + (u/2)·Δ²u`.
///
/// Pre-checks, in order: the source hypothesis `F3(s,t,w) ≥ w²/2` at every
/// attained jet ([`HigherError::HypothesisFail`]); equation membership within
/// `10h²·(1+scale)` ([`HigherError::NotASolution`]).
///
/// The primary verdict is the proof identity
/// `|Δ_hP − (2·F3 − (Δ_hu)²)| ≤ tol·(1+scale)`; the subsolution side
/// `Δ_hP ≥ −tol` acts as a gate — when violated, the recorded worst residual
/// becomes the gate excess so the upper-bound pass rule stays literal, and a
/// note explains the swap. Returns the P-field alongside the report.
pub fn residual_hessian_equation(
    f3: &Fn3,
    u: &Field2,
    tol: f64,
) -> Result<(Field2, CheckReport), HigherError> {
    margin_guard(u, 2)?;
    let g = u.grid();
    let hes = hessian(u)?;
    let lap = laplacian(u)?;
    let (gx, gy) = gradient(u)?;
    let bih = biharmonic(u)?;
    let (i0, i1, j0, j1) = bih.valid_bounds().expect("guarded margin");

    let mut hyp = Scan::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let w = lap.value(i, j);
            let m = f3(u.value(i, j), t, w) - 0.5 * w * w;
            hyp.add(m, Location::Plane(g.x(i), g.y(j)));
        }
    }
    if hyp.min < -1e-12 * (1.0 + hyp.min.abs()) {
        return Err(HigherError::HypothesisFail {
            hypothesis: "F3(s, t, w) >= w^2/2 at the attained jets".into(),
            at: hyp.min_at.to_string(),
            value: hyp.min,
        });
    }

    let mut eq = Scan::new();
    let mut eq_scale: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let w = lap.value(i, j);
            let hn = hess_norm2(&hes, i, j);
            let fv = f3(u.value(i, j), t, w);
            let half = 0.5 * u.value(i, j) * bih.value(i, j);
            eq.add((hn - fv - half).abs(), Location::Plane(g.x(i), g.y(j)));
            eq_scale = eq_scale.max(hn.abs()).max(fv.abs()).max(half.abs());
        }
    }
    if eq.max > fd_tol(&g, eq_scale) {
        let Location::Plane(x, y) = eq.max_at else {
            unreachable!("plane scan")
        };
        return Err(HigherError::NotASolution {
            residual: eq.max,
            x,
            y,
        });
    }

    let (pi0, pi1, pj0, pj1) = lap.valid_bounds().expect("guarded margin");
    let mut pv = vec![0.0; g.len()];
    for j in pj0..=pj1 {
        for i in pi0..=pi1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            pv[g.idx(i, j)] = t - u.value(i, j) * lap.value(i, j);
        }
    }
    let p = Field2::derived(g, pv, lap.margin())?;
    let lap_p = laplacian(&p)?;

    let mut dev = Scan::new();
    let mut sub = Scan::new();
    let mut id_scale: f64 = 0.0;
    let mut p_max = f64::NEG_INFINITY;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let w = lap.value(i, j);
            let target = 2.0 * f3(u.value(i, j), t, w) - w * w;
            let lp = lap_p.value(i, j);
            dev.add((lp - target).abs(), Location::Plane(g.x(i), g.y(j)));
            sub.add(lp, Location::Plane(g.x(i), g.y(j)));
            id_scale = id_scale.max(target.abs());
            p_max = p_max.max(p.value(i, j));
        }
    }
    let tol_eff = tol * (1.0 + id_scale);
    let (mut worst, mut worst_at) = (dev.max, dev.max_at);
    let mut gate_note = format!("subsolution side: min lap P = {:e} >= {:e}", sub.min, -tol);
    if sub.min < -tol {
        worst = tol_eff + (-sub.min);
        worst_at = sub.min_at;
        gate_note = format!(
            "subsolution gate tripped: min lap P = {:e} below {:e}; the recorded worst \
             residual is the gate excess",
            sub.min, -tol
        );
    }
    let report = CheckReport::new(
        "hessian_identity",
        PassRule::UpperBound,
        worst,
        worst_at,
        tol_eff,
        dev.stats(),
        Provenance::of_field(u),
    )
    .note(gate_note)
    .note(format!(
        "max P = {p_max:e} (nonpositive P is the squared-gradient bound |grad u|^2 <= u lap u)"
    ));
    Ok((p, report))
}

/// Pointwise ball estimate: `max_{B₁} P ≤ (‖u‖_{H¹(B₂)} + ‖Δu‖_{L²(B₂)})/π + tol`
/// for `P = |∇u|² − u·Δ_hu`, with the norms as midpoint sums over the nodes
/// of the radius-2 ball about the origin.
///
/// The field must admit its equation: `|Hes u|² − (u/2)Δ²u ≥ (Δu)²/2` at every
/// node of B₂ (the implied source term must be admissible), else
/// [`HigherError::NotASolution`]; the valid region must cover B₂.
pub fn check_pointwise_bound(u: &Field2, tol: f64) -> Result<CheckReport, HigherError> {
    margin_guard(u, 2)?;
    let g = u.grid();
    let hes = hessian(u)?;
    let lap = laplacian(u)?;
    let (gx, gy) = gradient(u)?;
    let bih = biharmonic(u)?;
    let (i0, i1, j0, j1) = bih.valid_bounds().expect("guarded margin");
    if g.x(i0) > -2.0 || g.x(i1) < 2.0 || g.y(j0) > -2.0 || g.y(j1) < 2.0 {
        return Err(HigherError::BadParams(format!(
            "the differenced region [{}, {}]x[{}, {}] does not cover the radius-2 ball",
            g.x(i0),
            g.x(i1),
            g.y(j0),
            g.y(j1)
        )));
    }

    let mut adm = Scan::new();
    let mut adm_scale: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let (x, y) = (g.x(i), g.y(j));
            if x * x + y * y > 4.0 {
                continue;
            }
            let w = lap.value(i, j);
            let hn = hess_norm2(&hes, i, j);
            let half = 0.5 * u.value(i, j) * bih.value(i, j);
            adm.add(hn - half - 0.5 * w * w, Location::Plane(x, y));
            adm_scale = adm_scale.max(hn.abs()).max(half.abs()).max(0.5 * w * w);
        }
    }
    if adm.min < -fd_tol(&g, adm_scale) {
        let Location::Plane(x, y) = adm.min_at else {
            unreachable!("plane scan")
        };
        return Err(HigherError::NotASolution {
            residual: adm.min,
            x,
            y,
        });
    }

    let cell = g.hx() * g.hy();
    let (mut h1_sq, mut l2_sq) = (0.0, 0.0);
    let mut p_scan = Scan::new();
    let (li0, li1, lj0, lj1) = lap.valid_bounds().expect("guarded margin");
    for j in lj0..=lj1 {
        for i in li0..=li1 {
            let (x, y) = (g.x(i), g.y(j));
            let rr = x * x + y * y;
            if rr > 4.0 {
                continue;
            }
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            let w = lap.value(i, j);
            h1_sq += (u.value(i, j).powi(2) + t) * cell;
            l2_sq += w * w * cell;
            if rr < 1.0 {
                p_scan.add(t - u.value(i, j) * w, Location::Plane(x, y));
            }
        }
    }
    let bound = (h1_sq.sqrt() + l2_sq.sqrt()) / std::f64::consts::PI;
    Ok(CheckReport::new(
        "pointwise_bound",
        PassRule::UpperBound,
        p_scan.max - bound,
        p_scan.max_at,
        tol,
        p_scan.stats(),
        Provenance::of_field(u),
    )
    .note(format!(
        "H1 norm {:e}, L2 Laplacian norm {:e}, bound (sum)/pi = {bound:e}",
        h1_sq.sqrt(),
        l2_sq.sqrt()
    ))
    .note(format!(
        "max P over the unit ball = {:e} at {}",
        p_scan.max, p_scan.max_at
    )))
}

/// Subsolution check for `P = (Δ_hu)²` on convex fields satisfying
/// `c·|Hes u|² − Δ²u ≥ 0`.
///
/// Pre-checks: sampled Hessian positive semidefiniteness (floor −1e−10,
/// [`HigherError::NotConvex`]) and the subsolution inequality itself within
/// the caller's `tol` ([`HigherError::NotSubsolution`]).
///
/// The primary verdict is the proof identity
/// `|Δ_hP − (2|∇_hΔ_hu|² + 2Δ_hu·Δ²_hu)| ≤ tol·(1+scale)`, with the
/// subsolution side `Δ_hP ≥ −tol` folded in as a gate (see
/// [`residual_hessian_equation`]). Returns the signed identity deviation
/// field. A pass is *consistent with* the constancy conclusions attached to
/// this candidate; a bounded window proves nothing about entire fields.
pub fn residual_biharmonic_sub(
    c: f64,
    u: &Field2,
    tol: f64,
) -> Result<(Field2, CheckReport), HigherError> {
    if !(c >= 0.0) {
        return Err(HigherError::BadParams(format!(
            "the Hessian weight must be a nonnegative finite number, got {c}"
        )));
    }
    margin_guard(u, 2)?;
    let g = u.grid();
    let hes = hessian(u)?;
    let lap = laplacian(u)?;
    let bih = biharmonic(u)?;
    let (lx, ly) = grad_laplacian(u)?;
    let (i0, i1, j0, j1) = bih.valid_bounds().expect("guarded margin");

    let (hi0, hi1, hj0, hj1) = hes.xx.valid_bounds().expect("guarded margin");
    for j in hj0..=hj1 {
        for i in hi0..=hi1 {
            let (a, d) = (hes.xx.value(i, j), hes.yy.value(i, j));
            let b2 = 0.5 * (hes.xy.value(i, j) + hes.yx.value(i, j));
            let lambda_min = 0.5 * ((a + d) - (a - d).hypot(2.0 * b2));
            if lambda_min < CONVEXITY_FLOOR {
                return Err(HigherError::NotConvex {
                    x: g.x(i),
                    y: g.y(j),
                    lambda_min,
                });
            }
        }
    }
    for j in j0..=j1 {
        for i in i0..=i1 {
            let s = c * hess_norm2(&hes, i, j) - bih.value(i, j);
            if s < -tol {
                return Err(HigherError::NotSubsolution {
                    x: g.x(i),
                    y: g.y(j),
                    value: s,
                });
            }
        }
    }

    let p = lap.map(|w| w * w)?;
    let lap_p = laplacian(&p)?;
    let mut dev = Scan::new();
    let mut sub = Scan::new();
    let mut id_scale: f64 = 0.0;
    let mut dv = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let target = 2.0 * (lx.value(i, j).powi(2) + ly.value(i, j).powi(2))
                + 2.0 * lap.value(i, j) * bih.value(i, j);
            let lp = lap_p.value(i, j);
            dv[g.idx(i, j)] = lp - target;
            dev.add((lp - target).abs(), Location::Plane(g.x(i), g.y(j)));
            sub.add(lp, Location::Plane(g.x(i), g.y(j)));
            id_scale = id_scale.max(target.abs());
        }
    }
    let tol_eff = tol * (1.0 + id_scale);
    let (mut worst, mut worst_at) = (dev.max, dev.max_at);
    let mut gate_note = format!("subsolution side: min lap P = {:e} >= {:e}", sub.min, -tol);
    if sub.min < -tol {
        worst = tol_eff + (-sub.min);
        worst_at = sub.min_at;
        gate_note = format!(
            "subsolution gate tripped: min lap P = {:e} below {:e}; the recorded worst \
             residual is the gate excess",
            sub.min, -tol
        );
    }
    let dfield = Field2::derived(g, dv, lap_p.margin())?;
    let report = CheckReport::new(
        "biharmonic_subsolution",
        PassRule::UpperBound,
        worst,
        worst_at,
        tol_eff,
        dev.stats(),
        Provenance::of_field(u),
    )
    .note(gate_note)
    .note(
        "a pass is consistent with the constancy conclusions for this candidate; evidence \
         from a bounded window is not a proof"
            .into(),
    );
    Ok((dfield, report))
}

/// Constancy identity for `P = |∇u|² − u·Δ_hu` on solutions of
/// `2|Hes u|² = (Δu)² + u·Δ²u`.
///
/// Equation membership is pre-checked within `10h²·(1+scale)`
/// ([`HigherError::NotASolution`]). The verdict combines harmonicity
/// (`max |Δ_hP|`) and window constancy (`max P − min P`), both against the
/// same `tol` under the upper-bound rule; the notes carry the two quantities
/// separately together with the additive constant estimate. Returns the
/// P-field.
pub fn check_order_reduction(
    u: &Field2,
    tol: f64,
) -> Result<(Field2, CheckReport), HigherError> {
    margin_guard(u, 2)?;
    let g = u.grid();
    let hes = hessian(u)?;
    let lap = laplacian(u)?;
    let (gx, gy) = gradient(u)?;
    let bih = biharmonic(u)?;
    let (i0, i1, j0, j1) = bih.valid_bounds().expect("guarded margin");

    let mut eq = Scan::new();
    let mut eq_scale: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let w = lap.value(i, j);
            let hn = hess_norm2(&hes, i, j);
            let res = 2.0 * hn - (w * w + u.value(i, j) * bih.value(i, j));
            eq.add(res.abs(), Location::Plane(g.x(i), g.y(j)));
            eq_scale = eq_scale.max(2.0 * hn).max(w * w).max(
                (u.value(i, j) * bih.value(i, j)).abs(),
            );
        }
    }
    if eq.max > fd_tol(&g, eq_scale) {
        let Location::Plane(x, y) = eq.max_at else {
            unreachable!("plane scan")
        };
        return Err(HigherError::NotASolution {
            residual: eq.max,
            x,
            y,
        });
    }

    let (pi0, pi1, pj0, pj1) = lap.valid_bounds().expect("guarded margin");
    let mut pv = vec![0.0; g.len()];
    for j in pj0..=pj1 {
        for i in pi0..=pi1 {
            let t = gx.value(i, j).powi(2) + gy.value(i, j).powi(2);
            pv[g.idx(i, j)] = t - u.value(i, j) * lap.value(i, j);
        }
    }
    let p = Field2::derived(g, pv, lap.margin())?;
    let lap_p = laplacian(&p)?;

    let mut harm = Scan::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            harm.add(lap_p.value(i, j).abs(), Location::Plane(g.x(i), g.y(j)));
        }
    }
    let mut pval = Scan::new();
    for j in pj0..=pj1 {
        for i in pi0..=pi1 {
            pval.add(p.value(i, j), Location::Plane(g.x(i), g.y(j)));
        }
    }
    let spread = pval.max - pval.min;
    let (worst, worst_at) = if spread > harm.max {
        (spread, pval.max_at)
    } else {
        (harm.max, harm.max_at)
    };
    let report = CheckReport::new(
        "order_reduction",
        PassRule::UpperBound,
        worst,
        worst_at,
        tol,
        harm.stats(),
        Provenance::of_field(u),
    )
    .note(format!("harmonicity: max |lap P| = {:e}", harm.max))
    .note(format!(
        "constancy on window: max P - min P = {spread:e}; additive constant about {:e}",
        -pval.stats().mean
    ));
    Ok((p, report))
}

/// A closed-form field paired with the equation it solves, addressable by id.
pub struct Manufactured {
    pub id: &'static str,
    /// One-line description for catalog listings.
    pub title: &'static str,
    pub equation: EquationSpec,
    /// Default rectangle `((x_lo, x_hi), (y_lo, y_hi))`.
    pub extent: ((f64, f64), (f64, f64)),
    eval: fn(f64, f64) -> f64,
    /// `(A, B)` ingredients for the `P = A(Δu) − B(u)` candidates, where the
    /// equation family uses them.
    pub laplacian_candidate: Option<(Fn1, Fn1)>,
}

impl Manufactured {
    /// Samples the closed form on an `nx × ny` grid over the default extent.
    pub fn field_on(&self, nx: usize, ny: usize) -> Result<Field2, HigherError> {
        let grid = Grid2::from_extent(self.extent.0, self.extent.1, nx, ny)?;
        Ok(Field2::from_fn(grid, self.eval)?)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }
}

/// Catalog ids, lexicographically sorted.
pub fn manufactured_ids() -> &'static [&'static str] {
    &[
        "bih_quartic",
        "ho73_cubic",
        "ho73_harmonic",
        "ho74_quadratic",
        "ma_quadratic",
        "red77_quadratic",
    ]
}

/// Builds a catalog entry by id.
pub fn manufactured(id: &str) -> Result<Manufactured, HigherError> {
    let wide = Interval::new(-64.0, 64.0)?;
    match id {
        "bih_quartic" => Ok(Manufactured {
            id: "bih_quartic",
            title: "u = x^4 + y^4 on [1,2]^2; convex subsolution of |Hes|^2 - lap^2 u >= 0",
            equation: EquationSpec::BiharmonicSub { c: 1.0 },
            extent: ((1.0, 2.0), (1.0, 2.0)),
            eval: |x, y| x.powi(4) + y.powi(4),
            laplacian_candidate: None,
        }),
        "ho73_cubic" => {
            let a = Fn1::new(wide, |_| 1.0, |_| 0.0, |_| 0.0)?;
            let bdom = Interval::new(0.5, 9.0)?;
            let b = Fn1::new(
                bdom,
                |s| -4.0 / 3.0 * s.powf(-5.0 / 3.0),
                |s| 20.0 / 9.0 * s.powf(-8.0 / 3.0),
                |s| -160.0 / 27.0 * s.powf(-11.0 / 3.0),
            )?;
            let of_lap = Fn1::new(wide, |w| w, |_| 1.0, |_| 0.0)?;
            let of_val = Fn1::new(
                bdom,
                |s| 6.0 * s.cbrt(),
                |s| 2.0 * s.powf(-2.0 / 3.0),
                |s| -4.0 / 3.0 * s.powf(-5.0 / 3.0),
            )?;
            Ok(Manufactured {
                id: "ho73_cubic",
                title: "u = x^3 on [1,2]x[0,1]; weighted fourth-order equation with a \
                        singular value weight",
                equation: EquationSpec::FourthOrderQuasilinear { a, b },
                extent: ((1.0, 2.0), (0.0, 1.0)),
                eval: |x, _| x.powi(3),
                laplacian_candidate: Some((of_lap, of_val)),
            })
        }
        "ho73_harmonic" => {
            let a = Fn1::new(wide, |_| 1.0, |_| 0.0, |_| 0.0)?;
            let b = Fn1::new(wide, |_| 0.0, |_| 0.0, |_| 0.0)?;
            let of_lap = Fn1::new(wide, |w| w, |_| 1.0, |_| 0.0)?;
            let of_val = Fn1::new(wide, |_| 1.0, |_| 0.0, |_| 0.0)?;
            Ok(Manufactured {
                id: "ho73_harmonic",
                title: "u = x^2 - y^2 + 10y on [-1,1]x[0,4]; harmonic with a monotone \
                        direction",
                equation: EquationSpec::FourthOrderQuasilinear { a, b },
                extent: ((-1.0, 1.0), (0.0, 4.0)),
                eval: |x, y| x * x - y * y + 10.0 * y,
                laplacian_candidate: Some((of_lap, of_val)),
            })
        }
        "ho74_quadratic" => Ok(Manufactured {
            id: "ho74_quadratic",
            title: "u = x^2 + y^2 on [-2.5,2.5]^2; Hessian-balance equation with a \
                    constant source",
            equation: EquationSpec::HessianBalance {
                f3: Arc::new(|_, _, _| 8.0),
            },
            extent: ((-2.5, 2.5), (-2.5, 2.5)),
            eval: |x, y| x * x + y * y,
            laplacian_candidate: None,
        }),
        "ma_quadratic" => Ok(Manufactured {
            id: "ma_quadratic",
            title: "u = (x^2 + y^2)/2 on [-1,1]^2; unit Hessian determinant, zero drift",
            equation: EquationSpec::MongeAmpereDrift,
            extent: ((-1.0, 1.0), (-1.0, 1.0)),
            eval: |x, y| 0.5 * (x * x + y * y),
            laplacian_candidate: None,
        }),
        "red77_quadratic" => Ok(Manufactured {
            id: "red77_quadratic",
            title: "u = x^2 + y^2 on [-1,1]^2; order-reduction identity with P identically 0",
            equation: EquationSpec::OrderReduction,
            extent: ((-1.0, 1.0), (-1.0, 1.0)),
            eval: |x, y| x * x + y * y,
            laplacian_candidate: None,
        }),
        other => Err(HigherError::BadParams(format!(
            "unknown manufactured field id {other:?}"
        ))),
    }
}
