//! Convexity-driven checks: the drift inequality for weights of the gradient
//! on strictly convex fields, and sub-mean-value monotonicity for subharmonic
//! data.

use crate::funcalg::Fn2;
use crate::grid::{
    ball_average, det_hessian, gradient, laplacian, ma_drift, Field2, DEFAULT_EPS_DET,
};
use crate::report::{CheckReport, Location, PassRule, Provenance, Scan};

use super::{probe_points, valid_bounds_of, VerifyError};

/// The sub-mean-value comparison applies to the drift-free case only; a
/// drift max-norm above this floor skips it (with a note), it does not fail.
pub const DRIFT_FLOOR: f64 = 1e-8;

/// Ball radii used for the sub-mean-value comparison at the grid center.
pub const BALL_RADII: [f64; 3] = [0.1, 0.2, 0.4];

/// Slack for the sampled eigenvalue test of the weight's Hessian.
const PSD_TOL: f64 = 1e-9;

/// Checks the elliptic structure a strictly convex field `u` induces on a
/// convex weight of its gradient, `w = g(∇u)`:
///
/// * the Hessian determinant must stay above the positivity floor (else the
///   drift vector is undefined and the check errors);
/// * the drift inequality `Δ_h w − B·∇_h w ≥ −tol` with
///   `B = (∇²u)⁻¹ ∇(Δu)`;
/// * in the drift-free case (`‖B‖_∞ ≤` [`DRIFT_FLOOR`]), the sub-mean-value
///   comparison `w(x₀) ≤ ball average + tol` at the grid center for the
///   fixed radii [`BALL_RADII`].
///
/// The weight's two slots are the gradient components; its Hessian is
/// eigen-checked for positive semidefiniteness over the attained gradient
/// range before anything runs ([`VerifyError::HypothesisFail`] otherwise).
pub fn check_monge_ampere(
    u: &Field2,
    weight: &Fn2,
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    let (gx, gy) = gradient(u)?;
    let (i0, i1, j0, j1) = valid_bounds_of(&gx)?;
    let (mut plo, mut phi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut qlo, mut qhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in j0..=j1 {
        for i in i0..=i1 {
            plo = plo.min(gx.value(i, j));
            phi = phi.max(gx.value(i, j));
            qlo = qlo.min(gy.value(i, j));
            qhi = qhi.max(gy.value(i, j));
        }
    }
    for p in probe_points(plo, phi, 17) {
        for q in probe_points(qlo, qhi, 17) {
            let (a, b, c) = (weight.dss(p, q)?, weight.dst(p, q)?, weight.dtt(p, q)?);
            let lambda_min = 0.5 * ((a + c) - (a - c).hypot(2.0 * b));
            if lambda_min < -PSD_TOL * (1.0 + a.abs() + c.abs()) {
                return Err(VerifyError::HypothesisFail {
                    hypothesis: "weight Hessian positive semidefinite over the attained \
                                 gradient range"
                        .into(),
                    at: format!("({p}, {q})"),
                    value: lambda_min,
                });
            }
        }
    }

    let g = u.grid();
    let mut wvals = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            wvals[g.idx(i, j)] = weight.eval(gx.value(i, j), gy.value(i, j))?;
        }
    }
    let w = Field2::derived(g, wvals, gx.margin())?;

    let (bx, by) = ma_drift(u, DEFAULT_EPS_DET)?;
    let det = det_hessian(u)?;
    let lap_w = laplacian(&w)?;
    let (wx, wy) = gradient(&w)?;
    let (i0, i1, j0, j1) = valid_bounds_of(&lap_w)?;
    let mut drift_res = Scan::new();
    let mut det_min = f64::INFINITY;
    let mut drift_norm: f64 = 0.0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let r = lap_w.value(i, j)
                - (bx.value(i, j) * wx.value(i, j) + by.value(i, j) * wy.value(i, j));
            drift_res.add(r, Location::Plane(g.x(i), g.y(j)));
            det_min = det_min.min(det.value(i, j));
            drift_norm = drift_norm.max(bx.value(i, j).abs()).max(by.value(i, j).abs());
        }
    }

    let (mut worst, mut worst_at) = (drift_res.min, drift_res.min_at);
    let mut report_notes = vec![
        format!(
            "Hessian determinant >= {det_min:e} over the window (floor {DEFAULT_EPS_DET:e})"
        ),
        format!("drift max norm {drift_norm:e}"),
    ];
    if drift_norm <= DRIFT_FLOOR {
        let (ci, cj) = ((g.nx() - 1) / 2, (g.ny() - 1) / 2);
        let center = (g.x(ci), g.y(cj));
        let w0 = w.value(ci, cj);
        let mut parts = Vec::with_capacity(BALL_RADII.len());
        for r in BALL_RADII {
            let avg = ball_average(&w, center, r)?;
            parts.push(format!("r = {r}: {avg}"));
            let q = avg - w0;
            if q < worst {
                worst = q;
                worst_at = Location::Plane(center.0, center.1);
            }
        }
        report_notes.push(format!(
            "sub-mean-value at the center ({}, {}): w = {w0}, ball averages {}",
            center.0,
            center.1,
            parts.join(", ")
        ));
    } else {
        report_notes.push(
            "sub-mean-value comparison skipped: it applies to the drift-free case only"
                .into(),
        );
    }

    let mut report = CheckReport::new(
        "monge_ampere",
        PassRule::LowerBound,
        worst,
        worst_at,
        tol,
        drift_res.stats(),
        Provenance::of_field(u),
    );
    for n in report_notes {
        report = report.note(n);
    }
    Ok(report)
}

/// Monotonicity of ball averages for subharmonic data: averages over the
/// given (ascending) radii about `center` must be nondecreasing and must not
/// fall below the center value, each within `tol`.
///
/// The field is verified subharmonic first (`Δ_h f ≥ −tol` on the valid
/// region), else [`VerifyError::NotSubharmonic`].
pub fn check_mean_value_monotonicity(
    f: &Field2,
    center: (f64, f64),
    radii: &[f64],
    tol: f64,
) -> Result<CheckReport, VerifyError> {
    if radii.is_empty() {
        return Err(VerifyError::BadParams("no radii supplied".into()));
    }
    for pair in radii.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(VerifyError::BadParams(format!(
                "radii must be strictly ascending, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !radii.iter().all(|r| r.is_finite() && *r > 0.0) {
        return Err(VerifyError::BadParams("radii must be positive".into()));
    }

    let lap = laplacian(f)?;
    let g = f.grid();
    let (i0, i1, j0, j1) = valid_bounds_of(&lap)?;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let v = lap.value(i, j);
            if v < -tol {
                return Err(VerifyError::NotSubharmonic {
                    x: g.x(i),
                    y: g.y(j),
                    value: v,
                });
            }
        }
    }

    let (x0, y0) = g.origin();
    let ci = ((center.0 - x0) / g.hx()).round() as isize;
    let cj = ((center.1 - y0) / g.hy()).round() as isize;
    let (fi0, fi1, fj0, fj1) = valid_bounds_of(f)?;
    if ci < fi0 as isize || ci > fi1 as isize || cj < fj0 as isize || cj > fj1 as isize {
        return Err(VerifyError::BadParams(format!(
            "center ({}, {}) has no node inside the valid region",
            center.0, center.1
        )));
    }
    let (ci, cj) = (ci as usize, cj as usize);
    let f0 = f.value(ci, cj);
    let center_at = Location::Plane(g.x(ci), g.y(cj));

    let mut avgs = Vec::with_capacity(radii.len());
    for &r in radii {
        avgs.push(ball_average(f, center, r)?);
    }
    let mut scan = Scan::new();
    for &a in &avgs {
        scan.add(a, Location::Plane(center.0, center.1));
    }
    let mut worst = f64::INFINITY;
    for pair in avgs.windows(2) {
        worst = worst.min(pair[1] - pair[0]);
    }
    for &a in &avgs {
        worst = worst.min(a - f0);
    }

    let listing: Vec<String> = radii
        .iter()
        .zip(&avgs)
        .map(|(r, a)| format!("r = {r}: {a}"))
        .collect();
    Ok(CheckReport::new(
        "mean_value_monotonicity",
        PassRule::LowerBound,
        worst,
        center_at,
        tol,
        scan.stats(),
        Provenance::of_field(f),
    )
    .note(format!(
        "center value {f0} at nearest node ({}, {}); ball averages {}",
        g.x(ci),
        g.y(cj),
        listing.join(", ")
    )))
}
