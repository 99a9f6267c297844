//! One-dimensional profile integration.
//!
//! Plane-symmetric solutions `u(x)` of the second-order families reduce to
//! `u'' = g(u, u')`; this module integrates that system with classical RK4.
//! Initial data `(u(0), u'(0))` is anchored at the origin, which must lie in
//! the requested span; the two sides are integrated outward so that a window
//! translation changes which nodes exist, never the values at shared nodes.

use std::f64::consts::SQRT_2;

use crate::funcalg::equation::EquationSpec;
use crate::funcalg::Interval;
use crate::grid::Profile1;

use super::{SolverError, BLOW_UP_LIMIT};

/// Coefficient floor below which the divergence-form reduction counts as
/// degenerate.
const ELLIPTICITY_FLOOR: f64 = 1e-12;

/// The heteroclinic connection of the double-well problem:
/// `u(x) = tanh(x/√2)` together with `u'(x) = (1 − u²)/√2`.
pub fn kink(x: f64) -> (f64, f64) {
    let u = (x / SQRT_2).tanh();
    (u, (1.0 - u * u) / SQRT_2)
}

/// Integrates the one-dimensional reduction of `eq` outward from `x = 0`
/// with initial data `u(0) = u0`, `u'(0) = v0` and step `h`, covering `span`
/// (its endpoints snap to the nearest step multiple). At least ten steps are
/// required. State magnitudes beyond [`BLOW_UP_LIMIT`] abort with
/// [`SolverError::BlowUp`].
pub fn integrate_profile(
    eq: &EquationSpec,
    u0: f64,
    v0: f64,
    h: f64,
    span: Interval,
) -> Result<Profile1, SolverError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::BadParams(format!(
            "step must be positive and finite, got {h}"
        )));
    }
    if !(u0.is_finite() && v0.is_finite()) {
        return Err(SolverError::BadParams(
            "initial data must be finite".into(),
        ));
    }
    if span.lo() > 0.0 || span.hi() < 0.0 {
        return Err(SolverError::BadParams(format!(
            "span [{}, {}] must contain x = 0, where the initial data sits",
            span.lo(),
            span.hi()
        )));
    }
    let n_left = (-span.lo() / h).round() as usize;
    let n_right = (span.hi() / h).round() as usize;
    if n_left + n_right < 10 {
        return Err(SolverError::BadParams(format!(
            "span covers only {} steps of size {h}; at least 10 are required",
            n_left + n_right
        )));
    }

    let accel = acceleration(eq)?;
    let right = march(&accel, u0, v0, h, n_right)?;
    let left = march(&accel, u0, v0, -h, n_left)?;

    let n = n_left + n_right + 1;
    let mut xs = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    for k in 0..n {
        let step = k as isize - n_left as isize;
        xs.push(step as f64 * h);
        let (uu, vv) = if step < 0 {
            left[(-step) as usize]
        } else {
            right[step as usize]
        };
        u.push(uu);
        du.push(vv);
    }
    Ok(Profile1::new(h, xs, u, du)?)
}

type Accel<'a> = Box<dyn Fn(f64, f64, f64) -> Result<f64, SolverError> + 'a>;

/// `u'' = g(x, u, u')` for the families that admit a plane reduction.
fn acceleration(eq: &EquationSpec) -> Result<Accel<'_>, SolverError> {
    match eq {
        EquationSpec::Semilinear { f } => Ok(Box::new(move |_x, u, _v| Ok(f.eval(u)?))),
        EquationSpec::GradientSemilinear { f } => {
            Ok(Box::new(move |_x, u, v| Ok(f.eval(u, v * v)?)))
        }
        EquationSpec::DivergenceForm {
            phi,
            rho,
            potential,
        } => Ok(Box::new(move |x, u, v| {
            let t = v * v;
            let coeff = phi.d1(t)? + 2.0 * t * phi.d2(t)?;
            if !(coeff > ELLIPTICITY_FLOOR) {
                return Err(SolverError::DegenerateEllipticity { x, value: coeff });
            }
            Ok(rho.eval(t)? * potential.d1(u)? / coeff)
        })),
        other => Err(SolverError::BadParams(format!(
            "{other:?} has no one-dimensional second-order reduction"
        ))),
    }
}

/// Marches `n` RK4 steps of size `h` (which may be negative) and returns all
/// `n + 1` states, starting with the initial one.
fn march(accel: &Accel, u0: f64, v0: f64, h: f64, n: usize) -> Result<Vec<(f64, f64)>, SolverError> {
    let mut out = Vec::with_capacity(n + 1);
    out.push((u0, v0));
    let (mut u, mut v) = (u0, v0);
    for k in 0..n {
        let x = k as f64 * h;
        let k1u = v;
        let k1v = accel(x, u, v)?;
        let k2u = v + 0.5 * h * k1v;
        let k2v = accel(x + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v)?;
        let k3u = v + 0.5 * h * k2v;
        let k3v = accel(x + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v)?;
        let k4u = v + h * k3v;
        let k4v = accel(x + h, u + h * k3u, v + h * k3v)?;
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let mag = u.abs().max(v.abs());
        if !mag.is_finite() || mag > BLOW_UP_LIMIT {
            return Err(SolverError::BlowUp {
                x: x + h,
                value: mag,
            });
        }
        out.push((u, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::examples::scalar_builtin;
    use crate::funcalg::{Fn1, Fn2, Rect};

    fn double_well_eq() -> EquationSpec {
        EquationSpec::Semilinear {
            f: scalar_builtin("double_well_prime").unwrap(),
        }
    }

    #[test]
    fn kink_closed_form_has_frozen_anchor_values() {
        let (u, v) = kink(0.0);
        assert_eq!(u, 0.0);
        assert_eq!(v, 0.7071067811865475);
        assert!((kink(1.0).0 - 0.6088593650139138).abs() < 1e-15);
        assert!(kink(25.0).0 > 1.0 - 1e-12);
    }

    #[test]
    fn kink_satisfies_its_equation_pointwise() {
        // Central difference of the closed-form derivative against u³ − u.
        let e = 1e-5;
        for &x in &[-2.0, -0.3, 0.0, 0.7, 1.9] {
            let (u, _) = kink(x);
            let ddu = (kink(x + e).1 - kink(x - e).1) / (2.0 * e);
            assert!((ddu - (u * u * u - u)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn integrated_kink_matches_the_closed_form() {
        let span = Interval::new(-2.0, 2.0).unwrap();
        let p = integrate_profile(&double_well_eq(), 0.0, kink(0.0).1, 1e-3, span).unwrap();
        for (k, &x) in p.xs.iter().enumerate() {
            let (u, v) = kink(x);
            assert!((p.u[k] - u).abs() < 1e-9, "u at x = {x}");
            assert!((p.du[k] - v).abs() < 1e-9, "u' at x = {x}");
        }
    }

    #[test]
    fn semilinear_energy_is_conserved_along_the_profile() {
        let span = Interval::new(-5.0, 5.0).unwrap();
        let p = integrate_profile(&double_well_eq(), 0.0, kink(0.0).1, 1e-3, span).unwrap();
        let w = scalar_builtin("quarter_double_well").unwrap();
        let energy = |u: f64, v: f64| 0.5 * v * v - w.eval(u).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..p.len() {
            let e = energy(p.u[k], p.du[k]);
            lo = lo.min(e);
            hi = hi.max(e);
        }
        assert!(hi - lo <= 1e-8, "energy drifted by {}", hi - lo);
    }

    #[test]
    fn zero_forcing_gives_a_straight_line() {
        let f = Fn1::new(Interval::new(-16.0, 16.0).unwrap(), |_| 0.0, |_| 0.0, |_| 0.0)
            .unwrap();
        let eq = EquationSpec::Semilinear { f };
        let p = integrate_profile(&eq, 0.5, 2.0, 0.1, Interval::new(-1.0, 1.0).unwrap()).unwrap();
        for (k, &x) in p.xs.iter().enumerate() {
            assert!((p.u[k] - (0.5 + 2.0 * x)).abs() < 1e-12);
            assert!((p.du[k] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_coupled_reduction_integrates_the_log_solution() {
        // u'' = (u')² has the solution u = −ln(1 − x) from (0, 1).
        let rect = Rect::new(
            Interval::new(-16.0, 16.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        );
        let f = Fn2::new(rect, |_, t| t, |_, _| 0.0, |_, _| 1.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
            .unwrap();
        let eq = EquationSpec::GradientSemilinear { f };
        let p = integrate_profile(&eq, 0.0, 1.0, 1e-3, Interval::new(-0.5, 0.5).unwrap()).unwrap();
        let last = p.len() - 1;
        assert!((p.u[last] - -(0.5f64.ln())).abs() < 1e-10);
        assert!((p.u[0] - -(1.5f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn divergence_reduction_conserves_its_first_integral() {
        let eq = EquationSpec::DivergenceForm {
            phi: scalar_builtin("phi_quadratic").unwrap(),
            rho: scalar_builtin("one").unwrap(),
            potential: scalar_builtin("quarter_double_well").unwrap(),
        };
        // Q(t) = t + 3t²/2 and Q(1/3) = 2F(0) = 1/2, so the connecting
        // profile launches with u'(0) = 1/√3.
        let v0 = (1.0f64 / 3.0).sqrt();
        let p = integrate_profile(&eq, 0.0, v0, 1e-3, Interval::new(-4.0, 4.0).unwrap()).unwrap();
        let w = scalar_builtin("quarter_double_well").unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..p.len() {
            let t = p.du[k] * p.du[k];
            let q = t + 1.5 * t * t;
            let e = q - 2.0 * w.eval(p.u[k]).unwrap();
            lo = lo.min(e);
            hi = hi.max(e);
        }
        assert!(hi - lo <= 1e-8, "first integral drifted by {}", hi - lo);
        // The profile climbs toward the wells but never leaves (−1, 1).
        assert!(p.u.iter().all(|&u| u.abs() < 1.0));
    }

    #[test]
    fn blow_up_is_detected() {
        // u'' = u with u(0) = u'(0) = 1 is e^x; it crosses 1e6 near x ≈ 13.8.
        let f = Fn1::new(Interval::new(-2e6, 2e6).unwrap(), |s| s, |_| 1.0, |_| 0.0).unwrap();
        let eq = EquationSpec::Semilinear { f };
        let err =
            integrate_profile(&eq, 1.0, 1.0, 0.01, Interval::new(-20.0, 20.0).unwrap())
                .unwrap_err();
        match err {
            SolverError::BlowUp { x, value } => {
                assert!((13.0..15.0).contains(&x), "x = {x}");
                assert!(value > BLOW_UP_LIMIT);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_reduction_coefficient_is_reported() {
        // Φ(t) = t − t² gives Φ' + 2tΦ'' = 1 − 6t ≤ 0 from t = 1/6 on; the
        // initial slope already sits past it.
        let phi = Fn1::new(
            Interval::new(-0.25, 16.0).unwrap(),
            |t| t - t * t,
            |t| 1.0 - 2.0 * t,
            |_| -2.0,
        )
        .unwrap();
        let eq = EquationSpec::DivergenceForm {
            phi,
            rho: scalar_builtin("one").unwrap(),
            potential: scalar_builtin("quarter_double_well").unwrap(),
        };
        let err = integrate_profile(&eq, 0.0, 0.5, 0.01, Interval::new(-1.0, 1.0).unwrap())
            .unwrap_err();
        assert!(
            matches!(err, SolverError::DegenerateEllipticity { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn span_and_step_are_validated() {
        let eq = double_well_eq();
        let span = Interval::new(1.0, 2.0).unwrap();
        assert!(matches!(
            integrate_profile(&eq, 0.0, 1.0, 0.01, span).unwrap_err(),
            SolverError::BadParams(_)
        ));
        let short = Interval::new(-0.4, 0.4).unwrap();
        assert!(matches!(
            integrate_profile(&eq, 0.0, 1.0, 0.2, short).unwrap_err(),
            SolverError::BadParams(_)
        ));
        assert!(matches!(
            integrate_profile(&eq, 0.0, 1.0, -0.1, Interval::new(-2.0, 2.0).unwrap())
                .unwrap_err(),
            SolverError::BadParams(_)
        ));
    }

    #[test]
    fn reruns_are_bit_identical() {
        let span = Interval::new(-3.0, 3.0).unwrap();
        let a = integrate_profile(&double_well_eq(), 0.0, kink(0.0).1, 1e-3, span).unwrap();
        let b = integrate_profile(&double_well_eq(), 0.0, kink(0.0).1, 1e-3, span).unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.du, b.du);
        assert_eq!(a.xs, b.xs);
    }

    #[test]
    fn fourth_order_accuracy_under_step_halving() {
        // Errors against the closed-form kink shrink by ~16x per halving.
        let span = Interval::new(-1.0, 1.0).unwrap();
        let err_at = |h: f64| {
            let p = integrate_profile(&double_well_eq(), 0.0, kink(0.0).1, h, span).unwrap();
            let last = p.len() - 1;
            (p.u[last] - kink(p.xs[last]).0).abs()
        };
        let (coarse, fine) = (err_at(0.1), err_at(0.05));
        assert!(fine > 0.0, "error underflow would make the ratio vacuous");
        assert!(
            coarse / fine > 10.0,
            "expected ~16x reduction, got {coarse:.3e} / {fine:.3e}"
        );
    }
}
