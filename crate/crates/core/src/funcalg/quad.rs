//! One-dimensional quadrature: adaptive Simpson for smooth integrands and a
//! level-adaptive tanh-sinh rule for integrands with endpoint singularities.
//!
//! Simpson is the workhorse for the nested integrals behind the quasi-linear
//! example P-functions; tanh-sinh never evaluates at the interval endpoints,
//! which matters for power-law potentials `W(u) = a·u^k` whose derivative
//! data blows up at `u = 0`.

use super::FuncError;

/// Absolute tolerance used by the registry builders.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. `a > b` is allowed and flips the sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, FuncError> {
    if !(a.is_finite() && b.is_finite() && tol > 0.0) {
        return Err(FuncError::BadParams(format!(
            "integrate: bad bounds or tolerance (a = {a}, b = {b}, tol = {tol})"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let fa = eval_finite(&f, a)?;
    let fb = eval_finite(&f, b)?;
    let m = 0.5 * (a + b);
    let fm = eval_finite(&f, m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, FuncError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval_finite(f, lm)?;
    let frm = eval_finite(f, rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(FuncError::QuadratureStalled { a, b, tol });
    }
    let lv = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

fn eval_finite<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, FuncError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FuncError::NonFinite {
            what: "integrand".to_string(),
            at: format!("x = {x}"),
        })
    }
}

/// Tanh-sinh quadrature of `f` over `[a, b]`, refining the level until two
/// successive levels agree to `tol`. The nodes cluster doubly-exponentially
/// at the endpoints without ever touching them, so integrable endpoint
/// singularities converge at machine-practical rates.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, FuncError> {
    if !(a.is_finite() && b.is_finite() && tol > 0.0) {
        return Err(FuncError::BadParams(format!(
            "integrate_singular: bad bounds or tolerance (a = {a}, b = {b}, tol = {tol})"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_singular(f, b, a, tol).map(|v| -v);
    }
    let r = 0.5 * (b - a);

    // Offsets from the endpoints: x+ = b - r*omega(t), x- = a + r*omega(t),
    // with omega(t) = 1 - tanh((pi/2) sinh t) computed cancellation-free.
    let node = |t: f64| -> (f64, f64) {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        let omega = 2.0 * e / (1.0 + e); // 1 - tanh(u)
        let sech = 2.0 / (u.exp() + (-u).exp());
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() * sech * sech;
        (omega, w)
    };

    const T_MAX: f64 = 4.0;
    let mut level: u32 = 2;
    let mut prev = f64::NAN;
    loop {
        let h = T_MAX / f64::from(1u32 << level);
        let n = 1u32 << level; // nodes at t = k*h, k = -n..n
        let mut sum = 0.0;
        for k in 0..=n {
            let t = f64::from(k) * h;
            let (omega, w) = node(t);
            if omega * r == 0.0 {
                continue; // node indistinguishable from the endpoint
            }
            let xp = b - r * omega;
            let xm = a + r * omega;
            let contrib = if k == 0 {
                w * f(xp)
            } else {
                w * (f(xp) + f(xm))
            };
            if !contrib.is_finite() {
                return Err(FuncError::NonFinite {
                    what: "integrand".to_string(),
                    at: format!("x = {xp} or x = {xm}"),
                });
            }
            sum += contrib;
        }
        let value = sum * h * r;
        if level >= 4 && (value - prev).abs() <= tol.max(1e-15 * value.abs()) {
            return Ok(value);
        }
        if level >= 12 {
            return Err(FuncError::QuadratureStalled { a, b, tol });
        }
        prev = value;
        level += 1;
    }
}
