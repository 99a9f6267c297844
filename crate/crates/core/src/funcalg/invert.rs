//! Monotone inversion by bracketing bisection with Newton polish.
//!
//! Used for the separable gradient bounds `Ψ(u) = B⁻¹(Γ(u))` and the
//! fourth-order Laplacian bound `A⁻¹(B(u))`; both inverses are applied at
//! every grid node, so the routine favors unconditional robustness (always
//! keep a bracket) over iteration counts.

use super::{Fn1, FuncError, Interval};

const MONOTONE_PROBES: usize = 33;
const MAX_BISECTIONS: usize = 200;
const NEWTON_POLISH: usize = 12;

/// Solves `f(x) = y` for `x` in `bracket`.
///
/// The derivative is probed at 33 points; a genuine sign change is
/// `NotMonotone`. Derivatives that touch zero (e.g. `B(t) = t²/2` at the
/// origin) are fine. Residual target: `|f(x) - y| <= 1e-12 * (1 + |y|)`.
pub fn invert_monotone(f: &Fn1, y: f64, bracket: Interval) -> Result<f64, FuncError> {
    let (a, b) = (bracket.lo(), bracket.hi());
    if !f.domain().contains(a) || !f.domain().contains(b) {
        return Err(FuncError::BadParams(format!(
            "bracket [{a}, {b}] not inside the function domain {:?}",
            f.domain()
        )));
    }

    let probes = bracket.sample(MONOTONE_PROBES);
    let slopes: Vec<f64> = probes
        .iter()
        .map(|&x| f.d1(x))
        .collect::<Result<_, _>>()?;
    let mag = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let eps = 1e-12 * (1.0 + mag);
    let has_pos = slopes.iter().any(|&s| s > eps);
    let has_neg = slopes.iter().any(|&s| s < -eps);
    if has_pos && has_neg {
        let x = probes
            .windows(2)
            .zip(slopes.windows(2))
            .find(|(_, sl)| sl[0] * sl[1] < 0.0)
            .map(|(xs, _)| 0.5 * (xs[0] + xs[1]))
            .unwrap_or(0.5 * (a + b));
        return Err(FuncError::NotMonotone { a, b, x });
    }

    let target = |x: f64| -> Result<f64, FuncError> { Ok(f.eval(x)? - y) };
    let mut fa = target(a)?;
    let mut fb = target(b)?;
    let tol = 1e-12 * (1.0 + y.abs());
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(FuncError::NoBracket { a, b, y });
    }

    let (mut lo, mut hi) = (a, b);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        let fx = target(x)?;
        if fx.abs() <= tol {
            break;
        }
        if fx * fa <= 0.0 {
            hi = x;
            fb = fx;
        } else {
            lo = x;
            fa = fx;
        }
        let _ = fb;
        if (hi - lo).abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
        x = 0.5 * (lo + hi);
    }

    // Newton polish inside the bracket; any step that leaves the bracket or
    // fails to reduce the residual falls back to the bisection midpoint.
    let mut best = x;
    let mut best_res = target(best)?.abs();
    for _ in 0..NEWTON_POLISH {
        if best_res <= tol {
            break;
        }
        let d = f.d1(best)?;
        if d.abs() < 1e-300 {
            break;
        }
        let step = (f.eval(best)? - y) / d;
        let cand = best - step;
        if !(cand >= lo.min(hi) && cand <= lo.max(hi)) {
            break;
        }
        let r = target(cand)?.abs();
        if r < best_res {
            best = cand;
            best_res = r;
        } else {
            break;
        }
    }
    if best_res <= tol {
        Ok(best)
    } else {
        // Bisection exhausted the representable interval; accept the best
        // point only if it's within a few ulps of meeting the target.
        if best_res <= 1e-9 * (1.0 + y.abs()) {
            Ok(best)
        } else {
            Err(FuncError::QuadratureStalled {
                a: lo,
                b: hi,
                tol,
            })
        }
    }
}
