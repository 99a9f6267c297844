//! Finite-difference partials for raw two-argument closures.
//!
//! Central differences at steps `h` and `h/2` combined by one Richardson
//! step, giving fourth-order accuracy on smooth functions. This is the
//! fallback derivative route; registry P-functions carry analytic partials.

use super::FuncError;

#[derive(Clone, Copy, Debug)]
pub struct Partials {
    pub ps: f64,
    pub pt: f64,
    pub pss: f64,
    pub pst: f64,
    pub ptt: f64,
}

/// All five partials of `raw` at `(s, t)` by Richardson-extrapolated central
/// differences with base step `h`. Every stencil evaluation must be finite.
pub fn fd_partials<F: Fn(f64, f64) -> f64>(
    raw: F,
    s: f64,
    t: f64,
    h: f64,
) -> Result<Partials, FuncError> {
    if !(h > 0.0 && h.is_finite() && s.is_finite() && t.is_finite()) {
        return Err(FuncError::BadParams(format!(
            "fd_partials: bad inputs (s = {s}, t = {t}, h = {h})"
        )));
    }
    let f = |a: f64, b: f64| -> Result<f64, FuncError> {
        let v = raw(a, b);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FuncError::NonFinite {
                what: "raw".to_string(),
                at: format!("(s, t) = ({a}, {b})"),
            })
        }
    };

    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    let d1 = |step: f64, along_s: bool| -> Result<f64, FuncError> {
        let (p, m) = if along_s {
            (f(s + step, t)?, f(s - step, t)?)
        } else {
            (f(s, t + step)?, f(s, t - step)?)
        };
        Ok((p - m) / (2.0 * step))
    };
    let d2 = |step: f64, along_s: bool| -> Result<f64, FuncError> {
        let c = f(s, t)?;
        let (p, m) = if along_s {
            (f(s + step, t)?, f(s - step, t)?)
        } else {
            (f(s, t + step)?, f(s, t - step)?)
        };
        Ok((p - 2.0 * c + m) / (step * step))
    };
    let cross = |step: f64| -> Result<f64, FuncError> {
        let pp = f(s + step, t + step)?;
        let pm = f(s + step, t - step)?;
        let mp = f(s - step, t + step)?;
        let mm = f(s - step, t - step)?;
        Ok((pp - pm - mp + mm) / (4.0 * step * step))
    };

    Ok(Partials {
        ps: richardson(d1(h, true)?, d1(0.5 * h, true)?),
        pt: richardson(d1(h, false)?, d1(0.5 * h, false)?),
        pss: richardson(d2(h, true)?, d2(0.5 * h, true)?),
        ptt: richardson(d2(h, false)?, d2(0.5 * h, false)?),
        pst: richardson(cross(h)?, cross(0.5 * h)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_is_exact_to_roundoff() {
        let p = fd_partials(|s, t| s * t, 2.0, 3.0, 1e-2).unwrap();
        assert!((p.ps - 3.0).abs() <= 1e-9);
        assert!((p.pt - 2.0).abs() <= 1e-9);
        assert!(p.pss.abs() <= 1e-9);
        assert!(p.ptt.abs() <= 1e-9);
        assert!((p.pst - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn gaussian_partials_match_analytic() {
        // exp(-s^2): ps = -2s e^{-s^2}, pss = (4s^2 - 2) e^{-s^2}
        let p = fd_partials(|s, _| (-s * s).exp(), 1.0, 0.0, 1e-2).unwrap();
        let e = (-1.0f64).exp();
        assert!((p.ps + 2.0 * e).abs() <= 1e-8, "ps = {}", p.ps);
        assert!((p.pss - 2.0 * e).abs() <= 1e-8, "pss = {}", p.pss);
        assert!(p.pst.abs() <= 1e-8);
    }

    #[test]
    fn non_finite_stencil_point_is_an_error() {
        let r = fd_partials(|s, _| 1.0 / s, 0.005, 0.0, 1e-2);
        assert!(matches!(r, Err(FuncError::NonFinite { .. })));
    }

    #[test]
    fn mixed_exponential_cross_term() {
        // e^{s t}: pst at (0.5, 0.25) = e^{st}(1 + st)
        let p = fd_partials(|s, t| (s * t).exp(), 0.5, 0.25, 1e-2).unwrap();
        let exact = (0.125f64).exp() * (1.0 + 0.125);
        assert!((p.pst - exact).abs() <= 1e-8);
    }
}
