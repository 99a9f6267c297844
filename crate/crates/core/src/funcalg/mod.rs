//! Scalar function handles with explicit domains and analytic derivative stacks.
//!
//! Everything downstream (criterion sampling, P-field evaluation, Newton
//! solves) consumes functions through [`Fn1`] and [`Fn2`]. Both carry their
//! derivatives as separate closures so that criterion residuals can be
//! computed from analytic partials rather than finite differences; the
//! finite-difference helper in [`fd`] exists for raw user closures and for
//! cross-checking, not as the default route.
//!
//! Domains are explicit closed intervals/rectangles. Evaluation outside the
//! declared domain is an error, never an extrapolation. A small relative
//! slack (1e-9 of the width) absorbs roundoff from grid-derived arguments.

pub mod equation;
pub mod examples;
pub mod fd;
pub mod invert;
pub mod pfunction;
pub mod quad;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Relative slack applied to interval containment tests.
const DOMAIN_SLACK: f64 = 1e-9;

/// Points probed per axis when a handle is constructed.
const PROBE_1D: usize = 64;
const PROBE_2D: usize = 16;

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("{slot} = {x} outside domain [{lo}, {hi}]")]
    Domain {
        slot: &'static str,
        x: f64,
        lo: f64,
        hi: f64,
    },
    #[error("non-finite value of {what} at {at}")]
    NonFinite { what: String, at: String },
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("quadrature failed to converge on [{a}, {b}] (tol {tol})")]
    QuadratureStalled { a: f64, b: f64, tol: f64 },
    #[error("no bracket: f({a}) and f({b}) do not straddle y = {y}")]
    NoBracket { a: f64, b: f64, y: f64 },
    #[error("not monotone on [{a}, {b}]: derivative changes sign near x = {x}")]
    NotMonotone { a: f64, b: f64, x: f64 },
}

/// Closed interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, FuncError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuncError::BadInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = DOMAIN_SLACK * (1.0 + self.width());
        x.is_finite() && x >= self.lo - slack && x <= self.hi + slack
    }

    /// `n` evenly spaced points including both endpoints.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.hi
                } else {
                    self.lo + i as f64 * h
                }
            })
            .collect()
    }

    fn check(&self, slot: &'static str, x: f64) -> Result<(), FuncError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(FuncError::Domain {
                slot,
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }
}

/// Closed rectangle in the `(s, t)` plane.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub s: Interval,
    pub t: Interval,
}

impl Rect {
    pub fn new(s: Interval, t: Interval) -> Self {
        Rect { s, t }
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        self.s.contains(s) && self.t.contains(t)
    }
}

type Scalar1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Scalar function of one variable with first and second derivatives.
#[derive(Clone)]
pub struct Fn1 {
    eval: Scalar1,
    d1: Scalar1,
    d2: Scalar1,
    domain: Interval,
}

impl fmt::Debug for Fn1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fn1 on {:?}", self.domain)
    }
}

impl Fn1 {
    /// Builds a handle and probes all three closures on a 64-point grid so
    /// that a handle, once constructed, is finite everywhere on its domain.
    pub fn new<E, D, D2>(domain: Interval, eval: E, d1: D, d2: D2) -> Result<Self, FuncError>
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f = Fn1 {
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            domain,
        };
        for &x in &domain.sample(PROBE_1D) {
            for (name, g) in [("eval", &f.eval), ("d1", &f.d1), ("d2", &f.d2)] {
                if !g(x).is_finite() {
                    return Err(FuncError::NonFinite {
                        what: name.to_string(),
                        at: format!("x = {x}"),
                    });
                }
            }
        }
        Ok(f)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn eval(&self, x: f64) -> Result<f64, FuncError> {
        self.domain.check("x", x)?;
        Ok((self.eval)(x))
    }

    pub fn d1(&self, x: f64) -> Result<f64, FuncError> {
        self.domain.check("x", x)?;
        Ok((self.d1)(x))
    }

    pub fn d2(&self, x: f64) -> Result<f64, FuncError> {
        self.domain.check("x", x)?;
        Ok((self.d2)(x))
    }

    /// Antiderivative `F(x) = offset + ∫_base^x f` with the integral computed
    /// by adaptive quadrature; `F' = f` and `F'' = f'` stay analytic.
    pub fn antiderivative_of(f: &Fn1, base: f64, offset: f64) -> Result<Fn1, FuncError> {
        f.domain.check("base", base)?;
        let dom = f.domain;
        let fe = f.eval.clone();
        let fd1 = f.d1.clone();
        let fe2 = f.eval.clone();
        Fn1::new(
            dom,
            move |x| offset + quad::integrate(|z| fe(z), base, x, quad::DEFAULT_TOL).unwrap_or(f64::NAN),
            move |x| fe2(x),
            move |x| fd1(x),
        )
    }
}

/// Scalar function of `(s, t)` with partials up to second order.
///
/// P-functions store the squared gradient in the second slot; the criterion
/// layer is responsible for the `t ↦ t²` substitution, handles here are plain
/// functions of their two arguments.
#[derive(Clone)]
pub struct Fn2 {
    eval: Scalar2,
    ds: Scalar2,
    dt: Scalar2,
    dss: Scalar2,
    dst: Scalar2,
    dtt: Scalar2,
    domain: Rect,
}

impl fmt::Debug for Fn2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fn2 on {:?} x {:?}", self.domain.s, self.domain.t)
    }
}

macro_rules! fn2_accessor {
    ($name:ident) => {
        pub fn $name(&self, s: f64, t: f64) -> Result<f64, FuncError> {
            self.domain.s.check("s", s)?;
            self.domain.t.check("t", t)?;
            Ok((self.$name)(s, t))
        }
    };
}

impl Fn2 {
    #[allow(clippy::too_many_arguments)]
    pub fn new<E, S, T, SS, ST, TT>(
        domain: Rect,
        eval: E,
        ds: S,
        dt: T,
        dss: SS,
        dst: ST,
        dtt: TT,
    ) -> Result<Self, FuncError>
    where
        E: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        T: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        SS: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        ST: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        TT: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let f = Fn2 {
            eval: Arc::new(eval),
            ds: Arc::new(ds),
            dt: Arc::new(dt),
            dss: Arc::new(dss),
            dst: Arc::new(dst),
            dtt: Arc::new(dtt),
            domain,
        };
        for &s in &domain.s.sample(PROBE_2D) {
            for &t in &domain.t.sample(PROBE_2D) {
                for (name, g) in [
                    ("eval", &f.eval),
                    ("ds", &f.ds),
                    ("dt", &f.dt),
                    ("dss", &f.dss),
                    ("dst", &f.dst),
                    ("dtt", &f.dtt),
                ] {
                    if !g(s, t).is_finite() {
                        return Err(FuncError::NonFinite {
                            what: name.to_string(),
                            at: format!("(s, t) = ({s}, {t})"),
                        });
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    fn2_accessor!(eval);
    fn2_accessor!(ds);
    fn2_accessor!(dt);
    fn2_accessor!(dss);
    fn2_accessor!(dst);
    fn2_accessor!(dtt);

    /// Wraps a raw closure; all five partials come from Richardson-extrapolated
    /// central differences with step `h`.
    pub fn from_raw<F>(domain: Rect, raw: F, h: f64) -> Result<Self, FuncError>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let raw = Arc::new(raw);
        let p = {
            let raw = raw.clone();
            move |s: f64, t: f64| fd::fd_partials(|a, b| raw(a, b), s, t, h)
        };
        let (p1, p2, p3, p4, p5) = (p.clone(), p.clone(), p.clone(), p.clone(), p);
        let raw_eval = raw.clone();
        Fn2::new(
            domain,
            move |s, t| raw_eval(s, t),
            move |s, t| p1(s, t).map(|q| q.ps).unwrap_or(f64::NAN),
            move |s, t| p2(s, t).map(|q| q.pt).unwrap_or(f64::NAN),
            move |s, t| p3(s, t).map(|q| q.pss).unwrap_or(f64::NAN),
            move |s, t| p4(s, t).map(|q| q.pst).unwrap_or(f64::NAN),
            move |s, t| p5(s, t).map(|q| q.ptt).unwrap_or(f64::NAN),
        )
    }

    /// Lifts `f(s)` to a function of `(s, t)` constant in `t`.
    pub fn of_s(f: &Fn1, t_domain: Interval) -> Result<Self, FuncError> {
        let (fe, f1, f2) = (f.eval.clone(), f.d1.clone(), f.d2.clone());
        Fn2::new(
            Rect::new(f.domain, t_domain),
            move |s, _| fe(s),
            move |s, _| f1(s),
            |_, _| 0.0,
            move |s, _| f2(s),
            |_, _| 0.0,
            |_, _| 0.0,
        )
    }
}
