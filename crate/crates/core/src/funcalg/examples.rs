//! The worked equation / P-function pairs exposed by the registry, plus the
//! named scalar functions that CLI configs can reference.
//!
//! Each builder returns the equation together with the matching P-function
//! candidate, the criterion route under which the candidate's conditions are
//! claimed, and (where a claim is made) the rectangle on which it is claimed.

use std::sync::Arc;

use super::equation::EquationSpec;
use super::pfunction::{MuKind, PFunctionSpec, Separable};
use super::quad;
use super::{Fn1, Fn2, FuncError, Interval, Rect};

type Scalar1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Identifies one of the five registry pairs, with its free parameters.
pub enum ExampleId {
    /// `Δu = f(u)` with `P = t/2 − F(s)`, `F' = f`. The `offset` picks the
    /// antiderivative constant; it shifts `P` but none of its partials.
    Ex1 { f: Fn1, offset: f64 },
    /// `Δu = f(u)` with the quartic-in-gradient candidate
    /// `P = t²/2 ± 2∫₀ˢ(∫₀ʸ √(±f f') dz)² dy`; requires `f·f'` single-signed.
    Ex2 { f: Fn1 },
    /// `Δu = u(k|∇u|² + λe^{−cu²})` with the exponential-weight candidate.
    Ex3 { k: f64, lambda: f64, c: f64 },
    /// `Δu = G(|∇u|² − u)` with `P = t − s`.
    Ex4 { g: Fn1 },
    /// `div(Φ'(|∇u|²)∇u) = ρ(|∇u|²)F'(u)` with `P = Q(t) − 2F(s)`,
    /// `Q(t) = ∫₀ᵗ (Φ' + 2yΦ'')/ρ`.
    Ex5 { phi: Fn1, rho: Fn1, potential: Fn1 },
}

/// Which criterion machinery the candidate's P-ness is claimed under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriterionRoute {
    /// Second variant of the semilinear corollary
    /// (`P_st = 0`, `P_tt ≥ 0`, quantity with the `t²P_ss` term).
    CorollaryVariant2,
    /// Both alternatives of the general criterion theorem.
    TheoremBoth,
    /// Established in the cited literature with different machinery; no
    /// sampled criterion claim is made here.
    External,
}

/// A registry pair: equation, candidate P-function, and the claim metadata.
#[derive(Debug)]
pub struct PaperExample {
    pub equation: EquationSpec,
    pub pfunction: PFunctionSpec,
    pub route: CriterionRoute,
    /// Rectangle in `(value, gradient-magnitude)` coordinates on which the
    /// route's conditions are claimed; `None` for [`CriterionRoute::External`].
    pub criterion_rect: Option<Rect>,
}

/// Builds one of the worked pairs.
pub fn paper_example(id: ExampleId) -> Result<PaperExample, FuncError> {
    match id {
        ExampleId::Ex1 { f, offset } => build_ex1(f, offset),
        ExampleId::Ex2 { f } => build_ex2(f),
        ExampleId::Ex3 { k, lambda, c } => build_ex3(k, lambda, c),
        ExampleId::Ex4 { g } => build_ex4(g),
        ExampleId::Ex5 {
            phi,
            rho,
            potential,
        } => build_ex5(phi, rho, potential),
    }
}

/// Tries the separable decomposition; falls back to the bare candidate when
/// the decomposition's sign conditions fail on the declared domain (e.g. a
/// potential that dips negative). The bound-producing checks require the
/// decomposition, the criterion checks do not.
fn with_optional_separable(
    p: Fn2,
    mu: MuKind,
    sep: Separable,
) -> Result<PFunctionSpec, FuncError> {
    match PFunctionSpec::new(p.clone(), mu.clone(), Some(sep)) {
        Ok(spec) => Ok(spec),
        Err(_) => PFunctionSpec::new(p, mu, None),
    }
}

fn build_ex1(f: Fn1, offset: f64) -> Result<PaperExample, FuncError> {
    if !offset.is_finite() {
        return Err(FuncError::BadParams("offset must be finite".into()));
    }
    let base = if f.domain().contains(0.0) {
        0.0
    } else {
        f.domain().lo()
    };
    let big_f = Fn1::antiderivative_of(&f, base, offset)?;
    let t_dom = Interval::new(0.0, 16.0)?;
    let rect = Rect::new(f.domain(), t_dom);

    let (fe, fd1) = (f.eval.clone(), f.d1.clone());
    let big_fe = big_f.eval.clone();
    let p = Fn2::new(
        rect,
        move |s, t| t / 2.0 - big_fe(s),
        move |s, _| -fe(s),
        |_, _| 0.5,
        move |s, _| -fd1(s),
        |_, _| 0.0,
        |_, _| 0.0,
    )?;

    let half = Fn1::new(t_dom, |t| t / 2.0, |_| 0.5, |_| 0.0)?;
    let sep = Separable {
        b: half,
        gamma: big_f,
    };
    let pfunction = with_optional_separable(p, MuKind::PtTimesTSquared, sep)?;

    Ok(PaperExample {
        criterion_rect: Some(Rect::new(f.domain(), Interval::new(0.0, 4.0)?)),
        equation: EquationSpec::Semilinear { f },
        pfunction,
        route: CriterionRoute::CorollaryVariant2,
    })
}

fn build_ex2(f: Fn1) -> Result<PaperExample, FuncError> {
    if !f.domain().contains(0.0) {
        return Err(FuncError::BadParams(
            "the quartic candidate integrates from 0; the domain of f must contain it".into(),
        ));
    }
    // The construction needs f·f' of a single sign. Sample the product and
    // classify; reject mixed signs rather than guessing a branch.
    let samples = f.domain().sample(super::PROBE_1D);
    let mut max_abs: f64 = 0.0;
    let mut prods = Vec::with_capacity(samples.len());
    for &x in &samples {
        let prod = f.eval(x)? * f.d1(x)?;
        max_abs = max_abs.max(prod.abs());
        prods.push(prod);
    }
    let slack = 1e-12 * (1.0 + max_abs);
    let any_pos = prods.iter().any(|&p| p > slack);
    let any_neg = prods.iter().any(|&p| p < -slack);
    let sigma = match (any_pos, any_neg) {
        (true, true) => {
            return Err(FuncError::BadParams(
                "f*f' changes sign on the declared domain".into(),
            ))
        }
        (false, true) => -1.0,
        _ => 1.0,
    };

    let (fe, fd1) = (f.eval.clone(), f.d1.clone());
    let m: Scalar1 = Arc::new(move |z: f64| (sigma * fe(z) * fd1(z)).max(0.0).sqrt());
    let inner: Scalar1 = {
        let m = m.clone();
        Arc::new(move |y: f64| {
            quad::integrate(|z| m(z), 0.0, y, quad::DEFAULT_TOL).unwrap_or(f64::NAN)
        })
    };
    let q: Scalar1 = {
        let inner = inner.clone();
        Arc::new(move |s: f64| {
            let r2 = |y: f64| {
                let r = inner(y);
                r * r
            };
            sigma * 2.0 * quad::integrate(r2, 0.0, s, quad::DEFAULT_TOL).unwrap_or(f64::NAN)
        })
    };

    let t_dom = Interval::new(0.0, 16.0)?;
    let rect = Rect::new(f.domain(), t_dom);
    let p = {
        let q = q.clone();
        let inner_s = inner.clone();
        let inner_ss = inner.clone();
        let m_ss = m.clone();
        Fn2::new(
            rect,
            move |s, t| t * t / 2.0 + q(s),
            move |s, _| {
                let r = inner_s(s);
                sigma * 2.0 * r * r
            },
            |_, t| t,
            move |s, _| sigma * 4.0 * inner_ss(s) * m_ss(s),
            |_, _| 0.0,
            |_, _| 1.0,
        )?
    };

    let b = Fn1::new(t_dom, |t| t * t / 2.0, |t| t, |_| 1.0)?;
    let gamma = {
        let (qe, ri, rm) = (q.clone(), inner.clone(), m.clone());
        let r2 = inner.clone();
        Fn1::new(
            f.domain(),
            move |s| -qe(s),
            move |s| {
                let r = ri(s);
                -sigma * 2.0 * r * r
            },
            move |s| -sigma * 4.0 * r2(s) * rm(s),
        )?
    };
    let pfunction = with_optional_separable(p, MuKind::PtTimesTSquared, Separable { b, gamma })?;

    Ok(PaperExample {
        equation: EquationSpec::Semilinear { f: f.clone() },
        pfunction,
        route: CriterionRoute::CorollaryVariant2,
        criterion_rect: Some(Rect::new(f.domain(), Interval::new(0.0, 4.0)?)),
    })
}

fn build_ex3(k: f64, lambda: f64, c: f64) -> Result<PaperExample, FuncError> {
    if !(k.is_finite() && lambda.is_finite() && c.is_finite()) {
        return Err(FuncError::BadParams("k, lambda, c must be finite".into()));
    }
    let s_dom = Interval::new(-3.0, 3.0)?;
    let t_dom = Interval::new(0.0, 9.0)?;
    let rect = Rect::new(s_dom, t_dom);

    // Right-hand side F(s,t) = s(kt + λe^{−cs²}).
    let rhs = Fn2::new(
        rect,
        move |s, t| s * (k * t + lambda * (-c * s * s).exp()),
        move |s, t| k * t + lambda * (-c * s * s).exp() * (1.0 - 2.0 * c * s * s),
        move |s, _| k * s,
        move |s, _| lambda * (-c * s * s).exp() * (-2.0 * c * s) * (3.0 - 2.0 * c * s * s),
        move |_, _| k,
        |_, _| 0.0,
    )?;

    let p = if k == -c {
        // Degenerate weight: P = t·e^{cs²} − λs².
        Fn2::new(
            rect,
            move |s, t| t * (c * s * s).exp() - lambda * s * s,
            move |s, t| 2.0 * c * s * t * (c * s * s).exp() - 2.0 * lambda * s,
            move |s, _| (c * s * s).exp(),
            move |s, t| {
                let e = (c * s * s).exp();
                2.0 * c * t * e + 4.0 * c * c * s * s * t * e - 2.0 * lambda
            },
            move |s, _| 2.0 * c * s * (c * s * s).exp(),
            |_, _| 0.0,
        )?
    } else {
        // P = t·e^{−ks²} + (λ/(k+c))·e^{−(k+c)s²}.
        let a = lambda / (k + c);
        let kc = k + c;
        Fn2::new(
            rect,
            move |s, t| t * (-k * s * s).exp() + a * (-kc * s * s).exp(),
            move |s, t| {
                -2.0 * k * s * t * (-k * s * s).exp() - 2.0 * lambda * s * (-kc * s * s).exp()
            },
            move |s, _| (-k * s * s).exp(),
            move |s, t| {
                let e1 = (-k * s * s).exp();
                let e2 = (-kc * s * s).exp();
                t * e1 * (4.0 * k * k * s * s - 2.0 * k)
                    + lambda * e2 * (4.0 * kc * s * s - 2.0)
            },
            move |s, _| -2.0 * k * s * (-k * s * s).exp(),
            |_, _| 0.0,
        )?
    };

    let pfunction = PFunctionSpec::new(p, MuKind::UnitMu, None)?;
    Ok(PaperExample {
        equation: EquationSpec::GradientSemilinear { f: rhs },
        pfunction,
        route: CriterionRoute::External,
        criterion_rect: None,
    })
}

fn build_ex4(g: Fn1) -> Result<PaperExample, FuncError> {
    let s_dom = Interval::new(-3.0, 3.0)?;
    let t_dom = Interval::new(0.0, 9.0)?;
    // The right-hand side reads g at t − s; the whole range must be covered.
    for z in [t_dom.lo() - s_dom.hi(), t_dom.hi() - s_dom.lo()] {
        if !g.domain().contains(z) {
            return Err(FuncError::BadParams(format!(
                "domain of G must cover [{}, {}]",
                t_dom.lo() - s_dom.hi(),
                t_dom.hi() - s_dom.lo()
            )));
        }
    }
    let rect = Rect::new(s_dom, t_dom);
    let (ge, g1, g2a, g2b) = (g.eval.clone(), g.d1.clone(), g.d2.clone(), g.d2.clone());
    let g1b = g.d1.clone();
    let g2c = g.d2.clone();
    let rhs = Fn2::new(
        rect,
        move |s, t| ge(t - s),
        move |s, t| -g1(t - s),
        move |s, t| g1b(t - s),
        move |s, t| g2a(t - s),
        move |s, t| -g2b(t - s),
        move |s, t| g2c(t - s),
    )?;

    let p = Fn2::new(
        rect,
        |s, t| t - s,
        |_, _| -1.0,
        |_, _| 1.0,
        |_, _| 0.0,
        |_, _| 0.0,
        |_, _| 0.0,
    )?;
    let b = Fn1::new(t_dom, |t| t, |_| 1.0, |_| 0.0)?;
    let gamma = Fn1::new(s_dom, |s| s, |_| 1.0, |_| 0.0)?;
    let pfunction =
        with_optional_separable(p, MuKind::PtTimesTSquared, Separable { b, gamma })?;

    Ok(PaperExample {
        equation: EquationSpec::GradientSemilinear { f: rhs },
        pfunction,
        route: CriterionRoute::TheoremBoth,
        criterion_rect: Some(Rect::new(s_dom, Interval::new(0.0, 3.0)?)),
    })
}

fn build_ex5(phi: Fn1, rho: Fn1, potential: Fn1) -> Result<PaperExample, FuncError> {
    let t_dom = phi.domain();
    if !t_dom.contains(0.0) {
        return Err(FuncError::BadParams(
            "the domain of Phi must contain 0 (Q integrates from 0)".into(),
        ));
    }
    if !(rho.domain().contains(t_dom.lo()) && rho.domain().contains(t_dom.hi())) {
        return Err(FuncError::BadParams(
            "the domain of rho must cover the domain of Phi".into(),
        ));
    }
    // Ellipticity: Φ' > 0, ρ > 0, Φ' + 2tΦ'' > 0 for t ≥ 0.
    for &t in &t_dom.sample(super::PROBE_1D) {
        if t < 0.0 {
            continue;
        }
        let (p1, p2, r) = (phi.d1(t)?, phi.d2(t)?, rho.eval(t)?);
        if !(p1 > 0.0 && r > 0.0 && p1 + 2.0 * t * p2 > 0.0) {
            return Err(FuncError::BadParams(format!(
                "ellipticity fails at t = {t}: Phi' = {p1:e}, rho = {r:e}, Phi' + 2t Phi'' = {:e}",
                p1 + 2.0 * t * p2
            )));
        }
    }

    let q_raw: Scalar1 = {
        let (p1, p2, re) = (phi.d1.clone(), phi.d2.clone(), rho.eval.clone());
        Arc::new(move |y: f64| (p1(y) + 2.0 * y * p2(y)) / re(y))
    };
    let q_int = {
        let (a, b, c) = (q_raw.clone(), q_raw.clone(), q_raw.clone());
        Fn1::new(
            t_dom,
            move |y| a(y),
            move |y| richardson_d1(&b, y),
            move |y| richardson_d2(&c, y),
        )?
    };
    let q = Fn1::antiderivative_of(&q_int, 0.0, 0.0)?;

    let s_dom = potential.domain();
    let rect = Rect::new(s_dom, t_dom);
    let p = {
        let qe = q.eval.clone();
        let (pe, pd1, pd2) = (
            potential.eval.clone(),
            potential.d1.clone(),
            potential.d2.clone(),
        );
        let (qr1, qr2) = (q_raw.clone(), q_raw.clone());
        Fn2::new(
            rect,
            move |s, t| qe(t) - 2.0 * pe(s),
            move |s, _| -2.0 * pd1(s),
            move |_, t| qr1(t),
            move |s, _| -2.0 * pd2(s),
            |_, _| 0.0,
            move |_, t| richardson_d1(&qr2, t),
        )?
    };

    let gamma = {
        let (pe, pd1, pd2) = (
            potential.eval.clone(),
            potential.d1.clone(),
            potential.d2.clone(),
        );
        Fn1::new(
            s_dom,
            move |s| 2.0 * pe(s),
            move |s| 2.0 * pd1(s),
            move |s| 2.0 * pd2(s),
        )?
    };
    let pfunction = with_optional_separable(p, MuKind::UnitMu, Separable { b: q, gamma })?;

    Ok(PaperExample {
        equation: EquationSpec::DivergenceForm {
            phi,
            rho,
            potential,
        },
        pfunction,
        route: CriterionRoute::External,
        criterion_rect: None,
    })
}

/// `∫₀ᵘ (∫₀ʸ √(−W'W'') dz)² dy` for the power-law potential `W(v) = a·vᵏ`
/// with `a > 0`, `k ∈ (0,1)`, `k ≠ ½`. The inner integrand `∝ z^{k−3/2}` is
/// singular at 0, so the inner integral uses the endpoint-avoiding rule; the
/// outer integrand is bounded and uses plain adaptive quadrature.
pub fn power_well_double_integral(a: f64, k: f64, u: f64) -> Result<f64, FuncError> {
    if !(a > 0.0 && k > 0.0 && k < 1.0 && (k - 0.5).abs() > 1e-9 && u > 0.0) {
        return Err(FuncError::BadParams(
            "requires a > 0, k in (0,1) with k != 1/2, u > 0".into(),
        ));
    }
    // −W'W'' = a²k²(1−k)·z^{2k−3}, so √(−W'W'') = a·k·√(1−k)·z^{k−3/2}.
    let coeff = a * k * (1.0 - k).sqrt();
    let expo = k - 1.5;
    let inner = move |y: f64| -> Result<f64, FuncError> {
        if y == 0.0 {
            return Ok(0.0);
        }
        quad::integrate_singular(|z| coeff * z.powf(expo), 0.0, y, quad::DEFAULT_TOL)
    };
    quad::integrate(
        |y| {
            let r = inner(y).unwrap_or(f64::NAN);
            r * r
        },
        0.0,
        u,
        quad::DEFAULT_TOL,
    )
}

/// Closed form of [`power_well_double_integral`]:
/// `a²k(1−k)/(2(k−½)²) · u^{2k}`.
pub fn power_well_double_integral_closed_form(a: f64, k: f64, u: f64) -> f64 {
    a * a * k * (1.0 - k) / (2.0 * (k - 0.5).powi(2)) * u.powf(2.0 * k)
}

/// Named scalar functions addressable from CLI configs and tests.
///
/// Every entry carries analytic first and second derivatives.
pub fn scalar_builtin(name: &str) -> Result<Fn1, FuncError> {
    let iv = |lo, hi| Interval::new(lo, hi);
    match name {
        "double_well_prime" => Fn1::new(
            iv(-3.0, 3.0)?,
            |s| s * s * s - s,
            |s| 3.0 * s * s - 1.0,
            |s| 6.0 * s,
        ),
        "exp" => Fn1::new(iv(-4.0, 4.0)?, f64::exp, f64::exp, f64::exp),
        "exp_neg" => Fn1::new(
            iv(-4.0, 4.0)?,
            |s| (-s).exp(),
            |s| -(-s).exp(),
            |s| (-s).exp(),
        ),
        "half_tanh" => Fn1::new(
            iv(-30.0, 30.0)?,
            |z| z.tanh() / 2.0,
            |z| {
                let t = z.tanh();
                (1.0 - t * t) / 2.0
            },
            |z| {
                let t = z.tanh();
                -t * (1.0 - t * t)
            },
        ),
        "identity" => Fn1::new(iv(-16.0, 16.0)?, |s| s, |_| 1.0, |_| 0.0),
        "neg_exp_neg" => Fn1::new(
            iv(-4.0, 4.0)?,
            |s| -(-s).exp(),
            |s| (-s).exp(),
            |s| -(-s).exp(),
        ),
        "one" => Fn1::new(iv(-16.0, 16.0)?, |_| 1.0, |_| 0.0, |_| 0.0),
        "phi_linear" => Fn1::new(iv(-1.0, 16.0)?, |t| t, |_| 1.0, |_| 0.0),
        "phi_quadratic" => Fn1::new(
            iv(-0.25, 16.0)?,
            |t| t + t * t / 2.0,
            |t| 1.0 + t,
            |_| 1.0,
        ),
        "quarter_double_well" => Fn1::new(
            iv(-3.0, 3.0)?,
            |s| 0.25 * (1.0 - s * s).powi(2),
            |s| s * s * s - s,
            |s| 3.0 * s * s - 1.0,
        ),
        "rho_linear" => Fn1::new(iv(-0.25, 16.0)?, |t| 1.0 + t, |_| 1.0, |_| 0.0),
        "singular_power_b" => Fn1::new(
            iv(0.9, 8.1)?,
            |s| -4.0 / 3.0 * s.powf(-5.0 / 3.0),
            |s| 20.0 / 9.0 * s.powf(-8.0 / 3.0),
            |s| -160.0 / 27.0 * s.powf(-11.0 / 3.0),
        ),
        other => Err(FuncError::BadParams(format!(
            "unknown scalar function '{other}'"
        ))),
    }
}

/// Sorted list of the names [`scalar_builtin`] accepts.
pub fn scalar_builtin_names() -> &'static [&'static str] {
    &[
        "double_well_prime",
        "exp",
        "exp_neg",
        "half_tanh",
        "identity",
        "neg_exp_neg",
        "one",
        "phi_linear",
        "phi_quadratic",
        "quarter_double_well",
        "rho_linear",
        "singular_power_b",
    ]
}

fn richardson_d1(f: &Scalar1, x: f64) -> f64 {
    let h = 1e-4 * (1.0 + x.abs());
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn richardson_d2(f: &Scalar1, x: f64) -> f64 {
    let h = 1e-3 * (1.0 + x.abs());
    let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}
