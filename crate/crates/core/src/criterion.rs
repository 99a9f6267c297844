//! The pointwise criterion: the quantity `I`, the two hypothesis sets of the
//! main theorem, and the semilinear corollary.
//!
//! Conventions. A candidate `P` is a function of `(s, t)` where `s` stands for
//! the solution value and the second slot holds the *squared* gradient. The
//! criterion quantities are stated in terms of the gradient magnitude `t`, so
//! every partial of `P` (and of the right-hand side `F`) below is evaluated at
//! `(s, t²)` — the substitution happens here, not in the function handles.
//!
//! Each check samples a rectangle in `(s, t)`: a uniform tensor grid plus a
//! fixed batch of seeded uniform random interior points, so violations that
//! sit off the grid are still caught reproducibly. Every subcheck reports a
//! *normalized* worst residual — the raw quantity divided by `1 +` the local
//! magnitudes of its summands — and passes iff that worst value is `≥ −tol`.
//! The conditions mix terms of very different orders in `t`, and normalizing
//! keeps one tolerance meaningful across the whole rectangle. Subchecks are
//! all evaluated at all samples; nothing short-circuits, so a report always
//! shows the state of every condition.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::funcalg::{Fn1, Fn2, FuncError, Rect};

/// Number of seeded random interior samples added to the tensor grid.
const RANDOM_SAMPLES: usize = 1000;

/// Seed for the random sample batch; fixed so verdicts are reproducible.
const SAMPLE_SEED: u64 = 0x5EED;

#[derive(Debug, Error)]
pub enum CriterionError {
    #[error(transparent)]
    Func(#[from] FuncError),
    /// The semilinear corollary divides by `P_t`; a nonpositive `P_t` at a
    /// sample with `t > 0` means the corollary does not apply to the candidate.
    #[error("P_t = {pt:e} is not positive at (s, t) = ({s}, {t}) with t > 0")]
    PtNonPositive { s: f64, t: f64, pt: f64 },
}

/// One named condition of a verdict, with its worst normalized residual and
/// where it was attained.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Subcheck {
    pub name: String,
    pub pass: bool,
    pub worst_value: f64,
    pub location: (f64, f64),
}

/// Outcome of sampling one hypothesis set over a rectangle.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionVerdict {
    /// True iff every subcheck's worst value is `≥ −tol`.
    pub pass: bool,
    /// Smallest normalized residual across all subchecks.
    pub min_residual: f64,
    /// Sample `(s, t)` attaining `min_residual`.
    pub argmin: (f64, f64),
    pub samples_checked: usize,
    pub subchecks: Vec<Subcheck>,
    /// For the corollary check: which variant the verdict reflects, when one
    /// passed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

/// Running (value, location) minimum with a deterministic tie-break: on equal
/// values the lexicographically smaller `(s, t)` wins, so the verdict does not
/// depend on evaluation order.
struct Worst {
    value: f64,
    at: (f64, f64),
}

impl Worst {
    fn new(rect: Rect) -> Self {
        // Start above any clamped residual, located at the lex-smallest corner
        // so a vacuous subcheck still reports a finite, in-rectangle location.
        Worst {
            value: f64::INFINITY,
            at: (rect.s.lo(), rect.t.lo()),
        }
    }

    fn update(&mut self, value: f64, s: f64, t: f64) {
        if value < self.value || (value == self.value && (s, t) < self.at) {
            self.value = value;
            self.at = (s, t);
        }
    }

    fn into_subcheck(self, name: &str, tol: f64) -> Subcheck {
        let value = if self.value == f64::INFINITY {
            f64::MAX
        } else {
            self.value
        };
        Subcheck {
            name: name.to_string(),
            pass: value >= -tol,
            worst_value: value,
            location: self.at,
        }
    }
}

fn assemble(subchecks: Vec<Subcheck>, samples_checked: usize, variant: Option<String>) -> CriterionVerdict {
    let pass = subchecks.iter().all(|c| c.pass);
    let mut min_residual = f64::INFINITY;
    let mut argmin = subchecks[0].location;
    for c in &subchecks {
        if c.worst_value < min_residual
            || (c.worst_value == min_residual && c.location < argmin)
        {
            min_residual = c.worst_value;
            argmin = c.location;
        }
    }
    CriterionVerdict {
        pass,
        min_residual,
        argmin,
        samples_checked,
        subchecks,
        variant,
    }
}

/// Tensor grid on `rect` (inclusive of edges) plus the seeded random batch.
fn sample_points(rect: Rect, n_s: usize, n_t: usize) -> Result<Vec<(f64, f64)>, CriterionError> {
    if n_s < 2 || n_t < 2 {
        return Err(FuncError::BadParams(format!(
            "sampling needs at least 2 points per axis, got {n_s} x {n_t}"
        ))
        .into());
    }
    if rect.t.lo() < 0.0 {
        return Err(FuncError::BadParams(format!(
            "t axis must lie in [0, inf), got lower edge {}",
            rect.t.lo()
        ))
        .into());
    }
    let mut points = Vec::with_capacity(n_s * n_t + RANDOM_SAMPLES);
    for &s in &rect.s.sample(n_s) {
        for &t in &rect.t.sample(n_t) {
            points.push((s, t));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..RANDOM_SAMPLES {
        let s = rng.gen_range(rect.s.lo()..rect.s.hi());
        let t = rng.gen_range(rect.t.lo()..rect.t.hi());
        points.push((s, t));
    }
    Ok(points)
}

/// Clamp an exactly infinite quantity (the corollary's `P_s²/(2P_t)` at
/// `P_t = 0`) to the largest finite float so reports stay serializable, and
/// normalize everything else by the local scale.
fn normalized(q: f64, scale: f64) -> f64 {
    if q == f64::INFINITY {
        f64::MAX
    } else if q == f64::NEG_INFINITY {
        -f64::MAX
    } else {
        q / scale
    }
}

struct Terms {
    value: f64,
    scale: f64,
}

/// The four summands of `I(s, t)`, with all partials taken at `(s, t²)`.
fn i_terms(p: &Fn2, f: &Fn2, s: f64, t: f64) -> Result<Terms, FuncError> {
    let tau = t * t;
    let ps = p.ds(s, tau)?;
    let pt = p.dt(s, tau)?;
    let fv = f.eval(s, tau)?;
    let fs = f.ds(s, tau)?;
    let ft = f.dt(s, tau)?;
    let a = pt * ps * fv;
    let b = 0.5 * ps * ps;
    let c = 2.0 * tau * pt * pt * fs;
    let d = -2.0 * tau * pt * ps * ft;
    Ok(Terms {
        value: a + b + c + d,
        scale: 1.0 + a.abs() + b.abs() + c.abs() + d.abs(),
    })
}

/// The quantity
/// `I(s,t) = P_t P_s F + P_s²/2 + 2 t² P_t² F_s − 2 t² P_t P_s F_t`,
/// every factor evaluated at `(s, t²)`.
///
/// Requires `t ≥ 0` and `(s, t²)` inside both declared rectangles.
pub fn eval_i(p: &Fn2, f: &Fn2, s: f64, t: f64) -> Result<f64, CriterionError> {
    if t < 0.0 {
        return Err(FuncError::BadParams(format!("t must be >= 0, got {t}")).into());
    }
    Ok(i_terms(p, f, s, t)?.value)
}

/// The second hypothesis set's scalar condition,
/// `t² P_ss(s,t²) P_t(s,t²) + I(s,t)`, unnormalized.
pub fn hypothesis2_quantity(p: &Fn2, f: &Fn2, s: f64, t: f64) -> Result<f64, CriterionError> {
    if t < 0.0 {
        return Err(FuncError::BadParams(format!("t must be >= 0, got {t}")).into());
    }
    let tau = t * t;
    let pss = p.dss(s, tau)?;
    let pt = p.dt(s, tau)?;
    Ok(tau * pss * pt + i_terms(p, f, s, t)?.value)
}

/// PSD residual of the symmetric 2x2 block `[[pss, pst], [pst, ptt]]`:
/// `min(trace, det / (1 + ‖H‖_∞))`, nonnegative iff the matrix is PSD up to
/// the determinant's natural quadratic scale.
fn psd_residual(pss: f64, pst: f64, ptt: f64) -> f64 {
    let trace = pss + ptt;
    let det = pss * ptt - pst * pst;
    let norm_inf = f64::max(pss.abs() + pst.abs(), pst.abs() + ptt.abs());
    f64::min(trace, det / (1.0 + norm_inf))
}

/// First hypothesis set: the `(s, t)`-Hessian of `P` is positive semidefinite
/// and `I ≥ 0` over the rectangle.
pub fn check_hypothesis1(
    p: &Fn2,
    f: &Fn2,
    rect: Rect,
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<CriterionVerdict, CriterionError> {
    let points = sample_points(rect, n_s, n_t)?;
    let mut psd = Worst::new(rect);
    let mut quantity = Worst::new(rect);
    for &(s, t) in &points {
        let tau = t * t;
        let pss = p.dss(s, tau)?;
        let pst = p.dst(s, tau)?;
        let ptt = p.dtt(s, tau)?;
        psd.update(psd_residual(pss, pst, ptt), s, t);
        let i = i_terms(p, f, s, t)?;
        quantity.update(normalized(i.value, i.scale), s, t);
    }
    Ok(assemble(
        vec![
            psd.into_subcheck("hessian_psd", tol),
            quantity.into_subcheck("quantity_i", tol),
        ],
        points.len(),
        None,
    ))
}

/// Second hypothesis set: `P_t > 0`, `P_st = 0`, `P_tt ≥ 0`, and
/// `t² P_ss P_t + I ≥ 0` over the rectangle.
///
/// The sign condition on `P_t` is checked at samples with `t > 0` only; the
/// quantity is insensitive to the substitution `P ↦ −P` there, so without the
/// gate a flipped candidate would sail through.
pub fn check_hypothesis2(
    p: &Fn2,
    f: &Fn2,
    rect: Rect,
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<CriterionVerdict, CriterionError> {
    let points = sample_points(rect, n_s, n_t)?;
    let mut pt_sign = Worst::new(rect);
    let mut pst_zero = Worst::new(rect);
    let mut ptt_sign = Worst::new(rect);
    let mut quantity = Worst::new(rect);
    for &(s, t) in &points {
        let tau = t * t;
        let pt = p.dt(s, tau)?;
        let pss = p.dss(s, tau)?;
        let pst = p.dst(s, tau)?;
        let ptt = p.dtt(s, tau)?;
        if t > 0.0 {
            pt_sign.update(pt, s, t);
        }
        pst_zero.update(-pst.abs(), s, t);
        ptt_sign.update(ptt, s, t);
        let i = i_terms(p, f, s, t)?;
        let main = tau * pss * pt;
        quantity.update(
            normalized(main + i.value, i.scale + main.abs()),
            s,
            t,
        );
    }
    Ok(assemble(
        vec![
            pt_sign.into_subcheck("pt_positive", tol),
            pst_zero.into_subcheck("pst_zero", tol),
            ptt_sign.into_subcheck("ptt_nonneg", tol),
            quantity.into_subcheck("quantity_total", tol),
        ],
        points.len(),
        None,
    ))
}

/// The corollary's normalized quantity for `Δu = f(u)`:
/// `P_s f + P_s²/(2P_t) + 2 P_t t² f′`, partials at `(s, t²)`.
///
/// Where `P_t = 0` (possible at `t = 0`) the middle term is taken as `+∞`
/// when `P_s ≠ 0` — the condition holds vacuously there — and `0` when
/// `P_s = 0`.
pub fn eval_i_corollary(p: &Fn2, f: &Fn1, s: f64, t: f64) -> Result<f64, CriterionError> {
    if t < 0.0 {
        return Err(FuncError::BadParams(format!("t must be >= 0, got {t}")).into());
    }
    Ok(corollary_terms(p, f, s, t)?.value)
}

fn corollary_terms(p: &Fn2, f: &Fn1, s: f64, t: f64) -> Result<Terms, FuncError> {
    let tau = t * t;
    let ps = p.ds(s, tau)?;
    let pt = p.dt(s, tau)?;
    let fv = f.eval(s)?;
    let fp = f.d1(s)?;
    let a = ps * fv;
    let b = if pt == 0.0 {
        if ps == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        0.5 * ps * ps / pt
    };
    let c = 2.0 * pt * tau * fp;
    let scale = if b.is_finite() {
        1.0 + a.abs() + b.abs() + c.abs()
    } else {
        1.0 + a.abs() + c.abs()
    };
    Ok(Terms {
        value: a + b + c,
        scale,
    })
}

/// Semilinear corollary for `Δu = f(u)`, both variants.
///
/// Variant 1 pairs the PSD condition with the corollary quantity; variant 2
/// pairs `P_st = 0`, `P_tt ≥ 0` with `t² P_ss + ` the same quantity. The
/// verdict returned is the passing variant (the one with the larger residual
/// margin when both pass, variant 2 on ties), and `variant` records which.
///
/// Errors with [`CriterionError::PtNonPositive`] as soon as `P_t ≤ 0` shows
/// up at a sample with `t > 0`: the corollary's quantity divides by `P_t` and
/// is meaningless for such candidates.
pub fn check_corollary_semilinear(
    p: &Fn2,
    f: &Fn1,
    rect: Rect,
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<CriterionVerdict, CriterionError> {
    let points = sample_points(rect, n_s, n_t)?;
    let mut psd = Worst::new(rect);
    let mut quantity_i = Worst::new(rect);
    let mut pst_zero = Worst::new(rect);
    let mut ptt_sign = Worst::new(rect);
    let mut quantity_total = Worst::new(rect);
    for &(s, t) in &points {
        let tau = t * t;
        let pt = p.dt(s, tau)?;
        if t > 0.0 && pt <= 0.0 {
            return Err(CriterionError::PtNonPositive { s, t, pt });
        }
        let pss = p.dss(s, tau)?;
        let pst = p.dst(s, tau)?;
        let ptt = p.dtt(s, tau)?;
        let ic = corollary_terms(p, f, s, t)?;
        psd.update(psd_residual(pss, pst, ptt), s, t);
        quantity_i.update(normalized(ic.value, ic.scale), s, t);
        pst_zero.update(-pst.abs(), s, t);
        ptt_sign.update(ptt, s, t);
        let main = tau * pss;
        quantity_total.update(
            normalized(main + ic.value, ic.scale + main.abs()),
            s,
            t,
        );
    }
    let n = points.len();
    let v1 = assemble(
        vec![
            psd.into_subcheck("hessian_psd", tol),
            quantity_i.into_subcheck("quantity_i", tol),
        ],
        n,
        Some("variant1".to_string()),
    );
    let v2 = assemble(
        vec![
            pst_zero.into_subcheck("pst_zero", tol),
            ptt_sign.into_subcheck("ptt_nonneg", tol),
            quantity_total.into_subcheck("quantity_total", tol),
        ],
        n,
        Some("variant2".to_string()),
    );
    let mut best = if v1.pass != v2.pass {
        if v1.pass {
            v1
        } else {
            v2
        }
    } else if v2.min_residual >= v1.min_residual {
        v2
    } else {
        v1
    };
    if !best.pass {
        best.variant = None;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::examples::{paper_example, scalar_builtin, ExampleId};
    use crate::funcalg::Interval;
    use proptest::prelude::*;

    fn wide_rect() -> Rect {
        Rect::new(
            Interval::new(-4.0, 4.0).unwrap(),
            Interval::new(0.0, 16.0).unwrap(),
        )
    }

    /// P(s, tau) = tau: the candidate whose criterion quantity isolates f'.
    fn p_gradient_squared() -> Fn2 {
        Fn2::new(
            wide_rect(),
            |_, t| t,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap()
    }

    fn zero_rhs() -> Fn2 {
        Fn2::new(
            wide_rect(),
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap()
    }

    fn lifted(f: &str) -> Fn2 {
        let f = scalar_builtin(f).unwrap();
        Fn2::of_s(&f, Interval::new(0.0, 16.0).unwrap()).unwrap()
    }

    #[test]
    fn eval_i_reduces_to_stability_quantity_for_p_equals_t() {
        let p = p_gradient_squared();
        let f_lin = lifted("identity");
        // P_s = 0, P_t = 1: I collapses to 2 t^2 f'(s).
        assert_eq!(eval_i(&p, &f_lin, 0.7, 2.0).unwrap(), 8.0);
        let f_exp = lifted("exp");
        for i in 0..40 {
            let s = -2.0 + 4.0 * (i as f64) / 39.0;
            for j in 0..25 {
                let t = 2.0 * (j as f64) / 24.0;
                let got = eval_i(&p, &f_exp, s, t).unwrap();
                let expect = 2.0 * t * t * s.exp();
                assert!(
                    (got - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
                    "I mismatch at ({s}, {t}): {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn eval_i_vanishes_for_constant_p() {
        let p = Fn2::new(
            wide_rect(),
            |_, _| 3.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let f = lifted("exp");
        for &(s, t) in &[(0.0f64, 0.0), (-1.3, 0.7), (2.0, 3.9)] {
            assert_eq!(eval_i(&p, &f, s, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_i_matches_frozen_sine_oracle() {
        // P = t/2 - F0(s) with F0' = sin: I = t^2 cos(s) / 2.
        let p = Fn2::new(
            wide_rect(),
            |s: f64, t: f64| 0.5 * t - (1.0 - s.cos()),
            |s: f64, _| -s.sin(),
            |_, _| 0.5,
            |s: f64, _| -s.cos(),
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let f = Fn1::new(
            Interval::new(-4.0, 4.0).unwrap(),
            |s: f64| s.sin(),
            |s: f64| s.cos(),
            |s: f64| -s.sin(),
        )
        .unwrap();
        let f2 = Fn2::of_s(&f, Interval::new(0.0, 16.0).unwrap()).unwrap();
        let got = eval_i(&p, &f2, 1.0, 1.0).unwrap();
        let frozen = 0.27015115293406986; // cos(1) / 2
        assert!((got - frozen).abs() < 1e-14, "got {got}");
    }

    #[test]
    fn eval_i_rejects_negative_t() {
        let p = p_gradient_squared();
        let f = lifted("identity");
        assert!(matches!(
            eval_i(&p, &f, 0.0, -1.0),
            Err(CriterionError::Func(FuncError::BadParams(_)))
        ));
    }

    fn rect_st(s0: f64, s1: f64, t1: f64) -> Rect {
        Rect::new(
            Interval::new(s0, s1).unwrap(),
            Interval::new(0.0, t1).unwrap(),
        )
    }

    #[test]
    fn hypothesis1_accepts_convex_quadratic() {
        let p = Fn2::new(
            wide_rect(),
            |s, t| 0.5 * t * t + s * s,
            |s, _| 2.0 * s,
            |_, t| t,
            |_, _| 2.0,
            |_, _| 0.0,
            |_, _| 1.0,
        )
        .unwrap();
        let v = check_hypothesis1(&p, &zero_rhs(), rect_st(-2.0, 2.0, 2.0), 21, 17, 1e-9).unwrap();
        assert!(v.pass);
        assert_eq!(v.samples_checked, 21 * 17 + 1000);
        assert_eq!(v.subchecks.len(), 2);
        assert_eq!(v.subchecks[0].name, "hessian_psd");
        assert_eq!(v.subchecks[1].name, "quantity_i");
        assert!(v.subchecks.iter().all(|c| c.pass));
        assert!(v.min_residual >= 0.0);
    }

    #[test]
    fn hypothesis1_rejects_indefinite_hessian() {
        // P = s * t has Hessian [[0, 1], [1, 0]], eigenvalues +/- 1.
        let p = Fn2::new(
            wide_rect(),
            |s, t| s * t,
            |_, t| t,
            |s, _| s,
            |_, _| 0.0,
            |_, _| 1.0,
            |_, _| 0.0,
        )
        .unwrap();
        let v = check_hypothesis1(&p, &zero_rhs(), rect_st(-2.0, 2.0, 2.0), 11, 11, 1e-9).unwrap();
        assert!(!v.pass);
        let psd = &v.subchecks[0];
        assert!(!psd.pass && psd.worst_value < -0.4);
        // I = P_s^2 / 2 >= 0 still holds; only the Hessian condition fails.
        assert!(v.subchecks[1].pass);
        assert!(v.min_residual < -0.4);
    }

    #[test]
    fn hypothesis1_passes_gradient_dependent_example() {
        // P = t - s against F = G(t^2 - s) with G bounded by 1/2:
        // I = 1/2 - G(...) stays nonnegative and the Hessian is identically 0.
        let ex = paper_example(ExampleId::Ex4 {
            g: scalar_builtin("half_tanh").unwrap(),
        })
        .unwrap();
        let f = ex
            .equation
            .gradient_rhs(ex.pfunction.p.domain().t)
            .unwrap()
            .unwrap();
        let rect = ex.criterion_rect.unwrap();
        let v = check_hypothesis1(&ex.pfunction.p, &f, rect, 31, 31, 1e-9).unwrap();
        assert!(v.pass, "min residual {}", v.min_residual);
    }

    #[test]
    fn hypothesis2_quantity_vanishes_identically_for_modica_form() {
        let ex = paper_example(ExampleId::Ex1 {
            f: scalar_builtin("double_well_prime").unwrap(),
            offset: 0.0,
        })
        .unwrap();
        let f = ex
            .equation
            .gradient_rhs(ex.pfunction.p.domain().t)
            .unwrap()
            .unwrap();
        let mut worst: f64 = 0.0;
        for &s in &Interval::new(-2.0, 2.0).unwrap().sample(50) {
            for &t in &Interval::new(0.0, 2.0).unwrap().sample(50) {
                let q = hypothesis2_quantity(&ex.pfunction.p, &f, s, t).unwrap();
                worst = worst.max(q.abs());
            }
        }
        assert!(worst <= 1e-12, "worst |quantity| = {worst:e}");
    }

    #[test]
    fn hypothesis2_passes_modica_form() {
        let ex = paper_example(ExampleId::Ex1 {
            f: scalar_builtin("double_well_prime").unwrap(),
            offset: 0.0,
        })
        .unwrap();
        let f = ex
            .equation
            .gradient_rhs(ex.pfunction.p.domain().t)
            .unwrap()
            .unwrap();
        let v = check_hypothesis2(&ex.pfunction.p, &f, rect_st(-2.0, 2.0, 2.0), 41, 41, 1e-9).unwrap();
        assert!(v.pass);
        let names: Vec<&str> = v.subchecks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            ["pt_positive", "pst_zero", "ptt_nonneg", "quantity_total"]
        );
        assert_eq!(v.samples_checked, 41 * 41 + 1000);
        assert!(v.min_residual.abs() <= 1e-12);
    }

    #[test]
    fn hypothesis2_flags_negative_pt_before_residuals() {
        let p = Fn2::new(
            wide_rect(),
            |_, t| -t,
            |_, _| 0.0,
            |_, _| -1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let v = check_hypothesis2(&p, &zero_rhs(), rect_st(-1.0, 1.0, 2.0), 11, 11, 1e-9).unwrap();
        assert!(!v.pass);
        assert_eq!(v.subchecks[0].name, "pt_positive");
        assert!(!v.subchecks[0].pass);
        assert_eq!(v.subchecks[0].worst_value, -1.0);
        // Everything else about P = -t is fine; the sign gate alone fails.
        assert!(v.subchecks[1..].iter().all(|c| c.pass));
    }

    #[test]
    fn corollary_variant2_is_exact_for_modica_form() {
        let ex = paper_example(ExampleId::Ex1 {
            f: scalar_builtin("double_well_prime").unwrap(),
            offset: 0.0,
        })
        .unwrap();
        let f = scalar_builtin("double_well_prime").unwrap();
        let v =
            check_corollary_semilinear(&ex.pfunction.p, &f, rect_st(-2.0, 2.0, 2.0), 41, 41, 1e-9)
                .unwrap();
        assert!(v.pass);
        assert_eq!(v.variant.as_deref(), Some("variant2"));
        let quantity = v
            .subchecks
            .iter()
            .find(|c| c.name == "quantity_total")
            .unwrap();
        assert!(quantity.worst_value.abs() <= 1e-12);
    }

    #[test]
    fn corollary_accepts_linear_f_with_p_equals_t() {
        let p = p_gradient_squared();
        let f = scalar_builtin("identity").unwrap();
        let v = check_corollary_semilinear(&p, &f, rect_st(-2.0, 2.0, 2.0), 11, 11, 1e-9).unwrap();
        assert!(v.pass);
        assert!(v.variant.is_some());
    }

    #[test]
    fn corollary_rejects_nonpositive_pt() {
        let p = Fn2::new(
            wide_rect(),
            |_, t| -t,
            |_, _| 0.0,
            |_, _| -1.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let f = scalar_builtin("identity").unwrap();
        let err = check_corollary_semilinear(&p, &f, rect_st(-1.0, 1.0, 2.0), 5, 5, 1e-9)
            .unwrap_err();
        assert!(matches!(err, CriterionError::PtNonPositive { .. }));
    }

    #[test]
    fn corollary_passes_exponential_candidate_without_gradient_bound() {
        // P = t/2 - e^s + e^{-s} with f = e^s: the corollary's conditions hold
        // even though this candidate admits no pointwise bound P <= 0.
        let p = Fn2::new(
            wide_rect(),
            |s: f64, t: f64| 0.5 * t - s.exp() + (-s).exp(),
            |s: f64, _| -s.exp() - (-s).exp(),
            |_, _| 0.5,
            |s: f64, _| -s.exp() + (-s).exp(),
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let f = scalar_builtin("exp").unwrap();
        let v = check_corollary_semilinear(&p, &f, rect_st(-2.0, 2.0, 2.0), 21, 21, 1e-9).unwrap();
        assert!(v.pass);
        assert_eq!(v.variant.as_deref(), Some("variant2"));
        // Spot value: t^2 P_ss + I_c at (0, 1) is exactly 3.
        let ic = eval_i_corollary(&p, &f, 0.0, 1.0).unwrap();
        let pss = p.dss(0.0, 1.0).unwrap();
        assert!((pss + ic - 3.0).abs() < 1e-14);
    }

    #[test]
    fn corollary_clamps_vacuous_samples_where_pt_vanishes() {
        // P = t^2/2 - s: P_t = 0 along t = 0 while P_s = -1, so the corollary
        // quantity is formally infinite there and must clamp, not poison the
        // verdict with NaN.
        let p = Fn2::new(
            wide_rect(),
            |s, t| 0.5 * t * t - s,
            |_, _| -1.0,
            |_, t| t,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 1.0,
        )
        .unwrap();
        let f = scalar_builtin("identity").unwrap();
        let v = check_corollary_semilinear(&p, &f, rect_st(0.0, 1.0, 1.0), 11, 11, 1e-9).unwrap();
        assert!(v.pass, "min residual {}", v.min_residual);
        assert!(v.min_residual.is_finite());
        assert!(v.min_residual < f64::MAX);
    }

    #[test]
    fn verdicts_are_monotone_in_tolerance() {
        // A small mixed partial (1e-6) fails the strict tolerance and passes a
        // loose one; nothing else about the candidate changes.
        let p = Fn2::new(
            wide_rect(),
            |s, t| 0.5 * t - 0.5 * s * s + 1e-6 * s * t,
            |s, t| -s + 1e-6 * t,
            |s, _| 0.5 + 1e-6 * s,
            |_, _| -1.0,
            |_, _| 1e-6,
            |_, _| 0.0,
        )
        .unwrap();
        let f = lifted("identity");
        let rect = rect_st(0.0, 2.0, 2.0);
        let strict = check_hypothesis2(&p, &f, rect, 11, 11, 1e-9).unwrap();
        assert!(!strict.pass);
        assert!(!strict.subchecks[1].pass, "pst_zero should fail at 1e-9");
        let loose = check_hypothesis2(&p, &f, rect, 11, 11, 1e-4).unwrap();
        assert!(loose.pass);
    }

    #[test]
    fn constant_p_reports_lexicographic_argmin() {
        let p = Fn2::new(
            wide_rect(),
            |_, _| 3.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
            |_, _| 0.0,
        )
        .unwrap();
        let v = check_hypothesis1(&p, &zero_rhs(), rect_st(-1.0, 1.0, 2.0), 5, 5, 1e-9).unwrap();
        // Every residual is exactly zero, so the tie-break pins the argmin to
        // the lexicographically smallest sample.
        assert!(v.pass);
        assert_eq!(v.min_residual, 0.0);
        assert_eq!(v.argmin, (-1.0, 0.0));
    }

    proptest! {
        // The trace/determinant test agrees with the closed-form eigenvalue
        // oracle away from the tolerance boundary.
        #[test]
        fn psd_rule_matches_eigenvalue_oracle(
            a in -10.0f64..10.0,
            b in -10.0f64..10.0,
            c in -10.0f64..10.0,
        ) {
            let mean = 0.5 * (a + c);
            let disc = (0.5 * (a - c)).powi(2) + b * b;
            let lambda_min = mean - disc.sqrt();
            prop_assume!(lambda_min.abs() > 1e-6);
            let tol = 1e-9;
            let rule = psd_residual(a, b, c) >= -tol;
            prop_assert_eq!(rule, lambda_min > 0.0);
        }
    }
}
