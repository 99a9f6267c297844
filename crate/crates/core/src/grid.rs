//! Uniform-grid calculus on rectangles.
//!
//! All discrete operators use second-order central differences on the
//! interior. First and second derivatives fall back to one-sided second-order
//! stencils on the outermost cells so every produced field is finite
//! everywhere; accuracy is only claimed inside the field's *validity margin*.
//! Operators of order ≤ 2 grow the margin by one cell, third/fourth-order
//! composites by two. Downstream checks read only the valid region, which
//! removes any ambiguity about boundary stencil order from residual tests.

use std::io;

use serde::Serialize;
use thiserror::Error;

/// Default determinant floor for Hessian inversion.
pub const DEFAULT_EPS_DET: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid too small: need at least {need} points per axis, got {nx} x {ny}")]
    GridTooSmall { need: usize, nx: usize, ny: usize },
    #[error("spacing must be positive and finite, got hx = {hx}, hy = {hy}")]
    BadSpacing { hx: f64, hy: f64 },
    #[error("non-finite value at index ({i}, {j})")]
    NonFiniteValue { i: usize, j: usize },
    #[error("field has {got} values but the grid has {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("margin {margin} leaves no valid region on a {nx} x {ny} grid")]
    EmptyValidRegion { margin: usize, nx: usize, ny: usize },
    #[error("Hessian degenerate at ({x}, {y}): det = {det:e} <= {eps:e}")]
    DegenerateHessian { x: f64, y: f64, det: f64, eps: f64 },
    #[error("ball of radius {r} centered at ({cx}, {cy}) leaves the valid region")]
    BallOutOfBounds { cx: f64, cy: f64, r: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// Uniform tensor grid: node `(i, j)` sits at `(x0 + i·hx, y0 + j·hy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Grid2 {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    x0: f64,
    y0: f64,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64, origin: (f64, f64)) -> Result<Self, GridError> {
        if nx < 5 || ny < 5 {
            return Err(GridError::GridTooSmall { need: 5, nx, ny });
        }
        if !(hx.is_finite() && hy.is_finite() && hx > 0.0 && hy > 0.0) {
            return Err(GridError::BadSpacing { hx, hy });
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(GridError::BadParams(format!(
                "origin must be finite, got ({}, {})",
                origin.0, origin.1
            )));
        }
        Ok(Grid2 {
            nx,
            ny,
            hx,
            hy,
            x0: origin.0,
            y0: origin.1,
        })
    }

    /// Grid spanning `[x_lo, x_hi] x [y_lo, y_hi]` inclusively with `nx x ny`
    /// nodes.
    pub fn from_extent(
        x: (f64, f64),
        y: (f64, f64),
        nx: usize,
        ny: usize,
    ) -> Result<Self, GridError> {
        if nx < 5 || ny < 5 {
            return Err(GridError::GridTooSmall { need: 5, nx, ny });
        }
        let hx = (x.1 - x.0) / (nx - 1) as f64;
        let hy = (y.1 - y.0) / (ny - 1) as f64;
        Grid2::new(nx, ny, hx, hy, (x.0, y.0))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }
}

/// Scalar samples on a [`Grid2`] plus the validity margin: the outermost
/// `margin` cells hold finite placeholder values produced by one-sided
/// stencils (or copied from the nearest valid cell) and carry no accuracy
/// claim. Checks must read through [`Field2::valid_bounds`].
#[derive(Debug, Clone)]
pub struct Field2 {
    grid: Grid2,
    values: Vec<f64>,
    margin: usize,
}

impl Field2 {
    pub fn from_values(grid: Grid2, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::SizeMismatch {
                got: values.len(),
                want: grid.len(),
            });
        }
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if !values[grid.idx(i, j)].is_finite() {
                    return Err(GridError::NonFiniteValue { i, j });
                }
            }
        }
        Ok(Field2 {
            grid,
            values,
            margin: 0,
        })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        let mut values = vec![0.0; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        Field2::from_values(grid, values)
    }

    pub(crate) fn derived(grid: Grid2, values: Vec<f64>, margin: usize) -> Result<Self, GridError> {
        let f = Field2 {
            grid,
            values,
            margin,
        };
        if f.valid_bounds().is_none() {
            return Err(GridError::EmptyValidRegion {
                margin,
                nx: grid.nx,
                ny: grid.ny,
            });
        }
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if !f.values[grid.idx(i, j)].is_finite() {
                    return Err(GridError::NonFiniteValue { i, j });
                }
            }
        }
        Ok(f)
    }

    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Inclusive index bounds `(i_lo, i_hi, j_lo, j_hi)` of the valid region,
    /// or `None` when the margin swallows the whole grid.
    pub fn valid_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let m = self.margin;
        if 2 * m >= self.grid.nx || 2 * m >= self.grid.ny {
            return None;
        }
        Some((m, self.grid.nx - 1 - m, m, self.grid.ny - 1 - m))
    }

    /// Pointwise combination of two fields on the same grid; the result
    /// carries the larger margin.
    pub fn zip_with(&self, other: &Field2, f: impl Fn(f64, f64) -> f64) -> Result<Field2, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field2::derived(self.grid, values, self.margin.max(other.margin))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field2, GridError> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Field2::derived(self.grid, values, self.margin)
    }

    /// CSV dump: header `x,y,value`, one row per node, row-major (x varies
    /// fastest), LF line endings. Margin cells are written as stored.
    pub fn write_csv<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"x,y,value\n")?;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                writeln!(w, "{},{},{}", self.grid.x(i), self.grid.y(j), self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// 1D solution profile: abscissae, values, and first derivative samples.
#[derive(Debug, Clone)]
pub struct Profile1 {
    pub h: f64,
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl Profile1 {
    pub fn new(h: f64, xs: Vec<f64>, u: Vec<f64>, du: Vec<f64>) -> Result<Self, GridError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::BadParams(format!("profile spacing h = {h}")));
        }
        if xs.len() < 2 || xs.len() != u.len() || xs.len() != du.len() {
            return Err(GridError::BadParams(format!(
                "profile arrays must share a length >= 2, got {}/{}/{}",
                xs.len(),
                u.len(),
                du.len()
            )));
        }
        for (k, ((&x, &a), &b)) in xs.iter().zip(&u).zip(&du).enumerate() {
            if !(x.is_finite() && a.is_finite() && b.is_finite()) {
                return Err(GridError::NonFiniteValue { i: k, j: 0 });
            }
        }
        Ok(Profile1 { h, xs, u, du })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// First derivative along one axis: central inside, one-sided second-order on
/// the two outermost lines.
fn deriv1_axis(f: &Field2, axis: Axis) -> Result<Field2, GridError> {
    let g = f.grid;
    let (n, h) = match axis {
        Axis::X => (g.nx, g.hx),
        Axis::Y => (g.ny, g.hy),
    };
    let at = |i: usize, j: usize, k_shifted: isize| -> f64 {
        match axis {
            Axis::X => f.value((i as isize + k_shifted) as usize, j),
            Axis::Y => f.value(i, (j as isize + k_shifted) as usize),
        }
    };
    let pos = |i: usize, j: usize| -> usize {
        match axis {
            Axis::X => i,
            Axis::Y => j,
        }
    };
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = pos(i, j);
            let d = if k == 0 {
                (-3.0 * at(i, j, 0) + 4.0 * at(i, j, 1) - at(i, j, 2)) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * at(i, j, 0) - 4.0 * at(i, j, -1) + at(i, j, -2)) / (2.0 * h)
            } else {
                (at(i, j, 1) - at(i, j, -1)) / (2.0 * h)
            };
            out[g.idx(i, j)] = d;
        }
    }
    Field2::derived(g, out, f.margin + 1)
}

/// Second derivative along one axis: central inside, one-sided second-order on
/// the two outermost lines.
fn deriv2_axis(f: &Field2, axis: Axis) -> Result<Field2, GridError> {
    let g = f.grid;
    let (n, h) = match axis {
        Axis::X => (g.nx, g.hx),
        Axis::Y => (g.ny, g.hy),
    };
    let at = |i: usize, j: usize, k_shifted: isize| -> f64 {
        match axis {
            Axis::X => f.value((i as isize + k_shifted) as usize, j),
            Axis::Y => f.value(i, (j as isize + k_shifted) as usize),
        }
    };
    let pos = |i: usize, j: usize| -> usize {
        match axis {
            Axis::X => i,
            Axis::Y => j,
        }
    };
    let h2 = h * h;
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = pos(i, j);
            let d = if k == 0 {
                (2.0 * at(i, j, 0) - 5.0 * at(i, j, 1) + 4.0 * at(i, j, 2) - at(i, j, 3)) / h2
            } else if k == n - 1 {
                (2.0 * at(i, j, 0) - 5.0 * at(i, j, -1) + 4.0 * at(i, j, -2) - at(i, j, -3)) / h2
            } else {
                (at(i, j, 1) - 2.0 * at(i, j, 0) + at(i, j, -1)) / h2
            };
            out[g.idx(i, j)] = d;
        }
    }
    Field2::derived(g, out, f.margin + 1)
}

/// Discrete gradient `(u_x, u_y)`.
pub fn gradient(f: &Field2) -> Result<(Field2, Field2), GridError> {
    Ok((deriv1_axis(f, Axis::X)?, deriv1_axis(f, Axis::Y)?))
}

/// Five-point discrete Laplacian.
pub fn laplacian(f: &Field2) -> Result<Field2, GridError> {
    let xx = deriv2_axis(f, Axis::X)?;
    let yy = deriv2_axis(f, Axis::Y)?;
    xx.zip_with(&yy, |a, b| a + b)
}

/// The four Hessian entries `(u_xx, u_xy, u_yx, u_yy)`; the two mixed entries
/// come from the same symmetric cross stencil.
pub struct Hessian2 {
    pub xx: Field2,
    pub xy: Field2,
    pub yx: Field2,
    pub yy: Field2,
}

pub fn hessian(f: &Field2) -> Result<Hessian2, GridError> {
    let xx = deriv2_axis(f, Axis::X)?;
    let yy = deriv2_axis(f, Axis::Y)?;
    // Composing the two first-derivative passes reproduces the standard
    // four-point cross stencil at every cell one step inside the input's
    // margin, so the composite is trustworthy at margin + 1 even though the
    // pass bookkeeping alone would claim + 2.
    let dx = deriv1_axis(f, Axis::X)?;
    let mut xy = deriv1_axis(&dx, Axis::Y)?;
    xy.margin = f.margin + 1;
    let yx = xy.clone();
    Ok(Hessian2 { xx, xy, yx, yy })
}

/// Gradient of the Laplacian, `∇(Δu)`; third-order composite, margin + 2.
pub fn grad_laplacian(f: &Field2) -> Result<(Field2, Field2), GridError> {
    let lap = laplacian(f)?;
    gradient(&lap)
}

/// Discrete bilaplacian `Δ(Δu)`; margin + 2 and at least 9 nodes per axis so
/// the 13-point composite stencil has genuine support.
pub fn biharmonic(f: &Field2) -> Result<Field2, GridError> {
    let g = f.grid;
    if g.nx < 9 || g.ny < 9 {
        return Err(GridError::GridTooSmall {
            need: 9,
            nx: g.nx,
            ny: g.ny,
        });
    }
    let lap = laplacian(f)?;
    laplacian(&lap)
}

/// Determinant of the discrete Hessian, `u_xx u_yy − u_xy²`.
pub fn det_hessian(f: &Field2) -> Result<Field2, GridError> {
    let h = hessian(f)?;
    let prod = h.xx.zip_with(&h.yy, |a, b| a * b)?;
    prod.zip_with(&h.xy, |p, m| p - m * m)
}

/// Drift vector `B = (∇²u)⁻¹ ∇(Δu)` via the closed-form 2x2 inverse.
///
/// Errors with the first location (in scan order) where the Hessian
/// determinant on the drift's valid region fails the floor `eps_det`.
pub fn ma_drift(f: &Field2, eps_det: f64) -> Result<(Field2, Field2), GridError> {
    let h = hessian(f)?;
    let (gx, gy) = grad_laplacian(f)?;
    let g = f.grid;
    let margin = f.margin + 2;
    let probe = Field2 {
        grid: g,
        values: vec![0.0; g.len()],
        margin,
    };
    let (i0, i1, j0, j1) = probe.valid_bounds().ok_or(GridError::EmptyValidRegion {
        margin,
        nx: g.nx,
        ny: g.ny,
    })?;
    let mut bx = vec![0.0; g.len()];
    let mut by = vec![0.0; g.len()];
    for j in j0..=j1 {
        for i in i0..=i1 {
            let (xx, xy, yy) = (h.xx.value(i, j), h.xy.value(i, j), h.yy.value(i, j));
            let det = xx * yy - xy * xy;
            if det <= eps_det {
                return Err(GridError::DegenerateHessian {
                    x: g.x(i),
                    y: g.y(j),
                    det,
                    eps: eps_det,
                });
            }
            let (ax, ay) = (gx.value(i, j), gy.value(i, j));
            bx[g.idx(i, j)] = (yy * ax - xy * ay) / det;
            by[g.idx(i, j)] = (-xy * ax + xx * ay) / det;
        }
    }
    Ok((
        Field2::derived(g, bx, margin)?,
        Field2::derived(g, by, margin)?,
    ))
}

/// Midpoint-rule average of `f` over grid cells whose centers lie in the ball
/// of radius `r` about `center`.
///
/// The ball's bounding box must sit inside the field's valid region.
pub fn ball_average(f: &Field2, center: (f64, f64), r: f64) -> Result<f64, GridError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(GridError::BadParams(format!("ball radius r = {r}")));
    }
    let g = f.grid;
    let (i0, i1, j0, j1) = f.valid_bounds().ok_or(GridError::EmptyValidRegion {
        margin: f.margin,
        nx: g.nx,
        ny: g.ny,
    })?;
    let (cx, cy) = center;
    if cx - r < g.x(i0) || cx + r > g.x(i1) || cy - r < g.y(j0) || cy + r > g.y(j1) {
        return Err(GridError::BallOutOfBounds { cx, cy, r });
    }
    // Distances come from index offsets against the center's fractional grid
    // position, snapped to the node when the center sits on one: integer
    // offsets of a mirror pair are exact negations, so the membership test is
    // exactly mirror-symmetric there — coordinate subtraction cannot
    // guarantee that at the rim.
    let snap = |c: f64| {
        let r = c.round();
        if (c - r).abs() < 1e-9 {
            r
        } else {
            c
        }
    };
    let ci = snap((cx - g.x0) / g.hx);
    let cj = snap((cy - g.y0) / g.hy);
    let mut sum = 0.0;
    let mut count: usize = 0;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let dx = (i as f64 - ci) * g.hx;
            let dy = (j as f64 - cj) * g.hy;
            if dx * dx + dy * dy <= r * r {
                sum += f.value(i, j);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(GridError::BadParams(format!(
            "ball of radius {r} contains no cell centers (spacing {} x {})",
            g.hx, g.hy
        )));
    }
    Ok(sum / count as f64)
}

/// Extrema of a field split between the interior of its valid region and the
/// outermost valid ring. Ties resolve to the lexicographically smallest
/// `(i, j)` index.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Extrema {
    pub interior_max: f64,
    pub interior_argmax: (f64, f64),
    pub interior_min: f64,
    pub interior_argmin: (f64, f64),
    pub boundary_max: f64,
    pub boundary_argmax: (f64, f64),
    pub boundary_min: f64,
    pub boundary_argmin: (f64, f64),
}

pub fn extrema(f: &Field2) -> Result<Extrema, GridError> {
    let g = f.grid;
    let (i0, i1, j0, j1) = f.valid_bounds().ok_or(GridError::EmptyValidRegion {
        margin: f.margin,
        nx: g.nx,
        ny: g.ny,
    })?;
    if i1 - i0 < 2 || j1 - j0 < 2 {
        return Err(GridError::BadParams(format!(
            "valid region {}..={} x {}..={} has no interior",
            i0, i1, j0, j1
        )));
    }
    struct Acc {
        max: f64,
        argmax: (usize, usize),
        min: f64,
        argmin: (usize, usize),
    }
    impl Acc {
        fn new() -> Self {
            Acc {
                max: f64::NEG_INFINITY,
                argmax: (usize::MAX, usize::MAX),
                min: f64::INFINITY,
                argmin: (usize::MAX, usize::MAX),
            }
        }
        fn add(&mut self, v: f64, i: usize, j: usize) {
            if v > self.max || (v == self.max && (i, j) < self.argmax) {
                self.max = v;
                self.argmax = (i, j);
            }
            if v < self.min || (v == self.min && (i, j) < self.argmin) {
                self.min = v;
                self.argmin = (i, j);
            }
        }
    }
    let mut interior = Acc::new();
    let mut boundary = Acc::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let v = f.value(i, j);
            if i == i0 || i == i1 || j == j0 || j == j1 {
                boundary.add(v, i, j);
            } else {
                interior.add(v, i, j);
            }
        }
    }
    let coords = |(i, j): (usize, usize)| (g.x(i), g.y(j));
    Ok(Extrema {
        interior_max: interior.max,
        interior_argmax: coords(interior.argmax),
        interior_min: interior.min,
        interior_argmin: coords(interior.argmin),
        boundary_max: boundary.max,
        boundary_argmax: coords(boundary.argmax),
        boundary_min: boundary.min,
        boundary_argmin: coords(boundary.argmin),
    })
}
