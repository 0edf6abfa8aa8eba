//! The discrete retina: a `width x height` lattice with unit spacing.
//!
//! Storage is row-major with `row = y` and `col = x`. Every public API takes
//! coordinates in `(x, y)` order.

use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    width: usize,
    height: usize,
}

impl Grid {
    /// Lattice spacing in pixels. Stencils carry no `1/h^2` factor.
    pub const SPACING: f64 = 1.0;

    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidGrid { width, height });
        }
        Ok(Grid { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn is_boundary(&self, x: usize, y: usize) -> bool {
        x == 0 || y == 0 || x + 1 == self.width || y + 1 == self.height
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            (self.width - 1) as f64 / 2.0,
            (self.height - 1) as f64 / 2.0,
        )
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    /// Whether `p` lies in `[0, w-1] x [0, h-1]`.
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x <= (self.width - 1) as f64
            && p.y <= (self.height - 1) as f64
    }

    /// Whether `p` keeps at least one pixel between itself and the boundary.
    pub fn in_interior(&self, p: Vec2) -> bool {
        p.x >= 1.0
            && p.y >= 1.0
            && p.x <= (self.width - 2) as f64
            && p.y <= (self.height - 2) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Real values on every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Builds a field from `f(x, y)`.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for y in 0..grid.height() {
            for x in 0..grid.width() {
                values.push(f(x, y));
            }
        }
        ScalarField { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "field values must be finite".into(),
            ));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.grid.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        let i = self.grid.index(x, y);
        self.values[i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        par::sum_by(Execution::default(), self.values.len(), |i| self.values[i])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Five-point Laplacian on interior nodes; the boundary ring of the output is 0.
pub fn laplacian_5pt(f: &ScalarField) -> ScalarField {
    laplacian_5pt_with(f, Execution::default())
}

pub fn laplacian_5pt_with(f: &ScalarField, exec: Execution) -> ScalarField {
    let mut out = ScalarField::zeros(f.grid);
    laplacian_into(exec, f.grid, &f.values, &mut out.values);
    out
}

/// Writes the five-point Laplacian of `src` into `dst` (boundary rows and
/// columns of `dst` are set to 0).
pub(crate) fn laplacian_into(exec: Execution, grid: Grid, src: &[f64], dst: &mut [f64]) {
    let w = grid.width();
    let h = grid.height();
    par::for_each_row(exec, dst, w, |y, row| {
        if y == 0 || y + 1 == h {
            row.fill(0.0);
            return;
        }
        let c = &src[y * w..(y + 1) * w];
        let up = &src[(y - 1) * w..y * w];
        let down = &src[(y + 1) * w..(y + 2) * w];
        row[0] = 0.0;
        row[w - 1] = 0.0;
        for x in 1..w - 1 {
            row[x] = c[x + 1] + c[x - 1] + down[x] + up[x] - 4.0 * c[x];
        }
    });
}

/// Returns a copy of `f` with its boundary ring set to 0.
pub fn apply_dirichlet(f: &ScalarField) -> ScalarField {
    let mut out = f.clone();
    zero_boundary(&mut out);
    out
}

pub(crate) fn zero_boundary(f: &mut ScalarField) {
    let w = f.grid.width();
    let h = f.grid.height();
    let v = &mut f.values;
    v[..w].fill(0.0);
    v[(h - 1) * w..].fill(0.0);
    for y in 1..h - 1 {
        v[y * w] = 0.0;
        v[y * w + w - 1] = 0.0;
    }
}

/// Bilinear interpolation of `f` at `p`.
pub fn bilinear_sample(f: &ScalarField, p: Vec2) -> Result<f64> {
    if !p.is_finite() || !f.grid.contains(p) {
        return Err(Error::OutOfDomain { x: p.x, y: p.y });
    }
    Ok(bilinear_unchecked(f.grid, p, |x, y| f.get(x, y)))
}

fn bilinear_unchecked(grid: Grid, p: Vec2, node: impl Fn(usize, usize) -> f64) -> f64 {
    let x0 = (p.x.floor() as usize).min(grid.width() - 2);
    let y0 = (p.y.floor() as usize).min(grid.height() - 2);
    let tx = p.x - x0 as f64;
    let ty = p.y - y0 as f64;
    let top = node(x0, y0) * (1.0 - tx) + node(x0 + 1, y0) * tx;
    let bottom = node(x0, y0 + 1) * (1.0 - tx) + node(x0 + 1, y0 + 1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Central-difference gradient at node `(x, y)`. The node must be interior.
#[inline]
pub(crate) fn central_gradient_node(f: &ScalarField, x: usize, y: usize) -> Vec2 {
    Vec2::new(
        (f.get(x + 1, y) - f.get(x - 1, y)) / 2.0,
        (f.get(x, y + 1) - f.get(x, y - 1)) / 2.0,
    )
}

/// Gradient at a continuous point: central differences on the four
/// surrounding nodes, bilinearly interpolated.
pub fn gradient_at(f: &ScalarField, p: Vec2) -> Result<Vec2> {
    if !p.is_finite() || !f.grid.in_interior(p) {
        return Err(Error::OutOfDomain { x: p.x, y: p.y });
    }
    // Clamp the cell so both corner columns/rows stay interior, which keeps
    // the stencil inside the grid even when p sits on the last interior line.
    let grid = f.grid;
    let x0 = (p.x.floor() as usize).clamp(1, grid.width().saturating_sub(3).max(1));
    let y0 = (p.y.floor() as usize).clamp(1, grid.height().saturating_sub(3).max(1));
    let tx = p.x - x0 as f64;
    let ty = p.y - y0 as f64;
    let g = |x: usize, y: usize| {
        if grid.is_boundary(x, y) {
            Vec2::ZERO
        } else {
            central_gradient_node(f, x, y)
        }
    };
    let top = g(x0, y0) * (1.0 - tx) + g(x0 + 1, y0) * tx;
    let bottom = g(x0, y0 + 1) * (1.0 - tx) + g(x0 + 1, y0 + 1) * tx;
    Ok(top * (1.0 - ty) + bottom * ty)
}
