//! Virtual mass density and the inhibition-of-return state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField, Vec2};
use crate::par::{self, Execution};

/// A luminance frame with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    brightness: ScalarField,
    timestamp: f64,
}

impl Frame {
    /// Values are clamped into `[0, 1]`.
    pub fn new(mut brightness: ScalarField, timestamp: f64) -> Self {
        for v in brightness.values_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Frame {
            brightness,
            timestamp,
        }
    }

    pub fn brightness(&self) -> &ScalarField {
        &self.brightness
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    pub fn grid(&self) -> Grid {
        self.brightness.grid()
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassParams {
    /// Weight of the spatial detail term.
    pub alpha1: f64,
    /// Weight of the motion term.
    pub alpha2: f64,
    /// Global rescale of the source (equivalently of the potential).
    pub k: f64,
    /// Inhibition deposit rate, 1/s.
    pub beta: f64,
    /// Radius of the inhibition footprint, px.
    pub sigma: f64,
    /// Inhibition recovery rate, 1/s.
    pub gamma: f64,
}

impl MassParams {
    pub const DEFAULT_K: f64 = 250_000.0;

    /// Defaults with the footprint radius tied to the retina width.
    pub fn for_grid(grid: Grid) -> Self {
        MassParams {
            alpha1: 1.0,
            alpha2: 1.0,
            k: Self::DEFAULT_K,
            beta: 10.0,
            sigma: grid.width() as f64 / 16.0,
            gamma: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0) {
            return bad("alpha1 and alpha2 must be nonnegative");
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad("k must be positive");
        }
        if !(self.beta >= 0.0 && self.gamma >= 0.0) {
            return bad("beta and gamma must be nonnegative");
        }
        if !(self.sigma > 0.0) {
            return bad("sigma must be positive");
        }
        Ok(())
    }
}

/// Inhibition level per node, kept in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InhibitionField {
    level: ScalarField,
}

impl InhibitionField {
    pub fn zeros(grid: Grid) -> Self {
        InhibitionField {
            level: ScalarField::zeros(grid),
        }
    }

    /// Values are clamped into `[0, 1]`.
    pub fn from_field(mut level: ScalarField) -> Self {
        for v in level.values_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        InhibitionField { level }
    }

    pub fn level(&self) -> &ScalarField {
        &self.level
    }

    pub fn grid(&self) -> Grid {
        self.level.grid()
    }

    pub fn max(&self) -> f64 {
        self.level.max()
    }
}

/// Mass density `k * (a1*|grad b| + a2*|b - b_prev|/dt) * (1 - inhibition)`.
///
/// The gradient uses central differences; the whole boundary ring of the
/// result is 0, matching the Dirichlet closure of the potential.
pub fn compute_mass(
    curr: &Frame,
    prev: Option<&Frame>,
    inh: &InhibitionField,
    p: &MassParams,
) -> Result<ScalarField> {
    let grid = curr.grid();
    if inh.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let motion = match prev {
        Some(prev) => {
            if prev.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let dt = curr.timestamp - prev.timestamp;
            if !(dt > 0.0) {
                return Err(Error::NonMonotonicTime {
                    prev: prev.timestamp,
                    curr: curr.timestamp,
                });
            }
            Some((prev.brightness(), dt))
        }
        None => None,
    };

    let b = curr.brightness();
    let level = inh.level();
    let mut out = ScalarField::zeros(grid);
    let (w, h) = (grid.width(), grid.height());
    par::for_each_row(Execution::default(), out.values_mut(), w, |y, row| {
        if y == 0 || y + 1 == h {
            return;
        }
        for (x, slot) in row.iter_mut().enumerate().take(w - 1).skip(1) {
            let detail = grid::central_gradient_node(b, x, y).norm();
            let change = match motion {
                Some((pb, dt)) => (b.get(x, y) - pb.get(x, y)).abs() / dt,
                None => 0.0,
            };
            let raw = p.alpha1 * detail + p.alpha2 * change;
            *slot = p.k * raw * (1.0 - level.get(x, y));
        }
    });
    Ok(out)
}

/// One explicit step of the inhibition dynamics: Gaussian deposit around the
/// focus at rate `beta`, exponential recovery at rate `gamma`, clamped to
/// `[0, 1]`.
pub fn update_inhibition(
    inh: &InhibitionField,
    foa: Vec2,
    p: &MassParams,
    tau: f64,
) -> Result<InhibitionField> {
    let grid = inh.grid();
    if !foa.is_finite() || !grid.contains(foa) {
        return Err(Error::OutOfDomain { x: foa.x, y: foa.y });
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let two_sigma_sq = 2.0 * p.sigma * p.sigma;
    let old = inh.level();
    let mut level = ScalarField::zeros(grid);
    let w = grid.width();
    par::for_each_row(Execution::default(), level.values_mut(), w, |y, row| {
        let dy = y as f64 - foa.y;
        for (x, slot) in row.iter_mut().enumerate() {
            let dx = x as f64 - foa.x;
            let footprint = (-(dx * dx + dy * dy) / two_sigma_sq).exp();
            let i = old.get(x, y);
            *slot = (i + p.beta * tau * footprint - p.gamma * tau * i).clamp(0.0, 1.0);
        }
    });
    Ok(InhibitionField { level })
}
