//! Focus-of-attention dynamics, fixation extraction and model saliency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField, Vec2};

/// Position `a(t)` and velocity `a'(t)` of the focus, in pixels and px/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoaState {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl FoaState {
    pub fn at_rest(pos: Vec2) -> Self {
        FoaState {
            pos,
            vel: Vec2::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Viscous dissipation, 1/s.
    pub lambda: f64,
    /// Speed below which the focus counts as fixating, px/s.
    pub v_fix: f64,
    /// Minimum fixation duration, s.
    pub t_fix: f64,
    /// Radius of the uniform jitter applied to the starting point, px.
    pub jitter: f64,
    pub seed: u64,
}

impl DynamicsParams {
    pub fn for_grid(grid: Grid) -> Self {
        DynamicsParams {
            lambda: 5.0,
            v_fix: 50.0,
            t_fix: 0.1,
            jitter: 0.05 * grid.width().min(grid.height()) as f64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
        }
        if !(self.v_fix > 0.0 && self.t_fix > 0.0) {
            return Err(Error::InvalidParameter(
                "v_fix and t_fix must be positive".into(),
            ));
        }
        if !(self.jitter >= 0.0) {
            return Err(Error::InvalidParameter("jitter must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub x: f64,
    pub y: f64,
    pub onset: f64,
    pub duration: f64,
}

impl Fixation {
    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scanpath {
    pub stimulus: String,
    pub fixations: Vec<Fixation>,
}

impl Scanpath {
    pub fn new(stimulus: impl Into<String>, fixations: Vec<Fixation>) -> Self {
        Scanpath {
            stimulus: stimulus.into(),
            fixations,
        }
    }

    pub fn len(&self) -> usize {
        self.fixations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixations.is_empty()
    }
}

/// One semi-implicit Euler step of `a'' = grad(phi)(a) - lambda a'`.
///
/// The position is clamped to the interior margin; when a wall is hit the
/// velocity component normal to it is dropped.
pub fn step_foa(s: FoaState, potential: &ScalarField, dp: &DynamicsParams, tau: f64) -> FoaState {
    let g = potential.grid();
    let pos = clamp_interior(g, s.pos);
    let force = grid::gradient_at(potential, pos).unwrap_or(Vec2::ZERO);
    let mut vel = s.vel + (force - s.vel * dp.lambda) * tau;
    let mut next = pos + vel * tau;
    let (lo_x, hi_x) = (1.0, (g.width() - 2) as f64);
    let (lo_y, hi_y) = (1.0, (g.height() - 2) as f64);
    if !(next.x >= lo_x && next.x <= hi_x) {
        next.x = if next.x.is_nan() {
            pos.x
        } else {
            next.x.clamp(lo_x, hi_x)
        };
        vel.x = 0.0;
    }
    if !(next.y >= lo_y && next.y <= hi_y) {
        next.y = if next.y.is_nan() {
            pos.y
        } else {
            next.y.clamp(lo_y, hi_y)
        };
        vel.y = 0.0;
    }
    if !vel.is_finite() {
        vel = Vec2::ZERO;
    }
    FoaState { pos: next, vel }
}

pub(crate) fn clamp_interior(g: Grid, p: Vec2) -> Vec2 {
    Vec2::new(
        p.x.clamp(1.0, (g.width() - 2) as f64),
        p.y.clamp(1.0, (g.height() - 2) as f64),
    )
}

/// Splits a uniformly sampled trajectory into fixations.
///
/// Segment speeds come from consecutive samples. Every maximal run of
/// segments slower than `v_fix` that lasts at least `t_fix` becomes one
/// fixation located at the centroid of the run's samples.
pub fn extract_fixations(trajectory: &[(f64, Vec2)], dp: &DynamicsParams) -> Result<Scanpath> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut fixations = Vec::new();
    let mut run_start: Option<usize> = None;
    let close = |start: usize, end: usize, out: &mut Vec<Fixation>| {
        // samples start..=end
        let onset = trajectory[start].0;
        let duration = trajectory[end].0 - onset;
        if duration + 1e-9 < dp.t_fix || duration <= 0.0 {
            return;
        }
        let n = (end - start + 1) as f64;
        let c = trajectory[start..=end]
            .iter()
            .fold(Vec2::ZERO, |acc, (_, p)| acc + *p)
            * (1.0 / n);
        out.push(Fixation {
            x: c.x,
            y: c.y,
            onset,
            duration,
        });
    };
    for k in 0..trajectory.len().saturating_sub(1) {
        let (t0, p0) = trajectory[k];
        let (t1, p1) = trajectory[k + 1];
        let dt = t1 - t0;
        let slow = dt > 0.0 && (p1 - p0).norm() / dt < dp.v_fix;
        match (slow, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(start)) => {
                close(start, k, &mut fixations);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        close(start, trajectory.len() - 1, &mut fixations);
    }
    Ok(Scanpath::new(String::new(), fixations))
}

/// Duration-weighted fixation histogram blurred by an isotropic Gaussian and
/// normalized to unit sum.
pub fn accumulate_saliency(paths: &[Scanpath], grid: Grid, sigma_map: f64) -> Result<ScalarField> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("no scanpaths to accumulate".into()));
    }
    if !(sigma_map >= 0.0) {
        return Err(Error::InvalidParameter(
            "sigma_map must be nonnegative".into(),
        ));
    }
    let mut hist = ScalarField::zeros(grid);
    let mut total = 0.0;
    for f in paths.iter().flat_map(|p| &p.fixations) {
        let x = f.x.round().clamp(0.0, (grid.width() - 1) as f64) as usize;
        let y = f.y.round().clamp(0.0, (grid.height() - 1) as f64) as usize;
        let v = hist.get(x, y);
        hist.set(x, y, v + f.duration);
        total += f.duration;
    }
    if total <= 0.0 {
        return Err(Error::EmptyInput("scanpaths contain no fixations".into()));
    }
    let mut map = if sigma_map > 0.0 {
        gaussian_blur(&hist, sigma_map)
    } else {
        hist
    };
    let sum: f64 = map.values().iter().sum();
    for v in map.values_mut() {
        *v /= sum;
    }
    Ok(map)
}

/// Separable Gaussian blur with zero padding, kernel truncated at 4 sigma.
fn gaussian_blur(f: &ScalarField, sigma: f64) -> ScalarField {
    let radius = (4.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let g = f.grid();
    let (w, h) = (g.width() as isize, g.height() as isize);
    let pass = |src: &ScalarField, horizontal: bool| {
        ScalarField::from_fn(g, |x, y| {
            let (x, y) = (x as isize, y as isize);
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                let o = k as isize - radius;
                let (sx, sy) = if horizontal { (x + o, y) } else { (x, y + o) };
                if sx >= 0 && sy >= 0 && sx < w && sy < h {
                    acc += kv * src.get(sx as usize, sy as usize);
                }
            }
            acc
        })
    };
    let tmp = pass(f, true);
    pass(&tmp, false)
}
