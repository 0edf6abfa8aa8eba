//! Executable form of the large-speed limit: as `c` grows, the gradients of
//! the heat and damped-wave potentials approach the Poisson gradient.

use serde::Serialize;

use super::{solve_poisson, PdeParams, PotentialState, Scheme};
use crate::error::{Error, Result};
use crate::grid::{self, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// Time step shared by every run.
    pub tau: f64,
    /// Spacing of the probe lattice, px.
    pub probe_stride: usize,
    /// Drag given to the wave runs so reflections die out.
    pub wave_drag: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tau: 0.1,
            probe_stride: 2,
            wave_drag: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub c_values: Vec<f64>,
    /// Max probe error of the heat gradient, one entry per `c`.
    pub heat_errors: Vec<f64>,
    /// Max probe error of the damped-wave gradient, one entry per `c`.
    pub wave_errors: Vec<f64>,
    /// `max |grad phi_poisson|` over the probes.
    pub reference_norm: f64,
    pub heat_nonincreasing: bool,
    pub wave_nonincreasing: bool,
}

impl ConvergenceReport {
    /// Worst of the two models at each `c`.
    pub fn errors(&self) -> Vec<f64> {
        self.heat_errors
            .iter()
            .zip(&self.wave_errors)
            .map(|(h, w)| h.max(*w))
            .collect()
    }

    pub fn nonincreasing(&self) -> bool {
        self.heat_nonincreasing && self.wave_nonincreasing
    }
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

fn probes(f: &ScalarField, stride: usize) -> Vec<(usize, usize)> {
    let g = f.grid();
    let stride = stride.max(1);
    let mut out = Vec::new();
    for y in (2..g.height().saturating_sub(2)).step_by(stride) {
        for x in (2..g.width().saturating_sub(2)).step_by(stride) {
            out.push((x, y));
        }
    }
    out
}

fn max_gradient_gap(a: &ScalarField, b: &ScalarField, pts: &[(usize, usize)]) -> f64 {
    pts.iter()
        .map(|&(x, y)| {
            (grid::central_gradient_node(a, x, y) - grid::central_gradient_node(b, x, y)).norm()
        })
        .fold(0.0, f64::max)
}

fn evolve(mass: &ScalarField, params: PdeParams, settle_time: f64) -> Result<ScalarField> {
    let mut state = PotentialState::new(mass.grid(), params)?;
    let steps = (settle_time / params.tau).round().max(1.0) as usize;
    for _ in 0..steps {
        state.advance(mass, Scheme::Implicit)?;
    }
    Ok(state.phi().clone())
}

/// Runs the heat (`m = 0, d = 1`) and damped-wave (`m = 1, d = wave_drag`)
/// models at each speed in `c_list` for `settle_time` and measures the gap to
/// the Dirichlet Poisson gradient on a probe lattice.
pub fn verify_limit(
    mass: &ScalarField,
    c_list: &[f64],
    settle_time: f64,
    opts: LimitOptions,
) -> Result<ConvergenceReport> {
    if c_list.len() < 3 {
        return Err(Error::InvalidParameter("need at least three speeds".into()));
    }
    if c_list.windows(2).any(|w| !(w[1] > w[0])) || !(c_list[0] > 0.0) {
        return Err(Error::InvalidParameter(
            "speeds must be positive and ascending".into(),
        ));
    }
    if !(settle_time > 0.0) {
        return Err(Error::NonpositiveTime(settle_time));
    }
    let reference = solve_poisson(mass)?;
    let pts = probes(mass, opts.probe_stride);
    let reference_norm = pts
        .iter()
        .map(|&(x, y)| grid::central_gradient_node(&reference, x, y).norm())
        .fold(0.0, f64::max);

    let mut heat_errors = Vec::with_capacity(c_list.len());
    let mut wave_errors = Vec::with_capacity(c_list.len());
    for &c in c_list {
        let heat = PdeParams {
            m: 0.0,
            d: 1.0,
            c,
            tau: opts.tau,
        };
        let wave = PdeParams {
            m: 1.0,
            d: opts.wave_drag,
            c,
            tau: opts.tau,
        };
        let phi_h = evolve(mass, heat, settle_time)?;
        let phi_w = evolve(mass, wave, settle_time)?;
        heat_errors.push(max_gradient_gap(&phi_h, &reference, &pts));
        wave_errors.push(max_gradient_gap(&phi_w, &reference, &pts));
    }
    Ok(ConvergenceReport {
        c_values: c_list.to_vec(),
        heat_nonincreasing: nonincreasing(&heat_errors),
        wave_nonincreasing: nonincreasing(&wave_errors),
        heat_errors,
        wave_errors,
        reference_norm,
    })
}
