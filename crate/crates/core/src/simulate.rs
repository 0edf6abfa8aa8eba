//! The coupled per-step loop: mass, potential, focus, inhibition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::foa::{self, DynamicsParams, FoaState, Scanpath};
use crate::grid::{Grid, ScalarField, Vec2};
use crate::mass::{self, Frame, InhibitionField, MassParams};
use crate::pde::{PdeParams, PotentialState, Scheme};

/// Every constant the simulation loop needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub pde: PdeParams,
    pub mass: MassParams,
    pub dynamics: DynamicsParams,
    pub scheme: Scheme,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.pde.validate()?;
        self.mass.validate()?;
        self.dynamics.validate()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub scanpath: Scanpath,
    pub potential: ScalarField,
    pub inhibition: InhibitionField,
    /// `(t, a(t))` at `t = 0` and after every step.
    pub trajectory: Vec<(f64, Vec2)>,
    pub pde_steps: usize,
    /// Maximum of the inhibition field after every step.
    pub inhibition_max: Vec<f64>,
}

/// Starting point: retina center plus uniform jitter in a disk.
pub fn initial_position(grid: Grid, dp: &DynamicsParams) -> Vec2 {
    let mut rng = ChaCha8Rng::seed_from_u64(dp.seed);
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    let r = dp.jitter * u.sqrt();
    let theta = 2.0 * std::f64::consts::PI * v;
    foa::clamp_interior(
        grid,
        grid.center() + Vec2::new(r * theta.cos(), r * theta.sin()),
    )
}

/// Index of the frame on screen at time `t` into the run.
fn frame_at(frames: &[Frame], t: f64) -> usize {
    let t0 = frames[0].timestamp();
    frames
        .iter()
        .rposition(|f| f.timestamp() - t0 <= t + 1e-9)
        .unwrap_or(0)
}

/// Runs one observer for `duration` seconds.
///
/// A single frame is held for the whole run. With several frames the one
/// whose (relative) timestamp was most recently reached is shown, and the
/// motion term is active on the step where it first appears.
pub fn simulate(frames: &[Frame], params: &ModelParams, duration: f64) -> Result<SimulationOutput> {
    simulate_observed(frames, params, duration, |_, _| Ok(()))
}

/// As [`simulate`], calling `observe(step, state)` after every PDE step.
pub fn simulate_observed(
    frames: &[Frame],
    params: &ModelParams,
    duration: f64,
    mut observe: impl FnMut(usize, &PotentialState) -> Result<()>,
) -> Result<SimulationOutput> {
    let first = frames
        .first()
        .ok_or_else(|| Error::EmptyInput("no frames".into()))?;
    params.validate()?;
    if !(duration > 0.0) {
        return Err(Error::NonpositiveTime(duration));
    }
    let grid = first.grid();
    if frames.iter().any(|f| f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    if let Some(w) = frames
        .windows(2)
        .find(|w| !(w[1].timestamp() > w[0].timestamp()))
    {
        return Err(Error::NonMonotonicTime {
            prev: w[0].timestamp(),
            curr: w[1].timestamp(),
        });
    }

    let tau = params.pde.tau;
    let steps = (duration / tau).round().max(1.0) as usize;
    let mut state = PotentialState::new(grid, params.pde)?;
    let mut inhibition = InhibitionField::zeros(grid);
    let mut focus = FoaState::at_rest(initial_position(grid, &params.dynamics));
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push((0.0, focus.pos));
    let mut inhibition_max = Vec::with_capacity(steps);
    let mut shown: Option<usize> = None;

    for n in 0..steps {
        let t = n as f64 * tau;
        let idx = frame_at(frames, t);
        let prev = match shown {
            Some(old) if old != idx => Some(&frames[old]),
            _ => None,
        };
        shown = Some(idx);
        let mu = mass::compute_mass(&frames[idx], prev, &inhibition, &params.mass)?;
        state.advance(&mu, params.scheme)?;
        observe(n + 1, &state)?;
        focus = foa::step_foa(focus, state.phi(), &params.dynamics, tau);
        inhibition = mass::update_inhibition(&inhibition, focus.pos, &params.mass, tau)?;
        inhibition_max.push(inhibition.max());
        trajectory.push(((n + 1) as f64 * tau, focus.pos));
    }

    let scanpath = foa::extract_fixations(&trajectory, &params.dynamics)?;
    Ok(SimulationOutput {
        scanpath,
        potential: state.phi().clone(),
        inhibition,
        trajectory,
        pde_steps: steps,
        inhibition_max,
    })
}
