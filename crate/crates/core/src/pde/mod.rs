//! Time evolution of the attention potential.
//!
//! All three models share one equation,
//! `(m/c^2) phi_tt + (d/c) phi_t = laplacian(phi) + mu`,
//! with `phi = 0` on the boundary and a zero initial state. Heat is `m = 0`,
//! the pure wave is `d = 0`.

mod analytic;
mod limit;
mod solver;

pub use analytic::{
    analytic_heat_kernel, analytic_point_mass_wave, gravitational_gradient_bruteforce,
};
pub use limit::{verify_limit, ConvergenceReport, LimitOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField};
use crate::par::{self, Execution};
use solver::CgSettings;

/// Relative residual (max-norm) the implicit step solves to.
pub const IMPLICIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeParams {
    /// Inertial coefficient.
    pub m: f64,
    /// Drag coefficient.
    pub d: f64,
    /// Propagation speed (diffusivity for the heat model).
    pub c: f64,
    /// Time step, seconds.
    pub tau: f64,
}

impl PdeParams {
    /// Pure diffusion row of the parameter table.
    pub fn heat(tau: f64) -> Self {
        PdeParams {
            m: 0.0,
            d: 1.0 / 2500.0,
            c: 1.0,
            tau,
        }
    }

    /// Damped-wave row of the parameter table.
    pub fn damped_wave(tau: f64) -> Self {
        PdeParams {
            m: 1.0 / 25000.0,
            d: 1.0 / 100.0,
            c: 1.0,
            tau,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.0 && self.d >= 0.0) {
            return Err(Error::InvalidParameter(
                "m and d must be nonnegative".into(),
            ));
        }
        if self.m == 0.0 && self.d == 0.0 {
            return Err(Error::Degenerate);
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter("tau must be positive".into()));
        }
        Ok(())
    }

    /// Inertial coefficient with the speed folded in, `m / c^2`.
    pub fn inertia(&self) -> f64 {
        self.m / (self.c * self.c)
    }

    /// Drag coefficient with the speed folded in, `d / c`.
    pub fn drag(&self) -> f64 {
        self.d / self.c
    }

    /// Diagonal shift of the implicit system, `m/tau^2 + d/tau`.
    fn shift(&self) -> f64 {
        self.inertia() / (self.tau * self.tau) + self.drag() / self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Laplacian at the current level; pointwise update.
    Explicit,
    /// Laplacian at the new level; one linear solve per step.
    #[default]
    Implicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
        })
    }
}

/// Largest explicit time step that does not amplify any grid mode.
///
/// Heat (`m = 0`): `tau <= d/4`. Wave (`m > 0`): `tau <= sqrt(m/2)`.
pub fn stability_bound(p: &PdeParams) -> Result<f64> {
    let (m, d) = (p.inertia(), p.drag());
    if m == 0.0 && d == 0.0 {
        return Err(Error::Degenerate);
    }
    if m == 0.0 {
        Ok(d / 4.0)
    } else {
        Ok((m / 2.0).sqrt())
    }
}

/// The potential at the current and previous time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    phi_curr: ScalarField,
    phi_prev: ScalarField,
    step_index: usize,
    params: PdeParams,
}

impl PotentialState {
    /// Zero potential at rest.
    pub fn new(grid: Grid, params: PdeParams) -> Result<Self> {
        params.validate()?;
        Ok(PotentialState {
            phi_curr: ScalarField::zeros(grid),
            phi_prev: ScalarField::zeros(grid),
            step_index: 0,
            params,
        })
    }

    /// Starts from given levels; both get their boundary zeroed.
    pub fn from_levels(
        phi_curr: ScalarField,
        phi_prev: ScalarField,
        params: PdeParams,
    ) -> Result<Self> {
        params.validate()?;
        phi_curr.check_same_grid(&phi_prev)?;
        Ok(PotentialState {
            phi_curr: grid::apply_dirichlet(&phi_curr),
            phi_prev: grid::apply_dirichlet(&phi_prev),
            step_index: 0,
            params,
        })
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi_curr
    }

    pub fn phi_prev(&self) -> &ScalarField {
        &self.phi_prev
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn params(&self) -> &PdeParams {
        &self.params
    }

    pub fn grid(&self) -> Grid {
        self.phi_curr.grid()
    }

    /// Advances one time step in place.
    pub fn advance(&mut self, mass: &ScalarField, scheme: Scheme) -> Result<()> {
        self.advance_with(mass, scheme, Execution::default())
    }

    pub fn advance_with(
        &mut self,
        mass: &ScalarField,
        scheme: Scheme,
        exec: Execution,
    ) -> Result<()> {
        let grid = self.grid();
        if mass.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let p = self.params;
        let tau = p.tau;
        let a_next = p.shift();
        let a_curr = 2.0 * p.inertia() / (tau * tau) + p.drag() / tau;
        let a_prev = p.inertia() / (tau * tau);

        let curr = self.phi_curr.values();
        let prev = self.phi_prev.values();
        let mu = mass.values();
        let next = match scheme {
            Scheme::Explicit => {
                let bound = stability_bound(&p)?;
                if tau > bound {
                    return Err(Error::Unstable { tau, bound });
                }
                let mut next = grid::laplacian_5pt_with(&self.phi_curr, exec);
                let w = grid.width();
                let h = grid.height();
                par::for_each_row(exec, next.values_mut(), w, |y, row| {
                    if y == 0 || y + 1 == h {
                        return;
                    }
                    let o = y * w;
                    for x in 1..w - 1 {
                        let i = o + x;
                        row[x] = (row[x] + mu[i] + a_curr * curr[i] - a_prev * prev[i]) / a_next;
                    }
                });
                grid::zero_boundary(&mut next);
                next
            }
            Scheme::Implicit => {
                let mut rhs = ScalarField::zeros(grid);
                par::fill(exec, rhs.values_mut(), |i| {
                    mu[i] + a_curr * curr[i] - a_prev * prev[i]
                });
                grid::zero_boundary(&mut rhs);
                let mut next = self.phi_curr.clone();
                let settings = CgSettings {
                    tol: IMPLICIT_TOL,
                    max_iter: 10 * (grid.width() + grid.height()),
                };
                solver::solve_shifted(
                    exec,
                    grid,
                    a_next,
                    rhs.values(),
                    next.values_mut(),
                    settings,
                )?;
                next
            }
        };
        if !next.is_finite() {
            return Err(Error::SolverDiverged {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        self.phi_prev = std::mem::replace(&mut self.phi_curr, next);
        self.step_index += 1;
        Ok(())
    }

    /// `sum m*((phi^n - phi^{n-1})/tau)^2 + |grad_h phi^n|^2`, the gradient
    /// term summed over every lattice edge.
    pub fn energy(&self) -> f64 {
        let tau = self.params.tau;
        let m = self.params.inertia();
        let kinetic: f64 = self
            .phi_curr
            .values()
            .iter()
            .zip(self.phi_prev.values())
            .map(|(a, b)| {
                let v = (a - b) / tau;
                m * v * v
            })
            .sum();
        kinetic + edge_energy(&self.phi_curr)
    }
}

fn edge_energy(f: &ScalarField) -> f64 {
    let g = f.grid();
    let mut e = 0.0;
    for y in 0..g.height() {
        for x in 0..g.width() {
            let v = f.get(x, y);
            if x + 1 < g.width() {
                let d = f.get(x + 1, y) - v;
                e += d * d;
            }
            if y + 1 < g.height() {
                let d = f.get(x, y + 1) - v;
                e += d * d;
            }
        }
    }
    e
}

/// Functional form of [`PotentialState::advance`].
pub fn step(state: &PotentialState, mass: &ScalarField, scheme: Scheme) -> Result<PotentialState> {
    let mut next = state.clone();
    next.advance(mass, scheme)?;
    Ok(next)
}

/// Solves `laplacian(phi) = -mu` with `phi = 0` on the boundary.
pub fn solve_poisson(mass: &ScalarField) -> Result<ScalarField> {
    solve_poisson_with(mass, Execution::default())
}

pub fn solve_poisson_with(mass: &ScalarField, exec: Execution) -> Result<ScalarField> {
    let g = mass.grid();
    let settings = CgSettings {
        tol: 1e-9,
        max_iter: 20 * (g.width() + g.height()) + 100,
    };
    solver::solve_field(exec, 0.0, mass, None, settings)
}
