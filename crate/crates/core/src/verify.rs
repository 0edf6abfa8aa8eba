//! Numerical self-checks of the potential stepper against closed forms and
//! direct solves.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField};
use crate::pde::{self, PdeParams, PotentialState, Scheme};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed error (in the check's own units).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Overrides every oracle's grid side; `None` uses the reference sizes.
    pub grid: Option<usize>,
    /// Scheme for the closed-form comparisons.
    pub scheme: Scheme,
    /// The configured model, stepped once more as a guard.
    pub model: PdeParams,
    pub model_scheme: Scheme,
}

fn timed(name: &str, f: impl FnOnce() -> Result<(f64, f64, String)>) -> Check {
    let start = Instant::now();
    let (passed, measured, tolerance, detail) = match f() {
        Ok((measured, tolerance, detail)) => (measured <= tolerance, measured, tolerance, detail),
        Err(e) => (false, f64::NAN, f64::NAN, e.to_string()),
    };
    Check {
        name: name.to_string(),
        passed,
        measured,
        tolerance,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let n = |default: usize| opts.grid.unwrap_or(default);
    let mut checks = vec![
        timed("point-mass wave", || point_mass_wave(n(257), opts.scheme)),
        timed("heat kernel", || heat_kernel(n(129), opts.scheme)),
        timed("poisson dense solve", || poisson_dense(n(16), 10)),
        timed("energy dissipation", || energy_dissipation(n(24), 20)),
    ];
    let limit_check = timed("limit convergence", || {
        let (e_last, tol, detail) = limit_convergence(n(65))?;
        Ok((e_last, tol, detail))
    });
    checks.push(limit_check);
    checks.push(timed("configured model", || {
        model_guard(opts.model, opts.model_scheme)
    }));
    VerifyReport { checks }
}

fn grid_of(n: usize) -> Result<Grid> {
    Grid::new(n, n)
}

/// Unit mass held at the center of an `n x n` grid of the `m = 1`,
/// `d = 1e-3`, `c = 1` model. Potential differences between axis probes at
/// `r in {1,2,4} (n-1)/32` are compared with the free-space closed form at
/// `ct = (n-1)/4`, before any reflection returns. Returns the worst relative
/// error of the differences.
pub fn point_mass_wave(n: usize, scheme: Scheme) -> Result<(f64, f64, String)> {
    let g = grid_of(n)?;
    let c0 = n / 2;
    let unit = (n - 1) as f64 / 32.0;
    let mut radii: Vec<usize> = [1.0, 2.0, 4.0]
        .iter()
        .map(|s| ((s * unit).round() as usize).max(1))
        .collect();
    radii.dedup();
    if radii.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid {n} too small for radial probes"
        )));
    }
    let ct = (n - 1) as f64 / 4.0;
    let mut params = PdeParams {
        m: 1.0,
        d: 1e-3,
        c: 1.0,
        tau: 1.0,
    };
    let bound = pde::stability_bound(&params)?;
    let steps = (ct / (bound / 4.0).min(0.125)).ceil() as usize;
    params.tau = ct / steps as f64;
    let mut mass = ScalarField::zeros(g);
    mass.set(c0, c0, 1.0);
    let mut state = PotentialState::new(g, params)?;
    for _ in 0..steps {
        state.advance(&mass, scheme)?;
    }
    let t = steps as f64 * params.tau;
    let phi = state.phi();
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            let (r1, r2) = (radii[i], radii[j]);
            let num = phi.get(c0 + r1, c0) - phi.get(c0 + r2, c0);
            let exact = pde::analytic_point_mass_wave(r1 as f64, t, 1.0)?
                - pde::analytic_point_mass_wave(r2 as f64, t, 1.0)?;
            let rel = ((num - exact) / exact).abs();
            worst = worst.max(rel);
            detail.push(format!("r={r1}-{r2}: {rel:.2e}"));
        }
    }
    Ok((
        worst,
        0.05,
        format!(
            "{} steps, tau={:.4}; {}",
            steps,
            params.tau,
            detail.join(", ")
        ),
    ))
}

/// Heat-preset response to a one-step unit impulse at the center, against
/// the heat kernel with diffusivity `c/d`, while the kernel width stays
/// below a sixth of the half-width.
pub fn heat_kernel(n: usize, scheme: Scheme) -> Result<(f64, f64, String)> {
    let g = grid_of(n)?;
    let c0 = n / 2;
    let half = (n - 1) as f64 / 2.0;
    let mut params = PdeParams::heat(1.0);
    let kappa = params.c / params.d;
    params.tau = 0.1 / kappa;
    if scheme == Scheme::Explicit {
        params.tau = params.tau.min(pde::stability_bound(&params)? / 4.0);
    }
    // kernel variance 2*kappa*t; stop where its std hits (1/6.4) half-width
    let var_max = (half / 6.4).powi(2);
    let targets = [0.5, 0.8, 1.0].map(|f| f * var_max / 2.0);
    let last = (targets[2] / kappa / params.tau).round() as usize;
    let mut impulse = ScalarField::zeros(g);
    impulse.set(c0, c0, 1.0);
    let zero = ScalarField::zeros(g);
    let mut state = PotentialState::new(g, params)?;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for step in 1..=last {
        state.advance(if step == 1 { &impulse } else { &zero }, scheme)?;
        let t = step as f64 * params.tau;
        let at_target = targets
            .iter()
            .any(|&kt| (kt / kappa / params.tau).round() as usize == step);
        if !at_target {
            continue;
        }
        let std = (2.0 * kappa * t).sqrt();
        let mut err: f64 = 0.0;
        for r in 0..=(std.floor() as usize) {
            let exact = params.tau / params.d * pde::analytic_heat_kernel(r as f64, t, kappa)?;
            err = err.max(((state.phi().get(c0 + r, c0) - exact) / exact).abs());
        }
        worst = worst.max(err);
        detail.push(format!("std={std:.2}: {err:.2e}"));
    }
    Ok((
        worst,
        0.02,
        format!(
            "{last} steps, tau={:.1e}; {}",
            params.tau,
            detail.join(", ")
        ),
    ))
}

/// Conjugate-gradient Poisson solution against Gaussian elimination.
pub fn poisson_dense(n: usize, cases: u64) -> Result<(f64, f64, String)> {
    let g = grid_of(n)?;
    let mut worst: f64 = 0.0;
    for seed in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mass = grid::apply_dirichlet(&ScalarField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)));
        let cg = pde::solve_poisson(&mass)?;
        worst = worst.max(cg.max_abs_diff(&dense_poisson(&mass))?);
    }
    Ok((worst, 1e-7, format!("{cases} random {n}x{n} sources")))
}

/// Solves `-laplacian(phi) = mu` on the interior by partial-pivot
/// elimination.
fn dense_poisson(mass: &ScalarField) -> ScalarField {
    let g = mass.grid();
    let iw = g.width() - 2;
    let n = iw * (g.height() - 2);
    let idx = |x: usize, y: usize| (y - 1) * iw + (x - 1);
    let mut a = vec![vec![0.0; n + 1]; n];
    for y in 1..g.height() - 1 {
        for x in 1..g.width() - 1 {
            let row = idx(x, y);
            a[row][row] = 4.0;
            for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if !g.is_boundary(nx, ny) {
                    a[row][idx(nx, ny)] = -1.0;
                }
            }
            a[row][n] = mass.get(x, y);
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut sol = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * sol[k]).sum();
        sol[row] = (a[row][n] - s) / a[row][row];
    }
    ScalarField::from_fn(g, |x, y| {
        if g.is_boundary(x, y) {
            0.0
        } else {
            sol[idx(x, y)]
        }
    })
}

/// Source-free implicit damped-wave runs from random states; counts steps
/// where the discrete energy rose.
pub fn energy_dissipation(n: usize, runs: u64) -> Result<(f64, f64, String)> {
    let g = grid_of(n)?;
    let zero = ScalarField::zeros(g);
    let mut violations = 0usize;
    for seed in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let phi0 = grid::apply_dirichlet(&ScalarField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)));
        let p = PdeParams {
            m: rng.gen_range(0.01..2.0),
            d: rng.gen_range(0.01..2.0),
            c: 1.0,
            tau: rng.gen_range(0.01..1.0),
        };
        let mut state = PotentialState::from_levels(phi0.clone(), phi0, p)?;
        let mut e = state.energy();
        for _ in 0..30 {
            state.advance(&zero, Scheme::Implicit)?;
            let next = state.energy();
            if next > e {
                violations += 1;
            }
            e = next;
        }
    }
    Ok((violations as f64, 0.0, format!("{runs} runs x 30 steps")))
}

/// Three Gaussian blobs at fixed fractions of the grid.
pub fn three_blob_mass(g: Grid) -> ScalarField {
    let (w, h) = (g.width() as f64, g.height() as f64);
    let blobs = [(0.3, 0.35, 1.0), (0.7, 0.3, 0.7), (0.5, 0.72, 0.5)];
    let s = w.min(h) / 16.0;
    grid::apply_dirichlet(&ScalarField::from_fn(g, |x, y| {
        blobs
            .iter()
            .map(|&(bx, by, a)| {
                let (dx, dy) = (x as f64 - bx * (w - 1.0), y as f64 - by * (h - 1.0));
                a * (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
            })
            .sum()
    }))
}

/// Gradient gap to the Poisson limit for `c in {1,2,4,8}`; passes when the
/// gap strictly decreases and the last is below a quarter of the first.
/// Reported as `e(8) / e(1)` against `0.25`.
pub fn limit_convergence(n: usize) -> Result<(f64, f64, String)> {
    let g = grid_of(n)?;
    let mass = three_blob_mass(g);
    let settle = 400.0 * ((n as f64) / 65.0).powi(2);
    let report = pde::verify_limit(
        &mass,
        &[1.0, 2.0, 4.0, 8.0],
        settle,
        pde::LimitOptions::default(),
    )?;
    let e = report.errors();
    let strictly = e.windows(2).all(|w| w[1] < w[0]);
    let ratio = e[e.len() - 1] / e[0];
    let detail = format!(
        "e(c) = [{}]",
        e.iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if !strictly {
        return Ok((
            f64::INFINITY,
            0.25,
            format!("not strictly decreasing; {detail}"),
        ));
    }
    Ok((ratio, 0.25, detail))
}

/// Ten steps of the configured model under a point source.
pub fn model_guard(params: PdeParams, scheme: Scheme) -> Result<(f64, f64, String)> {
    let g = grid_of(33)?;
    let mut mass = ScalarField::zeros(g);
    mass.set(16, 16, 1.0);
    let mut state = PotentialState::new(g, params)?;
    for _ in 0..10 {
        state.advance(&mass, scheme)?;
    }
    let bad = if state.phi().is_finite() { 0.0 } else { 1.0 };
    Ok((
        bad,
        0.0,
        format!(
            "m={}, d={}, c={}, tau={}, {scheme:?}",
            params.m, params.d, params.c, params.tau
        ),
    ))
}
