//! Matrix-free conjugate gradients for `(shift * I - laplacian) x = b` with
//! homogeneous Dirichlet boundary.

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgSettings {
    /// Target for `max|r| / max|b|`.
    pub tol: f64,
    pub max_iter: usize,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn apply(exec: Execution, grid: Grid, shift: f64, x: &[f64], out: &mut [f64]) {
    grid::laplacian_into(exec, grid, x, out);
    let w = grid.width();
    let h = grid.height();
    par::for_each_row(exec, out, w, |y, row| {
        if y == 0 || y + 1 == h {
            return;
        }
        let xr = &x[y * w..(y + 1) * w];
        for i in 1..w - 1 {
            row[i] = shift * xr[i] - row[i];
        }
    });
}

/// Solves the shifted system starting from `x` (overwritten with the
/// solution). Boundary entries of `b` must be 0. Returns the iteration count.
pub(crate) fn solve_shifted(
    exec: Execution,
    grid: Grid,
    shift: f64,
    b: &[f64],
    x: &mut [f64],
    settings: CgSettings,
) -> Result<usize> {
    let n = grid.len();
    let b_norm = max_abs(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(0);
    }
    let target = settings.tol * b_norm;

    let mut r = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    // Outer loop restarts from the true residual when the recurrence drifts.
    for _restart in 0..4 {
        apply(exec, grid, shift, x, &mut ap);
        par::fill(exec, &mut r, |i| b[i] - ap[i]);
        if max_abs(&r) <= target {
            return Ok(iterations);
        }
        p.copy_from_slice(&r);
        let mut rr = par::dot(exec, &r, &r);
        while iterations < settings.max_iter {
            apply(exec, grid, shift, &p, &mut ap);
            let pap = par::dot(exec, &p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rr / pap;
            par::update_pair(exec, x, &mut r, |xi, ri, i| {
                *xi += alpha * p[i];
                *ri -= alpha * ap[i];
            });
            iterations += 1;
            if max_abs(&r) <= 0.5 * target {
                break;
            }
            let rr_next = par::dot(exec, &r, &r);
            let beta = rr_next / rr;
            rr = rr_next;
            par::fill_in_place(exec, &mut p, |i, pi| r[i] + beta * pi);
        }
        if iterations >= settings.max_iter {
            break;
        }
    }
    apply(exec, grid, shift, x, &mut ap);
    let residual = (0..n).fold(0.0f64, |m, i| m.max((b[i] - ap[i]).abs()));
    if residual <= target {
        Ok(iterations)
    } else {
        Err(Error::SolverDiverged {
            iterations,
            residual: residual / b_norm,
        })
    }
}

/// Convenience wrapper returning a fresh field.
pub(crate) fn solve_field(
    exec: Execution,
    shift: f64,
    rhs: &ScalarField,
    guess: Option<&ScalarField>,
    settings: CgSettings,
) -> Result<ScalarField> {
    let grid = rhs.grid();
    let mut b = rhs.clone();
    grid::zero_boundary(&mut b);
    let mut x = match guess {
        Some(g) => {
            let mut g = g.clone();
            grid::zero_boundary(&mut g);
            g
        }
        None => ScalarField::zeros(grid),
    };
    solve_shifted(exec, grid, shift, b.values(), x.values_mut(), settings)?;
    Ok(x)
}
