//! Closed-form reference solutions used as oracles for the steppers.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, Vec2};

/// Free-space wave potential of a unit mass switched on at `t = 0` at the
/// origin, valid inside the light cone `0 < r <= ct`.
pub fn analytic_point_mass_wave(r: f64, t: f64, c: f64) -> Result<f64> {
    let ct = c * t;
    if r == 0.0 {
        return Err(Error::SingularOrigin);
    }
    if !(r > 0.0) || r > ct {
        return Err(Error::OutsideLightCone { r, ct });
    }
    let root = (ct * ct - r * r).max(0.0).sqrt();
    Ok(((ct + root).ln() + (1.0 / r).ln()) / (2.0 * PI))
}

/// Heat kernel with diffusivity `c`, `exp(-r^2/4ct) / (4 pi c t)`.
pub fn analytic_heat_kernel(r: f64, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "diffusivity must be positive".into(),
        ));
    }
    let ct = c * t;
    Ok((-r * r / (4.0 * ct)).exp() / (4.0 * PI * ct))
}

/// Free-space gradient of the logarithmic potential of `mass`, summed
/// directly over every node: `-(1/2pi) sum (p - y)/|p - y|^2 mu(y)`.
pub fn gravitational_gradient_bruteforce(mass: &ScalarField, p: Vec2) -> Result<Vec2> {
    let g = mass.grid();
    let mut acc = Vec2::ZERO;
    for y in 0..g.height() {
        for x in 0..g.width() {
            let mu = mass.get(x, y);
            if mu == 0.0 {
                continue;
            }
            let d = p - Vec2::new(x as f64, y as f64);
            let r2 = d.dot(d);
            if r2 < 1e-24 {
                return Err(Error::SingularEvaluation { x: p.x, y: p.y });
            }
            acc += d * (mu / r2);
        }
    }
    Ok(acc * (-1.0 / (2.0 * PI)))
}
