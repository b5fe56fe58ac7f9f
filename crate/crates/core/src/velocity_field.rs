//! Gravity-turn velocity field.
//!
//! For a given range-to-go `x_go >= 0` and height-to-go `z_go` there is a
//! unique speed and flight-path angle whose gravity turn (at thrust-to-weight
//! `beta`) ends exactly at the landing site. The flight-path angle is the
//! root of a strictly increasing scalar function on `(-pi/2, pi/2)`, found
//! here by a bracketed Newton iteration.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::gravity_turn::GAMMA_GUARD;

/// Below this horizontal range the vertical-descent solution is used (m).
pub const VERTICAL_RANGE_EPS: f64 = 1e-2;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 25;

/// Landing-site geometry relative to the lander in the guidance plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeGeometry {
    /// Horizontal range-to-go (m), never negative.
    pub x_go: f64,
    /// Height-to-go `z_site - z` (m); negative while the lander is above the site.
    pub z_go: f64,
}

impl RelativeGeometry {
    pub fn new(x_go: f64, z_go: f64) -> Result<Self> {
        if !(x_go >= 0.0) || !x_go.is_finite() {
            return Err(Error::InvalidParameter {
                name: "x_go",
                value: x_go,
                reason: "horizontal range-to-go must be non-negative",
            });
        }
        if !z_go.is_finite() {
            return Err(Error::InvalidParameter {
                name: "z_go",
                value: z_go,
                reason: "height-to-go must be finite",
            });
        }
        Ok(Self { x_go, z_go })
    }

    /// `(4 beta^2 - 4) z_go / ((4 beta^2 - 1) x_go)`
    pub fn kappa(&self, beta: f64) -> f64 {
        let b2 = beta * beta;
        (4.0 * b2 - 4.0) * self.z_go / ((4.0 * b2 - 1.0) * self.x_go)
    }
}

/// How the flight-path angle was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    /// Newton left the bracket at least once and was replaced by bisection.
    Bisection,
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySolution {
    pub v_star: f64,
    pub gamma_star: f64,
    pub iterations: usize,
    pub residual: f64,
    pub method: SolveMethod,
}

impl VelocitySolution {
    /// Horizontal and vertical components `(v_x*, v_z*)`.
    pub fn components(&self) -> (f64, f64) {
        let (s, c) = self.gamma_star.sin_cos();
        if self.method == SolveMethod::Vertical {
            (0.0, -self.v_star)
        } else {
            (self.v_star * c, self.v_star * s)
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "thrust-to-weight ratio must exceed 1",
        });
    }
    Ok(())
}

fn shape_ratio(gamma: f64, beta: f64) -> f64 {
    let (s, c) = gamma.sin_cos();
    (2.0 * beta * s - s * s - 1.0) / ((2.0 * beta - s) * c)
}

/// Residual of the terminal-landing condition as a function of the
/// flight-path angle.
pub fn h_value(gamma: f64, geometry: &RelativeGeometry, beta: f64) -> Result<f64> {
    if !(geometry.x_go > 0.0) {
        return Err(Error::domain("h_value", "x_go must be positive"));
    }
    if !gamma.is_finite() || gamma.abs() >= FRAC_PI_2 {
        return Err(Error::domain("h_value", format!("|gamma| = {} >= pi/2", gamma.abs())));
    }
    Ok(shape_ratio(gamma, beta) - geometry.kappa(beta))
}

/// Derivative of [`h_value`]; strictly positive for `beta > 1`.
pub fn h_derivative(gamma: f64, beta: f64) -> f64 {
    let (s, c) = gamma.sin_cos();
    let den = (2.0 * beta - s) * c;
    (3.0 * (beta - s).powi(2) + beta * beta - 1.0) / (den * den)
}

fn speed_from_gamma(gamma: f64, geometry: &RelativeGeometry, beta: f64, g: f64) -> f64 {
    let (s, c) = gamma.sin_cos();
    ((4.0 * beta * beta - 1.0) * g * geometry.x_go / ((2.0 * beta - s) * c)).sqrt()
}

/// Desired flight-path angle and speed for `x_go > 0`.
///
/// Newton's method starts from the line-of-sight angle and is kept inside a
/// bracket `[lo, hi]` with `h(lo) < 0 < h(hi)`; any step that leaves the
/// bracket is replaced by a bisection step.
pub fn solve_gamma(
    geometry: &RelativeGeometry,
    beta: f64,
    g: f64,
    tol: f64,
    max_iter: usize,
) -> Result<VelocitySolution> {
    check_beta(beta)?;
    if !(geometry.x_go > 0.0) {
        return Err(Error::domain("solve_gamma", "x_go must be positive"));
    }
    let kappa = geometry.kappa(beta);
    let h = |gamma: f64| shape_ratio(gamma, beta) - kappa;
    // Scale-aware stopping: |h| carries the magnitude of kappa.
    let h_tol = tol * kappa.abs().max(1.0);

    let mut lo = -FRAC_PI_2 + GAMMA_GUARD;
    let mut hi = FRAC_PI_2 - GAMMA_GUARD;
    let mut gamma = geometry.z_go.atan2(geometry.x_go).clamp(lo, hi);
    let mut value = h(gamma);
    let mut method = SolveMethod::Newton;
    let mut iterations = 0;

    while value.abs() > h_tol && iterations < max_iter + 128 {
        if value < 0.0 {
            lo = gamma;
        } else {
            hi = gamma;
        }
        let newton = gamma - value / h_derivative(gamma, beta);
        let next = if iterations < max_iter && newton > lo && newton < hi {
            newton
        } else {
            method = SolveMethod::Bisection;
            0.5 * (lo + hi)
        };
        iterations += 1;
        if next == gamma || hi - lo <= 4.0 * f64::EPSILON {
            break;
        }
        gamma = next;
        value = h(gamma);
    }

    Ok(VelocitySolution {
        v_star: speed_from_gamma(gamma, geometry, beta, g),
        gamma_star: gamma,
        iterations,
        residual: value.abs(),
        method,
    })
}

/// Desired speed straight down onto the site when it lies directly below.
pub fn solve_vertical(z_go: f64, beta: f64, g: f64) -> Result<VelocitySolution> {
    check_beta(beta)?;
    if z_go > 0.0 {
        return Err(Error::SiteAboveLander { z_go });
    }
    Ok(VelocitySolution {
        v_star: (2.0 * (beta - 1.0) * g * z_go.abs()).sqrt(),
        gamma_star: -FRAC_PI_2,
        iterations: 0,
        residual: 0.0,
        method: SolveMethod::Vertical,
    })
}

/// Field solution with the vertical branch below [`VERTICAL_RANGE_EPS`].
pub fn solve(geometry: &RelativeGeometry, beta: f64, g: f64) -> Result<VelocitySolution> {
    if geometry.x_go < VERTICAL_RANGE_EPS {
        solve_vertical(geometry.z_go, beta, g)
    } else {
        solve_gamma(geometry, beta, g, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }
}

/// Remaining flight time when the field is followed exactly.
pub fn time_to_go_on_field(solution: &VelocitySolution, beta: f64, g: f64) -> f64 {
    let s = if solution.method == SolveMethod::Vertical {
        -1.0
    } else {
        solution.gamma_star.sin()
    };
    solution.v_star * (beta - s) / ((beta * beta - 1.0) * g)
}
