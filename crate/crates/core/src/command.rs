//! Thrust-command shaping: magnitude saturation and the prioritised sum of
//! the avoidance and tracking accelerations.

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelCommand {
    /// Commanded acceleration in the local frame (m/s^2).
    pub u: Vec3,
    pub saturated_low: bool,
    pub saturated_high: bool,
}

/// Clamp the magnitude of `x` to `[a, b]`, keeping its direction.
pub fn sat(x: &Vec3, a: f64, b: f64) -> Result<Vec3> {
    let n = x.norm();
    if n < a {
        if n == 0.0 {
            return Err(Error::ZeroVectorSaturation { lower: a });
        }
        Ok(x * (a / n))
    } else if n > b {
        Ok(x * (b / n))
    } else {
        Ok(*x)
    }
}

fn sat_upper(x: &Vec3, b: f64) -> Vec3 {
    let n = x.norm();
    if n > b {
        x * (b / n)
    } else {
        *x
    }
}

/// The part of `y` that can be added to `x` without shrinking the component
/// along `x` and without leaving the ball of radius `c`.
pub fn fit(x: &Vec3, y: &Vec3, c: f64) -> Vec3 {
    let xn = x.norm();
    if xn > c {
        return Vec3::zeros();
    }
    let xy = x.dot(y);
    if xy < 0.0 {
        // xn > 0 here, otherwise the dot product would vanish.
        let x_hat = x / xn;
        let perp = y - x_hat * y.dot(&x_hat);
        return sat_upper(&perp, (c * c - xn * xn).max(0.0).sqrt());
    }
    let yn = y.norm();
    if yn == 0.0 {
        return Vec3::zeros();
    }
    // Largest t with |x + t y_hat| = c.
    let p = xy / yn;
    let reach = -p + (p * p + c * c - xn * xn).max(0.0).sqrt();
    sat_upper(y, reach)
}

/// Final acceleration command, giving the avoidance acceleration priority
/// and keeping the magnitude within the thrust bounds.
pub fn total_command(
    a_col: &Vec3,
    a_trk: &Vec3,
    m: f64,
    t_min: f64,
    t_max: f64,
) -> Result<AccelCommand> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            reason: "mass must be positive",
        });
    }
    let (lo, hi) = (t_min / m, t_max / m);
    let fitted = fit(a_col, a_trk, hi);
    let clipped = fitted != *a_trk;
    let sum = a_col + fitted;
    let n = sum.norm();
    if n == 0.0 {
        // Idle vertical thrust.
        return Ok(AccelCommand {
            u: Vec3::new(0.0, 0.0, lo),
            saturated_low: true,
            saturated_high: false,
        });
    }
    Ok(AccelCommand {
        u: sat(&sum, lo, hi)?,
        saturated_low: n < lo,
        saturated_high: clipped || n > hi,
    })
}
