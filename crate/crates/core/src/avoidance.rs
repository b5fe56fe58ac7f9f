//! Glide-slope collision avoidance.
//!
//! The glide slope is the cone `r_z^2 = |r|^2 sin^2(phi)` around the landing
//! site. The ballistic ray `r + v t` is intersected with it, the cone is
//! replaced locally by its tangent plane, and a deceleration normal to that
//! plane is computed which cancels the approach speed before the lander comes
//! within `delta` of the plane.

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConstraint {
    /// Glide-slope angle above the horizontal (rad); 0 means flat ground.
    pub phi: f64,
    /// Safety distance kept from the tangent plane (m).
    pub delta: f64,
    /// Floor on the stopping distance (m).
    pub eps: f64,
}

impl ConeConstraint {
    pub const DEFAULT_EPS: f64 = 0.1;

    pub fn new(phi: f64, delta: f64, eps: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&phi) {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                reason: "glide-slope angle must lie in [0, pi/2)",
            });
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "safety distance must be non-negative",
            });
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                value: eps,
                reason: "distance floor must be positive",
            });
        }
        Ok(Self { phi, delta, eps })
    }

    /// Elevation angle of `r` above the horizontal as seen from the site.
    pub fn elevation(r: &Vec3) -> f64 {
        let n = r.norm();
        if n == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (r.z / n).clamp(-1.0, 1.0).asin()
        }
    }
}

/// Where the straight-line extrapolation of the current motion first meets
/// the cone, if it does so in forward time.
pub fn predict_intersection(r: &Vec3, v: &Vec3, cone: &ConeConstraint) -> Option<Vec3> {
    let vv = v.norm_squared();
    if vv == 0.0 {
        return None;
    }
    let s2 = cone.phi.sin().powi(2);
    let a = v.z * v.z - vv * s2;
    let b = r.z * v.z - r.dot(v) * s2;
    let c = r.z * r.z - r.norm_squared() * s2;

    let t_p = if a.abs() < 1e-9 * vv {
        if b == 0.0 {
            return None;
        }
        -c / (2.0 * b)
    } else {
        (-b - (b * b - a * c).abs().sqrt()) / a
    };
    (t_p.is_finite() && t_p > 0.0).then(|| r + v * t_p)
}

/// Unit normal of the plane tangent to the cone at `r_p`, pointing into the
/// admissible side.
pub fn tangent_normal(r_p: &Vec3, cone: &ConeConstraint) -> Vec3 {
    let (s, c) = cone.phi.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let n = Vec3::new(-r_p.x * s2, -r_p.y * s2, r_p.z * c2);
    let norm = n.norm();
    if norm <= f64::MIN_POSITIVE || cone.phi == 0.0 {
        Vec3::z()
    } else {
        n / norm
    }
}

/// Constant deceleration along `n_p` that brings the normal speed to zero
/// over the distance left before the safety margin.
pub fn normal_deceleration(
    r: &Vec3,
    v: &Vec3,
    r_p: &Vec3,
    n_p: &Vec3,
    cone: &ConeConstraint,
    g: f64,
) -> Vec3 {
    let v_n = v.dot(n_p);
    if v_n >= 0.0 {
        return Vec3::zeros();
    }
    let s = ((r - r_p).dot(n_p) - cone.delta).max(cone.eps);
    let gravity = Vec3::new(0.0, 0.0, -g);
    n_p * (-gravity.dot(n_p) + v_n * v_n / (2.0 * s))
}

/// Piecewise-linear ramp from 0 at `lo` to 1 at `hi`.
pub fn sigmoid(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        0.0
    } else if x > hi {
        1.0
    } else if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        1.0
    }
}

/// Avoidance acceleration, blended in between `c_lo` and `c_hi` of the
/// maximum thrust acceleration `t_max / m`.
#[allow(clippy::too_many_arguments)]
pub fn avoidance_acceleration(
    r: &Vec3,
    v: &Vec3,
    r_p: &Vec3,
    n_p: &Vec3,
    cone: &ConeConstraint,
    g: f64,
    accel_max: f64,
    c_lo: f64,
    c_hi: f64,
) -> Vec3 {
    let a_n = normal_deceleration(r, v, r_p, n_p, cone, g);
    a_n * sigmoid(a_n.norm(), c_lo * accel_max, c_hi * accel_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const G: f64 = 3.7114;

    fn flat() -> ConeConstraint {
        ConeConstraint::new(0.0, 5.0, 0.1).unwrap()
    }

    #[test]
    fn vertical_drop_hits_the_site() {
        let r = Vec3::new(0.0, 0.0, 100.0);
        let v = Vec3::new(0.0, 0.0, -10.0);
        let r_p = predict_intersection(&r, &v, &flat()).unwrap();
        assert!(r_p.norm() < 1e-12);
    }

    #[test]
    fn diagonal_line_hits_the_site() {
        let r = Vec3::new(100.0, 0.0, 100.0);
        let v = Vec3::new(-10.0, 0.0, -10.0);
        let r_p = predict_intersection(&r, &v, &flat()).unwrap();
        assert!(r_p.norm() < 1e-12);
    }

    #[test]
    fn receding_motion_has_no_intersection() {
        let r = Vec3::new(100.0, 0.0, 100.0);
        let v = Vec3::new(10.0, 0.0, 5.0);
        assert!(predict_intersection(&r, &v, &flat()).is_none());
        assert!(predict_intersection(&r, &Vec3::zeros(), &flat()).is_none());
    }

    #[test]
    fn shallow_descent_meets_the_upper_nappe() {
        let cone = ConeConstraint::new(4f64.to_radians(), 5.0, 0.1).unwrap();
        let r = Vec3::new(2000.0, 0.0, 1500.0);
        let v = Vec3::new(100.0, 0.0, -75.0);
        let r_p = predict_intersection(&r, &v, &cone).unwrap();
        assert!(r_p.z > 0.0);
        assert_relative_eq!(ConeConstraint::elevation(&r_p), cone.phi, max_relative = 1e-10);
    }

    #[test]
    fn flat_ground_normal_is_up() {
        let n = tangent_normal(&Vec3::new(30.0, -4.0, 0.0), &flat());
        assert_eq!(n, Vec3::z());
        let cone = ConeConstraint::new(0.3, 5.0, 0.1).unwrap();
        assert_eq!(tangent_normal(&Vec3::zeros(), &cone), Vec3::z());
    }

    #[test]
    fn normal_is_orthogonal_to_cone_generators() {
        let cone = ConeConstraint::new(0.2, 5.0, 0.1).unwrap();
        for az in [0.0, 1.0, 2.5, 4.0] {
            let (sa, ca) = f64::sin_cos(az);
            let (sp, cp) = cone.phi.sin_cos();
            let generator = Vec3::new(cp * ca, cp * sa, sp);
            let azimuthal = Vec3::new(-sa, ca, 0.0);
            let r_p = generator * 700.0;
            let n = tangent_normal(&r_p, &cone);
            assert!(n.dot(&generator).abs() < 1e-10);
            assert!(n.dot(&azimuthal).abs() < 1e-10);
            assert!(n.z > 0.0);
        }
    }

    #[test]
    fn vertical_drop_deceleration_closed_form() {
        let (h, w) = (400.0, 30.0);
        let cone = flat();
        let r = Vec3::new(0.0, 0.0, h);
        let v = Vec3::new(0.0, 0.0, -w);
        let r_p = predict_intersection(&r, &v, &cone).unwrap();
        let n = tangent_normal(&r_p, &cone);
        let a_n = normal_deceleration(&r, &v, &r_p, &n, &cone, G);
        assert_relative_eq!(a_n.z, G + w * w / (2.0 * (h - cone.delta)), max_relative = 1e-12);
        assert_eq!((a_n.x, a_n.y), (0.0, 0.0));
    }

    #[test]
    fn moving_away_from_plane_needs_nothing() {
        let cone = flat();
        let r = Vec3::new(0.0, 0.0, 50.0);
        let a = avoidance_acceleration(
            &r,
            &Vec3::new(1.0, 0.0, 2.0),
            &Vec3::zeros(),
            &Vec3::z(),
            &cone,
            G,
            7.0,
            0.75,
            0.95,
        );
        assert_eq!(a, Vec3::zeros());
    }

    #[test]
    fn sigmoid_regions() {
        let cone = flat();
        let r = Vec3::new(0.0, 0.0, 105.0);
        let a_max = 7.0;
        let accel = |w: f64| {
            avoidance_acceleration(
                &r,
                &Vec3::new(0.0, 0.0, -w),
                &Vec3::zeros(),
                &Vec3::z(),
                &cone,
                G,
                a_max,
                0.75,
                0.95,
            )
        };
        // |a_n| = g + w^2 / 200
        assert_eq!(accel(5.0), Vec3::zeros());
        let w_hi = ((0.99 * a_max - G) * 200.0).sqrt();
        assert_relative_eq!(accel(w_hi).z, 0.99 * a_max, max_relative = 1e-12);
        let w_mid = ((0.85 * a_max - G) * 200.0).sqrt();
        assert_relative_eq!(accel(w_mid).z, 0.5 * 0.85 * a_max, max_relative = 1e-12);
    }

    #[test]
    fn stopping_distance_is_floored() {
        let cone = flat();
        let r = Vec3::new(0.0, 0.0, 2.0);
        let v = Vec3::new(0.0, 0.0, -1.0);
        let a_n = normal_deceleration(&r, &v, &Vec3::zeros(), &Vec3::z(), &cone, G);
        assert_relative_eq!(a_n.z, G + 1.0 / (2.0 * cone.eps), max_relative = 1e-12);
    }

    #[test]
    fn applied_deceleration_stops_within_the_distance() {
        // 1-D check along the normal: with gravity plus the commanded thrust
        // the normal speed vanishes after travelling s.
        let cone = flat();
        let (h, w) = (300.0, 25.0);
        let r = Vec3::new(0.0, 0.0, h);
        let v = Vec3::new(0.0, 0.0, -w);
        let a_n = normal_deceleration(&r, &v, &Vec3::zeros(), &Vec3::z(), &cone, G);
        let net = a_n.z - G;
        let (mut z, mut vz, dt) = (h, -w, 1e-4);
        while vz < 0.0 {
            vz += net * dt;
            z += vz * dt;
        }
        assert_relative_eq!(z, cone.delta, epsilon = 1e-2);
    }

    #[test]
    fn cone_constructor_validates() {
        assert!(ConeConstraint::new(-0.1, 5.0, 0.1).is_err());
        assert!(ConeConstraint::new(1.6, 5.0, 0.1).is_err());
        assert!(ConeConstraint::new(0.1, -1.0, 0.1).is_err());
        assert!(ConeConstraint::new(0.1, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn intersection_lies_on_the_cone(
            rx in -3000.0..3000.0f64, ry in -3000.0..3000.0f64, rz in 300.0..2000.0f64,
            vx in -150.0..150.0f64, vy in -150.0..150.0f64, vz in -120.0..-1.0f64,
        ) {
            let cone = ConeConstraint::new(4f64.to_radians(), 5.0, 0.1).unwrap();
            let r = Vec3::new(rx, ry, rz);
            prop_assume!(ConeConstraint::elevation(&r) > cone.phi);
            let v = Vec3::new(vx, vy, vz);
            if let Some(r_p) = predict_intersection(&r, &v, &cone) {
                let lhs = r_p.z * r_p.z;
                let rhs = r_p.norm_squared() * cone.phi.sin().powi(2);
                prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.max(1e-6));
            }
        }

        #[test]
        fn normal_has_unit_length(px in -1e4..1e4f64, py in -1e4..1e4f64, pz in -1e3..1e3f64, phi in 0.0..1.5f64) {
            let cone = ConeConstraint::new(phi, 5.0, 0.1).unwrap();
            let n = tangent_normal(&Vec3::new(px, py, pz), &cone);
            prop_assert!((n.norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn blend_is_continuous(x in 0.0..20.0f64) {
            let (lo, hi) = (5.0, 6.5);
            let d = 1e-9;
            prop_assert!((sigmoid(x + d, lo, hi) - sigmoid(x, lo, hi)).abs() <= d / (hi - lo) + 1e-15);
        }
    }
}
