//! Gravity-turn tracking guidance.
//!
//! Each update builds the guidance frame `G` (x axis horizontal toward the
//! site, z axis up), solves the velocity field for the desired velocity, and
//! computes a feedback-linearising acceleration that drives the velocity
//! error to zero by the estimated touchdown time. The avoidance acceleration
//! and thrust limits are applied last.

use crate::avoidance::{self, ConeConstraint};
use crate::command::{self, AccelCommand};
use crate::error::{Error, Result};
use crate::velocity_field::{self, RelativeGeometry, VelocitySolution, VERTICAL_RANGE_EPS};
use crate::{Mat3, Vec3};

/// Floor on the time-to-go estimate (s).
pub const T_GO_FLOOR: f64 = 1e-3;

/// Position, velocity and mass of the lander in the landing-site frame `L`
/// (origin at the site, z toward the zenith).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderState {
    pub r: Vec3,
    pub v: Vec3,
    pub m: f64,
    pub t: f64,
}

impl LanderState {
    pub fn new(r: Vec3, v: Vec3, m: f64, t: f64) -> Self {
        Self { r, v, m, t }
    }
}

/// Rotation from `L` into the guidance frame plus the planar geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceFrame {
    /// Rows are the `G` basis vectors expressed in `L`.
    pub t_gl: Mat3,
    pub x_go: f64,
    pub z_go: f64,
    /// Set when the lander is within [`VERTICAL_RANGE_EPS`] of the site axis
    /// and the x axis was taken from `fallback`.
    pub degenerate: bool,
}

impl GuidanceFrame {
    /// Directly above the site the horizontal axis is undefined; `fallback`
    /// (or `+x_L` without one) is used instead.
    pub fn build(r: &Vec3, fallback: Option<&Vec3>) -> Self {
        let x_go = r.x.hypot(r.y);
        let (x_axis, degenerate) = if x_go >= VERTICAL_RANGE_EPS {
            (Vec3::new(-r.x / x_go, -r.y / x_go, 0.0), false)
        } else {
            (fallback.copied().unwrap_or_else(Vec3::x), true)
        };
        let z_axis = Vec3::z();
        let y_axis = z_axis.cross(&x_axis);
        let t_gl = Mat3::from_rows(&[x_axis.transpose(), y_axis.transpose(), z_axis.transpose()]);
        Self {
            t_gl,
            x_go,
            z_go: -r.z,
            degenerate,
        }
    }

    pub fn x_axis(&self) -> Vec3 {
        self.t_gl.row(0).transpose()
    }

    pub fn to_guidance(&self, v: &Vec3) -> Vec3 {
        self.t_gl * v
    }

    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        self.t_gl.transpose() * v
    }

    pub fn geometry(&self) -> Result<RelativeGeometry> {
        RelativeGeometry::new(self.x_go, self.z_go)
    }
}

/// Which mass the guidance uses for the reference acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassKnowledge {
    /// Current mass, with the modelled mass-flow rate for `beta_dot`.
    #[default]
    Measured,
    /// Initial mass throughout and `beta_dot = 0`.
    InitialOnly,
}

/// Control parameters and the lander constants the guidance needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    /// Error feedback gain.
    pub k: f64,
    /// Reference acceleration as a fraction of the maximum thrust acceleration.
    pub c_beta: f64,
    /// Velocity error above which avoidance is evaluated (m/s).
    pub c_e: f64,
    /// Safety distance from the glide-slope tangent plane (m).
    pub delta: f64,
    pub c_col_lo: f64,
    pub c_col_hi: f64,
    /// Glide-slope angle (rad).
    pub phi: f64,
    /// Stopping-distance floor for avoidance (m).
    pub eps: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Effective exhaust velocity (m/s).
    pub c: f64,
    pub g: f64,
    pub m_dry: f64,
    pub mass_knowledge: MassKnowledge,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            k: 2.4,
            c_beta: 0.95,
            c_e: 20.0,
            delta: 5.0,
            c_col_lo: 0.75,
            c_col_hi: 0.95,
            phi: 0.0,
            eps: ConeConstraint::DEFAULT_EPS,
            t_min: 4971.8,
            t_max: 13258.0,
            c: 1965.0,
            g: 3.7114,
            m_dry: 1405.0,
            mass_knowledge: MassKnowledge::Measured,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.k > 1.0) {
            return bad("k", self.k, "gain must exceed 1");
        }
        if !(self.c_beta > 0.0 && self.c_beta < 1.0) {
            return bad("c_beta", self.c_beta, "must lie in (0, 1)");
        }
        if !(self.c_e >= 0.0) {
            return bad("c_e", self.c_e, "must be non-negative");
        }
        if !(0.0 <= self.c_col_lo && self.c_col_lo < self.c_col_hi && self.c_col_hi <= 1.0) {
            return bad("c_col_lo", self.c_col_lo, "need 0 <= c_col_lo < c_col_hi <= 1");
        }
        if !(self.t_min >= 0.0 && self.t_min < self.t_max) {
            return bad("t_min", self.t_min, "need 0 <= t_min < t_max");
        }
        if !(self.c > 0.0) {
            return bad("c", self.c, "exhaust velocity must be positive");
        }
        if !(self.g > 0.0) {
            return bad("g", self.g, "gravity must be positive");
        }
        if !(self.m_dry > 0.0) {
            return bad("m_dry", self.m_dry, "dry mass must be positive");
        }
        self.cone().map(|_| ())
    }

    pub fn cone(&self) -> Result<ConeConstraint> {
        ConeConstraint::new(self.phi, self.delta, self.eps)
    }
}

/// Per-trajectory memory: the last valid frame axis and the initial mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryContext {
    pub last_x_axis: Option<Vec3>,
    pub initial_mass: f64,
}

impl TrajectoryContext {
    pub fn new(initial_mass: f64) -> Self {
        Self {
            last_x_axis: None,
            initial_mass,
        }
    }
}

/// Reference thrust-to-weight ratio and its rate for mass `m`.
pub fn beta_profile(m: f64, config: &GuidanceConfig) -> Result<(f64, f64)> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            reason: "mass must be positive",
        });
    }
    let beta = config.c_beta * config.t_max / (m * config.g);
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "reference thrust cannot exceed weight",
        });
    }
    Ok((beta, beta * beta * config.g / config.c))
}

/// Desired velocity in frame `G` from the velocity field.
pub fn desired_velocity(
    frame: &GuidanceFrame,
    beta: f64,
    g: f64,
) -> Result<(Vec3, VelocitySolution)> {
    let solution = velocity_field::solve(&frame.geometry()?, beta, g)?;
    let (vx, vz) = solution.components();
    Ok((Vec3::new(vx, 0.0, vz), solution))
}

/// Partial derivatives of the two terminal-landing equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobians {
    /// With respect to the desired velocity (x and z rows/columns only).
    pub f_vd: Mat3,
    /// Inverse of the 2x2 block of `f_vd`, embedded in 3x3.
    pub f_vd_dagger: Mat3,
    pub f_rgo: Mat3,
    pub f_beta: Vec3,
    /// Determinant of the 2x2 block of `f_vd`.
    pub determinant: f64,
}

pub fn jacobians(v_d: &Vec3, geometry: &RelativeGeometry, beta: f64, g: f64) -> Result<Jacobians> {
    let v = v_d.norm();
    if !(v > 0.0) {
        return Err(Error::domain("jacobians", "desired speed must be positive"));
    }
    let (vx, vz) = (v_d.x, v_d.z);
    let fx_vx = (2.0 * beta * vx * vx + 2.0 * beta * v * v - v * vz) / v;
    let fx_vz = (2.0 * beta * vx * vz - v * vx) / v;
    let fz_vx = (2.0 * beta * vx * vz - 2.0 * v * vx) / v;
    let fz_vz = (2.0 * beta * vz * vz + 2.0 * beta * v * v - 4.0 * v * vz) / v;
    let det = fx_vx * fz_vz - fz_vx * fx_vz;

    #[rustfmt::skip]
    let f_vd = Mat3::new(
        fx_vx, 0.0, fx_vz,
        0.0,   0.0, 0.0,
        fz_vx, 0.0, fz_vz,
    );
    #[rustfmt::skip]
    let f_vd_dagger = Mat3::new(
        fz_vz / det,  0.0, -fx_vz / det,
        0.0,          0.0, 0.0,
        -fz_vx / det, 0.0, fx_vx / det,
    );
    let b2 = beta * beta;
    let f_rgo = Mat3::from_diagonal(&Vec3::new(-(4.0 * b2 - 1.0) * g, 0.0, -(4.0 * b2 - 4.0) * g));
    let f_beta = Vec3::new(
        2.0 * v * vx - 8.0 * beta * g * geometry.x_go,
        0.0,
        2.0 * v * vz - 8.0 * beta * g * geometry.z_go,
    );
    Ok(Jacobians {
        f_vd,
        f_vd_dagger,
        f_rgo,
        f_beta,
        determinant: det,
    })
}

/// `(beta v_d - v_z*) / ((beta^2 - 1) g) + |e| / (beta g)`, floored at [`T_GO_FLOOR`].
pub fn time_to_go_estimate(v_d: &Vec3, e: &Vec3, beta: f64, g: f64) -> f64 {
    let on_field = (beta * v_d.norm() - v_d.z) / ((beta * beta - 1.0) * g);
    (on_field + e.norm() / (beta * g)).max(T_GO_FLOOR)
}

/// Tracking acceleration in frame `G`, split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingAccel {
    pub a_trk: Vec3,
    /// Reference gravity-turn deceleration including the `beta_dot` term.
    pub gravity_turn: Vec3,
    pub feedback: Vec3,
    pub feedforward: Vec3,
    pub e: Vec3,
    pub t_go_hat: f64,
}

/// Inputs shared by both forms of the tracking law, all in frame `G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingInputs {
    pub v: Vec3,
    pub v_d: Vec3,
    pub x_go: f64,
    pub z_go: f64,
    pub beta: f64,
    pub beta_dot: f64,
    pub k: f64,
    pub g: f64,
}

impl TrackingInputs {
    fn geometry(&self) -> RelativeGeometry {
        RelativeGeometry {
            x_go: self.x_go,
            z_go: self.z_go,
        }
    }

    /// `v_x* / x_go`, taken as zero close to the vertical axis.
    fn turn_rate_ratio(&self) -> f64 {
        if self.x_go < VERTICAL_RANGE_EPS {
            0.0
        } else {
            self.v_d.x / self.x_go
        }
    }
}

/// Tracking law in its rearranged form: gravity-turn deceleration, error
/// feedback and feedforward on the error.
pub fn tracking_acceleration(inp: &TrackingInputs) -> TrackingAccel {
    let e = inp.v_d - inp.v;
    let t_go_hat = time_to_go_estimate(&inp.v_d, &e, inp.beta, inp.g);
    let feedback = e * (inp.k / t_go_hat);
    let v_star = inp.v_d.norm();

    let (gravity_turn, feedforward) = match jacobians(&inp.v_d, &inp.geometry(), inp.beta, inp.g) {
        Ok(j) => {
            let gt = -inp.v_d * (inp.beta * inp.g / v_star)
                - j.f_vd_dagger * j.f_beta * inp.beta_dot;
            let omega = Mat3::from_diagonal(&Vec3::new(0.0, inp.turn_rate_ratio(), 0.0));
            let ff = -(j.f_vd_dagger * j.f_rgo * e) + omega * e;
            (gt, ff)
        }
        // On the site itself: the terminal limit of the reference is straight up.
        Err(_) => (Vec3::new(0.0, 0.0, inp.beta * inp.g), Vec3::zeros()),
    };

    TrackingAccel {
        a_trk: gravity_turn + feedback + feedforward,
        gravity_turn,
        feedback,
        feedforward,
        e,
        t_go_hat,
    }
}

/// Tracking law written directly as desired-velocity rate plus frame
/// rotation, gravity compensation and error feedback.
pub fn tracking_acceleration_direct(inp: &TrackingInputs) -> Result<Vec3> {
    let j = jacobians(&inp.v_d, &inp.geometry(), inp.beta, inp.g)?;
    let e = inp.v_d - inp.v;
    let t_go_hat = time_to_go_estimate(&inp.v_d, &e, inp.beta, inp.g);
    let v_d_rate = j.f_vd_dagger * j.f_rgo * inp.v - j.f_vd_dagger * j.f_beta * inp.beta_dot;
    let omega = if inp.x_go < VERTICAL_RANGE_EPS {
        Vec3::zeros()
    } else {
        Vec3::new(0.0, 0.0, -inp.v.y / inp.x_go)
    };
    let gravity = Vec3::new(0.0, 0.0, -inp.g);
    Ok(v_d_rate + omega.cross(&inp.v_d) - gravity + e * (inp.k / t_go_hat))
}

/// Everything produced by one guidance update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    /// Commanded acceleration in `L`.
    pub u: Vec3,
    /// Desired velocity in `G`.
    pub v_d: Vec3,
    /// Velocity error in `G`.
    pub e: Vec3,
    pub t_go_hat: f64,
    pub beta: f64,
    pub beta_dot: f64,
    /// Tracking acceleration in `L`.
    pub a_trk: Vec3,
    /// Avoidance acceleration in `L`.
    pub a_col: Vec3,
    /// The avoidance branch was evaluated this step.
    pub avoidance_active: bool,
    pub saturated: bool,
    pub frame: GuidanceFrame,
    pub solution: VelocitySolution,
}

/// One full guidance update. Errors carry the index (1-6) of the stage that
/// failed.
pub fn guidance_step(
    state: &LanderState,
    config: &GuidanceConfig,
    ctx: &mut TrajectoryContext,
) -> Result<GuidanceOutput> {
    // 1. reference acceleration and frame
    let m_est = match config.mass_knowledge {
        MassKnowledge::Measured => state.m,
        MassKnowledge::InitialOnly => ctx.initial_mass,
    };
    let (beta, mut beta_dot) = beta_profile(m_est, config).map_err(|e| e.at_step(1))?;
    if config.mass_knowledge == MassKnowledge::InitialOnly {
        beta_dot = 0.0;
    }
    let frame = GuidanceFrame::build(&state.r, ctx.last_x_axis.as_ref());
    if !frame.degenerate {
        ctx.last_x_axis = Some(frame.x_axis());
    }

    // 2. field solution
    let (v_d, solution) = desired_velocity(&frame, beta, config.g).map_err(|e| e.at_step(2))?;

    // 3-4. error, time-to-go and tracking acceleration
    let inputs = TrackingInputs {
        v: frame.to_guidance(&state.v),
        v_d,
        x_go: frame.x_go,
        z_go: frame.z_go,
        beta,
        beta_dot,
        k: config.k,
        g: config.g,
    };
    let trk = tracking_acceleration(&inputs);
    if !trk.a_trk.iter().all(|c| c.is_finite()) {
        return Err(Error::domain("tracking_acceleration", "non-finite command").at_step(4));
    }
    let a_trk = frame.to_local(&trk.a_trk);

    // 5. avoidance
    let accel_max = config.t_max / m_est;
    let avoidance_active = !(trk.e.norm() < config.c_e && a_trk.norm() < accel_max);
    let a_col = if avoidance_active {
        let cone = config.cone().map_err(|e| e.at_step(5))?;
        match avoidance::predict_intersection(&state.r, &state.v, &cone) {
            Some(r_p) => {
                let n_p = avoidance::tangent_normal(&r_p, &cone);
                avoidance::avoidance_acceleration(
                    &state.r,
                    &state.v,
                    &r_p,
                    &n_p,
                    &cone,
                    config.g,
                    accel_max,
                    config.c_col_lo,
                    config.c_col_hi,
                )
            }
            None => Vec3::zeros(),
        }
    } else {
        Vec3::zeros()
    };

    // 6. final command
    let AccelCommand {
        u,
        saturated_low,
        saturated_high,
    } = command::total_command(&a_col, &a_trk, m_est, config.t_min, config.t_max)
        .map_err(|e| e.at_step(6))?;

    Ok(GuidanceOutput {
        u,
        v_d,
        e: trk.e,
        t_go_hat: trk.t_go_hat,
        beta,
        beta_dot,
        a_trk,
        a_col,
        avoidance_active,
        saturated: saturated_low || saturated_high,
        frame,
        solution,
    })
}

/// Closed-form error of the fixed-final-time loop `e' = -(k / t_go) e`.
pub fn fixed_time_error(k: f64, t_f: f64, t: f64, e0: f64) -> f64 {
    ((t_f - t) / t_f).powf(k) * e0
}

/// Bound on `|e_i(t)|` for the same loop driven by a disturbance of
/// magnitude at most `d_max`.
pub fn disturbed_error_bound(k: f64, t_f: f64, t: f64, e0_abs: f64, d_max: f64) -> f64 {
    let t_go = t_f - t;
    (t_go / t_f).powf(k) * e0_abs + t_go * d_max / (k - 1.0)
}

/// RK4 integration of `e' = -(k / (t_f - t)) e + d` from `t = 0` up to
/// `t_stop < t_f`. Returns `(t, e)` samples including both ends.
pub fn integrate_fixed_time_error(
    k: f64,
    t_f: f64,
    e0: Vec3,
    disturbance: impl Fn(f64) -> Vec3,
    dt: f64,
    t_stop: f64,
) -> Vec<(f64, Vec3)> {
    let rate = |t: f64, e: &Vec3| -e * (k / (t_f - t)) + disturbance(t);
    let mut out = vec![(0.0, e0)];
    let (mut t, mut e) = (0.0, e0);
    while t < t_stop - 1e-12 {
        let h = dt.min(t_stop - t);
        let k1 = rate(t, &e);
        let k2 = rate(t + h / 2.0, &(e + k1 * (h / 2.0)));
        let k3 = rate(t + h / 2.0, &(e + k2 * (h / 2.0)));
        let k4 = rate(t + h, &(e + k3 * h));
        e += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        t += h;
        out.push((t, e));
    }
    out
}
