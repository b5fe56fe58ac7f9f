//! Closed-loop 3-DoF point-mass simulation.
//!
//! Guidance is recomputed at every step and held over the step. The thrust
//! force `m (1 + eta + xi) M u` is evaluated at the start of the step and
//! held, so the mass flow is constant within a step.

use std::io::Write;
use std::path::Path;

use nalgebra::Rotation3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::command;
use crate::error::{Error, Result};
use crate::guidance::{self, GuidanceConfig, LanderState, TrajectoryContext};
use crate::{Mat3, Vec3};

pub const DEFAULT_DT: f64 = 0.01;
pub const T_MAX_GUARD: f64 = 400.0;
/// Termination ball: distance (m) and speed (m/s).
pub const LAND_RADIUS: f64 = 0.01;
pub const LAND_SPEED: f64 = 0.05;

/// Vehicle constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderParams {
    pub m_wet: f64,
    pub m_dry: f64,
    pub t_max: f64,
    pub t_min: f64,
    /// Effective exhaust velocity (m/s).
    pub c: f64,
    pub g: f64,
}

impl Default for LanderParams {
    fn default() -> Self {
        Self {
            m_wet: 1905.0,
            m_dry: 1405.0,
            t_max: 13258.0,
            t_min: 4971.8,
            c: 1965.0,
            g: 3.7114,
        }
    }
}

impl LanderParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("m_wet", self.m_wet),
            ("m_dry", self.m_dry),
            ("t_max", self.t_max),
            ("t_min", self.t_min),
            ("c", self.c),
            ("g", self.g),
        ];
        for (name, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        if self.m_dry >= self.m_wet {
            return Err(Error::InvalidParameter {
                name: "m_dry",
                value: self.m_dry,
                reason: "dry mass must be below wet mass",
            });
        }
        if self.t_min >= self.t_max {
            return Err(Error::InvalidParameter {
                name: "t_min",
                value: self.t_min,
                reason: "minimum thrust must be below maximum thrust",
            });
        }
        Ok(())
    }

    pub fn gravity(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.g)
    }

    /// Guidance configuration with these constants and default gains.
    pub fn guidance_config(&self) -> GuidanceConfig {
        GuidanceConfig {
            t_min: self.t_min,
            t_max: self.t_max,
            c: self.c,
            g: self.g,
            m_dry: self.m_dry,
            ..GuidanceConfig::default()
        }
    }
}

/// Thrust errors and external accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceModel {
    /// Thrust scale factor (fraction).
    pub eta: f64,
    /// Thrust instability factor for the current step (fraction).
    pub xi: f64,
    /// Standard deviation used to resample `xi` every step.
    pub xi_sigma: f64,
    /// Misalignment angles (rad).
    pub mu: [f64; 3],
    /// Gravity-bias fractions.
    pub lambda: Vec3,
    /// Atmospheric density (kg/m^3).
    pub rho: f64,
    pub c_d: f64,
    /// Reference area (m^2).
    pub s_ref: f64,
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self::none()
    }
}

impl DisturbanceModel {
    pub const MARS_RHO: f64 = 0.0274;
    pub const LANDER_C_D: f64 = 1.0;
    pub const LANDER_S_REF: f64 = 5.0;

    pub fn none() -> Self {
        Self {
            eta: 0.0,
            xi: 0.0,
            xi_sigma: 0.0,
            mu: [0.0; 3],
            lambda: Vec3::zeros(),
            rho: 0.0,
            c_d: 0.0,
            s_ref: 0.0,
        }
    }

    pub fn with_mars_drag(self) -> Self {
        Self {
            rho: Self::MARS_RHO,
            c_d: Self::LANDER_C_D,
            s_ref: Self::LANDER_S_REF,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("rho", self.rho), ("s_ref", self.s_ref), ("xi_sigma", self.xi_sigma)] {
            if !(value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    /// `R1(mu1) R2(mu2) R3(mu3)`.
    pub fn misalignment(&self) -> Mat3 {
        let [a, b, c] = self.mu;
        (Rotation3::from_axis_angle(&Vec3::x_axis(), a)
            * Rotation3::from_axis_angle(&Vec3::y_axis(), b)
            * Rotation3::from_axis_angle(&Vec3::z_axis(), c))
        .into_inner()
    }

    /// Thrust force delivered for commanded acceleration `u` at mass `m`.
    pub fn thrust_force(&self, u: &Vec3, m: f64) -> Vec3 {
        self.misalignment() * u * (m * (1.0 + self.eta + self.xi))
    }

    /// Bias plus drag acceleration.
    pub fn acceleration(&self, v: &Vec3, m: f64, g: f64) -> Vec3 {
        let drag = v * (0.5 * self.rho * self.c_d * self.s_ref * v.norm() / m);
        self.lambda * g - drag
    }
}

/// Acceleration delivered at the start of a step.
pub fn delivered_acceleration(
    state: &LanderState,
    u: &Vec3,
    disturbance: &DisturbanceModel,
    params: &LanderParams,
) -> Vec3 {
    disturbance.thrust_force(u, state.m) / state.m
        + params.gravity()
        + disturbance.acceleration(&state.v, state.m, params.g)
}

/// Result of one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: LanderState,
    /// Propellant ran out during the step.
    pub fuel_exhausted: bool,
}

fn rk4(state: &LanderState, force: &Vec3, dist: &DisturbanceModel, params: &LanderParams, h: f64) -> LanderState {
    let flow = force.norm() / params.c;
    let rate = |v: &Vec3, m: f64| -> (Vec3, Vec3) {
        (*v, force / m + params.gravity() + dist.acceleration(v, m, params.g))
    };
    let s = state;
    let (r1, v1) = rate(&s.v, s.m);
    let (r2, v2) = rate(&(s.v + v1 * (h / 2.0)), s.m - flow * h / 2.0);
    let (r3, v3) = rate(&(s.v + v2 * (h / 2.0)), s.m - flow * h / 2.0);
    let (r4, v4) = rate(&(s.v + v3 * h), s.m - flow * h);
    LanderState {
        r: s.r + (r1 + r2 * 2.0 + r3 * 2.0 + r4) * (h / 6.0),
        v: s.v + (v1 + v2 * 2.0 + v3 * 2.0 + v4) * (h / 6.0),
        m: s.m - flow * h,
        t: s.t + h,
    }
}

/// Advances the state by `dt` with the command held. If the dry mass is
/// reached inside the step the remainder is flown unpowered.
pub fn step_dynamics(
    state: &LanderState,
    u: &Vec3,
    disturbance: &DisturbanceModel,
    params: &LanderParams,
    dt: f64,
) -> Result<StepResult> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "step must be positive",
        });
    }
    if !(state.m > params.m_dry) {
        return Err(Error::Propagation {
            t: state.t,
            reason: "no propellant left",
        });
    }
    let force = disturbance.thrust_force(u, state.m);
    let flow = force.norm() / params.c;
    let burn = if flow > 0.0 {
        (state.m - params.m_dry) / flow
    } else {
        f64::INFINITY
    };
    if burn >= dt {
        return Ok(StepResult {
            state: rk4(state, &force, disturbance, params, dt),
            fuel_exhausted: false,
        });
    }
    let mut mid = rk4(state, &force, disturbance, params, burn);
    mid.m = params.m_dry;
    Ok(StepResult {
        state: rk4(&mid, &Vec3::zeros(), disturbance, params, dt - burn),
        fuel_exhausted: true,
    })
}

/// Largest positive root of the energy-optimal time-to-go quartic, or
/// `None` at the origin with zero velocity.
pub fn zemzev_time_to_go(r: &Vec3, v: &Vec3, g: f64) -> Option<f64> {
    let a4 = 0.5 * g * g;
    let a2 = -2.0 * v.dot(v);
    let a1 = -12.0 * v.dot(r);
    let a0 = -18.0 * r.dot(r);
    let f = |t: f64| (((a4 * t) * t + a2) * t + a1) * t + a0;
    let df = |t: f64| ((4.0 * a4 * t) * t + 2.0 * a2) * t + a1;
    if a0 == 0.0 && a1 == 0.0 && a2 == 0.0 {
        return None;
    }
    // Cauchy bound on the root magnitudes.
    let bound = 1.0 + [a2, a1, a0].iter().map(|a| (a / a4).abs()).fold(0.0, f64::max);
    // f > 0 beyond the largest root; walk down to the first non-positive value.
    const SCAN: usize = 4096;
    let step = bound / SCAN as f64;
    let mut hi = bound;
    let mut lo = None;
    for i in (0..SCAN).rev() {
        let t = i as f64 * step;
        if f(t) <= 0.0 {
            lo = Some(t);
            break;
        }
        hi = t;
    }
    let mut lo = lo?;
    if f(lo) == 0.0 && lo > 0.0 {
        return Some(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = df(t);
        if d == 0.0 {
            break;
        }
        let next = t - f(t) / d;
        if next.is_finite() && (next - t).abs() < step {
            t = next;
        }
    }
    (t > 0.0).then_some(t)
}

/// ZEM/ZEV acceleration for a given time-to-go, saturated to the thrust
/// bounds. Falls back to full vertical braking when `t_go` is not positive.
pub fn zemzev_acceleration(state: &LanderState, t_go: f64, params: &LanderParams) -> Result<Vec3> {
    let (lo, hi) = (params.t_min / state.m, params.t_max / state.m);
    if !(t_go > 0.0) {
        return Ok(Vec3::new(0.0, 0.0, hi));
    }
    let g = params.gravity();
    let zem = -state.r - state.v * t_go - g * (0.5 * t_go * t_go);
    let zev = -state.v - g * t_go;
    let a = zem * (6.0 / (t_go * t_go)) - zev * (2.0 / t_go);
    if a.norm() == 0.0 {
        return Ok(Vec3::new(0.0, 0.0, lo));
    }
    command::sat(&a, lo, hi)
}

/// ZEM/ZEV command with the time-to-go re-solved from the current state.
pub fn zemzev_command(state: &LanderState, params: &LanderParams) -> Result<Vec3> {
    let t_go = zemzev_time_to_go(&state.r, &state.v, params.g).unwrap_or(0.0);
    zemzev_acceleration(state, t_go, params)
}

/// Guidance law flown in closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Law {
    #[default]
    GravityTurn,
    /// ZEM/ZEV with the final time fixed from the initial state.
    ZemZev,
}

impl std::str::FromStr for Law {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gt" => Ok(Law::GravityTurn),
            "zemzev" => Ok(Law::ZemZev),
            other => Err(format!("unknown law `{other}` (expected gt or zemzev)")),
        }
    }
}

/// Everything needed to fly one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub law: Law,
    pub dt: f64,
    pub t_max_guard: f64,
    pub lander: LanderParams,
    pub guidance: GuidanceConfig,
    pub disturbance: DisturbanceModel,
    /// Seed of the per-step thrust instability stream.
    pub noise_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let lander = LanderParams::default();
        Self {
            law: Law::GravityTurn,
            dt: DEFAULT_DT,
            t_max_guard: T_MAX_GUARD,
            lander,
            guidance: lander.guidance_config(),
            disturbance: DisturbanceModel::none(),
            noise_seed: 0,
        }
    }
}

/// One logged sample: the state at `t` and the command applied from `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub r: Vec3,
    pub v: Vec3,
    pub m: f64,
    pub u: Vec3,
    /// Commanded thrust as a fraction of `T_max`.
    pub throttle: f64,
    /// Elevation of the command (rad).
    pub theta_u: f64,
    /// Flight-path angle (rad).
    pub gamma: f64,
    pub e_norm: f64,
    pub avoidance_active: bool,
}

/// How the run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Landed,
    Impact,
    FuelExhausted,
    Timeout,
    GuidanceFailure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminationReport {
    pub outcome: Outcome,
    pub landed: bool,
    pub t_f: f64,
    pub fuel_used: f64,
    pub final_r: Vec3,
    pub final_v: Vec3,
    /// Flight-path angle at the end (rad).
    pub gamma_f: f64,
    /// Command elevation on the last step (rad).
    pub theta_u_f: f64,
    /// Smallest elevation of `r` outside the termination ball (rad).
    pub min_elevation_angle: f64,
    /// Elevation dropped below the glide-slope angle at some sample.
    pub constraint_violated: bool,
}

fn elevation(r: &Vec3) -> f64 {
    let n = r.norm();
    if n == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (r.z / n).clamp(-1.0, 1.0).asin()
    }
}

/// Elevation for the glide-slope check. Inside the termination ball the
/// lander is at the cone apex and the angle carries no information.
fn constrained_elevation(r: &Vec3) -> f64 {
    if r.norm() < LAND_RADIUS {
        std::f64::consts::FRAC_PI_2
    } else {
        elevation(r)
    }
}

fn angle_above_horizon(x: &Vec3) -> f64 {
    let n = x.norm();
    if n == 0.0 {
        0.0
    } else {
        (x.z / n).clamp(-1.0, 1.0).asin()
    }
}

fn within_ball(s: &LanderState) -> bool {
    s.r.norm() < LAND_RADIUS && s.v.norm() < LAND_SPEED
}

/// Flies `initial` to termination and returns the log and summary.
pub fn run_closed_loop(initial: &LanderState, config: &SimConfig) -> Result<(Vec<SimRecord>, TerminationReport)> {
    config.lander.validate()?;
    config.guidance.validate()?;
    config.disturbance.validate()?;
    if !(config.dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: config.dt,
            reason: "step must be positive",
        });
    }
    if initial.r.z < 0.0 {
        return Err(Error::InvalidParameter {
            name: "r0.z",
            value: initial.r.z,
            reason: "initial state must be above the ground",
        });
    }

    let params = &config.lander;
    let mut rng = ChaCha8Rng::seed_from_u64(config.noise_seed);
    let xi_dist = Normal::new(0.0, config.disturbance.xi_sigma).map_err(|e| Error::domain("xi", e.to_string()))?;
    let mut ctx = TrajectoryContext::new(initial.m);
    let t_f_zem = match config.law {
        Law::ZemZev => zemzev_time_to_go(&initial.r, &initial.v, params.g).map(|t| initial.t + t),
        Law::GravityTurn => None,
    };

    let phi = config.guidance.phi;
    let mut records = Vec::with_capacity(8192);
    let mut state = *initial;
    let mut last_u = Vec3::zeros();
    let mut min_elev = constrained_elevation(&state.r);
    let wrap = |e: Error| Outcome::GuidanceFailure(e.to_string());

    let outcome = loop {
        if within_ball(&state) {
            break Outcome::Landed;
        }
        if state.r.z < 0.0 {
            break Outcome::Impact;
        }
        if state.t - initial.t > config.t_max_guard {
            break Outcome::Timeout;
        }
        if let Some(t_f) = t_f_zem {
            if state.t >= t_f {
                // Fixed final time reached outside the ball.
                break Outcome::Impact;
            }
        }

        let (u, e_norm, avoid) = match config.law {
            Law::GravityTurn => match guidance::guidance_step(&state, &config.guidance, &mut ctx) {
                Ok(out) => (out.u, out.e.norm(), out.avoidance_active),
                Err(e) => break wrap(e),
            },
            Law::ZemZev => {
                let t_go = t_f_zem.map_or(0.0, |t_f| t_f - state.t);
                match zemzev_acceleration(&state, t_go, params) {
                    Ok(u) => (u, 0.0, false),
                    Err(e) => break wrap(e),
                }
            }
        };
        last_u = u;
        records.push(SimRecord {
            t: state.t,
            r: state.r,
            v: state.v,
            m: state.m,
            u,
            throttle: state.m * u.norm() / params.t_max,
            theta_u: angle_above_horizon(&u),
            gamma: angle_above_horizon(&state.v),
            e_norm,
            avoidance_active: avoid,
        });

        let mut dist = config.disturbance;
        if dist.xi_sigma > 0.0 {
            dist.xi = xi_dist.sample(&mut rng);
        }
        let step = match step_dynamics(&state, &u, &dist, params, config.dt) {
            Ok(s) => s,
            Err(e) => break wrap(e),
        };
        state = step.state;
        min_elev = min_elev.min(constrained_elevation(&state.r));
        if step.fuel_exhausted {
            break Outcome::FuelExhausted;
        }
    };

    let e_norm = records.last().map_or(0.0, |r| r.e_norm);
    records.push(SimRecord {
        t: state.t,
        r: state.r,
        v: state.v,
        m: state.m,
        u: last_u,
        throttle: state.m * last_u.norm() / params.t_max,
        theta_u: angle_above_horizon(&last_u),
        gamma: angle_above_horizon(&state.v),
        e_norm,
        avoidance_active: false,
    });

    let report = TerminationReport {
        landed: outcome == Outcome::Landed,
        outcome,
        t_f: state.t,
        fuel_used: initial.m - state.m,
        final_r: state.r,
        final_v: state.v,
        gamma_f: angle_above_horizon(&state.v),
        theta_u_f: angle_above_horizon(&last_u),
        min_elevation_angle: min_elev,
        constraint_violated: min_elev < phi,
    };
    Ok((records, report))
}

pub const CSV_HEADER: [&str; 16] = [
    "t", "rx", "ry", "rz", "vx", "vy", "vz", "m", "ux", "uy", "uz", "throttle", "theta_u_deg", "gamma_deg",
    "e_norm", "avoid_flag",
];

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes the trajectory log as CSV with a header row.
pub fn write_csv<W: Write>(records: &[SimRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        let mut row: Vec<String> = [
            rec.t,
            rec.r.x,
            rec.r.y,
            rec.r.z,
            rec.v.x,
            rec.v.y,
            rec.v.z,
            rec.m,
            rec.u.x,
            rec.u.y,
            rec.u.z,
            rec.throttle,
            rec.theta_u.to_degrees(),
            rec.gamma.to_degrees(),
            rec.e_norm,
        ]
        .iter()
        .map(|&x| sig9(x))
        .collect();
        row.push(u8::from(rec.avoidance_active).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[SimRecord], path: &Path) -> csv::Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> LanderParams {
        LanderParams::default()
    }

    #[test]
    fn defaults_validate() {
        params().validate().unwrap();
        let bad = LanderParams {
            m_dry: 2000.0,
            ..params()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn hover_holds_velocity() {
        let p = params();
        let mut s = LanderState::new(Vec3::new(0.0, 0.0, 100.0), Vec3::new(1.0, -2.0, 0.5), 1800.0, 0.0);
        let v0 = s.v;
        let r0 = s.r;
        for _ in 0..1000 {
            let u = Vec3::new(0.0, 0.0, p.g);
            s = step_dynamics(&s, &u, &DisturbanceModel::none(), &p, 0.01).unwrap().state;
        }
        // Only the in-step mass loss perturbs the balance.
        assert!((s.v - v0).norm() < 1e-3, "{}", s.v - v0);
        assert!((s.r - (r0 + v0 * 10.0)).norm() < 1e-2);
    }

    #[test]
    fn clean_model_delivers_the_command() {
        let p = params();
        let s = LanderState::new(Vec3::new(10.0, 0.0, 100.0), Vec3::new(5.0, 0.0, -3.0), 1700.0, 0.0);
        let u = Vec3::new(1.0, -0.5, 6.0);
        let a = delivered_acceleration(&s, &u, &DisturbanceModel::none(), &p) - p.gravity();
        assert_relative_eq!(a, u, epsilon = 1e-15);
    }

    #[test]
    fn constant_thrust_mass_flow() {
        let p = params();
        let m0 = 1900.0;
        let s = LanderState::new(Vec3::new(0.0, 0.0, 1000.0), Vec3::zeros(), m0, 0.0);
        let u = Vec3::new(0.0, 0.0, p.t_max / m0);
        let out = step_dynamics(&s, &u, &DisturbanceModel::none(), &p, 0.01).unwrap();
        assert_relative_eq!(m0 - out.state.m, p.t_max * 0.01 / p.c, max_relative = 1e-6);
    }

    #[test]
    fn fuel_exhaustion_is_flagged() {
        let p = params();
        let s = LanderState::new(Vec3::new(0.0, 0.0, 1000.0), Vec3::zeros(), p.m_dry + 0.01, 0.0);
        let u = Vec3::new(0.0, 0.0, p.t_max / s.m);
        let out = step_dynamics(&s, &u, &DisturbanceModel::none(), &p, 0.01).unwrap();
        assert!(out.fuel_exhausted);
        assert_eq!(out.state.m, p.m_dry);
        assert!(step_dynamics(&out.state, &u, &DisturbanceModel::none(), &p, 0.01).is_err());
    }

    #[test]
    fn ballistic_energy_is_conserved() {
        let p = params();
        let mut s = LanderState::new(Vec3::new(0.0, 0.0, 1500.0), Vec3::new(30.0, 10.0, 40.0), 1800.0, 0.0);
        let energy = |s: &LanderState| 0.5 * s.v.norm_squared() + p.g * s.r.z;
        let e0 = energy(&s);
        for _ in 0..1000 {
            s = step_dynamics(&s, &Vec3::zeros(), &DisturbanceModel::none(), &p, 0.01).unwrap().state;
        }
        assert_relative_eq!(energy(&s), e0, max_relative = 1e-8);
        assert_eq!(s.m, 1800.0);
    }

    #[test]
    fn misalignment_is_a_rotation() {
        let d = DisturbanceModel {
            mu: [0.004, -0.002, 0.005],
            ..DisturbanceModel::none()
        };
        let m = d.misalignment();
        assert!((m * m.transpose() - Mat3::identity()).abs().max() < 1e-15);
        assert_eq!(DisturbanceModel::none().misalignment(), Mat3::identity());
    }

    #[test]
    fn drag_opposes_velocity() {
        let d = DisturbanceModel::none().with_mars_drag();
        let v = Vec3::new(100.0, 0.0, -75.0);
        let a = d.acceleration(&v, 1900.0, 3.7114);
        assert_relative_eq!(a.norm(), 0.5 * 0.0274 * 5.0 * 125.0 * 125.0 / 1900.0, max_relative = 1e-12);
        assert!(a.dot(&v) < 0.0);
    }

    #[test]
    fn quartic_root_residual() {
        let g = 3.7114;
        let cases = [
            (Vec3::new(-2500.0, 0.0, 1500.0), Vec3::new(100.0, 50.0, -75.0)),
            (Vec3::new(-3000.0, 0.0, 1500.0), Vec3::new(0.0, 150.0, -30.0)),
            (Vec3::new(2000.0, 0.0, 1500.0), Vec3::new(100.0, 0.0, -75.0)),
            (Vec3::new(0.0, 0.0, 10.0), Vec3::zeros()),
            (Vec3::zeros(), Vec3::new(0.0, 0.0, -3.0)),
        ];
        for (r, v) in cases {
            let t = zemzev_time_to_go(&r, &v, g).unwrap();
            let f = 0.5 * g * g * t.powi(4) - 2.0 * v.dot(&v) * t * t - 12.0 * v.dot(&r) * t - 18.0 * r.dot(&r);
            assert!(f.abs() <= 1e-8 * 0.5 * g * g * t.powi(4), "{f} at {t}");
            // no larger root: f stays positive beyond t
            for s in [1.01, 1.5, 3.0, 10.0] {
                let tt = t * s;
                let ff = 0.5 * g * g * tt.powi(4) - 2.0 * v.dot(&v) * tt * tt - 12.0 * v.dot(&r) * tt
                    - 18.0 * r.dot(&r);
                assert!(ff > 0.0);
            }
        }
        // Hover reduces to t^2 = 6 h / g... with v = 0: g^2/2 t^4 = 18 h^2.
        let t = zemzev_time_to_go(&Vec3::new(0.0, 0.0, 10.0), &Vec3::zeros(), g).unwrap();
        assert_relative_eq!(t, (36.0 * 100.0 / (g * g)).powf(0.25), max_relative = 1e-12);
        assert_eq!(zemzev_time_to_go(&Vec3::zeros(), &Vec3::zeros(), g), None);
    }

    #[test]
    fn zemzev_command_is_saturated() {
        let p = params();
        let s = LanderState::new(Vec3::new(-2500.0, 0.0, 1500.0), Vec3::new(100.0, 50.0, -75.0), 1905.0, 0.0);
        let u = zemzev_command(&s, &p).unwrap();
        let thrust = u.norm() * s.m;
        assert!(thrust >= p.t_min * (1.0 - 1e-12) && thrust <= p.t_max * (1.0 + 1e-12));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rec = SimRecord {
            t: 0.1,
            r: Vec3::new(1.0, 2.0, 3.0),
            v: Vec3::new(4.0, 5.0, 6.0),
            m: 1900.123456789,
            u: Vec3::new(0.0, 0.0, 5.0),
            throttle: 0.7,
            theta_u: 0.5,
            gamma: -0.5,
            e_norm: 1.0,
            avoidance_active: true,
        };
        let mut buf = Vec::new();
        write_csv(&[rec, rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("1.00000000e-1,"));
        assert!(lines[1].contains("1.90012346e3"));
        assert!(lines[1].ends_with(",1"));
    }
}
