//! Planar powered-descent gravity turn.
//!
//! With the thrust held anti-parallel to the velocity, constant mass and a
//! constant thrust-to-weight ratio `beta > 1`, the planar equations of motion
//! admit a closed-form solution parametrised by the flight-path angle. The
//! trajectory ends (speed zero, flight path vertical) after finite time with
//! finite downrange and height change; [`terminal_values`] gives those end
//! points directly. [`planar_propagate`] integrates the same equations
//! numerically and is used to check the closed forms.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Closed forms are only evaluated for `|gamma| <= pi/2 - GAMMA_GUARD`.
pub const GAMMA_GUARD: f64 = 1e-9;

/// Default step for the numerical oracle (s).
pub const ORACLE_DT: f64 = 1e-3;

/// State of the planar gravity-turn problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarGtState {
    /// Speed (m/s).
    pub v: f64,
    /// Flight-path angle (rad), negative when descending.
    pub gamma: f64,
    /// Downrange (m).
    pub x: f64,
    /// Height (m).
    pub z: f64,
    /// Time (s).
    pub t: f64,
}

impl PlanarGtState {
    pub fn new(v: f64, gamma: f64, x: f64, z: f64, t: f64) -> Self {
        Self { v, gamma, x, z, t }
    }
}

/// Thrust-to-weight ratio and gravity of a gravity-turn reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtParams {
    beta: f64,
    g: f64,
}

impl GtParams {
    /// Only `beta > 1` is supported; the trajectory does not terminate otherwise.
    pub fn new(beta: f64, g: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "thrust-to-weight ratio must exceed 1",
            });
        }
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                reason: "gravity must be positive",
            });
        }
        Ok(Self { beta, g })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn g(&self) -> f64 {
        self.g
    }
}

/// End point of a gravity turn (where the speed reaches zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtTerminal {
    pub x_f: f64,
    pub z_f: f64,
    pub t_f: f64,
}

fn check_open_gamma(op: &'static str, gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma.abs() > FRAC_PI_2 - GAMMA_GUARD {
        return Err(Error::domain(
            op,
            format!("|gamma| = {} must stay below pi/2 - {GAMMA_GUARD:e}", gamma.abs()),
        ));
    }
    Ok(())
}

/// `sec(gamma) + tan(gamma)`, evaluated in whichever of the two equivalent
/// forms `(1 + s)/c` and `c/(1 - s)` avoids cancellation.
fn sec_plus_tan(s: f64, c: f64) -> f64 {
    if s < 0.0 {
        c / (1.0 - s)
    } else {
        (1.0 + s) / c
    }
}

/// Integration constant of the speed solution `v = C sec(g) (sec(g) + tan(g))^beta`.
pub fn integration_constant(state: &PlanarGtState, params: &GtParams) -> Result<f64> {
    if state.v < 0.0 || !state.v.is_finite() {
        return Err(Error::domain("integration_constant", format!("speed {} < 0", state.v)));
    }
    check_open_gamma("integration_constant", state.gamma)?;
    if state.v == 0.0 {
        return Ok(0.0);
    }
    let (s, c) = state.gamma.sin_cos();
    Ok(state.v * c / sec_plus_tan(s, c).powf(params.beta))
}

/// Indefinite integrals `(F_t, F_x, F_z)` of the time, downrange and height
/// equations with respect to the flight-path angle.
///
/// All three vanish as `gamma -> -pi/2`; the limit itself is not evaluated
/// here.
pub fn indefinite_integrals(gamma: f64, beta: f64) -> Result<(f64, f64, f64)> {
    check_open_gamma("indefinite_integrals", gamma)?;
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "thrust-to-weight ratio must exceed 1",
        });
    }
    let (s, c) = gamma.sin_cos();
    let q = sec_plus_tan(s, c);
    let q_beta = q.powf(beta);
    let q_2beta = q_beta * q_beta;
    let sec = 1.0 / c;
    let tan = s / c;

    let f_t = (beta - s) / c * q_beta / (beta * beta - 1.0);
    let f_x = (2.0 * beta - s) / c * q_2beta / (4.0 * beta * beta - 1.0);
    let f_z =
        (2.0 * beta * sec * tan - 2.0 * tan * tan - 1.0) * q_2beta / (4.0 * beta * beta - 4.0);
    Ok((f_t, f_x, f_z))
}

/// Closed-form state reached when the flight-path angle has decreased to
/// `gamma_query`.
pub fn analytic_state_at(
    initial: &PlanarGtState,
    gamma_query: f64,
    params: &GtParams,
) -> Result<PlanarGtState> {
    check_open_gamma("analytic_state_at", gamma_query)?;
    if gamma_query > initial.gamma {
        return Err(Error::domain(
            "analytic_state_at",
            format!(
                "flight-path angle only decreases (query {gamma_query} > initial {})",
                initial.gamma
            ),
        ));
    }
    if gamma_query == initial.gamma {
        return Ok(*initial);
    }
    let big_c = integration_constant(initial, params)?;
    let (beta, g) = (params.beta, params.g);
    let (ft0, fx0, fz0) = indefinite_integrals(initial.gamma, beta)?;
    let (ft, fx, fz) = indefinite_integrals(gamma_query, beta)?;
    let (s, c) = gamma_query.sin_cos();

    Ok(PlanarGtState {
        v: big_c / c * sec_plus_tan(s, c).powf(beta),
        gamma: gamma_query,
        x: initial.x - big_c * big_c / g * (fx - fx0),
        z: initial.z - big_c * big_c / g * (fz - fz0),
        t: initial.t - big_c / g * (ft - ft0),
    })
}

/// Downrange, height and time at the end of the gravity turn.
pub fn terminal_values(initial: &PlanarGtState, params: &GtParams) -> Result<GtTerminal> {
    if !initial.gamma.is_finite() || initial.gamma.abs() > FRAC_PI_2 {
        return Err(Error::domain(
            "terminal_values",
            format!("flight-path angle {} outside [-pi/2, pi/2]", initial.gamma),
        ));
    }
    let (beta, g) = (params.beta, params.g);
    let v0 = initial.v;
    let (s, c) = initial.gamma.sin_cos();
    Ok(GtTerminal {
        x_f: initial.x + v0 * v0 / ((4.0 * beta * beta - 1.0) * g) * (2.0 * beta * c - s * c),
        z_f: initial.z
            + v0 * v0 / ((4.0 * beta * beta - 4.0) * g) * (2.0 * beta * s - s * s - 1.0),
        t_f: initial.t + v0 / ((beta * beta - 1.0) * g) * (beta - s),
    })
}

fn planar_rates(state: &[f64; 4], params: &GtParams) -> Option<[f64; 4]> {
    let [v, gamma, _, _] = *state;
    if !(v > 0.0) {
        return None;
    }
    let (s, c) = gamma.sin_cos();
    let g = params.g;
    Some([-params.beta * g - g * s, -g * c / v, v * c, v * s])
}

fn rk4_planar(state: &[f64; 4], params: &GtParams, h: f64) -> Option<[f64; 4]> {
    let add = |a: &[f64; 4], k: &[f64; 4], f: f64| {
        [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2], a[3] + f * k[3]]
    };
    let k1 = planar_rates(state, params)?;
    let k2 = planar_rates(&add(state, &k1, h / 2.0), params)?;
    let k3 = planar_rates(&add(state, &k2, h / 2.0), params)?;
    let k4 = planar_rates(&add(state, &k3, h), params)?;
    let mut out = *state;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Some(out)
}

/// Fixed-step RK4 integration of the planar gravity-turn equations until the
/// speed drops to `v_cutoff`.
///
/// The returned trajectory starts with `initial` and ends on the state whose
/// speed equals `v_cutoff` (the last step is shortened by bisection).
pub fn planar_propagate(
    initial: &PlanarGtState,
    params: &GtParams,
    dt: f64,
    v_cutoff: f64,
) -> Result<Vec<PlanarGtState>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "step must be positive",
        });
    }
    if !(v_cutoff > 0.0) {
        return Err(Error::InvalidParameter {
            name: "v_cutoff",
            value: v_cutoff,
            reason: "cutoff speed must be positive",
        });
    }
    let mut out = vec![*initial];
    if initial.v <= v_cutoff {
        return Ok(out);
    }
    // Bounded by the analytic flight time, with generous slack.
    let t_limit = 10.0 * initial.v / ((params.beta - 1.0) * params.g) + 10.0 * dt;
    let mut y = [initial.v, initial.gamma, initial.x, initial.z];
    let mut t = initial.t;

    loop {
        if t - initial.t > t_limit {
            return Err(Error::Propagation {
                t,
                reason: "speed cutoff not reached within the analytic flight time",
            });
        }
        match rk4_planar(&y, params, dt) {
            Some(next) if next[0] > v_cutoff => {
                y = next;
                t += dt;
                out.push(PlanarGtState::new(y[0], y[1], y[2], y[3], t));
            }
            _ => {
                let (mut lo, mut hi) = (0.0, dt);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    match rk4_planar(&y, params, mid) {
                        Some(next) if next[0] >= v_cutoff => lo = mid,
                        _ => hi = mid,
                    }
                }
                let last = rk4_planar(&y, params, lo).ok_or(Error::Propagation {
                    t,
                    reason: "terminal step bisection failed",
                })?;
                out.push(PlanarGtState::new(last[0], last[1], last[2], last[3], t + lo));
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    const G_MARS: f64 = 3.7114;

    #[test]
    fn beta_at_or_below_one_is_rejected() {
        assert!(GtParams::new(1.0, G_MARS).is_err());
        assert!(GtParams::new(0.5, G_MARS).is_err());
        assert!(GtParams::new(2.0, 0.0).is_err());
    }

    #[test]
    fn integration_constant_examples() {
        let p = GtParams::new(2.0, G_MARS).unwrap();
        let level = PlanarGtState::new(10.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(integration_constant(&level, &p).unwrap(), 10.0);

        // 10 / (sqrt2 (sqrt2 + 1)^2), written out independently.
        let expected = 10.0 / (2f64.sqrt() * (2f64.sqrt() + 1.0).powi(2));
        let tilted = PlanarGtState::new(10.0, FRAC_PI_4, 0.0, 0.0, 0.0);
        assert_relative_eq!(
            integration_constant(&tilted, &p).unwrap(),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, 1.213_203_435_596_425_7, max_relative = 1e-15);

        let stopped = PlanarGtState::new(0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(integration_constant(&stopped, &p).unwrap(), 0.0);

        let vertical = PlanarGtState::new(10.0, -FRAC_PI_2, 0.0, 0.0, 0.0);
        assert!(integration_constant(&vertical, &p).is_err());
        let backwards = PlanarGtState::new(-1.0, 0.0, 0.0, 0.0, 0.0);
        assert!(integration_constant(&backwards, &p).is_err());
    }

    #[test]
    fn indefinite_integrals_at_level_flight() {
        let (ft, fx, fz) = indefinite_integrals(0.0, 2.0).unwrap();
        assert_relative_eq!(ft, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(fx, 4.0 / 15.0, max_relative = 1e-15);
        assert_relative_eq!(fz, -1.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn indefinite_integrals_vanish_near_vertical() {
        // Leading terms in c = cos(gamma) as gamma -> -pi/2.
        let d = 1e-6f64;
        let c = d.sin();
        for beta in [1.1f64, 1.5, 2.0, 3.0, 4.0] {
            let (ft, fx, fz) = indefinite_integrals(-FRAC_PI_2 + d, beta).unwrap();
            let ft_lead = c.powf(beta - 1.0) * 2f64.powf(-beta) / (beta - 1.0);
            let fx_lead = c.powf(2.0 * beta - 1.0) * 2f64.powf(-2.0 * beta) / (2.0 * beta - 1.0);
            let fz_lead = -c.powf(2.0 * beta - 2.0) * 2f64.powf(-2.0 * beta) / (2.0 * (beta - 1.0));
            assert_relative_eq!(ft, ft_lead, max_relative = 1e-4);
            assert_relative_eq!(fx, fx_lead, max_relative = 1e-4);
            assert_relative_eq!(fz, fz_lead, max_relative = 1e-4);
        }
        assert!(indefinite_integrals(-FRAC_PI_2, 2.0).is_err());
        assert!(indefinite_integrals(FRAC_PI_2, 2.0).is_err());
    }

    #[test]
    fn indefinite_integrals_differentiate_to_the_integrands() {
        // Central differences against sec^2 (sec + tan)^beta and friends.
        let h = 1e-6;
        for (i, beta) in [1.2, 1.9, 2.5, 3.7].iter().enumerate() {
            for j in 0..10 {
                let gamma = -1.3 + 0.26 * j as f64 + 0.01 * i as f64;
                let (tp, xp, zp) = indefinite_integrals(gamma + h, *beta).unwrap();
                let (tm, xm, zm) = indefinite_integrals(gamma - h, *beta).unwrap();
                let sec = 1.0 / gamma.cos();
                let q = sec + gamma.tan();
                let dt_expected = sec * sec * q.powf(*beta);
                let dx_expected = sec * sec * q.powf(2.0 * beta);
                let dz_expected = dx_expected * gamma.tan();
                assert_relative_eq!((tp - tm) / (2.0 * h), dt_expected, max_relative = 1e-6);
                assert_relative_eq!((xp - xm) / (2.0 * h), dx_expected, max_relative = 1e-6);
                assert_relative_eq!(
                    (zp - zm) / (2.0 * h),
                    dz_expected,
                    max_relative = 1e-6,
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn analytic_state_identity_and_ordering() {
        let p = GtParams::new(1.9, G_MARS).unwrap();
        let s0 = PlanarGtState::new(75.0, -0.3, 10.0, 200.0, 1.0);
        assert_eq!(analytic_state_at(&s0, -0.3, &p).unwrap(), s0);
        assert!(analytic_state_at(&s0, -0.2, &p).is_err());
    }

    #[test]
    fn analytic_speed_obeys_its_differential_equation() {
        // dv/dgamma = v tan + beta v sec
        let p = GtParams::new(2.3, G_MARS).unwrap();
        let s0 = PlanarGtState::new(120.0, 1.2, 0.0, 0.0, 0.0);
        let h = 1e-6;
        for j in 1..20 {
            let gamma = 1.2 - 0.13 * j as f64;
            let vp = analytic_state_at(&s0, gamma + h, &p).unwrap().v;
            let vm = analytic_state_at(&s0, gamma - h, &p).unwrap().v;
            let v = analytic_state_at(&s0, gamma, &p).unwrap().v;
            let expected = v * gamma.tan() + p.beta() * v / gamma.cos();
            assert_relative_eq!((vp - vm) / (2.0 * h), expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn analytic_speed_vanishes_near_vertical() {
        let p = GtParams::new(1.5, G_MARS).unwrap();
        let s0 = PlanarGtState::new(150.0, 0.4, 0.0, 0.0, 0.0);
        let end = analytic_state_at(&s0, -FRAC_PI_2 + 1e-8, &p).unwrap();
        assert!(end.v < 1e-2 * s0.v);
        let tv = terminal_values(&s0, &p).unwrap();
        assert_relative_eq!(end.x, tv.x_f, max_relative = 1e-6);
        assert_relative_eq!(end.z, tv.z_f, max_relative = 1e-6);
    }

    #[test]
    fn analytic_state_matches_fine_rk4() {
        let p = GtParams::new(1.9, G_MARS).unwrap();
        let s0 = PlanarGtState::new(75.0, -0.3, 0.0, 0.0, 0.0);
        let traj = planar_propagate(&s0, &p, 1e-5, 0.5 * s0.v).unwrap();
        let scale = s0.v * s0.v / G_MARS;
        for state in traj.iter().step_by(20_000).chain(traj.last()) {
            let a = analytic_state_at(&s0, state.gamma, &p).unwrap();
            assert!((a.x - state.x).abs() < 1e-6 * scale);
            assert!((a.z - state.z).abs() < 1e-6 * scale);
            assert!((a.v - state.v).abs() < 1e-6 * s0.v);
        }
    }

    #[test]
    fn terminal_values_vertical_and_stopped() {
        let p = GtParams::new(2.0, G_MARS).unwrap();
        let s0 = PlanarGtState::new(40.0, -FRAC_PI_2, 3.0, 500.0, 2.0);
        let tv = terminal_values(&s0, &p).unwrap();
        assert_relative_eq!(tv.x_f, 3.0, epsilon = 1e-12);
        assert_relative_eq!(tv.z_f, 500.0 - 1600.0 / (2.0 * G_MARS), max_relative = 1e-14);
        assert_relative_eq!(tv.t_f, 2.0 + 40.0 / G_MARS, max_relative = 1e-14);

        let stopped = PlanarGtState::new(0.0, 0.3, 3.0, 5.0, 7.0);
        let tv = terminal_values(&stopped, &p).unwrap();
        assert_eq!((tv.x_f, tv.z_f, tv.t_f), (3.0, 5.0, 7.0));
    }

    #[test]
    fn terminal_values_match_rk4_endpoint() {
        let p = GtParams::new(1.9, G_MARS).unwrap();
        let s0 = PlanarGtState::new(100.0, -0.5, 0.0, 0.0, 0.0);
        let traj = planar_propagate(&s0, &p, ORACLE_DT, 1e-6 * s0.v).unwrap();
        let end = traj.last().unwrap();
        let tv = terminal_values(&s0, &p).unwrap();
        assert_relative_eq!(end.x, tv.x_f, max_relative = 1e-4);
        assert_relative_eq!(end.z, tv.z_f, max_relative = 1e-4);
        assert_relative_eq!(end.t, tv.t_f, max_relative = 1e-4);
    }

    #[test]
    fn vertical_propagation_keeps_downrange() {
        let p = GtParams::new(2.0, G_MARS).unwrap();
        let s0 = PlanarGtState::new(50.0, -FRAC_PI_2, 12.5, 800.0, 0.0);
        let traj = planar_propagate(&s0, &p, ORACLE_DT, 1e-3).unwrap();
        assert!(traj.iter().all(|s| (s.x - 12.5).abs() < 1e-9));
    }

    #[test]
    fn propagated_flight_path_turns_down_to_vertical() {
        let p = GtParams::new(1.7, G_MARS).unwrap();
        let s0 = PlanarGtState::new(90.0, 0.6, 0.0, 0.0, 0.0);
        let traj = planar_propagate(&s0, &p, ORACLE_DT, 1e-3 * s0.v).unwrap();
        assert!(traj.windows(2).all(|w| w[1].gamma < w[0].gamma));
        let end = traj.last().unwrap();
        assert_relative_eq!(end.v, 1e-3 * s0.v, max_relative = 1e-9);
        assert!(end.gamma < -FRAC_PI_2 + 1e-2);
    }

    #[test]
    fn propagate_rejects_bad_step() {
        let p = GtParams::new(1.7, G_MARS).unwrap();
        let s0 = PlanarGtState::new(90.0, 0.6, 0.0, 0.0, 0.0);
        assert!(planar_propagate(&s0, &p, 0.0, 1.0).is_err());
        assert!(planar_propagate(&s0, &p, 1e-3, 0.0).is_err());
    }
}
