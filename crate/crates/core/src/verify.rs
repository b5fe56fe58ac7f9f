//! End-to-end checks of the guidance stack against independent oracles and
//! the published benchmark results. Used by the `verify` CLI command and
//! the acceptance test target.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::command::{fit, sat, total_command};
use crate::gravity_turn::{analytic_state_at, planar_propagate, terminal_values, GtParams, PlanarGtState};
use crate::guidance::{
    self, beta_profile, desired_velocity, jacobians, tracking_acceleration, tracking_acceleration_direct,
    GuidanceConfig, GuidanceFrame, TrackingInputs,
};
use crate::harness::{downrange_sweep, run_monte_carlo, DispersionSpec, Scenario};
use crate::sim::Law;
use crate::velocity_field::{solve_gamma, RelativeGeometry, SolveMethod, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::{Mat3, Vec3};

const G: f64 = 3.7114;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{:>2}] {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = fn() -> (bool, String);

pub const CRITERIA: [(u8, &str, Check); 12] = [
    (1, "closed-form gravity turn vs RK4", analytic_vs_rk4),
    (2, "flight-path root vs bisection", root_vs_bisection),
    (3, "line-of-sight property", line_of_sight),
    (4, "tracking-law identities", tracking_identities),
    (5, "fixed-time error convergence", error_convergence),
    (6, "disturbed error bound", disturbed_error_bound),
    (7, "benchmark scenarios", scenario_regression),
    (8, "scenario 3 glide slope", scenario3_glide_slope),
    (9, "ZEM/ZEV baseline fuel", zemzev_baseline),
    (10, "downrange sweep trends", sweep_trends),
    (11, "Monte Carlo robustness", monte_carlo),
    (12, "command-layer fuzz", command_fuzz),
];

pub fn run_criterion(id: u8) -> Option<CriterionReport> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = check();
    Some(CriterionReport {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn analytic_vs_rk4() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let v0 = rng.random_range(10.0..200.0);
        let gamma0 = rng.random_range(-1.4..1.4);
        let beta = rng.random_range(1.1..4.0);
        let params = match GtParams::new(beta, G) {
            Ok(p) => p,
            Err(e) => return (false, e.to_string()),
        };
        let s0 = PlanarGtState::new(v0, gamma0, 0.0, 0.0, 0.0);
        let traj = match planar_propagate(&s0, &params, 1e-3, 1e-7 * v0) {
            Ok(t) => t,
            Err(e) => return (false, e.to_string()),
        };
        let (len_scale, t_scale) = (v0 * v0 / G, v0 / G);
        let stride = (traj.len() / 10).max(1);
        for num in traj.iter().step_by(stride).filter(|s| s.gamma > -FRAC_PI_2 + 1e-6) {
            let Ok(an) = analytic_state_at(&s0, num.gamma, &params) else {
                return (false, format!("closed form failed at gamma {}", num.gamma));
            };
            worst = worst
                .max((an.v - num.v).abs() / v0)
                .max((an.x - num.x).abs() / len_scale)
                .max((an.z - num.z).abs() / len_scale)
                .max((an.t - num.t).abs() / t_scale);
        }
        let end = traj.last().copied().unwrap_or(s0);
        let Ok(tv) = terminal_values(&s0, &params) else {
            return (false, "terminal values failed".into());
        };
        worst = worst
            .max((tv.x_f - end.x).abs() / len_scale)
            .max((tv.z_f - end.z).abs() / len_scale)
            .max((tv.t_f - end.t).abs() / t_scale);
    }
    let elapsed = start.elapsed().as_secs_f64();
    (
        worst <= 1e-4 && elapsed < 10.0,
        format!("max scaled error {worst:.2e} (limit 1e-4), {elapsed:.2} s (limit 10 s)"),
    )
}

/// Independent bisection on the terminal-landing residual.
fn bisection_oracle(x_go: f64, z_go: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let kappa = (4.0 * b2 - 4.0) * z_go / ((4.0 * b2 - 1.0) * x_go);
    let h = |g: f64| {
        let (s, c) = g.sin_cos();
        (2.0 * beta * s - s * s - 1.0) / ((2.0 * beta - s) * c) - kappa
    };
    let (mut lo, mut hi) = (-FRAC_PI_2 + 1e-12, FRAC_PI_2 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (0..100).flat_map(|i| {
        let x_go = 1.0 + (5000.0 - 1.0) * i as f64 / 99.0;
        (0..100).map(move |j| (x_go, -(1.0 + (3000.0 - 1.0) * j as f64 / 99.0)))
    })
}

const GRID_BETA: f64 = 1.781_430_470_945_941;

fn root_vs_bisection() -> (bool, String) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut iters = Vec::with_capacity(10_000);
    for (x_go, z_go) in grid() {
        let geo = RelativeGeometry { x_go, z_go };
        let sol = match solve_gamma(&geo, GRID_BETA, G, DEFAULT_TOL, DEFAULT_MAX_ITER) {
            Ok(s) => s,
            Err(e) => return (false, e.to_string()),
        };
        worst = worst.max((sol.gamma_star - bisection_oracle(x_go, z_go, GRID_BETA)).abs());
        if sol.method == SolveMethod::Newton {
            iters.push(sol.iterations);
        } else {
            iters.push(usize::MAX);
        }
    }
    iters.sort_unstable();
    let median = iters[iters.len() / 2];
    let elapsed = start.elapsed().as_secs_f64();
    (
        worst <= 1e-10 && median <= 6 && elapsed < 5.0,
        format!("max |dgamma| {worst:.2e} rad (limit 1e-10), median Newton iterations {median} (limit 6), {elapsed:.2} s"),
    )
}

fn line_of_sight() -> (bool, String) {
    let mut failures = 0;
    let mut min_gap = f64::INFINITY;
    for (x_go, z_go) in grid() {
        let geo = RelativeGeometry { x_go, z_go };
        let Ok(sol) = solve_gamma(&geo, GRID_BETA, G, DEFAULT_TOL, DEFAULT_MAX_ITER) else {
            failures += 1;
            continue;
        };
        let gap = sol.gamma_star.tan() - z_go / x_go;
        min_gap = min_gap.min(gap);
        if !(gap > 0.0) {
            failures += 1;
        }
    }
    (
        failures == 0,
        format!("{failures} of 10000 grid points violate tan(gamma*) > z_go/x_go (min gap {min_gap:.3e})"),
    )
}

fn random_tracking_inputs(rng: &mut ChaCha8Rng) -> Option<TrackingInputs> {
    let config = GuidanceConfig::default();
    let r = Vec3::new(
        rng.random_range(-4000.0..4000.0),
        rng.random_range(-4000.0..4000.0),
        rng.random_range(20.0..2500.0),
    );
    let v = Vec3::new(
        rng.random_range(-150.0..150.0),
        rng.random_range(-150.0..150.0),
        rng.random_range(-120.0..20.0),
    );
    let m = rng.random_range(1405.0..1905.0);
    let (beta, beta_dot) = beta_profile(m, &config).ok()?;
    let frame = GuidanceFrame::build(&r, None);
    let (v_d, _) = desired_velocity(&frame, beta, G).ok()?;
    Some(TrackingInputs {
        v: frame.to_guidance(&v),
        v_d,
        x_go: frame.x_go,
        z_go: frame.z_go,
        beta,
        beta_dot,
        k: config.k,
        g: G,
    })
}

fn tracking_identities() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut rotation, mut range, mut law) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let Some(inp) = random_tracking_inputs(&mut rng) else {
            return (false, "could not build a random state".into());
        };
        let e = inp.v_d - inp.v;
        let rel = |a: Vec3, b: Vec3| (a - b).norm() / (1.0 + b.norm());

        let omega_mat = Mat3::from_diagonal(&Vec3::new(0.0, inp.v_d.x / inp.x_go, 0.0));
        let omega = Vec3::new(0.0, 0.0, -inp.v.y / inp.x_go);
        rotation = rotation.max(rel(omega_mat * e, omega.cross(&inp.v_d)));

        let geo = RelativeGeometry {
            x_go: inp.x_go,
            z_go: inp.z_go,
        };
        let Ok(j) = jacobians(&inp.v_d, &geo, inp.beta, G) else {
            return (false, "jacobians failed".into());
        };
        let lhs = j.f_rgo * inp.v + j.f_rgo * e;
        let rhs = j.f_vd * (-inp.v_d * (inp.beta * G / inp.v_d.norm()) + Vec3::new(0.0, 0.0, -G));
        range = range.max(rel(lhs, rhs));

        let Ok(direct) = tracking_acceleration_direct(&inp) else {
            return (false, "direct law failed".into());
        };
        law = law.max(rel(tracking_acceleration(&inp).a_trk, direct));
    }
    (
        rotation <= 1e-9 && range <= 1e-9 && law <= 1e-9,
        format!("max relative residuals: rotation {rotation:.1e}, range Jacobian {range:.1e}, law forms {law:.1e} (limit 1e-9)"),
    )
}

fn error_convergence() -> (bool, String) {
    let t_f = 60.0;
    let e0 = Vec3::new(15.0, -8.0, 4.0);
    let mut worst: f64 = 0.0;
    for k in [1.5, 2.4, 4.0] {
        let hist = guidance::integrate_fixed_time_error(k, t_f, e0, |_| Vec3::zeros(), 1e-3, 0.98 * t_f);
        for (t, e) in &hist {
            let expected = guidance::fixed_time_error(k, t_f, *t, e0.norm());
            worst = worst.max((e.norm() - expected).abs() / expected);
        }
    }
    (worst <= 1e-6, format!("max relative deviation {worst:.2e} (limit 1e-6)"))
}

fn disturbed_error_bound() -> (bool, String) {
    let t_f = 60.0;
    let e0 = Vec3::new(15.0, -8.0, 4.0);
    let d = Vec3::new(0.2, -0.3, 0.15);
    let d_max = d.norm();
    let mut violations = 0;
    let mut samples = 0;
    for k in [1.5, 2.4, 4.0] {
        let hist = guidance::integrate_fixed_time_error(k, t_f, e0, |_| d, 1e-3, 0.999 * t_f);
        for (t, e) in &hist {
            samples += 1;
            let bound: f64 = (0..3)
                .map(|i| guidance::disturbed_error_bound(k, t_f, *t, e0[i].abs(), d_max).powi(2))
                .sum::<f64>()
                .sqrt();
            let per_axis = (0..3).all(|i| e[i].abs() <= guidance::disturbed_error_bound(k, t_f, *t, e0[i].abs(), d_max));
            if !per_axis || e.norm() > bound {
                violations += 1;
            }
        }
    }
    (violations == 0, format!("{violations} of {samples} samples exceed the bound"))
}

const PUBLISHED_GT_FUEL: [(&str, f64); 3] = [("scenario1", 246.62), ("scenario2", 390.16), ("scenario3", 410.39)];

fn benchmark(name: &str) -> Scenario {
    match name {
        "scenario2" => Scenario::scenario2(),
        "scenario3" => Scenario::scenario3(),
        _ => Scenario::scenario1(),
    }
}

fn scenario_regression() -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, dm_ref) in PUBLISHED_GT_FUEL {
        match benchmark(name).run() {
            Ok((_, rep)) => {
                let err = (rep.fuel_used - dm_ref) / dm_ref;
                let gamma_f = rep.gamma_f.to_degrees();
                let theta_u = rep.theta_u_f.to_degrees();
                ok &= rep.landed && err.abs() <= 0.03 && gamma_f <= -88.0 && theta_u >= 87.0;
                parts.push(format!(
                    "{name}: dm {:.2} kg ({:+.2}%), gamma_f {gamma_f:.2}, theta_u {theta_u:.2}",
                    rep.fuel_used,
                    100.0 * err
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    (ok, parts.join("; "))
}

fn scenario3_glide_slope() -> (bool, String) {
    let s = Scenario::scenario3();
    match s.run() {
        Ok((_, rep)) => {
            let min = rep.min_elevation_angle.to_degrees();
            (
                rep.landed && !rep.constraint_violated && min >= 4.0,
                format!("min elevation {min:.3} deg (limit 4 deg)"),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

fn zemzev_baseline() -> (bool, String) {
    let mut s = Scenario::scenario1();
    s.sim.law = Law::ZemZev;
    match s.run() {
        Ok((_, rep)) => {
            let err = (rep.fuel_used - 254.98) / 254.98;
            (
                err.abs() <= 0.05,
                format!("dm {:.2} kg vs 254.98 kg ({:+.2}%, limit 5%)", rep.fuel_used, 100.0 * err),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

fn sweep_trends() -> (bool, String) {
    let xs: Vec<f64> = (0..=20).map(|i| -4000.0 + 250.0 * i as f64).collect();
    let c_betas = [0.85, 0.90, 0.95];
    let rows = match downrange_sweep(&Scenario::scenario3(), &xs, &c_betas) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let curve = |cb: f64| -> Vec<f64> { rows.iter().filter(|r| r.c_beta == cb).map(|r| r.dm).collect() };
    let mut ok = rows.iter().all(|r| r.landed && !r.violated && r.dm.is_finite());
    let mut minima = Vec::new();
    for cb in c_betas {
        let c = curve(cb);
        let (i_min, _) = c
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let x_min = xs[i_min];
        ok &= i_min > 0 && i_min < xs.len() - 1 && (-2000.0..=0.0).contains(&x_min);
        minima.push(format!("{x_min:.0}"));
    }
    let (hi, lo) = (curve(0.95), curve(0.85));
    let better = hi.iter().zip(&lo).filter(|(a, b)| a <= b).count();
    let frac = better as f64 / xs.len() as f64;
    ok &= frac >= 0.9;
    (
        ok,
        format!(
            "fuel minima at x0 = [{}] m for c_beta 0.85/0.90/0.95; c_beta 0.95 <= 0.85 at {:.0}% of points",
            minima.join(", "),
            100.0 * frac
        ),
    )
}

pub const MONTE_CARLO_RUNS: usize = 1000;
pub const MONTE_CARLO_SEED: u64 = 2024;

fn monte_carlo() -> (bool, String) {
    let start = Instant::now();
    let spec = DispersionSpec::default();
    let res = match run_monte_carlo(&spec, MONTE_CARLO_RUNS, MONTE_CARLO_SEED) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let s = &res.summary;
    let success = s.n_success as f64 / s.n_runs as f64;
    let slope_ok = res.runs.iter().filter(|r| r.landed).all(|r| !r.constraint_violated);
    let theta_ok = res.runs.iter().filter(|r| r.landed).all(|r| r.theta_u_f_deg >= 85.0);
    let elapsed = start.elapsed().as_secs_f64();
    (
        success >= 0.99 && slope_ok && theta_ok && elapsed < 300.0,
        format!(
            "{}/{} landed, glide slope kept: {slope_ok}, min theta_u at touchdown {:.2} deg, min elevation margin {:.3} deg, {elapsed:.1} s",
            s.n_success, s.n_runs, s.min_theta_u_f_deg, s.min_elevation_margin_deg
        ),
    )
}

fn command_fuzz() -> (bool, String) {
    const SLACK: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let vec3 = |rng: &mut ChaCha8Rng, s: f64| {
        Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
    };
    let (t_min, t_max) = (4971.8, 13258.0);
    let mut violations = 0;
    for _ in 0..100_000 {
        let c = rng.random_range(0.01..20.0);
        let x = vec3(&mut rng, c);
        let y = vec3(&mut rng, 20.0);
        if x.norm() <= c {
            let z = fit(&x, &y, c);
            let s = x + z;
            if s.norm() > c + SLACK {
                violations += 1;
            }
            if x.norm() > 0.0 && s.dot(&x) / x.norm() < x.norm() - SLACK {
                violations += 1;
            }
        }
        let (lo, hi) = (rng.random_range(0.0..5.0), rng.random_range(5.0..10.0));
        if let Ok(w) = sat(&y, lo, hi) {
            let n = w.norm();
            if n < lo - SLACK || n > hi + SLACK {
                violations += 1;
            }
        }
        let m = rng.random_range(1405.0..1905.0);
        let a_col = if rng.random_bool(0.5) { vec3(&mut rng, 10.0) } else { Vec3::zeros() };
        match total_command(&a_col, &y, m, t_min, t_max) {
            Ok(cmd) => {
                let thrust = cmd.u.norm() * m;
                if thrust < t_min * (1.0 - SLACK) || thrust > t_max * (1.0 + SLACK) {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }
    (violations == 0, format!("{violations} violations in 100000 samples"))
}
