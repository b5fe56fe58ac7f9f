use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_toml, HarnessError, Scenario};
use crate::sim::{DisturbanceModel, Outcome, TerminationReport};
use crate::{Error, Vec3};

/// One scalar distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase", deny_unknown_fields)]
pub enum Dist {
    Normal { mean: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    Fixed { value: f64 },
}

impl Dist {
    pub fn validate(&self, name: &'static str) -> crate::Result<()> {
        match *self {
            Dist::Normal { sigma, .. } if !(sigma >= 0.0) => Err(Error::InvalidParameter {
                name,
                value: sigma,
                reason: "standard deviation must be non-negative",
            }),
            Dist::Uniform { lo, hi } if !(lo <= hi) => Err(Error::InvalidParameter {
                name,
                value: lo,
                reason: "uniform bounds need lo <= hi",
            }),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Normal { mean, sigma } => {
                if sigma == 0.0 {
                    mean
                } else {
                    // sigma > 0 was validated, so construction cannot fail.
                    Normal::new(mean, sigma).map_or(mean, |n| n.sample(rng))
                }
            }
            Dist::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..hi)
                }
            }
            Dist::Fixed { value } => value,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Normal { mean, .. } => mean,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::Fixed { value } => value,
        }
    }
}

fn sample3<R: Rng + ?Sized>(d: &[Dist; 3], rng: &mut R) -> Vec3 {
    Vec3::new(d[0].sample(rng), d[1].sample(rng), d[2].sample(rng))
}

/// Dispersed initial conditions and disturbances. Defaults reproduce the
/// standard robustness study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSpec {
    pub r0: [Dist; 3],
    pub v0: [Dist; 3],
    pub m0: Dist,
    /// Thrust scale factor (fraction).
    pub eta: Dist,
    /// Standard deviation of the per-step thrust instability (fraction).
    pub xi_sigma: f64,
    pub mu_deg: [Dist; 3],
    pub lambda: [Dist; 3],
    pub c_beta: f64,
    pub glide_slope_deg: f64,
    pub drag: bool,
    pub dt: f64,
}

impl Default for DispersionSpec {
    fn default() -> Self {
        let n = |mean, sigma| Dist::Normal { mean, sigma };
        let u = |lo, hi| Dist::Uniform { lo, hi };
        Self {
            r0: [n(500.0, 100.0), n(500.0, 100.0), n(1500.0, 100.0)],
            v0: [n(100.0, 10.0), n(10.0, 5.0), n(-75.0, 5.0)],
            m0: Dist::Fixed { value: 1905.0 },
            eta: u(-0.04, 0.04),
            xi_sigma: 0.003,
            mu_deg: [u(-0.3, 0.3); 3],
            lambda: [u(-0.02, 0.02); 3],
            c_beta: 0.85,
            glide_slope_deg: 4.0,
            drag: true,
            dt: crate::sim::DEFAULT_DT,
        }
    }
}

impl DispersionSpec {
    pub fn validate(&self) -> crate::Result<()> {
        for d in self.r0.iter().chain(&self.v0) {
            d.validate("r0/v0")?;
        }
        for d in self.mu_deg.iter().chain(&self.lambda) {
            d.validate("mu/lambda")?;
        }
        self.m0.validate("m0")?;
        self.eta.validate("eta")?;
        if !(self.xi_sigma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "xi_sigma",
                value: self.xi_sigma,
                reason: "must be non-negative",
            });
        }
        if !(self.glide_slope_deg >= 0.0 && self.glide_slope_deg < 90.0) {
            return Err(Error::InvalidParameter {
                name: "glide_slope_deg",
                value: self.glide_slope_deg,
                reason: "must lie in [0, 90)",
            });
        }
        crate::sim::SimConfig::default().lander.validate()?;
        let mut probe = Scenario::scenario1();
        probe.sim.guidance.c_beta = self.c_beta;
        probe.sim.guidance.validate()
    }

    pub fn from_toml(text: &str, file: &str) -> Result<Self, HarnessError> {
        let spec: Self = parse_toml(text, file)?;
        spec.validate().map_err(|source| HarnessError::Invalid {
            file: file.to_string(),
            source,
        })?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Draws run `index` of the batch seeded by `seed`. Initial positions
    /// below the glide-slope cone are redrawn.
    pub fn sample_scenario(&self, seed: u64, index: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let phi = self.glide_slope_deg.to_radians();
        let mut r0 = sample3(&self.r0, &mut rng);
        for _ in 0..100 {
            if r0.z > phi.tan() * r0.xy().norm() {
                break;
            }
            r0 = sample3(&self.r0, &mut rng);
        }
        let v0 = sample3(&self.v0, &mut rng);
        let mut s = Scenario::new(format!("mc-{index}"), r0, v0, phi);
        s.m0 = self.m0.sample(&mut rng);
        s.sim.dt = self.dt;
        s.sim.guidance.c_beta = self.c_beta;
        let mu = sample3(&self.mu_deg, &mut rng);
        let mut d = DisturbanceModel {
            eta: self.eta.sample(&mut rng),
            xi_sigma: self.xi_sigma,
            mu: [mu.x.to_radians(), mu.y.to_radians(), mu.z.to_radians()],
            lambda: sample3(&self.lambda, &mut rng),
            ..DisturbanceModel::none()
        };
        if self.drag {
            d = d.with_mars_drag();
        }
        s.sim.disturbance = d;
        s.sim.noise_seed = rng.random();
        s
    }
}

/// Serializable digest of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: u64,
    pub outcome: String,
    pub landed: bool,
    pub fuel_used_kg: f64,
    pub t_f_s: f64,
    pub final_r_m: f64,
    pub final_v_mps: f64,
    pub gamma_f_deg: f64,
    pub theta_u_f_deg: f64,
    pub min_elevation_deg: f64,
    pub constraint_violated: bool,
}

impl RunSummary {
    fn from_report(index: u64, rep: &TerminationReport) -> Self {
        Self {
            index,
            outcome: outcome_name(&rep.outcome),
            landed: rep.landed,
            fuel_used_kg: rep.fuel_used,
            t_f_s: rep.t_f,
            final_r_m: rep.final_r.norm(),
            final_v_mps: rep.final_v.norm(),
            gamma_f_deg: rep.gamma_f.to_degrees(),
            theta_u_f_deg: rep.theta_u_f.to_degrees(),
            min_elevation_deg: rep.min_elevation_angle.to_degrees(),
            constraint_violated: rep.constraint_violated,
        }
    }

    fn failed(index: u64, err: &Error) -> Self {
        Self {
            index,
            outcome: format!("error: {err}"),
            landed: false,
            fuel_used_kg: f64::NAN,
            t_f_s: f64::NAN,
            final_r_m: f64::NAN,
            final_v_mps: f64::NAN,
            gamma_f_deg: f64::NAN,
            theta_u_f_deg: f64::NAN,
            min_elevation_deg: f64::NAN,
            constraint_violated: true,
        }
    }
}

fn outcome_name(o: &Outcome) -> String {
    match o {
        Outcome::Landed => "landed".into(),
        Outcome::Impact => "impact".into(),
        Outcome::FuelExhausted => "fuel_exhausted".into(),
        Outcome::Timeout => "timeout".into(),
        Outcome::GuidanceFailure(msg) => format!("guidance_failure: {msg}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Sample statistics; all NaN for an empty input.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = values.into_iter().collect();
        if xs.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_runs: usize,
    pub n_success: usize,
    /// Fuel statistics over successful runs (kg).
    pub fuel_kg: Stats,
    pub worst_final_r_m: f64,
    pub worst_final_v_mps: f64,
    /// Smallest elevation minus glide-slope angle over all runs (deg).
    pub min_elevation_margin_deg: f64,
    pub n_constraint_violations: usize,
    /// Flight-path angle at touchdown over successful runs.
    pub gamma_f_deg: Stats,
    /// Smallest command elevation at touchdown over successful runs.
    pub min_theta_u_f_deg: f64,
}

impl MonteCarloSummary {
    pub fn from_runs(runs: &[RunSummary], glide_slope_deg: f64) -> Self {
        let ok: Vec<&RunSummary> = runs.iter().filter(|r| r.landed).collect();
        let worst = |f: fn(&RunSummary) -> f64| runs.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        Self {
            n_runs: runs.len(),
            n_success: ok.len(),
            fuel_kg: Stats::of(ok.iter().map(|r| r.fuel_used_kg)),
            worst_final_r_m: worst(|r| r.final_r_m),
            worst_final_v_mps: worst(|r| r.final_v_mps),
            min_elevation_margin_deg: runs
                .iter()
                .map(|r| r.min_elevation_deg - glide_slope_deg)
                .fold(f64::INFINITY, f64::min),
            n_constraint_violations: runs.iter().filter(|r| r.constraint_violated).count(),
            gamma_f_deg: Stats::of(ok.iter().map(|r| r.gamma_f_deg)),
            min_theta_u_f_deg: ok.iter().map(|r| r.theta_u_f_deg).fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub seed: u64,
    pub summary: MonteCarloSummary,
    pub runs: Vec<RunSummary>,
}

/// Runs `n` dispersed closed-loop simulations in parallel. Run `i` draws
/// from its own stream of `seed`, so the result does not depend on the
/// thread count or scheduling.
pub fn run_monte_carlo(spec: &DispersionSpec, n: usize, seed: u64) -> crate::Result<MonteCarloResult> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "need at least one run",
        });
    }
    spec.validate()?;
    let runs: Vec<RunSummary> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let scenario = spec.sample_scenario(seed, i);
            match scenario.run() {
                Ok((_, rep)) => RunSummary::from_report(i, &rep),
                Err(e) => RunSummary::failed(i, &e),
            }
        })
        .collect();
    Ok(MonteCarloResult {
        seed,
        summary: MonteCarloSummary::from_runs(&runs, spec.glide_slope_deg),
        runs,
    })
}
