use std::path::Path;

use serde::Deserialize;

use super::{parse_toml, HarnessError};
use crate::guidance::{GuidanceConfig, LanderState, MassKnowledge};
use crate::sim::{self, LanderParams, Law, SimConfig, SimRecord, TerminationReport};
use crate::{Error, Vec3};

/// A fully specified closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub r0: Vec3,
    pub v0: Vec3,
    pub m0: f64,
    pub sim: SimConfig,
}

pub const PRESETS: [&str; 3] = ["scenario1", "scenario2", "scenario3"];

impl Scenario {
    pub fn new(name: impl Into<String>, r0: Vec3, v0: Vec3, phi: f64) -> Self {
        let mut sim = SimConfig::default();
        sim.guidance.phi = phi;
        Self {
            name: name.into(),
            r0,
            v0,
            m0: sim.lander.m_wet,
            sim,
        }
    }

    /// Small initial offset.
    pub fn scenario1() -> Self {
        Self::new("scenario1", Vec3::new(-2500.0, 0.0, 1500.0), Vec3::new(100.0, 50.0, -75.0), 0.0)
    }

    /// Large offset with a 90 degree heading error.
    pub fn scenario2() -> Self {
        Self::new("scenario2", Vec3::new(-3000.0, 0.0, 1500.0), Vec3::new(0.0, 150.0, -30.0), 0.0)
    }

    /// Flying away from the site under a 4 degree glide slope.
    pub fn scenario3() -> Self {
        Self::new(
            "scenario3",
            Vec3::new(2000.0, 0.0, 1500.0),
            Vec3::new(100.0, 0.0, -75.0),
            4f64.to_radians(),
        )
    }

    pub fn phi(&self) -> f64 {
        self.sim.guidance.phi
    }

    pub fn initial_state(&self) -> LanderState {
        LanderState::new(self.r0, self.v0, self.m0, 0.0)
    }

    pub fn validate(&self) -> crate::Result<()> {
        self.sim.lander.validate()?;
        self.sim.guidance.validate()?;
        self.sim.disturbance.validate()?;
        if !(self.m0 > self.sim.lander.m_dry && self.m0 <= self.sim.lander.m_wet) {
            return Err(Error::InvalidParameter {
                name: "m0",
                value: self.m0,
                reason: "initial mass must lie in (m_dry, m_wet]",
            });
        }
        if self.r0.z < 0.0 {
            return Err(Error::InvalidParameter {
                name: "r0",
                value: self.r0.z,
                reason: "initial position must be above the ground",
            });
        }
        let phi = self.phi();
        if phi > 0.0 && self.r0.z < phi.tan() * self.r0.xy().norm() {
            return Err(Error::InvalidParameter {
                name: "r0",
                value: self.r0.z,
                reason: "initial position lies below the glide-slope cone",
            });
        }
        Ok(())
    }

    pub fn run(&self) -> crate::Result<(Vec<SimRecord>, TerminationReport)> {
        sim::run_closed_loop(&self.initial_state(), &self.sim)
    }
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Result<Scenario, HarnessError> {
    match name {
        "scenario1" => Ok(Scenario::scenario1()),
        "scenario2" => Ok(Scenario::scenario2()),
        "scenario3" => Ok(Scenario::scenario3()),
        other => Err(HarnessError::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    /// Start from a preset and override below.
    preset: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    initial: InitialSection,
    #[serde(default)]
    guidance: GuidanceSection,
    #[serde(default)]
    lander: LanderSection,
    #[serde(default)]
    disturbance: DisturbanceSection,
    #[serde(default)]
    sim: SimSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    r0: Option<[f64; 3]>,
    v0: Option<[f64; 3]>,
    m0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuidanceSection {
    k: Option<f64>,
    c_beta: Option<f64>,
    c_e: Option<f64>,
    delta: Option<f64>,
    c_col_lo: Option<f64>,
    c_col_hi: Option<f64>,
    glide_slope_deg: Option<f64>,
    eps: Option<f64>,
    mass_knowledge: Option<MassKnowledgeName>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MassKnowledgeName {
    Measured,
    Initial,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LanderSection {
    m_wet: Option<f64>,
    m_dry: Option<f64>,
    t_max: Option<f64>,
    t_min: Option<f64>,
    c: Option<f64>,
    g: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceSection {
    eta: Option<f64>,
    xi_sigma: Option<f64>,
    mu_deg: Option<[f64; 3]>,
    lambda: Option<[f64; 3]>,
    /// Shorthand for the Mars atmosphere and lander drag constants.
    drag: Option<bool>,
    rho: Option<f64>,
    c_d: Option<f64>,
    s_ref: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    law: Option<LawName>,
    dt: Option<f64>,
    t_max_guard: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LawName {
    Gt,
    Zemzev,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, HarnessError> {
        let mut s = match &self.preset {
            Some(p) => preset(p)?,
            None => Scenario::scenario1(),
        };
        s.name = self.name.or(self.preset).unwrap_or_else(|| "custom".to_string());

        let l = self.lander;
        let lander: &mut LanderParams = &mut s.sim.lander;
        set(&mut lander.m_wet, l.m_wet);
        set(&mut lander.m_dry, l.m_dry);
        set(&mut lander.t_max, l.t_max);
        set(&mut lander.t_min, l.t_min);
        set(&mut lander.c, l.c);
        set(&mut lander.g, l.g);
        let lander = *lander;
        let phi = s.sim.guidance.phi;
        s.sim.guidance = GuidanceConfig {
            phi,
            ..lander.guidance_config()
        };

        set(&mut s.r0, self.initial.r0.map(Vec3::from));
        set(&mut s.v0, self.initial.v0.map(Vec3::from));
        s.m0 = self.initial.m0.unwrap_or(lander.m_wet);

        let g = self.guidance;
        let gc = &mut s.sim.guidance;
        set(&mut gc.k, g.k);
        set(&mut gc.c_beta, g.c_beta);
        set(&mut gc.c_e, g.c_e);
        set(&mut gc.delta, g.delta);
        set(&mut gc.c_col_lo, g.c_col_lo);
        set(&mut gc.c_col_hi, g.c_col_hi);
        set(&mut gc.phi, g.glide_slope_deg.map(f64::to_radians));
        set(&mut gc.eps, g.eps);
        set(
            &mut gc.mass_knowledge,
            g.mass_knowledge.map(|m| match m {
                MassKnowledgeName::Measured => MassKnowledge::Measured,
                MassKnowledgeName::Initial => MassKnowledge::InitialOnly,
            }),
        );

        let d = self.disturbance;
        let dm = &mut s.sim.disturbance;
        if d.drag == Some(true) {
            *dm = dm.with_mars_drag();
        }
        set(&mut dm.eta, d.eta);
        set(&mut dm.xi_sigma, d.xi_sigma);
        set(&mut dm.mu, d.mu_deg.map(|m| m.map(f64::to_radians)));
        set(&mut dm.lambda, d.lambda.map(Vec3::from));
        set(&mut dm.rho, d.rho);
        set(&mut dm.c_d, d.c_d);
        set(&mut dm.s_ref, d.s_ref);

        set(
            &mut s.sim.law,
            self.sim.law.map(|l| match l {
                LawName::Gt => Law::GravityTurn,
                LawName::Zemzev => Law::ZemZev,
            }),
        );
        set(&mut s.sim.dt, self.sim.dt);
        set(&mut s.sim.t_max_guard, self.sim.t_max_guard);
        set(&mut s.sim.noise_seed, self.seed);
        Ok(s)
    }
}

/// Parses scenario TOML. Defaults come from `preset` (or scenario 1) and
/// the standard lander and guidance tables.
pub fn parse_scenario(text: &str, file: &str) -> Result<Scenario, HarnessError> {
    let raw: ScenarioFile = parse_toml(text, file)?;
    let scenario = raw.into_scenario()?;
    scenario.validate().map_err(|source| HarnessError::Invalid {
        file: file.to_string(),
        source,
    })?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}
