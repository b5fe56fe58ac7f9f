use thiserror::Error;

/// Errors raised by the guidance math and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{op}: argument outside domain ({reason})")]
    Domain { op: &'static str, reason: String },

    #[error("landing site is above the lander (z_go = {z_go} m)")]
    SiteAboveLander { z_go: f64 },

    #[error("cannot lower-clamp a zero vector to magnitude {lower}")]
    ZeroVectorSaturation { lower: f64 },

    #[error("planar propagation failed at t = {t} s: {reason}")]
    Propagation { t: f64, reason: &'static str },

    #[error("guidance step {step} failed: {source}")]
    GuidanceStep {
        step: u8,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, step: u8) -> Self {
        Error::GuidanceStep {
            step,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
