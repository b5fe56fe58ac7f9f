//! Gravity-turn powered-descent guidance for planetary landing.
//!
//! The crate contains the closed-form planar gravity turn, the velocity field
//! derived from it, the tracking law with glide-slope avoidance, a 3-DoF
//! closed-loop simulator with a ZEM/ZEV baseline, and the scenario and
//! Monte Carlo harness used by the `gtland` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avoidance;
pub mod command;
pub mod error;
pub mod gravity_turn;
pub mod harness;
pub mod guidance;
pub mod sim;
pub mod velocity_field;
pub mod verify;

pub use error::{Error, Result};

/// Column vector in a Cartesian frame.
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
