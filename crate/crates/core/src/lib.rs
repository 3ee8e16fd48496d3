//! Joint user association and beamforming for a downlink network made of one
//! high-altitude platform station (HAPS), several terrestrial base stations and
//! a geostationary satellite that feeds the HAPS over a free-space optical
//! backhaul.
//!
//! The crate is organised bottom-up:
//!
//! - [`scenario`]: network geometry, power budgets and the JSON config format.
//! - [`channel`]: FSO backhaul capacity and random RF channel vectors.
//! - [`rates`]: SINR and rate evaluation for an (association, beamformer) pair.
//! - [`association`]: the ILP/GAP association stage, its branch-and-bound
//!   solver and the two greedy baselines.
//! - [`beamforming`]: backhaul-aware WMMSE beamforming under fixed association.
//! - [`orchestrator`]: the alternating outer loop and Monte-Carlo sweeps.

pub mod association;
pub mod beamforming;
pub mod channel;
mod error;
pub mod orchestrator;
pub mod rates;
pub mod scenario;

pub use association::{AssignmentInstance, AssociationTrace};
pub use beamforming::BeamformingTrace;
pub use channel::ChannelSet;
pub use error::{Error, Result};
pub use orchestrator::{Method, SolveReport, SolverParams};
pub use rates::{Association, BeamformerSet, RateBreakdown};
pub use scenario::{FsoParams, Layout, Overrides, Role, Scenario, ScenarioSpec, Transmitter};

/// Complex column vector used for channels and beams.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
