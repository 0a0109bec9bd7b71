//! Multi-objective RAN slicing over a space-air-ground integrated network.
//!
//! The crate simulates a three-layer radio access network (ground base
//! stations, UAVs and one LEO satellite), each layer virtualized per slice
//! class, and trains a two-level actor-critic scheme that splits inter-slice
//! and intra-slice resource allocation across a central agent and three
//! per-class agents. The central agent is rewarded by rank voting over its
//! replay memory so that the learned tuples trace a Pareto set over
//! (throughput, delay, SINR).
//!
//! Module map:
//! - [`topology`]: scenario constants, node geometry, user placement, arrivals.
//! - [`channel`]: fading and path-loss gains, per-subchannel rates.
//! - [`slices`]: allocation decisions, per-class metrics, constraint checks.
//! - [`neural`]: dense networks with exact gradients and checkpointing.
//! - [`agent`]: deterministic-policy actor-critic agent and replay memory.
//! - [`orchestrator`]: the training loop, action decoding, repair, baselines.
//! - [`analysis`]: dominance, ranks, complexity, boundary interpolation.
//! - [`report`]: CSV records and run manifests.

pub mod agent;
pub mod analysis;
pub mod channel;
pub mod error;
pub mod neural;
pub mod orchestrator;
pub mod report;
pub mod seeds;
pub mod slices;
pub mod topology;

pub use error::{Result, SimError};
pub use topology::config::ScenarioConfig;
