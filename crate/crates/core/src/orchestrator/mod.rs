//! Two-level learning loop: a central agent picks shares and vUAV positions,
//! three per-class agents pick subchannels and powers, and a repair pass keeps
//! every decision feasible.

pub mod decode;
pub mod layout;
pub mod observe;
pub mod repair;
pub mod reward;
pub mod training;

pub use decode::{decode_central_action, decode_distributed_action, CentralAction};
pub use layout::AgentLayout;
pub use repair::{dual_resource_allocation, RepairMode, RepairReport};
pub use reward::Normalizer;
pub use training::{
    run_ablations, run_maddpg_baseline, run_scalar_utility_baseline, run_training, MetricRow,
    ParetoCandidate, Scheme, Trainer, TrainingArtifacts,
};
