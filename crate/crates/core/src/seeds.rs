//! Named random substreams derived from one master seed.
//!
//! Each consumer (topology, fading, exploration noise, replay sampling,
//! network initialization) draws from its own ChaCha stream, so changing how
//! many numbers one component consumes never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

pub const TOPOLOGY: &str = "topology";
pub const ARRIVALS: &str = "arrivals";
pub const FADING: &str = "fading";
pub const NOISE: &str = "noise";
pub const SAMPLING: &str = "sampling";
pub const INIT: &str = "init";
pub const CALIBRATION: &str = "calibration";
pub const MOBILITY: &str = "mobility";

/// Derive the 32-byte stream seed for `(master, name)`.
pub fn stream_seed(master: u64, name: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(b"/");
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    seed
}

pub fn substream(master: u64, name: &str) -> SimRng {
    SimRng::from_seed(stream_seed(master, name))
}
