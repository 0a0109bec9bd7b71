//! Per-class rewards from 0-1 normalized objectives and the rank-voting
//! central reward.

use serde::{Deserialize, Serialize};

use crate::analysis::rank_vote;
use crate::slices::SliceMetrics;

/// Running min-max bounds of (throughput, delay, SINR) over the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Default for Normalizer {
    fn default() -> Self {
        Self { lo: [f64::INFINITY; 3], hi: [f64::NEG_INFINITY; 3] }
    }
}

/// Raw (throughput, delay, SINR) of a metrics record.
pub fn raw_metrics(m: &SliceMetrics) -> [f64; 3] {
    [m.throughput_bps, m.avg_delay_s, m.avg_sinr_linear]
}

impl Normalizer {
    pub fn observe(&mut self, values: [f64; 3]) {
        for i in 0..3 {
            if values[i].is_finite() {
                self.lo[i] = self.lo[i].min(values[i]);
                self.hi[i] = self.hi[i].max(values[i]);
            }
        }
    }

    /// `(v - lo) / (hi - lo)` clamped to [0, 1]; 0.5 while the range is empty
    /// or degenerate.
    pub fn normalize(&self, i: usize, v: f64) -> f64 {
        let range = self.hi[i] - self.lo[i];
        if !(range > 0.0 && range.is_finite()) {
            return 0.5;
        }
        ((v - self.lo[i]) / range).clamp(0.0, 1.0)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.lo.iter().chain(&self.hi).copied().collect()
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == 6).then(|| Self { lo: [v[0], v[1], v[2]], hi: [v[3], v[4], v[5]] })
    }
}

/// Rewards of the three per-class agents: normalized throughput, one minus
/// normalized delay, normalized SINR.
pub fn distributed_rewards(raw: [f64; 3], normalizer: &Normalizer) -> [f64; 3] {
    [
        normalizer.normalize(0, raw[0]),
        1.0 - normalizer.normalize(1, raw[1]),
        normalizer.normalize(2, raw[2]),
    ]
}

/// Rank-voting score of the newest entry of `window`.
pub fn central_reward<P: AsRef<[f64]>>(window: &[P]) -> usize {
    assert!(!window.is_empty(), "rank voting needs a nonempty window");
    rank_vote(window, window.len() - 1)
}

/// Weighted utility `w1 r1 - w2 (1 - r2) + w3 r3` from per-class rewards,
/// i.e. `w1 norm(R) - w2 norm(D) + w3 norm(SINR)`.
pub fn weighted_utility(rewards: [f64; 3], weights: [f64; 3]) -> f64 {
    weights[0] * rewards[0] - weights[1] * (1.0 - rewards[1]) + weights[2] * rewards[2]
}
