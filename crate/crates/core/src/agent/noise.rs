//! Exploration noise with a linearly decaying scale.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::topology::config::NoiseKind;

/// Linear interpolation of the noise scale from `start` to `end` over
/// training progress in [0, 1].
pub fn decayed_sigma(start: f64, end: f64, progress: f64) -> f64 {
    start + (end - start) * progress.clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub enum NoiseProcess {
    Gaussian,
    /// Mean-reverting Ornstein-Uhlenbeck process, one state per action entry.
    OrnsteinUhlenbeck { theta: f64, state: Vec<f64> },
}

impl NoiseProcess {
    pub fn new(kind: NoiseKind, dim: usize) -> Self {
        match kind {
            NoiseKind::Gaussian => NoiseProcess::Gaussian,
            NoiseKind::OrnsteinUhlenbeck => NoiseProcess::OrnsteinUhlenbeck { theta: 0.15, state: vec![0.0; dim] },
        }
    }

    pub fn reset(&mut self) {
        if let NoiseProcess::OrnsteinUhlenbeck { state, .. } = self {
            state.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// One noise vector of length `dim` at scale `sigma`.
    pub fn sample(&mut self, dim: usize, sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            NoiseProcess::Gaussian => (0..dim)
                .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, rng))
                .collect(),
            NoiseProcess::OrnsteinUhlenbeck { theta, state } => {
                state.resize(dim, 0.0);
                for x in state.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *x += -*theta * *x + sigma * z;
                }
                state.clone()
            }
        }
    }
}
