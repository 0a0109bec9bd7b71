//! Allocation decisions and the three slice-class objectives.

pub mod constraints;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::channel::{class_link_stats, ChannelRealization, Components, Layer};
use crate::error::Result;
use crate::topology::config::SPEED_OF_LIGHT;
use crate::topology::{ScenarioConfig, TopologyState};

pub use constraints::{check_constraints, Violation};

/// Intra-slice allocation of one class.
///
/// `xi[k, n]` marks subchannel use, `phi[k, c]` component association and
/// `power[k, c, n]` the transmit power in watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceAllocation {
    pub xi: Array2<f64>,
    pub phi: Array2<f64>,
    pub power: Array3<f64>,
}

impl SliceAllocation {
    pub fn empty(users: usize, components: usize, subchannels: usize) -> Self {
        Self {
            xi: Array2::zeros((users, subchannels)),
            phi: Array2::zeros((users, components)),
            power: Array3::zeros((users, components, subchannels)),
        }
    }

    pub fn num_users(&self) -> usize {
        self.phi.nrows()
    }

    /// Serve user `k` from component `c` on subchannel `n` at `p` watts,
    /// replacing any previous assignment.
    pub fn assign(&mut self, k: usize, c: usize, n: usize, p: f64) {
        self.clear(k);
        self.phi[[k, c]] = 1.0;
        self.xi[[k, n]] = 1.0;
        self.power[[k, c, n]] = p;
    }

    pub fn clear(&mut self, k: usize) {
        self.phi.row_mut(k).fill(0.0);
        self.xi.row_mut(k).fill(0.0);
        self.power.index_axis_mut(ndarray::Axis(0), k).fill(0.0);
    }

    /// The (component, subchannel) pair serving user `k`, if any. Meaningful
    /// for discrete decisions.
    pub fn assignment(&self, k: usize) -> Option<(usize, usize)> {
        let c = self.phi.row(k).iter().position(|&v| v != 0.0)?;
        let n = self.xi.row(k).iter().position(|&v| v != 0.0)?;
        Some((c, n))
    }
}

/// Full action of one time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision {
    pub slices: [SliceAllocation; 3],
    /// Subchannel fractions, indexed `[class][layer]`.
    pub eta: [[f64; 3]; 3],
    /// Power fractions, indexed `[class][layer]`.
    pub rho: [[f64; 3]; 3],
    pub uav_xy: Vec<[f64; 2]>,
}

impl AllocationDecision {
    /// No user served, resources split evenly, vUAVs at `uav_xy`.
    pub fn idle(config: &ScenarioConfig, uav_xy: Vec<[f64; 2]>) -> Self {
        let c = config.num_components();
        let n = config.subchannels;
        let third = 1.0 / 3.0;
        Self {
            slices: config.users_per_class.map(|k| SliceAllocation::empty(k, c, n)),
            eta: [[third; 3]; 3],
            rho: [[third; 3]; 3],
            uav_xy,
        }
    }

    /// Power budget of component `c` granted to class `s`.
    pub fn power_budget(&self, s: usize, c: usize, comps: Components, config: &ScenarioConfig) -> f64 {
        self.rho[s][comps.layer(c).index()] * comps.budget_w(c, config)
    }
}

/// Objective triple: class-1 throughput (bps), delay margin beta - D2 (s),
/// class-3 mean SINR (linear). All three are maximized.
pub type ObjectiveVector = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetrics {
    pub throughput_bps: f64,
    pub avg_delay_s: f64,
    pub avg_sinr_linear: f64,
    pub objective: ObjectiveVector,
}

/// M/D/1 sojourn of one class-2 user: propagation `d/c`, transmission `A/R`
/// and queueing `lambda A / (2 (R^2 - lambda R))`. `None` when the queue is
/// unstable (`R <= lambda`).
pub fn service_delay(distance_m: f64, arrival_bits: f64, rate_bps: f64, lambda_bps: f64) -> Option<f64> {
    if rate_bps <= lambda_bps || rate_bps <= 0.0 {
        return None;
    }
    let queueing = lambda_bps * arrival_bits / (2.0 * (rate_bps * rate_bps - lambda_bps * rate_bps));
    Some(distance_m / SPEED_OF_LIGHT + arrival_bits / rate_bps + queueing)
}

/// Distance from user `k` of class `s` to component `c`.
pub fn component_distance(
    state: &TopologyState,
    s: usize,
    k: usize,
    c: usize,
    comps: Components,
) -> Result<f64> {
    let d = state.distances(s, k)?;
    Ok(match comps.layer(c) {
        Layer::Vbs => d.vbs[c],
        Layer::Uav => d.uav[c - comps.vbs],
        Layer::Leo => d.leo,
    })
}

/// Sum rate of class-1 users.
pub fn throughput_class1(
    decision: &AllocationDecision,
    realization: &ChannelRealization,
    config: &ScenarioConfig,
) -> f64 {
    class_link_stats(&decision.slices[0], &realization.classes[0], config)
        .iter()
        .map(|s| s.rate_bps)
        .sum()
}

/// Per-user class-2 delays; unstable or unserved users get the configured
/// penalty.
pub fn class2_delays(
    decision: &AllocationDecision,
    realization: &ChannelRealization,
    state: &TopologyState,
    config: &ScenarioConfig,
) -> Result<Vec<f64>> {
    let comps = Components::of(config);
    let alloc = &decision.slices[1];
    let stats = class_link_stats(alloc, &realization.classes[1], config);
    let lambda = config.per_user_arrival_bps();
    stats
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let Some((c, _)) = alloc.assignment(k) else {
                return Ok(config.delay_penalty_s());
            };
            let d = component_distance(state, 1, k, c, comps)?;
            let a = state.arrivals[1][k];
            Ok(service_delay(d, a, st.rate_bps, lambda).unwrap_or(config.delay_penalty_s()))
        })
        .collect()
}

/// Mean class-2 delay; zero when the class is empty.
pub fn average_delay(
    decision: &AllocationDecision,
    realization: &ChannelRealization,
    state: &TopologyState,
    config: &ScenarioConfig,
) -> Result<f64> {
    let d = class2_delays(decision, realization, state, config)?;
    Ok(mean(&d))
}

/// Mean class-3 SINR; zero when the class is empty.
pub fn average_sinr(
    decision: &AllocationDecision,
    realization: &ChannelRealization,
    config: &ScenarioConfig,
) -> f64 {
    let stats = class_link_stats(&decision.slices[2], &realization.classes[2], config);
    mean(&stats.iter().map(|s| s.sinr).collect::<Vec<_>>())
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Power drawn per component by each class: `sum_k sum_n phi xi p`.
pub fn power_consumption(decision: &AllocationDecision) -> [Vec<f64>; 3] {
    std::array::from_fn(|s| {
        let tx = crate::channel::transmit_power(&decision.slices[s]);
        tx.rows().into_iter().map(|r| r.sum()).collect()
    })
}

impl SliceMetrics {
    pub fn evaluate(
        decision: &AllocationDecision,
        realization: &ChannelRealization,
        state: &TopologyState,
        config: &ScenarioConfig,
    ) -> Result<Self> {
        let throughput_bps = throughput_class1(decision, realization, config);
        let avg_delay_s = average_delay(decision, realization, state, config)?;
        let avg_sinr_linear = average_sinr(decision, realization, config);
        Ok(Self {
            throughput_bps,
            avg_delay_s,
            avg_sinr_linear,
            objective: [throughput_bps, config.delay_threshold_s - avg_delay_s, avg_sinr_linear],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FixedFading;
    use crate::topology::init_topology;

    #[test]
    fn delay_examples() {
        assert_eq!(service_delay(3000.0, 0.0, 1e6, 1e5).unwrap(), 3000.0 / SPEED_OF_LIGHT);
        let d = service_delay(3000.0, 1e4, 1e6, 0.0).unwrap();
        assert!((d - (3000.0 / SPEED_OF_LIGHT + 1e-2)).abs() < 1e-15);
        let d = service_delay(3000.0, 1e4, 1e6, 1e5).unwrap();
        assert!((d - 1.0566e-2).abs() < 1e-6, "{d}");
        assert!(service_delay(10.0, 1e3, 1e5, 1e5).is_none());
        assert!(service_delay(10.0, 1e3, 0.0, 0.0).is_none());
    }

    #[test]
    fn empty_network_objective() {
        let mut c = ScenarioConfig::with_users([0, 0, 0]);
        c.lambda2_bps = 1.0;
        let state = init_topology(&c, 1).unwrap();
        let mut f = FixedFading { rayleigh: 1.0, scatter: (0.0, 0.0) };
        let r = ChannelRealization::sample(&state, &c, &mut f).unwrap();
        let d = AllocationDecision::idle(&c, state.uav_xy());
        let m = SliceMetrics::evaluate(&d, &r, &state, &c).unwrap();
        assert_eq!(m.objective, [0.0, 0.2, 0.0]);
    }

    #[test]
    fn single_assignment_metrics() {
        let c = ScenarioConfig::with_users([1, 1, 1]);
        let mut state = init_topology(&c, 1).unwrap();
        state.users = [vec![[1000.0, 1100.0]], vec![[1000.0, 1100.0]], vec![[1500.0, 1500.0]]];
        state.arrivals = [vec![0.0], vec![1000.0], vec![0.0]];
        let mut f = FixedFading { rayleigh: 1.0, scatter: (0.0, 0.0) };
        let r = ChannelRealization::sample(&state, &c, &mut f).unwrap();
        let mut d = AllocationDecision::idle(&c, state.uav_xy());
        d.slices[0].assign(0, 0, 2, 1.0);
        d.slices[1].assign(0, 0, 3, 1.0);
        let leo = c.num_components() - 1;
        let noise = c.subchannel_noise_w();
        let g_leo = r.classes[2][[0, leo, 0]];
        d.slices[2].assign(0, leo, 0, noise / g_leo);

        let g = r.classes[0][[0, 0, 2]];
        assert!((g - 100f64.powf(-1.5)).abs() < 1e-15);
        let expected = crate::channel::subchannel_rate(1.0, g, 0.0, &c);
        assert_eq!(throughput_class1(&d, &r, &c), expected);
        assert!((average_sinr(&d, &r, &c) - 1.0).abs() < 1e-12);

        let delay = average_delay(&d, &r, &state, &c).unwrap();
        let oracle = service_delay(100.0, 1000.0, expected, 1e4).unwrap();
        assert_eq!(delay, oracle);

        let p = power_consumption(&d);
        assert_eq!(p[0][0], 1.0);
        assert_eq!(p[0].iter().sum::<f64>(), 1.0);
        assert_eq!(p[2][leo], noise / g_leo);
    }

    #[test]
    fn unserved_class2_user_gets_penalty() {
        let c = ScenarioConfig::with_users([0, 2, 0]);
        let state = init_topology(&c, 1).unwrap();
        let mut f = FixedFading { rayleigh: 1.0, scatter: (0.0, 0.0) };
        let r = ChannelRealization::sample(&state, &c, &mut f).unwrap();
        let d = AllocationDecision::idle(&c, state.uav_xy());
        assert_eq!(average_delay(&d, &r, &state, &c).unwrap(), 2.0);
    }
}
