//! Observation vectors scaled into [0, 1].

use crate::topology::{ScenarioConfig, TopologyState};

/// Largest arrival the observation represents before saturating at 1.
fn arrival_ceiling(config: &ScenarioConfig) -> f64 {
    config.training.arrival_scale * config.per_user_arrival_bits()
}

fn scaled(v: f64, ceiling: f64) -> f64 {
    if ceiling > 0.0 {
        (v / ceiling).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Per-class aggregate arrivals, then every user's (x, y) by class.
pub fn build_central_observation(state: &TopologyState, config: &ScenarioConfig) -> Vec<f64> {
    let ceiling = arrival_ceiling(config);
    let mut out = Vec::with_capacity(3 + 2 * state.users.iter().map(Vec::len).sum::<usize>());
    for s in 0..3 {
        let total: f64 = state.arrivals[s].iter().sum();
        out.push(scaled(total, ceiling * state.users[s].len() as f64));
    }
    for class in &state.users {
        for p in class {
            out.push(p[0] / config.area_side_m);
            out.push(p[1] / config.area_side_m);
        }
    }
    out
}

/// Per-user arrivals of class `s`.
pub fn build_distributed_observation(state: &TopologyState, s: usize, config: &ScenarioConfig) -> Vec<f64> {
    let ceiling = arrival_ceiling(config);
    state.arrivals[s].iter().map(|&a| scaled(a, ceiling)).collect()
}

/// Coupled-baseline observation: per-user arrivals then coordinates.
pub fn build_coupled_observation(state: &TopologyState, s: usize, config: &ScenarioConfig) -> Vec<f64> {
    let mut out = build_distributed_observation(state, s, config);
    for p in &state.users[s] {
        out.push(p[0] / config.area_side_m);
        out.push(p[1] / config.area_side_m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::init_topology;

    #[test]
    fn origin_and_zero_arrivals_give_zeros() {
        let c = ScenarioConfig::with_users([2, 3, 1]);
        let mut s = init_topology(&c, 1).unwrap();
        s.users = [vec![[0.0, 0.0]; 2], vec![[0.0, 0.0]; 3], vec![[0.0, 0.0]; 1]];
        let o = build_central_observation(&s, &c);
        assert_eq!(o, vec![0.0; 3 + 12]);
        assert_eq!(build_distributed_observation(&s, 1, &c), vec![0.0; 3]);
    }

    #[test]
    fn lengths_and_permutation_layout() {
        let c = ScenarioConfig::with_users([11, 11, 11]);
        let mut s = init_topology(&c, 2).unwrap();
        assert_eq!(build_central_observation(&s, &c).len(), 69);
        assert_eq!(build_distributed_observation(&s, 0, &c).len(), 11);
        assert_eq!(build_coupled_observation(&s, 0, &c).len(), 33);
        let before = build_central_observation(&s, &c);
        s.users[1].swap(0, 4);
        let after = build_central_observation(&s, &c);
        let base = 3 + 2 * 11;
        assert_eq!(&before[..base], &after[..base]);
        assert_eq!(&before[base..base + 2], &after[base + 8..base + 10]);
        assert_eq!(&before[base + 8..base + 10], &after[base..base + 2]);
        assert_eq!(&before[base + 22..], &after[base + 22..]);
    }

    #[test]
    fn arrival_scaling_is_monotone_and_bounded() {
        let c = ScenarioConfig::with_users([0, 3, 0]);
        let mut s = init_topology(&c, 3).unwrap();
        s.arrivals[1] = vec![0.0, 2000.0, 1e9];
        let o = build_distributed_observation(&s, 1, &c);
        assert_eq!(o, vec![0.0, 0.5, 1.0]);
    }
}
