//! Invariants checked over generated inputs.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sagin_core::agent::replay::ReplayBuffer;
use sagin_core::analysis::complexity_estimate;
use sagin_core::neural::Mlp;
use sagin_core::orchestrator::AgentLayout;
use sagin_core::slices::{class2_delays, service_delay, throughput_class1};
use sagin_core::topology::init_topology;
use sagin_core::ScenarioConfig;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distances_respect_altitude(seed in any::<u64>(), k in 1usize..8) {
        let config = ScenarioConfig::with_users([k; 3]);
        let state = init_topology(&config, seed).unwrap();
        for s in 0..3 {
            for user in 0..k {
                let d = state.distances(s, user).unwrap();
                prop_assert!(d.uav.iter().all(|&x| x >= config.uav_altitude_m));
                prop_assert!(d.vbs.iter().all(|&x| x >= 0.0));
                prop_assert!(d.leo >= config.leo_altitude_m);
            }
        }
    }

    #[test]
    fn same_seed_same_topology(seed in any::<u64>()) {
        let config = ScenarioConfig::default();
        prop_assert_eq!(init_topology(&config, seed).unwrap(), init_topology(&config, seed).unwrap());
    }

    #[test]
    fn scaling_class1_power_never_lowers_throughput(seed in any::<u64>(), factor in 1.0..50.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng);
        let before = throughput_class1(&inst.decision, &inst.realization, &inst.config);
        let mut louder = inst.decision.clone();
        louder.slices[0].power.mapv_inplace(|p| p * factor);
        let after = throughput_class1(&louder, &inst.realization, &inst.config);
        prop_assert!(after >= before * (1.0 - 1e-12), "{} -> {}", before, after);
    }

    #[test]
    fn delay_bounds_its_terms(d in 0.0..1e6f64, bits in 0.0..1e5f64, rate in 1.0..1e8f64, load in 0.0..0.999f64) {
        let lambda = load * rate;
        let delay = service_delay(d, bits, rate, lambda).unwrap();
        prop_assert!(delay >= d / 299_792_458.0);
        prop_assert!(delay >= bits / rate);
        prop_assert!(service_delay(d, bits, lambda, lambda).is_none());
    }

    #[test]
    fn class2_delays_are_finite_and_bounded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng);
        let delays = class2_delays(&inst.decision, &inst.realization, &inst.state, &inst.config).unwrap();
        let penalty = inst.config.delay_penalty_s();
        prop_assert!(delays.iter().all(|&x| x.is_finite() && x >= 0.0 && x <= penalty));
    }

    #[test]
    fn soft_update_stays_between_target_and_online(seed in any::<u64>(), tau in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = Mlp::new(&[4, 6, 3], 1e-3, &mut rng).unwrap();
        let original = Mlp::new(&[4, 6, 3], 1e-3, &mut rng).unwrap();
        let mut target = original.clone();
        target.soft_update(&online, tau).unwrap();
        for l in 0..target.weights.len() {
            for ((t, o), n) in target.weights[l].iter().zip(original.weights[l].iter()).zip(online.weights[l].iter()) {
                prop_assert!(*t >= o.min(*n) - 1e-15 && *t <= o.max(*n) + 1e-15);
            }
            for ((t, o), n) in target.biases[l].iter().zip(original.biases[l].iter()).zip(online.biases[l].iter()) {
                prop_assert!(*t >= o.min(*n) - 1e-15 && *t <= o.max(*n) + 1e-15);
            }
        }
    }

    #[test]
    fn replay_is_bounded_fifo(capacity in 1usize..20, pushes in 0usize..60) {
        let mut buf = ReplayBuffer::new(capacity);
        for i in 0..pushes {
            let evicted = buf.push(i);
            prop_assert_eq!(evicted, (i >= capacity).then(|| i - capacity));
            prop_assert!(buf.len() <= capacity);
        }
        let kept: Vec<usize> = buf.iter().copied().collect();
        prop_assert_eq!(kept, (pushes.saturating_sub(capacity)..pushes).collect::<Vec<_>>());
    }

    #[test]
    fn complexity_is_linear_in_episodes_and_slots(k in 0usize..20, v in 1usize..6, e in 1u64..50, t in 1u64..500) {
        let nets = AgentLayout { users: [k; 3], uavs: v }.network_dims(100, 2);
        let unit = complexity_estimate(&nets, 1, 1);
        prop_assert_eq!(complexity_estimate(&nets, e, t), e * t * unit);
        prop_assert_eq!(complexity_estimate(&nets, e + 1, t) - complexity_estimate(&nets, e, t), t * unit);
    }

    #[test]
    fn repaired_actions_are_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(repaired_random_action(&mut rng).is_ok());
    }
}
