//! Independent reimplementations used as test oracles. Nothing here calls the
//! library's rate, delay or dominance code; only plain data is shared.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Exp};
use sagin_core::channel::{ChannelRealization, RandomFading};
use sagin_core::neural::Mlp;
use sagin_core::slices::{AllocationDecision, SliceAllocation};
use sagin_core::topology::{init_topology, TopologyState};
use sagin_core::ScenarioConfig;

pub const C_LIGHT: f64 = 299_792_458.0;

/// Relative agreement with a tiny absolute floor for exact zeros.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-300
}

pub fn sub_bandwidth(c: &ScenarioConfig) -> f64 {
    c.bandwidth_hz / c.subchannels as f64
}

pub fn sub_noise(c: &ScenarioConfig) -> f64 {
    10f64.powf((c.noise_dbm_per_hz - 30.0) / 10.0) * sub_bandwidth(c)
}

/// Layer of a component index: 0 vBS, 1 vUAV, 2 vLEO (components ordered
/// vBSs, vUAVs, satellite).
pub fn layer(c: &ScenarioConfig, comp: usize) -> usize {
    let m = c.vbs_coords.len();
    if comp < m {
        0
    } else if comp < m + c.num_uavs {
        1
    } else {
        2
    }
}

/// Interference at user `k` of the class on `(comp, n)`: every other cell of
/// the same terrestrial or aerial layer transmitting to any user of the same
/// class on subchannel `n`.
pub fn oracle_interference(
    c: &ScenarioConfig,
    alloc: &SliceAllocation,
    gains: &ndarray::Array3<f64>,
    k: usize,
    comp: usize,
    n: usize,
) -> f64 {
    let l = layer(c, comp);
    if l == 2 {
        return 0.0;
    }
    let comps = alloc.phi.ncols();
    let mut total = 0.0;
    for j in 0..comps {
        if j == comp || layer(c, j) != l {
            continue;
        }
        for other in 0..alloc.phi.nrows() {
            total += alloc.phi[[other, j]] * alloc.xi[[other, n]] * alloc.power[[other, j, n]] * gains[[k, j, n]];
        }
    }
    total
}

/// (rate, sinr) of every user of one class.
pub fn oracle_user_stats(
    c: &ScenarioConfig,
    alloc: &SliceAllocation,
    gains: &ndarray::Array3<f64>,
) -> Vec<(f64, f64)> {
    let w = sub_bandwidth(c);
    let noise = sub_noise(c);
    (0..alloc.phi.nrows())
        .map(|k| {
            let (mut ground, mut sat, mut sinr) = (0.0, 0.0, 0.0);
            for comp in 0..alloc.phi.ncols() {
                for n in 0..alloc.xi.ncols() {
                    let ind = alloc.phi[[k, comp]] * alloc.xi[[k, n]];
                    if ind == 0.0 {
                        continue;
                    }
                    let i = oracle_interference(c, alloc, gains, k, comp, n);
                    let x = alloc.power[[k, comp, n]] * gains[[k, comp, n]] / (i + noise);
                    let r = ind * w * (1.0 + x).log2();
                    sinr += ind * x;
                    if layer(c, comp) == 2 {
                        sat += r;
                    } else {
                        ground += r;
                    }
                }
            }
            (ground + sat.min(c.leo_rate_cap_bps), sinr)
        })
        .collect()
}

pub fn oracle_distance(c: &ScenarioConfig, state: &TopologyState, s: usize, k: usize, comp: usize) -> f64 {
    let [x, y] = state.users[s][k];
    let m = c.vbs_coords.len();
    match layer(c, comp) {
        0 => ((c.vbs_coords[comp][0] - x).powi(2) + (c.vbs_coords[comp][1] - y).powi(2)).sqrt(),
        1 => {
            let u = state.uav_xyz[comp - m];
            ((u[0] - x).powi(2) + (u[1] - y).powi(2) + u[2].powi(2)).sqrt()
        }
        _ => c.leo_altitude_m,
    }
}

/// Mean class-2 delay with the unstable/unserved penalty of ten thresholds.
pub fn oracle_delay(c: &ScenarioConfig, alloc: &SliceAllocation, gains: &ndarray::Array3<f64>, state: &TopologyState) -> f64 {
    let k2 = alloc.phi.nrows();
    if k2 == 0 {
        return 0.0;
    }
    let lambda = c.lambda2_bps / k2 as f64;
    let stats = oracle_user_stats(c, alloc, gains);
    let mut total = 0.0;
    for k in 0..k2 {
        let comp = (0..alloc.phi.ncols()).find(|&j| alloc.phi[[k, j]] == 1.0);
        let served = comp.is_some() && alloc.xi.row(k).iter().any(|&v| v == 1.0);
        let r = stats[k].0;
        total += match comp {
            Some(j) if served && r > lambda => {
                let a = state.arrivals[1][k];
                oracle_distance(c, state, 1, k, j) / C_LIGHT + a / r + lambda * a / (2.0 * (r * r - lambda * r))
            }
            _ => 10.0 * c.delay_threshold_s,
        };
    }
    total / k2 as f64
}

/// Power drawn from each component by one class.
pub fn oracle_power(alloc: &SliceAllocation) -> Vec<f64> {
    (0..alloc.phi.ncols())
        .map(|comp| {
            let mut p = 0.0;
            for k in 0..alloc.phi.nrows() {
                for n in 0..alloc.xi.ncols() {
                    p += alloc.phi[[k, comp]] * alloc.xi[[k, n]] * alloc.power[[k, comp, n]];
                }
            }
            p
        })
        .collect()
}

/// A random world, channel draw and single-association allocation. Slots
/// may collide, which the evaluation formulas must handle.
pub struct Instance {
    pub config: ScenarioConfig,
    pub state: TopologyState,
    pub realization: ChannelRealization,
    pub decision: AllocationDecision,
}

pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let k = [rng.random_range(0..=6), rng.random_range(0..=6), rng.random_range(0..=6)];
    let mut config = ScenarioConfig::with_users(k);
    config.num_uavs = rng.random_range(1..=4);
    let mut state = init_topology(&config, rng.random()).expect("valid config");
    for u in state.uav_xyz.iter_mut() {
        u[0] = rng.random::<f64>() * config.area_side_m;
        u[1] = rng.random::<f64>() * config.area_side_m;
    }
    let packets = Exp::new(1.0 / config.packet_bits).expect("positive rate");
    state.arrivals = std::array::from_fn(|s| (0..k[s]).map(|_| packets.sample(rng).round()).collect());
    let realization = ChannelRealization::sample(&state, &config, &mut RandomFading(rng)).expect("finite");
    let comps = config.vbs_coords.len() + config.num_uavs + 1;
    let mut decision = AllocationDecision::idle(&config, state.uav_xy());
    for s in 0..3 {
        let alloc = &mut decision.slices[s];
        for user in 0..k[s] {
            if rng.random::<f64>() < 0.85 {
                let comp = rng.random_range(0..comps);
                let n = rng.random_range(0..config.subchannels);
                let budget = [10.0, 100.0, 1000.0][layer(&config, comp)];
                alloc.assign(user, comp, n, rng.random::<f64>() * budget);
            }
        }
    }
    Instance { config, state, realization, decision }
}

/// Result of a finite-difference gradient check.
pub struct GradCheck {
    /// Largest elementwise relative error over the smooth entries.
    pub worst: f64,
    pub checked: usize,
    /// Entries whose perturbation flipped a ReLU, where the central
    /// difference straddles a kink and says nothing about the derivative.
    pub kinks: usize,
}

/// Central finite-difference check of `Mlp::backward` on the loss
/// `sum(weights * output)` over a random batch. Gradients below `1e-9` in
/// both estimates are compared absolutely.
pub fn gradient_check(net: &mut Mlp, batch: usize, rng: &mut impl Rng) -> GradCheck {
    use ndarray::Array2;
    let inputs = Array2::from_shape_fn((batch, net.input_len()), |_| rng.random::<f64>() * 2.0 - 1.0);
    let w = Array2::from_shape_fn((batch, net.output_len()), |_| rng.random::<f64>() * 2.0 - 1.0);
    let eval = |m: &Mlp| -> (f64, Vec<bool>) {
        let cache = m.forward_batch(inputs.view()).expect("shape");
        let acts = &cache.activations;
        let pattern = acts[1..acts.len() - 1].iter().flat_map(|a| a.iter().map(|&v| v > 0.0)).collect();
        ((cache.output() * &w).sum(), pattern)
    };
    let cache = net.forward_batch(inputs.view()).expect("shape");
    let (grads, _) = net.backward(&cache, w.view()).expect("shape");
    // Large enough that rounding noise stays below 1e-6 on gradients near 1e-7.
    let h = 1e-4;
    let mut out = GradCheck { worst: 0.0, checked: 0, kinks: 0 };
    let mut probe = |net: &mut Mlp, get: &dyn Fn(&mut Mlp) -> &mut f64, analytic: f64| {
        let orig = *get(net);
        *get(net) = orig + h;
        let (up, up_pattern) = eval(net);
        *get(net) = orig - h;
        let (down, down_pattern) = eval(net);
        *get(net) = orig;
        if up_pattern != down_pattern {
            out.kinks += 1;
            return;
        }
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic.abs().max(numeric.abs());
        let err = if scale < 1e-9 { (analytic - numeric).abs() } else { (analytic - numeric).abs() / scale };
        out.worst = out.worst.max(err);
        out.checked += 1;
    };
    for l in 0..net.weights.len() {
        let (rows, cols) = net.weights[l].dim();
        for i in 0..rows {
            for j in 0..cols {
                probe(net, &|m: &mut Mlp| &mut m.weights[l][[i, j]], grads.weights[l][[i, j]]);
            }
        }
        for j in 0..net.biases[l].len() {
            probe(net, &|m: &mut Mlp| &mut m.biases[l][j], grads.biases[l][j]);
        }
    }
    out
}

/// Mean queueing wait of an M/D/1 queue by the Lindley recursion: Poisson
/// packet arrivals at `lambda_bps / packet_bits` per second, deterministic
/// service `packet_bits / rate_bps`.
pub fn simulate_md1_wait(lambda_bps: f64, rate_bps: f64, packet_bits: f64, arrivals: usize, rng: &mut impl Rng) -> f64 {
    let gap = Exp::new(lambda_bps / packet_bits).expect("positive rate");
    let service = packet_bits / rate_bps;
    let mut wait: f64 = 0.0;
    let mut total = 0.0;
    for _ in 0..arrivals {
        total += wait;
        wait = (wait + service - gap.sample(rng)).max(0.0);
    }
    total / arrivals as f64
}

/// `a` dominates `b` when maximizing every coordinate.
pub fn brute_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y)
}

pub fn brute_front(points: &[[f64; 3]]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|q| brute_dominates(q, &points[i])))
        .collect()
}

/// Rank voting by sorting: position of each entry in a stable ascending sort,
/// summed over objectives.
pub fn sorted_rank_votes(window: &[[f64; 3]]) -> Vec<usize> {
    let mut votes = vec![0; window.len()];
    for s in 0..3 {
        let mut order: Vec<usize> = (0..window.len()).collect();
        order.sort_by(|&a, &b| window[a][s].partial_cmp(&window[b][s]).expect("finite"));
        for (rank, &i) in order.iter().enumerate() {
            votes[i] += rank + 1;
        }
    }
    votes
}

/// Compare every evaluation formula of the library against the oracles on
/// one instance; `Err` names the first mismatch.
pub fn check_instance(inst: &Instance, rel: f64) -> Result<(), String> {
    use sagin_core::channel::{class_link_stats, interference, transmit_power, Components};
    use sagin_core::slices::{power_consumption, SliceMetrics};
    let c = &inst.config;
    let comps = Components::of(c);
    for s in 0..3 {
        let alloc = &inst.decision.slices[s];
        let gains = &inst.realization.classes[s];
        let tx = transmit_power(alloc);
        for k in 0..alloc.phi.nrows() {
            for comp in 0..comps.count() {
                for n in 0..c.subchannels {
                    let got = interference(k, comp, n, tx.view(), gains, comps);
                    let want = oracle_interference(c, alloc, gains, k, comp, n);
                    if !close(got, want, rel) {
                        return Err(format!("interference s={s} k={k} c={comp} n={n}: {got} vs {want}"));
                    }
                }
            }
        }
        let stats = class_link_stats(alloc, gains, c);
        for (k, (st, (rate, sinr))) in stats.iter().zip(oracle_user_stats(c, alloc, gains)).enumerate() {
            if !close(st.rate_bps, rate, rel) {
                return Err(format!("rate s={s} k={k}: {} vs {rate}", st.rate_bps));
            }
            if !close(st.sinr, sinr, rel) {
                return Err(format!("sinr s={s} k={k}: {} vs {sinr}", st.sinr));
            }
        }
        let power = &power_consumption(&inst.decision)[s];
        for (comp, (a, b)) in power.iter().zip(oracle_power(alloc)).enumerate() {
            if !close(*a, b, rel) {
                return Err(format!("power s={s} c={comp}: {a} vs {b}"));
            }
        }
    }
    let m = SliceMetrics::evaluate(&inst.decision, &inst.realization, &inst.state, c).map_err(|e| e.to_string())?;
    let thr: f64 = oracle_user_stats(c, &inst.decision.slices[0], &inst.realization.classes[0]).iter().map(|x| x.0).sum();
    if !close(m.throughput_bps, thr, rel) {
        return Err(format!("throughput {} vs {thr}", m.throughput_bps));
    }
    let delay = oracle_delay(c, &inst.decision.slices[1], &inst.realization.classes[1], &inst.state);
    if !close(m.avg_delay_s, delay, rel) {
        return Err(format!("delay {} vs {delay}", m.avg_delay_s));
    }
    let k3 = inst.decision.slices[2].phi.nrows();
    let sinr = if k3 == 0 {
        0.0
    } else {
        oracle_user_stats(c, &inst.decision.slices[2], &inst.realization.classes[2]).iter().map(|x| x.1).sum::<f64>()
            / k3 as f64
    };
    if !close(m.avg_sinr_linear, sinr, rel) {
        return Err(format!("average sinr {} vs {sinr}", m.avg_sinr_linear));
    }
    Ok(())
}

/// Gain functions against their closed forms at one random distance and
/// fading draw.
pub fn check_gains(rng: &mut impl Rng, rel: f64) -> Result<(), String> {
    use sagin_core::channel::{leo_gain, terrestrial_gain, uav_gain, FixedFading};
    let c = ScenarioConfig::default();
    let d = 1.0 + rng.random::<f64>() * 5000.0;
    let h = rng.random::<f64>() * 3.0;
    let (re, im) = (rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
    let mut f = FixedFading { rayleigh: h, scatter: (re, im) };
    let a = c.path_loss_exponent;
    let want = h * d.powf(-a);
    let got = terrestrial_gain(d, &c, &mut f).map_err(|e| e.to_string())?;
    if !close(got, want, rel) {
        return Err(format!("ground gain {got} vs {want}"));
    }
    let r = c.rician_factor;
    let mag = ((r / (r + 1.0) + re / (r + 1.0)).powi(2) + (im / (r + 1.0)).powi(2)).sqrt();
    let want = 1e-3 * d.powf(-a) * mag;
    let got = uav_gain(d, &c, &mut f).map_err(|e| e.to_string())?;
    if !close(got, want, rel) {
        return Err(format!("air gain {got} vs {want}"));
    }
    let lambda = C_LIGHT / c.carrier_hz;
    let want = (lambda / (4.0 * std::f64::consts::PI)).powi(2) * d.powf(-a);
    let got = leo_gain(d, &c).map_err(|e| e.to_string())?;
    if !close(got, want, rel) {
        return Err(format!("satellite gain {got} vs {want}"));
    }
    Ok(())
}

/// A decoded random action pushed through the repair; `Err` lists the
/// violations left.
pub fn repaired_random_action(rng: &mut impl Rng) -> Result<(), String> {
    use sagin_core::orchestrator::{decode_central_action, decode_distributed_action, dual_resource_allocation, RepairMode};
    use sagin_core::slices::check_constraints;
    let k = [rng.random_range(0..=17), rng.random_range(0..=17), rng.random_range(0..=17)];
    let mut config = ScenarioConfig::with_users(k);
    config.num_uavs = rng.random_range(1..=5);
    let extreme = rng.random::<f64>() < 0.2;
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| if extreme { [0.0, 1.0, 0.5][rng.random_range(0..3)] } else { rng.random() })
            .collect()
    };
    let central = decode_central_action(&draw(12 + 2 * config.num_uavs), &config);
    let slices = std::array::from_fn(|s| decode_distributed_action(&draw(3 * k[s]), s, &central, &config));
    let decision = AllocationDecision { slices, eta: central.eta, rho: central.rho, uav_xy: central.uav_xy.clone() };
    let mode = if rng.random::<bool>() { RepairMode::Dual } else { RepairMode::Single };
    let (repaired, _) = dual_resource_allocation(&decision, &config, mode);
    let v = check_constraints(&repaired, &config);
    if v.is_empty() {
        Ok(())
    } else {
        Err(format!("k={k:?} mode={mode:?}: {v:?}"))
    }
}

/// Random reward window of continuous values; the max-vote entry must not be
/// dominated by any other entry.
pub fn argmax_vote_is_nondominated(rng: &mut impl Rng) -> Result<(), String> {
    use sagin_core::analysis::{rank_vote, rank_vote_argmax};
    let n = rng.random_range(1..=200);
    let window: Vec<[f64; 3]> = (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let best = rank_vote_argmax(&window).ok_or("empty window")?;
    let votes = sorted_rank_votes(&window);
    for (i, v) in votes.iter().enumerate() {
        if rank_vote(&window, i) != *v {
            return Err(format!("vote of entry {i}: {} vs sorted {v}", rank_vote(&window, i)));
        }
    }
    if votes[best] != *votes.iter().max().expect("nonempty") {
        return Err(format!("argmax {best} does not carry the largest vote"));
    }
    if let Some(j) = (0..n).find(|&j| brute_dominates(&window[j], &window[best])) {
        return Err(format!("entry {j} dominates the argmax {best} in a window of {n}"));
    }
    Ok(())
}
