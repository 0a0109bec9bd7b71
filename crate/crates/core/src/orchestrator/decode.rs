//! Mapping raw actor outputs in [0, 1] to allocation decisions.
//!
//! Inter-slice shares use an odds transform: for layer `l`, classes 1 and 2
//! get weight `u / (1 - u)` from their raw entries and class 3 weight 1, and
//! `share_s = floor + (1 - 3 floor) * w_s / sum(w)`. All-0.5 raw entries give
//! equal thirds, every share stays in `[floor, 1 - 2 floor]`, and the three
//! shares sum to one exactly up to rounding.

use std::ops::Range;

use crate::channel::{Components, Layer};
use crate::slices::SliceAllocation;
use crate::topology::ScenarioConfig;

use super::layout::CENTRAL_SHARE_ENTRIES;

/// Raw entries are clipped to this distance from 0 and 1 before the odds.
const RAW_MARGIN: f64 = 1e-6;

/// Inter-slice part of a decision.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralAction {
    /// `[class][layer]` subchannel shares.
    pub eta: [[f64; 3]; 3],
    /// `[class][layer]` power shares.
    pub rho: [[f64; 3]; 3],
    pub uav_xy: Vec<[f64; 2]>,
}

fn odds(u: f64) -> f64 {
    let u = u.clamp(RAW_MARGIN, 1.0 - RAW_MARGIN);
    u / (1.0 - u)
}

/// Shares of the three classes from their weights.
pub fn shares_from_weights(weights: [f64; 3], floor: f64) -> [f64; 3] {
    let total: f64 = weights.iter().sum();
    let mut out = weights.map(|w| floor + (1.0 - 3.0 * floor) * w / total);
    // Absorb rounding so the sum is one to the last bit the format allows.
    out[2] = 1.0 - out[0] - out[1];
    out
}

/// Shares for one layer from the raw entries of classes 1 and 2.
pub fn shares_from_raw(u1: f64, u2: f64, floor: f64) -> [f64; 3] {
    shares_from_weights([odds(u1), odds(u2), 1.0], floor)
}

/// Inverse of [`shares_from_raw`] for shares strictly above the floor.
pub fn raw_from_shares(shares: [f64; 3], floor: f64) -> (f64, f64) {
    let w3 = shares[2] - floor;
    let to_raw = |s: f64| {
        let r = (s - floor) / w3;
        r / (1.0 + r)
    };
    (to_raw(shares[0]), to_raw(shares[1]))
}

/// Decode the central action: entries `0..3` are class-1 power shares per
/// layer (vBS, vUAV, vLEO), `3..6` class-2 power shares, `6..9` and `9..12`
/// the matching subchannel shares, then `(x, y)` per vUAV scaled to the area.
/// vUAV spacing is repaired before returning.
pub fn decode_central_action(raw: &[f64], config: &ScenarioConfig) -> CentralAction {
    let floor = config.training.share_floor;
    let mut eta = [[0.0; 3]; 3];
    let mut rho = [[0.0; 3]; 3];
    for l in 0..3 {
        let r = shares_from_raw(raw[l], raw[3 + l], floor);
        let e = shares_from_raw(raw[6 + l], raw[9 + l], floor);
        for s in 0..3 {
            rho[s][l] = r[s];
            eta[s][l] = e[s];
        }
    }
    let uav_xy = uav_from_raw(&raw[CENTRAL_SHARE_ENTRIES..], config);
    CentralAction { eta, rho, uav_xy: repair_uav_spacing(uav_xy, config) }
}

/// Raw central action that decodes to the given shares and positions.
pub fn encode_central_action(action: &CentralAction, config: &ScenarioConfig) -> Vec<f64> {
    let floor = config.training.share_floor;
    let mut raw = vec![0.0; CENTRAL_SHARE_ENTRIES];
    for l in 0..3 {
        let (r1, r2) = raw_from_shares([action.rho[0][l], action.rho[1][l], action.rho[2][l]], floor);
        let (e1, e2) = raw_from_shares([action.eta[0][l], action.eta[1][l], action.eta[2][l]], floor);
        raw[l] = r1;
        raw[3 + l] = r2;
        raw[6 + l] = e1;
        raw[9 + l] = e2;
    }
    for p in &action.uav_xy {
        raw.push(p[0] / config.area_side_m);
        raw.push(p[1] / config.area_side_m);
    }
    raw
}

/// Scale `(x, y)` pairs in [0, 1] to area coordinates.
pub fn uav_from_raw(raw: &[f64], config: &ScenarioConfig) -> Vec<[f64; 2]> {
    raw.chunks_exact(2)
        .take(config.num_uavs)
        .map(|p| {
            [
                p[0].clamp(0.0, 1.0) * config.area_side_m,
                p[1].clamp(0.0, 1.0) * config.area_side_m,
            ]
        })
        .collect()
}

fn spacing_ok(xy: &[[f64; 2]], d_min: f64) -> bool {
    (0..xy.len()).all(|a| {
        (a + 1..xy.len()).all(|b| (xy[a][0] - xy[b][0]).hypot(xy[a][1] - xy[b][1]) >= d_min)
    })
}

/// Push vUAVs that sit closer than the minimum spacing apart along the line
/// joining them, half the shortfall each, clamping to the area, until every
/// pair is feasible. Coincident pairs separate along a fixed per-pair
/// direction. Falls back to the reference layout if the pushes stall.
pub fn repair_uav_spacing(mut xy: Vec<[f64; 2]>, config: &ScenarioConfig) -> Vec<[f64; 2]> {
    let d_min = config.uav_min_spacing_m;
    let side = config.area_side_m;
    // Overshoot slightly so rounding never leaves a pair a hair short.
    let target = d_min * (1.0 + 1e-9) + 1e-9;
    let n = xy.len();
    for _ in 0..2000 {
        if spacing_ok(&xy, d_min) {
            return xy;
        }
        for a in 0..n {
            for b in a + 1..n {
                let dx = xy[b][0] - xy[a][0];
                let dy = xy[b][1] - xy[a][1];
                let d = dx.hypot(dy);
                if d >= target {
                    continue;
                }
                let (ux, uy) = if d > 1e-12 {
                    (dx / d, dy / d)
                } else {
                    let angle = std::f64::consts::TAU * (a * n + b) as f64 / (n * n) as f64 + 0.5;
                    (angle.cos(), angle.sin())
                };
                let half = (target - d) / 2.0;
                xy[a][0] = (xy[a][0] - ux * half).clamp(0.0, side);
                xy[a][1] = (xy[a][1] - uy * half).clamp(0.0, side);
                xy[b][0] = (xy[b][0] + ux * half).clamp(0.0, side);
                xy[b][1] = (xy[b][1] + uy * half).clamp(0.0, side);
            }
        }
    }
    if spacing_ok(&xy, d_min) {
        xy
    } else {
        crate::topology::initial_uav_xy(config)
    }
}

/// Contiguous subchannel ranges per `[layer][class]`; class `s` receives
/// `floor(eta_s N)` subchannels after the classes before it.
pub fn subchannel_pools(eta: &[[f64; 3]; 3], subchannels: usize) -> [[Range<usize>; 3]; 3] {
    std::array::from_fn(|l| {
        let mut start = 0;
        std::array::from_fn(|s| {
            let len = ((eta[s][l] * subchannels as f64 + 1e-9).floor() as usize).min(subchannels - start);
            let r = start..start + len;
            start += len;
            r
        })
    })
}

/// Per-slot power of class `s` on component `c`: the class budget split over
/// the class's pool on that layer.
pub fn slot_power(central: &CentralAction, s: usize, c: usize, pool_len: usize, config: &ScenarioConfig) -> f64 {
    let comps = Components::of(config);
    if pool_len == 0 {
        return 0.0;
    }
    central.rho[s][comps.layer(c).index()] * comps.budget_w(c, config) / pool_len as f64
}

/// Decode user triples `(u1, u2, u3)` of class `s`: `u1` picks the component
/// by uniform buckets (vBSs, vUAVs, vLEO), `u2` a subchannel inside that
/// layer's class pool, and `u3` the fraction of the per-slot power budget.
/// Users whose layer pool is empty stay unassigned.
pub fn decode_distributed_action(
    raw: &[f64],
    s: usize,
    central: &CentralAction,
    config: &ScenarioConfig,
) -> SliceAllocation {
    let comps = Components::of(config);
    let c_n = comps.count();
    let k_s = raw.len() / 3;
    let mut alloc = SliceAllocation::empty(k_s, c_n, config.subchannels);
    let pools = subchannel_pools(&central.eta, config.subchannels);
    for k in 0..k_s {
        let (u1, u2, u3) = (raw[3 * k], raw[3 * k + 1], raw[3 * k + 2]);
        let c = bucket(u1, c_n);
        let pool = &pools[comps.layer(c).index()][s];
        if pool.is_empty() {
            continue;
        }
        let n = pool.start + bucket(u2, pool.len());
        let p = u3.clamp(0.0, 1.0) * slot_power(central, s, c, pool.len(), config);
        alloc.assign(k, c, n, p);
    }
    alloc
}

fn bucket(u: f64, n: usize) -> usize {
    ((u.clamp(0.0, 1.0) * n as f64).floor() as usize).min(n - 1)
}

/// Layer of component index `c`.
pub fn layer_of(c: usize, config: &ScenarioConfig) -> Layer {
    Components::of(config).layer(c)
}
