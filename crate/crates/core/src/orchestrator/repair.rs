//! Dual resource allocation: resolve slot conflicts and budget overruns so the
//! decision reaching the environment is feasible.
//!
//! Pass one scans users in (class, index) order and detects collisions on a
//! (component, subchannel) slot; the first user keeps the slot. Pass two
//! moves each losing user to the idle slot of the class pool with the fewest
//! co-channel peers, preferring its own component and then lower indices on
//! ties, and scales its power to the new slot's budget. A user that finds no idle slot is unassociated and
//! keeps only a floor power record. In single mode pass two is skipped and
//! every loser is dropped.

use crate::channel::Components;
use crate::slices::{AllocationDecision, SliceAllocation};
use crate::topology::ScenarioConfig;

use super::decode::{repair_uav_spacing, slot_power, subchannel_pools, CentralAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    Dual,
    Single,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepairReport {
    /// Users that collided with an earlier user.
    pub conflicts: usize,
    pub reassigned: usize,
    pub dropped: usize,
    /// Components whose class power had to be scaled down.
    pub rescaled: usize,
}

fn central_of(decision: &AllocationDecision) -> CentralAction {
    CentralAction { eta: decision.eta, rho: decision.rho, uav_xy: decision.uav_xy.clone() }
}

/// Make every slice feasible. The returned decision always satisfies C1-C11
/// when the shares and vUAV layout came from the central decoder.
pub fn dual_resource_allocation(
    decision: &AllocationDecision,
    config: &ScenarioConfig,
    mode: RepairMode,
) -> (AllocationDecision, RepairReport) {
    let comps = Components::of(config);
    let central = central_of(decision);
    let pools = subchannel_pools(&decision.eta, config.subchannels);
    let mut report = RepairReport::default();
    let mut out = decision.clone();
    out.uav_xy = repair_uav_spacing(decision.uav_xy.clone(), config);

    for s in 0..3 {
        let alloc = &mut out.slices[s];
        discretize(alloc);
        let k_s = alloc.num_users();
        let mut occupied = vec![vec![false; config.subchannels]; comps.count()];
        let mut losers = Vec::new();
        for k in 0..k_s {
            let Some((c, n)) = alloc.assignment(k) else { continue };
            let pool = &pools[comps.layer(c).index()][s];
            if !pool.contains(&n) {
                // Outside the class pool: treat like a collision.
                losers.push(k);
            } else if occupied[c][n] {
                losers.push(k);
            } else {
                occupied[c][n] = true;
            }
        }
        report.conflicts += losers.len();
        for k in losers {
            let (c, n) = alloc.assignment(k).expect("losers are assigned");
            let old_pool_len = pools[comps.layer(c).index()][s].len();
            let old_share = slot_power(&central, s, c, old_pool_len.max(1), config);
            let fraction = if old_share > 0.0 {
                (alloc.power[[k, c, n]] / old_share).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let target = match mode {
                RepairMode::Single => None,
                RepairMode::Dual => std::iter::once(c)
                    .chain((0..comps.count()).filter(|&j| j != c))
                    .flat_map(|j| {
                        let pool = pools[comps.layer(j).index()][s].clone();
                        let len = pool.len();
                        pool.map(move |m| (j, m, len))
                    })
                    .filter(|&(j, m, _)| !occupied[j][m])
                    .min_by_key(|&(j, m, _)| comps.peers(j).filter(|&q| q != j && occupied[q][m]).count()),
            };
            match target {
                Some((j, m, len)) => {
                    occupied[j][m] = true;
                    let p = fraction * slot_power(&central, s, j, len, config);
                    alloc.assign(k, j, m, p);
                    report.reassigned += 1;
                }
                None => {
                    let floor = config.training.repair_power_floor * old_share;
                    alloc.clear(k);
                    alloc.power[[k, c, n]] = floor;
                    report.dropped += 1;
                }
            }
        }
        report.rescaled += enforce_power(alloc, &decision.rho[s], comps, config);
    }
    (out, report)
}

/// Snap indicators to {0, 1}, keep at most one component and subchannel per
/// user (the largest), and zero negative or non-finite powers.
fn discretize(alloc: &mut SliceAllocation) {
    fn argmax_row(row: ndarray::ArrayView1<f64>) -> Option<usize> {
        row.iter()
            .enumerate()
            .filter(|(_, v)| **v >= 0.5)
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    }
    for k in 0..alloc.num_users() {
        let c = argmax_row(alloc.phi.row(k));
        let n = argmax_row(alloc.xi.row(k));
        alloc.phi.row_mut(k).fill(0.0);
        alloc.xi.row_mut(k).fill(0.0);
        if let (Some(c), Some(n)) = (c, n) {
            alloc.phi[[k, c]] = 1.0;
            alloc.xi[[k, n]] = 1.0;
        }
    }
    alloc.power.mapv_inplace(|p| if p.is_finite() && p > 0.0 { p } else { 0.0 });
}

/// Scale a component's class powers down proportionally when they exceed
/// `rho * P`. Returns how many components were scaled.
fn enforce_power(alloc: &mut SliceAllocation, rho: &[f64; 3], comps: Components, config: &ScenarioConfig) -> usize {
    let mut scaled = 0;
    for c in 0..comps.count() {
        let budget = rho[comps.layer(c).index()] * comps.budget_w(c, config);
        let used: f64 = (0..alloc.num_users())
            .filter(|&k| alloc.phi[[k, c]] == 1.0)
            .map(|k| {
                (0..config.subchannels)
                    .map(|n| alloc.xi[[k, n]] * alloc.power[[k, c, n]])
                    .sum::<f64>()
            })
            .sum();
        if used > budget {
            let f = budget / used;
            for k in 0..alloc.num_users() {
                for n in 0..config.subchannels {
                    alloc.power[[k, c, n]] *= f;
                }
            }
            scaled += 1;
        }
    }
    scaled
}
