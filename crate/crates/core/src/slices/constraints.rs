//! Feasibility checks for a discretized allocation decision.

use serde::{Deserialize, Serialize};

use super::AllocationDecision;
use crate::channel::{Components, Layer};
use crate::topology::ScenarioConfig;

/// Slack allowed on budget and sum-to-one checks.
pub const TOLERANCE: f64 = 1e-9;

/// One violated constraint with the offending indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Violation {
    /// More than one user of a class on the same (component, subchannel).
    SharedSubchannel { class: usize, component: usize, subchannel: usize },
    /// A user holds more than one subchannel.
    MultipleSubchannels { class: usize, user: usize },
    /// A user is associated with more than one component.
    MultipleComponents { class: usize, user: usize },
    /// An eta or rho share outside (0, 1).
    ShareRange { class: usize, layer: usize },
    /// Negative or non-finite power.
    NegativePower { class: usize, user: usize, component: usize, subchannel: usize },
    /// An indicator that is neither 0 nor 1.
    NonBinary { class: usize, user: usize },
    /// Component power above its class budget rho * P.
    PowerBudget { class: usize, component: usize },
    /// Component subchannel count above its class budget eta * N.
    SubchannelBudget { class: usize, component: usize },
    /// Two vUAVs closer than the minimum spacing.
    UavSpacing { a: usize, b: usize },
    /// Power shares of a layer do not sum to one.
    PowerShareSum { layer: usize },
    /// Subchannel shares of a layer do not sum to one.
    SubchannelShareSum { layer: usize },
}

impl Violation {
    /// Constraint label C1..C11.
    pub fn label(&self) -> &'static str {
        match self {
            Violation::SharedSubchannel { .. } => "C1",
            Violation::MultipleSubchannels { .. } => "C2",
            Violation::MultipleComponents { .. } => "C3",
            Violation::ShareRange { .. } => "C4",
            Violation::NegativePower { .. } => "C5",
            Violation::NonBinary { .. } => "C6",
            Violation::PowerBudget { .. } => "C7",
            Violation::SubchannelBudget { .. } => "C8",
            Violation::UavSpacing { .. } => "C9",
            Violation::PowerShareSum { .. } => "C10",
            Violation::SubchannelShareSum { .. } => "C11",
        }
    }
}

/// Every violated constraint of `decision`, in a deterministic order.
pub fn check_constraints(decision: &AllocationDecision, config: &ScenarioConfig) -> Vec<Violation> {
    let comps = Components::of(config);
    let mut out = Vec::new();

    for (s, alloc) in decision.slices.iter().enumerate() {
        let (k_s, c_n) = alloc.phi.dim();
        let n = alloc.xi.ncols();
        for c in 0..c_n {
            for j in 0..n {
                let load: f64 = (0..k_s).map(|k| alloc.phi[[k, c]] * alloc.xi[[k, j]]).sum();
                if load > 1.0 + TOLERANCE {
                    out.push(Violation::SharedSubchannel { class: s, component: c, subchannel: j });
                }
            }
        }
        for k in 0..k_s {
            if alloc.xi.row(k).sum() > 1.0 + TOLERANCE {
                out.push(Violation::MultipleSubchannels { class: s, user: k });
            }
            if alloc.phi.row(k).sum() > 1.0 + TOLERANCE {
                out.push(Violation::MultipleComponents { class: s, user: k });
            }
        }
        for k in 0..k_s {
            for c in 0..c_n {
                for j in 0..n {
                    let p = alloc.power[[k, c, j]];
                    if !(p >= 0.0 && p.is_finite()) {
                        out.push(Violation::NegativePower {
                            class: s,
                            user: k,
                            component: c,
                            subchannel: j,
                        });
                    }
                }
            }
        }
        for k in 0..k_s {
            let binary = |v: &f64| *v == 0.0 || *v == 1.0;
            if !alloc.xi.row(k).iter().all(binary) || !alloc.phi.row(k).iter().all(binary) {
                out.push(Violation::NonBinary { class: s, user: k });
            }
        }
        for c in 0..c_n {
            let mut used_power = 0.0;
            let mut used_subchannels = 0.0;
            for k in 0..k_s {
                for j in 0..n {
                    let w = alloc.phi[[k, c]] * alloc.xi[[k, j]];
                    used_power += w * alloc.power[[k, c, j]];
                    used_subchannels += w;
                }
            }
            let layer = comps.layer(c).index();
            let p_budget = decision.rho[s][layer] * comps.budget_w(c, config);
            if used_power > p_budget * (1.0 + TOLERANCE) + TOLERANCE {
                out.push(Violation::PowerBudget { class: s, component: c });
            }
            let n_budget = decision.eta[s][layer] * config.subchannels as f64;
            if used_subchannels > n_budget + TOLERANCE {
                out.push(Violation::SubchannelBudget { class: s, component: c });
            }
        }
    }

    for s in 0..3 {
        for layer in Layer::ALL {
            let l = layer.index();
            let ok = |v: f64| v > 0.0 && v < 1.0;
            if !ok(decision.eta[s][l]) || !ok(decision.rho[s][l]) {
                out.push(Violation::ShareRange { class: s, layer: l });
            }
        }
    }

    let uav = &decision.uav_xy;
    let d_min = config.uav_min_spacing_m;
    for a in 0..uav.len() {
        for b in a + 1..uav.len() {
            let d2 = (uav[a][0] - uav[b][0]).powi(2) + (uav[a][1] - uav[b][1]).powi(2);
            if d2 < d_min * d_min * (1.0 - TOLERANCE) {
                out.push(Violation::UavSpacing { a, b });
            }
        }
    }

    for layer in Layer::ALL {
        let l = layer.index();
        let rho: f64 = (0..3).map(|s| decision.rho[s][l]).sum();
        if (rho - 1.0).abs() > TOLERANCE {
            out.push(Violation::PowerShareSum { layer: l });
        }
        let eta: f64 = (0..3).map(|s| decision.eta[s][l]).sum();
        if (eta - 1.0).abs() > TOLERANCE {
            out.push(Violation::SubchannelShareSum { layer: l });
        }
    }

    out.sort();
    out
}
