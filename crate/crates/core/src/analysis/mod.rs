//! Pareto machinery, rank voting, complexity counts and metric averages.
//!
//! Every objective is maximized; delay enters as the margin `beta - delay`.

pub mod surface;

use serde::{Deserialize, Serialize};

pub use surface::{boundary_surface, Surface};

/// A point in objective space with a free-form provenance tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub values: Vec<f64>,
    pub tag: String,
}

/// `a` dominates `b`: at least as good everywhere and strictly better
/// somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices of the points not dominated by any other point. Duplicates are
/// all kept since none strictly improves on another.
pub fn nondominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // A point can only be dominated by one with a lexicographically larger
    // or equal key, so sort descending on the first objective.
    order.sort_by(|&i, &j| {
        points[j].as_ref()[0]
            .partial_cmp(&points[i].as_ref()[0])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut front: Vec<usize> = Vec::new();
    for &i in &order {
        let p = points[i].as_ref();
        if !front.iter().any(|&f| dominates(points[f].as_ref(), p)) {
            front.retain(|&f| !dominates(p, points[f].as_ref()));
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

pub fn nondominated_filter<P: AsRef<[f64]> + Clone>(points: &[P]) -> Vec<P> {
    nondominated_indices(points).into_iter().map(|i| points[i].clone()).collect()
}

/// 1-based ascending rank of `values[index]`; equal values rank earlier
/// entries lower.
pub fn asc_rank(values: &[f64], index: usize) -> usize {
    let v = values[index];
    1 + values
        .iter()
        .enumerate()
        .filter(|&(j, &x)| x < v || (x == v && j < index))
        .count()
}

/// Rank-voting score of window entry `index`: the sum over objectives of its
/// ascending rank within the window.
pub fn rank_vote<P: AsRef<[f64]>>(window: &[P], index: usize) -> usize {
    let target = window[index].as_ref();
    (0..target.len())
        .map(|s| {
            let v = target[s];
            1 + window
                .iter()
                .enumerate()
                .filter(|&(j, w)| {
                    let x = w.as_ref()[s];
                    x < v || (x == v && j < index)
                })
                .count()
        })
        .sum()
}

/// Entry with the highest rank-voting score (first on ties).
pub fn rank_vote_argmax<P: AsRef<[f64]>>(window: &[P]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for i in 0..window.len() {
        let score = rank_vote(window, i);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Multiply-accumulate count of one forward pass through a dense network.
pub fn network_cost(dims: &[usize]) -> u64 {
    dims.windows(2).map(|p| (p[0] * p[1]) as u64).sum()
}

/// Learning cost per time slot summed over every network, times `E * T`.
pub fn complexity_estimate(networks: &[Vec<usize>], episodes: u64, timesteps: u64) -> u64 {
    episodes * timesteps * networks.iter().map(|d| network_cost(d)).sum::<u64>()
}

/// Arithmetic mean of each column of a metric trace.
pub fn time_averaged_metrics(trace: &[[f64; 3]]) -> Option<[f64; 3]> {
    if trace.is_empty() {
        return None;
    }
    let n = trace.len() as f64;
    let mut out = [0.0; 3];
    for row in trace {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    Some(out.map(|v| v / n))
}
