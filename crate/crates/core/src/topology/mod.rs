//! Node geometry, user placement and traffic arrivals.

pub mod config;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

pub use config::ScenarioConfig;

use crate::error::{Result, SimError};
use crate::seeds::{self, SimRng};

/// Initial vUAV positions, also the pinned positions of the fixed-vUAV
/// ablation.
pub const UAV_START_XY: [[f64; 2]; 3] = [[500.0, 500.0], [1500.0, 1500.0], [2500.0, 2500.0]];

/// World snapshot for one time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyState {
    /// User coordinates per slice class; ground level.
    pub users: [Vec<[f64; 2]>; 3],
    pub vbs_xy: Vec<[f64; 2]>,
    pub uav_xyz: Vec<[f64; 3]>,
    pub leo_xyz: [f64; 3],
    /// Per-user arrivals in bits for the current slot.
    pub arrivals: [Vec<f64>; 3],
    pub t: usize,
}

/// Distances from one user to every serving component.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDistances {
    pub vbs: Vec<f64>,
    pub uav: Vec<f64>,
    /// Slant range approximated by the satellite altitude.
    pub leo: f64,
}

/// Starting vUAV layout: the three reference points, extended along the
/// diagonal when more vUAVs are configured.
pub fn initial_uav_xy(config: &ScenarioConfig) -> Vec<[f64; 2]> {
    let v = config.num_uavs;
    if v == 3 && config.area_side_m == 3000.0 {
        return UAV_START_XY.to_vec();
    }
    (0..v)
        .map(|i| {
            let f = (i as f64 + 0.5) / v as f64;
            [f * config.area_side_m, f * config.area_side_m]
        })
        .collect()
}

/// Probability that a user lands in the dense zone.
pub fn dense_probability(config: &ScenarioConfig) -> f64 {
    let side = config.area_side_m;
    let dense_area = config.dense_zone_side().powi(2);
    let sparse_area = side * side - dense_area;
    config.density_ratio * dense_area / (config.density_ratio * dense_area + sparse_area)
}

fn sample_user(config: &ScenarioConfig, p_dense: f64, rng: &mut SimRng) -> [f64; 2] {
    let side = config.area_side_m;
    let dense = config.dense_zone_side();
    if rng.random::<f64>() < p_dense {
        [rng.random::<f64>() * dense, rng.random::<f64>() * dense]
    } else {
        loop {
            let p = [rng.random::<f64>() * side, rng.random::<f64>() * side];
            if p[0] >= dense || p[1] >= dense {
                return p;
            }
        }
    }
}

fn place_users(config: &ScenarioConfig, rng: &mut SimRng) -> [Vec<[f64; 2]>; 3] {
    let p_dense = dense_probability(config);
    let mut draw = |k: usize| (0..k).map(|_| sample_user(config, p_dense, rng)).collect();
    [
        draw(config.users_per_class[0]),
        draw(config.users_per_class[1]),
        draw(config.users_per_class[2]),
    ]
}

/// Build the initial world state. Users are drawn from the topology substream
/// of `seed`.
pub fn init_topology(config: &ScenarioConfig, seed: u64) -> Result<TopologyState> {
    config.validate()?;
    let mut rng = seeds::substream(seed, seeds::TOPOLOGY);
    let users = place_users(config, &mut rng);
    let z = config.uav_altitude_m;
    let uav_xyz = initial_uav_xy(config).into_iter().map(|[x, y]| [x, y, z]).collect();
    let centre = config.area_side_m / 2.0;
    let arrivals = config.users_per_class.map(|k| vec![0.0; k]);
    Ok(TopologyState {
        users,
        vbs_xy: config.vbs_coords.clone(),
        uav_xyz,
        leo_xyz: [centre, centre, config.leo_altitude_m],
        arrivals,
        t: 0,
    })
}

/// Redraw every user position from the two-zone mixture and advance the slot
/// counter.
pub fn step_user_positions(
    state: &TopologyState,
    config: &ScenarioConfig,
    rng: &mut SimRng,
) -> TopologyState {
    TopologyState {
        users: place_users(config, rng),
        t: state.t + 1,
        ..state.clone()
    }
}

/// Per-user arrivals for one slot. Class 2 draws a Poisson number of packets;
/// classes 1 and 3 are full-buffer constants at the same mean.
pub fn sample_arrivals(
    state: &TopologyState,
    config: &ScenarioConfig,
    rng: &mut SimRng,
) -> [Vec<f64>; 3] {
    let mean_bits = if config.users_per_class[1] == 0 {
        0.0
    } else {
        config.per_user_arrival_bits()
    };
    let mean_packets = mean_bits / config.packet_bits;
    let poisson = (mean_packets > 0.0).then(|| Poisson::new(mean_packets).expect("positive mean"));
    let class2 = (0..state.users[1].len())
        .map(|_| match &poisson {
            Some(p) => p.sample(rng) * config.packet_bits,
            None => 0.0,
        })
        .collect();
    [
        vec![mean_bits; state.users[0].len()],
        class2,
        vec![mean_bits; state.users[2].len()],
    ]
}

impl TopologyState {
    pub fn num_users(&self, s: usize) -> usize {
        self.users[s].len()
    }

    pub fn user(&self, s: usize, k: usize) -> Result<[f64; 2]> {
        let class = self.users.get(s).ok_or(SimError::IndexOutOfRange {
            what: "slice class",
            index: s,
            len: 3,
        })?;
        class.get(k).copied().ok_or(SimError::IndexOutOfRange {
            what: "user",
            index: k,
            len: class.len(),
        })
    }

    /// Euclidean distances from user `k` of class `s` to every component.
    pub fn distances(&self, s: usize, k: usize) -> Result<UserDistances> {
        let [x, y] = self.user(s, k)?;
        let vbs = self.vbs_xy.iter().map(|b| (b[0] - x).hypot(b[1] - y)).collect();
        let uav = self
            .uav_xyz
            .iter()
            .map(|u| ((u[0] - x).powi(2) + (u[1] - y).powi(2) + u[2].powi(2)).sqrt())
            .collect();
        Ok(UserDistances { vbs, uav, leo: self.leo_xyz[2] })
    }

    pub fn uav_xy(&self) -> Vec<[f64; 2]> {
        self.uav_xyz.iter().map(|u| [u[0], u[1]]).collect()
    }

    pub fn set_uav_xy(&mut self, xy: &[[f64; 2]]) {
        for (u, p) in self.uav_xyz.iter_mut().zip(xy) {
            u[0] = p[0];
            u[1] = p[1];
        }
    }
}
