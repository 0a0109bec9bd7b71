//! Scenario and training constants, loadable from a flat `key = value` file.
//!
//! Physical quantities are stored in the units they are usually quoted in
//! (dBW, dBm/Hz, dB) and converted through accessors, so a rendered config
//! parses back to bit-identical values.
//!
//! Recognised keys and defaults:
//!
//! ```text
//! area_side_m          = 3000        # square service area side
//! vbs_coords           = 1000,1000; 2000,2000
//! num_uavs             = 3
//! k1, k2, k3           = 11          # users per slice class
//! subchannels          = 7
//! bandwidth_hz         = 30e6        # per layer
//! vbs_power_dbw        = 10
//! uav_power_dbw        = 20
//! leo_power_dbw        = 30
//! noise_dbm_per_hz     = -130
//! carrier_hz           = 5e9
//! path_loss_exponent   = 1.5
//! rician_factor        = 6
//! uav_ref_gain_db      = -30         # gain at 1 m
//! uav_altitude_m       = 100
//! leo_altitude_m       = 200000
//! uav_min_spacing_m    = 100
//! slot_s               = 0.1
//! delay_threshold_s    = 0.2
//! lambda2_bps          = 10e3 * k2   # aggregate class-2 arrival rate
//! leo_rate_cap_bps     = 100e6
//! density_ratio        = 5           # dense : sparse user density
//! packet_bits          = 1000
//! episodes             = 20
//! timesteps            = 1000
//! seed                 = 1
//! ```
//!
//! Training keys: `gamma` (0.95), `tau` (0.001), `actor_lr` (1e-4),
//! `critic_lr` (1e-3), `hidden_width` (100), `hidden_layers` (2),
//! `central_buffer` (10000), `central_batch` (100), `distributed_buffer`
//! (2000), `distributed_batch` (50), `noise_kind` (gaussian | ou),
//! `noise_start` (0.2), `noise_end` (0.02), `share_floor` (0.05),
//! `delay_penalty_factor` (10), `repair_power_floor` (0.01),
//! `critic_scaling` (scaled | raw), `calibration_steps` (1000),
//! `pareto_episodes` (3), `arrival_scale` (4).

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    Gaussian,
    OrnsteinUhlenbeck,
}

/// How Bellman targets are scaled to fit the logistic critic output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticScaling {
    /// `y = (1 - gamma) r + gamma Q'`: a positive rescaling of the value
    /// function that keeps targets inside (0, 1) for rewards in [0, 1].
    Scaled,
    /// `y = r + gamma Q'` taken literally.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingParams {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub central_buffer: usize,
    pub central_batch: usize,
    pub distributed_buffer: usize,
    pub distributed_batch: usize,
    pub noise_kind: NoiseKind,
    pub noise_start: f64,
    pub noise_end: f64,
    /// Lower bound on every inter-slice share (eta, rho).
    pub share_floor: f64,
    /// Delay reported for an unstable class-2 queue, as a multiple of beta.
    pub delay_penalty_factor: f64,
    /// Power left on a user that loses a resource conflict, as a fraction
    /// of its per-subchannel budget share.
    pub repair_power_floor: f64,
    pub critic_scaling: CriticScaling,
    /// Random-policy evaluations used to seed the 0-1 normalizer bounds.
    pub calibration_steps: usize,
    /// Trailing episodes from which non-dominated tuples are collected.
    pub pareto_episodes: usize,
    /// Arrival observations are scaled by this multiple of the per-user mean.
    pub arrival_scale: f64,
}

impl Default for TrainingParams {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tau: 0.001,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            hidden_width: 100,
            hidden_layers: 2,
            central_buffer: 10_000,
            central_batch: 100,
            distributed_buffer: 2000,
            distributed_batch: 50,
            noise_kind: NoiseKind::Gaussian,
            noise_start: 0.2,
            noise_end: 0.02,
            share_floor: 0.05,
            delay_penalty_factor: 10.0,
            repair_power_floor: 0.01,
            critic_scaling: CriticScaling::Scaled,
            calibration_steps: 1000,
            pareto_episodes: 3,
            arrival_scale: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub area_side_m: f64,
    pub vbs_coords: Vec<[f64; 2]>,
    pub num_uavs: usize,
    pub users_per_class: [usize; 3],
    pub subchannels: usize,
    pub bandwidth_hz: f64,
    pub vbs_power_dbw: f64,
    pub uav_power_dbw: f64,
    pub leo_power_dbw: f64,
    pub noise_dbm_per_hz: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,
    pub rician_factor: f64,
    pub uav_ref_gain_db: f64,
    pub uav_altitude_m: f64,
    pub leo_altitude_m: f64,
    pub uav_min_spacing_m: f64,
    pub slot_s: f64,
    pub delay_threshold_s: f64,
    pub lambda2_bps: f64,
    pub leo_rate_cap_bps: f64,
    pub density_ratio: f64,
    pub packet_bits: f64,
    pub episodes: usize,
    pub timesteps: usize,
    pub seed: u64,
    pub training: TrainingParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::with_users([11, 11, 11])
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ScenarioConfig {
    /// Defaults with the given per-class user counts; `lambda2_bps` follows
    /// the 10 kbps-per-class-2-user rule.
    pub fn with_users(users_per_class: [usize; 3]) -> Self {
        Self {
            area_side_m: 3000.0,
            vbs_coords: vec![[1000.0, 1000.0], [2000.0, 2000.0]],
            num_uavs: 3,
            users_per_class,
            subchannels: 7,
            bandwidth_hz: 30e6,
            vbs_power_dbw: 10.0,
            uav_power_dbw: 20.0,
            leo_power_dbw: 30.0,
            noise_dbm_per_hz: -130.0,
            carrier_hz: 5e9,
            path_loss_exponent: 1.5,
            rician_factor: 6.0,
            uav_ref_gain_db: -30.0,
            uav_altitude_m: 100.0,
            leo_altitude_m: 200_000.0,
            uav_min_spacing_m: 100.0,
            slot_s: 0.1,
            delay_threshold_s: 0.2,
            lambda2_bps: 10e3 * users_per_class[1] as f64,
            leo_rate_cap_bps: 100e6,
            density_ratio: 5.0,
            packet_bits: 1000.0,
            episodes: 20,
            timesteps: 1000,
            seed: 1,
            training: TrainingParams::default(),
        }
    }

    pub fn num_vbs(&self) -> usize {
        self.vbs_coords.len()
    }

    /// Number of serving components: vBSs, vUAVs and the single vLEO.
    pub fn num_components(&self) -> usize {
        self.num_vbs() + self.num_uavs + 1
    }

    pub fn total_users(&self) -> usize {
        self.users_per_class.iter().sum()
    }

    pub fn vbs_power_w(&self) -> f64 {
        db_to_linear(self.vbs_power_dbw)
    }

    pub fn uav_power_w(&self) -> f64 {
        db_to_linear(self.uav_power_dbw)
    }

    pub fn leo_power_w(&self) -> f64 {
        db_to_linear(self.leo_power_dbw)
    }

    /// Noise power spectral density in W/Hz.
    pub fn noise_psd(&self) -> f64 {
        db_to_linear(self.noise_dbm_per_hz - 30.0)
    }

    pub fn uav_ref_gain(&self) -> f64 {
        db_to_linear(self.uav_ref_gain_db)
    }

    pub fn subchannel_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.subchannels as f64
    }

    /// Thermal noise over one subchannel, (B/N)·N0.
    pub fn subchannel_noise_w(&self) -> f64 {
        self.subchannel_bandwidth() * self.noise_psd()
    }

    /// Per-user class-2 arrival rate in bit/s (aggregate split evenly).
    pub fn per_user_arrival_bps(&self) -> f64 {
        self.lambda2_bps / self.users_per_class[1].max(1) as f64
    }

    /// Mean per-user arrival per time slot in bits.
    pub fn per_user_arrival_bits(&self) -> f64 {
        self.per_user_arrival_bps() * self.slot_s
    }

    pub fn delay_penalty_s(&self) -> f64 {
        self.training.delay_penalty_factor * self.delay_threshold_s
    }

    /// Side of the dense (urban) square anchored at the origin.
    pub fn dense_zone_side(&self) -> f64 {
        self.area_side_m / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SimError::config(field, format!("must be positive and finite, got {v}")))
            }
        }
        fn finite(field: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(SimError::config(field, "must be finite"))
            }
        }
        fn at_least_one(field: &str, v: usize) -> Result<()> {
            if v >= 1 {
                Ok(())
            } else {
                Err(SimError::config(field, "must be at least 1"))
            }
        }

        positive("area_side_m", self.area_side_m)?;
        if self.vbs_coords.is_empty() {
            return Err(SimError::config("vbs_coords", "at least one vBS is required"));
        }
        for (i, c) in self.vbs_coords.iter().enumerate() {
            let inside = c.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= self.area_side_m);
            if !inside {
                return Err(SimError::config(
                    "vbs_coords",
                    format!("vBS {i} at ({}, {}) lies outside the area", c[0], c[1]),
                ));
            }
        }
        at_least_one("num_uavs", self.num_uavs)?;
        at_least_one("subchannels", self.subchannels)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        finite("vbs_power_dbw", self.vbs_power_dbw)?;
        finite("uav_power_dbw", self.uav_power_dbw)?;
        finite("leo_power_dbw", self.leo_power_dbw)?;
        finite("noise_dbm_per_hz", self.noise_dbm_per_hz)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("path_loss_exponent", self.path_loss_exponent)?;
        if !(self.rician_factor.is_finite() && self.rician_factor >= 0.0) {
            return Err(SimError::config("rician_factor", "must be non-negative"));
        }
        finite("uav_ref_gain_db", self.uav_ref_gain_db)?;
        positive("uav_altitude_m", self.uav_altitude_m)?;
        positive("leo_altitude_m", self.leo_altitude_m)?;
        positive("uav_min_spacing_m", self.uav_min_spacing_m)?;
        positive("slot_s", self.slot_s)?;
        positive("delay_threshold_s", self.delay_threshold_s)?;
        // The 10 kbps-per-user default is zero when class 2 has no users.
        if self.users_per_class[1] > 0 || self.lambda2_bps != 0.0 {
            positive("lambda2_bps", self.lambda2_bps)?;
        }
        positive("leo_rate_cap_bps", self.leo_rate_cap_bps)?;
        positive("density_ratio", self.density_ratio)?;
        positive("packet_bits", self.packet_bits)?;
        at_least_one("episodes", self.episodes)?;
        at_least_one("timesteps", self.timesteps)?;

        // Every vUAV must fit on the area with the required spacing.
        let per_row = (self.area_side_m / self.uav_min_spacing_m).floor() as usize + 1;
        if per_row * per_row < self.num_uavs {
            return Err(SimError::config(
                "uav_min_spacing_m",
                "too large to place every vUAV inside the area",
            ));
        }

        let t = &self.training;
        if !(t.gamma >= 0.0 && t.gamma < 1.0) {
            return Err(SimError::config("gamma", "must lie in [0, 1)"));
        }
        if !(t.tau > 0.0 && t.tau <= 1.0) {
            return Err(SimError::config("tau", "must lie in (0, 1]"));
        }
        positive("actor_lr", t.actor_lr)?;
        positive("critic_lr", t.critic_lr)?;
        at_least_one("hidden_width", t.hidden_width)?;
        at_least_one("central_buffer", t.central_buffer)?;
        at_least_one("central_batch", t.central_batch)?;
        at_least_one("distributed_buffer", t.distributed_buffer)?;
        at_least_one("distributed_batch", t.distributed_batch)?;
        if t.central_batch > t.central_buffer {
            return Err(SimError::config("central_batch", "exceeds central_buffer"));
        }
        if t.distributed_batch > t.distributed_buffer {
            return Err(SimError::config("distributed_batch", "exceeds distributed_buffer"));
        }
        if !(t.noise_start >= 0.0 && t.noise_end >= 0.0) {
            return Err(SimError::config("noise_start", "noise scales must be non-negative"));
        }
        if !(t.share_floor >= 0.0 && t.share_floor * 3.0 < 1.0) {
            return Err(SimError::config("share_floor", "must lie in [0, 1/3)"));
        }
        positive("delay_penalty_factor", t.delay_penalty_factor)?;
        if !(t.repair_power_floor >= 0.0 && t.repair_power_floor <= 1.0) {
            return Err(SimError::config("repair_power_floor", "must lie in [0, 1]"));
        }
        at_least_one("pareto_episodes", t.pareto_episodes)?;
        positive("arrival_scale", t.arrival_scale)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse a `key = value` document on top of the defaults. Blank lines and
    /// `#` comments are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        let mut lambda_given = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SimError::Parse {
                line: line_no,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(SimError::Parse {
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            if key == "lambda2_bps" {
                lambda_given = true;
            }
            cfg.set(key, value)?;
        }
        if !lambda_given {
            cfg.lambda2_bps = 10e3 * cfg.users_per_class[1] as f64;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, v: &str) -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| SimError::config(key, format!("`{v}` is not a number")))
        }
        fn count(key: &str, v: &str) -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| SimError::config(key, format!("`{v}` is not a non-negative integer")))
        }
        let t = &mut self.training;
        match key {
            "area_side_m" => self.area_side_m = num(key, value)?,
            "vbs_coords" => self.vbs_coords = parse_coords(key, value)?,
            "num_uavs" => self.num_uavs = count(key, value)?,
            "k1" => self.users_per_class[0] = count(key, value)?,
            "k2" => self.users_per_class[1] = count(key, value)?,
            "k3" => self.users_per_class[2] = count(key, value)?,
            "subchannels" => self.subchannels = count(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = num(key, value)?,
            "vbs_power_dbw" => self.vbs_power_dbw = num(key, value)?,
            "uav_power_dbw" => self.uav_power_dbw = num(key, value)?,
            "leo_power_dbw" => self.leo_power_dbw = num(key, value)?,
            "noise_dbm_per_hz" => self.noise_dbm_per_hz = num(key, value)?,
            "carrier_hz" => self.carrier_hz = num(key, value)?,
            "path_loss_exponent" => self.path_loss_exponent = num(key, value)?,
            "rician_factor" => self.rician_factor = num(key, value)?,
            "uav_ref_gain_db" => self.uav_ref_gain_db = num(key, value)?,
            "uav_altitude_m" => self.uav_altitude_m = num(key, value)?,
            "leo_altitude_m" => self.leo_altitude_m = num(key, value)?,
            "uav_min_spacing_m" => self.uav_min_spacing_m = num(key, value)?,
            "slot_s" => self.slot_s = num(key, value)?,
            "delay_threshold_s" => self.delay_threshold_s = num(key, value)?,
            "lambda2_bps" => self.lambda2_bps = num(key, value)?,
            "leo_rate_cap_bps" => self.leo_rate_cap_bps = num(key, value)?,
            "density_ratio" => self.density_ratio = num(key, value)?,
            "packet_bits" => self.packet_bits = num(key, value)?,
            "episodes" => self.episodes = count(key, value)?,
            "timesteps" => self.timesteps = count(key, value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| SimError::config(key, format!("`{value}` is not a u64")))?
            }
            "gamma" => t.gamma = num(key, value)?,
            "tau" => t.tau = num(key, value)?,
            "actor_lr" => t.actor_lr = num(key, value)?,
            "critic_lr" => t.critic_lr = num(key, value)?,
            "hidden_width" => t.hidden_width = count(key, value)?,
            "hidden_layers" => t.hidden_layers = count(key, value)?,
            "central_buffer" => t.central_buffer = count(key, value)?,
            "central_batch" => t.central_batch = count(key, value)?,
            "distributed_buffer" => t.distributed_buffer = count(key, value)?,
            "distributed_batch" => t.distributed_batch = count(key, value)?,
            "noise_kind" => {
                t.noise_kind = match value {
                    "gaussian" => NoiseKind::Gaussian,
                    "ou" => NoiseKind::OrnsteinUhlenbeck,
                    other => {
                        return Err(SimError::config(key, format!("unknown noise kind `{other}`")))
                    }
                }
            }
            "noise_start" => t.noise_start = num(key, value)?,
            "noise_end" => t.noise_end = num(key, value)?,
            "share_floor" => t.share_floor = num(key, value)?,
            "delay_penalty_factor" => t.delay_penalty_factor = num(key, value)?,
            "repair_power_floor" => t.repair_power_floor = num(key, value)?,
            "critic_scaling" => {
                t.critic_scaling = match value {
                    "scaled" => CriticScaling::Scaled,
                    "raw" => CriticScaling::Raw,
                    other => {
                        return Err(SimError::config(key, format!("unknown scaling `{other}`")))
                    }
                }
            }
            "calibration_steps" => t.calibration_steps = count(key, value)?,
            "pareto_episodes" => t.pareto_episodes = count(key, value)?,
            "arrival_scale" => t.arrival_scale = num(key, value)?,
            other => return Err(SimError::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Canonical rendering; `parse(render(c)) == c` holds exactly because
    /// floats print in shortest round-trip form.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let t = &self.training;
        let coords: Vec<String> = self
            .vbs_coords
            .iter()
            .map(|c| format!("{},{}", c[0], c[1]))
            .collect();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("area_side_m", self.area_side_m.to_string());
        kv("vbs_coords", coords.join("; "));
        kv("num_uavs", self.num_uavs.to_string());
        kv("k1", self.users_per_class[0].to_string());
        kv("k2", self.users_per_class[1].to_string());
        kv("k3", self.users_per_class[2].to_string());
        kv("subchannels", self.subchannels.to_string());
        kv("bandwidth_hz", self.bandwidth_hz.to_string());
        kv("vbs_power_dbw", self.vbs_power_dbw.to_string());
        kv("uav_power_dbw", self.uav_power_dbw.to_string());
        kv("leo_power_dbw", self.leo_power_dbw.to_string());
        kv("noise_dbm_per_hz", self.noise_dbm_per_hz.to_string());
        kv("carrier_hz", self.carrier_hz.to_string());
        kv("path_loss_exponent", self.path_loss_exponent.to_string());
        kv("rician_factor", self.rician_factor.to_string());
        kv("uav_ref_gain_db", self.uav_ref_gain_db.to_string());
        kv("uav_altitude_m", self.uav_altitude_m.to_string());
        kv("leo_altitude_m", self.leo_altitude_m.to_string());
        kv("uav_min_spacing_m", self.uav_min_spacing_m.to_string());
        kv("slot_s", self.slot_s.to_string());
        kv("delay_threshold_s", self.delay_threshold_s.to_string());
        kv("lambda2_bps", self.lambda2_bps.to_string());
        kv("leo_rate_cap_bps", self.leo_rate_cap_bps.to_string());
        kv("density_ratio", self.density_ratio.to_string());
        kv("packet_bits", self.packet_bits.to_string());
        kv("episodes", self.episodes.to_string());
        kv("timesteps", self.timesteps.to_string());
        kv("seed", self.seed.to_string());
        kv("gamma", t.gamma.to_string());
        kv("tau", t.tau.to_string());
        kv("actor_lr", t.actor_lr.to_string());
        kv("critic_lr", t.critic_lr.to_string());
        kv("hidden_width", t.hidden_width.to_string());
        kv("hidden_layers", t.hidden_layers.to_string());
        kv("central_buffer", t.central_buffer.to_string());
        kv("central_batch", t.central_batch.to_string());
        kv("distributed_buffer", t.distributed_buffer.to_string());
        kv("distributed_batch", t.distributed_batch.to_string());
        kv(
            "noise_kind",
            match t.noise_kind {
                NoiseKind::Gaussian => "gaussian",
                NoiseKind::OrnsteinUhlenbeck => "ou",
            }
            .to_string(),
        );
        kv("noise_start", t.noise_start.to_string());
        kv("noise_end", t.noise_end.to_string());
        kv("share_floor", t.share_floor.to_string());
        kv("delay_penalty_factor", t.delay_penalty_factor.to_string());
        kv("repair_power_floor", t.repair_power_floor.to_string());
        kv(
            "critic_scaling",
            match t.critic_scaling {
                CriticScaling::Scaled => "scaled",
                CriticScaling::Raw => "raw",
            }
            .to_string(),
        );
        kv("calibration_steps", t.calibration_steps.to_string());
        kv("pareto_episodes", t.pareto_episodes.to_string());
        kv("arrival_scale", t.arrival_scale.to_string());
        out
    }
}

fn parse_coords(key: &str, value: &str) -> Result<Vec<[f64; 2]>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| SimError::config(key, format!("`{pair}` is not `x,y`")))?;
            let x = x.trim().parse::<f64>();
            let y = y.trim().parse::<f64>();
            match (x, y) {
                (Ok(x), Ok(y)) => Ok([x, y]),
                _ => Err(SimError::config(key, format!("`{pair}` is not numeric"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_scenario_constants() {
        let c = ScenarioConfig::default();
        assert_eq!(c.num_vbs(), 2);
        assert_eq!(c.num_uavs, 3);
        assert!((c.vbs_power_w() - 10.0).abs() < 1e-12);
        assert!((c.uav_power_w() - 100.0).abs() < 1e-12);
        assert!((c.leo_power_w() - 1000.0).abs() < 1e-9);
        assert!((c.noise_psd() - 1e-16).abs() < 1e-28);
        assert!((c.uav_ref_gain() - 1e-3).abs() < 1e-15);
        assert!((c.subchannel_bandwidth() - 30e6 / 7.0).abs() < 1e-6);
        assert_eq!(c.lambda2_bps, 110e3);
        assert!((c.per_user_arrival_bps() - 10e3).abs() < 1e-9);
        c.validate().unwrap();
    }

    #[test]
    fn render_parse_round_trip_is_exact() {
        let mut c = ScenarioConfig::with_users([9, 13, 17]);
        c.training.noise_kind = NoiseKind::OrnsteinUhlenbeck;
        c.bandwidth_hz = 29.999_999e6;
        c.seed = u64::MAX;
        let back = ScenarioConfig::parse(&c.render()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let err = ScenarioConfig::parse("k1 = 3\nwarp_drive = 9\n").unwrap_err();
        match err {
            SimError::Config { field, .. } => assert_eq!(field, "warp_drive"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_field_is_named() {
        let err = ScenarioConfig::parse("bandwidth_hz = -1").unwrap_err();
        assert!(matches!(err, SimError::Config { ref field, .. } if field == "bandwidth_hz"));
        let err = ScenarioConfig::parse("subchannels = 0").unwrap_err();
        assert!(matches!(err, SimError::Config { ref field, .. } if field == "subchannels"));
    }

    #[test]
    fn lambda_defaults_to_per_user_rule_and_comments_are_ignored() {
        let c = ScenarioConfig::parse("# comment\nk2 = 4   # trailing\n\n").unwrap();
        assert_eq!(c.lambda2_bps, 40e3);
        let c = ScenarioConfig::parse("k2 = 4\nlambda2_bps = 1e5").unwrap();
        assert_eq!(c.lambda2_bps, 1e5);
    }

    #[test]
    fn duplicate_and_malformed_lines_are_errors() {
        assert!(matches!(
            ScenarioConfig::parse("k1 = 1\nk1 = 2"),
            Err(SimError::Parse { line: 2, .. })
        ));
        assert!(matches!(ScenarioConfig::parse("k1 2"), Err(SimError::Parse { line: 1, .. })));
    }
}
