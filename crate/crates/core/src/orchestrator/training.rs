//! Episode loop shared by the two-level scheme, its ablations and the two
//! baselines.

use std::collections::VecDeque;

use ndarray::{concatenate, Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::noise::decayed_sigma;
use crate::agent::{DdpgAgent, ExperienceTuple, ReplayBuffer, TrainBatch};
use crate::analysis::nondominated_indices;
use crate::channel::{ChannelRealization, RandomFading};
use crate::error::{Result, SimError};
use crate::seeds::{self, SimRng};
use crate::slices::{check_constraints, AllocationDecision, SliceMetrics};
use crate::topology::{
    init_topology, initial_uav_xy, sample_arrivals, step_user_positions, ScenarioConfig, TopologyState,
};

use super::decode::{
    decode_central_action, decode_distributed_action, repair_uav_spacing, shares_from_weights, uav_from_raw,
    CentralAction,
};
use super::layout::{AgentLayout, COUPLED_SHARE_ENTRIES};
use super::observe::{build_central_observation, build_coupled_observation, build_distributed_observation};
use super::repair::{dual_resource_allocation, RepairMode, RepairReport};
use super::reward::{central_reward, distributed_rewards, raw_metrics, weighted_utility, Normalizer};

/// Which learner drives the allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// Central agent for inter-slice shares and vUAV positions, three
    /// per-class agents for intra-slice allocation, rank-voting central reward.
    TwoLevel { repair: RepairMode, pinned_uavs: bool },
    /// Three coupled agents, each also voting on the inter-slice shares and
    /// vUAV positions; critics see every agent's action.
    Coupled,
    /// One agent over the whole action space maximizing a weighted utility.
    Utility { weights: [f64; 3], raw_units: bool },
}

impl Scheme {
    pub const FULL: Scheme = Scheme::TwoLevel { repair: RepairMode::Dual, pinned_uavs: false };

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::TwoLevel { repair: RepairMode::Dual, pinned_uavs: false } => "two-level",
            Scheme::TwoLevel { repair: RepairMode::Single, pinned_uavs: false } => "single-allocation",
            Scheme::TwoLevel { repair: RepairMode::Dual, pinned_uavs: true } => "fixed-uav",
            Scheme::TwoLevel { .. } => "single-allocation-fixed-uav",
            Scheme::Coupled => "maddpg",
            Scheme::Utility { .. } => "utility",
        }
    }
}

// Serde support for the repair mode inside `Scheme`.
impl Serialize for RepairMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            RepairMode::Dual => "dual",
            RepairMode::Single => "single",
        })
    }
}

impl<'de> Deserialize<'de> for RepairMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "dual" => Ok(RepairMode::Dual),
            "single" => Ok(RepairMode::Single),
            other => Err(serde::de::Error::custom(format!("unknown repair mode {other}"))),
        }
    }
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub episode: usize,
    pub t: usize,
    pub r1sum_bps: f64,
    pub d2ave_s: f64,
    pub sinr3ave_linear: f64,
    pub reward1: f64,
    pub reward2: f64,
    pub reward3: f64,
    pub central_reward: f64,
    pub repairs: usize,
}

impl MetricRow {
    pub fn rewards(&self) -> [f64; 3] {
        [self.reward1, self.reward2, self.reward3]
    }

    pub fn metrics(&self) -> [f64; 3] {
        [self.r1sum_bps, self.d2ave_s, self.sinr3ave_linear]
    }
}

/// Inter-slice part of the decision applied in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub episode: usize,
    pub t: usize,
    pub eta: [[f64; 3]; 3],
    pub rho: [[f64; 3]; 3],
    pub uav_xy: Vec<[f64; 2]>,
}

/// A remembered tuple eligible for the Pareto set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoCandidate {
    pub seq: u64,
    pub episode: usize,
    pub t: usize,
    pub rewards: [f64; 3],
    /// (throughput bps, beta - delay s, SINR linear).
    pub objective: [f64; 3],
    pub central_action: Vec<f64>,
    pub distributed_actions: [Vec<f64>; 3],
}

#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub scheme: Scheme,
    pub metrics: Vec<MetricRow>,
    pub decisions: Vec<DecisionRow>,
    pub pareto: Vec<ParetoCandidate>,
    /// File name and content of every checkpoint.
    pub checkpoints: Vec<(String, Vec<u8>)>,
    pub normalizer: Normalizer,
}

impl TrainingArtifacts {
    pub fn reward_traces(&self) -> [Vec<f64>; 3] {
        std::array::from_fn(|i| self.metrics.iter().map(|r| r.rewards()[i]).collect())
    }

    /// Time-averaged (throughput, delay, SINR) over every logged slot.
    pub fn mean_metrics(&self) -> [f64; 3] {
        let trace: Vec<[f64; 3]> = self.metrics.iter().map(MetricRow::metrics).collect();
        crate::analysis::time_averaged_metrics(&trace).unwrap_or([0.0; 3])
    }
}

/// World state plus the random streams that evolve it. Draw counts never
/// depend on the policy, so different schemes under one seed see the same
/// users, arrivals and fading.
struct Environment {
    config: ScenarioConfig,
    state: TopologyState,
    mobility: SimRng,
    arrivals: SimRng,
    fading: SimRng,
}

impl Environment {
    fn new(config: &ScenarioConfig, seed: u64, salt: &str) -> Result<Self> {
        let stream = |name: &str| seeds::substream(seed, &format!("{salt}{name}"));
        Ok(Self {
            config: config.clone(),
            state: init_topology(config, seed)?,
            mobility: stream(seeds::MOBILITY),
            arrivals: stream(seeds::ARRIVALS),
            fading: stream(seeds::FADING),
        })
    }

    fn reset_episode(&mut self) {
        self.state = step_user_positions(&self.state, &self.config, &mut self.mobility);
        self.state.t = 0;
        self.state.set_uav_xy(&initial_uav_xy(&self.config));
        self.state.arrivals = sample_arrivals(&self.state, &self.config, &mut self.arrivals);
    }

    fn evaluate(&mut self, decision: &AllocationDecision) -> Result<SliceMetrics> {
        self.state.set_uav_xy(&decision.uav_xy);
        let realization =
            ChannelRealization::sample(&self.state, &self.config, &mut RandomFading(&mut self.fading))?;
        SliceMetrics::evaluate(decision, &realization, &self.state, &self.config)
    }

    fn advance(&mut self) {
        self.state = step_user_positions(&self.state, &self.config, &mut self.mobility);
        self.state.arrivals = sample_arrivals(&self.state, &self.config, &mut self.arrivals);
    }
}

/// Joint transition of the coupled baseline.
#[derive(Debug, Clone)]
struct JointTuple {
    obs: [Vec<f64>; 3],
    actions: [Vec<f64>; 3],
    rewards: [f64; 3],
    next_obs: [Vec<f64>; 3],
}

enum Learners {
    TwoLevel { central: Box<DdpgAgent>, classes: Box<[DdpgAgent; 3]> },
    Coupled { agents: Box<[DdpgAgent; 3]>, memory: ReplayBuffer<JointTuple>, batch: usize },
    Utility { agent: Box<DdpgAgent>, utility_bounds: Normalizer },
}

/// Outcome of one slot.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub row: MetricRow,
    pub decision: AllocationDecision,
    pub report: RepairReport,
}

/// Drives `E x T` slots of one scheme.
pub struct Trainer {
    config: ScenarioConfig,
    scheme: Scheme,
    layout: AgentLayout,
    env: Environment,
    learners: Learners,
    normalizer: Normalizer,
    noise_rng: SimRng,
    sampling_rng: SimRng,
    window: VecDeque<ParetoCandidate>,
    window_rewards: VecDeque<[f64; 3]>,
    window_capacity: usize,
    seq: u64,
    step_index: usize,
}

fn uniform(len: usize, rng: &mut SimRng) -> Vec<f64> {
    (0..len).map(|_| rng.random::<f64>()).collect()
}

fn rows(data: &[&[f64]]) -> Array2<f64> {
    let width = data.first().map_or(0, |r| r.len());
    let flat: Vec<f64> = data.iter().flat_map(|r| r.iter().copied()).collect();
    Array2::from_shape_vec((data.len(), width), flat).expect("rectangular rows")
}

impl Trainer {
    pub fn new(config: &ScenarioConfig, scheme: Scheme) -> Result<Self> {
        config.validate()?;
        if let Scheme::Utility { weights, .. } = scheme {
            if !weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
                return Err(SimError::config("weights", "utility weights must be positive"));
            }
        }
        let layout = AgentLayout::of(config);
        let t = &config.training;
        let mut init = seeds::substream(config.seed, seeds::INIT);
        let learners = match scheme {
            Scheme::TwoLevel { .. } => {
                let central =
                    DdpgAgent::new(layout.central_dims(), t, t.central_buffer, t.central_batch, &mut init)?;
                let mut make = |s: usize| {
                    DdpgAgent::new(layout.distributed_dims(s), t, t.distributed_buffer, t.distributed_batch, &mut init)
                };
                let classes = [make(0)?, make(1)?, make(2)?];
                Learners::TwoLevel { central: Box::new(central), classes: Box::new(classes) }
            }
            Scheme::Coupled => {
                let mut make = |s: usize| {
                    DdpgAgent::new(layout.coupled_dims(s), t, t.distributed_buffer, t.distributed_batch, &mut init)
                };
                let agents = [make(0)?, make(1)?, make(2)?];
                Learners::Coupled {
                    agents: Box::new(agents),
                    memory: ReplayBuffer::new(t.distributed_buffer),
                    batch: t.distributed_batch,
                }
            }
            Scheme::Utility { .. } => {
                let agent = DdpgAgent::new(layout.utility_dims(), t, t.central_buffer, t.central_batch, &mut init)?;
                Learners::Utility { agent: Box::new(agent), utility_bounds: Normalizer::default() }
            }
        };
        let mut trainer = Self {
            config: config.clone(),
            scheme,
            layout,
            env: Environment::new(config, config.seed, "")?,
            learners,
            normalizer: Normalizer::default(),
            noise_rng: seeds::substream(config.seed, seeds::NOISE),
            sampling_rng: seeds::substream(config.seed, seeds::SAMPLING),
            window: VecDeque::new(),
            window_rewards: VecDeque::new(),
            window_capacity: t.central_buffer,
            seq: 0,
            step_index: 0,
        };
        trainer.calibrate()?;
        Ok(trainer)
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Seed the normalizer bounds with uniformly random decisions on a
    /// separate copy of the world.
    fn calibrate(&mut self) -> Result<()> {
        let steps = self.config.training.calibration_steps;
        if steps == 0 {
            return Ok(());
        }
        let mut env = Environment::new(&self.config, self.config.seed, "calibration/")?;
        let mut rng = seeds::substream(self.config.seed, seeds::CALIBRATION);
        env.reset_episode();
        for _ in 0..steps {
            let central = decode_central_action(&uniform(self.layout.central_act_len(), &mut rng), &self.config);
            let raws: [Vec<f64>; 3] = std::array::from_fn(|s| uniform(self.layout.distributed_act_len(s), &mut rng));
            let decision = self.assemble(&central, &raws);
            let (repaired, _) = dual_resource_allocation(&decision, &self.config, RepairMode::Dual);
            let m = env.evaluate(&repaired)?;
            self.normalizer.observe(raw_metrics(&m));
            env.advance();
        }
        Ok(())
    }

    fn assemble(&self, central: &CentralAction, raws: &[Vec<f64>; 3]) -> AllocationDecision {
        AllocationDecision {
            slices: std::array::from_fn(|s| decode_distributed_action(&raws[s], s, central, &self.config)),
            eta: central.eta,
            rho: central.rho,
            uav_xy: central.uav_xy.clone(),
        }
    }

    fn total_steps(&self) -> usize {
        self.config.episodes * self.config.timesteps
    }

    fn set_noise(&mut self) {
        let t = &self.config.training;
        let total = self.total_steps();
        let progress = if total > 1 { self.step_index as f64 / (total - 1) as f64 } else { 1.0 };
        let sigma = decayed_sigma(t.noise_start, t.noise_end, progress);
        match &mut self.learners {
            Learners::TwoLevel { central, classes } => {
                central.sigma = sigma;
                classes.iter_mut().for_each(|a| a.sigma = sigma);
            }
            Learners::Coupled { agents, .. } => agents.iter_mut().for_each(|a| a.sigma = sigma),
            Learners::Utility { agent, .. } => agent.sigma = sigma,
        }
    }

    fn reset_noise(&mut self) {
        match &mut self.learners {
            Learners::TwoLevel { central, classes } => {
                central.noise.reset();
                classes.iter_mut().for_each(|a| a.noise.reset());
            }
            Learners::Coupled { agents, .. } => agents.iter_mut().for_each(|a| a.noise.reset()),
            Learners::Utility { agent, .. } => agent.noise.reset(),
        }
    }

    /// Run every episode and collect the artifacts.
    pub fn run(mut self) -> Result<TrainingArtifacts> {
        let mut metrics = Vec::with_capacity(self.total_steps());
        let mut decisions = Vec::with_capacity(self.total_steps());
        let mut pareto: Vec<ParetoCandidate> = Vec::new();
        let collect_from = self.config.episodes.saturating_sub(self.config.training.pareto_episodes);
        for episode in 0..self.config.episodes {
            self.env.reset_episode();
            self.reset_noise();
            for t in 0..self.config.timesteps {
                let out = self
                    .step(episode, t)
                    .map_err(|e| SimError::Training { episode, t, source: Box::new(e) })?;
                decisions.push(DecisionRow {
                    episode,
                    t,
                    eta: out.decision.eta,
                    rho: out.decision.rho,
                    uav_xy: out.decision.uav_xy.clone(),
                });
                metrics.push(out.row);
            }
            if episode >= collect_from {
                self.collect_pareto(&mut pareto);
            }
        }
        let objectives: Vec<[f64; 3]> = pareto.iter().map(|c| c.objective).collect();
        let keep = nondominated_indices(&objectives);
        let pareto = keep.into_iter().map(|i| pareto[i].clone()).collect();
        Ok(TrainingArtifacts {
            scheme: self.scheme,
            metrics,
            decisions,
            pareto,
            checkpoints: self.checkpoints()?,
            normalizer: self.normalizer.clone(),
        })
    }

    /// Append the window's non-dominated tuples (by reward) not yet taken.
    fn collect_pareto(&mut self, out: &mut Vec<ParetoCandidate>) {
        let rewards: Vec<[f64; 3]> = self.window_rewards.iter().copied().collect();
        for i in nondominated_indices(&rewards) {
            let c = &self.window[i];
            if !out.iter().any(|o| o.seq == c.seq) {
                out.push(c.clone());
            }
        }
    }

    fn checkpoints(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let mut out = Vec::new();
        match &self.learners {
            Learners::TwoLevel { central, classes } => {
                out.push(("central.bin".to_string(), central.checkpoint_bytes()));
                for (s, a) in classes.iter().enumerate() {
                    out.push((format!("class{}.bin", s + 1), a.checkpoint_bytes()));
                }
            }
            Learners::Coupled { agents, .. } => {
                for (s, a) in agents.iter().enumerate() {
                    out.push((format!("coupled{}.bin", s + 1), a.checkpoint_bytes()));
                }
            }
            Learners::Utility { agent, .. } => out.push(("utility.bin".to_string(), agent.checkpoint_bytes())),
        }
        out.push(("normalizer.json".to_string(), serde_json::to_vec_pretty(&self.normalizer)?));
        Ok(out)
    }

    fn remember_candidate(&mut self, candidate: ParetoCandidate) -> usize {
        if self.window.len() == self.window_capacity {
            self.window.pop_front();
            self.window_rewards.pop_front();
        }
        self.window_rewards.push_back(candidate.rewards);
        self.window.push_back(candidate);
        central_reward(self.window_rewards.make_contiguous())
    }

    /// Execute one slot: act, decode, repair, evaluate, reward, learn.
    pub fn step(&mut self, episode: usize, t: usize) -> Result<StepOutcome> {
        self.set_noise();
        self.step_index += 1;
        let config = self.config.clone();
        let state = self.env.state.clone();

        // Act.
        let (central, raws, central_raw, obs) = match &mut self.learners {
            Learners::TwoLevel { central, classes } => {
                let obs_c = build_central_observation(&state, &config);
                let a_c = central.select_action(&obs_c, true, &mut self.noise_rng)?;
                let mut decoded = decode_central_action(&a_c, &config);
                if let Scheme::TwoLevel { pinned_uavs: true, .. } = self.scheme {
                    decoded.uav_xy = initial_uav_xy(&config);
                }
                let mut raws: [Vec<f64>; 3] = Default::default();
                let mut obs_d: [Vec<f64>; 3] = Default::default();
                for s in 0..3 {
                    obs_d[s] = build_distributed_observation(&state, s, &config);
                    raws[s] = classes[s].select_action(&obs_d[s], true, &mut self.noise_rng)?;
                }
                (decoded, raws, a_c, ActObs::TwoLevel { central: obs_c, classes: obs_d })
            }
            Learners::Coupled { agents, .. } => {
                let mut full: [Vec<f64>; 3] = Default::default();
                let mut obs: [Vec<f64>; 3] = Default::default();
                for s in 0..3 {
                    obs[s] = build_coupled_observation(&state, s, &config);
                    full[s] = agents[s].select_action(&obs[s], true, &mut self.noise_rng)?;
                }
                let decoded = combine_coupled(&full, &self.layout, &config);
                let raws = std::array::from_fn(|s| full[s][..3 * self.layout.users[s]].to_vec());
                (decoded, raws, Vec::new(), ActObs::Coupled { obs, actions: full })
            }
            Learners::Utility { agent, .. } => {
                let obs = build_central_observation(&state, &config);
                let a = agent.select_action(&obs, true, &mut self.noise_rng)?;
                let split = self.layout.central_act_len();
                let decoded = decode_central_action(&a[..split], &config);
                let mut offset = split;
                let raws = std::array::from_fn(|s| {
                    let len = self.layout.distributed_act_len(s);
                    let r = a[offset..offset + len].to_vec();
                    offset += len;
                    r
                });
                (decoded, raws, a.clone(), ActObs::Utility { obs, action: a })
            }
        };

        // Repair and evaluate.
        let decision = self.assemble(&central, &raws);
        let mode = match self.scheme {
            Scheme::TwoLevel { repair, .. } => repair,
            _ => RepairMode::Dual,
        };
        let (decision, report) = dual_resource_allocation(&decision, &config, mode);
        let violations = check_constraints(&decision, &config);
        if let Some(v) = violations.first() {
            return Err(SimError::Numerical(format!(
                "repaired decision violates {} ({v:?}) and {} more",
                v.label(),
                violations.len() - 1
            )));
        }
        let metrics = self.env.evaluate(&decision)?;
        let raw = raw_metrics(&metrics);
        self.normalizer.observe(raw);
        let rewards = distributed_rewards(raw, &self.normalizer);
        self.env.advance();
        let next_state = self.env.state.clone();

        let candidate = ParetoCandidate {
            seq: self.seq,
            episode,
            t,
            rewards,
            objective: metrics.objective,
            central_action: central_raw,
            distributed_actions: raws.clone(),
        };
        self.seq += 1;

        // Learn.
        let central_value = match obs {
            ActObs::TwoLevel { central: obs_c, classes: obs_d } => {
                let chi = self.remember_candidate(candidate);
                let Learners::TwoLevel { central, classes } = &mut self.learners else { unreachable!() };
                for s in 0..3 {
                    let next = build_distributed_observation(&next_state, s, &config);
                    classes[s].remember(ExperienceTuple {
                        obs: obs_d[s].clone(),
                        action: raws[s].clone(),
                        reward: rewards[s],
                        next_obs: next,
                    })?;
                    classes[s].train(&mut self.sampling_rng)?;
                }
                let len = self.window_rewards.len() as f64;
                let action = self.window.back().expect("just pushed").central_action.clone();
                central.remember(ExperienceTuple {
                    obs: obs_c,
                    action,
                    reward: chi as f64 / (3.0 * len),
                    next_obs: build_central_observation(&next_state, &config),
                })?;
                central.train(&mut self.sampling_rng)?;
                chi as f64
            }
            ActObs::Coupled { obs, actions } => {
                self.remember_candidate(candidate);
                let next_obs = std::array::from_fn(|s| build_coupled_observation(&next_state, s, &config));
                let Learners::Coupled { agents, memory, batch } = &mut self.learners else { unreachable!() };
                memory.push(JointTuple { obs, actions, rewards, next_obs });
                train_coupled(agents, memory, *batch, &mut self.sampling_rng)?;
                0.0
            }
            ActObs::Utility { obs, action } => {
                self.remember_candidate(candidate);
                let Scheme::Utility { weights, raw_units } = self.scheme else { unreachable!() };
                let Learners::Utility { agent, utility_bounds } = &mut self.learners else { unreachable!() };
                let total: f64 = weights.iter().sum();
                let (utility, reward) = if raw_units {
                    let u = weights[0] * raw[0] - weights[1] * raw[1] + weights[2] * raw[2];
                    utility_bounds.observe([u, 0.0, 0.0]);
                    (u, utility_bounds.normalize(0, u))
                } else {
                    let u = weighted_utility(rewards, weights);
                    (u, (u + weights[1]) / total)
                };
                agent.remember(ExperienceTuple {
                    obs,
                    action,
                    reward,
                    next_obs: build_central_observation(&next_state, &config),
                })?;
                agent.train(&mut self.sampling_rng)?;
                utility
            }
        };

        let row = MetricRow {
            episode,
            t,
            r1sum_bps: metrics.throughput_bps,
            d2ave_s: metrics.avg_delay_s,
            sinr3ave_linear: metrics.avg_sinr_linear,
            reward1: rewards[0],
            reward2: rewards[1],
            reward3: rewards[2],
            central_reward: central_value,
            repairs: report.conflicts,
        };
        Ok(StepOutcome { row, decision, report })
    }
}

/// Observations and actions kept until the learning phase of a slot.
enum ActObs {
    TwoLevel { central: Vec<f64>, classes: [Vec<f64>; 3] },
    Coupled { obs: [Vec<f64>; 3], actions: [Vec<f64>; 3] },
    Utility { obs: Vec<f64>, action: Vec<f64> },
}

fn odds(u: f64) -> f64 {
    let u = u.clamp(1e-6, 1.0 - 1e-6);
    u / (1.0 - u)
}

/// Inter-slice action of the coupled baseline: each agent's share entries
/// become odds weights for its own class, and vUAV coordinates are the mean
/// of the three agents' votes.
pub fn combine_coupled(actions: &[Vec<f64>; 3], layout: &AgentLayout, config: &ScenarioConfig) -> CentralAction {
    let floor = config.training.share_floor;
    let base: [usize; 3] = std::array::from_fn(|s| 3 * layout.users[s]);
    let mut eta = [[0.0; 3]; 3];
    let mut rho = [[0.0; 3]; 3];
    for l in 0..3 {
        let r = shares_from_weights(std::array::from_fn(|s| odds(actions[s][base[s] + l])), floor);
        let e = shares_from_weights(std::array::from_fn(|s| odds(actions[s][base[s] + 3 + l])), floor);
        for s in 0..3 {
            rho[s][l] = r[s];
            eta[s][l] = e[s];
        }
    }
    let coords = 2 * layout.uavs;
    let mean: Vec<f64> = (0..coords)
        .map(|i| (0..3).map(|s| actions[s][base[s] + COUPLED_SHARE_ENTRIES + i]).sum::<f64>() / 3.0)
        .collect();
    let uav_xy = repair_uav_spacing(uav_from_raw(&mean, config), config);
    CentralAction { eta, rho, uav_xy }
}

fn train_coupled(
    agents: &mut [DdpgAgent; 3],
    memory: &ReplayBuffer<JointTuple>,
    batch: usize,
    rng: &mut SimRng,
) -> Result<()> {
    let Some(sample) = memory.sample(batch, rng) else {
        return Ok(());
    };
    let obs: [Array2<f64>; 3] =
        std::array::from_fn(|s| rows(&sample.iter().map(|j| j.obs[s].as_slice()).collect::<Vec<_>>()));
    let next_obs: [Array2<f64>; 3] =
        std::array::from_fn(|s| rows(&sample.iter().map(|j| j.next_obs[s].as_slice()).collect::<Vec<_>>()));
    let actions: [Array2<f64>; 3] =
        std::array::from_fn(|s| rows(&sample.iter().map(|j| j.actions[s].as_slice()).collect::<Vec<_>>()));
    // Next actions of every agent come from the target actors before any
    // agent updates.
    let mut next_actions: Vec<Array2<f64>> = Vec::with_capacity(3);
    for s in 0..3 {
        let cache = agents[s].target_actor.forward_batch(next_obs[s].view())?;
        next_actions.push(cache.output().clone());
    }
    for i in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&j| j != i).collect();
        let context = concatenate(Axis(1), &others.iter().map(|&j| actions[j].view()).collect::<Vec<_>>())
            .expect("equal rows");
        let next_context =
            concatenate(Axis(1), &others.iter().map(|&j| next_actions[j].view()).collect::<Vec<_>>())
                .expect("equal rows");
        let b = TrainBatch {
            obs: obs[i].clone(),
            actions: actions[i].clone(),
            rewards: Array1::from_iter(sample.iter().map(|j| j.rewards[i])),
            next_obs: next_obs[i].clone(),
            context,
            next_context,
        };
        agents[i].train_on(&b)?;
    }
    Ok(())
}

/// Two-level scheme with dual repair and learned vUAV positions.
pub fn run_training(config: &ScenarioConfig) -> Result<TrainingArtifacts> {
    Trainer::new(config, Scheme::FULL)?.run()
}

pub fn run_maddpg_baseline(config: &ScenarioConfig) -> Result<TrainingArtifacts> {
    Trainer::new(config, Scheme::Coupled)?.run()
}

pub fn run_scalar_utility_baseline(config: &ScenarioConfig, weights: [f64; 3]) -> Result<TrainingArtifacts> {
    Trainer::new(config, Scheme::Utility { weights, raw_units: false })?.run()
}

/// The two ablations: dual repair disabled after its first pass, and vUAVs
/// pinned at the reference positions.
pub fn run_ablations(config: &ScenarioConfig) -> Result<[TrainingArtifacts; 2]> {
    let single = Trainer::new(config, Scheme::TwoLevel { repair: RepairMode::Single, pinned_uavs: false })?.run()?;
    let fixed = Trainer::new(config, Scheme::TwoLevel { repair: RepairMode::Dual, pinned_uavs: true })?.run()?;
    Ok([single, fixed])
}
