//! Deterministic-policy actor-critic agent.
//!
//! The critic sees `[observation, action, context]`, where `context` carries
//! any extra inputs the caller supplies (the other agents' actions in the
//! coupled baseline, nothing otherwise).

pub mod noise;
pub mod replay;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Result, SimError};
use crate::neural::{checkpoint, Direction, Mlp};
use crate::topology::config::{CriticScaling, NoiseKind, TrainingParams};

pub use noise::NoiseProcess;
pub use replay::ReplayBuffer;

/// One transition `<o, a, r, o'>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperienceTuple {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
}

/// Network widths of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentDims {
    pub obs: usize,
    pub action: usize,
    pub context: usize,
}

impl AgentDims {
    pub fn critic_input(self) -> usize {
        self.obs + self.action + self.context
    }
}

/// Mini-batch in matrix form, one row per sample.
#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub obs: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_obs: Array2<f64>,
    pub context: Array2<f64>,
    /// Context paired with the next observation for the Bellman target.
    pub next_context: Array2<f64>,
}

impl TrainBatch {
    pub fn from_tuples(tuples: &[&ExperienceTuple]) -> Result<Self> {
        let b = tuples.len();
        if b == 0 {
            return Err(SimError::Insufficient("empty training batch".into()));
        }
        let obs_len = tuples[0].obs.len();
        let act_len = tuples[0].action.len();
        let mut obs = Array2::zeros((b, obs_len));
        let mut actions = Array2::zeros((b, act_len));
        let mut next_obs = Array2::zeros((b, obs_len));
        let mut rewards = Array1::zeros(b);
        for (i, t) in tuples.iter().enumerate() {
            if t.obs.len() != obs_len || t.next_obs.len() != obs_len {
                return Err(SimError::dim("batch observation", obs_len, t.obs.len()));
            }
            if t.action.len() != act_len {
                return Err(SimError::dim("batch action", act_len, t.action.len()));
            }
            obs.row_mut(i).assign(&ArrayView2::from_shape((1, obs_len), &t.obs).expect("sized").row(0));
            next_obs
                .row_mut(i)
                .assign(&ArrayView2::from_shape((1, obs_len), &t.next_obs).expect("sized").row(0));
            actions
                .row_mut(i)
                .assign(&ArrayView2::from_shape((1, act_len), &t.action).expect("sized").row(0));
            rewards[i] = t.reward;
        }
        Ok(Self {
            obs,
            actions,
            rewards,
            next_obs,
            context: Array2::zeros((b, 0)),
            next_context: Array2::zeros((b, 0)),
        })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Losses from one training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub dims: AgentDims,
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub buffer: ReplayBuffer<ExperienceTuple>,
    pub batch_size: usize,
    pub gamma: f64,
    pub tau: f64,
    pub critic_scaling: CriticScaling,
    pub noise: NoiseProcess,
    /// Current exploration scale.
    pub sigma: f64,
}

fn concat_cols(parts: &[ArrayView2<f64>]) -> Array2<f64> {
    ndarray::concatenate(Axis(1), parts).expect("equal row counts")
}

fn layer_dims(input: usize, hidden: usize, layers: usize, output: usize) -> Vec<usize> {
    let mut d = vec![input];
    d.extend(std::iter::repeat_n(hidden, layers));
    d.push(output);
    d
}

impl DdpgAgent {
    /// Fresh agent; targets start as copies of the online networks.
    pub fn new(
        dims: AgentDims,
        params: &TrainingParams,
        buffer_capacity: usize,
        batch_size: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let actor = Mlp::new(
            &layer_dims(dims.obs, params.hidden_width, params.hidden_layers, dims.action),
            params.actor_lr,
            rng,
        )?;
        let critic = Mlp::new(
            &layer_dims(dims.critic_input(), params.hidden_width, params.hidden_layers, 1),
            params.critic_lr,
            rng,
        )?;
        Ok(Self {
            dims,
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            buffer: ReplayBuffer::new(buffer_capacity),
            batch_size,
            gamma: params.gamma,
            tau: params.tau,
            critic_scaling: params.critic_scaling,
            noise: NoiseProcess::new(params.noise_kind, dims.action),
            sigma: params.noise_start,
        })
    }

    pub fn noise_kind(&self) -> NoiseKind {
        match self.noise {
            NoiseProcess::Gaussian => NoiseKind::Gaussian,
            NoiseProcess::OrnsteinUhlenbeck { .. } => NoiseKind::OrnsteinUhlenbeck,
        }
    }

    /// `mu(o)`, plus clipped exploration noise when `explore` is set.
    pub fn select_action(&mut self, obs: &[f64], explore: bool, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let mut a = self.actor.forward(obs)?;
        if explore {
            let n = self.noise.sample(a.len(), self.sigma, rng);
            for (x, e) in a.iter_mut().zip(n) {
                *x = (*x + e).clamp(0.0, 1.0);
            }
        }
        Ok(a)
    }

    fn reward_scale(&self) -> f64 {
        match self.critic_scaling {
            CriticScaling::Scaled => 1.0 - self.gamma,
            CriticScaling::Raw => 1.0,
        }
    }

    /// Bellman targets from the target networks only:
    /// `y = c r + gamma Q'(o', mu'(o'), ctx')` with `c` the reward scale.
    pub fn critic_target(&self, batch: &TrainBatch) -> Result<Array1<f64>> {
        let next_a = self.target_actor.forward_batch(batch.next_obs.view())?;
        let input = concat_cols(&[batch.next_obs.view(), next_a.output().view(), batch.next_context.view()]);
        let q = self.target_critic.forward_batch(input.view())?;
        let q = q.output().column(0).to_owned();
        Ok(&batch.rewards * self.reward_scale() + &q * self.gamma)
    }

    /// One descent step on the mean squared Bellman error; returns the
    /// pre-step loss.
    pub fn update_critic(&mut self, batch: &TrainBatch) -> Result<f64> {
        let y = self.critic_target(batch)?;
        self.fit_critic(batch, &y)
    }

    /// Descent step toward explicit targets `y`.
    pub fn fit_critic(&mut self, batch: &TrainBatch, y: &Array1<f64>) -> Result<f64> {
        let b = batch.len() as f64;
        let input = concat_cols(&[batch.obs.view(), batch.actions.view(), batch.context.view()]);
        let cache = self.critic.forward_batch(input.view())?;
        let q = cache.output().column(0).to_owned();
        let err = &q - y;
        let loss = err.mapv(|e| e * e).sum() / b;
        if !loss.is_finite() {
            return Err(SimError::Numerical(format!("critic loss {loss}")));
        }
        let grad = (err * (2.0 / b)).insert_axis(Axis(1));
        let (g, _) = self.critic.backward(&cache, grad.view())?;
        self.critic.sgd_step(&g, Direction::Descend)?;
        Ok(loss)
    }

    /// One ascent step along the deterministic policy gradient
    /// `mean(grad_theta mu(o) * grad_a Q(o, mu(o)))`; returns the pre-step
    /// mean Q.
    pub fn update_actor(&mut self, batch: &TrainBatch) -> Result<f64> {
        let b = batch.len() as f64;
        let actor_cache = self.actor.forward_batch(batch.obs.view())?;
        let input = concat_cols(&[batch.obs.view(), actor_cache.output().view(), batch.context.view()]);
        let critic_cache = self.critic.forward_batch(input.view())?;
        let objective = critic_cache.output().sum() / b;
        if !objective.is_finite() {
            return Err(SimError::Numerical(format!("actor objective {objective}")));
        }
        let ones = Array2::from_elem((batch.len(), 1), 1.0 / b);
        let (_, d_input) = self.critic.backward(&critic_cache, ones.view())?;
        let d_action = d_input.slice(s![.., self.dims.obs..self.dims.obs + self.dims.action]);
        let (g, _) = self.actor.backward(&actor_cache, d_action)?;
        self.actor.sgd_step(&g, Direction::Ascend)?;
        Ok(objective)
    }

    pub fn soft_update_targets(&mut self) -> Result<()> {
        self.target_actor.soft_update(&self.actor, self.tau)?;
        self.target_critic.soft_update(&self.critic, self.tau)
    }

    /// Critic step, actor step, then target soft updates.
    pub fn train_on(&mut self, batch: &TrainBatch) -> Result<TrainStats> {
        let critic_loss = self.update_critic(batch)?;
        let actor_objective = self.update_actor(batch)?;
        self.soft_update_targets()?;
        Ok(TrainStats { critic_loss, actor_objective })
    }

    pub fn remember(&mut self, tuple: ExperienceTuple) -> Result<()> {
        if tuple.obs.len() != self.dims.obs || tuple.next_obs.len() != self.dims.obs {
            return Err(SimError::dim("experience observation", self.dims.obs, tuple.obs.len()));
        }
        if tuple.action.len() != self.dims.action {
            return Err(SimError::dim("experience action", self.dims.action, tuple.action.len()));
        }
        self.buffer.push(tuple);
        Ok(())
    }

    /// Train on a mini-batch from the agent's own memory. `None` while the
    /// memory is smaller than the batch size.
    pub fn train(&mut self, rng: &mut impl Rng) -> Result<Option<TrainStats>> {
        let Some(sample) = self.buffer.sample(self.batch_size, rng) else {
            return Ok(None);
        };
        let batch = TrainBatch::from_tuples(&sample)?;
        self.train_on(&batch).map(Some)
    }

    /// The four networks in checkpoint order.
    pub fn networks(&self) -> [&Mlp; 4] {
        [&self.actor, &self.critic, &self.target_actor, &self.target_critic]
    }

    pub fn checkpoint_bytes(&self) -> Vec<u8> {
        checkpoint::encode_bundle(&self.networks(), &[self.gamma, self.tau, self.sigma])
    }

    /// Restore the four networks and scalars saved by `checkpoint_bytes`.
    pub fn restore(&mut self, bytes: &[u8]) -> Result<()> {
        let (nets, extra) = checkpoint::decode_bundle(bytes)?;
        let [actor, critic, target_actor, target_critic]: [Mlp; 4] = nets
            .try_into()
            .map_err(|_| SimError::Checkpoint("agent bundle must hold four networks".into()))?;
        if actor.dims() != self.actor.dims() || critic.dims() != self.critic.dims() {
            return Err(SimError::Checkpoint("network shapes do not match the agent".into()));
        }
        if extra.len() != 3 {
            return Err(SimError::Checkpoint("agent bundle scalars missing".into()));
        }
        self.actor = actor;
        self.critic = critic;
        self.target_actor = target_actor;
        self.target_critic = target_critic;
        self.gamma = extra[0];
        self.tau = extra[1];
        self.sigma = extra[2];
        Ok(())
    }
}
