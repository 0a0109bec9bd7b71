//! Observation, action and critic widths of every agent.

use crate::agent::AgentDims;
use crate::topology::ScenarioConfig;

/// Widths of the central agent, the three per-class agents, and the
/// coupled-baseline agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentLayout {
    pub users: [usize; 3],
    pub uavs: usize,
}

/// Central action entries before the vUAV coordinates: power then
/// subchannel shares of classes 1 and 2 over the three layers.
pub const CENTRAL_SHARE_ENTRIES: usize = 12;

/// Per-agent central entries in the coupled baseline: the agent's own power
/// and subchannel shares over the three layers.
pub const COUPLED_SHARE_ENTRIES: usize = 6;

impl AgentLayout {
    pub fn of(config: &ScenarioConfig) -> Self {
        Self { users: config.users_per_class, uavs: config.num_uavs }
    }

    pub fn total_users(&self) -> usize {
        self.users.iter().sum()
    }

    /// Three per-class arrival aggregates plus every user's coordinates.
    pub fn central_obs_len(&self) -> usize {
        3 + 2 * self.total_users()
    }

    pub fn central_act_len(&self) -> usize {
        CENTRAL_SHARE_ENTRIES + 2 * self.uavs
    }

    pub fn central_critic_len(&self) -> usize {
        self.central_obs_len() + self.central_act_len()
    }

    pub fn distributed_obs_len(&self, s: usize) -> usize {
        self.users[s]
    }

    pub fn distributed_act_len(&self, s: usize) -> usize {
        3 * self.users[s]
    }

    pub fn distributed_critic_len(&self, s: usize) -> usize {
        self.distributed_obs_len(s) + self.distributed_act_len(s)
    }

    pub fn central_dims(&self) -> AgentDims {
        AgentDims { obs: self.central_obs_len(), action: self.central_act_len(), context: 0 }
    }

    pub fn distributed_dims(&self, s: usize) -> AgentDims {
        AgentDims { obs: self.distributed_obs_len(s), action: self.distributed_act_len(s), context: 0 }
    }

    /// Coupled baseline: own arrivals and coordinates.
    pub fn coupled_obs_len(&self, s: usize) -> usize {
        3 * self.users[s]
    }

    /// Coupled baseline: own intra-slice triples, own shares, and a vote on
    /// every vUAV coordinate.
    pub fn coupled_act_len(&self, s: usize) -> usize {
        3 * self.users[s] + COUPLED_SHARE_ENTRIES + 2 * self.uavs
    }

    /// Coupled baseline critic: own observation plus all agents' actions.
    pub fn coupled_critic_len(&self, s: usize) -> usize {
        self.coupled_obs_len(s) + (0..3).map(|j| self.coupled_act_len(j)).sum::<usize>()
    }

    pub fn coupled_dims(&self, s: usize) -> AgentDims {
        let action = self.coupled_act_len(s);
        AgentDims {
            obs: self.coupled_obs_len(s),
            action,
            context: self.coupled_critic_len(s) - self.coupled_obs_len(s) - action,
        }
    }

    /// Single-agent weighted-utility baseline.
    pub fn utility_dims(&self) -> AgentDims {
        AgentDims {
            obs: self.central_obs_len(),
            action: self.central_act_len() + 3 * self.total_users(),
            context: 0,
        }
    }

    fn mlp(input: usize, hidden: usize, layers: usize, output: usize) -> Vec<usize> {
        let mut d = vec![input];
        d.extend(std::iter::repeat_n(hidden, layers));
        d.push(output);
        d
    }

    /// Layer widths of the eight online networks of the two-level scheme:
    /// central actor and critic, then each class's actor and critic.
    pub fn network_dims(&self, hidden: usize, layers: usize) -> Vec<Vec<usize>> {
        let mut out = vec![
            Self::mlp(self.central_obs_len(), hidden, layers, self.central_act_len()),
            Self::mlp(self.central_critic_len(), hidden, layers, 1),
        ];
        for s in 0..3 {
            out.push(Self::mlp(self.distributed_obs_len(s), hidden, layers, self.distributed_act_len(s)));
            out.push(Self::mlp(self.distributed_critic_len(s), hidden, layers, 1));
        }
        out
    }

    /// Layer widths of the six online networks of the coupled baseline.
    pub fn coupled_network_dims(&self, hidden: usize, layers: usize) -> Vec<Vec<usize>> {
        (0..3)
            .flat_map(|s| {
                [
                    Self::mlp(self.coupled_obs_len(s), hidden, layers, self.coupled_act_len(s)),
                    Self::mlp(self.coupled_critic_len(s), hidden, layers, 1),
                ]
            })
            .collect()
    }
}
