//! Classic tabular multi-agent learners used as tournament opposition:
//! naive Q-learning, joint-action Q-learning, policy hill-climbing and
//! WoLF-PHC ("Win or Learn Fast").
//!
//! All of them learn online, one update per environment step, over the same
//! 5-state memory-1 state space as the gradient learners.

use crate::games::N_STATES;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Shared hyperparameters for the tabular learners.
#[derive(Clone, Copy, Debug)]
pub struct TabularConfig {
    /// Q-learning step size.
    pub alpha: f64,
    /// Epsilon-greedy exploration rate.
    pub epsilon: f64,
    /// Policy step for plain hill-climbing.
    pub phc_lr: f64,
    /// WoLF policy steps: cautious while winning, fast while losing.
    pub wolf_lr_win: f64,
    pub wolf_lr_lose: f64,
}

impl Default for TabularConfig {
    fn default() -> Self {
        TabularConfig {
            alpha: 0.1,
            epsilon: 0.05,
            phc_lr: 0.01,
            wolf_lr_win: 0.01,
            wolf_lr_lose: 0.02,
        }
    }
}

fn greedy(q: &[f64; 2], rng: &mut ChaCha8Rng) -> usize {
    if q[0] > q[1] {
        0
    } else if q[1] > q[0] {
        1
    } else {
        // Uniform tie-breaking.
        rng.random_range(0..2)
    }
}

fn epsilon_greedy(q: &[f64; 2], epsilon: f64, rng: &mut ChaCha8Rng) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..2)
    } else {
        greedy(q, rng)
    }
}

/// Independent Q-learner over own actions.
#[derive(Clone, Debug)]
pub struct NaiveQ {
    pub q: [[f64; 2]; N_STATES],
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl NaiveQ {
    pub fn new(cfg: &TabularConfig, gamma: f64) -> Self {
        NaiveQ {
            q: [[0.0; 2]; N_STATES],
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
            gamma,
        }
    }

    pub fn act(&self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        epsilon_greedy(&self.q[state], self.epsilon, rng)
    }

    /// One-step Q backup toward `r + gamma * max_a Q(s', a)`.
    pub fn update(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        let next = self.q[next_state][0].max(self.q[next_state][1]);
        let target = reward + self.gamma * next;
        self.q[state][action] += self.alpha * (target - self.q[state][action]);
    }
}

/// Joint-action Q-learner: values over both agents' actions plus an
/// empirical frequency model of the opponent.
#[derive(Clone, Debug)]
pub struct JointQ {
    /// Indexed `[state][own action][opponent action]`.
    pub q: [[[f64; 2]; 2]; N_STATES],
    /// Opponent action counts per state.
    pub opp_counts: [[f64; 2]; N_STATES],
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl JointQ {
    pub fn new(cfg: &TabularConfig, gamma: f64) -> Self {
        JointQ {
            q: [[[0.0; 2]; 2]; N_STATES],
            opp_counts: [[0.0; 2]; N_STATES],
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
            gamma,
        }
    }

    /// Opponent action-0 frequency at a state; uniform before any visit.
    pub fn opp_freq(&self, state: usize) -> f64 {
        let total = self.opp_counts[state][0] + self.opp_counts[state][1];
        if total == 0.0 {
            0.5
        } else {
            self.opp_counts[state][0] / total
        }
    }

    /// Expected Q of an own action under the empirical opponent model.
    pub fn expected_q(&self, state: usize, own: usize) -> f64 {
        let p = self.opp_freq(state);
        p * self.q[state][own][0] + (1.0 - p) * self.q[state][own][1]
    }

    fn expected_best(&self, state: usize) -> f64 {
        self.expected_q(state, 0).max(self.expected_q(state, 1))
    }

    pub fn act(&self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        let eq = [self.expected_q(state, 0), self.expected_q(state, 1)];
        epsilon_greedy(&eq, self.epsilon, rng)
    }

    pub fn update(
        &mut self,
        state: usize,
        own: usize,
        opp: usize,
        reward: f64,
        next_state: usize,
    ) {
        self.opp_counts[state][opp] += 1.0;
        let target = reward + self.gamma * self.expected_best(next_state);
        self.q[state][own][opp] += self.alpha * (target - self.q[state][own][opp]);
    }
}

/// Mixed policy over two actions, kept on the simplex.
fn move_toward(policy: &mut [f64; 2], greedy_action: usize, step: f64) {
    policy[greedy_action] = (policy[greedy_action] + step).min(1.0);
    policy[1 - greedy_action] = 1.0 - policy[greedy_action];
}

fn sample_policy(policy: &[f64; 2], rng: &mut ChaCha8Rng) -> usize {
    (rng.random::<f64>() >= policy[0]) as usize
}

/// Policy hill-climbing: Q-learning plus a mixed policy nudged toward the
/// greedy action.
#[derive(Clone, Debug)]
pub struct Phc {
    pub q: [[f64; 2]; N_STATES],
    pub policy: [[f64; 2]; N_STATES],
    pub lr: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl Phc {
    pub fn new(cfg: &TabularConfig, gamma: f64) -> Self {
        Phc {
            q: [[0.0; 2]; N_STATES],
            policy: [[0.5; 2]; N_STATES],
            lr: cfg.phc_lr,
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
            gamma,
        }
    }

    pub fn act(&self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            rng.random_range(0..2)
        } else {
            sample_policy(&self.policy[state], rng)
        }
    }

    pub fn update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        rng: &mut ChaCha8Rng,
    ) {
        let next = self.q[next_state][0].max(self.q[next_state][1]);
        let target = reward + self.gamma * next;
        self.q[state][action] += self.alpha * (target - self.q[state][action]);
        let g = greedy(&self.q[state], rng);
        move_toward(&mut self.policy[state], g, self.lr);
    }
}

/// WoLF-PHC: hill-climbing with a learning rate switched on whether the
/// current mixed policy beats its running average under the current Q.
#[derive(Clone, Debug)]
pub struct WolfPhc {
    pub q: [[f64; 2]; N_STATES],
    pub policy: [[f64; 2]; N_STATES],
    pub avg_policy: [[f64; 2]; N_STATES],
    pub visits: [f64; N_STATES],
    pub lr_win: f64,
    pub lr_lose: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl WolfPhc {
    pub fn new(cfg: &TabularConfig, gamma: f64) -> Self {
        WolfPhc {
            q: [[0.0; 2]; N_STATES],
            policy: [[0.5; 2]; N_STATES],
            avg_policy: [[0.5; 2]; N_STATES],
            visits: [0.0; N_STATES],
            lr_win: cfg.wolf_lr_win,
            lr_lose: cfg.wolf_lr_lose,
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
            gamma,
        }
    }

    pub fn act(&self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        if rng.random::<f64>() < self.epsilon {
            rng.random_range(0..2)
        } else {
            sample_policy(&self.policy[state], rng)
        }
    }

    pub fn update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        rng: &mut ChaCha8Rng,
    ) {
        let next = self.q[next_state][0].max(self.q[next_state][1]);
        let target = reward + self.gamma * next;
        self.q[state][action] += self.alpha * (target - self.q[state][action]);

        self.visits[state] += 1.0;
        for a in 0..2 {
            self.avg_policy[state][a] +=
                (self.policy[state][a] - self.avg_policy[state][a]) / self.visits[state];
        }
        let expect = |p: &[f64; 2]| p[0] * self.q[state][0] + p[1] * self.q[state][1];
        let winning = expect(&self.policy[state]) > expect(&self.avg_policy[state]);
        let lr = if winning { self.lr_win } else { self.lr_lose };
        let g = greedy(&self.q[state], rng);
        move_toward(&mut self.policy[state], g, lr);
    }
}
