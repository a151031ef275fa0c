//! Monte-Carlo episode simulation and the policy-gradient learning rules.
//!
//! Policies stay fixed within a batch of episodes; learning happens between
//! batches. The likelihood-ratio estimators below are unbiased for the
//! gradient and for the cross-Hessian of the expected discounted episodic
//! return, which the enumeration tests check exactly on short horizons.

use crate::games::{sigmoid_probs, BimatrixGame, PolicyParams, N_STATES};
use crate::opponent::{fit_from_counts, StateCounts};
use crate::record::{RunRecord, RunRow};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// A batch of trajectories with per-step discounted return tails.
///
/// Layout is episode-major: entry `(e, t)` lives at `e * horizon + t`.
/// `states[e*horizon]` is always the empty start state 0; later states are
/// `1 + 2*u1 + u2` of the previous step's actions.
#[derive(Clone, Debug)]
pub struct EpisodeBatch {
    pub episodes: usize,
    /// Steps per episode.
    pub horizon: usize,
    /// Discount used for the stored return tails.
    pub gamma: f64,
    pub states: Vec<u8>,
    pub actions1: Vec<u8>,
    pub actions2: Vec<u8>,
    pub rewards1: Vec<f64>,
    pub rewards2: Vec<f64>,
    pub returns1: Vec<f64>,
    pub returns2: Vec<f64>,
}

impl EpisodeBatch {
    #[inline]
    pub fn at(&self, episode: usize, t: usize) -> usize {
        episode * self.horizon + t
    }

    pub fn actions(&self, agent: usize) -> &[u8] {
        if agent == 0 {
            &self.actions1
        } else {
            &self.actions2
        }
    }

    pub fn rewards(&self, agent: usize) -> &[f64] {
        if agent == 0 {
            &self.rewards1
        } else {
            &self.rewards2
        }
    }

    pub fn returns(&self, agent: usize) -> &[f64] {
        if agent == 0 {
            &self.returns1
        } else {
            &self.returns2
        }
    }

    /// Rebuild states, rewards and return tails from explicit action
    /// sequences (flat `episodes * horizon` slices).
    pub fn from_actions(
        game: &BimatrixGame,
        actions1: Vec<u8>,
        actions2: Vec<u8>,
        episodes: usize,
        horizon: usize,
    ) -> EpisodeBatch {
        assert!(horizon >= 1, "horizon must be at least 1");
        assert_eq!(actions1.len(), episodes * horizon);
        assert_eq!(actions2.len(), episodes * horizon);
        let n = episodes * horizon;
        let mut batch = EpisodeBatch {
            episodes,
            horizon,
            gamma: game.gamma,
            states: vec![0; n],
            actions1,
            actions2,
            rewards1: vec![0.0; n],
            rewards2: vec![0.0; n],
            returns1: vec![0.0; n],
            returns2: vec![0.0; n],
        };
        for e in 0..episodes {
            let mut state = 0u8;
            for t in 0..horizon {
                let i = batch.at(e, t);
                batch.states[i] = state;
                let (u1, u2) = (batch.actions1[i] as usize, batch.actions2[i] as usize);
                let (r1, r2) = game.reward(u1, u2);
                batch.rewards1[i] = r1;
                batch.rewards2[i] = r2;
                state = (1 + 2 * u1 + u2) as u8;
            }
            let mut tail1 = 0.0;
            let mut tail2 = 0.0;
            for t in (0..horizon).rev() {
                let i = batch.at(e, t);
                tail1 = batch.rewards1[i] + game.gamma * tail1;
                tail2 = batch.rewards2[i] + game.gamma * tail2;
                batch.returns1[i] = tail1;
                batch.returns2[i] = tail2;
            }
        }
        batch
    }

    /// Mean normalised return per agent over the batch.
    pub fn mean_normalised_returns(&self) -> (f64, f64) {
        let scale = (1.0 - self.gamma) / self.episodes as f64;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for e in 0..self.episodes {
            s1 += self.returns1[self.at(e, 0)];
            s2 += self.returns2[self.at(e, 0)];
        }
        (scale * s1, scale * s2)
    }
}

/// Sample a batch of episodes. Actions are Bernoulli draws on the per-state
/// action-0 probabilities; agent 1 draws before agent 2 at every step.
pub fn rollout(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    episodes: usize,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> EpisodeBatch {
    assert!(horizon >= 1, "horizon must be at least 1");
    let p1 = theta1.probs();
    let p2 = theta2.probs();
    let n = episodes * horizon;
    let mut actions1 = vec![0u8; n];
    let mut actions2 = vec![0u8; n];
    for e in 0..episodes {
        let mut state = 0usize;
        for t in 0..horizon {
            let i = e * horizon + t;
            let u1 = (rng.random::<f64>() >= p1[state]) as u8;
            let u2 = (rng.random::<f64>() >= p2[state]) as u8;
            actions1[i] = u1;
            actions2[i] = u2;
            state = 1 + 2 * u1 as usize + u2 as usize;
        }
    }
    EpisodeBatch::from_actions(game, actions1, actions2, episodes, horizon)
}

/// Per-state value baseline for variance reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Baseline {
    pub values: [f64; N_STATES],
}

impl Baseline {
    pub fn zero() -> Baseline {
        Baseline::default()
    }

    /// Move each visited state's value toward the batch mean of the agent's
    /// discounted return tails by `step` (the critic step size).
    pub fn update_from(&mut self, batch: &EpisodeBatch, agent: usize, step: f64) {
        let mut sums = [0.0; N_STATES];
        let mut counts = [0usize; N_STATES];
        let returns = batch.returns(agent);
        for (i, &s) in batch.states.iter().enumerate() {
            sums[s as usize] += returns[i];
            counts[s as usize] += 1;
        }
        for s in 0..N_STATES {
            if counts[s] > 0 {
                let mean = sums[s] / counts[s] as f64;
                self.values[s] += step * (mean - self.values[s]);
            }
        }
    }
}

#[inline]
fn score(prob: f64, action: u8) -> f64 {
    // d/dz log pi(u | s) for a Bernoulli-sigmoid policy.
    if action == 0 {
        1.0 - prob
    } else {
        -prob
    }
}

fn episode_lr_gradient(
    batch: &EpisodeBatch,
    e: usize,
    score_actions: &[u8],
    score_probs: &[f64; N_STATES],
    returns: &[f64],
    baseline: &Baseline,
) -> [f64; N_STATES] {
    let mut g = [0.0; N_STATES];
    let mut discount = 1.0;
    for t in 0..batch.horizon {
        let i = batch.at(e, t);
        let s = batch.states[i] as usize;
        let sc = score(score_probs[s], score_actions[i]);
        g[s] += sc * discount * (returns[i] - baseline.values[s]);
        discount *= batch.gamma;
    }
    g
}

/// Likelihood-ratio estimate of the gradient of `return_agent`'s expected
/// discounted return with respect to `score_agent`'s logits.
pub fn likelihood_gradient(
    batch: &EpisodeBatch,
    score_agent: usize,
    return_agent: usize,
    score_logits: &[f64; N_STATES],
    baseline: &Baseline,
) -> [f64; N_STATES] {
    let probs = sigmoid_probs(score_logits);
    let actions = batch.actions(score_agent);
    let returns = batch.returns(return_agent);
    let mut g = [0.0; N_STATES];
    for e in 0..batch.episodes {
        let ge = episode_lr_gradient(batch, e, actions, &probs, returns, baseline);
        for s in 0..N_STATES {
            g[s] += ge[s];
        }
    }
    for v in g.iter_mut() {
        *v /= batch.episodes as f64;
    }
    g
}

/// Per-episode values of [`likelihood_gradient`] (for variance estimates).
pub fn likelihood_gradient_episodes(
    batch: &EpisodeBatch,
    score_agent: usize,
    return_agent: usize,
    score_logits: &[f64; N_STATES],
    baseline: &Baseline,
) -> Vec<[f64; N_STATES]> {
    let probs = sigmoid_probs(score_logits);
    let actions = batch.actions(score_agent);
    let returns = batch.returns(return_agent);
    (0..batch.episodes)
        .map(|e| episode_lr_gradient(batch, e, actions, &probs, returns, baseline))
        .collect()
}

/// Policy-gradient estimate of an agent's own return gradient.
pub fn pg_gradient(
    batch: &EpisodeBatch,
    agent: usize,
    logits: &[f64; N_STATES],
    baseline: &Baseline,
) -> [f64; N_STATES] {
    likelihood_gradient(batch, agent, agent, logits, baseline)
}

fn episode_cross_hessian(
    batch: &EpisodeBatch,
    e: usize,
    p1: &[f64; N_STATES],
    p2: &[f64; N_STATES],
    rewards: &[f64],
) -> [[f64; N_STATES]; N_STATES] {
    let mut h = [[0.0; N_STATES]; N_STATES];
    let mut cum1 = [0.0; N_STATES];
    let mut cum2 = [0.0; N_STATES];
    let mut discount = 1.0;
    for t in 0..batch.horizon {
        let i = batch.at(e, t);
        let s = batch.states[i] as usize;
        cum1[s] += score(p1[s], batch.actions1[i]);
        cum2[s] += score(p2[s], batch.actions2[i]);
        let w = discount * rewards[i];
        if w != 0.0 {
            for a in 0..N_STATES {
                if cum1[a] != 0.0 {
                    let ca = w * cum1[a];
                    for b in 0..N_STATES {
                        h[a][b] += ca * cum2[b];
                    }
                }
            }
        }
        discount *= batch.gamma;
    }
    h
}

/// Second-order likelihood-ratio estimate of the cross-Hessian
/// `grad_1 grad_2 E[R_reward_agent]`, indexed `[theta1 state][theta2 state]`.
///
/// This is the batch mean of
/// `sum_t gamma^t r_t (sum_{l<=t} grad_1 log pi1)(sum_{l<=t} grad_2 log pi2)'`,
/// exact in expectation.
pub fn cross_hessian_estimate(
    batch: &EpisodeBatch,
    theta1: &[f64; N_STATES],
    theta2: &[f64; N_STATES],
    reward_agent: usize,
) -> [[f64; N_STATES]; N_STATES] {
    let p1 = sigmoid_probs(theta1);
    let p2 = sigmoid_probs(theta2);
    let rewards = batch.rewards(reward_agent);
    let mut h = [[0.0; N_STATES]; N_STATES];
    for e in 0..batch.episodes {
        let he = episode_cross_hessian(batch, e, &p1, &p2, rewards);
        for a in 0..N_STATES {
            for b in 0..N_STATES {
                h[a][b] += he[a][b];
            }
        }
    }
    let inv = 1.0 / batch.episodes as f64;
    for row in h.iter_mut() {
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
    h
}

/// Per-episode values of [`cross_hessian_estimate`].
pub fn cross_hessian_episodes(
    batch: &EpisodeBatch,
    theta1: &[f64; N_STATES],
    theta2: &[f64; N_STATES],
    reward_agent: usize,
) -> Vec<[[f64; N_STATES]; N_STATES]> {
    let p1 = sigmoid_probs(theta1);
    let p2 = sigmoid_probs(theta2);
    let rewards = batch.rewards(reward_agent);
    (0..batch.episodes)
        .map(|e| episode_cross_hessian(batch, e, &p1, &p2, rewards))
        .collect()
}

/// Naive policy-gradient update for one agent.
pub fn nl_pg_step(
    batch: &EpisodeBatch,
    agent: usize,
    logits: &[f64; N_STATES],
    baseline: &Baseline,
    delta: f64,
) -> [f64; N_STATES] {
    let g = pg_gradient(batch, agent, logits, baseline);
    g.map(|x| delta * x)
}

/// Shaping correction for one seat: the cross-Hessian estimate of the
/// opponent's return contracted with the estimated gradient of the own
/// return with respect to the opponent's (believed) parameters.
pub fn lola_pg_correction(
    batch: &EpisodeBatch,
    agent: usize,
    own_logits: &[f64; N_STATES],
    opp_logits: &[f64; N_STATES],
    own_baseline: &Baseline,
) -> [f64; N_STATES] {
    let (th1, th2) = if agent == 0 {
        (own_logits, opp_logits)
    } else {
        (opp_logits, own_logits)
    };
    let h = cross_hessian_estimate(batch, th1, th2, 1 - agent);
    let gx = likelihood_gradient(batch, 1 - agent, agent, opp_logits, own_baseline);
    let mut corr = [0.0; N_STATES];
    for i in 0..N_STATES {
        for j in 0..N_STATES {
            corr[i] += if agent == 0 { h[i][j] } else { h[j][i] } * gx[j];
        }
    }
    corr
}

/// Complete policy-gradient LOLA update for agent 1 from one shared batch:
/// `delta * grad_1 E[R1] + delta * eta * (grad_1 grad_2 E[R2]) grad_2 E[R1]`.
pub fn lola_pg_step(
    batch: &EpisodeBatch,
    theta1: &[f64; N_STATES],
    theta2: &[f64; N_STATES],
    baseline1: &Baseline,
    delta: f64,
    eta: f64,
) -> [f64; N_STATES] {
    let g1 = likelihood_gradient(batch, 0, 0, theta1, baseline1);
    let corr = lola_pg_correction(batch, 0, theta1, theta2, baseline1);
    let mut f = [0.0; N_STATES];
    for i in 0..N_STATES {
        f[i] = delta * g1[i] + delta * eta * corr[i];
    }
    f
}

/// Policy-gradient learning rule selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgRule {
    Nl,
    Lola,
    /// LOLA with the opponent's parameters replaced by a maximum-likelihood
    /// fit from the opponent's sampled actions.
    LolaOm,
}

impl PgRule {
    pub fn name(&self) -> &'static str {
        match self {
            PgRule::Nl => "nl-pg",
            PgRule::Lola => "lola-pg",
            PgRule::LolaOm => "lola-om",
        }
    }
}

/// Configuration of one policy-gradient learner.
#[derive(Clone, Copy, Debug)]
pub struct PgConfig {
    pub rule: PgRule,
    /// Actor step size.
    pub delta: f64,
    /// Assumed opponent step size in the correction term.
    pub eta: f64,
    /// Critic step size (1 moves the baseline fully to the batch mean).
    pub critic_step: f64,
    /// Laplace pseudo-count for opponent-model fitting.
    pub om_smoothing: f64,
    /// Number of most recent batches the opponent model is fit on.
    pub om_window: usize,
}

impl PgConfig {
    pub fn new(rule: PgRule) -> PgConfig {
        PgConfig {
            rule,
            delta: 0.005,
            eta: 1.0,
            critic_step: 1.0,
            om_smoothing: 1.0,
            om_window: 1,
        }
    }
}

/// Train a pair of policy-gradient learners with simultaneous updates from a
/// shared batch per iteration.
pub fn train_pg(
    game: &BimatrixGame,
    cfg1: &PgConfig,
    cfg2: &PgConfig,
    batch_size: usize,
    horizon: usize,
    iterations: usize,
    seed: u64,
) -> Result<RunRecord> {
    if batch_size == 0 || horizon == 0 || iterations == 0 {
        return Err(Error::Config(
            "batch size, horizon and iterations must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta1 = PolicyParams::random(&mut rng);
    let mut theta2 = PolicyParams::random(&mut rng);
    let mut b1 = Baseline::zero();
    let mut b2 = Baseline::zero();
    let mut window1: VecDeque<StateCounts> = VecDeque::new();
    let mut window2: VecDeque<StateCounts> = VecDeque::new();
    let mut rows = Vec::with_capacity(iterations);
    let mut diverged = false;

    for iter in 0..iterations {
        let batch = rollout(game, &theta1, &theta2, batch_size, horizon, &mut rng);
        b1.update_from(&batch, 0, cfg1.critic_step);
        b2.update_from(&batch, 1, cfg2.critic_step);

        // Opponent models, where requested: fit on the most recent batches.
        let om_of = |window: &mut VecDeque<StateCounts>,
                     cfg: &PgConfig,
                     opponent: usize|
         -> Result<Option<[f64; N_STATES]>> {
            if cfg.rule != PgRule::LolaOm {
                return Ok(None);
            }
            window.push_back(StateCounts::from_batch(&batch, opponent));
            while window.len() > cfg.om_window.max(1) {
                window.pop_front();
            }
            let mut total = StateCounts::default();
            for c in window.iter() {
                total.merge(c);
            }
            let model = fit_from_counts(&total, cfg.om_smoothing)?;
            Ok(Some(model.fitted_logits))
        };
        let om1 = om_of(&mut window1, cfg1, 1)?;
        let om2 = om_of(&mut window2, cfg2, 0)?;

        // Effective opponent parameters seen by each agent.
        let seen2 = om1.unwrap_or(theta2.logits);
        let seen1 = om2.unwrap_or(theta1.logits);

        let g1 = pg_gradient(&batch, 0, &theta1.logits, &b1);
        let g2 = pg_gradient(&batch, 1, &theta2.logits, &b2);

        let update = |agent: usize,
                      cfg: &PgConfig,
                      g_own: &[f64; N_STATES],
                      own: &[f64; N_STATES],
                      seen_opp: &[f64; N_STATES],
                      b_own: &Baseline|
         -> [f64; N_STATES] {
            let mut f = g_own.map(|x| cfg.delta * x);
            if cfg.rule != PgRule::Nl {
                let corr = lola_pg_correction(&batch, agent, own, seen_opp, b_own);
                for i in 0..N_STATES {
                    f[i] += cfg.delta * cfg.eta * corr[i];
                }
            }
            f
        };
        let f1 = update(0, cfg1, &g1, &theta1.logits, &seen2, &b1);
        let f2 = update(1, cfg2, &g2, &theta2.logits, &seen1, &b2);
        if f1.iter().chain(f2.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("pg update at iteration {iter}")));
        }

        for i in 0..N_STATES {
            theta1.logits[i] += f1[i];
            theta2.logits[i] += f2[i];
        }
        diverged |= theta1.clamp();
        diverged |= theta2.clamp();

        let (v1, v2) = crate::games::exact_value(game, &theta1.logits, &theta2.logits);
        let norm = |g: &[f64; N_STATES]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
        rows.push(RunRow {
            iteration: iter + 1,
            v1,
            v2,
            p1: theta1.probs(),
            p2: theta2.probs(),
            grad_norm: Some((norm(&g1), norm(&g2))),
            om1: om1.map(|l| sigmoid_probs(&l)),
            om2: om2.map(|l| sigmoid_probs(&l)),
            diverged,
        });
    }
    Ok(RunRecord { seed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded(n: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(n)
    }

    #[test]
    fn states_follow_previous_actions() {
        let game = BimatrixGame::ipd();
        let mut rng = seeded(1);
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let batch = rollout(&game, &t1, &t2, 32, 20, &mut rng);
        for e in 0..batch.episodes {
            assert_eq!(batch.states[batch.at(e, 0)], 0);
            for t in 1..batch.horizon {
                let prev = batch.at(e, t - 1);
                let expect = 1 + 2 * batch.actions1[prev] + batch.actions2[prev];
                assert_eq!(batch.states[batch.at(e, t)], expect);
            }
        }
    }

    #[test]
    fn return_recursion_holds_exactly() {
        let game = BimatrixGame::imp();
        let mut rng = seeded(2);
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let batch = rollout(&game, &t1, &t2, 16, 33, &mut rng);
        for e in 0..batch.episodes {
            for t in 0..batch.horizon {
                let i = batch.at(e, t);
                let next = if t + 1 < batch.horizon {
                    batch.returns1[batch.at(e, t + 1)]
                } else {
                    0.0
                };
                assert_eq!(batch.returns1[i], batch.rewards1[i] + batch.gamma * next);
            }
        }
    }

    #[test]
    fn deterministic_policies_repeat_one_trajectory() {
        let game = BimatrixGame::ipd();
        let t1 = PolicyParams::from_probs([1.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let t2 = PolicyParams::from_probs([1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let mut rng = seeded(3);
        let batch = rollout(&game, &t1, &t2, 8, 10, &mut rng);
        let first: Vec<u8> = (0..batch.horizon).map(|t| batch.states[batch.at(0, t)]).collect();
        for e in 1..batch.episodes {
            for t in 0..batch.horizon {
                assert_eq!(batch.states[batch.at(e, t)], first[t]);
            }
        }
        // Every reward is the mutual-cooperation payoff.
        assert!(batch.rewards1.iter().all(|&r| r == -1.0));
    }

    #[test]
    fn always_defect_earns_minus_two_every_step() {
        let game = BimatrixGame::ipd();
        let t = PolicyParams::from_probs([0.0; N_STATES]).unwrap();
        let mut rng = seeded(4);
        let batch = rollout(&game, &t, &t, 4, 16, &mut rng);
        assert!(batch.rewards1.iter().all(|&r| r == -2.0));
        assert!(batch.rewards2.iter().all(|&r| r == -2.0));
    }

    #[test]
    fn uniform_policies_visit_outcomes_evenly() {
        let game = BimatrixGame::ipd();
        let t = PolicyParams::new([0.0; N_STATES]);
        let mut rng = seeded(5);
        let batch = rollout(&game, &t, &t, 500, 40, &mut rng);
        let mut counts = [0usize; N_STATES];
        for &s in &batch.states {
            counts[s as usize] += 1;
        }
        let visits: usize = counts[1..].iter().sum();
        for &c in &counts[1..] {
            let freq = c as f64 / visits as f64;
            // 5 sigma of a binomial(n, 1/4) frequency.
            let se = (0.25 * 0.75 / visits as f64).sqrt();
            assert!((freq - 0.25).abs() < 5.0 * se, "freq {freq}");
        }
    }

    #[test]
    fn identical_seed_means_identical_batch() {
        let game = BimatrixGame::imp();
        let t1 = PolicyParams::new([0.3, -0.2, 0.8, 0.0, -1.0]);
        let t2 = PolicyParams::new([0.0; N_STATES]);
        let a = rollout(&game, &t1, &t2, 10, 10, &mut seeded(6));
        let b = rollout(&game, &t1, &t2, 10, 10, &mut seeded(6));
        assert_eq!(a.actions1, b.actions1);
        assert_eq!(a.actions2, b.actions2);
        assert_eq!(a.returns1, b.returns1);
    }

    #[test]
    fn zero_rewards_give_zero_estimates() {
        let game = BimatrixGame::custom([[0.0; 2]; 2], [[0.0; 2]; 2], 0.9).unwrap();
        let t = PolicyParams::new([0.1; N_STATES]);
        let mut rng = seeded(7);
        let batch = rollout(&game, &t, &t, 32, 16, &mut rng);
        let g = pg_gradient(&batch, 0, &t.logits, &Baseline::zero());
        assert_eq!(g, [0.0; N_STATES]);
        let h = cross_hessian_estimate(&batch, &t.logits, &t.logits, 1);
        assert_eq!(h, [[0.0; N_STATES]; N_STATES]);
    }

    #[test]
    fn zero_eta_reduces_lola_pg_to_nl_pg() {
        let game = BimatrixGame::ipd();
        let mut rng = seeded(8);
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let batch = rollout(&game, &t1, &t2, 64, 24, &mut rng);
        let b = Baseline::zero();
        let lola = lola_pg_step(&batch, &t1.logits, &t2.logits, &b, 0.005, 0.0);
        let nl = nl_pg_step(&batch, 0, &t1.logits, &b, 0.005);
        for i in 0..N_STATES {
            assert!((lola[i] - nl[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_seed_means_identical_update() {
        let game = BimatrixGame::ipd();
        let t1 = PolicyParams::new([0.4, -0.3, 0.2, 0.9, -0.5]);
        let t2 = PolicyParams::new([-0.1, 0.6, 0.0, -0.7, 0.3]);
        let b = Baseline::zero();
        let run = |seed| {
            let mut rng = seeded(seed);
            let batch = rollout(&game, &t1, &t2, 32, 16, &mut rng);
            lola_pg_step(&batch, &t1.logits, &t2.logits, &b, 0.005, 1.0)
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn train_pg_is_deterministic_per_seed() {
        let game = BimatrixGame::ipd();
        let cfg = PgConfig::new(PgRule::Lola);
        let a = train_pg(&game, &cfg, &cfg, 64, 16, 5, 77).unwrap();
        let b = train_pg(&game, &cfg, &cfg, 64, 16, 5, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn train_pg_records_om_columns_only_for_om_rule() {
        let game = BimatrixGame::ipd();
        let om = PgConfig::new(PgRule::LolaOm);
        let nl = PgConfig::new(PgRule::Nl);
        let r = train_pg(&game, &om, &nl, 32, 8, 3, 1).unwrap();
        assert!(r.rows.iter().all(|row| row.om1.is_some() && row.om2.is_none()));
    }
}
