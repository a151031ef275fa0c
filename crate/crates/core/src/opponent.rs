//! Maximum-likelihood opponent modeling.
//!
//! The opponent's tabular memory-1 policy is inferred from its observed
//! state-action pairs. With Laplace smoothing `s`, the per-state estimate is
//! `(action-0 count + s) / (visits + 2 s)`, the exact MLE of the tabular
//! model under the smoothing prior. The fitted logits then stand in for the
//! opponent's true parameters in the LOLA update.

use crate::games::N_STATES;
use crate::rollout::{lola_pg_step, Baseline, EpisodeBatch};
use crate::{Error, Result};

/// Per-state (action-0 count, visit count) pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StateCounts {
    pub action0: [f64; N_STATES],
    pub visits: [f64; N_STATES],
}

impl StateCounts {
    /// Count one agent's actions over a batch.
    pub fn from_batch(batch: &EpisodeBatch, agent: usize) -> StateCounts {
        let mut counts = StateCounts::default();
        let actions = batch.actions(agent);
        for (i, &s) in batch.states.iter().enumerate() {
            let s = s as usize;
            counts.visits[s] += 1.0;
            if actions[i] == 0 {
                counts.action0[s] += 1.0;
            }
        }
        counts
    }

    /// Accumulate another window of counts.
    pub fn merge(&mut self, other: &StateCounts) {
        for s in 0..N_STATES {
            self.action0[s] += other.action0[s];
            self.visits[s] += other.visits[s];
        }
    }
}

/// Fitted tabular model of an opponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpponentModel {
    pub counts: StateCounts,
    pub smoothing: f64,
    pub fitted_logits: [f64; N_STATES],
}

impl OpponentModel {
    /// Smoothed per-state probability estimates.
    pub fn fitted_probs(&self) -> [f64; N_STATES] {
        crate::games::sigmoid_probs(&self.fitted_logits)
    }
}

/// Turn accumulated counts into fitted logits.
pub fn fit_from_counts(counts: &StateCounts, smoothing: f64) -> Result<OpponentModel> {
    if smoothing.is_nan() || smoothing < 0.0 {
        return Err(Error::Domain(format!("smoothing {smoothing} must be >= 0")));
    }
    let mut fitted_logits = [0.0; N_STATES];
    for s in 0..N_STATES {
        let p = (counts.action0[s] + smoothing) / (counts.visits[s] + 2.0 * smoothing);
        let logit = p.ln() - (1.0 - p).ln();
        if !logit.is_finite() {
            return Err(Error::NonFinite(format!(
                "state {s}: estimate {p} from {}/{} visits with smoothing {smoothing} \
                 gives an infinite logit",
                counts.action0[s], counts.visits[s]
            )));
        }
        fitted_logits[s] = logit;
    }
    Ok(OpponentModel {
        counts: *counts,
        smoothing,
        fitted_logits,
    })
}

/// Fit one agent's policy from the most recent batch.
pub fn fit(batch: &EpisodeBatch, agent: usize, smoothing: f64) -> Result<OpponentModel> {
    fit_from_counts(&StateCounts::from_batch(batch, agent), smoothing)
}

/// LOLA update for agent 1 with agent 2's parameters replaced by the
/// maximum-likelihood fit from the same batch.
pub fn lola_om_step(
    batch: &EpisodeBatch,
    theta1: &[f64; N_STATES],
    baseline1: &Baseline,
    delta: f64,
    eta: f64,
    smoothing: f64,
) -> Result<[f64; N_STATES]> {
    let model = fit(batch, 1, smoothing)?;
    Ok(lola_pg_step(
        batch,
        theta1,
        &model.fitted_logits,
        baseline1,
        delta,
        eta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{BimatrixGame, PolicyParams};
    use crate::rollout::rollout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smoothed_ratio_matches_hand_counts() {
        let mut counts = StateCounts::default();
        // State 1 (CC): 3 cooperations out of 4 visits, smoothing 1 -> 4/6.
        counts.visits[1] = 4.0;
        counts.action0[1] = 3.0;
        let model = fit_from_counts(&counts, 1.0).unwrap();
        let probs = model.fitted_probs();
        assert!((probs[1] - 4.0 / 6.0).abs() < 1e-12);
        // Unvisited states sit at the prior.
        assert!((probs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn always_cooperating_opponent() {
        let mut counts = StateCounts::default();
        for s in 0..N_STATES {
            counts.visits[s] = 100.0;
            counts.action0[s] = 100.0;
        }
        let model = fit_from_counts(&counts, 1.0).unwrap();
        for p in model.fitted_probs() {
            assert!((p - 101.0 / 102.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_smoothing_with_deterministic_state_fails() {
        let mut counts = StateCounts::default();
        counts.visits[0] = 10.0;
        counts.action0[0] = 10.0;
        assert!(matches!(
            fit_from_counts(&counts, 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn zero_smoothing_with_unvisited_state_fails() {
        let counts = StateCounts::default();
        assert!(fit_from_counts(&counts, 0.0).is_err());
    }

    #[test]
    fn more_smoothing_pulls_estimates_toward_half() {
        let mut counts = StateCounts::default();
        for s in 0..N_STATES {
            counts.visits[s] = 40.0;
            counts.action0[s] = if s % 2 == 0 { 33.0 } else { 4.0 };
        }
        let weak = fit_from_counts(&counts, 0.5).unwrap().fitted_probs();
        let strong = fit_from_counts(&counts, 5.0).unwrap().fitted_probs();
        for s in 0..N_STATES {
            assert!((strong[s] - 0.5).abs() < (weak[s] - 0.5).abs());
        }
    }

    #[test]
    fn substitution_identity_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let game = BimatrixGame::ipd();
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let batch = rollout(&game, &t1, &t2, 64, 32, &mut rng);
        let baseline = Baseline::zero();
        let model = fit(&batch, 1, 1.0).unwrap();
        let om = lola_om_step(&batch, &t1.logits, &baseline, 0.005, 1.0, 1.0).unwrap();
        let pg = lola_pg_step(&batch, &t1.logits, &model.fitted_logits, &baseline, 0.005, 1.0);
        assert_eq!(om, pg);
    }

    #[test]
    fn estimates_converge_to_generating_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let game = BimatrixGame::ipd();
        let t1 = PolicyParams::new([0.0; N_STATES]);
        let t2 = PolicyParams::new([0.6, -0.4, 1.0, 0.2, -0.8]);
        let truth = t2.probs();
        let mut ok = 0;
        let trials = 100;
        for _ in 0..trials {
            let batch = rollout(&game, &t1, &t2, 200, 50, &mut rng);
            let model = fit(&batch, 1, 1.0).unwrap();
            let probs = model.fitted_probs();
            let within = (0..N_STATES).all(|s| {
                let n = model.counts.visits[s].max(1.0);
                let se = (truth[s] * (1.0 - truth[s]) / n).sqrt();
                // Smoothing shifts the estimate by at most ~1/n.
                (probs[s] - truth[s]).abs() <= 3.0 * se + 2.0 / n
            });
            ok += within as usize;
        }
        assert!(ok >= 95, "only {ok}/{trials} trials within 3 sigma");
    }

    // With a large batch and an interior opponent policy, the fitted-model
    // update agrees with the true-parameter update up to sampling error.
    #[test]
    fn om_update_tracks_true_parameter_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let game = BimatrixGame::ipd();
        let t1 = PolicyParams::new([0.2, -0.3, 0.5, -0.1, 0.4]);
        let t2 = PolicyParams::new([-0.4, 0.6, 0.1, -0.2, 0.3]);
        let baseline = Baseline::zero();
        let (delta, eta) = (0.005, 1.0);
        let mut diffs = Vec::new();
        let mut scales = Vec::new();
        for _ in 0..20 {
            let batch = rollout(&game, &t1, &t2, 2000, 60, &mut rng);
            let om = lola_om_step(&batch, &t1.logits, &baseline, delta, eta, 1.0).unwrap();
            let pg = crate::rollout::lola_pg_step(&batch, &t1.logits, &t2.logits, &baseline, delta, eta);
            let d: f64 = (0..N_STATES).map(|i| (om[i] - pg[i]).powi(2)).sum::<f64>().sqrt();
            let s: f64 = (0..N_STATES).map(|i| pg[i].powi(2)).sum::<f64>().sqrt();
            diffs.push(d);
            scales.push(s);
        }
        let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let mean_scale = scales.iter().sum::<f64>() / scales.len() as f64;
        // The model error shows up only through the scores; it stays a
        // fraction of the update magnitude at this batch size.
        assert!(
            mean_diff < 0.5 * mean_scale,
            "om deviation {mean_diff} vs update scale {mean_scale}"
        );
    }

    #[test]
    fn unvisited_states_stay_finite_with_smoothing() {
        let game = BimatrixGame::ipd();
        // Deterministic defectors never visit cooperation states.
        let t = PolicyParams::from_probs([0.0; N_STATES]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let batch = rollout(&game, &t, &t, 16, 16, &mut rng);
        let update =
            lola_om_step(&batch, &t.logits, &Baseline::zero(), 0.005, 1.0, 1.0).unwrap();
        assert!(update.iter().all(|x| x.is_finite()));
    }
}
