//! Exact learning rules over the closed-form value function.
//!
//! All ten logits (both agents) are seeded jointly, so one jet evaluation of
//! the value pair yields every gradient, Hessian and third-order block. The
//! update rules are then plain tensor contractions:
//!
//! - NL-Ex ascends the own-value gradient.
//! - LOLA-Ex adds the shaping correction `(grad_2 V1)' grad_1 grad_2 V2`,
//!   where the dependency of `grad_2 V1` on the own parameters is treated as
//!   constant. With forward-mode extraction this is automatic: each block is
//!   a fixed tensor before the product.
//! - Second-order LOLA assumes the opponent itself takes a full first-order
//!   LOLA step and differentiates through it, which brings in third-order
//!   derivatives.

use crate::games::{exact_value, exact_value_raw, BimatrixGame, PolicyParams, N_STATES};
use crate::jet::Jet;
use crate::record::{RunRecord, RunRow};
use crate::{Error, Result};

const N_VARS: usize = 2 * N_STATES;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactRule {
    /// Naive gradient ascent on the own value.
    Nl,
    /// First-order LOLA.
    Lola,
    /// Second-order LOLA (assumes a first-order LOLA opponent).
    Lola2,
}

impl ExactRule {
    /// Jet order needed to evaluate the rule.
    pub fn order(&self) -> usize {
        match self {
            ExactRule::Nl => 1,
            ExactRule::Lola => 2,
            ExactRule::Lola2 => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExactRule::Nl => "nl-ex",
            ExactRule::Lola => "lola-ex",
            ExactRule::Lola2 => "lola2-ex",
        }
    }
}

/// Step sizes for an exact learner. `delta` scales the whole update, `eta`
/// the assumed opponent step inside the correction terms.
#[derive(Clone, Copy, Debug)]
pub struct LearnerConfig {
    pub delta: f64,
    pub eta: f64,
    pub rule: ExactRule,
}

impl LearnerConfig {
    pub fn new(rule: ExactRule, delta: f64, eta: f64) -> Self {
        LearnerConfig { rule, delta, eta }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::Config(format!("delta {} must be > 0", self.delta)));
        }
        if self.rule != ExactRule::Nl && (self.eta.is_nan() || self.eta <= 0.0) {
            return Err(Error::Config(format!(
                "eta {} must be > 0 for {}",
                self.eta,
                self.rule.name()
            )));
        }
        Ok(())
    }
}

/// Value pair and its derivative tensors over the 10 joint variables
/// (variables 0..5 are agent 1's logits, 5..10 agent 2's).
pub struct ValueDerivatives {
    pub order: usize,
    pub v1: f64,
    pub v2: f64,
    pub g1: [f64; N_VARS],
    pub g2: [f64; N_VARS],
    pub h1: [[f64; N_VARS]; N_VARS],
    pub h2: [[f64; N_VARS]; N_VARS],
    pub t1: [[[f64; N_VARS]; N_VARS]; N_VARS],
    pub t2: [[[f64; N_VARS]; N_VARS]; N_VARS],
}

impl ValueDerivatives {
    pub fn zero(order: usize) -> Self {
        ValueDerivatives {
            order,
            v1: 0.0,
            v2: 0.0,
            g1: [0.0; N_VARS],
            g2: [0.0; N_VARS],
            h1: [[0.0; N_VARS]; N_VARS],
            h2: [[0.0; N_VARS]; N_VARS],
            t1: [[[0.0; N_VARS]; N_VARS]; N_VARS],
            t2: [[[0.0; N_VARS]; N_VARS]; N_VARS],
        }
    }
}

/// Evaluate the value pair with jointly seeded jets and unpack every
/// derivative block up to `order`.
///
/// The learning rules differentiate the raw discounted value (the quantity
/// the agents maximise); the `(1 - gamma)` normalisation is applied only
/// when values are reported.
pub fn value_derivatives(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    order: usize,
) -> ValueDerivatives {
    let mut vals = [0.0; N_VARS];
    vals[..N_STATES].copy_from_slice(&theta1.logits);
    vals[N_STATES..].copy_from_slice(&theta2.logits);
    let jets = Jet::seed_variables(&vals, order);
    let j1: [Jet; N_STATES] = jets[..N_STATES].try_into().unwrap();
    let j2: [Jet; N_STATES] = jets[N_STATES..].try_into().unwrap();
    let (jv1, jv2) = exact_value_raw(game, &j1, &j2);

    let mut d = ValueDerivatives::zero(order);
    d.v1 = jv1.value();
    d.v2 = jv2.value();
    for i in 0..N_VARS {
        d.g1[i] = jv1.grad(i);
        d.g2[i] = jv2.grad(i);
    }
    if order >= 2 {
        for i in 0..N_VARS {
            for j in i..N_VARS {
                d.h1[i][j] = jv1.hess(i, j);
                d.h1[j][i] = d.h1[i][j];
                d.h2[i][j] = jv2.hess(i, j);
                d.h2[j][i] = d.h2[i][j];
            }
        }
    }
    if order >= 3 {
        for i in 0..N_VARS {
            for j in i..N_VARS {
                for k in j..N_VARS {
                    let a = jv1.third(i, j, k);
                    let b = jv2.third(i, j, k);
                    for perm in [[i, j, k], [i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                        d.t1[perm[0]][perm[1]][perm[2]] = a;
                        d.t2[perm[0]][perm[1]][perm[2]] = b;
                    }
                }
            }
        }
    }
    d
}

/// Assemble one agent's update from a derivative bundle. `agent` is 0 or 1.
/// Separated from the jet evaluation so the rules can be checked against
/// hand-built synthetic derivatives.
pub fn assemble_update(
    d: &ValueDerivatives,
    agent: usize,
    rule: ExactRule,
    delta: f64,
    eta: f64,
) -> [f64; N_STATES] {
    assert!(agent < 2);
    assert!(d.order >= rule.order(), "derivative order too low for rule");
    let own = agent * N_STATES;
    let opp = (1 - agent) * N_STATES;
    // Tensors of the updating agent's own value and of the opponent's value.
    let (g_own, g_opp) = if agent == 0 { (&d.g1, &d.g2) } else { (&d.g2, &d.g1) };
    let (h_own, h_opp) = if agent == 0 { (&d.h1, &d.h2) } else { (&d.h2, &d.h1) };
    let t_own = if agent == 0 { &d.t1 } else { &d.t2 };

    let mut f = [0.0; N_STATES];
    for i in 0..N_STATES {
        f[i] = delta * g_own[own + i];
    }
    match rule {
        ExactRule::Nl => {}
        ExactRule::Lola => {
            // delta * eta * (grad_opp V_own)' grad_own grad_opp V_opp
            for i in 0..N_STATES {
                let mut corr = 0.0;
                for j in 0..N_STATES {
                    corr += h_opp[own + i][opp + j] * g_own[opp + j];
                }
                f[i] += delta * eta * corr;
            }
        }
        ExactRule::Lola2 => {
            // The opponent's assumed step is its full first-order LOLA update
            //   dtheta_j = delta * dV_opp/dopp_j
            //            + delta * eta * sum_k d2V_own/dopp_j down_k * dV_opp/down_k
            // and the rule is the own-gradient of the first-order expansion
            // V_own + dtheta' grad_opp V_own with grad_opp V_own held fixed.
            for i in 0..N_STATES {
                let mut corr = 0.0;
                for j in 0..N_STATES {
                    let mut d_dtheta = delta * h_opp[own + i][opp + j];
                    let mut second = 0.0;
                    for k in 0..N_STATES {
                        second += t_own[own + i][opp + j][own + k] * g_opp[own + k]
                            + h_own[opp + j][own + k] * h_opp[own + k][own + i];
                    }
                    d_dtheta += delta * eta * second;
                    corr += d_dtheta * g_own[opp + j];
                }
                f[i] += delta * corr;
            }
        }
    }
    f
}

fn check_finite(f: &[f64; N_STATES], rule: ExactRule) -> Result<()> {
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{} update {:?}", rule.name(), f)));
    }
    Ok(())
}

/// Naive-learner update for agent 1: `delta * grad_1 V1`.
pub fn nl_step(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    cfg: &LearnerConfig,
) -> Result<[f64; N_STATES]> {
    let d = value_derivatives(game, theta1, theta2, 1);
    let f = assemble_update(&d, 0, ExactRule::Nl, cfg.delta, cfg.eta);
    check_finite(&f, ExactRule::Nl)?;
    Ok(f)
}

/// First-order LOLA update for agent 1.
pub fn lola_step(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    cfg: &LearnerConfig,
) -> Result<[f64; N_STATES]> {
    let d = value_derivatives(game, theta1, theta2, 2);
    let f = assemble_update(&d, 0, ExactRule::Lola, cfg.delta, cfg.eta);
    check_finite(&f, ExactRule::Lola)?;
    Ok(f)
}

/// Second-order LOLA update for agent 1.
pub fn lola2_step(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    cfg: &LearnerConfig,
) -> Result<[f64; N_STATES]> {
    let d = value_derivatives(game, theta1, theta2, 3);
    let f = assemble_update(&d, 0, ExactRule::Lola2, cfg.delta, cfg.eta);
    check_finite(&f, ExactRule::Lola2)?;
    Ok(f)
}

/// Both agents' updates from the same `(theta1, theta2)`, evaluated once.
pub fn step_pair(
    game: &BimatrixGame,
    theta1: &PolicyParams,
    theta2: &PolicyParams,
    cfg1: &LearnerConfig,
    cfg2: &LearnerConfig,
) -> Result<([f64; N_STATES], [f64; N_STATES])> {
    let order = cfg1.rule.order().max(cfg2.rule.order());
    let d = value_derivatives(game, theta1, theta2, order);
    let f1 = assemble_update(&d, 0, cfg1.rule, cfg1.delta, cfg1.eta);
    let f2 = assemble_update(&d, 1, cfg2.rule, cfg2.delta, cfg2.eta);
    check_finite(&f1, cfg1.rule)?;
    check_finite(&f2, cfg2.rule)?;
    Ok((f1, f2))
}

/// Standard-normal initial policies for a numbered run. Training commands,
/// the exploitability table and the acceptance checks all derive initial
/// conditions this way, so a seed identifies a run everywhere.
pub fn init_pair(seed: u64) -> (PolicyParams, PolicyParams) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let t1 = PolicyParams::random(&mut rng);
    let t2 = PolicyParams::random(&mut rng);
    (t1, t2)
}

/// Train a pair of exact learners with simultaneous updates.
///
/// Both updates at iteration `i` are computed from the same `(theta1,
/// theta2)` and applied together. Logits exceeding the clamp limit are
/// clamped and the run is flagged as diverged but continues. One history row
/// is recorded per iteration, holding the post-update policies and their
/// exact normalised values.
pub fn train_exact(
    game: &BimatrixGame,
    init1: PolicyParams,
    init2: PolicyParams,
    cfg1: &LearnerConfig,
    cfg2: &LearnerConfig,
    iterations: usize,
    seed: u64,
) -> Result<RunRecord> {
    let mut theta1 = init1;
    let mut theta2 = init2;
    let mut rows = Vec::with_capacity(iterations);
    let mut diverged = false;
    for iter in 0..iterations {
        let (f1, f2) = step_pair(game, &theta1, &theta2, cfg1, cfg2)?;
        for i in 0..N_STATES {
            theta1.logits[i] += f1[i];
            theta2.logits[i] += f2[i];
        }
        diverged |= theta1.clamp();
        diverged |= theta2.clamp();
        let (v1, v2) = exact_value(game, &theta1.logits, &theta2.logits);
        rows.push(RunRow {
            iteration: iter + 1,
            v1,
            v2,
            p1: theta1.probs(),
            p2: theta2.probs(),
            grad_norm: None,
            om1: None,
            om2: None,
            diverged,
        });
    }
    Ok(RunRecord { seed, rows })
}
