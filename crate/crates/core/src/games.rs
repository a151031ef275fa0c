//! Two-agent 2x2 iterated matrix games and their memory-1 closed-form values.
//!
//! A memory-1 policy conditions on both agents' previous actions, so each
//! agent is fully described by 5 probabilities: one for the empty start state
//! `s0` and one for each joint outcome of the previous round. Folding `s0`
//! into an initial distribution over the 4 outcome states leaves a 4x4 Markov
//! chain whose discounted value has a closed form
//!
//! ```text
//! V = (1 - gamma) * d0' (I - gamma P)^-1 r
//! ```
//!
//! computed here by a pivoted Gaussian solve that is generic over the numeric
//! type, so [`Jet`](crate::jet::Jet) inputs propagate exact derivatives
//! through the solve.

use crate::jet::{sigmoid_f64, Scalar};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Number of policy states: `s0` plus the four joint outcomes.
pub const N_STATES: usize = 5;
/// Number of joint outcomes per round: CC, CD, DC, DD.
pub const N_OUTCOMES: usize = 4;

/// Logit magnitude at which policies are clamped to avoid numeric overflow.
pub const LOGIT_LIMIT: f64 = 1e4;

/// State index order. The pair is (agent 1 action, agent 2 action); action 0
/// is Cooperate (Heads for matching pennies).
pub const STATE_NAMES: [&str; N_STATES] = ["s0", "cc", "cd", "dc", "dd"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameKind {
    /// Iterated prisoners' dilemma.
    Ipd,
    /// Iterated matching pennies (zero sum).
    Imp,
    /// User-supplied 2x2 payoffs.
    Custom,
}

/// Per-step payoff pair plus discount factor.
#[derive(Clone, Debug)]
pub struct BimatrixGame {
    /// Agent 1 payoff, indexed `[u1][u2]`.
    pub payoff1: [[f64; 2]; 2],
    /// Agent 2 payoff, indexed `[u1][u2]`.
    pub payoff2: [[f64; 2]; 2],
    pub gamma: f64,
    pub kind: GameKind,
}

impl BimatrixGame {
    /// Prisoners' dilemma: (C,C) -> (-1,-1), (C,D) -> (-3,0),
    /// (D,C) -> (0,-3), (D,D) -> (-2,-2); gamma = 0.96.
    pub fn ipd() -> Self {
        BimatrixGame {
            payoff1: [[-1.0, -3.0], [0.0, -2.0]],
            payoff2: [[-1.0, 0.0], [-3.0, -2.0]],
            gamma: 0.96,
            kind: GameKind::Ipd,
        }
    }

    /// Matching pennies: (H,H) -> (+1,-1), (H,T) -> (-1,+1),
    /// (T,H) -> (-1,+1), (T,T) -> (+1,-1); gamma = 0.9.
    pub fn imp() -> Self {
        BimatrixGame {
            payoff1: [[1.0, -1.0], [-1.0, 1.0]],
            payoff2: [[-1.0, 1.0], [1.0, -1.0]],
            gamma: 0.9,
            kind: GameKind::Imp,
        }
    }

    /// A custom 2x2 game with explicit payoffs.
    pub fn custom(payoff1: [[f64; 2]; 2], payoff2: [[f64; 2]; 2], gamma: f64) -> Result<Self> {
        let game = BimatrixGame {
            payoff1,
            payoff2,
            gamma,
            kind: GameKind::Custom,
        };
        game.validate()?;
        Ok(game)
    }

    /// Look a standard game up by CLI name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ipd" => Ok(Self::ipd()),
            "imp" => Ok(Self::imp()),
            other => Err(Error::Config(format!(
                "unknown game '{other}' (expected 'ipd' or 'imp')"
            ))),
        }
    }

    /// Replace the discount factor.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Domain(format!(
                "gamma {} outside [0, 1)",
                self.gamma
            )));
        }
        for row in self.payoff1.iter().chain(self.payoff2.iter()) {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain("non-finite payoff entry".into()));
            }
        }
        Ok(())
    }

    /// Per-outcome reward column for one agent, outcome order CC, CD, DC, DD.
    pub fn outcome_rewards(&self, agent: usize) -> [f64; N_OUTCOMES] {
        let p = if agent == 0 { &self.payoff1 } else { &self.payoff2 };
        [p[0][0], p[0][1], p[1][0], p[1][1]]
    }

    /// Payoff pair for a joint action.
    pub fn reward(&self, u1: usize, u2: usize) -> (f64, f64) {
        (self.payoff1[u1][u2], self.payoff2[u1][u2])
    }

    /// Smallest and largest per-step payoff over both agents.
    pub fn payoff_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in self.payoff1.iter().chain(self.payoff2.iter()) {
            for &x in row {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo, hi)
    }
}

/// One agent's policy: 5 unconstrained logits, sigmoid gives the per-state
/// probability of action 0 (Cooperate / Heads).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyParams {
    pub logits: [f64; N_STATES],
}

impl PolicyParams {
    pub fn new(logits: [f64; N_STATES]) -> Self {
        PolicyParams { logits }
    }

    /// Build from per-state probabilities. Probabilities of exactly 0 or 1
    /// map to the clamp limit rather than infinite logits.
    pub fn from_probs(probs: [f64; N_STATES]) -> Result<Self> {
        let mut logits = [0.0; N_STATES];
        for (l, &p) in logits.iter_mut().zip(&probs) {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
            }
            *l = (p.ln() - (1.0 - p).ln()).clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
        }
        Ok(PolicyParams { logits })
    }

    /// Logits drawn i.i.d. standard normal.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut logits = [0.0; N_STATES];
        for l in logits.iter_mut() {
            *l = rng.sample(StandardNormal);
        }
        PolicyParams { logits }
    }

    /// Per-state action-0 probabilities.
    pub fn probs(&self) -> [f64; N_STATES] {
        sigmoid_probs(&self.logits)
    }

    /// Clamp logits into [-LOGIT_LIMIT, LOGIT_LIMIT]; true if any changed.
    pub fn clamp(&mut self) -> bool {
        let mut clamped = false;
        for l in self.logits.iter_mut() {
            let c = l.clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
            if c != *l || !l.is_finite() {
                *l = if l.is_nan() { 0.0 } else { c };
                clamped = true;
            }
        }
        clamped
    }
}

/// Sigmoid of each logit in a policy table.
pub fn sigmoid_probs(logits: &[f64; N_STATES]) -> [f64; N_STATES] {
    logits.map(sigmoid_f64)
}

/// Initial outcome distribution and 4x4 outcome transition matrix for a pair
/// of per-state action-0 probability tables. Generic so jet-valued
/// probabilities carry derivatives.
pub fn transition_parts<S: Scalar>(
    p1: &[S; N_STATES],
    p2: &[S; N_STATES],
) -> ([S; N_OUTCOMES], [[S; N_OUTCOMES]; N_OUTCOMES]) {
    let one = p1[0].lift(1.0);
    let row = |a: S, b: S| [a * b, a * (one - b), (one - a) * b, (one - a) * (one - b)];
    let d0 = row(p1[0], p2[0]);
    let mut pmat = [[one; N_OUTCOMES]; N_OUTCOMES];
    for s in 0..N_OUTCOMES {
        pmat[s] = row(p1[s + 1], p2[s + 1]);
    }
    (d0, pmat)
}

/// Build the memory-1 chain pieces for explicit probability tables: initial
/// outcome distribution, row-stochastic transition matrix, and both agents'
/// per-outcome rewards.
#[allow(clippy::type_complexity)]
pub fn build_transition(
    game: &BimatrixGame,
    p1: &[f64; N_STATES],
    p2: &[f64; N_STATES],
) -> Result<(
    [f64; N_OUTCOMES],
    [[f64; N_OUTCOMES]; N_OUTCOMES],
    [f64; N_OUTCOMES],
    [f64; N_OUTCOMES],
)> {
    for &p in p1.iter().chain(p2.iter()) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
    }
    let (d0, pmat) = transition_parts(p1, p2);
    Ok((d0, pmat, game.outcome_rewards(0), game.outcome_rewards(1)))
}

/// Solve a 4x4 system for two right-hand sides by Gaussian elimination with
/// partial pivoting on the value part.
fn solve2<S: Scalar>(
    mut a: [[S; N_OUTCOMES]; N_OUTCOMES],
    mut b1: [S; N_OUTCOMES],
    mut b2: [S; N_OUTCOMES],
) -> ([S; N_OUTCOMES], [S; N_OUTCOMES]) {
    let n = N_OUTCOMES;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].primal().abs() > a[pivot][col].primal().abs() {
                pivot = row;
            }
        }
        if pivot != col {
            a.swap(col, pivot);
            b1.swap(col, pivot);
            b2.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b1[row] = b1[row] - factor * b1[col];
            b2[row] = b2[row] - factor * b2[col];
        }
    }
    let mut x1 = b1;
    let mut x2 = b2;
    for row in (0..n).rev() {
        for k in row + 1..n {
            x1[row] = x1[row] - a[row][k] * x1[k];
            x2[row] = x2[row] - a[row][k] * x2[k];
        }
        x1[row] = x1[row] / a[row][row];
        x2[row] = x2[row] / a[row][row];
    }
    (x1, x2)
}

fn value_pair<S: Scalar>(
    game: &BimatrixGame,
    theta1: &[S; N_STATES],
    theta2: &[S; N_STATES],
    normalised: bool,
) -> (S, S) {
    let p1 = theta1.map(|t| t.sigmoid());
    let p2 = theta2.map(|t| t.sigmoid());
    let (d0, pmat) = transition_parts(&p1, &p2);
    let one = d0[0].lift(1.0);
    let gamma = game.gamma;
    // A = I - gamma * P
    let mut a = [[one; N_OUTCOMES]; N_OUTCOMES];
    for i in 0..N_OUTCOMES {
        for j in 0..N_OUTCOMES {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i][j] = pmat[i][j].scale(-gamma) + one.scale(id);
        }
    }
    let r1 = game.outcome_rewards(0).map(|r| one.scale(r));
    let r2 = game.outcome_rewards(1).map(|r| one.scale(r));
    let (x1, x2) = solve2(a, r1, r2);
    let mut v1 = d0[0] * x1[0];
    let mut v2 = d0[0] * x2[0];
    for i in 1..N_OUTCOMES {
        v1 = v1 + d0[i] * x1[i];
        v2 = v2 + d0[i] * x2[i];
    }
    if normalised {
        (v1.scale(1.0 - gamma), v2.scale(1.0 - gamma))
    } else {
        (v1, v2)
    }
}

/// Normalised expected discounted return pair `(V1, V2)` for policy logits.
/// Generic over the numeric type so jets propagate derivatives.
pub fn exact_value<S: Scalar>(
    game: &BimatrixGame,
    theta1: &[S; N_STATES],
    theta2: &[S; N_STATES],
) -> (S, S) {
    value_pair(game, theta1, theta2, true)
}

/// As [`exact_value`] but without the `(1 - gamma)` normalisation.
pub fn exact_value_raw<S: Scalar>(
    game: &BimatrixGame,
    theta1: &[S; N_STATES],
    theta2: &[S; N_STATES],
) -> (S, S) {
    value_pair(game, theta1, theta2, false)
}

/// Normalised discounted return of a finite reward sequence:
/// `(1 - gamma) * sum_t gamma^t r_t`. Empty sequences yield 0.
pub fn normalised_return(rewards: &[f64], gamma: f64) -> f64 {
    assert!((0.0..1.0).contains(&gamma), "gamma {gamma} outside [0, 1)");
    let tail = rewards.iter().rev().fold(0.0, |acc, &r| r + gamma * acc);
    (1.0 - gamma) * tail
}
