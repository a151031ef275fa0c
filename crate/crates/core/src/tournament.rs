//! Round-robin tournament between all learner types.
//!
//! Learners persist across the episodes of a match. Q-style learners update
//! on every step; gradient learners keep their policy fixed within an
//! episode and update between episodes, treating the previous episode as
//! their batch. Exact learners need opponent parameters: against parametric
//! opponents they read the true logits, against the tabular learners they
//! substitute a maximum-likelihood fit of the previous episode's actions.

use crate::baselines::{JointQ, NaiveQ, Phc, TabularConfig, WolfPhc};
use crate::exact::{assemble_update, value_derivatives, ExactRule, LearnerConfig};
use crate::games::{BimatrixGame, PolicyParams, N_STATES};
use crate::jet::sigmoid_f64;
use crate::opponent::fit;
use crate::rollout::{lola_pg_correction, pg_gradient, Baseline, EpisodeBatch};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Every learner that can enter a tournament.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    NlQ,
    JalQ,
    Phc,
    Wolf,
    NlEx,
    LolaEx,
    NlPg,
    LolaPg,
    LolaOm,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 9] = [
        LearnerKind::NlQ,
        LearnerKind::JalQ,
        LearnerKind::Phc,
        LearnerKind::Wolf,
        LearnerKind::NlEx,
        LearnerKind::LolaEx,
        LearnerKind::NlPg,
        LearnerKind::LolaPg,
        LearnerKind::LolaOm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::NlQ => "nl-q",
            LearnerKind::JalQ => "jal-q",
            LearnerKind::Phc => "phc",
            LearnerKind::Wolf => "wolf",
            LearnerKind::NlEx => "nl-ex",
            LearnerKind::LolaEx => "lola-ex",
            LearnerKind::NlPg => "nl-pg",
            LearnerKind::LolaPg => "lola-pg",
            LearnerKind::LolaOm => "lola-om",
        }
    }

    pub fn parse(name: &str) -> Result<LearnerKind> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown learner '{name}'")))
    }
}

/// Step sizes and hyperparameters shared by every match of a tournament.
#[derive(Clone, Debug)]
pub struct MatchConfig {
    pub exact_delta: f64,
    pub exact_eta: f64,
    pub pg_delta: f64,
    pub pg_eta: f64,
    pub om_smoothing: f64,
    pub tabular: TabularConfig,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            exact_delta: 1.0,
            exact_eta: 2.0,
            pg_delta: 0.005,
            pg_eta: 1.0,
            om_smoothing: 1.0,
            tabular: TabularConfig::default(),
        }
    }
}

/// Both sides' per-episode normalised returns for one match.
#[derive(Clone, Debug)]
pub struct MatchResult {
    pub first: LearnerKind,
    pub second: LearnerKind,
    pub seed: u64,
    pub episodes: usize,
    pub steps: usize,
    pub returns1: Vec<f64>,
    pub returns2: Vec<f64>,
}

impl MatchResult {
    pub fn mean_returns(&self) -> (f64, f64) {
        let n = self.episodes as f64;
        (
            self.returns1.iter().sum::<f64>() / n,
            self.returns2.iter().sum::<f64>() / n,
        )
    }
}

/// Mean normalised return of one learner over all its matches, with a 95%
/// confidence interval over per-match means.
#[derive(Clone, Debug)]
pub struct Standing {
    pub name: &'static str,
    pub mean: f64,
    pub ci95: f64,
    pub samples: usize,
}

trait MatchAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize;
    /// Step observation: own action, opponent action, own reward.
    fn observe(
        &mut self,
        state: usize,
        own: usize,
        opp: usize,
        reward: f64,
        next_state: usize,
        rng: &mut ChaCha8Rng,
    );
    /// Episode observation (the shared trace), plus the opponent's true
    /// logits when it is a parametric learner.
    fn end_episode(
        &mut self,
        trace: &EpisodeBatch,
        opp_logits: Option<[f64; N_STATES]>,
    ) -> Result<()>;
    /// Policy logits, for parametric learners.
    fn logits(&self) -> Option<[f64; N_STATES]>;
}

struct QAgent(NaiveQ);

impl MatchAgent for QAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0.act(state, rng)
    }
    fn observe(&mut self, s: usize, own: usize, _opp: usize, r: f64, s2: usize, _: &mut ChaCha8Rng) {
        self.0.update(s, own, r, s2);
    }
    fn end_episode(&mut self, _: &EpisodeBatch, _: Option<[f64; N_STATES]>) -> Result<()> {
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        None
    }
}

struct JalAgent(JointQ);

impl MatchAgent for JalAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0.act(state, rng)
    }
    fn observe(&mut self, s: usize, own: usize, opp: usize, r: f64, s2: usize, _: &mut ChaCha8Rng) {
        self.0.update(s, own, opp, r, s2);
    }
    fn end_episode(&mut self, _: &EpisodeBatch, _: Option<[f64; N_STATES]>) -> Result<()> {
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        None
    }
}

struct PhcAgent(Phc);

impl MatchAgent for PhcAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0.act(state, rng)
    }
    fn observe(&mut self, s: usize, own: usize, _opp: usize, r: f64, s2: usize, rng: &mut ChaCha8Rng) {
        self.0.update(s, own, r, s2, rng);
    }
    fn end_episode(&mut self, _: &EpisodeBatch, _: Option<[f64; N_STATES]>) -> Result<()> {
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        None
    }
}

struct WolfAgent(WolfPhc);

impl MatchAgent for WolfAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        self.0.act(state, rng)
    }
    fn observe(&mut self, s: usize, own: usize, _opp: usize, r: f64, s2: usize, rng: &mut ChaCha8Rng) {
        self.0.update(s, own, r, s2, rng);
    }
    fn end_episode(&mut self, _: &EpisodeBatch, _: Option<[f64; N_STATES]>) -> Result<()> {
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        None
    }
}

fn sample_action(logits: &[f64; N_STATES], state: usize, rng: &mut ChaCha8Rng) -> usize {
    (rng.random::<f64>() >= sigmoid_f64(logits[state])) as usize
}

struct ExactAgent {
    seat: usize,
    game: BimatrixGame,
    theta: PolicyParams,
    cfg: LearnerConfig,
    om_smoothing: f64,
}

impl MatchAgent for ExactAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        sample_action(&self.theta.logits, state, rng)
    }
    fn observe(&mut self, _: usize, _: usize, _: usize, _: f64, _: usize, _: &mut ChaCha8Rng) {}
    fn end_episode(
        &mut self,
        trace: &EpisodeBatch,
        opp_logits: Option<[f64; N_STATES]>,
    ) -> Result<()> {
        let opp = match opp_logits {
            Some(l) => l,
            None => fit(trace, 1 - self.seat, self.om_smoothing)?.fitted_logits,
        };
        let (th1, th2) = if self.seat == 0 {
            (self.theta, PolicyParams::new(opp))
        } else {
            (PolicyParams::new(opp), self.theta)
        };
        let d = value_derivatives(&self.game, &th1, &th2, self.cfg.rule.order());
        let f = assemble_update(&d, self.seat, self.cfg.rule, self.cfg.delta, self.cfg.eta);
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("exact tournament update".into()));
        }
        for i in 0..N_STATES {
            self.theta.logits[i] += f[i];
        }
        self.theta.clamp();
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        Some(self.theta.logits)
    }
}

struct PgAgent {
    seat: usize,
    theta: PolicyParams,
    baseline: Baseline,
    /// None = naive; Some(use_om) = LOLA with or without forced modeling.
    lola: Option<bool>,
    delta: f64,
    eta: f64,
    om_smoothing: f64,
}

impl MatchAgent for PgAgent {
    fn act(&mut self, state: usize, rng: &mut ChaCha8Rng) -> usize {
        sample_action(&self.theta.logits, state, rng)
    }
    fn observe(&mut self, _: usize, _: usize, _: usize, _: f64, _: usize, _: &mut ChaCha8Rng) {}
    fn end_episode(
        &mut self,
        trace: &EpisodeBatch,
        opp_logits: Option<[f64; N_STATES]>,
    ) -> Result<()> {
        self.baseline.update_from(trace, self.seat, 1.0);
        let g = pg_gradient(trace, self.seat, &self.theta.logits, &self.baseline);
        let mut f = g.map(|x| self.delta * x);
        if let Some(force_om) = self.lola {
            let opp = match (force_om, opp_logits) {
                (false, Some(l)) => l,
                _ => fit(trace, 1 - self.seat, self.om_smoothing)?.fitted_logits,
            };
            let corr =
                lola_pg_correction(trace, self.seat, &self.theta.logits, &opp, &self.baseline);
            for i in 0..N_STATES {
                f[i] += self.delta * self.eta * corr[i];
            }
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("pg tournament update".into()));
        }
        for i in 0..N_STATES {
            self.theta.logits[i] += f[i];
        }
        self.theta.clamp();
        Ok(())
    }
    fn logits(&self) -> Option<[f64; N_STATES]> {
        Some(self.theta.logits)
    }
}

fn make_agent(
    kind: LearnerKind,
    seat: usize,
    game: &BimatrixGame,
    cfg: &MatchConfig,
    rng: &mut ChaCha8Rng,
) -> Box<dyn MatchAgent> {
    let gamma = game.gamma;
    match kind {
        LearnerKind::NlQ => Box::new(QAgent(NaiveQ::new(&cfg.tabular, gamma))),
        LearnerKind::JalQ => Box::new(JalAgent(JointQ::new(&cfg.tabular, gamma))),
        LearnerKind::Phc => Box::new(PhcAgent(Phc::new(&cfg.tabular, gamma))),
        LearnerKind::Wolf => Box::new(WolfAgent(WolfPhc::new(&cfg.tabular, gamma))),
        LearnerKind::NlEx | LearnerKind::LolaEx => Box::new(ExactAgent {
            seat,
            game: game.clone(),
            theta: PolicyParams::random(rng),
            cfg: LearnerConfig {
                rule: if kind == LearnerKind::NlEx {
                    ExactRule::Nl
                } else {
                    ExactRule::Lola
                },
                delta: cfg.exact_delta,
                eta: cfg.exact_eta,
            },
            om_smoothing: cfg.om_smoothing,
        }),
        LearnerKind::NlPg | LearnerKind::LolaPg | LearnerKind::LolaOm => Box::new(PgAgent {
            seat,
            theta: PolicyParams::random(rng),
            baseline: Baseline::zero(),
            lola: match kind {
                LearnerKind::NlPg => None,
                LearnerKind::LolaPg => Some(false),
                _ => Some(true),
            },
            delta: cfg.pg_delta,
            eta: cfg.pg_eta,
            om_smoothing: cfg.om_smoothing,
        }),
    }
}

/// Play one match: `episodes` episodes of `steps` steps, learners persisting
/// throughout.
pub fn run_match(
    game: &BimatrixGame,
    first: LearnerKind,
    second: LearnerKind,
    episodes: usize,
    steps: usize,
    seed: u64,
    cfg: &MatchConfig,
) -> Result<MatchResult> {
    if episodes == 0 || steps == 0 {
        return Err(Error::Config("episodes and steps must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = make_agent(first, 0, game, cfg, &mut rng);
    let mut b = make_agent(second, 1, game, cfg, &mut rng);
    let mut returns1 = Vec::with_capacity(episodes);
    let mut returns2 = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut actions1 = Vec::with_capacity(steps);
        let mut actions2 = Vec::with_capacity(steps);
        let mut state = 0usize;
        for _ in 0..steps {
            let u1 = a.act(state, &mut rng);
            let u2 = b.act(state, &mut rng);
            let (r1, r2) = game.reward(u1, u2);
            let next = 1 + 2 * u1 + u2;
            a.observe(state, u1, u2, r1, next, &mut rng);
            b.observe(state, u2, u1, r2, next, &mut rng);
            actions1.push(u1 as u8);
            actions2.push(u2 as u8);
            state = next;
        }
        let trace = EpisodeBatch::from_actions(game, actions1, actions2, 1, steps);
        let (n1, n2) = trace.mean_normalised_returns();
        returns1.push(n1);
        returns2.push(n2);
        // Snapshot both parameter sets before either agent updates.
        let la = a.logits();
        let lb = b.logits();
        a.end_episode(&trace, lb)?;
        b.end_episode(&trace, la)?;
    }
    Ok(MatchResult {
        first,
        second,
        seed,
        episodes,
        steps,
        returns1,
        returns2,
    })
}

fn mix_seed(seed: u64, i: usize, j: usize) -> u64 {
    // splitmix64 over (seed, pair index)
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((i as u64) << 32 | j as u64);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Round-robin over every unordered roster pair (self-pairings included),
/// once per seed. Matches run in parallel; results are ordered by
/// (seed, pair) regardless of scheduling.
pub fn run_tournament(
    game: &BimatrixGame,
    roster: &[LearnerKind],
    episodes: usize,
    steps: usize,
    seeds: &[u64],
    cfg: &MatchConfig,
) -> Result<(Vec<MatchResult>, Vec<Standing>)> {
    if roster.len() < 2 {
        return Err(Error::Config("roster needs at least 2 learners".into()));
    }
    let mut jobs = Vec::new();
    for &seed in seeds {
        for i in 0..roster.len() {
            for j in i..roster.len() {
                jobs.push((seed, i, j));
            }
        }
    }
    let results: Result<Vec<MatchResult>> = jobs
        .par_iter()
        .map(|&(seed, i, j)| {
            run_match(
                game,
                roster[i],
                roster[j],
                episodes,
                steps,
                mix_seed(seed, i, j),
                cfg,
            )
        })
        .collect();
    let results = results?;
    let table = standings(&results);
    Ok((results, table))
}

/// Aggregate per-match mean returns into per-learner standings, best first.
pub fn standings(results: &[MatchResult]) -> Vec<Standing> {
    let mut samples: Vec<(&'static str, Vec<f64>)> = Vec::new();
    let mut push = |name: &'static str, value: f64| {
        match samples.iter_mut().find(|(n, _)| *n == name) {
            Some((_, v)) => v.push(value),
            None => samples.push((name, vec![value])),
        }
    };
    for r in results {
        let (m1, m2) = r.mean_returns();
        push(r.first.name(), m1);
        push(r.second.name(), m2);
    }
    let mut rows: Vec<Standing> = samples
        .into_iter()
        .map(|(name, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / (n - 1.0).max(1.0);
            Standing {
                name,
                mean,
                ci95: 1.96 * (var / n).sqrt(),
                samples: v.len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.mean.partial_cmp(&a.mean).unwrap());
    rows
}
