//! Experiment configuration: JSON files with flat keys, overridden by CLI
//! flags. Every emitted file embeds the fully resolved configuration as
//! comment lines, so outputs are self-describing.

use anyhow::{bail, Context};
use lola_core::exact::{ExactRule, LearnerConfig};
use lola_core::games::{BimatrixGame, GameKind};
use lola_core::rollout::{PgConfig, PgRule};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One experiment, fully described. Optional fields fall back to
/// rule- and game-aware defaults at resolution time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: String,
    pub rule1: String,
    pub rule2: String,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub iters: Option<usize>,
    pub batch: usize,
    pub horizon: Option<usize>,
    pub seeds: Vec<u64>,
    /// Tournament schedule.
    pub episodes: usize,
    pub steps: usize,
    pub roster: Vec<String>,
    /// Classification thresholds, recorded in every output.
    pub tft_threshold: f64,
    pub nash_eps: f64,
    pub om_smoothing: f64,
    pub om_window: usize,
    /// Overrides for custom games.
    pub gamma: Option<f64>,
    pub payoff1: Option<[[f64; 2]; 2]>,
    pub payoff2: Option<[[f64; 2]; 2]>,
    /// Report raw discounted values instead of normalised ones.
    pub raw_values: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            game: "ipd".into(),
            rule1: "lola-ex".into(),
            rule2: "lola-ex".into(),
            delta: None,
            eta: None,
            iters: None,
            batch: 4000,
            horizon: None,
            seeds: (0..50).collect(),
            episodes: 1000,
            steps: 200,
            roster: vec!["all".into()],
            tft_threshold: 0.5,
            nash_eps: 0.1,
            om_smoothing: 1.0,
            om_window: 1,
            gamma: None,
            payoff1: None,
            payoff2: None,
            raw_values: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Build the configured game, applying gamma and payoff overrides.
    pub fn build_game(&self) -> anyhow::Result<BimatrixGame> {
        let mut game = BimatrixGame::by_name(&self.game)?;
        if let (Some(p1), Some(p2)) = (self.payoff1, self.payoff2) {
            game = BimatrixGame::custom(p1, p2, self.gamma.unwrap_or(game.gamma))?;
        } else if self.payoff1.is_some() || self.payoff2.is_some() {
            bail!("payoff overrides need both payoff1 and payoff2");
        } else if let Some(g) = self.gamma {
            game = game.with_gamma(g)?;
        }
        Ok(game)
    }

    fn exact_rule(name: &str) -> anyhow::Result<ExactRule> {
        Ok(match name {
            "nl-ex" => ExactRule::Nl,
            "lola-ex" => ExactRule::Lola,
            "lola2-ex" => ExactRule::Lola2,
            other => bail!("unknown exact rule '{other}' (nl-ex, lola-ex, lola2-ex)"),
        })
    }

    fn pg_rule(name: &str) -> anyhow::Result<PgRule> {
        Ok(match name {
            "nl-pg" => PgRule::Nl,
            "lola-pg" => PgRule::Lola,
            "lola-om" => PgRule::LolaOm,
            other => bail!("unknown policy-gradient rule '{other}' (nl-pg, lola-pg, lola-om)"),
        })
    }

    /// Resolve for exact training: step size 1, look-ahead 2*delta, 500
    /// simultaneous updates unless overridden.
    pub fn resolve_exact(&self) -> anyhow::Result<ResolvedExact> {
        let delta = self.delta.unwrap_or(1.0);
        let eta = self.eta.unwrap_or(2.0 * delta);
        let iters = self.iters.unwrap_or(500);
        Ok(ResolvedExact {
            cfg1: LearnerConfig::new(Self::exact_rule(&self.rule1)?, delta, eta),
            cfg2: LearnerConfig::new(Self::exact_rule(&self.rule2)?, delta, eta),
            iterations: iters,
        })
    }

    /// Resolve for policy-gradient training. The actor step is 0.005 with
    /// batch 4000; matching pennies defaults to a stronger look-ahead and a
    /// shorter horizon (its discount is smaller), and to more iterations,
    /// since the small actor step needs them to traverse logit space.
    pub fn resolve_pg(&self) -> anyhow::Result<ResolvedPg> {
        let imp = self.game == "imp";
        let delta = self.delta.unwrap_or(0.005);
        let eta = self.eta.unwrap_or(if imp { 5.0 } else { 1.0 });
        let iters = self.iters.unwrap_or(if imp { 1500 } else { 300 });
        let horizon = self.horizon.unwrap_or(if imp { 64 } else { 200 });
        let mk = |name: &str| -> anyhow::Result<PgConfig> {
            let mut cfg = PgConfig::new(Self::pg_rule(name)?);
            cfg.delta = delta;
            cfg.eta = eta;
            cfg.om_smoothing = self.om_smoothing;
            cfg.om_window = self.om_window;
            Ok(cfg)
        };
        Ok(ResolvedPg {
            cfg1: mk(&self.rule1)?,
            cfg2: mk(&self.rule2)?,
            batch: self.batch,
            horizon,
            iterations: iters,
        })
    }

    /// The tournament roster; `all` expands to every learner.
    pub fn resolve_roster(&self) -> anyhow::Result<Vec<lola_core::LearnerKind>> {
        let names: Vec<String> = if self.roster.iter().any(|r| r == "all") {
            lola_core::LearnerKind::ALL.iter().map(|k| k.name().into()).collect()
        } else {
            self.roster.clone()
        };
        names
            .iter()
            .map(|n| lola_core::LearnerKind::parse(n).map_err(Into::into))
            .collect()
    }

    /// The resolved configuration as `key=value` comment lines for output
    /// headers. `extra` carries subcommand-specific resolved values.
    pub fn echo_lines(&self, extra: &[(&str, String)]) -> Vec<String> {
        let mut lines = vec![
            format!("game={}", self.game),
            format!("rule1={}", self.rule1),
            format!("rule2={}", self.rule2),
            format!("seeds={}", format_seed_list(&self.seeds)),
            format!("tft_threshold={}", self.tft_threshold),
            format!("nash_eps={}", self.nash_eps),
            format!("om_smoothing={}", self.om_smoothing),
            format!("om_window={}", self.om_window),
            format!("raw_values={}", self.raw_values),
        ];
        if let Some(g) = self.gamma {
            lines.push(format!("gamma={g}"));
        }
        for (k, v) in extra {
            lines.push(format!("{k}={v}"));
        }
        lines
    }
}

/// Exact-training settings after defaulting.
pub struct ResolvedExact {
    pub cfg1: LearnerConfig,
    pub cfg2: LearnerConfig,
    pub iterations: usize,
}

/// Policy-gradient settings after defaulting.
pub struct ResolvedPg {
    pub cfg1: PgConfig,
    pub cfg2: PgConfig,
    pub batch: usize,
    pub horizon: usize,
    pub iterations: usize,
}

/// Parse a seed specification: a count (`50`), a range (`10..20`), or an
/// explicit comma list (`1,5,9`).
pub fn parse_seeds(spec: &str) -> anyhow::Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a.trim().parse().context("range start")?;
        let hi: u64 = b.trim().parse().context("range end")?;
        if lo >= hi {
            bail!("empty seed range {spec}");
        }
        return Ok((lo..hi).collect());
    }
    if spec.contains(',') {
        return spec
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(Into::into))
            .collect();
    }
    let count: u64 = spec.parse().with_context(|| format!("bad seed spec '{spec}'"))?;
    Ok((0..count).collect())
}

fn format_seed_list(seeds: &[u64]) -> String {
    // Compact contiguous runs back to range form.
    if seeds.len() > 2
        && seeds.windows(2).all(|w| w[1] == w[0] + 1)
    {
        format!("{}..{}", seeds[0], seeds[seeds.len() - 1] + 1)
    } else {
        seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Classification target for a game kind.
pub fn classification_of(kind: GameKind) -> &'static str {
    match kind {
        GameKind::Ipd => "tft",
        GameKind::Imp => "nash",
        GameKind::Custom => "none",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs_parse() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("5..8").unwrap(), vec![5, 6, 7]);
        assert_eq!(parse_seeds("4,9,1").unwrap(), vec![4, 9, 1]);
        assert!(parse_seeds("8..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn json_round_trip_preserves_config() {
        let mut cfg = ExperimentConfig::default();
        cfg.delta = Some(0.25);
        cfg.seeds = vec![3, 1, 4];
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.delta, Some(0.25));
        assert_eq!(back.seeds, vec![3, 1, 4]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>("{\"detla\": 0.1}");
        assert!(err.is_err());
    }

    #[test]
    fn pg_defaults_depend_on_game() {
        let mut cfg = ExperimentConfig::default();
        cfg.rule1 = "lola-pg".into();
        cfg.rule2 = "lola-pg".into();
        let ipd = cfg.resolve_pg().unwrap();
        assert_eq!(ipd.horizon, 200);
        assert_eq!(ipd.cfg1.eta, 1.0);
        cfg.game = "imp".into();
        let imp = cfg.resolve_pg().unwrap();
        assert_eq!(imp.horizon, 64);
        assert_eq!(imp.cfg1.eta, 5.0);
    }

    #[test]
    fn exact_eta_defaults_to_twice_delta() {
        let mut cfg = ExperimentConfig::default();
        cfg.delta = Some(0.5);
        let r = cfg.resolve_exact().unwrap();
        assert_eq!(r.cfg1.delta, 0.5);
        assert_eq!(r.cfg1.eta, 1.0);
    }

    #[test]
    fn payoff_override_builds_custom_game() {
        let mut cfg = ExperimentConfig::default();
        cfg.payoff1 = Some([[2.0, 0.0], [3.0, 1.0]]);
        cfg.payoff2 = Some([[2.0, 3.0], [0.0, 1.0]]);
        cfg.gamma = Some(0.9);
        let game = cfg.build_game().unwrap();
        assert_eq!(game.kind, GameKind::Custom);
        assert_eq!(game.gamma, 0.9);
    }
}
