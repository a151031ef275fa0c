//! Learning dynamics of opponent-shaping agents in two-agent iterated
//! matrix games.
//!
//! The crate provides:
//!
//! - closed-form value functions for memory-1 iterated games ([`games`]),
//! - forward-mode automatic differentiation up to third order ([`jet`]),
//! - exact learning rules NL-Ex, LOLA-Ex and second-order LOLA ([`exact`]),
//! - Monte-Carlo rollouts and the policy-gradient rules NL-PG / LOLA-PG
//!   including the second-order likelihood-ratio estimator ([`mod@rollout`]),
//! - maximum-likelihood opponent modeling ([`opponent`]),
//! - classic tabular baselines: NL-Q, JAL-Q, PHC and WoLF-PHC ([`baselines`]),
//! - a round-robin tournament harness ([`tournament`]),
//! - training-trace records with CSV round-tripping ([`record`]).

pub mod baselines;
pub mod exact;
pub mod games;
pub mod jet;
pub mod opponent;
pub mod record;
pub mod rollout;
pub mod tournament;

pub use exact::{
    init_pair, lola2_step, lola_step, nl_step, step_pair, train_exact, value_derivatives,
    ExactRule, LearnerConfig, ValueDerivatives,
};
pub use games::{
    build_transition, exact_value, exact_value_raw, normalised_return, BimatrixGame, GameKind,
    PolicyParams, LOGIT_LIMIT, N_OUTCOMES, N_STATES,
};
pub use jet::{Jet, Scalar};
pub use opponent::OpponentModel;
pub use record::{RunRecord, RunRow};
pub use rollout::{
    cross_hessian_estimate, lola_pg_step, pg_gradient, rollout, train_pg, Baseline, EpisodeBatch,
    PgConfig, PgRule,
};
pub use tournament::{run_match, run_tournament, LearnerKind, MatchConfig, MatchResult, Standing};

use std::fmt;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input value is outside its mathematical domain.
    Domain(String),
    /// A computation produced non-finite numbers.
    NonFinite(String),
    /// Bad configuration (unknown names, inconsistent settings).
    Config(String),
    /// A file could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
