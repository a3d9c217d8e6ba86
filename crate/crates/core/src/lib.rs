//! Monte Carlo prediction of cricket matches and tournaments.
//!
//! Each batter's score against a given opponent is drawn from a gamma prior
//! fitted to two numbers: their batting average against that opponent and
//! their highest score. XIs are drawn by stratified random sampling over
//! player roles, team totals are compared, and the whole pipeline is
//! repeated on independent, seed-keyed random substreams so that results
//! never depend on thread count.

pub mod compare;
pub mod config;
pub mod matchsim;
pub mod priors;
pub mod rng;
pub mod roster;
pub mod selection;
pub mod special;
pub mod tournament;

pub use matchsim::{HeadToHead, MatchConfig, MatchEstimate, MatchResult, Matchup, Outcome, PriorBook};
pub use priors::{BetaGrid, BetaRule, Fit, FitInput, FitSettings, GammaParams};
pub use roster::{Dataset, MatchupRecord, Player, Role, SourceTier, Team};
pub use selection::{LineupConstraint, SelectionScheme};
pub use tournament::{StandingsDistribution, TournamentConfig};
