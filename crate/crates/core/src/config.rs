//! Competition config files: a dataset plus match and tournament settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matchsim::MatchConfig;
use crate::priors::FitSettings;
use crate::roster::{DataError, Dataset};
use crate::selection::SelectionScheme;
use crate::tournament::{Playoff, PointsRule, Tiebreak, TournamentConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    pub stats: PathBuf,
    pub teams: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defaults: Option<PathBuf>,
}

impl DatasetPaths {
    /// Paths taken relative to `base` unless already absolute.
    pub fn relative_to(&self, base: &Path) -> Self {
        Self {
            stats: base.join(&self.stats),
            teams: base.join(&self.teams),
            defaults: self.defaults.as_ref().map(|d| base.join(d)),
        }
    }

    pub fn load(&self) -> Result<Dataset, DataError> {
        Dataset::load(&self.stats, &self.teams, self.defaults.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeagueSettings {
    pub rounds: u32,
}

impl Default for LeagueSettings {
    fn default() -> Self {
        Self { rounds: 1 }
    }
}

fn default_sims() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetitionConfig {
    #[serde(default)]
    pub name: String,
    pub dataset: DatasetPaths,
    /// Participating teams; every team in the dataset when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teams: Option<Vec<String>>,
    #[serde(default)]
    pub scheme: SelectionScheme,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scheme_overrides: BTreeMap<String, SelectionScheme>,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub fixed_xi: bool,
    #[serde(default)]
    pub common_random_numbers: bool,
    #[serde(default)]
    pub league: LeagueSettings,
    #[serde(default)]
    pub points: PointsRule,
    #[serde(default)]
    pub tiebreak: Tiebreak,
    #[serde(default)]
    pub playoff: Playoff,
    #[serde(default = "default_sims")]
    pub sims: u64,
    #[serde(default)]
    pub seed: u64,
}

impl CompetitionConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Read a config file; dataset paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut cfg = Self::from_json(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dataset = cfg.dataset.relative_to(base);
        Ok(cfg)
    }

    pub fn load_dataset(&self) -> Result<Dataset, DataError> {
        self.dataset.load()
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            scheme: self.scheme.clone(),
            scheme_overrides: self.scheme_overrides.clone(),
            fit: self.fit,
            fixed_xi: self.fixed_xi,
            common_random_numbers: self.common_random_numbers,
        }
    }

    pub fn team_ids(&self, dataset: &Dataset) -> Vec<String> {
        match &self.teams {
            Some(t) => t.clone(),
            None => dataset.teams().iter().map(|t| t.id.clone()).collect(),
        }
    }

    pub fn tournament_config(&self, dataset: &Dataset) -> TournamentConfig {
        TournamentConfig {
            teams: self.team_ids(dataset),
            rounds: self.league.rounds,
            points: self.points,
            tiebreak: self.tiebreak,
            playoff: self.playoff,
            sims: self.sims,
            seed: self.seed,
            matches: self.match_config(),
        }
    }
}
