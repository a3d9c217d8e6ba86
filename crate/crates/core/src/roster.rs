//! Players, teams, per-opponent batting records and the fallback ladder.
//!
//! Records come from a stats CSV (`player_id,opponent_id,average,highest,
//! innings,tier`), rosters from a teams JSON, and role-based league defaults
//! from a small JSON map. `opponent_id = "*"` marks an all-opponents row.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opponent id of an all-opponents aggregate row.
pub const ANY_OPPONENT: &str = "*";
pub const XI_SIZE: usize = 11;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("stats line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("teams file: {0}")]
    Teams(String),
    #[error("league defaults: {0}")]
    Defaults(String),
    #[error("no records")]
    NoRecords,
    #[error("stats line {line} ({player_id} vs {opponent_id}): {message}")]
    InvalidRecord { line: u64, player_id: String, opponent_id: String, message: String },
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown team `{0}`")]
    UnknownTeam(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "fast")]
    FastBowler,
    #[serde(rename = "spin")]
    Spinner,
    #[serde(rename = "ar_fast")]
    AllRounderFast,
    #[serde(rename = "ar_spin")]
    AllRounderSpinner,
    #[serde(rename = "bat")]
    Batsman,
    #[serde(rename = "wk")]
    WicketKeeper,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::FastBowler,
        Role::Spinner,
        Role::AllRounderFast,
        Role::AllRounderSpinner,
        Role::Batsman,
        Role::WicketKeeper,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Role::FastBowler => "fast",
            Role::Spinner => "spin",
            Role::AllRounderFast => "ar_fast",
            Role::AllRounderSpinner => "ar_spin",
            Role::Batsman => "bat",
            Role::WicketKeeper => "wk",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL.into_iter().find(|r| r.code() == s).ok_or_else(|| format!("unknown role `{s}`"))
    }
}

/// Where a record came from; earlier variants are preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceTier {
    #[serde(rename = "international")]
    International,
    #[serde(rename = "domestic")]
    Domestic,
    #[serde(rename = "first_class")]
    FirstClass,
    #[serde(rename = "reserve")]
    ReserveTeam,
    #[serde(rename = "u19")]
    Under19,
    #[serde(rename = "default")]
    LeagueDefault,
}

impl SourceTier {
    pub const ALL: [SourceTier; 6] = [
        SourceTier::International,
        SourceTier::Domestic,
        SourceTier::FirstClass,
        SourceTier::ReserveTeam,
        SourceTier::Under19,
        SourceTier::LeagueDefault,
    ];

    pub fn code(self) -> &'static str {
        match self {
            SourceTier::International => "international",
            SourceTier::Domestic => "domestic",
            SourceTier::FirstClass => "first_class",
            SourceTier::ReserveTeam => "reserve",
            SourceTier::Under19 => "u19",
            SourceTier::LeagueDefault => "default",
        }
    }
}

impl fmt::Display for SourceTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: String,
    pub name: String,
    #[serde(skip)]
    pub team_id: String,
    pub role: Role,
    #[serde(default)]
    pub overseas: bool,
}

/// One player's batting line against one opponent team (or `*`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchupRecord {
    pub player_id: String,
    pub opponent_id: String,
    pub average: f64,
    pub highest: u32,
    pub innings: u32,
    pub tier: SourceTier,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Team {
    pub id: String,
    pub name: String,
    #[serde(rename = "players")]
    pub roster: Vec<Player>,
}

impl Team {
    pub fn player_index(&self, id: &str) -> Option<usize> {
        self.roster.iter().position(|p| p.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultLine {
    pub average: f64,
    pub highest: u32,
}

/// Role-keyed fallback line used when a player has no usable record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeagueDefaults(pub BTreeMap<Role, DefaultLine>);

impl Default for LeagueDefaults {
    fn default() -> Self {
        let lines = [
            (Role::FastBowler, 8.0, 30),
            (Role::Spinner, 6.0, 25),
            (Role::AllRounderFast, 18.0, 60),
            (Role::AllRounderSpinner, 16.0, 55),
            (Role::Batsman, 25.0, 80),
            (Role::WicketKeeper, 22.0, 70),
        ];
        Self(lines.into_iter().map(|(r, average, highest)| (r, DefaultLine { average, highest })).collect())
    }
}

impl LeagueDefaults {
    fn validate(&self) -> Result<(), DataError> {
        for (role, line) in &self.0 {
            if !(line.average.is_finite() && line.average >= 0.0) || f64::from(line.highest) < line.average {
                return Err(DataError::Defaults(format!(
                    "role {role}: need 0 <= average <= highest, got {} / {}",
                    line.average, line.highest
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct TeamFile {
    id: String,
    name: String,
    players: Vec<Player>,
}

/// Immutable, validated collection of teams, records and defaults.
#[derive(Debug, Clone)]
pub struct Dataset {
    teams: Vec<Team>,
    records: Vec<MatchupRecord>,
    defaults: LeagueDefaults,
    team_index: HashMap<String, usize>,
    player_index: HashMap<String, (usize, usize)>,
    /// (player, opponent) → record indices sorted by tier
    by_matchup: HashMap<(String, String), Vec<usize>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.teams == other.teams && self.records == other.records && self.defaults == other.defaults
    }
}

impl Dataset {
    /// Load stats CSV, teams JSON and (optionally) league defaults JSON.
    pub fn load(stats: &Path, teams: &Path, defaults: Option<&Path>) -> Result<Self, DataError> {
        let open = |p: &Path| {
            std::fs::File::open(p).map_err(|source| DataError::Io { path: p.display().to_string(), source })
        };
        let teams = read_teams(open(teams)?)?;
        let records = read_stats(open(stats)?)?;
        let defaults = match defaults {
            Some(p) => read_defaults(open(p)?)?,
            None => LeagueDefaults::default(),
        };
        Self::from_parts(teams, records, defaults)
    }

    /// Validate and index. Record line numbers in errors assume the records
    /// came from a CSV with a header row, in order.
    pub fn from_parts(
        mut teams: Vec<Team>,
        records: Vec<MatchupRecord>,
        defaults: LeagueDefaults,
    ) -> Result<Self, DataError> {
        defaults.validate()?;
        if teams.is_empty() {
            return Err(DataError::Teams("no teams".into()));
        }
        let mut team_index = HashMap::new();
        let mut player_index = HashMap::new();
        for (ti, team) in teams.iter_mut().enumerate() {
            if team_index.insert(team.id.clone(), ti).is_some() {
                return Err(DataError::Teams(format!("duplicate team id `{}`", team.id)));
            }
            if team.roster.len() < XI_SIZE {
                return Err(DataError::Teams(format!(
                    "team `{}` has {} players, needs at least {XI_SIZE}",
                    team.id,
                    team.roster.len()
                )));
            }
            for (pi, player) in team.roster.iter_mut().enumerate() {
                player.team_id = team.id.clone();
                if player_index.insert(player.id.clone(), (ti, pi)).is_some() {
                    return Err(DataError::Teams(format!("duplicate player id `{}`", player.id)));
                }
                if !defaults.0.contains_key(&player.role) {
                    return Err(DataError::Defaults(format!("no default line for role {}", player.role)));
                }
            }
        }
        if records.is_empty() {
            return Err(DataError::NoRecords);
        }

        let mut seen = HashSet::new();
        let mut by_matchup: HashMap<(String, String), Vec<usize>> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            let invalid = |message: String| DataError::InvalidRecord {
                line: i as u64 + 2,
                player_id: r.player_id.clone(),
                opponent_id: r.opponent_id.clone(),
                message,
            };
            if !player_index.contains_key(&r.player_id) {
                return Err(invalid("unknown player".into()));
            }
            if r.opponent_id != ANY_OPPONENT && !team_index.contains_key(&r.opponent_id) {
                return Err(invalid("unknown opponent team".into()));
            }
            if !(r.average.is_finite() && r.average >= 0.0) {
                return Err(invalid(format!("average must be a non-negative number, got {}", r.average)));
            }
            if r.innings >= 1 && f64::from(r.highest) < r.average {
                return Err(invalid(format!("highest {} is below average {}", r.highest, r.average)));
            }
            if r.innings == 0 && r.tier != SourceTier::LeagueDefault {
                return Err(invalid("zero innings is only allowed on default-tier rows".into()));
            }
            if !seen.insert((r.player_id.as_str(), r.opponent_id.as_str(), r.tier)) {
                return Err(invalid(format!("duplicate record for tier {}", r.tier)));
            }
            by_matchup.entry((r.player_id.clone(), r.opponent_id.clone())).or_default().push(i);
        }
        for idx in by_matchup.values_mut() {
            idx.sort_by_key(|&i| records[i].tier);
        }
        Ok(Self { teams, records, defaults, team_index, player_index, by_matchup })
    }

    pub fn teams(&self) -> &[Team] {
        &self.teams
    }

    pub fn records(&self) -> &[MatchupRecord] {
        &self.records
    }

    pub fn defaults(&self) -> &LeagueDefaults {
        &self.defaults
    }

    pub fn team(&self, id: &str) -> Option<&Team> {
        self.team_index.get(id).map(|&i| &self.teams[i])
    }

    pub fn player(&self, id: &str) -> Option<&Player> {
        self.player_index.get(id).map(|&(t, p)| &self.teams[t].roster[p])
    }

    /// Best available line for `player_id` against `opponent_id`.
    ///
    /// Order: opponent-specific rows by tier, then the player's `*` rows by
    /// tier, then the league default for the player's role.
    pub fn resolve_matchup(&self, player_id: &str, opponent_id: &str) -> Result<MatchupRecord, DataError> {
        let player = self.player(player_id).ok_or_else(|| DataError::UnknownPlayer(player_id.to_string()))?;
        for opp in [opponent_id, ANY_OPPONENT] {
            if let Some(best) = self.by_matchup.get(&(player_id.to_string(), opp.to_string())).and_then(|v| v.first()) {
                return Ok(self.records[*best].clone());
            }
        }
        let line = self.defaults.0[&player.role];
        Ok(MatchupRecord {
            player_id: player_id.to_string(),
            opponent_id: ANY_OPPONENT.to_string(),
            average: line.average,
            highest: line.highest,
            innings: 0,
            tier: SourceTier::LeagueDefault,
        })
    }

    /// Write the three source files back out.
    pub fn save(&self, stats: &Path, teams: &Path, defaults: &Path) -> Result<(), DataError> {
        let create = |p: &Path| {
            std::fs::File::create(p).map_err(|source| DataError::Io { path: p.display().to_string(), source })
        };
        fn io(p: &Path) -> impl Fn(std::io::Error) -> DataError + '_ {
            move |source| DataError::Io { path: p.display().to_string(), source }
        }
        write_stats(create(stats)?, &self.records).map_err(io(stats))?;
        write_teams(create(teams)?, &self.teams).map_err(io(teams))?;
        let mut f = create(defaults)?;
        serde_json::to_writer_pretty(&mut f, &self.defaults).map_err(|e| io(defaults)(e.into()))?;
        Ok(())
    }
}

pub fn read_teams<R: Read>(reader: R) -> Result<Vec<Team>, DataError> {
    let files: Vec<TeamFile> = serde_json::from_reader(reader).map_err(|e| DataError::Teams(e.to_string()))?;
    Ok(files.into_iter().map(|t| Team { id: t.id, name: t.name, roster: t.players }).collect())
}

pub fn read_defaults<R: Read>(reader: R) -> Result<LeagueDefaults, DataError> {
    serde_json::from_reader(reader).map_err(|e| DataError::Defaults(e.to_string()))
}

pub fn read_stats<R: Read>(reader: R) -> Result<Vec<MatchupRecord>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<MatchupRecord>().enumerate() {
        let record = row.map_err(|e| DataError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(i as u64 + 2),
            message: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_stats<W: Write>(writer: W, records: &[MatchupRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn write_teams<W: Write>(writer: W, teams: &[Team]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(writer, teams).map_err(Into::into)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn team(id: &str, n: usize) -> Team {
        let roster = (0..n)
            .map(|i| Player {
                id: format!("{id}-{i}"),
                name: format!("{id} player {i}"),
                team_id: String::new(),
                role: Role::ALL[i % 6],
                overseas: false,
            })
            .collect();
        Team { id: id.into(), name: id.into(), roster }
    }

    fn rec(p: &str, o: &str, avg: f64, hi: u32, tier: SourceTier) -> MatchupRecord {
        MatchupRecord { player_id: p.into(), opponent_id: o.into(), average: avg, highest: hi, innings: 5, tier }
    }

    fn dataset(records: Vec<MatchupRecord>) -> Result<Dataset, DataError> {
        Dataset::from_parts(vec![team("A", 12), team("B", 12)], records, LeagueDefaults::default())
    }

    #[test]
    fn highest_tier_wins() {
        let ds = dataset(vec![
            rec("A-0", "B", 20.0, 50, SourceTier::Domestic),
            rec("A-0", "B", 30.0, 70, SourceTier::International),
            rec("A-0", "*", 40.0, 90, SourceTier::International),
        ])
        .unwrap();
        let r = ds.resolve_matchup("A-0", "B").unwrap();
        assert_eq!(r.tier, SourceTier::International);
        assert_eq!(r.average, 30.0);
    }

    #[test]
    fn debutant_lower_tier_is_used() {
        let ds = dataset(vec![rec("A-1", "B", 12.0, 40, SourceTier::Under19)]).unwrap();
        let r = ds.resolve_matchup("A-1", "B").unwrap();
        assert_eq!(r.tier, SourceTier::Under19);
        assert_eq!(r.average, 12.0);
    }

    #[test]
    fn aggregate_then_role_default() {
        let ds = dataset(vec![rec("A-2", "*", 15.0, 44, SourceTier::FirstClass)]).unwrap();
        let r = ds.resolve_matchup("A-2", "B").unwrap();
        assert_eq!((r.opponent_id.as_str(), r.tier), ("*", SourceTier::FirstClass));

        // A-4 is a batsman with no rows at all
        let r = ds.resolve_matchup("A-4", "B").unwrap();
        assert_eq!(r.tier, SourceTier::LeagueDefault);
        assert_eq!((r.average, r.highest), (25.0, 80));
        assert!(ds.resolve_matchup("nobody", "B").is_err());
    }

    #[test]
    fn rejects_bad_records() {
        let err = dataset(vec![rec("A-0", "B", 50.0, 40, SourceTier::International)]).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("A-0"), "{err}");

        let dup = vec![rec("A-0", "B", 5.0, 40, SourceTier::Domestic), rec("A-0", "B", 6.0, 40, SourceTier::Domestic)];
        assert!(matches!(dataset(dup).unwrap_err(), DataError::InvalidRecord { line: 3, .. }));

        let mut zero = rec("A-0", "B", 0.0, 0, SourceTier::International);
        zero.innings = 0;
        assert!(dataset(vec![zero]).is_err());

        assert!(matches!(dataset(vec![]).unwrap_err(), DataError::NoRecords));
        assert!(dataset(vec![rec("A-0", "Z", 5.0, 40, SourceTier::Domestic)]).is_err());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let csv = "player_id,opponent_id,average,highest,innings,tier\nA-0,B,10,20,3,international\nA-0,B,x,20,3,domestic\n";
        let err = read_stats(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 3, .. }), "{err}");
        let err = read_stats("player_id,opponent_id,average,highest,innings,tier\nA,B,1,2,3,pro\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn empty_stats_file_has_no_records() {
        let recs = read_stats("".as_bytes()).unwrap();
        assert!(matches!(dataset(recs).unwrap_err(), DataError::NoRecords));
    }

    #[test]
    fn short_roster_rejected() {
        let err = Dataset::from_parts(vec![team("A", 10)], vec![], LeagueDefaults::default()).unwrap_err();
        assert!(err.to_string().contains("at least 11"));
    }
}
