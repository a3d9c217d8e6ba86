//! League plus knockout tournaments built on [`Matchup`].
//!
//! One realization plays a full round robin (once or twice per pair),
//! orders the table by points, run difference and team id, then plays the
//! configured bracket. [`Tournament::run`] aggregates many realizations into a
//! [`StandingsDistribution`] by pure counting, one substream per realization.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matchsim::{MatchConfig, MatchResult, Matchup, Outcome, PriorBook, SimError};
use crate::rng::substream;
use crate::roster::{DataError, Dataset};
use crate::selection::LineupConstraint;

/// Re-simulations of a drawn game before falling back to a coin flip.
pub const MAX_RESIMULATIONS: u32 = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawRule {
    /// Both sides take `draw_points`.
    #[default]
    SplitPoints,
    /// Replay until there is a winner.
    SuperOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsRule {
    #[serde(default = "default_win")]
    pub win: u32,
    #[serde(default)]
    pub draw: DrawRule,
    #[serde(default)]
    pub loss: u32,
    #[serde(default = "default_draw_points")]
    pub draw_points: u32,
}

fn default_win() -> u32 {
    2
}

fn default_draw_points() -> u32 {
    1
}

impl Default for PointsRule {
    fn default() -> Self {
        Self { win: 2, draw: DrawRule::SplitPoints, loss: 0, draw_points: 1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Playoff {
    /// League order is final.
    #[default]
    None,
    /// 1v4 and 2v3, then a final.
    Semis,
    /// Qualifier 1 (1v2), eliminator (3v4), qualifier 2, final.
    Qualifier,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tiebreak {
    /// Cumulative runs scored minus runs conceded, then team id.
    #[default]
    RunDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub teams: Vec<String>,
    pub rounds: u32,
    pub points: PointsRule,
    pub tiebreak: Tiebreak,
    pub playoff: Playoff,
    pub sims: u64,
    pub seed: u64,
    pub matches: MatchConfig,
}

impl TournamentConfig {
    pub fn new(teams: Vec<String>) -> Self {
        Self {
            teams,
            rounds: 1,
            points: PointsRule::default(),
            tiebreak: Tiebreak::default(),
            playoff: Playoff::default(),
            sims: 10_000,
            seed: 0,
            matches: MatchConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.teams.len() < 2 {
            return bad("a tournament needs at least two teams");
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(t) = self.teams.iter().find(|t| !seen.insert(t.as_str())) {
            return Err(SimError::Config(format!("team `{t}` listed twice")));
        }
        if self.playoff != Playoff::None && self.teams.len() < 4 {
            return bad("playoff formats need at least four teams");
        }
        if !(1..=2).contains(&self.rounds) {
            return bad("league rounds must be 1 or 2");
        }
        if self.points.win <= self.points.loss {
            return bad("win points must exceed loss points");
        }
        if self.sims == 0 {
            return Err(SimError::NoReplicates);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub team: String,
    pub played: u32,
    pub won: u32,
    pub lost: u32,
    pub drawn: u32,
    pub points: u32,
    pub run_difference: i64,
}

/// League standings of one realization, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeagueTable {
    pub rows: Vec<TableRow>,
    pub games: u32,
    pub drawn_games: u32,
}

impl LeagueTable {
    pub fn total_points(&self) -> u32 {
        self.rows.iter().map(|r| r.points).sum()
    }
}

/// Final positions of one realization: `order[0]` is the champion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalStandings {
    pub order: Vec<String>,
    /// Teams that reached the knockout stage (or the top four of the league
    /// when there is none).
    pub qualifiers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingsDistribution {
    pub teams: Vec<String>,
    /// `positions[t][k]`: probability that team `t` finishes in place `k + 1`.
    pub positions: Vec<Vec<f64>>,
    pub champion: BTreeMap<String, f64>,
    pub semifinalist: BTreeMap<String, f64>,
    pub conditional_champion: BTreeMap<String, f64>,
    /// Exact counts behind `positions`.
    pub counts: Vec<Vec<u64>>,
    pub sims: u64,
    pub seed: u64,
}

struct Game {
    result: MatchResult,
    /// `true` if the first-listed side won, `None` if the draw stands.
    a_won: Option<bool>,
}

/// A validated tournament with every ordered matchup prepared.
#[derive(Debug, Clone)]
pub struct Tournament {
    config: TournamentConfig,
    /// `matchups[i * n + j]` has team `i` as side A; the diagonal is unused.
    matchups: Vec<Option<Matchup>>,
}

impl Tournament {
    pub fn prepare(dataset: &Dataset, config: &TournamentConfig) -> Result<Self, SimError> {
        config.validate()?;
        for t in &config.teams {
            if dataset.team(t).is_none() {
                return Err(DataError::UnknownTeam(t.clone()).into());
            }
        }
        let ids: Vec<&str> = config.teams.iter().map(String::as_str).collect();
        let book = PriorBook::build(dataset, &ids, config.matches.fit)?;
        let free = LineupConstraint::default();
        let mut matchups = Vec::with_capacity(ids.len() * ids.len());
        for &a in &ids {
            for &b in &ids {
                matchups.push(if a == b {
                    None
                } else {
                    Some(Matchup::prepare(dataset, &book, a, b, &config.matches, &free, &free)?)
                });
            }
        }
        Ok(Self { config: config.clone(), matchups })
    }

    pub fn config(&self) -> &TournamentConfig {
        &self.config
    }

    fn matchup(&self, i: usize, j: usize) -> &Matchup {
        self.matchups[i * self.config.teams.len() + j].as_ref().expect("distinct teams")
    }

    fn play<R: Rng + ?Sized>(&self, i: usize, j: usize, force_winner: bool, rng: &mut R) -> Game {
        let m = self.matchup(i, j);
        let result = m.play(rng);
        let a_won = match result.outcome {
            Outcome::AWins => Some(true),
            Outcome::BWins => Some(false),
            Outcome::Draw if force_winner => Some(resolve_draw(m, rng)),
            Outcome::Draw => None,
        };
        Game { result, a_won }
    }

    /// One league stage.
    pub fn simulate_league<R: Rng + ?Sized>(&self, rng: &mut R) -> LeagueTable {
        let n = self.config.teams.len();
        let pts = self.config.points;
        let force = pts.draw == DrawRule::SuperOver;
        let mut rows: Vec<TableRow> = self
            .config
            .teams
            .iter()
            .map(|t| TableRow { team: t.clone(), played: 0, won: 0, lost: 0, drawn: 0, points: 0, run_difference: 0 })
            .collect();
        let (mut games, mut drawn_games) = (0, 0);
        for round in 0..self.config.rounds {
            for i in 0..n {
                for j in i + 1..n {
                    // alternate which side is listed first in the return leg
                    let (a, b) = if round % 2 == 0 { (i, j) } else { (j, i) };
                    let g = self.play(a, b, force, rng);
                    let diff = i64::from(g.result.score_a) - i64::from(g.result.score_b);
                    rows[a].played += 1;
                    rows[b].played += 1;
                    rows[a].run_difference += diff;
                    rows[b].run_difference -= diff;
                    games += 1;
                    match g.a_won {
                        Some(a_won) => {
                            let (w, l) = if a_won { (a, b) } else { (b, a) };
                            rows[w].won += 1;
                            rows[w].points += pts.win;
                            rows[l].lost += 1;
                            rows[l].points += pts.loss;
                        }
                        None => {
                            drawn_games += 1;
                            for t in [a, b] {
                                rows[t].drawn += 1;
                                rows[t].points += pts.draw_points;
                            }
                        }
                    }
                }
            }
        }
        rows.sort_by(|x, y| {
            y.points.cmp(&x.points).then(y.run_difference.cmp(&x.run_difference)).then_with(|| x.team.cmp(&y.team))
        });
        LeagueTable { rows, games, drawn_games }
    }

    /// The configured bracket on top of `table`.
    pub fn simulate_knockout<R: Rng + ?Sized>(&self, table: &LeagueTable, rng: &mut R) -> FinalStandings {
        let league: Vec<usize> = table.rows.iter().map(|r| self.index_of(&r.team)).collect();
        let winner = |a: usize, b: usize, rng: &mut R| -> (usize, usize) {
            if self.play(a, b, true, rng).a_won == Some(true) {
                (a, b)
            } else {
                (b, a)
            }
        };
        let top: Vec<usize> = league.iter().copied().take(4).collect();
        let podium = match self.config.playoff {
            Playoff::None => None,
            Playoff::Semis => {
                let (w1, _) = winner(top[0], top[3], rng);
                let (w2, _) = winner(top[1], top[2], rng);
                Some(winner(w1, w2, rng))
            }
            Playoff::Qualifier => {
                let (q1w, q1l) = winner(top[0], top[1], rng);
                let (ew, _) = winner(top[2], top[3], rng);
                let (q2w, _) = winner(q1l, ew, rng);
                Some(winner(q1w, q2w, rng))
            }
        };
        let order: Vec<usize> = match podium {
            None => league.clone(),
            Some((champ, runner)) => {
                let mut order = vec![champ, runner];
                order.extend(top.iter().copied().filter(|t| *t != champ && *t != runner));
                order.extend(league.iter().copied().skip(4));
                order
            }
        };
        let name = |i: &usize| self.config.teams[*i].clone();
        FinalStandings { order: order.iter().map(name).collect(), qualifiers: top.iter().map(name).collect() }
    }

    fn index_of(&self, team: &str) -> usize {
        self.config.teams.iter().position(|t| t == team).expect("table lists configured teams")
    }

    /// Realization `sim` of the configured seed.
    pub fn realization(&self, sim: u64) -> (LeagueTable, FinalStandings) {
        let mut rng = substream(self.config.seed, sim);
        let table = self.simulate_league(&mut rng);
        let standings = self.simulate_knockout(&table, &mut rng);
        (table, standings)
    }

    pub fn run(&self) -> StandingsDistribution {
        let teams = &self.config.teams;
        let n = teams.len();
        let zero = || (vec![0u64; n * n], vec![0u64; n]);
        let (counts, qualified) = (0..self.config.sims)
            .into_par_iter()
            .fold(zero, |(mut c, mut q), sim| {
                let (_, fs) = self.realization(sim);
                for (pos, t) in fs.order.iter().enumerate() {
                    c[self.index_of(t) * n + pos] += 1;
                }
                fs.qualifiers.iter().for_each(|t| q[self.index_of(t)] += 1);
                (c, q)
            })
            .reduce(zero, |(mut c, mut q), (c2, q2)| {
                c.iter_mut().zip(c2).for_each(|(x, y)| *x += y);
                q.iter_mut().zip(q2).for_each(|(x, y)| *x += y);
                (c, q)
            });
        let sims = self.config.sims as f64;
        let counts: Vec<Vec<u64>> = counts.chunks(n).map(<[u64]>::to_vec).collect();
        let positions = counts.iter().map(|row| row.iter().map(|&c| c as f64 / sims).collect()).collect();
        let mut champion = BTreeMap::new();
        let mut semifinalist = BTreeMap::new();
        let mut conditional_champion = BTreeMap::new();
        for (t, id) in teams.iter().enumerate() {
            let (c, q) = (counts[t][0], qualified[t]);
            champion.insert(id.clone(), c as f64 / sims);
            semifinalist.insert(id.clone(), q as f64 / sims);
            conditional_champion.insert(id.clone(), if q == 0 { 0.0 } else { c as f64 / q as f64 });
        }
        StandingsDistribution {
            teams: teams.clone(),
            positions,
            champion,
            semifinalist,
            conditional_champion,
            counts,
            sims: self.config.sims,
            seed: self.config.seed,
        }
    }
}

/// Winner of a drawn game: replay up to [`MAX_RESIMULATIONS`] times, then a
/// fair coin. Returns `true` if side A wins.
fn resolve_draw<R: Rng + ?Sized>(m: &Matchup, rng: &mut R) -> bool {
    for _ in 0..MAX_RESIMULATIONS {
        match m.play(rng).outcome {
            Outcome::AWins => return true,
            Outcome::BWins => return false,
            Outcome::Draw => {}
        }
    }
    rng.random_bool(0.5)
}

pub fn simulate_tournament(dataset: &Dataset, config: &TournamentConfig) -> Result<StandingsDistribution, SimError> {
    Ok(Tournament::prepare(dataset, config)?.run())
}
