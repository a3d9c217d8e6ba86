//! Single-match simulation and Monte Carlo matchup estimates.
//!
//! A replicate samples an XI per side, draws one gamma score per selected
//! player against the opposing team, rounds each draw to the nearest run
//! (half away from zero) and compares the two totals. There is no toss or
//! batting-order effect.
//!
//! Replicate `r` of an estimate with seed `s` always uses stream `r` of the
//! generator seeded with `s`, so an estimate is bit-identical for any number
//! of worker threads.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::priors::{Fit, FitSettings, GammaParams, PriorError};
use crate::rng::{derive_seed, stable_key, substream, KeyedStream};
use crate::roster::{DataError, MatchupRecord, Team};
use crate::selection::{LineupConstraint, SelectionError, SelectionPlan, SelectionScheme};

/// Stream index reserved for drawing fixed XIs.
const FIXED_XI_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("team `{team}`: {source}")]
    Selection { team: String, source: SelectionError },
    #[error("prior for `{player}` vs `{opponent}`: {source}")]
    Prior { player: String, opponent: String, source: PriorError },
    #[error("no prior for `{player}` vs `{opponent}`")]
    MissingPrior { player: String, opponent: String },
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("{0}")]
    Config(String),
}

impl SimError {
    pub fn is_validation(&self) -> bool {
        !matches!(self, SimError::Data(DataError::Io { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AWins,
    BWins,
    Draw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub score_a: u32,
    pub score_b: u32,
    pub outcome: Outcome,
}

impl MatchResult {
    pub fn new(score_a: u32, score_b: u32) -> Self {
        let outcome = match score_a.cmp(&score_b) {
            std::cmp::Ordering::Greater => Outcome::AWins,
            std::cmp::Ordering::Less => Outcome::BWins,
            std::cmp::Ordering::Equal => Outcome::Draw,
        };
        Self { score_a, score_b, outcome }
    }
}

/// Frequencies over `n` replicates. The counts are exact; the
/// probabilities are the counts divided by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEstimate {
    pub p_a: f64,
    pub p_b: f64,
    pub p_draw: f64,
    pub n: u64,
    pub seed: u64,
    pub mean_score_a: f64,
    pub mean_score_b: f64,
    pub wins_a: u64,
    pub wins_b: u64,
    pub draws: u64,
}

/// A fitted prior plus the record it was fitted from.
#[derive(Debug, Clone)]
pub struct PriorEntry {
    pub record: MatchupRecord,
    pub fit: Fit,
    sampler: rand_distr::Gamma<f64>,
}

impl PriorEntry {
    pub fn new(record: MatchupRecord, fit: Fit) -> Self {
        let p = fit.params;
        let sampler = rand_distr::Gamma::new(p.alpha(), p.beta()).expect("fitted parameters are valid");
        Self { record, fit, sampler }
    }

    pub fn params(&self) -> &GammaParams {
        &self.fit.params
    }

    /// One rounded score.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler.sample(rng).round() as u32
    }

    /// Rounded score by inversion of the uniform `u`.
    pub fn draw_at(&self, u: f64) -> u32 {
        self.fit.params.quantile(u).round() as u32
    }
}

/// Fitted priors keyed by (player, opponent team).
///
/// Fitting is deterministic, so fits are also shared between matchups that
/// resolve to the same (average, highest) line.
#[derive(Debug, Clone, Default)]
pub struct PriorBook {
    fit: FitSettings,
    entries: HashMap<(String, String), PriorEntry>,
    fits: HashMap<(u64, u32), Fit>,
}

impl PriorBook {
    pub fn new(fit: FitSettings) -> Self {
        Self { fit, entries: HashMap::new(), fits: HashMap::new() }
    }

    /// Priors for every player of every listed team against every other
    /// listed team.
    pub fn build(dataset: &crate::Dataset, team_ids: &[&str], fit: FitSettings) -> Result<Self, SimError> {
        let mut book = Self::new(fit);
        for &t in team_ids {
            for &o in team_ids {
                if t != o {
                    book.ensure(dataset, t, o)?;
                }
            }
        }
        Ok(book)
    }

    pub fn settings(&self) -> &FitSettings {
        &self.fit
    }

    /// Fit (if not yet present) every player of `team` against `opponent`.
    pub fn ensure(&mut self, dataset: &crate::Dataset, team: &str, opponent: &str) -> Result<(), SimError> {
        let roster = &dataset.team(team).ok_or_else(|| DataError::UnknownTeam(team.to_string()))?.roster;
        if dataset.team(opponent).is_none() {
            return Err(DataError::UnknownTeam(opponent.to_string()).into());
        }
        for player in roster {
            let key = (player.id.clone(), opponent.to_string());
            if self.entries.contains_key(&key) {
                continue;
            }
            let record = dataset.resolve_matchup(&player.id, opponent)?;
            let cache_key = (record.average.to_bits(), record.highest);
            let fit = match self.fits.get(&cache_key) {
                Some(f) => *f,
                None => {
                    let f = self.fit.fit(record.average, record.highest).map_err(|source| SimError::Prior {
                        player: player.id.clone(),
                        opponent: opponent.to_string(),
                        source,
                    })?;
                    self.fits.insert(cache_key, f);
                    f
                }
            };
            self.entries.insert(key, PriorEntry::new(record, fit));
        }
        Ok(())
    }

    pub fn get(&self, player: &str, opponent: &str) -> Option<&PriorEntry> {
        self.entries.get(&(player.to_string(), opponent.to_string()))
    }

    /// Replace the parameters of an existing entry, keeping its record.
    pub fn set_params(&mut self, player: &str, opponent: &str, params: GammaParams) -> Result<(), SimError> {
        let entry = self
            .entries
            .get_mut(&(player.to_string(), opponent.to_string()))
            .ok_or_else(|| SimError::MissingPrior { player: player.to_string(), opponent: opponent.to_string() })?;
        let mut fit = entry.fit;
        fit.params = params;
        *entry = PriorEntry::new(entry.record.clone(), fit);
        Ok(())
    }
}

/// Selection and simulation settings shared by every matchup of a competition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    #[serde(default)]
    pub scheme: SelectionScheme,
    /// Per-team schemes that replace `scheme`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scheme_overrides: BTreeMap<String, SelectionScheme>,
    #[serde(default)]
    pub fit: FitSettings,
    /// Draw both XIs once per estimate instead of once per replicate.
    #[serde(default)]
    pub fixed_xi: bool,
    /// Key every selection and score uniform by (replicate, team, player) so
    /// scenario variants share draws.
    #[serde(default)]
    pub common_random_numbers: bool,
}

impl MatchConfig {
    pub fn scheme_for(&self, team_id: &str) -> &SelectionScheme {
        self.scheme_overrides.get(team_id).unwrap_or(&self.scheme)
    }
}

#[derive(Debug, Clone)]
struct Side {
    team_id: String,
    plan: SelectionPlan,
    /// by roster index; `None` for players the plan can never select
    priors: Vec<Option<PriorEntry>>,
    select_keys: Vec<u64>,
    score_keys: Vec<u64>,
}

impl Side {
    fn new(
        team: &Team,
        opponent: &str,
        label: &str,
        book: &PriorBook,
        scheme: &SelectionScheme,
        constraint: &LineupConstraint,
    ) -> Result<Self, SimError> {
        let plan = SelectionPlan::new(team, scheme, constraint)
            .map_err(|source| SimError::Selection { team: team.id.clone(), source })?;
        let mut priors = vec![None; team.roster.len()];
        for i in plan.eligible() {
            let id = &team.roster[i].id;
            let entry = book
                .get(id, opponent)
                .ok_or_else(|| SimError::MissingPrior { player: id.clone(), opponent: opponent.to_string() })?;
            priors[i] = Some(entry.clone());
        }
        let select_keys = team.roster.iter().map(|p| stable_key(&["select", label, &team.id, &p.id])).collect();
        let score_keys = team.roster.iter().map(|p| stable_key(&["score", label, &team.id, &p.id, opponent])).collect();
        Ok(Self { team_id: team.id.clone(), plan, priors, select_keys, score_keys })
    }

    fn prior(&self, i: usize) -> &PriorEntry {
        self.priors[i].as_ref().expect("plan only selects eligible players")
    }

    fn total<R: Rng + ?Sized>(&self, xi: &[usize], rng: &mut R) -> u32 {
        xi.iter().fold(0u32, |acc, &i| acc.saturating_add(self.prior(i).draw(rng)))
    }

    fn total_keyed(&self, xi: &[usize], keyed: &mut KeyedStream) -> u32 {
        xi.iter().fold(0u32, |acc, &i| acc.saturating_add(self.prior(i).draw_at(keyed.uniform(self.score_keys[i]))))
    }
}

/// Two prepared sides: validated selection plans and their priors.
#[derive(Debug, Clone)]
pub struct Matchup {
    a: Side,
    b: Side,
    fixed_xi: bool,
    crn: bool,
}

/// An estimate plus how often each roster player was selected.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRun {
    pub estimate: MatchEstimate,
    pub selected_a: Vec<u64>,
    pub selected_b: Vec<u64>,
}

#[derive(Debug, Clone)]
struct Tally {
    wins_a: u64,
    wins_b: u64,
    draws: u64,
    runs_a: u64,
    runs_b: u64,
    selected_a: Vec<u64>,
    selected_b: Vec<u64>,
}

impl Tally {
    fn new(la: usize, lb: usize) -> Self {
        Self { wins_a: 0, wins_b: 0, draws: 0, runs_a: 0, runs_b: 0, selected_a: vec![0; la], selected_b: vec![0; lb] }
    }

    fn record(&mut self, r: MatchResult, xa: &[usize], xb: &[usize]) {
        match r.outcome {
            Outcome::AWins => self.wins_a += 1,
            Outcome::BWins => self.wins_b += 1,
            Outcome::Draw => self.draws += 1,
        }
        self.runs_a += u64::from(r.score_a);
        self.runs_b += u64::from(r.score_b);
        xa.iter().for_each(|&i| self.selected_a[i] += 1);
        xb.iter().for_each(|&i| self.selected_b[i] += 1);
    }

    fn merge(mut self, o: Tally) -> Self {
        self.wins_a += o.wins_a;
        self.wins_b += o.wins_b;
        self.draws += o.draws;
        self.runs_a += o.runs_a;
        self.runs_b += o.runs_b;
        self.selected_a.iter_mut().zip(o.selected_a).for_each(|(x, y)| *x += y);
        self.selected_b.iter_mut().zip(o.selected_b).for_each(|(x, y)| *x += y);
        self
    }
}

impl Matchup {
    /// Validate both sides and pull their priors from `book`.
    #[allow(clippy::too_many_arguments)]
    pub fn prepare(
        dataset: &crate::Dataset,
        book: &PriorBook,
        team_a: &str,
        team_b: &str,
        config: &MatchConfig,
        constraint_a: &LineupConstraint,
        constraint_b: &LineupConstraint,
    ) -> Result<Self, SimError> {
        let ta = dataset.team(team_a).ok_or_else(|| DataError::UnknownTeam(team_a.to_string()))?;
        let tb = dataset.team(team_b).ok_or_else(|| DataError::UnknownTeam(team_b.to_string()))?;
        let a = Side::new(ta, team_b, "a", book, config.scheme_for(team_a), constraint_a)?;
        let b = Side::new(tb, team_a, "b", book, config.scheme_for(team_b), constraint_b)?;
        Ok(Self { a, b, fixed_xi: config.fixed_xi, crn: config.common_random_numbers })
    }

    pub fn team_a(&self) -> &str {
        &self.a.team_id
    }

    pub fn team_b(&self) -> &str {
        &self.b.team_id
    }

    /// Prior used for roster player `i` of side A (or B), if selectable.
    pub fn prior(&self, side_a: bool, i: usize) -> Option<&PriorEntry> {
        let side = if side_a { &self.a } else { &self.b };
        side.priors.get(i).and_then(Option::as_ref)
    }

    /// One match on `rng`: fresh XIs, then scores.
    pub fn play<R: Rng + ?Sized>(&self, rng: &mut R) -> MatchResult {
        let mut xa = Vec::with_capacity(11);
        let mut xb = Vec::with_capacity(11);
        self.a.plan.sample_into(rng, &mut xa);
        self.b.plan.sample_into(rng, &mut xb);
        MatchResult::new(self.a.total(&xa, rng), self.b.total(&xb, rng))
    }

    fn fixed_xis(&self, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let (mut xa, mut xb) = (Vec::new(), Vec::new());
        if self.crn {
            let mut keyed = KeyedStream::new(seed, FIXED_XI_STREAM);
            self.a.plan.sample_by_keys_into(|i| keyed.uniform(self.a.select_keys[i]), &mut xa);
            self.b.plan.sample_by_keys_into(|i| keyed.uniform(self.b.select_keys[i]), &mut xb);
        } else {
            let mut rng = substream(seed, FIXED_XI_STREAM);
            self.a.plan.sample_into(&mut rng, &mut xa);
            self.b.plan.sample_into(&mut rng, &mut xb);
        }
        (xa, xb)
    }

    /// Replicate `rep` of an estimate seeded with `seed`. The XIs used are
    /// left in `xa` / `xb`.
    pub fn replicate(
        &self,
        seed: u64,
        rep: u64,
        fixed: Option<&(Vec<usize>, Vec<usize>)>,
        xa: &mut Vec<usize>,
        xb: &mut Vec<usize>,
    ) -> MatchResult {
        if self.crn {
            let mut keyed = KeyedStream::new(seed, rep);
            match fixed {
                Some((fa, fb)) => {
                    xa.clone_from(fa);
                    xb.clone_from(fb);
                }
                None => {
                    self.a.plan.sample_by_keys_into(|i| keyed.uniform(self.a.select_keys[i]), xa);
                    self.b.plan.sample_by_keys_into(|i| keyed.uniform(self.b.select_keys[i]), xb);
                }
            }
            MatchResult::new(self.a.total_keyed(xa, &mut keyed), self.b.total_keyed(xb, &mut keyed))
        } else {
            let mut rng = substream(seed, rep);
            match fixed {
                Some((fa, fb)) => {
                    xa.clone_from(fa);
                    xb.clone_from(fb);
                }
                None => {
                    self.a.plan.sample_into(&mut rng, xa);
                    self.b.plan.sample_into(&mut rng, xb);
                }
            }
            MatchResult::new(self.a.total(xa, &mut rng), self.b.total(xb, &mut rng))
        }
    }

    /// `n` replicates on substreams `0..n` of `seed`, run in parallel.
    pub fn run(&self, n: u64, seed: u64) -> Result<MatchRun, SimError> {
        if n == 0 {
            return Err(SimError::NoReplicates);
        }
        let fixed = self.fixed_xi.then(|| self.fixed_xis(seed));
        let (la, lb) = (self.a.priors.len(), self.b.priors.len());
        let tally = (0..n)
            .into_par_iter()
            .fold(
                || (Tally::new(la, lb), Vec::with_capacity(11), Vec::with_capacity(11)),
                |(mut t, mut xa, mut xb), rep| {
                    let r = self.replicate(seed, rep, fixed.as_ref(), &mut xa, &mut xb);
                    t.record(r, &xa, &xb);
                    (t, xa, xb)
                },
            )
            .map(|(t, _, _)| t)
            .reduce(|| Tally::new(la, lb), Tally::merge);
        let nf = n as f64;
        let estimate = MatchEstimate {
            p_a: tally.wins_a as f64 / nf,
            p_b: tally.wins_b as f64 / nf,
            p_draw: tally.draws as f64 / nf,
            n,
            seed,
            mean_score_a: tally.runs_a as f64 / nf,
            mean_score_b: tally.runs_b as f64 / nf,
            wins_a: tally.wins_a,
            wins_b: tally.wins_b,
            draws: tally.draws,
        };
        Ok(MatchRun { estimate, selected_a: tally.selected_a, selected_b: tally.selected_b })
    }

    pub fn estimate(&self, n: u64, seed: u64) -> Result<MatchEstimate, SimError> {
        self.run(n, seed).map(|r| r.estimate)
    }
}

/// Play one match between two prepared sides.
pub fn simulate_match<R: Rng + ?Sized>(matchup: &Matchup, rng: &mut R) -> MatchResult {
    matchup.play(rng)
}

/// Estimate `team_a` vs `team_b` with unconstrained lineups.
pub fn estimate_matchup(
    dataset: &crate::Dataset,
    team_a: &str,
    team_b: &str,
    config: &MatchConfig,
    n: u64,
    seed: u64,
) -> Result<MatchEstimate, SimError> {
    let book = PriorBook::build(dataset, &[team_a, team_b], config.fit)?;
    let free = LineupConstraint::default();
    Matchup::prepare(dataset, &book, team_a, team_b, config, &free, &free)?.estimate(n, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadToHeadEntry {
    pub a: String,
    pub b: String,
    pub p_a: f64,
    pub p_b: f64,
    pub p_draw: f64,
    pub n: u64,
    pub seed: u64,
}

/// One estimate per ordered pair of distinct teams, row-major in `teams`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadToHead {
    pub teams: Vec<String>,
    pub entries: Vec<HeadToHeadEntry>,
}

impl HeadToHead {
    pub fn get(&self, a: &str, b: &str) -> Option<&HeadToHeadEntry> {
        self.entries.iter().find(|e| e.a == a && e.b == b)
    }

    /// `(winner, loser) → P(winner beats loser)`.
    pub fn win_probabilities(&self) -> BTreeMap<(String, String), f64> {
        self.entries.iter().map(|e| ((e.a.clone(), e.b.clone()), e.p_a)).collect()
    }
}

/// Seed used for the ordered pair `(a, b)` of a head-to-head run.
pub fn pair_seed(seed: u64, a: &str, b: &str) -> u64 {
    derive_seed(seed, stable_key(&[a, b]))
}

pub fn head_to_head_matrix(
    dataset: &crate::Dataset,
    teams: &[&str],
    config: &MatchConfig,
    n: u64,
    seed: u64,
) -> Result<HeadToHead, SimError> {
    if teams.len() < 2 {
        return Err(SimError::Config("head-to-head needs at least two teams".into()));
    }
    let book = PriorBook::build(dataset, teams, config.fit)?;
    let free = LineupConstraint::default();
    let mut entries = Vec::with_capacity(teams.len() * (teams.len() - 1));
    for &a in teams {
        for &b in teams {
            if a == b {
                continue;
            }
            let s = pair_seed(seed, a, b);
            let est = Matchup::prepare(dataset, &book, a, b, config, &free, &free)?.estimate(n, s)?;
            entries.push(HeadToHeadEntry {
                a: a.to_string(),
                b: b.to_string(),
                p_a: est.p_a,
                p_b: est.p_b,
                p_draw: est.p_draw,
                n,
                seed: s,
            });
        }
    }
    Ok(HeadToHead { teams: teams.iter().map(|t| t.to_string()).collect(), entries })
}
