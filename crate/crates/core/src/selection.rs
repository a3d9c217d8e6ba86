//! Stratified random sampling of an XI.
//!
//! Each role is a stratum sampled by simple random sampling without
//! replacement, so every eligible subset of the stratum's open slots is
//! equally likely. In overseas mode the overseas players form one extra
//! stratum drawn with an exact count, and the role quotas apply to the
//! domestic players only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roster::{Player, Role, Team, XI_SIZE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectionError {
    #[error("quotas sum to {got}, expected {expected}")]
    BadTotal { got: u32, expected: u32 },
    #[error("spin shift {shift} exceeds the fast-bowler quota {fast}")]
    ShiftTooLarge { shift: u32, fast: u32 },
    #[error("player `{0}` is both locked and excluded")]
    LockedAndExcluded(String),
    #[error("player `{player}` is not on the roster of `{team}`")]
    NotOnRoster { player: String, team: String },
    #[error("stratum `{stratum}` infeasible: quota {quota}, {locked} locked, {eligible} eligible")]
    Infeasible { stratum: Stratum, quota: u32, locked: usize, eligible: usize },
}

impl SelectionError {
    /// The stratum at fault, for infeasibility errors.
    pub fn stratum(&self) -> Option<Stratum> {
        match self {
            SelectionError::Infeasible { stratum, .. } => Some(*stratum),
            _ => None,
        }
    }
}

/// A sampling stratum: one role, or the overseas pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Role(Role),
    Overseas,
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::Role(r) => f.write_str(r.code()),
            Stratum::Overseas => f.write_str("overseas"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsProfile {
    /// Quota slots moved from fast bowlers to spinners.
    pub spin_shift: u32,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionScheme {
    pub quotas: BTreeMap<Role, u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overseas_count: Option<u32>,
    #[serde(default)]
    pub conditions: ConditionsProfile,
}

impl Default for SelectionScheme {
    fn default() -> Self {
        Self::odi()
    }
}

impl SelectionScheme {
    fn with_quotas(q: [u32; 6], overseas_count: Option<u32>) -> Self {
        Self {
            quotas: Role::ALL.into_iter().zip(q).collect(),
            overseas_count,
            conditions: ConditionsProfile::default(),
        }
    }

    /// Three fast, two spin, one of each all-rounder, three bats, one keeper.
    pub fn odi() -> Self {
        Self::with_quotas([3, 2, 1, 1, 3, 1], None)
    }

    /// Four overseas players plus seven role-stratified domestic players.
    pub fn ipl() -> Self {
        Self::with_quotas([2, 1, 1, 1, 1, 1], Some(4))
    }

    pub fn quota(&self, role: Role) -> u32 {
        self.quotas.get(&role).copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        let got = self.quotas.values().sum::<u32>() + self.overseas_count.unwrap_or(0);
        if got as usize != XI_SIZE {
            return Err(SelectionError::BadTotal { got, expected: XI_SIZE as u32 });
        }
        Ok(())
    }
}

/// Move `spin_shift` slots from fast bowlers to spinners. The returned
/// scheme carries a zero shift, so applying it again changes nothing.
pub fn apply_conditions(scheme: &SelectionScheme) -> Result<SelectionScheme, SelectionError> {
    let shift = scheme.conditions.spin_shift;
    if shift == 0 {
        return Ok(scheme.clone());
    }
    let fast = scheme.quota(Role::FastBowler);
    if shift > fast {
        return Err(SelectionError::ShiftTooLarge { shift, fast });
    }
    let mut out = scheme.clone();
    out.quotas.insert(Role::FastBowler, fast - shift);
    *out.quotas.entry(Role::Spinner).or_insert(0) += shift;
    out.conditions.spin_shift = 0;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineupConstraint {
    pub locked: BTreeSet<String>,
    pub excluded: BTreeSet<String>,
}

impl LineupConstraint {
    pub fn is_empty(&self) -> bool {
        self.locked.is_empty() && self.excluded.is_empty()
    }
}

#[derive(Debug, Clone)]
struct StratumPlan {
    stratum: Stratum,
    locked: Vec<usize>,
    pool: Vec<usize>,
    draws: usize,
}

/// A validated scheme + constraint for one roster, ready to sample from.
/// Players are referred to by roster index.
#[derive(Debug, Clone)]
pub struct SelectionPlan {
    strata: Vec<StratumPlan>,
}

impl SelectionPlan {
    pub fn new(team: &Team, scheme: &SelectionScheme, constraint: &LineupConstraint) -> Result<Self, SelectionError> {
        scheme.validate()?;
        let scheme = apply_conditions(scheme)?;
        if let Some(id) = constraint.locked.intersection(&constraint.excluded).next() {
            return Err(SelectionError::LockedAndExcluded(id.clone()));
        }
        for id in constraint.locked.iter().chain(&constraint.excluded) {
            if team.player_index(id).is_none() {
                return Err(SelectionError::NotOnRoster { player: id.clone(), team: team.id.clone() });
            }
        }

        // with an overseas quota, role strata hold domestic players only
        let split = scheme.overseas_count.is_some();
        let member = |stratum: Stratum, p: &Player| match stratum {
            Stratum::Overseas => p.overseas,
            Stratum::Role(role) => p.role == role && !(split && p.overseas),
        };
        let strata: Vec<(Stratum, u32)> = scheme
            .overseas_count
            .map(|n| (Stratum::Overseas, n))
            .into_iter()
            .chain(Role::ALL.into_iter().map(|role| (Stratum::Role(role), scheme.quota(role))))
            .collect();

        let mut plans = Vec::with_capacity(strata.len());
        for (stratum, quota) in strata {
            let mut locked = Vec::new();
            let mut pool = Vec::new();
            for (i, p) in team.roster.iter().enumerate() {
                if !member(stratum, p) {
                    continue;
                }
                if constraint.locked.contains(&p.id) {
                    locked.push(i);
                } else if !constraint.excluded.contains(&p.id) {
                    pool.push(i);
                }
            }
            let quota_n = quota as usize;
            if locked.len() > quota_n || pool.len() < quota_n - locked.len() {
                return Err(SelectionError::Infeasible { stratum, quota, locked: locked.len(), eligible: locked.len() + pool.len() });
            }
            let draws = quota_n - locked.len();
            plans.push(StratumPlan { stratum, locked, pool, draws });
        }
        Ok(Self { strata: plans })
    }

    /// Draw an XI (roster indices) into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        for s in &self.strata {
            out.extend_from_slice(&s.locked);
            if s.draws == s.pool.len() {
                out.extend_from_slice(&s.pool);
            } else if s.draws > 0 {
                out.extend(rand::seq::index::sample(rng, s.pool.len(), s.draws).iter().map(|k| s.pool[k]));
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::with_capacity(XI_SIZE);
        self.sample_into(rng, &mut out);
        out
    }

    /// Draw an XI by random keys: within each stratum the open slots go to
    /// the eligible players with the smallest keys. With i.i.d. uniform keys
    /// this is simple random sampling; with keys shared across scenarios it
    /// changes as little as possible when a lock or exclusion changes.
    pub fn sample_by_keys_into(&self, mut key: impl FnMut(usize) -> f64, out: &mut Vec<usize>) {
        out.clear();
        let mut ranked: Vec<(f64, usize)> = Vec::new();
        for s in &self.strata {
            out.extend_from_slice(&s.locked);
            ranked.clear();
            ranked.extend(s.pool.iter().map(|&i| (key(i), i)));
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            out.extend(ranked.iter().take(s.draws).map(|&(_, i)| i));
        }
    }

    /// Every roster index that can appear in an XI under this plan.
    pub fn eligible(&self) -> impl Iterator<Item = usize> + '_ {
        self.strata.iter().flat_map(|s| s.locked.iter().chain(&s.pool).copied())
    }

    pub fn stratum_of(&self, roster_index: usize) -> Option<Stratum> {
        self.strata.iter().find(|s| s.locked.contains(&roster_index) || s.pool.contains(&roster_index)).map(|s| s.stratum)
    }
}

/// Draw one XI from `team`.
pub fn sample_xi<'t, R: Rng + ?Sized>(
    team: &'t Team,
    scheme: &SelectionScheme,
    constraint: &LineupConstraint,
    rng: &mut R,
) -> Result<Vec<&'t Player>, SelectionError> {
    let plan = SelectionPlan::new(team, scheme, constraint)?;
    Ok(plan.sample(rng).into_iter().map(|i| &team.roster[i]).collect())
}
