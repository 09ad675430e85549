//! Pure equilibria of tribal extensions under four deviation concepts.
//!
//! All checks work on the base game plus a partition: a player's objective
//! is the total base payoff of its tribe, and a deviation blocks a profile
//! only if it is a strict improvement for every party it has to convince.

mod check;
mod dynamics;
mod pot;
mod scan;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{config, structural, Result};
use crate::game::{Game, Profile};
use crate::partition::Partition;
use crate::rational::Rational;

pub use dynamics::{best_response_dynamics, DynamicsStatus, Trajectory};
pub use pot::{compute_optimum, compute_pot, enumerate_equilibria, PotRatio, PotReport};

pub(crate) use check::Checker;

/// Resource limits for exhaustive scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest profile space a scan will walk.
    pub profile_budget: u64,
    /// Largest product of strategy sets a single tribe may jointly search.
    pub joint_move_budget: u64,
    /// Largest number of partitions a sweep will yield.
    pub partition_budget: u64,
    pub workers: usize,
}

pub const DEFAULT_PROFILE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_JOINT_MOVE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_PARTITION_BUDGET: u64 = 1_000_000;
pub const PROFILE_BUDGET_ENV: &str = "TRIBEGAMES_PROFILE_BUDGET";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            profile_budget: DEFAULT_PROFILE_BUDGET,
            joint_move_budget: DEFAULT_JOINT_MOVE_BUDGET,
            partition_budget: DEFAULT_PARTITION_BUDGET,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl Limits {
    /// Defaults, with the profile budget taken from the environment when set.
    pub fn from_env() -> Result<Limits> {
        let mut limits = Limits::default();
        if let Ok(v) = std::env::var(PROFILE_BUDGET_ENV) {
            limits.profile_budget = v
                .trim()
                .parse()
                .ok()
                .filter(|&b: &u64| b > 0)
                .ok_or_else(|| config(format!("{PROFILE_BUDGET_ENV}={v} is not a positive integer")))?;
        }
        Ok(limits)
    }

    pub fn with_workers(mut self, workers: usize) -> Limits {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Unilateral,
    Pairwise,
    Coordinated,
    Oligopolistic,
}

impl ConceptKind {
    pub const ALL: [ConceptKind; 4] = [
        ConceptKind::Unilateral,
        ConceptKind::Pairwise,
        ConceptKind::Coordinated,
        ConceptKind::Oligopolistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConceptKind::Unilateral => "unilateral",
            ConceptKind::Pairwise => "pairwise",
            ConceptKind::Coordinated => "coordinated",
            ConceptKind::Oligopolistic => "oligopolistic",
        }
    }
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConceptKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        ConceptKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| config(format!("unknown deviation concept `{s}`")))
    }
}

/// How much a joint pair deviation must help both tribes to block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRule {
    /// Strict improvement for both tribes.
    #[default]
    BothStrict,
    /// Weak improvement for both, strict for at least one.
    OneStrictOneWeak,
}

/// Symmetric player-pair relation, stored as sorted pairs `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Adjacency {
    pairs: Vec<(usize, usize)>,
}

impl Adjacency {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Adjacency> {
        let mut out = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(structural(format!("player {a} adjacent to itself")));
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Adjacency { pairs: out })
    }

    pub fn complete(n: usize) -> Adjacency {
        let pairs = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Adjacency { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationConcept {
    pub kind: ConceptKind,
    pub adjacency: Option<Adjacency>,
    pub pair_rule: PairRule,
}

impl DeviationConcept {
    pub fn unilateral() -> Self {
        Self::of_kind(ConceptKind::Unilateral)
    }

    pub fn pairwise(adjacency: Adjacency) -> Self {
        DeviationConcept {
            kind: ConceptKind::Pairwise,
            adjacency: Some(adjacency),
            pair_rule: PairRule::BothStrict,
        }
    }

    pub fn coordinated() -> Self {
        Self::of_kind(ConceptKind::Coordinated)
    }

    pub fn oligopolistic() -> Self {
        Self::of_kind(ConceptKind::Oligopolistic)
    }

    pub fn of_kind(kind: ConceptKind) -> Self {
        DeviationConcept {
            kind,
            adjacency: None,
            pair_rule: PairRule::BothStrict,
        }
    }

    pub fn with_pair_rule(mut self, rule: PairRule) -> Self {
        self.pair_rule = rule;
        self
    }

    pub(crate) fn validate(&self, players: usize) -> Result<()> {
        if self.kind == ConceptKind::Pairwise {
            let adj = self
                .adjacency
                .as_ref()
                .ok_or_else(|| config("pairwise deviations need a player adjacency relation"))?;
            if let Some(&(a, b)) = adj.pairs().iter().find(|&&(_, b)| b >= players) {
                return Err(structural(format!(
                    "adjacency pair ({a},{b}) out of range for {players} players"
                )));
            }
        }
        Ok(())
    }
}

/// A concrete blocking deviation that anyone can re-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub concept: ConceptKind,
    /// `(player, new strategy)`, players ascending.
    pub moves: Vec<(usize, usize)>,
    /// Tribes whose totals must improve, in the order the concept lists them.
    pub tribes: Vec<usize>,
    pub before: Vec<Rational>,
    pub after: Vec<Rational>,
    pub pair_rule: Option<PairRule>,
}

impl Deviation {
    pub fn deviators(&self) -> Vec<usize> {
        self.moves.iter().map(|&(p, _)| p).collect()
    }

    /// Recomputes tribe totals from individual base payoffs and confirms the
    /// deviation really improves the required tribes.
    pub fn recheck(&self, base: &Game, partition: &Partition, profile: &Profile) -> Result<bool> {
        base.validate_profile(profile)?;
        partition.check_players(base.player_count())?;
        let moved = profile.substitute(&self.moves)?;
        base.validate_profile(&moved)?;
        if self.moves.is_empty() || self.tribes.is_empty() {
            return Ok(false);
        }
        let o = base.orientation();
        let total = |t: usize, s: &Profile| -> Result<Rational> {
            let mut acc = Rational::ZERO;
            for j in (0..base.player_count()).filter(|&j| partition.tribe(j) == t) {
                acc += base.payoff(j, s)?;
            }
            Ok(acc)
        };
        let mut strict = Vec::new();
        let mut weak = Vec::new();
        for &t in &self.tribes {
            let (b, a) = (total(t, profile)?, total(t, &moved)?);
            strict.push(o.improves(a, b));
            weak.push(o.weakly_improves(a, b));
        }
        Ok(match self.pair_rule {
            Some(PairRule::OneStrictOneWeak) => {
                weak.iter().all(|&w| w) && strict.iter().any(|&s| s)
            }
            _ => strict.iter().all(|&s| s),
        })
    }
}

/// Outcome of a single equilibrium check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Blocked(Deviation),
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }

    pub fn witness(&self) -> Option<&Deviation> {
        match self {
            Stability::Stable => None,
            Stability::Blocked(d) => Some(d),
        }
    }
}

pub fn is_equilibrium(
    base: &Game,
    partition: &Partition,
    profile: &Profile,
    concept: &DeviationConcept,
    limits: &Limits,
) -> Result<Stability> {
    base.validate_profile(profile)?;
    let checker = Checker::new(base, partition, concept, limits)?;
    let mut scratch = profile.as_slice().to_vec();
    Ok(match checker.find_blocking(&mut scratch) {
        None => Stability::Stable,
        Some(d) => Stability::Blocked(d),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub profile: Profile,
    pub welfare: Rational,
    pub survives: BTreeMap<ConceptKind, bool>,
    /// Witness for the first concept (in the order asked) that the profile fails.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocking_witness: Option<Deviation>,
}

impl EquilibriumReport {
    pub fn survives_all(&self) -> bool {
        self.survives.values().all(|&s| s)
    }
}

/// Checks one profile against several concepts at once.
pub fn evaluate_profile(
    base: &Game,
    partition: &Partition,
    profile: &Profile,
    concepts: &[DeviationConcept],
    limits: &Limits,
) -> Result<EquilibriumReport> {
    base.validate_profile(profile)?;
    let mut survives = BTreeMap::new();
    let mut witness = None;
    for concept in concepts {
        let verdict = is_equilibrium(base, partition, profile, concept, limits)?;
        survives.insert(concept.kind, verdict.is_stable());
        if let Stability::Blocked(d) = verdict {
            witness.get_or_insert(d);
        }
    }
    Ok(EquilibriumReport {
        profile: profile.clone(),
        welfare: base.welfare_at(profile.as_slice()),
        survives,
        blocking_witness: witness,
    })
}
