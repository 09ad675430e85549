//! Finite strategic games with exact payoffs and their tribal extensions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::partition::Partition;
use crate::rational::Rational;

/// Whether players minimise cost or maximise utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[serde(rename = "cost")]
    CostMin,
    #[serde(rename = "utility")]
    UtilityMax,
}

impl Orientation {
    /// `candidate` is strictly better than `current` for the party holding them.
    #[inline]
    pub fn improves(self, candidate: Rational, current: Rational) -> bool {
        match self {
            Orientation::CostMin => candidate < current,
            Orientation::UtilityMax => candidate > current,
        }
    }

    #[inline]
    pub fn weakly_improves(self, candidate: Rational, current: Rational) -> bool {
        candidate == current || self.improves(candidate, current)
    }

    /// Strictly worse welfare, i.e. `candidate` would replace `current` as the worst.
    #[inline]
    pub fn is_worse(self, candidate: Rational, current: Rational) -> bool {
        self.improves(current, candidate)
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::CostMin => "cost",
            Orientation::UtilityMax => "utility",
        }
    }
}

/// Payoff of each player at each profile of the full product space.
///
/// `group_payoff` exists so that families with shared state (loads,
/// edge rewards) can sum a large group in one pass.
pub trait PayoffFn: Send + Sync {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational;

    fn group_payoff(&self, members: &[usize], profile: &[usize]) -> Rational {
        members.iter().map(|&j| self.payoff(j, profile)).sum()
    }
}

impl<F> PayoffFn for F
where
    F: Fn(usize, &[usize]) -> Rational + Send + Sync,
{
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        self(player, profile)
    }
}

#[derive(Clone)]
pub struct Game {
    orientation: Orientation,
    strategy_counts: Vec<usize>,
    payoff: Arc<dyn PayoffFn>,
    everyone: Vec<usize>,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("orientation", &self.orientation)
            .field("strategy_counts", &self.strategy_counts)
            .finish_non_exhaustive()
    }
}

impl Game {
    pub fn new(
        orientation: Orientation,
        strategy_counts: Vec<usize>,
        payoff: impl PayoffFn + 'static,
    ) -> Result<Game> {
        Self::from_arc(orientation, strategy_counts, Arc::new(payoff))
    }

    pub fn from_arc(
        orientation: Orientation,
        strategy_counts: Vec<usize>,
        payoff: Arc<dyn PayoffFn>,
    ) -> Result<Game> {
        if strategy_counts.is_empty() {
            return Err(structural("a game needs at least one player"));
        }
        if let Some(i) = strategy_counts.iter().position(|&c| c == 0) {
            return Err(structural(format!("player {i} has an empty strategy set")));
        }
        let everyone = (0..strategy_counts.len()).collect();
        Ok(Game {
            orientation,
            strategy_counts,
            payoff,
            everyone,
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn player_count(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn payoff_fn(&self) -> &Arc<dyn PayoffFn> {
        &self.payoff
    }

    /// Size of the full profile space, saturating at `u128::MAX`.
    pub fn profile_count(&self) -> u128 {
        self.strategy_counts
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
            .unwrap_or(u128::MAX)
    }

    pub fn validate_profile(&self, profile: &Profile) -> Result<()> {
        if profile.len() != self.player_count() {
            return Err(structural(format!(
                "profile has {} entries, game has {} players",
                profile.len(),
                self.player_count()
            )));
        }
        for (i, (&s, &c)) in profile.choice.iter().zip(&self.strategy_counts).enumerate() {
            if s >= c {
                return Err(structural(format!(
                    "player {i} plays strategy {s} but has only {c}"
                )));
            }
        }
        Ok(())
    }

    /// Raw payoff lookup; `profile` is assumed valid.
    #[inline]
    pub fn payoff_at(&self, player: usize, profile: &[usize]) -> Rational {
        self.payoff.payoff(player, profile)
    }

    #[inline]
    pub fn group_payoff_at(&self, members: &[usize], profile: &[usize]) -> Rational {
        self.payoff.group_payoff(members, profile)
    }

    #[inline]
    pub fn welfare_at(&self, profile: &[usize]) -> Rational {
        self.payoff.group_payoff(&self.everyone, profile)
    }

    pub fn payoff(&self, player: usize, profile: &Profile) -> Result<Rational> {
        self.validate_profile(profile)?;
        if player >= self.player_count() {
            return Err(structural(format!("no player {player}")));
        }
        Ok(self.payoff_at(player, profile.as_slice()))
    }

    pub fn payoffs(&self, profile: &Profile) -> Result<Vec<Rational>> {
        self.validate_profile(profile)?;
        Ok((0..self.player_count())
            .map(|i| self.payoff_at(i, profile.as_slice()))
            .collect())
    }

    /// Sum of base payoffs over all players.
    pub fn social_welfare(&self, profile: &Profile) -> Result<Rational> {
        self.validate_profile(profile)?;
        Ok(self.welfare_at(profile.as_slice()))
    }

    /// The game in which every player's payoff is the total of its tribe.
    pub fn tribal_extension(&self, partition: &Partition) -> Result<Game> {
        partition.check_players(self.player_count())?;
        let ext = TribalPayoff {
            base: Arc::clone(&self.payoff),
            tribe_of: partition.tribe_of().to_vec(),
            members: partition.members(),
        };
        Self::from_arc(self.orientation, self.strategy_counts.clone(), Arc::new(ext))
    }

    /// Adds one extra player with a single strategy and identically zero payoff.
    pub fn padded(&self) -> Game {
        let n = self.player_count();
        let mut counts = self.strategy_counts.clone();
        counts.push(1);
        let pad = PaddedPayoff {
            base: Arc::clone(&self.payoff),
            base_players: n,
        };
        Self::from_arc(self.orientation, counts, Arc::new(pad)).expect("padding keeps counts valid")
    }

    /// Profile at a lexicographic index (player 0 most significant).
    pub fn profile_at(&self, mut index: u128) -> Profile {
        let mut choice = vec![0; self.player_count()];
        for (slot, &c) in choice.iter_mut().zip(&self.strategy_counts).rev() {
            *slot = (index % c as u128) as usize;
            index /= c as u128;
        }
        Profile { choice }
    }

    pub fn index_of(&self, profile: &Profile) -> u128 {
        profile
            .choice
            .iter()
            .zip(&self.strategy_counts)
            .fold(0u128, |acc, (&s, &c)| acc * c as u128 + s as u128)
    }

    /// Advances `choice` to the lexicographic successor; false after the last profile.
    pub fn advance(&self, choice: &mut [usize]) -> bool {
        for (slot, &c) in choice.iter_mut().zip(&self.strategy_counts).rev() {
            *slot += 1;
            if *slot < c {
                return true;
            }
            *slot = 0;
        }
        false
    }
}

struct TribalPayoff {
    base: Arc<dyn PayoffFn>,
    tribe_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl PayoffFn for TribalPayoff {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        self.base
            .group_payoff(&self.members[self.tribe_of[player]], profile)
    }
}

struct PaddedPayoff {
    base: Arc<dyn PayoffFn>,
    base_players: usize,
}

impl PayoffFn for PaddedPayoff {
    fn payoff(&self, player: usize, profile: &[usize]) -> Rational {
        if player == self.base_players {
            Rational::ZERO
        } else {
            self.base.payoff(player, &profile[..self.base_players])
        }
    }

    fn group_payoff(&self, members: &[usize], profile: &[usize]) -> Rational {
        let real: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&j| j != self.base_players)
            .collect();
        self.base.group_payoff(&real, &profile[..self.base_players])
    }
}

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile {
    choice: Vec<usize>,
}

impl Profile {
    pub fn new(choice: Vec<usize>) -> Profile {
        Profile { choice }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.choice
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.choice
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn get(&self, player: usize) -> usize {
        self.choice[player]
    }

    /// Replaces the listed players' choices; everyone else keeps theirs.
    pub fn substitute(&self, moves: &[(usize, usize)]) -> Result<Profile> {
        let mut seen = vec![false; self.choice.len()];
        let mut choice = self.choice.clone();
        for &(player, strategy) in moves {
            if player >= choice.len() {
                return Err(structural(format!("move for unknown player {player}")));
            }
            if std::mem::replace(&mut seen[player], true) {
                return Err(structural(format!("player {player} moves twice")));
            }
            choice[player] = strategy;
        }
        Ok(Profile { choice })
    }
}

impl From<Vec<usize>> for Profile {
    fn from(choice: Vec<usize>) -> Self {
        Profile { choice }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.choice.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}
